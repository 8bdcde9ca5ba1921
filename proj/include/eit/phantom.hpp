#pragma once

#include <string>
#include <vector>

#include "eit/forward.hpp"
#include "eit/geometry.hpp"

namespace eit {

struct Inclusion {
  enum class Shape { Disk, HalfEllipse };

  Shape shape = Shape::Disk;
  Point center;
  double semi_x = 0.0;  // radius for a disk
  double semi_y = 0.0;
  /// Half-ellipses keep the half with y >= center.y.
  bool contains(const Point& p) const;
};

struct Phantom {
  std::string id;
  double background = 1.0;
  double contrast = 1.0;  // added to the background inside every inclusion
  std::vector<Inclusion> inclusions;

  double value_at(const Point& p) const;
};

/// Background 1 plus unit contrast on a half-ellipse and two small disks, all
/// inside radius 0.67. The coordinates are fixed constants of this project.
Phantom three_inclusion_phantom();

/// Looks a phantom up by id ("three-inclusion", "homogeneous").
Phantom phantom_by_id(const std::string& id);

/// Element-centroid rasterisation.
ConductivityField rasterize(const Mesh& mesh, const Phantom& phantom);

}  // namespace eit
