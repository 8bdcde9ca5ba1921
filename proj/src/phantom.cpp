#include "eit/phantom.hpp"

#include <stdexcept>

namespace eit {

bool Inclusion::contains(const Point& p) const {
  const double u = (p.x - center.x) / semi_x;
  const double v = (p.y - center.y) / semi_y;
  if (u * u + v * v >= 1.0) return false;
  return shape == Shape::Disk || p.y >= center.y;
}

double Phantom::value_at(const Point& p) const {
  for (const auto& inclusion : inclusions) {
    if (inclusion.contains(p)) return background + contrast;
  }
  return background;
}

Phantom three_inclusion_phantom() {
  Phantom p;
  p.id = "three-inclusion";
  p.background = 1.0;
  p.contrast = 1.0;
  p.inclusions = {
      {Inclusion::Shape::HalfEllipse, {-0.05, 0.2}, 0.45, 0.4},
      {Inclusion::Shape::Disk, {-0.33, -0.33}, 0.2, 0.2},
      {Inclusion::Shape::Disk, {0.38, -0.28}, 0.19, 0.19},
  };
  return p;
}

Phantom phantom_by_id(const std::string& id) {
  if (id == "three-inclusion") return three_inclusion_phantom();
  if (id == "homogeneous") return Phantom{"homogeneous", 1.0, 0.0, {}};
  throw std::invalid_argument("unknown phantom '" + id + "'");
}

ConductivityField rasterize(const Mesh& mesh, const Phantom& phantom) {
  ConductivityField field;
  field.tag = phantom.id;
  field.values.reserve(mesh.element_count());
  for (std::size_t t = 0; t < mesh.element_count(); ++t) field.values.push_back(phantom.value_at(mesh.centroid(t)));
  field.validate(mesh);
  return field;
}

}  // namespace eit
