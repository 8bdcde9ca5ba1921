#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace eit {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Boundary edge `a -> b`, oriented counter-clockwise, with the polar angles of
/// both endpoints (theta_b may exceed 2*pi on the closing edge).
struct BoundaryEdge {
  int a = 0;
  int b = 0;
  double theta_a = 0.0;
  double theta_b = 0.0;
  int electrode = -1;
};

/// Triangulation of the unit disk.
///
/// `lineage[k][t]` is the ancestor of triangle `t` that lies `k + 1` uniform
/// refinement levels above this mesh; it is empty for a mesh that was not
/// produced by `refine_uniform`.
struct Mesh {
  std::vector<Point> nodes;
  std::vector<std::array<int, 3>> triangles;
  std::vector<BoundaryEdge> boundary;
  std::vector<std::vector<int>> lineage;

  std::size_t node_count() const { return nodes.size(); }
  std::size_t element_count() const { return triangles.size(); }

  double signed_area(std::size_t t) const;
  Point centroid(std::size_t t) const;
  double total_area() const;

  /// Throws std::logic_error when an invariant is violated: non-positive
  /// triangle area, boundary not a single closed loop, or boundary nodes off
  /// the unit circle by more than 1e-9.
  void validate() const;
};

/// Electrodes are disjoint boundary arcs, numbered counter-clockwise from the
/// arc centred at angle zero. Indices wrap: `wrap(m) == 0`, `wrap(-1) == m-1`.
struct ElectrodeLayout {
  int m = 0;
  double coverage_fraction = 0.0;
  std::vector<std::vector<int>> electrodes;  // boundary-edge indices per electrode

  int wrap(int index) const {
    const int r = index % m;
    return r < 0 ? r + m : r;
  }
  /// Cyclic distance |j - k| modulo m.
  int cyclic_distance(int j, int k) const;
  /// Node indices touched by electrode `l`.
  std::vector<int> nodes_of(const Mesh& mesh, int l) const;
  /// Total arc length of electrode `l` (radians on the unit circle).
  double arc_length(const Mesh& mesh, int l) const;
};

struct MeshOptions {
  /// Rotation of interior node rings in units of one ring spacing. A forward
  /// mesh and a reconstruction mesh built with different phases share no
  /// interior element.
  double ring_phase = 0.0;
  /// Fewest boundary edges allowed on one electrode. A base mesh that is
  /// refined afterwards may use 1.
  int min_electrode_edges = 2;
};

/// Target boundary edge length for a refinement level: 2*pi / (8 * 2^level).
double boundary_spacing(int refinement);

/// Smallest refinement that places at least `min_edges` boundary edges on each
/// of `m` electrodes covering `coverage_fraction` of the circumference.
int minimum_refinement(int m, double coverage_fraction, int min_edges = 2);

struct DiskMesh {
  Mesh mesh;
  ElectrodeLayout layout;
};

/// Deterministic ring triangulation of the unit disk with `m` equiangular
/// electrodes. Electrode endpoints are mesh nodes, so every electrode arc is
/// represented exactly.
DiskMesh build_disk_mesh(int refinement, int m, double coverage_fraction,
                         const MeshOptions& options = {});

/// Red refinement: every triangle is split into four children, boundary edge
/// midpoints are projected onto the unit circle and inherit the electrode id.
DiskMesh refine_uniform(const DiskMesh& coarse);

/// Rebuilds the electrode index from the electrode ids on the boundary edges.
ElectrodeLayout layout_from_boundary(const Mesh& mesh, int m, double coverage_fraction);

struct PixelPartition {
  std::vector<std::vector<int>> pixels;  // element indices per pixel
  std::vector<int> element_pixel;        // pixel of each element
  std::vector<Point> centroids;          // area-weighted
  std::vector<double> areas;

  std::size_t size() const { return pixels.size(); }
};

/// Groups triangles by their ancestor `coarsening` refinement levels up;
/// level 0 makes every triangle its own pixel.
PixelPartition build_pixel_partition(const Mesh& mesh, int coarsening = 0);

struct SupportBound {
  double radius = 0.0;
  std::vector<int> pixel_indices;  // sorted
};

/// Union of all pixels that intersect the open ball of radius `radius` about
/// the origin.
SupportBound support_bound(const Mesh& mesh, const PixelPartition& partition, double radius);

/// Euclidean distance from the origin to the closed triangle `t`.
double distance_to_origin(const Mesh& mesh, std::size_t t);

/// Plain-text mesh format:
///   nodes N triangles T edges E
///   x y                (N lines)
///   i j k              (T lines, 0-based)
///   a b electrode      (E lines, electrode -1 on gaps)
void write_mesh(std::ostream& out, const Mesh& mesh);
Mesh read_mesh(std::istream& in);

}  // namespace eit
