#include "eit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

#include "eit/text.hpp"

namespace eit {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double cross(const Point& o, const Point& a, const Point& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

double segment_distance_to_origin(const Point& a, const Point& b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? -(a.x * dx + a.y * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(a.x + t * dx, a.y + t * dy);
}

struct RingNode {
  double angle;  // normalised to [0, 2*pi)
  int index;
};

double normalise_angle(double angle) {
  double a = std::fmod(angle, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  return a;
}

// Triangulates the annular strip between two closed node rings. Both rings
// must be sorted by angle.
void stitch_rings(const std::vector<RingNode>& inner, const std::vector<RingNode>& outer,
                  std::vector<std::array<int, 3>>& triangles) {
  const std::size_t na = inner.size();
  const std::size_t nb = outer.size();
  auto inner_angle = [&](std::size_t i) { return inner[i % na].angle + (i >= na ? kTwoPi : 0.0); };
  auto outer_angle = [&](std::size_t j) { return outer[j % nb].angle + (j >= nb ? kTwoPi : 0.0); };

  std::size_t i = 0;
  std::size_t j = 0;
  while (i < na || j < nb) {
    const bool advance_outer = j < nb && (i == na || outer_angle(j + 1) < inner_angle(i + 1));
    if (advance_outer) {
      triangles.push_back({outer[j % nb].index, outer[(j + 1) % nb].index, inner[i % na].index});
      ++j;
    } else {
      triangles.push_back({inner[i % na].index, outer[j % nb].index, inner[(i + 1) % na].index});
      ++i;
    }
  }
}

}  // namespace

double Mesh::signed_area(std::size_t t) const {
  const auto& tri = triangles[t];
  return 0.5 * cross(nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]);
}

Point Mesh::centroid(std::size_t t) const {
  const auto& tri = triangles[t];
  return {(nodes[tri[0]].x + nodes[tri[1]].x + nodes[tri[2]].x) / 3.0,
          (nodes[tri[0]].y + nodes[tri[1]].y + nodes[tri[2]].y) / 3.0};
}

double Mesh::total_area() const {
  double sum = 0.0;
  for (std::size_t t = 0; t < triangles.size(); ++t) sum += signed_area(t);
  return sum;
}

void Mesh::validate() const {
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    for (int v : triangles[t]) {
      if (v < 0 || static_cast<std::size_t>(v) >= nodes.size()) {
        throw std::logic_error("mesh: triangle " + std::to_string(t) + " references missing node");
      }
    }
    if (!(signed_area(t) > 0.0)) {
      throw std::logic_error("mesh: triangle " + std::to_string(t) + " has non-positive area");
    }
  }
  if (boundary.size() < 3) throw std::logic_error("mesh: boundary has fewer than three edges");
  std::vector<char> seen(nodes.size(), 0);
  for (std::size_t e = 0; e < boundary.size(); ++e) {
    const auto& edge = boundary[e];
    const auto& next = boundary[(e + 1) % boundary.size()];
    if (edge.b != next.a) throw std::logic_error("mesh: boundary edges do not form a closed loop");
    if (seen[edge.a]) throw std::logic_error("mesh: boundary loop visits a node twice");
    seen[edge.a] = 1;
    const double r = std::hypot(nodes[edge.a].x, nodes[edge.a].y);
    if (std::abs(r - 1.0) > 1e-9) {
      throw std::logic_error("mesh: boundary node " + std::to_string(edge.a) + " is off the unit circle");
    }
  }
}

int ElectrodeLayout::cyclic_distance(int j, int k) const {
  const int d = wrap(j - k);
  return std::min(d, m - d);
}

std::vector<int> ElectrodeLayout::nodes_of(const Mesh& mesh, int l) const {
  std::vector<int> out;
  for (int e : electrodes[wrap(l)]) {
    out.push_back(mesh.boundary[e].a);
    out.push_back(mesh.boundary[e].b);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double ElectrodeLayout::arc_length(const Mesh& mesh, int l) const {
  double len = 0.0;
  for (int e : electrodes[wrap(l)]) len += mesh.boundary[e].theta_b - mesh.boundary[e].theta_a;
  return len;
}

double boundary_spacing(int refinement) {
  return kTwoPi / (8.0 * std::ldexp(1.0, refinement));
}

namespace {

int edges_per_electrode(int refinement, int m, double coverage) {
  const double width = kTwoPi * coverage / m;
  return static_cast<int>(std::lround(width / boundary_spacing(refinement)));
}

}  // namespace

int minimum_refinement(int m, double coverage_fraction, int min_edges) {
  for (int level = 0; level < 40; ++level) {
    if (edges_per_electrode(level, m, coverage_fraction) >= min_edges) return level;
  }
  throw std::invalid_argument("minimum_refinement: electrodes too narrow");
}

DiskMesh build_disk_mesh(int refinement, int m, double coverage_fraction, const MeshOptions& options) {
  if (m < 4) throw std::invalid_argument("build_disk_mesh: need at least 4 electrodes, got " + std::to_string(m));
  if (!(coverage_fraction > 0.0 && coverage_fraction < 1.0)) {
    throw std::invalid_argument("build_disk_mesh: coverage fraction must lie in (0, 1)");
  }
  if (refinement < 0) throw std::invalid_argument("build_disk_mesh: refinement must be non-negative");

  const int per_electrode = edges_per_electrode(refinement, m, coverage_fraction);
  if (options.min_electrode_edges < 1) throw std::invalid_argument("build_disk_mesh: min_electrode_edges must be >= 1");
  if (per_electrode < options.min_electrode_edges) {
    throw std::invalid_argument("mesh too coarse: refinement " + std::to_string(refinement) + " puts " +
                                std::to_string(per_electrode) + " boundary edge(s) on each of " +
                                std::to_string(m) + " electrodes; minimum refinement is " +
                                std::to_string(minimum_refinement(m, coverage_fraction, options.min_electrode_edges)));
  }

  const double h = boundary_spacing(refinement);
  const double width = kTwoPi * coverage_fraction / m;
  const double gap = kTwoPi / m - width;
  const int per_gap = std::max(1, static_cast<int>(std::lround(gap / h)));

  DiskMesh out;
  Mesh& mesh = out.mesh;

  // Interior rings, centre node first.
  const int rings = std::max(2, static_cast<int>(std::ceil(1.0 / h)));
  mesh.nodes.push_back({0.0, 0.0});
  std::vector<std::vector<RingNode>> ring_nodes;
  for (int i = 1; i < rings; ++i) {
    const double radius = static_cast<double>(i) / rings;
    const int count = std::max(6, static_cast<int>(std::lround(kTwoPi * radius / h)));
    const double phase = (options.ring_phase + 0.5 * (i % 2)) * kTwoPi / count;
    std::vector<RingNode> ring;
    for (int k = 0; k < count; ++k) {
      const double angle = phase + kTwoPi * k / count;
      ring.push_back({normalise_angle(angle), static_cast<int>(mesh.nodes.size())});
      mesh.nodes.push_back({radius * std::cos(angle), radius * std::sin(angle)});
    }
    std::sort(ring.begin(), ring.end(), [](const RingNode& a, const RingNode& b) { return a.angle < b.angle; });
    ring_nodes.push_back(std::move(ring));
  }

  // Boundary: electrode l is centred on 2*pi*l/m.
  std::vector<double> angles;
  std::vector<int> edge_electrode;
  for (int l = 0; l < m; ++l) {
    const double start = kTwoPi * l / m - 0.5 * width;
    for (int k = 0; k < per_electrode; ++k) {
      angles.push_back(start + width * k / per_electrode);
      edge_electrode.push_back(l);
    }
    for (int k = 0; k < per_gap; ++k) {
      angles.push_back(start + width + gap * k / per_gap);
      edge_electrode.push_back(-1);
    }
  }
  const int first_boundary = static_cast<int>(mesh.nodes.size());
  std::vector<RingNode> outer;
  for (double angle : angles) {
    outer.push_back({normalise_angle(angle), static_cast<int>(mesh.nodes.size())});
    mesh.nodes.push_back({std::cos(angle), std::sin(angle)});
  }
  const int boundary_count = static_cast<int>(angles.size());
  for (int k = 0; k < boundary_count; ++k) {
    const double theta_b = k + 1 < boundary_count ? angles[k + 1] : angles[0] + kTwoPi;
    mesh.boundary.push_back({first_boundary + k, first_boundary + (k + 1) % boundary_count, angles[k], theta_b,
                             edge_electrode[k]});
  }
  std::sort(outer.begin(), outer.end(), [](const RingNode& a, const RingNode& b) { return a.angle < b.angle; });

  const auto& first_ring = ring_nodes.front();
  for (std::size_t k = 0; k < first_ring.size(); ++k) {
    mesh.triangles.push_back({0, first_ring[k].index, first_ring[(k + 1) % first_ring.size()].index});
  }
  for (std::size_t i = 0; i + 1 < ring_nodes.size(); ++i) stitch_rings(ring_nodes[i], ring_nodes[i + 1], mesh.triangles);
  stitch_rings(ring_nodes.back(), outer, mesh.triangles);

  mesh.validate();
  out.layout = layout_from_boundary(mesh, m, coverage_fraction);
  return out;
}

ElectrodeLayout layout_from_boundary(const Mesh& mesh, int m, double coverage_fraction) {
  ElectrodeLayout layout;
  layout.m = m;
  layout.coverage_fraction = coverage_fraction;
  layout.electrodes.assign(m, {});
  for (std::size_t e = 0; e < mesh.boundary.size(); ++e) {
    const int id = mesh.boundary[e].electrode;
    if (id < -1 || id >= m) throw std::invalid_argument("electrode id out of range on boundary edge");
    if (id >= 0) layout.electrodes[id].push_back(static_cast<int>(e));
  }
  const int edge_count = static_cast<int>(mesh.boundary.size());
  for (int l = 0; l < m; ++l) {
    const auto& edges = layout.electrodes[l];
    if (edges.empty()) throw std::invalid_argument("electrode " + std::to_string(l) + " has no boundary edge");
    // Connected arc: exactly one edge of the electrode lacks a predecessor in the electrode.
    int starts = 0;
    for (int e : edges) {
      if (mesh.boundary[(e - 1 + edge_count) % edge_count].electrode != l) ++starts;
    }
    if (starts != 1) throw std::invalid_argument("electrode " + std::to_string(l) + " is not a connected arc");
  }
  return layout;
}

DiskMesh refine_uniform(const DiskMesh& coarse) {
  const Mesh& in = coarse.mesh;
  DiskMesh out;
  Mesh& mesh = out.mesh;
  mesh.nodes = in.nodes;

  std::map<std::pair<int, int>, int> boundary_midpoint;
  for (const auto& edge : in.boundary) {
    const double angle = 0.5 * (edge.theta_a + edge.theta_b);
    boundary_midpoint[{std::min(edge.a, edge.b), std::max(edge.a, edge.b)}] = static_cast<int>(mesh.nodes.size());
    mesh.nodes.push_back({std::cos(angle), std::sin(angle)});
  }
  std::map<std::pair<int, int>, int> midpoint;
  auto mid = [&](int a, int b) {
    const std::pair<int, int> key{std::min(a, b), std::max(a, b)};
    if (auto it = boundary_midpoint.find(key); it != boundary_midpoint.end()) return it->second;
    auto [it, inserted] = midpoint.try_emplace(key, static_cast<int>(mesh.nodes.size()));
    if (inserted) mesh.nodes.push_back({0.5 * (in.nodes[a].x + in.nodes[b].x), 0.5 * (in.nodes[a].y + in.nodes[b].y)});
    return it->second;
  };

  std::vector<int> parent;
  for (std::size_t t = 0; t < in.triangles.size(); ++t) {
    const auto [a, b, c] = in.triangles[t];
    const int ab = mid(a, b);
    const int bc = mid(b, c);
    const int ca = mid(c, a);
    mesh.triangles.push_back({a, ab, ca});
    mesh.triangles.push_back({ab, b, bc});
    mesh.triangles.push_back({ca, bc, c});
    mesh.triangles.push_back({ab, bc, ca});
    parent.insert(parent.end(), 4, static_cast<int>(t));
  }

  for (const auto& edge : in.boundary) {
    const int m_node = boundary_midpoint.at({std::min(edge.a, edge.b), std::max(edge.a, edge.b)});
    const double angle = 0.5 * (edge.theta_a + edge.theta_b);
    mesh.boundary.push_back({edge.a, m_node, edge.theta_a, angle, edge.electrode});
    mesh.boundary.push_back({m_node, edge.b, angle, edge.theta_b, edge.electrode});
  }

  mesh.lineage.push_back(parent);
  for (const auto& level : in.lineage) {
    std::vector<int> up(parent.size());
    for (std::size_t t = 0; t < parent.size(); ++t) up[t] = level[parent[t]];
    mesh.lineage.push_back(std::move(up));
  }

  mesh.validate();
  out.layout = layout_from_boundary(mesh, coarse.layout.m, coarse.layout.coverage_fraction);
  return out;
}

PixelPartition build_pixel_partition(const Mesh& mesh, int coarsening) {
  if (coarsening < 0 || static_cast<std::size_t>(coarsening) > mesh.lineage.size()) {
    throw std::invalid_argument("build_pixel_partition: coarsening level " + std::to_string(coarsening) +
                                " exceeds the mesh's refinement history");
  }
  PixelPartition partition;
  const std::size_t n = mesh.element_count();
  partition.element_pixel.resize(n);
  if (coarsening == 0) {
    for (std::size_t t = 0; t < n; ++t) partition.element_pixel[t] = static_cast<int>(t);
    partition.pixels.resize(n);
  } else {
    const auto& ancestor = mesh.lineage[coarsening - 1];
    std::map<int, int> pixel_of_ancestor;
    for (std::size_t t = 0; t < n; ++t) pixel_of_ancestor.emplace(ancestor[t], 0);
    int next = 0;
    for (auto& [key, id] : pixel_of_ancestor) id = next++;
    for (std::size_t t = 0; t < n; ++t) partition.element_pixel[t] = pixel_of_ancestor.at(ancestor[t]);
    partition.pixels.resize(pixel_of_ancestor.size());
  }
  for (std::size_t t = 0; t < n; ++t) partition.pixels[partition.element_pixel[t]].push_back(static_cast<int>(t));

  partition.centroids.resize(partition.size());
  partition.areas.resize(partition.size());
  for (std::size_t i = 0; i < partition.size(); ++i) {
    double area = 0.0;
    Point c;
    for (int t : partition.pixels[i]) {
      const double a = mesh.signed_area(t);
      const Point ct = mesh.centroid(t);
      area += a;
      c.x += a * ct.x;
      c.y += a * ct.y;
    }
    partition.areas[i] = area;
    partition.centroids[i] = {c.x / area, c.y / area};
  }
  return partition;
}

double distance_to_origin(const Mesh& mesh, std::size_t t) {
  const auto& tri = mesh.triangles[t];
  const Point& a = mesh.nodes[tri[0]];
  const Point& b = mesh.nodes[tri[1]];
  const Point& c = mesh.nodes[tri[2]];
  const Point origin{};
  if (cross(a, b, origin) >= 0.0 && cross(b, c, origin) >= 0.0 && cross(c, a, origin) >= 0.0) return 0.0;
  return std::min({segment_distance_to_origin(a, b), segment_distance_to_origin(b, c),
                   segment_distance_to_origin(c, a)});
}

SupportBound support_bound(const Mesh& mesh, const PixelPartition& partition, double radius) {
  if (!(radius > 0.0 && radius < 1.0)) {
    throw std::invalid_argument("support_bound: radius must lie in (0, 1), got " + format_double(radius));
  }
  SupportBound bound;
  bound.radius = radius;
  for (std::size_t i = 0; i < partition.size(); ++i) {
    const auto& elements = partition.pixels[i];
    const bool hit = std::any_of(elements.begin(), elements.end(),
                                 [&](int t) { return distance_to_origin(mesh, t) < radius; });
    if (hit) bound.pixel_indices.push_back(static_cast<int>(i));
  }
  return bound;
}

void write_mesh(std::ostream& out, const Mesh& mesh) {
  out << "nodes " << mesh.nodes.size() << " triangles " << mesh.triangles.size() << " edges "
      << mesh.boundary.size() << '\n';
  for (const auto& p : mesh.nodes) out << format_double(p.x) << ' ' << format_double(p.y) << '\n';
  for (const auto& t : mesh.triangles) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  for (const auto& e : mesh.boundary) out << e.a << ' ' << e.b << ' ' << e.electrode << '\n';
}

Mesh read_mesh(std::istream& in) {
  std::string w_nodes, w_tri, w_edges;
  std::size_t n = 0, t = 0, e = 0;
  if (!(in >> w_nodes >> n >> w_tri >> t >> w_edges >> e) || w_nodes != "nodes" || w_tri != "triangles" ||
      w_edges != "edges") {
    throw std::runtime_error("read_mesh: malformed header");
  }
  Mesh mesh;
  mesh.nodes.resize(n);
  for (auto& p : mesh.nodes) {
    std::string x, y;
    if (!(in >> x >> y)) throw std::runtime_error("read_mesh: truncated node block");
    p = {parse_double(x), parse_double(y)};
  }
  mesh.triangles.resize(t);
  for (auto& tri : mesh.triangles) {
    if (!(in >> tri[0] >> tri[1] >> tri[2])) throw std::runtime_error("read_mesh: truncated triangle block");
  }
  mesh.boundary.resize(e);
  for (auto& edge : mesh.boundary) {
    if (!(in >> edge.a >> edge.b >> edge.electrode)) throw std::runtime_error("read_mesh: truncated edge block");
    if (edge.a < 0 || edge.b < 0 || static_cast<std::size_t>(std::max(edge.a, edge.b)) >= n) {
      throw std::runtime_error("read_mesh: edge references missing node");
    }
  }
  // Unwrapped arc parametrisation, continuous along the loop.
  double theta = e > 0 ? std::atan2(mesh.nodes[mesh.boundary[0].a].y, mesh.nodes[mesh.boundary[0].a].x) : 0.0;
  for (auto& edge : mesh.boundary) {
    const Point& pa = mesh.nodes[edge.a];
    const Point& pb = mesh.nodes[edge.b];
    double step = std::atan2(pb.y, pb.x) - std::atan2(pa.y, pa.x);
    step = normalise_angle(step);
    edge.theta_a = theta;
    edge.theta_b = theta + step;
    theta = edge.theta_b;
  }
  mesh.validate();
  return mesh;
}

}  // namespace eit
