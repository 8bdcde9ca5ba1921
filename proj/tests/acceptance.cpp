// Acceptance suite: one PASS/FAIL line per criterion, tolerances fixed below.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "eit/forward.hpp"
#include "eit/geometry.hpp"
#include "eit/harness.hpp"
#include "eit/interpolate.hpp"
#include "eit/phantom.hpp"
#include "eit/reconstruct.hpp"
#include "eit/sensitivity.hpp"
#include "oracles.hpp"

using namespace eit;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [violated]");
  }
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2e", v);
  return buf;
}

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f%%", 100.0 * v);
  return buf;
}

double max_sym_eig(const Matrix& a) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(0.5 * (a + a.transpose())).eigenvalues().maxCoeff();
}

double min_sym_eig(const Matrix& a) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(0.5 * (a + a.transpose())).eigenvalues().minCoeff();
}

ConductivityField indicator_field(const Mesh& mesh, double background, double jump,
                                  const std::function<bool(const Point&)>& inside) {
  ConductivityField f = ConductivityField::constant(mesh, background);
  for (std::size_t t = 0; t < mesh.element_count(); ++t) {
    if (inside(mesh.centroid(t))) f.values[t] += jump;
  }
  return f;
}

Outcome criterion1() {
  Outcome out;
  const DiskMesh d = build_disk_mesh(4, 16, 0.5);
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  double recip = 0.0, colsum = 0.0, scaling = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    // Piecewise constant on 8 angular sectors times 3 radial bands.
    std::vector<double> level(24);
    for (double& x : level) x = u(rng);
    ConductivityField sigma = ConductivityField::constant(d.mesh, 1.0);
    for (std::size_t t = 0; t < d.mesh.element_count(); ++t) {
      const Point c = d.mesh.centroid(t);
      const double theta = std::atan2(c.y, c.x) + std::numbers::pi;
      const int sector = std::min(7, static_cast<int>(theta / (2 * std::numbers::pi) * 8));
      const int band = std::min(2, static_cast<int>(std::hypot(c.x, c.y) * 3));
      sigma.values[t] = level[sector * 3 + band];
    }
    const Matrix a = measure(d.mesh, d.layout, sigma).values;
    const Matrix b = measure(d.mesh, d.layout, sigma.scaled(2.7)).values;
    recip = std::max(recip, (a - a.transpose()).norm() / a.norm());
    colsum = std::max(colsum, a.colwise().sum().norm() / a.norm());
    scaling = std::max(scaling, (2.7 * b - a).norm() / a.norm());
  }
  out.check(recip <= 1e-8, "reciprocity " + sci(recip) + " <= 1e-8");
  out.check(colsum <= 1e-12, "column sums " + sci(colsum) + " <= 1e-12");
  out.check(scaling <= 1e-10, "1/c scaling " + sci(scaling) + " <= 1e-10");
  return out;
}

Outcome criterion2() {
  Outcome out;
  const DiskMesh d = build_disk_mesh(4, 16, 0.5);
  const auto sigma0 = ConductivityField::constant(d.mesh, 1.0);
  const Matrix u0 = measure(d.mesh, d.layout, sigma0).values;
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> centre(-0.55, 0.55), radius(0.1, 0.3);
  std::vector<std::function<bool(const Point&)>> shapes;
  const Phantom phantom = three_inclusion_phantom();
  shapes.push_back([phantom](const Point& p) { return phantom.value_at(p) > phantom.background; });
  for (int i = 0; i < 4; ++i) {
    const double cx = centre(rng), cy = centre(rng), r = radius(rng);
    shapes.push_back([=](const Point& p) { return std::hypot(p.x - cx, p.y - cy) < r; });
  }
  double worst_up = -INFINITY, worst_down = INFINITY;
  for (const auto& inside : shapes) {
    const Matrix up = measure(d.mesh, d.layout, indicator_field(d.mesh, 1.0, 1.0, inside)).values - u0;
    const Matrix down = measure(d.mesh, d.layout, indicator_field(d.mesh, 1.0, -0.5, inside)).values - u0;
    worst_up = std::max(worst_up, max_sym_eig(up) / up.norm());
    worst_down = std::min(worst_down, min_sym_eig(down) / down.norm());
  }
  out.check(worst_up <= 1e-8, "sigma0+chi_D: max eigenvalue/||V|| " + sci(worst_up) + " <= 1e-8");
  out.check(worst_down >= -1e-8, "sigma0-0.5chi_D: min eigenvalue/||V|| " + sci(worst_down) + " >= -1e-8");
  out.detail += "; " + std::to_string(shapes.size()) + " inclusions";
  return out;
}

Outcome criterion3(const ExperimentConfig& config) {
  Outcome out;
  ExperimentConfig c = config;
  const int m = 16;
  const ReconstructionModel model(c, m);
  const DiskMesh& d = model.mesh();
  const auto sigma0 = ConductivityField::constant(d.mesh, c.sigma0);
  const Matrix u0 = measure(d.mesh, d.layout, sigma0).values;
  std::mt19937_64 rng(303);
  std::uniform_int_distribution<std::size_t> pick(0, model.partition().size() - 1);
  double worst = INFINITY;
  for (int trial = 0; trial < 3; ++trial) {
    const std::size_t i = pick(rng);
    std::vector<double> kappa(model.partition().size(), 0.0);
    kappa[i] = 1.0;
    const Matrix lin = frechet_apply(model.sensitivity(), kappa);
    std::vector<double> rem;
    for (double t : {1e-1, 5e-2, 2.5e-2}) {
      ConductivityField sigma = sigma0;
      for (int e : model.partition().pixels[i]) sigma.values[e] += t;
      rem.push_back((measure(d.mesh, d.layout, sigma).values - u0 - t * lin).norm());
    }
    worst = std::min({worst, std::log2(rem[0] / rem[1]), std::log2(rem[1] / rem[2])});
  }
  out.check(worst >= 1.8, "smallest observed order " + sci(worst) + " >= 1.8 over 3 pixels");
  return out;
}

Outcome criterion4(const ExperimentConfig& config) {
  Outcome out;
  double match = 0.0, constraint = 0.0;
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int m : {8, 16}) {
    const ReconstructionModel model(config, m);
    const auto bound = bound_matrix(model.sensitivity(), support_bound(model.mesh().mesh, model.partition(), 0.8));
    for (int trial = 0; trial < 3; ++trial) {
      std::vector<double> kappa(model.partition().size(), 0.0);
      for (int i : bound.bound.pixel_indices) kappa[i] = u(rng);
      const Matrix v = frechet_apply(model.sensitivity(), kappa);
      const Matrix g = geometric_interpolate(mask_current_driven(MeasurementMatrix::from_values(v)), bound).values;
      const Matrix ref = oracle::kkt_geometric(v, bound.pseudoinverse);
      match = std::max(match, (g - ref).norm() / ref.norm());
      double worst = g.colwise().sum().cwiseAbs().maxCoeff();
      for (int j = 0; j < m; ++j) {
        worst = std::max(worst, std::abs(g(j, oracle::wrap(j - 1, m)) - g(oracle::wrap(j - 1, m), j)));
        for (int k = 0; k < m; ++k) {
          if (oracle::cyclic(j, k, m) > 1) worst = std::max(worst, std::abs(g(j, k) - v(j, k)));
        }
      }
      constraint = std::max(constraint, worst / v.norm());
    }
  }
  out.check(match <= 1e-8, "KKT oracle mismatch " + sci(match) + " <= 1e-8");
  out.check(constraint <= 1e-12, "constraint residual " + sci(constraint) + " <= 1e-12");
  return out;
}

Outcome criterion5(const ExperimentConfig& config) {
  Outcome out;
  std::mt19937_64 rng(505);
  double odd = 0.0, even = 0.0, optimality = 0.0, residual_excess = 0.0;
  auto data = [&](int m, int trial) {
    if (trial == 0) return simulate(config, m).v.values;
    return oracle::random_zero_sum_symmetric(m, rng);
  };
  for (int m : {5, 9, 15, 33}) {
    for (int trial = 0; trial < 2; ++trial) {
      const Matrix v = data(m, trial);
      const auto sys = oracle::linear_constraints(v);
      const Matrix ref = oracle::fill(v, sys, sys.a.fullPivLu().solve(sys.rhs));
      const Matrix lin = linear_interpolate(mask_current_driven(MeasurementMatrix::from_values(v))).matrix.values;
      odd = std::max(odd, (lin - ref).norm() / ref.norm());
    }
  }
  for (int m : {6, 8, 16, 32}) {
    for (int trial = 0; trial < 2; ++trial) {
      const Matrix v = data(m, trial);
      const auto sys = oracle::linear_constraints(v);
      const Vector x_ref = oracle::svd_pseudoinverse(sys.a) * sys.rhs;
      const Matrix ref = oracle::fill(v, sys, x_ref);
      const auto lin = linear_interpolate(mask_current_driven(MeasurementMatrix::from_values(v)));
      even = std::max(even, (lin.matrix.values - ref).norm() / ref.norm());
      Vector x(sys.positions.size());
      for (std::size_t a = 0; a < sys.positions.size(); ++a) {
        x(a) = lin.matrix.values(sys.positions[a].first, sys.positions[a].second);
      }
      const Vector r = sys.a * x - sys.rhs;
      optimality = std::max(optimality, (sys.a.transpose() * r).norm() / (sys.a.norm() * sys.rhs.norm()));
      residual_excess = std::max(residual_excess, (r.norm() - (sys.a * x_ref - sys.rhs).norm()) / sys.rhs.norm());
    }
  }
  out.check(odd <= 1e-10, "odd m vs dense solve " + sci(odd) + " <= 1e-10");
  out.check(even <= 1e-10, "even m vs pseudoinverse " + sci(even) + " <= 1e-10");
  out.check(optimality <= 1e-10, "even m normal-equation residual " + sci(optimality) + " <= 1e-10");
  out.check(residual_excess <= 1e-10, "even m residual excess " + sci(residual_excess) + " <= 1e-10");
  return out;
}

Outcome criterion6(const ExperimentConfig& config) {
  Outcome out;
  ExperimentConfig c = config;
  c.electrodes = {16, 24, 32};
  c.methods = {"linear", "geometric"};
  c.radii = {0.7, 0.8};
  const auto table = run_table1(c);
  std::string row_text;
  bool below = true, decreasing = true;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    row_text += (r ? ", " : "") + table.rows[r].label() + ":";
    for (std::size_t k = 0; k < c.electrodes.size(); ++k) {
      row_text += " " + pct(table.errors[r][k]);
      if (k && !(table.errors[r][k] < table.errors[r][k - 1])) decreasing = false;
      if (table.rows[r].method == "geometric" && !(table.errors[r][k] < table.at("linear", c.electrodes[k]))) {
        below = false;
      }
    }
  }
  const double g8 = table.at("geometric r=0.8", 32);
  const double lin = table.at("linear", 32);
  out.check(below, "(a) geometric below linear");
  out.check(decreasing, "(b) strictly decreasing in m");
  out.check(g8 <= 0.05, "(c) geometric r=0.8 at m=32 " + pct(g8) + " <= 5%");
  out.check(lin >= 0.03 && lin <= 0.20, "linear at m=32 " + pct(lin) + " in [3%, 20%]");
  out.detail += "; " + row_text;
  return out;
}

Outcome criterion7() {
  Outcome out;
  std::mt19937_64 rng(707);
  std::normal_distribution<double> n01;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    Matrix b(6, 1 + trial % 6), c(6, 6);
    for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = n01(rng);
    for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = n01(rng);
    const Matrix s = -b * b.transpose();
    const Matrix m_reg = c * c.transpose() + 0.1 * Matrix::Identity(6, 6);
    const double beta = monotonicity_beta(m_reg, {s}).beta[0];
    const double ref = oracle::beta_bisection(m_reg, s);
    worst = std::max(worst, std::abs(beta - ref) / ref);
  }
  out.check(worst <= 1e-10, "max relative gap to bisection " + sci(worst) + " <= 1e-10 over 20 pairs");
  return out;
}

int containing_pixel(const Mesh& mesh, const PixelPartition& partition, const Point& p) {
  for (std::size_t t = 0; t < mesh.element_count(); ++t) {
    const auto& tri = mesh.triangles[t];
    const Point& a = mesh.nodes[tri[0]];
    const Point& b = mesh.nodes[tri[1]];
    const Point& c = mesh.nodes[tri[2]];
    const double d1 = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
    const double d2 = (c.x - b.x) * (p.y - b.y) - (c.y - b.y) * (p.x - b.x);
    const double d3 = (a.x - c.x) * (p.y - c.y) - (a.y - c.y) * (p.x - c.x);
    if (d1 >= 0 && d2 >= 0 && d3 >= 0) return partition.element_pixel[t];
  }
  return -1;
}

Outcome criterion8(const ExperimentConfig& config) {
  Outcome out;
  ExperimentConfig c = config;
  c.figure_electrodes = 32;
  c.noise_levels = {1e-3};
  c.methods = {"geometric"};
  c.radii = {0.8};
  const auto fig = run_reconstruction_figure(c);
  const auto& full = fig.panel(1e-3, "full");
  const auto& geom = fig.panel(1e-3, "geometric r=0.8");
  const auto& overlap = fig.overlaps.front();
  out.check(overlap.agreement >= 0.9, "pixel agreement " + pct(overlap.agreement) + " >= 90%");
  out.check(overlap.jaccard >= 0.75, "Jaccard " + sci(overlap.jaccard) + " >= 0.75");

  const Phantom phantom = phantom_by_id(c.phantom);
  const auto& mesh = fig.model->mesh().mesh;
  const auto& partition = fig.model->partition();
  const double peak = *std::max_element(geom.field.beta.begin(), geom.field.beta.end());
  int hits = 0;
  std::string ratios;
  for (const auto& inc : phantom.inclusions) {
    Point centroid = inc.center;
    if (inc.shape == Inclusion::Shape::HalfEllipse) centroid.y += 4.0 * inc.semi_y / (3.0 * std::numbers::pi);
    const int pixel = containing_pixel(mesh, partition, centroid);
    if (pixel >= 0 && geom.above[pixel] && full.above[pixel]) ++hits;
    if (pixel >= 0) ratios += (ratios.empty() ? "" : "/") + sci(geom.field.beta[pixel] / peak);
  }
  out.check(hits == 3, "inclusion centroids above 25% threshold " + std::to_string(hits) + "/3 (beta/max " + ratios + ")");
  return out;
}

Outcome criterion9(const ExperimentConfig& config) {
  Outcome out;
  const ReconstructionModel model(config, 32);
  double sym = 0.0, pos = -INFINITY, mp = 0.0;
  for (double r : {0.7, 0.8, 0.9}) {
    const auto b = bound_matrix(model.sensitivity(), support_bound(model.mesh().mesh, model.partition(), r));
    const Matrix& s = b.sum;
    const Matrix& p = b.pseudoinverse;
    sym = std::max(sym, (s - s.transpose()).norm() / s.norm());
    pos = std::max(pos, max_sym_eig(s) / s.norm());
    mp = std::max({mp, (s * p * s - s).norm() / s.norm(), (p * s * p - p).norm() / p.norm(),
                   ((s * p).transpose() - s * p).norm(), ((p * s).transpose() - p * s).norm()});
  }
  out.check(sym <= 1e-10, "symmetry " + sci(sym) + " <= 1e-10");
  out.check(pos <= 1e-10, "largest eigenvalue/||S_B|| " + sci(pos) + " <= 1e-10");
  out.check(mp <= 1e-8, "Moore-Penrose identities " + sci(mp) + " <= 1e-8");
  return out;
}

}  // namespace

int main() {
  const ExperimentConfig config;
  struct Item {
    int number;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Item> items{
      {1, "forward invariants", 30, criterion1},
      {2, "monotonicity", 60, criterion2},
      {3, "Frechet derivative", 600, [&] { return criterion3(config); }},
      {4, "geometric interpolation vs KKT", 10, [&] { return criterion4(config); }},
      {5, "linear interpolation vs dense solve", 10, [&] { return criterion5(config); }},
      {6, "interpolation error trends", 600, [&] { return criterion6(config); }},
      {7, "beta formula vs bisection", 600, criterion7},
      {8, "support recovery", 300, [&] { return criterion8(config); }},
      {9, "bound matrix structure", 600, [&] { return criterion9(config); }},
  };
  int failed = 0;
  for (const auto& item : items) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = item.run();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail = std::string("exception: ") + e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    outcome.check(seconds < item.budget_s, "runtime " + sci(seconds) + " s < " + sci(item.budget_s) + " s");
    std::printf("criterion %d (%s): %s: %s\n", item.number, item.name, outcome.pass ? "PASS" : "FAIL",
                outcome.detail.c_str());
    std::fflush(stdout);
    failed += outcome.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(items.size()) - failed, items.size());
  return failed == 0 ? 0 : 1;
}
