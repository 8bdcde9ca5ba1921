#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "eit/geometry.hpp"

namespace eit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Piecewise-constant conductivity, one positive value per mesh element.
struct ConductivityField {
  std::vector<double> values;
  std::string tag;

  static ConductivityField constant(const Mesh& mesh, double value, std::string tag = "constant");
  /// Throws std::invalid_argument on a length mismatch or a non-positive value.
  void validate(const Mesh& mesh) const;
  ConductivityField scaled(double factor) const;
};

/// Currents fed into each electrode; they must sum to zero.
struct DrivePattern {
  int k = 0;
  Vector currents;

  /// Unit current in through electrode k, out through electrode k+1.
  static DrivePattern adjacent(int k, int m);
};

struct PotentialField {
  Vector nodal;
  Vector electrode_potentials;
  std::string gauge = "zero-mean electrode potentials";
};

enum class EntryState : char { Measured = 'M', CurrentDriven = 'C', Interpolated = 'I' };

/// m x m voltage matrix with a per-entry provenance flag. `values(j, k)` is
/// the voltage between electrodes j and j+1 while driving pair k, k+1.
struct MeasurementMatrix {
  Matrix values;
  std::vector<EntryState> mask;  // row-major

  int m() const { return static_cast<int>(values.rows()); }
  EntryState state(int j, int k) const { return mask[static_cast<std::size_t>(j) * m() + k]; }
  void set_state(int j, int k, EntryState s) { mask[static_cast<std::size_t>(j) * m() + k] = s; }
  std::size_t count(EntryState s) const;

  /// Wraps raw values; entries with cyclic |j-k| <= 1 are flagged current-driven.
  static MeasurementMatrix from_values(Matrix values);
};

/// Gradients of the three P1 basis functions on each triangle.
using ElementGradients = std::vector<std::array<Eigen::Vector2d, 3>>;
ElementGradients basis_gradients(const Mesh& mesh);

/// Shunt-electrode finite element system for a fixed conductivity. Nodes on
/// each electrode share one unknown; the last electrode is grounded during the
/// solve and the result is shifted to zero-mean electrode potentials.
class ShuntSystem {
 public:
  ShuntSystem(const Mesh& mesh, const ElectrodeLayout& layout, const ConductivityField& sigma);

  PotentialField solve(const DrivePattern& pattern) const;
  /// Solutions for all m adjacent drive patterns, in drive order.
  std::vector<PotentialField> solve_adjacent() const;

  /// Net current through every electrode implied by a potential.
  Vector electrode_currents(const PotentialField& field) const;

  int electrode_count() const { return m_; }
  /// Largest relative residual seen by any solve so far.
  double max_relative_residual() const { return max_residual_; }

 private:
  Matrix solve_reduced(const Matrix& electrode_currents) const;
  PotentialField expand(const Eigen::Ref<const Vector>& reduced) const;

  int m_ = 0;
  int free_count_ = 0;
  std::vector<int> node_dof_;  // full dof index per node
  Eigen::SparseMatrix<double> full_;
  Eigen::SparseMatrix<double> reduced_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> factor_;
  mutable double max_residual_ = 0.0;
};

PotentialField solve_drive(const Mesh& mesh, const ElectrodeLayout& layout, const ConductivityField& sigma,
                           const DrivePattern& pattern);

/// Adjacent-adjacent measurement matrix from the m drive solutions.
MeasurementMatrix measurement_from_potentials(const std::vector<PotentialField>& drives);

MeasurementMatrix measure(const Mesh& mesh, const ElectrodeLayout& layout, const ConductivityField& sigma);

/// Entrywise `a - b`; the mask of `a` is carried over.
MeasurementMatrix difference(const MeasurementMatrix& a, const MeasurementMatrix& b);

MeasurementMatrix difference_measurement(const Mesh& mesh, const ElectrodeLayout& layout,
                                         const ConductivityField& sigma, const ConductivityField& sigma0);

}  // namespace eit
