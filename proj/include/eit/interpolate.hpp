#pragma once

#include <vector>

#include "eit/forward.hpp"
#include "eit/sensitivity.hpp"

namespace eit {

/// Flags every entry with cyclic |j-k| <= 1 as current-driven and replaces its
/// value by NaN, so downstream code cannot silently read it.
MeasurementMatrix mask_current_driven(const MeasurementMatrix& v);

struct LinearInterpolation {
  MeasurementMatrix matrix;
  int rank = 0;           // rank of the 3m x 3m constraint system
  double residual = 0.0;  // norm of the constraint residual
};

/// Fills the current-driven entries from the column-sum, symmetry and
/// neighbour-mean conditions. The system is square in the 3m unknowns; for
/// even m it is singular and the minimum-norm least-squares solution is used.
LinearInterpolation linear_interpolate(const MeasurementMatrix& masked);

/// Selector matrices A^(j): column j of the interpolant is A^(j) w + b^(j),
/// where w_j is the entry (j-1, j) == (j, j-1).
std::vector<Matrix> geometric_selectors(int m);

/// Offset b^(j) built from the known entries of column j.
Vector geometric_offset(const Matrix& v, int j);

struct GeomSystem {
  std::vector<Matrix> selectors;  // A^(j)
  std::vector<Vector> offsets;    // b^(j)
  Matrix a;
  Vector b;
  Vector w;
  double condition = 0.0;
};

/// Minimum-source interpolation for a fixed support bound. The system matrix
/// depends only on S_B^+, so it is factorised once and reused across data.
class GeometricInterpolator {
 public:
  explicit GeometricInterpolator(const BoundMatrix& bound);

  GeomSystem system(const MeasurementMatrix& masked) const;
  MeasurementMatrix interpolate(const MeasurementMatrix& masked) const;

  const Matrix& system_matrix() const { return a_; }
  double condition() const { return condition_; }
  const Matrix& pseudoinverse() const { return pinv_; }

 private:
  Vector rhs(const Matrix& v, std::vector<Vector>* offsets) const;

  int m_ = 0;
  Matrix pinv_;
  std::vector<Matrix> selectors_;
  Matrix a_;
  Eigen::LDLT<Matrix> factor_;
  double condition_ = 0.0;
};

MeasurementMatrix geometric_interpolate(const MeasurementMatrix& masked, const BoundMatrix& bound);

/// -sum_j (V e_j)^T S_B^+ (V e_j).
double objective_value(const Matrix& v, const Matrix& pseudoinverse);

/// ||truth - approx||_F / ||truth||_F.
double interpolation_error(const Matrix& truth, const Matrix& approx);

}  // namespace eit
