#include "eit/interpolate.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace eit {

namespace {

int wrap(int i, int m) { return ((i % m) + m) % m; }

bool is_current_driven(int j, int k, int m) {
  const int d = wrap(j - k, m);
  return std::min(d, m - d) <= 1;
}

void require_square(const MeasurementMatrix& v, const char* who) {
  if (v.values.rows() != v.values.cols() || v.mask.size() != static_cast<std::size_t>(v.values.size())) {
    throw std::invalid_argument(std::string(who) + ": malformed measurement matrix");
  }
}

// Sum of the known (cyclic distance > 1) entries of column j.
double known_column_sum(const Matrix& v, int j) {
  const int m = static_cast<int>(v.rows());
  double sum = 0.0;
  for (int k = 0; k < m; ++k) {
    if (!is_current_driven(k, j, m)) sum += v(k, j);
  }
  return sum;
}

}  // namespace

MeasurementMatrix mask_current_driven(const MeasurementMatrix& v) {
  require_square(v, "mask_current_driven");
  MeasurementMatrix out = v;
  const int m = v.m();
  for (int j = 0; j < m; ++j) {
    for (int k = 0; k < m; ++k) {
      if (is_current_driven(j, k, m)) {
        out.values(j, k) = std::numeric_limits<double>::quiet_NaN();
        out.set_state(j, k, EntryState::CurrentDriven);
      }
    }
  }
  return out;
}

LinearInterpolation linear_interpolate(const MeasurementMatrix& masked) {
  require_square(masked, "linear_interpolate");
  const int m = masked.m();
  if (m < 5) throw std::invalid_argument("linear_interpolate: need at least 5 electrodes, got " + std::to_string(m));

  // Unknowns per column j: diag d_j = V(j,j), lower l_j = V(j+1,j), upper u_j = V(j-1,j).
  auto d = [m](int j) { return 3 * wrap(j, m); };
  auto lower = [m](int j) { return 3 * wrap(j, m) + 1; };
  auto upper = [m](int j) { return 3 * wrap(j, m) + 2; };

  Matrix c = Matrix::Zero(3 * m, 3 * m);
  Vector rhs = Vector::Zero(3 * m);
  for (int j = 0; j < m; ++j) {
    // Column j sums to zero.
    c(3 * j, d(j)) = 1.0;
    c(3 * j, lower(j)) = 1.0;
    c(3 * j, upper(j)) = 1.0;
    rhs[3 * j] = -known_column_sum(masked.values, j);
    // V(j, j-1) == V(j-1, j).
    c(3 * j + 1, lower(j - 1)) = 1.0;
    c(3 * j + 1, upper(j)) = -1.0;
    // V(j, j) is the mean of V(j-1, j) and V(j, j+1).
    c(3 * j + 2, d(j)) = 1.0;
    c(3 * j + 2, upper(j)) -= 0.5;
    c(3 * j + 2, upper(j + 1)) -= 0.5;
  }

  const Eigen::CompleteOrthogonalDecomposition<Matrix> cod(c);
  const Vector x = cod.solve(rhs);

  LinearInterpolation out;
  out.rank = static_cast<int>(cod.rank());
  out.residual = (c * x - rhs).norm();
  out.matrix = masked;
  for (int j = 0; j < m; ++j) {
    out.matrix.values(j, j) = x[d(j)];
    out.matrix.values(wrap(j + 1, m), j) = x[lower(j)];
    out.matrix.values(wrap(j - 1, m), j) = x[upper(j)];
    out.matrix.set_state(j, j, EntryState::Interpolated);
    out.matrix.set_state(wrap(j + 1, m), j, EntryState::Interpolated);
    out.matrix.set_state(wrap(j - 1, m), j, EntryState::Interpolated);
  }
  return out;
}

std::vector<Matrix> geometric_selectors(int m) {
  std::vector<Matrix> out;
  out.reserve(m);
  for (int j = 0; j < m; ++j) {
    Matrix a = Matrix::Zero(m, m);
    const int next = wrap(j + 1, m);
    a(wrap(j - 1, m), j) += 1.0;
    a(next, next) += 1.0;
    a(j, j) -= 1.0;
    a(j, next) -= 1.0;
    out.push_back(std::move(a));
  }
  return out;
}

Vector geometric_offset(const Matrix& v, int j) {
  const int m = static_cast<int>(v.rows());
  Vector b = Vector::Zero(m);
  for (int k = 0; k < m; ++k) {
    if (!is_current_driven(k, j, m)) b[k] = v(k, j);
  }
  b[j] = -known_column_sum(v, j);
  return b;
}

GeometricInterpolator::GeometricInterpolator(const BoundMatrix& bound)
    : m_(static_cast<int>(bound.pseudoinverse.rows())), pinv_(bound.pseudoinverse) {
  if (m_ < 5) throw std::invalid_argument("geometric interpolation needs at least 5 electrodes");
  selectors_ = geometric_selectors(m_);
  a_ = Matrix::Zero(m_, m_);
  for (const auto& sel : selectors_) a_.noalias() -= sel.transpose() * pinv_ * sel;
  a_ = 0.5 * (a_ + a_.transpose());

  const Eigen::SelfAdjointEigenSolver<Matrix> eig(a_, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  condition_ = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (!(lo > 0.0) || condition_ > 1e16) {
    std::ostringstream msg;
    msg << "geometric interpolation system is numerically singular (condition estimate " << condition_
        << "); the support bound may be too small or the sensitivity degenerate";
    throw std::runtime_error(msg.str());
  }
  if (condition_ > 1e12) {
    std::clog << "warning: geometric interpolation system is ill-conditioned (condition estimate " << condition_
              << ")\n";
  }
  factor_.compute(a_);
}

Vector GeometricInterpolator::rhs(const Matrix& v, std::vector<Vector>* offsets) const {
  Vector b = Vector::Zero(m_);
  for (int j = 0; j < m_; ++j) {
    Vector offset = geometric_offset(v, j);
    b.noalias() -= selectors_[j].transpose() * (pinv_ * offset);
    if (offsets != nullptr) offsets->push_back(std::move(offset));
  }
  return b;
}

GeomSystem GeometricInterpolator::system(const MeasurementMatrix& masked) const {
  require_square(masked, "geometric_interpolate");
  if (masked.m() != m_) throw std::invalid_argument("geometric_interpolate: electrode count does not match the bound");
  GeomSystem out;
  out.selectors = selectors_;
  out.a = a_;
  out.b = rhs(masked.values, &out.offsets);
  out.w = -factor_.solve(out.b);
  out.condition = condition_;
  return out;
}

MeasurementMatrix GeometricInterpolator::interpolate(const MeasurementMatrix& masked) const {
  const GeomSystem sys = system(masked);
  MeasurementMatrix out = masked;
  for (int j = 0; j < m_; ++j) {
    const Vector column = sys.selectors[j] * sys.w + sys.offsets[j];
    for (int k = 0; k < m_; ++k) {
      if (is_current_driven(k, j, m_)) {
        out.values(k, j) = column[k];
        out.set_state(k, j, EntryState::Interpolated);
      }
    }
  }
  return out;
}

MeasurementMatrix geometric_interpolate(const MeasurementMatrix& masked, const BoundMatrix& bound) {
  return GeometricInterpolator(bound).interpolate(masked);
}

double objective_value(const Matrix& v, const Matrix& pseudoinverse) {
  if (v.rows() != pseudoinverse.rows() || pseudoinverse.rows() != pseudoinverse.cols()) {
    throw std::invalid_argument("objective_value: dimension mismatch");
  }
  return -(v.transpose() * pseudoinverse * v).trace();
}

double interpolation_error(const Matrix& truth, const Matrix& approx) {
  if (truth.rows() != approx.rows() || truth.cols() != approx.cols()) {
    throw std::invalid_argument("interpolation_error: shape mismatch");
  }
  const double norm = truth.norm();
  if (norm == 0.0) throw std::invalid_argument("interpolation_error: reference matrix is zero");
  return (truth - approx).norm() / norm;
}

}  // namespace eit
