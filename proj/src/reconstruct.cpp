#include "eit/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace eit {

Matrix uniform_noise(int m, std::uint64_t seed, bool symmetrize) {
  std::mt19937_64 engine(seed);
  Matrix e(m, m);
  // Row-major fill; 53 random bits per value.
  for (int j = 0; j < m; ++j) {
    for (int k = 0; k < m; ++k) {
      const double unit = static_cast<double>(engine() >> 11) * 0x1.0p-53;
      e(j, k) = 2.0 * unit - 1.0;
    }
  }
  if (symmetrize) e = 0.5 * (e + e.transpose()).eval();
  return e;
}

MeasurementMatrix add_noise(const MeasurementMatrix& v, const NoiseSpec& spec) {
  if (!(spec.delta >= 0.0)) throw std::invalid_argument("add_noise: noise level must be non-negative");
  MeasurementMatrix out = v;
  const double scale = spec.delta * v.values.norm();
  if (scale == 0.0) return out;
  const Matrix e = uniform_noise(v.m(), spec.seed, spec.symmetrize);
  out.values += (scale / e.norm()) * e;
  return out;
}

Matrix matrix_abs(const Matrix& v) {
  if (v.rows() != v.cols()) throw std::invalid_argument("matrix_abs: matrix must be square");
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (v + v.transpose()));
  if (eig.info() != Eigen::Success) throw std::runtime_error("matrix_abs: eigensolver failed");
  return eig.eigenvectors() * eig.eigenvalues().cwiseAbs().asDiagonal() * eig.eigenvectors().transpose();
}

IndicatorField monotonicity_beta(const Matrix& regularized, const std::vector<Matrix>& pixel_matrices) {
  const Eigen::Index m = regularized.rows();
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (regularized + regularized.transpose()));
  const Vector& lambda = eig.eigenvalues();
  if (!(lambda.maxCoeff() > 0.0) || lambda.minCoeff() <= 1e-13 * lambda.maxCoeff()) {
    throw std::runtime_error("beta_indicator: regularized matrix singular (|V| + delta ||V||_F I is not positive definite)");
  }
  // Symmetric positive root, so A^{-T} = A^{-1}.
  const Matrix inv_root =
      eig.eigenvectors() * lambda.cwiseSqrt().cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();

  const std::size_t r = pixel_matrices.size();
  std::vector<double> smallest(r);
  double scale = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    if (pixel_matrices[i].rows() != m || pixel_matrices[i].cols() != m) {
      throw std::invalid_argument("beta_indicator: pixel matrix " + std::to_string(i) + " has the wrong size");
    }
    Matrix t = inv_root * pixel_matrices[i] * inv_root;
    t = 0.5 * (t + t.transpose()).eval();
    const Eigen::SelfAdjointEigenSolver<Matrix> ti(t, Eigen::EigenvaluesOnly);
    smallest[i] = ti.eigenvalues().minCoeff();
    scale = std::max(scale, std::abs(smallest[i]));
  }

  IndicatorField out;
  out.beta.assign(r, 0.0);
  out.capped.assign(r, 0);
  std::vector<double> finite;
  for (std::size_t i = 0; i < r; ++i) {
    if (smallest[i] < -1e-14 * scale) {
      out.beta[i] = -1.0 / smallest[i];
      finite.push_back(out.beta[i]);
    } else {
      out.capped[i] = 1;
    }
  }
  double cap = 1e6;
  if (!finite.empty()) {
    auto mid = finite.begin() + static_cast<std::ptrdiff_t>(finite.size() / 2);
    std::nth_element(finite.begin(), mid, finite.end());
    cap = 1e6 * *mid;
  }
  for (std::size_t i = 0; i < r; ++i) {
    if (out.capped[i]) out.beta[i] = cap;
  }
  return out;
}

Matrix regularized_data(const Matrix& v_delta, double delta) {
  const Eigen::Index m = v_delta.rows();
  return matrix_abs(v_delta) + delta * v_delta.norm() * Matrix::Identity(m, m);
}

IndicatorField beta_indicator(const Matrix& v_delta, const SensitivityTensor& s, double delta, std::string method) {
  if (!(delta >= 0.0)) throw std::invalid_argument("beta_indicator: noise level must be non-negative");
  if (v_delta.rows() != s.m || v_delta.cols() != s.m) {
    throw std::invalid_argument("beta_indicator: data matrix does not match the sensitivity");
  }
  IndicatorField out = monotonicity_beta(regularized_data(v_delta, delta), s.pixel_matrices);
  out.delta = delta;
  out.method = std::move(method);
  return out;
}

Vector linearized_reconstruct(const Matrix& s_reduced, const Vector& v_reduced, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("linearized_reconstruct: regularization weight must be positive");
  if (s_reduced.rows() != v_reduced.size()) throw std::invalid_argument("linearized_reconstruct: dimension mismatch");
  Matrix normal = s_reduced.transpose() * s_reduced;
  normal.diagonal().array() += alpha;
  return normal.ldlt().solve(s_reduced.transpose() * v_reduced);
}

std::vector<char> threshold_mask(const std::vector<double>& values, double fraction) {
  std::vector<char> out(values.size(), 0);
  if (values.empty()) return out;
  const double peak = *std::max_element(values.begin(), values.end());
  if (!(peak > 0.0)) return out;
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i] >= fraction * peak ? 1 : 0;
  return out;
}

double jaccard_index(const std::vector<char>& a, const std::vector<char>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("jaccard_index: size mismatch");
  std::size_t both = 0, either = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    both += (a[i] && b[i]) ? 1 : 0;
    either += (a[i] || b[i]) ? 1 : 0;
  }
  return either == 0 ? 1.0 : static_cast<double>(both) / static_cast<double>(either);
}

double agreement_fraction(const std::vector<char>& a, const std::vector<char>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("agreement_fraction: size mismatch");
  if (a.empty()) return 1.0;
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) same += ((a[i] != 0) == (b[i] != 0)) ? 1 : 0;
  return static_cast<double>(same) / static_cast<double>(a.size());
}

}  // namespace eit
