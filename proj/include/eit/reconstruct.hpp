#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eit/forward.hpp"
#include "eit/sensitivity.hpp"

namespace eit {

struct NoiseSpec {
  double delta = 0.0;  // relative noise level
  std::uint64_t seed = 0;
  bool symmetrize = false;
};

/// m x m matrix of i.i.d. uniform values on [-1, 1) from a seeded mt19937_64.
/// The mapping from seed to values is fixed across platforms.
Matrix uniform_noise(int m, std::uint64_t seed, bool symmetrize = false);

/// V + delta ||V||_F E / ||E||_F. The mask of `v` is kept.
MeasurementMatrix add_noise(const MeasurementMatrix& v, const NoiseSpec& spec);

/// Spectral absolute value Q |Lambda| Q^T of the symmetric part of `v`.
Matrix matrix_abs(const Matrix& v);

struct IndicatorField {
  std::vector<double> beta;
  std::vector<char> capped;  // pixels whose S_i was numerically zero
  double delta = 0.0;
  std::string method;
  std::string note;
};

/// |V| + delta ||V||_F I.
Matrix regularized_data(const Matrix& v_delta, double delta);

/// Largest beta >= 0 with beta S_i + M >= 0 for every S_i, computed as
/// -1/lambda_min(M^{-1/2} S_i M^{-1/2}). Pixels whose smallest eigenvalue is
/// not below -1e-14 times the largest magnitude over all pixels are capped at
/// 1e6 times the median of the other values. Throws when M is singular.
IndicatorField monotonicity_beta(const Matrix& regularized, const std::vector<Matrix>& pixel_matrices);

/// Largest beta >= 0 with beta S_i >= -(|V| + delta ||V||_F I), per pixel.
IndicatorField beta_indicator(const Matrix& v_delta, const SensitivityTensor& s, double delta,
                              std::string method = "");

/// Tikhonov solution of the reduced linear system,
/// argmin ||S kappa - v||^2 + alpha ||kappa||^2.
Vector linearized_reconstruct(const Matrix& s_reduced, const Vector& v_reduced, double alpha);

/// Pixels whose value is at least `fraction` of the maximum. All false when the
/// maximum is not positive.
std::vector<char> threshold_mask(const std::vector<double>& values, double fraction);

/// |A and B| / |A or B|; 1 when both are empty.
double jaccard_index(const std::vector<char>& a, const std::vector<char>& b);

/// Fraction of pixels on which both masks agree.
double agreement_fraction(const std::vector<char>& a, const std::vector<char>& b);

}  // namespace eit
