#pragma once

#include <vector>

#include "eit/forward.hpp"
#include "eit/geometry.hpp"

namespace eit {

/// Per-pixel sensitivity matrices for a reference conductivity:
/// (S_i)_{jk} = -integral over pixel i of grad u_j . grad u_k, where u_j is the
/// reference potential for drive pair j, j+1.
struct SensitivityTensor {
  std::vector<Matrix> pixel_matrices;
  ConductivityField reference;
  int m = 0;

  std::size_t pixel_count() const { return pixel_matrices.size(); }
  /// Standard m^2 x r sensitivity matrix: row j*m + k, column i holds (S_i)_{jk}.
  Matrix flattened() const;
};

SensitivityTensor assemble_sensitivity(const Mesh& mesh, const ElectrodeLayout& layout,
                                       const PixelPartition& partition, const ConductivityField& sigma0);

/// Same as above, from already computed reference potentials.
SensitivityTensor assemble_sensitivity(const Mesh& mesh, const PixelPartition& partition,
                                       const ConductivityField& sigma0,
                                       const std::vector<PotentialField>& reference_drives);

/// Linearised measurement change sum_i kappa_i S_i.
Matrix frechet_apply(const SensitivityTensor& s, const std::vector<double>& kappa);

/// Moore-Penrose pseudoinverse of a symmetric matrix; eigenvalues with
/// |lambda| <= relative_cutoff * max|lambda| are treated as zero.
Matrix symmetric_pseudoinverse(const Matrix& a, double relative_cutoff = 1e-12);

struct BoundMatrix {
  Matrix sum;           // S_B
  Matrix pseudoinverse; // S_B^+
  SupportBound bound;
  int rank = 0;
};

BoundMatrix bound_matrix(const SensitivityTensor& s, const SupportBound& bound);

/// Linear system with the current-driven rows (cyclic |j-k| <= 1) removed.
struct ReducedSystem {
  Matrix sensitivity;              // m(m-3) x r
  Vector data;                     // m(m-3)
  std::vector<std::pair<int, int>> rows;  // (j, k) of every retained row
};

ReducedSystem reduce_system(const SensitivityTensor& s, const Matrix& v);

}  // namespace eit
