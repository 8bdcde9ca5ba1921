#include "eit/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace eit {

Matrix SensitivityTensor::flattened() const {
  Matrix out(static_cast<Eigen::Index>(m) * m, static_cast<Eigen::Index>(pixel_matrices.size()));
  for (std::size_t i = 0; i < pixel_matrices.size(); ++i) {
    for (int j = 0; j < m; ++j) {
      for (int k = 0; k < m; ++k) out(j * m + k, static_cast<Eigen::Index>(i)) = pixel_matrices[i](j, k);
    }
  }
  return out;
}

SensitivityTensor assemble_sensitivity(const Mesh& mesh, const ElectrodeLayout& layout,
                                       const PixelPartition& partition, const ConductivityField& sigma0) {
  const ShuntSystem system(mesh, layout, sigma0);
  return assemble_sensitivity(mesh, partition, sigma0, system.solve_adjacent());
}

SensitivityTensor assemble_sensitivity(const Mesh& mesh, const PixelPartition& partition,
                                       const ConductivityField& sigma0,
                                       const std::vector<PotentialField>& reference_drives) {
  sigma0.validate(mesh);
  if (partition.element_pixel.size() != mesh.element_count()) {
    throw std::invalid_argument("assemble_sensitivity: partition does not match the mesh");
  }
  const int m = static_cast<int>(reference_drives.size());
  const auto grads = basis_gradients(mesh);

  SensitivityTensor out;
  out.m = m;
  out.reference = sigma0;
  out.pixel_matrices.reserve(partition.size());

  Matrix g(m, 2);
  for (std::size_t i = 0; i < partition.size(); ++i) {
    if (partition.pixels[i].empty()) throw std::invalid_argument("assemble_sensitivity: pixel " + std::to_string(i) + " is empty");
    Matrix s = Matrix::Zero(m, m);
    for (int t : partition.pixels[i]) {
      const auto& tri = mesh.triangles[t];
      for (int j = 0; j < m; ++j) {
        const Vector& u = reference_drives[j].nodal;
        g.row(j) = (u[tri[0]] * grads[t][0] + u[tri[1]] * grads[t][1] + u[tri[2]] * grads[t][2]).transpose();
      }
      s.noalias() -= mesh.signed_area(t) * g * g.transpose();
    }
    out.pixel_matrices.push_back(std::move(s));
  }
  return out;
}

Matrix frechet_apply(const SensitivityTensor& s, const std::vector<double>& kappa) {
  if (kappa.size() != s.pixel_count()) {
    throw std::invalid_argument("frechet_apply: kappa has " + std::to_string(kappa.size()) + " entries for " +
                                std::to_string(s.pixel_count()) + " pixels");
  }
  Matrix out = Matrix::Zero(s.m, s.m);
  for (std::size_t i = 0; i < kappa.size(); ++i) {
    if (kappa[i] != 0.0) out += kappa[i] * s.pixel_matrices[i];
  }
  return out;
}

Matrix symmetric_pseudoinverse(const Matrix& a, double relative_cutoff) {
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (a + a.transpose()));
  if (eig.info() != Eigen::Success) throw std::runtime_error("symmetric_pseudoinverse: eigensolver failed");
  const Vector& lambda = eig.eigenvalues();
  const double cutoff = relative_cutoff * lambda.cwiseAbs().maxCoeff();
  Vector inv = Vector::Zero(lambda.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (std::abs(lambda[i]) > cutoff) inv[i] = 1.0 / lambda[i];
  }
  return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

BoundMatrix bound_matrix(const SensitivityTensor& s, const SupportBound& bound) {
  if (bound.pixel_indices.empty()) throw std::invalid_argument("bound_matrix: support bound contains no pixel");
  BoundMatrix out;
  out.bound = bound;
  out.sum = Matrix::Zero(s.m, s.m);
  for (int i : bound.pixel_indices) {
    if (i < 0 || static_cast<std::size_t>(i) >= s.pixel_count()) {
      throw std::invalid_argument("bound_matrix: pixel index " + std::to_string(i) + " out of range");
    }
    out.sum += s.pixel_matrices[i];
  }
  out.pseudoinverse = symmetric_pseudoinverse(out.sum);

  const Eigen::SelfAdjointEigenSolver<Matrix> eig(out.sum, Eigen::EigenvaluesOnly);
  const double cutoff = 1e-12 * eig.eigenvalues().cwiseAbs().maxCoeff();
  out.rank = static_cast<int>((eig.eigenvalues().array().abs() > cutoff).count());
  return out;
}

ReducedSystem reduce_system(const SensitivityTensor& s, const Matrix& v) {
  const int m = s.m;
  if (m < 5) throw std::invalid_argument("reduce_system: need at least 5 electrodes, got " + std::to_string(m));
  if (v.rows() != m || v.cols() != m) throw std::invalid_argument("reduce_system: data matrix does not match m");

  ReducedSystem out;
  for (int j = 0; j < m; ++j) {
    for (int k = 0; k < m; ++k) {
      const int d = ((j - k) % m + m) % m;
      if (std::min(d, m - d) > 1) out.rows.emplace_back(j, k);
    }
  }
  const auto rows = static_cast<Eigen::Index>(out.rows.size());
  const auto r = static_cast<Eigen::Index>(s.pixel_count());
  out.sensitivity.resize(rows, r);
  out.data.resize(rows);
  for (Eigen::Index row = 0; row < rows; ++row) {
    const auto [j, k] = out.rows[row];
    out.data[row] = v(j, k);
    for (Eigen::Index i = 0; i < r; ++i) out.sensitivity(row, i) = s.pixel_matrices[i](j, k);
  }
  return out;
}

}  // namespace eit
