#include "eit/forward.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace eit {

ConductivityField ConductivityField::constant(const Mesh& mesh, double value, std::string tag) {
  ConductivityField field{std::vector<double>(mesh.element_count(), value), std::move(tag)};
  field.validate(mesh);
  return field;
}

void ConductivityField::validate(const Mesh& mesh) const {
  if (values.size() != mesh.element_count()) {
    throw std::invalid_argument("conductivity has " + std::to_string(values.size()) + " values for " +
                                std::to_string(mesh.element_count()) + " elements");
  }
  for (std::size_t e = 0; e < values.size(); ++e) {
    if (!(values[e] > 0.0) || !std::isfinite(values[e])) {
      throw std::invalid_argument("conductivity must be positive and finite (element " + std::to_string(e) + ")");
    }
  }
}

ConductivityField ConductivityField::scaled(double factor) const {
  ConductivityField out = *this;
  for (double& v : out.values) v *= factor;
  return out;
}

DrivePattern DrivePattern::adjacent(int k, int m) {
  DrivePattern p;
  p.k = ((k % m) + m) % m;
  p.currents = Vector::Zero(m);
  p.currents[p.k] += 1.0;
  p.currents[(p.k + 1) % m] -= 1.0;
  return p;
}

std::size_t MeasurementMatrix::count(EntryState s) const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), s));
}

MeasurementMatrix MeasurementMatrix::from_values(Matrix values) {
  if (values.rows() != values.cols()) throw std::invalid_argument("measurement matrix must be square");
  MeasurementMatrix out;
  const int m = static_cast<int>(values.rows());
  out.values = std::move(values);
  out.mask.resize(static_cast<std::size_t>(m) * m);
  for (int j = 0; j < m; ++j) {
    for (int k = 0; k < m; ++k) {
      const int d = ((j - k) % m + m) % m;
      out.set_state(j, k, std::min(d, m - d) <= 1 ? EntryState::CurrentDriven : EntryState::Measured);
    }
  }
  return out;
}

ElementGradients basis_gradients(const Mesh& mesh) {
  ElementGradients grads(mesh.element_count());
  for (std::size_t t = 0; t < mesh.element_count(); ++t) {
    const auto& tri = mesh.triangles[t];
    const double twice_area = 2.0 * mesh.signed_area(t);
    for (int v = 0; v < 3; ++v) {
      const Point& b = mesh.nodes[tri[(v + 1) % 3]];
      const Point& c = mesh.nodes[tri[(v + 2) % 3]];
      grads[t][v] = Eigen::Vector2d((b.y - c.y) / twice_area, (c.x - b.x) / twice_area);
    }
  }
  return grads;
}

ShuntSystem::ShuntSystem(const Mesh& mesh, const ElectrodeLayout& layout, const ConductivityField& sigma)
    : m_(layout.m) {
  sigma.validate(mesh);
  const int n = static_cast<int>(mesh.node_count());

  std::vector<int> electrode_of(n, -1);
  for (int l = 0; l < m_; ++l) {
    for (int node : layout.nodes_of(mesh, l)) {
      if (electrode_of[node] >= 0) throw std::invalid_argument("electrodes share a node");
      electrode_of[node] = l;
    }
  }
  node_dof_.assign(n, -1);
  for (int v = 0; v < n; ++v) {
    if (electrode_of[v] < 0) node_dof_[v] = free_count_++;
  }
  for (int v = 0; v < n; ++v) {
    if (electrode_of[v] >= 0) node_dof_[v] = free_count_ + electrode_of[v];
  }

  const int full_size = free_count_ + m_;
  const auto grads = basis_gradients(mesh);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(9 * mesh.element_count());
  for (std::size_t t = 0; t < mesh.element_count(); ++t) {
    const double weight = sigma.values[t] * mesh.signed_area(t);
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        triplets.emplace_back(node_dof_[mesh.triangles[t][a]], node_dof_[mesh.triangles[t][b]],
                              weight * grads[t][a].dot(grads[t][b]));
      }
    }
  }
  full_.resize(full_size, full_size);
  full_.setFromTriplets(triplets.begin(), triplets.end());

  // Ground the last electrode: drop its row and column.
  const int reduced_size = full_size - 1;
  reduced_ = full_.topLeftCorner(reduced_size, reduced_size);
  factor_.compute(reduced_);
  if (factor_.info() != Eigen::Success) {
    const Vector d = factor_.vectorD();
    std::ostringstream msg;
    msg << "shunt system is singular (factorization failed); " << reduced_size << " unknowns";
    if (d.size() > 0) msg << ", pivot range [" << d.minCoeff() << ", " << d.maxCoeff() << "]";
    throw std::runtime_error(msg.str());
  }
  const Vector d = factor_.vectorD();
  if (d.minCoeff() <= 0.0) {
    std::ostringstream msg;
    msg << "shunt system is singular: non-positive pivot " << d.minCoeff() << " (largest " << d.maxCoeff() << ")";
    throw std::runtime_error(msg.str());
  }
}

Matrix ShuntSystem::solve_reduced(const Matrix& currents) const {
  const int reduced_size = static_cast<int>(reduced_.rows());
  Matrix rhs = Matrix::Zero(reduced_size, currents.cols());
  for (int c = 0; c < currents.cols(); ++c) {
    const double total = currents.col(c).sum();
    if (std::abs(total) > 1e-12 * std::max(1.0, currents.col(c).cwiseAbs().maxCoeff())) {
      throw std::invalid_argument("drive currents must sum to zero");
    }
    rhs.col(c).tail(m_ - 1) = currents.col(c).head(m_ - 1);
  }
  Matrix x = factor_.solve(rhs);
  for (int c = 0; c < x.cols(); ++c) {
    const double scale = std::max(rhs.col(c).norm(), 1e-300);
    const double residual = (reduced_ * x.col(c) - rhs.col(c)).norm() / scale;
    max_residual_ = std::max(max_residual_, residual);
    if (!(residual <= 1e-10)) {
      throw std::runtime_error("shunt solve residual " + std::to_string(residual) + " exceeds 1e-10");
    }
  }
  return x;
}

PotentialField ShuntSystem::expand(const Eigen::Ref<const Vector>& reduced) const {
  Vector full = Vector::Zero(free_count_ + m_);
  full.head(reduced.size()) = reduced;
  PotentialField field;
  field.electrode_potentials = full.tail(m_);
  const double shift = field.electrode_potentials.mean();
  field.electrode_potentials.array() -= shift;
  field.nodal.resize(static_cast<Eigen::Index>(node_dof_.size()));
  for (std::size_t v = 0; v < node_dof_.size(); ++v) field.nodal[v] = full[node_dof_[v]] - shift;
  return field;
}

PotentialField ShuntSystem::solve(const DrivePattern& pattern) const {
  if (pattern.currents.size() != m_) throw std::invalid_argument("drive pattern has wrong electrode count");
  const Matrix x = solve_reduced(pattern.currents);
  return expand(x.col(0));
}

std::vector<PotentialField> ShuntSystem::solve_adjacent() const {
  Matrix currents = Matrix::Zero(m_, m_);
  for (int k = 0; k < m_; ++k) currents.col(k) = DrivePattern::adjacent(k, m_).currents;
  const Matrix x = solve_reduced(currents);
  std::vector<PotentialField> out;
  out.reserve(m_);
  for (int k = 0; k < m_; ++k) out.push_back(expand(x.col(k)));
  return out;
}

Vector ShuntSystem::electrode_currents(const PotentialField& field) const {
  Vector full = Vector::Zero(free_count_ + m_);
  for (std::size_t v = 0; v < node_dof_.size(); ++v) full[node_dof_[v]] = field.nodal[v];
  const Vector flux = full_ * full;
  return flux.tail(m_);
}

PotentialField solve_drive(const Mesh& mesh, const ElectrodeLayout& layout, const ConductivityField& sigma,
                           const DrivePattern& pattern) {
  return ShuntSystem(mesh, layout, sigma).solve(pattern);
}

MeasurementMatrix measurement_from_potentials(const std::vector<PotentialField>& drives) {
  const int m = static_cast<int>(drives.size());
  Matrix u(m, m);
  for (int k = 0; k < m; ++k) {
    const Vector& phi = drives[k].electrode_potentials;
    for (int j = 0; j < m; ++j) u(j, k) = phi[j] - phi[(j + 1) % m];
  }
  return MeasurementMatrix::from_values(std::move(u));
}

MeasurementMatrix measure(const Mesh& mesh, const ElectrodeLayout& layout, const ConductivityField& sigma) {
  return measurement_from_potentials(ShuntSystem(mesh, layout, sigma).solve_adjacent());
}

MeasurementMatrix difference(const MeasurementMatrix& a, const MeasurementMatrix& b) {
  if (a.m() != b.m()) {
    throw std::invalid_argument("difference: electrode counts differ (" + std::to_string(a.m()) + " vs " +
                                std::to_string(b.m()) + ")");
  }
  MeasurementMatrix out = a;
  out.values = a.values - b.values;
  return out;
}

MeasurementMatrix difference_measurement(const Mesh& mesh, const ElectrodeLayout& layout,
                                         const ConductivityField& sigma, const ConductivityField& sigma0) {
  return difference(measure(mesh, layout, sigma), measure(mesh, layout, sigma0));
}

}  // namespace eit
