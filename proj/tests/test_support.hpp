#pragma once

// Oracles and random instances shared by the unit and acceptance tests.
// fd_hessian differences the analytic gradient, which is itself checked
// against differences of the objective value.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

#include "sigma/numeric.hpp"
#include "sigma/objective.hpp"

namespace sigma::testing {

inline Vector random_vector(Index n, Rng& rng, double scale = 1.0) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = scale * rng.normal();
  return v;
}

inline SymMatrix random_spd(Index n, Rng& rng, double shift = 1.0) {
  const Matrix m = gaussian_matrix(n, n, rng);
  return m.transpose() * m + shift * Matrix::Identity(n, n);
}

// Logistic or Gaussian model with random data.
inline ObjectiveModel random_model(ModelKind kind, Index m, Index n, Rng& rng,
                                   Regularization reg = {}) {
  Dataset data;
  data.A = gaussian_matrix(m, n, rng);
  data.b.resize(m);
  for (Index i = 0; i < m; ++i) {
    if (kind == ModelKind::Logistic) {
      data.b(i) = rng.uniform() < 0.5 ? -1.0 : 1.0;
    } else if (kind == ModelKind::PoissonIdentity) {
      data.b(i) = 1.0 + static_cast<double>(rng.below(5));
    } else {
      data.b(i) = rng.normal();
    }
  }
  if (kind == ModelKind::PoissonIdentity) {
    // Positive entries keep the all-ones direction feasible.
    data.A = data.A.cwiseAbs().array() + 0.1;
  }
  return ObjectiveModel(kind, std::move(data), reg);
}

// A feasible random point: Gaussian for unconstrained models, a positive
// vector for the entrywise positive Poisson instances above.
inline Vector random_point(const ObjectiveModel& model, Rng& rng, double scale = 0.5) {
  Vector x = random_vector(model.dim(), rng, scale);
  if (model.kind() == ModelKind::PoissonIdentity) x = x.cwiseAbs().array() + 0.2;
  return x;
}

inline Vector fd_gradient(const ObjectiveModel& model, const Vector& x, double h = 1e-6) {
  Vector g(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    Vector xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    g(i) = (model.value(xp) - model.value(xm)) / (2.0 * h);
  }
  return g;
}

inline SymMatrix fd_hessian(const ObjectiveModel& model, const Vector& x, double h = 1e-5) {
  const Index n = x.size();
  SymMatrix hess(n, n);
  for (Index i = 0; i < n; ++i) {
    Vector xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    hess.col(i) = (model.gradient(xp) - model.gradient(xm)) / (2.0 * h);
  }
  return 0.5 * (hess + hess.transpose());
}

inline double rel_error(const Matrix& got, const Matrix& want) {
  return (got - want).norm() / std::max(1.0, want.norm());
}

inline double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({1e-300, std::abs(a), std::abs(b)});
}

// Symmetric square root through an eigendecomposition.
inline SymMatrix sqrtm(const SymMatrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  const Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

inline double min_eigenvalue(const SymMatrix& h) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(h, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

}  // namespace sigma::testing
