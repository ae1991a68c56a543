#pragma once

#include <optional>

#include "sigma/numeric.hpp"
#include "sigma/objective.hpp"

namespace sigma {

/// Coordinate prolongation P (columns of the identity picked by `coords`)
/// and restriction R = P^T.
class CoarseOperator {
 public:
  explicit CoarseOperator(IndexSet coords) : coords_(std::move(coords)) {}

  static CoarseOperator full(Index fine_dim) {
    return CoarseOperator(IndexSet::full(fine_dim));
  }

  Index fine_dim() const noexcept { return coords_.universe(); }
  Index coarse_dim() const noexcept { return coords_.size(); }
  const IndexSet& coords() const noexcept { return coords_; }

  /// Scatter into the selected coordinates, zero elsewhere.
  Vector prolong(const Vector& coarse) const;
  /// Gather the selected coordinates.
  Vector restrict(const Vector& fine) const;

 private:
  IndexSet coords_;
};

/// Fresh uniform operator; callers draw one per iteration.
CoarseOperator build_operator(Index fine_dim, Index coarse_dim, Rng& rng);

struct GalerkinSystem {
  SymMatrix reduced_hessian;  // R H P
  Vector reduced_gradient;    // R g
  Vector anchor;              // iterate the system was built at
};

GalerkinSystem galerkin_system(const ObjectiveModel& model, const Vector& x,
                               const CoarseOperator& op,
                               const std::optional<IndexSet>& rows = std::nullopt);

struct CoarseDirection {
  Vector coarse_step;   // d_H, length n
  Vector fine_step;     // P d_H, length N
  double lambda_hat = 0.0;
};

/// d_H = -Q^{-1} g_H and lambda_hat = sqrt(max(0, -g_H^T d_H)).
CoarseDirection coarse_direction(const GalerkinSystem& sys, const CoarseOperator& op);

struct NewtonDirection {
  Vector step;
  double lambda = 0.0;
};

NewtonDirection newton_direction(const ObjectiveModel& model, const Vector& x);
/// Same, given an already computed gradient and Hessian.
NewtonDirection newton_direction(const SymMatrix& hessian, const Vector& gradient);

/// H Y (Y^T H Y)^{-1} Y^T H with Y the identity columns of `op`. Diagnostic.
SymMatrix nystrom_approximation(const SymMatrix& h, const CoarseOperator& op);

struct Decrements {
  double lambda_hat = 0.0;
  std::optional<double> lambda;
};

Decrements decrements(const ObjectiveModel& model, const Vector& x,
                      const CoarseOperator& op, const std::optional<IndexSet>& rows,
                      bool want_newton);

}  // namespace sigma
