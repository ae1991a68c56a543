#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "sigma/numeric.hpp"

namespace sigma {

enum class ModelKind { Gaussian, PoissonIdentity, Logistic };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

/// GLM input: rows of A are the samples a_i, b the responses.
struct Dataset {
  Matrix A;
  Vector b;

  Index samples() const noexcept { return A.rows(); }
  Index features() const noexcept { return A.cols(); }
};

/// xi2 * ||x||^2 + xi1 * sum_i (sqrt(c^2 + x_i^2) - c)
struct Regularization {
  double xi2 = 0.0;
  double xi1 = 0.0;
  double c = 1e-2;

  void validate() const;
};

struct DomainStatus {
  bool feasible = true;
  // min_i a_i^T x for the Poisson model, +inf otherwise.
  double margin = std::numeric_limits<double>::infinity();
};

struct Evaluation {
  double value = 0.0;
  DomainStatus status;
};

/// M^2 / 4 with M = 2 sqrt(m) max_i 1/sqrt(b_i); makes the Poisson
/// objective self-concordant with constant 2.
double poisson_scale(const Vector& b, Index m);

/// A GLM objective plus optional regularization. Immutable; every method is
/// a read-only oracle at the supplied point.
///
/// Gaussian and logistic losses are averaged over samples. The Poisson loss
/// a^T x - b log(a^T x) is summed and multiplied by poisson_scale(b, m).
class ObjectiveModel {
 public:
  ObjectiveModel(ModelKind kind, Dataset data, Regularization reg = {});

  ModelKind kind() const noexcept { return kind_; }
  const Dataset& dataset() const noexcept { return data_; }
  const Regularization& regularization() const noexcept { return reg_; }
  double scale() const noexcept { return scale_; }
  Index dim() const noexcept { return data_.features(); }
  Index samples() const noexcept { return data_.samples(); }

  DomainStatus domain_status(const Vector& x) const;
  bool feasible(const Vector& x) const { return domain_status(x).feasible; }

  /// Throws OutOfDomain for infeasible Poisson points.
  Evaluation evaluate(const Vector& x) const;
  double value(const Vector& x) const { return evaluate(x).value; }

  /// f(x + t d) - f(x) evaluated term by term to avoid cancellation between
  /// two large, nearly equal objective values.
  double value_change(const Vector& x, const Vector& d, double t) const;

  Vector gradient(const Vector& x) const;
  /// Unbiased mini-batch estimate of the gradient using the given rows.
  Vector gradient(const Vector& x, const IndexSet& rows) const;
  /// Gradient of the unscaled Poisson loss (equal to gradient() otherwise).
  Vector unscaled_gradient(const Vector& x) const;

  SymMatrix hessian(const Vector& x) const;
  /// Row-sampled Hessian estimate over all coordinates.
  SymMatrix hessian(const Vector& x, const IndexSet& rows) const;

  Vector reduced_gradient(const Vector& x, const IndexSet& coords) const;
  /// The coords x coords block of the Hessian (optionally row-sampled),
  /// built in O(m n^2) without touching the full Hessian.
  SymMatrix reduced_hessian(const Vector& x, const IndexSet& coords,
                            const std::optional<IndexSet>& rows = std::nullopt) const;

  /// Zero for Gaussian/logistic. For Poisson, a multiple of the first
  /// candidate direction (all-ones, then the least-squares solution of
  /// A v = 1) with positive margins, scaled so the minimum margin is 1.
  /// Throws NoFeasibleStart otherwise.
  Vector feasible_start() const;

 private:
  // Per-sample first and second derivatives of the loss at z = A x.
  Vector loss_first(const Vector& z) const;
  Vector loss_second(const Vector& z) const;
  // Multiplier applied to the per-sample sums (1/m or the Poisson scale).
  double sum_weight() const noexcept;
  Vector margins(const Vector& x) const;
  void require_dim(const Vector& x, const char* what) const;
  void require_feasible(const Vector& z) const;

  ModelKind kind_;
  Dataset data_;
  Regularization reg_;
  double scale_ = 1.0;
};

}  // namespace sigma
