#include "sigma/solver.hpp"

#include <chrono>
#include <cmath>
#include <string>

namespace sigma {

namespace {

constexpr double kDecrementCeiling = 0.68 * 0.68;
constexpr int kMaxReductions = 60;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::InvalidConfig, what);
}

}  // namespace

std::string_view to_string(CheckMode mode) {
  switch (mode) {
    case CheckMode::FullDecrement: return "full-decrement";
    case CheckMode::EuclideanProxy: return "euclidean-proxy";
    case CheckMode::NuOnly: return "nu-only";
    case CheckMode::AlwaysCoarse: return "always-coarse";
  }
  return "unknown";
}

CheckMode parse_check_mode(std::string_view name) {
  if (name == "full-decrement") return CheckMode::FullDecrement;
  if (name == "euclidean-proxy") return CheckMode::EuclideanProxy;
  if (name == "nu-only") return CheckMode::NuOnly;
  if (name == "always-coarse") return CheckMode::AlwaysCoarse;
  throw Error(ErrorCode::InvalidConfig, "unknown check mode '" + std::string(name) + "'");
}

std::string_view to_string(DirectionKind kind) {
  return kind == DirectionKind::Coarse ? "Coarse" : "Fine";
}

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Converged: return "Converged";
    case SolveStatus::MaxIter: return "MaxIter";
    case SolveStatus::Timeout: return "Timeout";
    case SolveStatus::Error: return "Error";
  }
  return "Unknown";
}

void SigmaConfig::validate(Index fine_dim) {
  require(coarse_dim >= 1 && coarse_dim <= fine_dim,
          "coarse dimension n must lie in [1, N] (n = " + std::to_string(coarse_dim) +
              ", N = " + std::to_string(fine_dim) + ")");
  require(mu > 0.0 && mu < 1.0, "mu must lie in (0, 1)");
  require(alpha > 0.0 && alpha < 0.5, "alpha must lie in (0, 0.5)");
  require(beta > 0.0 && beta < 1.0, "beta must lie in (0, 1)");
  require(epsilon > 0.0 && epsilon < kDecrementCeiling, "epsilon must lie in (0, 0.68^2)");
  require(nu > 0.0 && nu < kDecrementCeiling, "nu must lie in (0, 0.68^2)");
  if (nu >= epsilon) nu = epsilon / 2.0;
  require(zeta > 1.0, "zeta must be > 1");
  require(max_iter >= 0, "max_iter must be >= 0");
  require(max_seconds > 0.0, "max_seconds must be > 0");
  require(!row_sample || *row_sample >= 1, "row sample size must be >= 1");
}

DirectionKind direction_select(const DirectionInputs& in, const SigmaConfig& cfg) {
  switch (cfg.check_mode) {
    case CheckMode::AlwaysCoarse:
      return DirectionKind::Coarse;
    case CheckMode::NuOnly:
      return in.lambda_hat > cfg.nu ? DirectionKind::Coarse : DirectionKind::Fine;
    case CheckMode::EuclideanProxy:
      return (in.reduced_grad_norm > cfg.mu * in.grad_norm && in.reduced_grad_norm > cfg.nu)
                 ? DirectionKind::Coarse
                 : DirectionKind::Fine;
    case CheckMode::FullDecrement:
      if (!in.lambda) {
        throw Error(ErrorCode::MissingNewtonDecrement,
                    "full-decrement check needs the Newton decrement");
      }
      return (in.lambda_hat > cfg.mu * *in.lambda && in.lambda_hat > cfg.nu)
                 ? DirectionKind::Coarse
                 : DirectionKind::Fine;
  }
  return DirectionKind::Fine;
}

double damped_initial_step(double lambda_hat) {
  if (!(lambda_hat >= 0.0)) {
    throw Error(ErrorCode::DomainError, "decrement must be >= 0");
  }
  return 1.0 / (1.0 + lambda_hat);
}

LineSearchResult armijo_search(const ObjectiveModel& model, const Vector& x,
                               const Vector& d, double dir_deriv, double t0,
                               double alpha, double beta) {
  if (!(dir_deriv < 0.0)) {
    throw Error(ErrorCode::LineSearchFailed,
                "not a descent direction (directional derivative " +
                    std::to_string(dir_deriv) + ")");
  }
  const bool constrained = model.kind() == ModelKind::PoissonIdentity;
  double t = t0;
  for (int j = 0; j <= kMaxReductions; ++j, t *= beta) {
    if (constrained && !model.feasible(x + t * d)) continue;
    if (model.value_change(x, d, t) <= alpha * t * dir_deriv) return {t, j};
  }
  throw Error(ErrorCode::LineSearchFailed,
              "no acceptable step after " + std::to_string(kMaxReductions) + " reductions");
}

double poisson_feasible_step(const ObjectiveModel& model, const Vector& x,
                             const Vector& d, double lambda_hat, double zeta) {
  if (d.isZero(0.0)) return 1.0;
  double t = damped_initial_step(lambda_hat);
  // The damped step comes from a bound, not from the domain, so it can
  // overshoot; halve back into the domain first.
  for (int j = 0; j < 1100 && !model.feasible(x + t * d); ++j) t *= 0.5;
  while (t < 1.0 && model.feasible(x + (zeta * t) * d)) t *= zeta;
  return std::min(t, 1.0);
}

bool stopping_check(double decrement_sq, double epsilon) {
  return decrement_sq <= epsilon;
}

double eta_region(double e) {
  if (!(e >= 0.0 && e <= 1.0)) {
    throw Error(ErrorCode::DomainError, "eta_region requires e in [0, 1]");
  }
  return (3.0 - std::sqrt(5.0 + 4.0 * e)) / 2.0;
}

double initial_step(const ObjectiveModel& model, const Vector& x, const Vector& d,
                    double decrement, double zeta) {
  if (model.kind() == ModelKind::PoissonIdentity) {
    return poisson_feasible_step(model, x, d, decrement, zeta);
  }
  // The same rule on an unbounded domain: growth from the damped step never
  // leaves the domain, so it always reaches the cap.
  (void)decrement;
  (void)zeta;
  return 1.0;
}

SolveResult sigma_solve(const ObjectiveModel& model, const Vector& x0, SigmaConfig cfg) {
  const auto start = Clock::now();
  cfg.validate(model.dim());
  if (x0.size() != model.dim()) {
    throw Error(ErrorCode::InvalidDimensions, "starting point has wrong length");
  }
  if (!model.feasible(x0)) {
    throw Error(ErrorCode::OutOfDomain, "starting point is outside the domain");
  }

  SolveResult result;
  Rng rng(cfg.seed);
  Vector x = x0;
  std::optional<CoarseOperator> op;
  if (cfg.freeze_operator) op = build_operator(model.dim(), cfg.coarse_dim, rng);

  const bool want_newton =
      cfg.record_newton || cfg.check_mode == CheckMode::FullDecrement;

  for (int k = 0;; ++k) {
    TraceRecord rec;
    rec.iter = k;
    Vector d;
    double decrement_sq = 0.0;
    try {
      const Vector g = model.gradient(x);
      rec.f = model.value(x);
      rec.grad_norm = g.norm();
      if (!std::isfinite(rec.f) || !std::isfinite(rec.grad_norm)) {
        throw Error(ErrorCode::DomainError, "objective is no longer finite; the iteration diverged");
      }

      if (!cfg.freeze_operator) op = build_operator(model.dim(), cfg.coarse_dim, rng);
      std::optional<IndexSet> rows;
      if (cfg.row_sample) rows = sample_without_replacement(model.samples(), *cfg.row_sample, rng);

      const GalerkinSystem sys = galerkin_system(model, x, *op, rows);
      const CoarseDirection coarse = coarse_direction(sys, *op);
      rec.lambda_hat = coarse.lambda_hat;

      std::optional<NewtonDirection> newton;
      if (want_newton) {
        newton = newton_direction(model.hessian(x), g);
        rec.lambda = newton->lambda;
      }

      DirectionInputs in;
      in.lambda_hat = coarse.lambda_hat;
      in.lambda = rec.lambda;
      in.grad_norm = rec.grad_norm;
      in.reduced_grad_norm = sys.reduced_gradient.norm();
      rec.direction = direction_select(in, cfg);

      if (rec.direction == DirectionKind::Fine && !newton) {
        newton = newton_direction(model.hessian(x), g);
        rec.lambda = newton->lambda;
      }
      d = rec.direction == DirectionKind::Coarse ? coarse.fine_step : newton->step;
      decrement_sq = std::max(0.0, -g.dot(d));
      if (cfg.keep_iterates) {
        result.iterates.push_back(x);
        result.operators.push_back(op->coords());
      }
    } catch (const Error& e) {
      rec.elapsed_s = seconds_since(start);
      result.trace.push_back(rec);
      result.status = SolveStatus::Error;
      result.message = e.what();
      break;
    }

    rec.elapsed_s = seconds_since(start);
    result.final_decrement_sq = decrement_sq;

    if (stopping_check(decrement_sq, cfg.epsilon)) {
      result.trace.push_back(rec);
      result.status = SolveStatus::Converged;
      break;
    }
    if (k >= cfg.max_iter) {
      result.trace.push_back(rec);
      result.status = SolveStatus::MaxIter;
      break;
    }
    if (rec.elapsed_s > cfg.max_seconds) {
      result.trace.push_back(rec);
      result.status = SolveStatus::Timeout;
      break;
    }

    try {
      const double t0 = initial_step(model, x, d, std::sqrt(decrement_sq), cfg.zeta);
      const LineSearchResult ls =
          armijo_search(model, x, d, -decrement_sq, t0, cfg.alpha, cfg.beta);
      rec.step = ls.step;
      rec.backtracks = ls.backtracks;
      x += ls.step * d;
    } catch (const Error& e) {
      result.trace.push_back(rec);
      result.status = SolveStatus::Error;
      result.message = e.what();
      break;
    }
    result.trace.push_back(rec);
  }

  result.x_final = x;
  return result;
}

}  // namespace sigma
