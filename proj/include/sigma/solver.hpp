#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sigma/coarse.hpp"
#include "sigma/numeric.hpp"
#include "sigma/objective.hpp"

namespace sigma {

/// Rule deciding between the coarse and the fine (Newton) direction.
enum class CheckMode {
  FullDecrement,   // coarse iff lambda_hat > mu * lambda and lambda_hat > nu
  EuclideanProxy,  // coarse iff |g_H| > mu |g| and |g_H| > nu
  NuOnly,          // coarse iff lambda_hat > nu
  AlwaysCoarse,
};

std::string_view to_string(CheckMode mode);
CheckMode parse_check_mode(std::string_view name);

enum class DirectionKind { Coarse, Fine };
std::string_view to_string(DirectionKind kind);

enum class SolveStatus { Converged, MaxIter, Timeout, Error };
std::string_view to_string(SolveStatus status);

struct SigmaConfig {
  Index coarse_dim = 1;
  double mu = 0.5;
  double nu = 1e-4;
  double epsilon = 1e-8;
  double alpha = 0.25;
  double beta = 0.5;
  double zeta = 2.0;
  CheckMode check_mode = CheckMode::AlwaysCoarse;
  std::optional<Index> row_sample;
  int max_iter = 1000;
  double max_seconds = 60.0;
  std::uint64_t seed = 0;
  // Draw the coarse operator once instead of every iteration.
  bool freeze_operator = false;
  // Also compute the Newton decrement each iteration (costly, small N only).
  bool record_newton = false;
  // Keep x_k and the coordinate set of every iteration in the result.
  bool keep_iterates = false;

  /// Throws InvalidConfig on out-of-range values. A nu that is not below
  /// epsilon is lowered to epsilon / 2 (nu is a guard only in AlwaysCoarse).
  void validate(Index fine_dim);
};

struct TraceRecord {
  int iter = 0;
  double elapsed_s = 0.0;
  double f = 0.0;
  double grad_norm = 0.0;
  double lambda_hat = 0.0;
  std::optional<double> lambda;
  double step = 0.0;
  DirectionKind direction = DirectionKind::Coarse;
  int backtracks = 0;
};

struct SolveResult {
  Vector x_final;
  std::vector<TraceRecord> trace;
  SolveStatus status = SolveStatus::Error;
  double final_decrement_sq = 0.0;
  std::string message;
  // Populated only with keep_iterates.
  std::vector<Vector> iterates;
  std::vector<IndexSet> operators;

  int iterations() const noexcept {
    return trace.empty() ? 0 : static_cast<int>(trace.size()) - 1;
  }
};

SolveResult sigma_solve(const ObjectiveModel& model, const Vector& x0, SigmaConfig cfg);

/// Inputs for direction selection; lambda only needed by FullDecrement.
struct DirectionInputs {
  double lambda_hat = 0.0;
  std::optional<double> lambda;
  double grad_norm = 0.0;
  double reduced_grad_norm = 0.0;
};

DirectionKind direction_select(const DirectionInputs& in, const SigmaConfig& cfg);

/// 1 / (1 + lambda_hat): the minimizer of the self-concordant upper model.
double damped_initial_step(double lambda_hat);

struct LineSearchResult {
  double step = 0.0;
  int backtracks = 0;
};

/// Backtracks t = t0 beta^j until x + t d is feasible and
/// f(x + t d) <= f(x) + alpha t dir_deriv. Throws LineSearchFailed when
/// dir_deriv >= 0 or after 60 reductions.
LineSearchResult armijo_search(const ObjectiveModel& model, const Vector& x,
                               const Vector& d, double dir_deriv, double t0,
                               double alpha, double beta);

/// Initial Poisson step: start from 1/(1 + lambda_hat) (halved while
/// infeasible), multiply by zeta while x + t d stays feasible, cap at 1.
double poisson_feasible_step(const ObjectiveModel& model, const Vector& x,
                             const Vector& d, double lambda_hat, double zeta);

/// Inclusive: decrement_sq <= epsilon.
bool stopping_check(double decrement_sq, double epsilon);

/// (3 - sqrt(5 + 4e)) / 2 for e in [0, 1].
double eta_region(double e);

/// Initial step shared by the solvers: start at 1/(1 + decrement) and grow
/// by zeta while x + t d stays in the domain, capped at 1. Only the Poisson
/// domain is bounded; every other model starts at t = 1.
double initial_step(const ObjectiveModel& model, const Vector& x, const Vector& d,
                    double decrement, double zeta);

}  // namespace sigma
