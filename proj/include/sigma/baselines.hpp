#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "sigma/solver.hpp"

namespace sigma {

enum class BaselineMethod { GD, SGD, Newton, SubNewton, NewSamp };

std::string_view to_string(BaselineMethod method);
BaselineMethod parse_baseline_method(std::string_view name);

struct BaselineConfig {
  BaselineMethod method = BaselineMethod::GD;
  // SGD schedule t_k = sgd_t / (1 + sgd_gamma k).
  double sgd_t = 1.0;
  double sgd_gamma = 1e-6;
  Index batch = 1;
  // |S_m| for SubNewton and NewSamp; defaults to m / 2.
  std::optional<Index> rows;
  // Retained eigenpairs for NewSamp; defaults to N / 10.
  std::optional<Index> rank;
  double alpha = 0.25;
  double beta = 0.5;
  double zeta = 2.0;
  double epsilon = 1e-8;
  int max_iter = 1000;
  double max_seconds = 60.0;
  std::uint64_t seed = 0;

  /// Resolves defaults against the problem size and checks ranges.
  void validate(Index samples, Index fine_dim);
};

/// Stopping: GD and SGD exit on ||grad f|| <= sqrt(epsilon), the Newton
/// family on -grad f^T d <= epsilon.
SolveResult baseline_solve(const ObjectiveModel& model, const Vector& x0,
                           BaselineConfig cfg);

/// Rank-r truncation of a symmetric matrix with the discarded spectrum
/// replaced by its largest value: U_r L_r U_r^T + l_{r+1} (I - U_r U_r^T).
SymMatrix newsamp_truncation(const SymMatrix& h, Index rank);

/// newsamp_truncation of the Hessian estimated from the sampled rows.
SymMatrix newsamp_hessian(const ObjectiveModel& model, const Vector& x,
                          const IndexSet& rows, Index rank);

}  // namespace sigma
