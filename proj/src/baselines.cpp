#include "sigma/baselines.hpp"

#include <chrono>
#include <cmath>
#include <string>

namespace sigma {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool first_order(BaselineMethod m) {
  return m == BaselineMethod::GD || m == BaselineMethod::SGD;
}

}  // namespace

std::string_view to_string(BaselineMethod method) {
  switch (method) {
    case BaselineMethod::GD: return "gd";
    case BaselineMethod::SGD: return "sgd";
    case BaselineMethod::Newton: return "newton";
    case BaselineMethod::SubNewton: return "subnewton";
    case BaselineMethod::NewSamp: return "newsamp";
  }
  return "unknown";
}

BaselineMethod parse_baseline_method(std::string_view name) {
  if (name == "gd") return BaselineMethod::GD;
  if (name == "sgd") return BaselineMethod::SGD;
  if (name == "newton") return BaselineMethod::Newton;
  if (name == "subnewton") return BaselineMethod::SubNewton;
  if (name == "newsamp") return BaselineMethod::NewSamp;
  throw Error(ErrorCode::InvalidConfig, "unknown baseline '" + std::string(name) + "'");
}

void BaselineConfig::validate(Index samples, Index fine_dim) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorCode::InvalidConfig, what);
  };
  if (!rows) rows = std::max<Index>(1, samples / 2);
  if (!rank) rank = fine_dim / 10;
  if (method == BaselineMethod::SubNewton || method == BaselineMethod::NewSamp) {
    require(*rows >= 1 && *rows <= samples, "row sample size must lie in [1, m]");
  }
  if (method == BaselineMethod::NewSamp) {
    require(*rank >= 0 && *rank < fine_dim, "NewSamp rank must lie in [0, N)");
  }
  if (method == BaselineMethod::SGD) {
    require(batch >= 1 && batch <= samples, "SGD batch must lie in [1, m]");
  }
  require(sgd_t > 0.0, "SGD step t must be > 0");
  require(sgd_gamma >= 0.0, "SGD gamma must be >= 0");
  require(alpha > 0.0 && alpha < 0.5, "alpha must lie in (0, 0.5)");
  require(beta > 0.0 && beta < 1.0, "beta must lie in (0, 1)");
  require(zeta > 1.0, "zeta must be > 1");
  require(epsilon > 0.0, "epsilon must be > 0");
  require(max_iter >= 0, "max_iter must be >= 0");
  require(max_seconds > 0.0, "max_seconds must be > 0");
}

SymMatrix newsamp_truncation(const SymMatrix& h, Index rank) {
  const Index dim = h.rows();
  if (rank < 0 || rank >= dim) {
    throw Error(ErrorCode::InvalidDimensions, "NewSamp rank must lie in [0, N)");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorCode::NotPositiveDefinite, "eigendecomposition failed");
  }
  // Eigen sorts ascending; the retained pairs are the last `rank` columns.
  const Vector& values = eig.eigenvalues();
  const double floor_value = values(dim - 1 - rank);
  if (!(floor_value > 0.0)) {
    throw Error(ErrorCode::NotPositiveDefinite,
                "eigenvalue " + std::to_string(rank + 1) + " of the sampled Hessian is " +
                    std::to_string(floor_value) +
                    "; add l2 regularization (xi2 > 0) or sample more rows");
  }
  const auto top = eig.eigenvectors().rightCols(rank);
  const Vector shifted = values.tail(rank).array() - floor_value;
  SymMatrix out = SymMatrix::Identity(dim, dim) * floor_value;
  out.noalias() += top * shifted.asDiagonal() * top.transpose();
  return 0.5 * (out + out.transpose());
}

SymMatrix newsamp_hessian(const ObjectiveModel& model, const Vector& x,
                          const IndexSet& rows, Index rank) {
  return newsamp_truncation(model.hessian(x, rows), rank);
}

SolveResult baseline_solve(const ObjectiveModel& model, const Vector& x0,
                           BaselineConfig cfg) {
  const auto start = Clock::now();
  cfg.validate(model.samples(), model.dim());
  if (x0.size() != model.dim()) {
    throw Error(ErrorCode::InvalidDimensions, "starting point has wrong length");
  }
  if (!model.feasible(x0)) {
    throw Error(ErrorCode::OutOfDomain, "starting point is outside the domain");
  }

  SolveResult result;
  Rng rng(cfg.seed);
  Vector x = x0;
  const double grad_tol = std::sqrt(cfg.epsilon);

  for (int k = 0;; ++k) {
    TraceRecord rec;
    rec.iter = k;
    rec.direction = DirectionKind::Fine;
    Vector g;
    Vector d;
    double decrement_sq = 0.0;
    try {
      g = model.gradient(x);
      rec.f = model.value(x);
      rec.grad_norm = g.norm();
      if (!std::isfinite(rec.f) || !std::isfinite(rec.grad_norm)) {
        throw Error(ErrorCode::DomainError, "objective is no longer finite; the iteration diverged");
      }
      switch (cfg.method) {
        case BaselineMethod::GD:
          d = -g;
          break;
        case BaselineMethod::SGD: {
          const IndexSet batch = sample_without_replacement(model.samples(), cfg.batch, rng);
          d = -model.gradient(x, batch);
          break;
        }
        case BaselineMethod::Newton:
          d = newton_direction(model.hessian(x), g).step;
          break;
        case BaselineMethod::SubNewton: {
          const IndexSet rows = sample_without_replacement(model.samples(), *cfg.rows, rng);
          d = newton_direction(model.hessian(x, rows), g).step;
          break;
        }
        case BaselineMethod::NewSamp: {
          const IndexSet rows = sample_without_replacement(model.samples(), *cfg.rows, rng);
          d = newton_direction(newsamp_hessian(model, x, rows, *cfg.rank), g).step;
          break;
        }
      }
      decrement_sq = std::max(0.0, -g.dot(d));
      rec.lambda_hat = std::sqrt(decrement_sq);
    } catch (const Error& e) {
      rec.elapsed_s = seconds_since(start);
      result.trace.push_back(rec);
      result.status = SolveStatus::Error;
      result.message = e.what();
      break;
    }

    rec.elapsed_s = seconds_since(start);
    result.final_decrement_sq = decrement_sq;
    const bool converged = first_order(cfg.method) ? rec.grad_norm <= grad_tol
                                                   : stopping_check(decrement_sq, cfg.epsilon);
    if (converged) {
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
      if (cfg.method == BaselineMethod::SGD) {
        double t = cfg.sgd_t / (1.0 + cfg.sgd_gamma * k);
        // No line search, but the Poisson domain still has to be respected.
        int cuts = 0;
        while (!model.feasible(x + t * d) && cuts < 60) {
          t *= 0.5;
          ++cuts;
        }
        if (!model.feasible(x + t * d)) {
          throw Error(ErrorCode::OutOfDomain, "SGD step cannot stay in the domain");
        }
        rec.step = t;
        rec.backtracks = cuts;
        x += t * d;
      } else {
        const double t0 = cfg.method == BaselineMethod::GD
                              ? 1.0
                              : initial_step(model, x, d, std::sqrt(decrement_sq), cfg.zeta);
        const LineSearchResult ls =
            armijo_search(model, x, d, g.dot(d), t0, cfg.alpha, cfg.beta);
        rec.step = ls.step;
        rec.backtracks = ls.backtracks;
        x += ls.step * d;
      }
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
