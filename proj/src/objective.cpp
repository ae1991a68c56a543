#include "sigma/objective.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sigma {

namespace {

// log(1 + e^u) without overflow.
double softplus(double u) {
  return std::max(u, 0.0) + std::log1p(std::exp(-std::abs(u)));
}

double logistic_sigmoid(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

// softplus(u + h) - softplus(u)
double softplus_change(double u, double h) {
  if (std::abs(h) > 30.0) return softplus(u + h) - softplus(u);
  return std::log1p(logistic_sigmoid(u) * std::expm1(h));
}

double pseudo_huber(const Vector& x, double c) {
  return ((x.array().square() + c * c).sqrt() - c).sum();
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Gaussian: return "gaussian";
    case ModelKind::PoissonIdentity: return "poisson";
    case ModelKind::Logistic: return "logistic";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "gaussian") return ModelKind::Gaussian;
  if (name == "poisson") return ModelKind::PoissonIdentity;
  if (name == "logistic") return ModelKind::Logistic;
  throw Error(ErrorCode::InvalidConfig, "unknown model '" + std::string(name) +
                                            "' (expected gaussian, poisson, logistic)");
}

void Regularization::validate() const {
  if (!(xi2 >= 0.0) || !(xi1 >= 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "regularization weights must be >= 0");
  }
  if (!(c > 0.0)) throw Error(ErrorCode::InvalidConfig, "pseudo-Huber c must be > 0");
}

double poisson_scale(const Vector& b, Index m) {
  if (b.size() == 0 || m < 1) {
    throw Error(ErrorCode::InvalidDimensions, "poisson_scale needs m >= 1 responses");
  }
  double worst = 0.0;
  for (Index i = 0; i < b.size(); ++i) {
    if (!(b(i) >= 1.0)) {
      throw Error(ErrorCode::DomainError,
                  "Poisson responses must be >= 1 (b[" + std::to_string(i) +
                      "] = " + std::to_string(b(i)) + ")");
    }
    worst = std::max(worst, 1.0 / std::sqrt(b(i)));
  }
  const double M = 2.0 * std::sqrt(static_cast<double>(m)) * worst;
  return M * M / 4.0;
}

ObjectiveModel::ObjectiveModel(ModelKind kind, Dataset data, Regularization reg)
    : kind_(kind), data_(std::move(data)), reg_(reg) {
  reg_.validate();
  if (data_.A.rows() != data_.b.size() || data_.A.rows() < 1 || data_.A.cols() < 1) {
    throw Error(ErrorCode::InvalidDimensions,
                "dataset has " + std::to_string(data_.A.rows()) + " rows but " +
                    std::to_string(data_.b.size()) + " responses");
  }
  if (!data_.A.allFinite() || !data_.b.allFinite()) {
    throw Error(ErrorCode::DomainError, "dataset contains NaN or Inf");
  }
  switch (kind_) {
    case ModelKind::PoissonIdentity:
      for (Index i = 0; i < data_.b.size(); ++i) {
        if (data_.b(i) != std::floor(data_.b(i))) {
          throw Error(ErrorCode::DomainError, "Poisson responses must be integer counts");
        }
      }
      scale_ = poisson_scale(data_.b, data_.samples());
      break;
    case ModelKind::Logistic:
      for (Index i = 0; i < data_.b.size(); ++i) {
        if (data_.b(i) != 1.0 && data_.b(i) != -1.0) {
          throw Error(ErrorCode::DomainError, "logistic labels must be -1 or +1");
        }
      }
      break;
    case ModelKind::Gaussian:
      break;
  }
}

double ObjectiveModel::sum_weight() const noexcept {
  return kind_ == ModelKind::PoissonIdentity
             ? scale_
             : 1.0 / static_cast<double>(data_.samples());
}

void ObjectiveModel::require_dim(const Vector& x, const char* what) const {
  if (x.size() != dim()) {
    throw Error(ErrorCode::InvalidDimensions,
                std::string(what) + ": expected length " + std::to_string(dim()) +
                    ", got " + std::to_string(x.size()));
  }
}

Vector ObjectiveModel::margins(const Vector& x) const { return data_.A * x; }

void ObjectiveModel::require_feasible(const Vector& z) const {
  if (kind_ != ModelKind::PoissonIdentity) return;
  const double margin = z.minCoeff();
  if (!(margin > 0.0)) {
    throw Error(ErrorCode::OutOfDomain,
                "Poisson objective needs a_i^T x > 0 for all i (min margin " +
                    std::to_string(margin) + ")");
  }
}

DomainStatus ObjectiveModel::domain_status(const Vector& x) const {
  require_dim(x, "domain_status");
  if (kind_ != ModelKind::PoissonIdentity) return {};
  const double margin = margins(x).minCoeff();
  return {margin > 0.0, margin};
}

Vector ObjectiveModel::loss_first(const Vector& z) const {
  const Vector& b = data_.b;
  switch (kind_) {
    case ModelKind::Gaussian:
      return z - b;
    case ModelKind::PoissonIdentity:
      return (1.0 - b.array() / z.array()).matrix();
    case ModelKind::Logistic: {
      Vector g(z.size());
      for (Index i = 0; i < z.size(); ++i) g(i) = -b(i) * logistic_sigmoid(-b(i) * z(i));
      return g;
    }
  }
  return {};
}

Vector ObjectiveModel::loss_second(const Vector& z) const {
  const Vector& b = data_.b;
  switch (kind_) {
    case ModelKind::Gaussian:
      return Vector::Ones(z.size());
    case ModelKind::PoissonIdentity:
      return (b.array() / z.array().square()).matrix();
    case ModelKind::Logistic: {
      Vector h(z.size());
      for (Index i = 0; i < z.size(); ++i) {
        const double u = b(i) * z(i);
        h(i) = b(i) * b(i) * logistic_sigmoid(u) * logistic_sigmoid(-u);
      }
      return h;
    }
  }
  return {};
}

Evaluation ObjectiveModel::evaluate(const Vector& x) const {
  require_dim(x, "evaluate");
  const Vector z = margins(x);
  require_feasible(z);
  const Vector& b = data_.b;
  double loss = 0.0;
  switch (kind_) {
    case ModelKind::Gaussian:
      loss = 0.5 * (z - b).squaredNorm();
      break;
    case ModelKind::PoissonIdentity:
      loss = (z.array() - b.array() * z.array().log()).sum();
      break;
    case ModelKind::Logistic:
      for (Index i = 0; i < z.size(); ++i) loss += softplus(-b(i) * z(i));
      break;
  }
  double value = sum_weight() * loss;
  if (reg_.xi2 > 0.0) value += reg_.xi2 * x.squaredNorm();
  if (reg_.xi1 > 0.0) value += reg_.xi1 * pseudo_huber(x, reg_.c);

  Evaluation out;
  out.value = value;
  if (kind_ == ModelKind::PoissonIdentity) out.status = {true, z.minCoeff()};
  return out;
}

double ObjectiveModel::value_change(const Vector& x, const Vector& d, double t) const {
  require_dim(x, "value_change");
  require_dim(d, "value_change");
  const Vector z = margins(x);
  const Vector delta = t * (data_.A * d);
  const Vector& b = data_.b;
  double loss = 0.0;
  switch (kind_) {
    case ModelKind::Gaussian:
      for (Index i = 0; i < z.size(); ++i) {
        loss += (z(i) - b(i)) * delta(i) + 0.5 * delta(i) * delta(i);
      }
      break;
    case ModelKind::PoissonIdentity: {
      const Vector moved = z + delta;
      require_feasible(moved);
      for (Index i = 0; i < z.size(); ++i) {
        loss += delta(i) - b(i) * std::log1p(delta(i) / z(i));
      }
      break;
    }
    case ModelKind::Logistic:
      for (Index i = 0; i < z.size(); ++i) {
        loss += softplus_change(-b(i) * z(i), -b(i) * delta(i));
      }
      break;
  }
  double change = sum_weight() * loss;
  const Vector step = t * d;
  if (reg_.xi2 > 0.0) change += reg_.xi2 * (2.0 * x.dot(step) + step.squaredNorm());
  if (reg_.xi1 > 0.0) {
    const double c2 = reg_.c * reg_.c;
    double huber = 0.0;
    for (Index j = 0; j < x.size(); ++j) {
      const double y = x(j) + step(j);
      huber += (step(j) * (x(j) + y)) /
               (std::sqrt(c2 + y * y) + std::sqrt(c2 + x(j) * x(j)));
    }
    change += reg_.xi1 * huber;
  }
  return change;
}

Vector ObjectiveModel::gradient(const Vector& x) const {
  require_dim(x, "gradient");
  const Vector z = margins(x);
  require_feasible(z);
  Vector g = sum_weight() * (data_.A.transpose() * loss_first(z));
  if (reg_.xi2 > 0.0) g += 2.0 * reg_.xi2 * x;
  if (reg_.xi1 > 0.0) {
    g.array() += reg_.xi1 * x.array() / (x.array().square() + reg_.c * reg_.c).sqrt();
  }
  return g;
}

Vector ObjectiveModel::gradient(const Vector& x, const IndexSet& rows) const {
  require_dim(x, "gradient");
  if (rows.universe() != samples()) {
    throw Error(ErrorCode::InvalidDimensions, "row sample universe must equal m");
  }
  if (rows.is_full()) return gradient(x);
  const Matrix a_rows = data_.A(rows.indices(), Eigen::all);
  const Vector z = a_rows * x;
  require_feasible(z);
  Vector first = Vector::Zero(z.size());
  const Vector b_rows = data_.b(rows.indices());
  for (Index i = 0; i < z.size(); ++i) {
    const double bi = b_rows(i);
    switch (kind_) {
      case ModelKind::Gaussian: first(i) = z(i) - bi; break;
      case ModelKind::PoissonIdentity: first(i) = 1.0 - bi / z(i); break;
      case ModelKind::Logistic: first(i) = -bi * logistic_sigmoid(-bi * z(i)); break;
    }
  }
  const double factor =
      sum_weight() * static_cast<double>(samples()) / static_cast<double>(rows.size());
  Vector g = factor * (a_rows.transpose() * first);
  if (reg_.xi2 > 0.0) g += 2.0 * reg_.xi2 * x;
  if (reg_.xi1 > 0.0) {
    g.array() += reg_.xi1 * x.array() / (x.array().square() + reg_.c * reg_.c).sqrt();
  }
  return g;
}

Vector ObjectiveModel::unscaled_gradient(const Vector& x) const {
  Vector g = gradient(x);
  if (kind_ != ModelKind::PoissonIdentity) return g;
  // Strip the scale from the loss part only.
  Vector reg_part = Vector::Zero(x.size());
  if (reg_.xi2 > 0.0) reg_part += 2.0 * reg_.xi2 * x;
  if (reg_.xi1 > 0.0) {
    reg_part.array() +=
        reg_.xi1 * x.array() / (x.array().square() + reg_.c * reg_.c).sqrt();
  }
  return (g - reg_part) / scale_ + reg_part;
}

Vector ObjectiveModel::reduced_gradient(const Vector& x, const IndexSet& coords) const {
  if (coords.universe() != dim()) {
    throw Error(ErrorCode::InvalidDimensions, "coordinate set universe must equal N");
  }
  return gradient(x)(coords.indices());
}

SymMatrix ObjectiveModel::reduced_hessian(const Vector& x, const IndexSet& coords,
                                          const std::optional<IndexSet>& rows) const {
  require_dim(x, "reduced_hessian");
  if (coords.universe() != dim()) {
    throw Error(ErrorCode::InvalidDimensions, "coordinate set universe must equal N");
  }
  if (rows && rows->universe() != samples()) {
    throw Error(ErrorCode::InvalidDimensions, "row sample universe must equal m");
  }
  const Vector z = margins(x);
  require_feasible(z);
  const Vector curvature = loss_second(z);

  const bool sampled = rows && !rows->is_full();
  Matrix sliced;
  Vector w;
  double factor = sum_weight();
  if (sampled) {
    sliced = data_.A(rows->indices(), coords.indices());
    w = curvature(rows->indices());
    factor *= static_cast<double>(samples()) / static_cast<double>(rows->size());
  } else if (coords.is_full()) {
    sliced = data_.A;
    w = curvature;
  } else {
    sliced = data_.A(Eigen::all, coords.indices());
    w = curvature;
  }
  // Q = factor * B^T B with B = diag(sqrt(w)) A_S; the rank update fills one
  // triangle, which is mirrored so Q is exactly symmetric.
  sliced.array().colwise() *= w.array().sqrt();
  const Index n = coords.size();
  SymMatrix q = SymMatrix::Zero(n, n);
  q.selfadjointView<Eigen::Lower>().rankUpdate(sliced.transpose(), factor);
  q.triangularView<Eigen::StrictlyUpper>() = q.transpose();

  if (reg_.xi2 > 0.0) q.diagonal().array() += 2.0 * reg_.xi2;
  if (reg_.xi1 > 0.0) {
    const double c2 = reg_.c * reg_.c;
    for (Index k = 0; k < n; ++k) {
      const double xk = x(coords[k]);
      q(k, k) += reg_.xi1 * c2 / std::pow(c2 + xk * xk, 1.5);
    }
  }
  return q;
}

SymMatrix ObjectiveModel::hessian(const Vector& x) const {
  return reduced_hessian(x, IndexSet::full(dim()));
}

SymMatrix ObjectiveModel::hessian(const Vector& x, const IndexSet& rows) const {
  return reduced_hessian(x, IndexSet::full(dim()), rows);
}

Vector ObjectiveModel::feasible_start() const {
  if (kind_ != ModelKind::PoissonIdentity) return Vector::Zero(dim());

  auto scaled_if_feasible = [&](const Vector& v) -> std::optional<Vector> {
    if (!v.allFinite()) return std::nullopt;
    const double margin = margins(v).minCoeff();
    if (!(margin > 0.0)) return std::nullopt;
    return Vector(v / margin);
  };

  if (auto x = scaled_if_feasible(Vector::Ones(dim()))) return *x;
  const Vector ls = data_.A.completeOrthogonalDecomposition().solve(
      Vector::Ones(samples()));
  if (auto x = scaled_if_feasible(ls)) return *x;
  throw Error(ErrorCode::NoFeasibleStart,
              "no x with a_i^T x > 0 found along the all-ones or least-squares "
              "directions; supply a feasible starting point");
}

}  // namespace sigma
