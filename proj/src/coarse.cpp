#include "sigma/coarse.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sigma {

Vector CoarseOperator::prolong(const Vector& coarse) const {
  if (coarse.size() != coarse_dim()) {
    throw Error(ErrorCode::InvalidDimensions,
                "prolong: expected length " + std::to_string(coarse_dim()));
  }
  Vector fine = Vector::Zero(fine_dim());
  fine(coords_.indices()) = coarse;
  return fine;
}

Vector CoarseOperator::restrict(const Vector& fine) const {
  if (fine.size() != fine_dim()) {
    throw Error(ErrorCode::InvalidDimensions,
                "restrict: expected length " + std::to_string(fine_dim()));
  }
  return fine(coords_.indices());
}

CoarseOperator build_operator(Index fine_dim, Index coarse_dim, Rng& rng) {
  return CoarseOperator(sample_without_replacement(fine_dim, coarse_dim, rng));
}

GalerkinSystem galerkin_system(const ObjectiveModel& model, const Vector& x,
                               const CoarseOperator& op,
                               const std::optional<IndexSet>& rows) {
  GalerkinSystem sys;
  sys.reduced_hessian = model.reduced_hessian(x, op.coords(), rows);
  sys.reduced_gradient = model.reduced_gradient(x, op.coords());
  sys.anchor = x;
  return sys;
}

CoarseDirection coarse_direction(const GalerkinSystem& sys, const CoarseOperator& op) {
  CoarseDirection out;
  if (sys.reduced_gradient.isZero(0.0)) {
    out.coarse_step = Vector::Zero(op.coarse_dim());
  } else {
    out.coarse_step = spd_solve(sys.reduced_hessian, -sys.reduced_gradient);
  }
  out.fine_step = op.prolong(out.coarse_step);
  out.lambda_hat = std::sqrt(std::max(0.0, -sys.reduced_gradient.dot(out.coarse_step)));
  return out;
}

NewtonDirection newton_direction(const SymMatrix& hessian, const Vector& gradient) {
  NewtonDirection out;
  if (gradient.isZero(0.0)) {
    out.step = Vector::Zero(gradient.size());
  } else {
    out.step = spd_solve(hessian, -gradient);
  }
  out.lambda = std::sqrt(std::max(0.0, -gradient.dot(out.step)));
  return out;
}

NewtonDirection newton_direction(const ObjectiveModel& model, const Vector& x) {
  return newton_direction(model.hessian(x), model.gradient(x));
}

SymMatrix nystrom_approximation(const SymMatrix& h, const CoarseOperator& op) {
  if (h.rows() != h.cols() || h.rows() != op.fine_dim()) {
    throw Error(ErrorCode::InvalidDimensions, "nystrom: matrix does not match operator");
  }
  const auto& idx = op.coords().indices();
  const Matrix hy = h(Eigen::all, idx);  // H Y
  const SymMatrix core = h(idx, idx);                   // Y^T H Y
  Eigen::LLT<Matrix> llt(core);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::NotPositiveDefinite, "nystrom: sampled core is not SPD");
  }
  // H_n = (L^{-1} (HY)^T)^T (L^{-1} (HY)^T)
  const Matrix half = llt.matrixL().solve(hy.transpose());
  SymMatrix hn = SymMatrix::Zero(h.rows(), h.cols());
  hn.selfadjointView<Eigen::Lower>().rankUpdate(half.transpose());
  hn.triangularView<Eigen::StrictlyUpper>() = hn.transpose();
  return hn;
}

Decrements decrements(const ObjectiveModel& model, const Vector& x,
                      const CoarseOperator& op, const std::optional<IndexSet>& rows,
                      bool want_newton) {
  Decrements out;
  out.lambda_hat = coarse_direction(galerkin_system(model, x, op, rows), op).lambda_hat;
  if (want_newton) out.lambda = newton_direction(model, x).lambda;
  return out;
}

}  // namespace sigma
