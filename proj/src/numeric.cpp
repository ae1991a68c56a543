#include "sigma/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace sigma {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::InvalidDimensions: return "InvalidDimensions";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::NoFeasibleStart: return "NoFeasibleStart";
    case ErrorCode::LineSearchFailed: return "LineSearchFailed";
    case ErrorCode::MissingNewtonDecrement: return "MissingNewtonDecrement";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IndexError: return "IndexError";
    case ErrorCode::RaggedRows: return "RaggedRows";
    case ErrorCode::InfeasibleSynthesis: return "InfeasibleSynthesis";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

IndexSet::IndexSet(std::vector<Index> indices, Index universe)
    : indices_(std::move(indices)), universe_(universe) {
  if (indices_.empty()) {
    throw Error(ErrorCode::InvalidDimensions, "index set must be non-empty");
  }
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    if (indices_[i] < 0 || indices_[i] >= universe_) {
      throw Error(ErrorCode::InvalidDimensions,
                  "index " + std::to_string(indices_[i]) + " outside [0, " +
                      std::to_string(universe_) + ")");
    }
    if (i > 0 && indices_[i] <= indices_[i - 1]) {
      throw Error(ErrorCode::InvalidDimensions,
                  "index set must be strictly increasing");
    }
  }
}

IndexSet IndexSet::full(Index universe) {
  std::vector<Index> all(static_cast<std::size_t>(universe));
  for (Index i = 0; i < universe; ++i) all[static_cast<std::size_t>(i)] = i;
  return IndexSet(std::move(all), universe);
}

namespace {

constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

Rng::result_type Rng::operator()() noexcept {
  // Mix the seed first so nearby seeds give unrelated streams.
  return splitmix64(splitmix64(seed_) ^ (counter_++ * 0xd1b54a32d192ed03ULL));
}

double Rng::uniform() noexcept {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

double Rng::normal() noexcept {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Rng::below(std::uint64_t bound) noexcept {
  // Rejection keeps the draw exactly uniform.
  const std::uint64_t limit = max() - max() % bound;
  std::uint64_t r = (*this)();
  while (r >= limit) r = (*this)();
  return r % bound;
}

Rng Rng::split(std::uint64_t stream) const noexcept {
  return Rng(splitmix64(seed_ ^ splitmix64(stream + 0x632be59bd9b4e019ULL)));
}

Vector spd_solve(const SymMatrix& a, const Vector& rhs) {
  if (a.rows() != a.cols() || a.rows() != rhs.size()) {
    throw Error(ErrorCode::InvalidDimensions,
                "spd_solve: matrix is " + std::to_string(a.rows()) + "x" +
                    std::to_string(a.cols()) + ", rhs has " +
                    std::to_string(rhs.size()) + " entries");
  }
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() == Eigen::Success) {
    Vector x = llt.solve(rhs);
    if (x.allFinite()) return x;
  }
  const double shift = 1e-10 * (1.0 + a.diagonal().maxCoeff());
  Matrix shifted = a;
  shifted.diagonal().array() += shift;
  llt.compute(shifted);
  if (llt.info() == Eigen::Success) {
    Vector x = llt.solve(rhs);
    if (x.allFinite()) return x;
  }
  throw Error(ErrorCode::NotPositiveDefinite,
              "Cholesky factorization failed after diagonal shift of " +
                  std::to_string(shift));
}

double omega(double x) {
  if (!(x >= 0.0)) throw Error(ErrorCode::DomainError, "omega requires x >= 0");
  return x - std::log1p(x);
}

double omega_star(double x) {
  if (!(x >= 0.0 && x < 1.0)) {
    throw Error(ErrorCode::DomainError, "omega_star requires x in [0, 1)");
  }
  return -x - std::log1p(-x);
}

IndexSet sample_without_replacement(Index universe, Index n, Rng& rng) {
  if (n < 1 || n > universe) {
    throw Error(ErrorCode::InvalidDimensions,
                "cannot sample " + std::to_string(n) + " of " +
                    std::to_string(universe) + " indices");
  }
  if (n == universe) return IndexSet::full(universe);

  // Selection sampling (Knuth, Algorithm S): emits indices in order.
  std::vector<Index> picked;
  picked.reserve(static_cast<std::size_t>(n));
  Index needed = n;
  for (Index i = 0; i < universe && needed > 0; ++i) {
    const Index remaining = universe - i;
    if (static_cast<double>(remaining) * rng.uniform() < static_cast<double>(needed)) {
      picked.push_back(i);
      --needed;
    }
  }
  return IndexSet(std::move(picked), universe);
}

Matrix gaussian_matrix(Index rows, Index cols, Rng& rng) {
  Matrix g(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) g(i, j) = rng.normal();
  return g;
}

Matrix haar_frame(Index rows, Index cols, Rng& rng) {
  if (rows < 1 || cols < 1 || cols > rows) {
    throw Error(ErrorCode::InvalidDimensions,
                "haar_frame needs 1 <= cols <= rows");
  }
  const Matrix g = gaussian_matrix(rows, cols, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(rows, cols);
  const Matrix& r = qr.matrixQR();
  for (Index j = 0; j < cols; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

Matrix haar_orthogonal(Index dim, Rng& rng) { return haar_frame(dim, dim, rng); }

bool all_finite(const Eigen::Ref<const Matrix>& m) { return m.allFinite(); }

}  // namespace sigma
