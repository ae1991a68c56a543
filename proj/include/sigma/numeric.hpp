#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sigma/error.hpp"

namespace sigma {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
// Symmetric matrices are stored densely; every producer in this library
// writes both triangles.
using SymMatrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Strictly increasing, duplicate-free subset of [0, universe).
class IndexSet {
 public:
  IndexSet() = default;
  /// Validates ordering, range, and non-emptiness.
  IndexSet(std::vector<Index> indices, Index universe);

  static IndexSet full(Index universe);

  Index size() const noexcept { return static_cast<Index>(indices_.size()); }
  Index universe() const noexcept { return universe_; }
  bool is_full() const noexcept { return size() == universe_; }
  Index operator[](Index i) const { return indices_[static_cast<std::size_t>(i)]; }
  const std::vector<Index>& indices() const noexcept { return indices_; }
  auto begin() const noexcept { return indices_.begin(); }
  auto end() const noexcept { return indices_.end(); }

  friend bool operator==(const IndexSet&, const IndexSet&) = default;

 private:
  std::vector<Index> indices_;
  Index universe_ = 0;
};

/// Counter-based generator: output k is a SplitMix64 finalization of
/// (seed, k). Identical seed and call sequence give bit-identical draws.
/// Satisfies UniformRandomBitGenerator so std distributions accept it.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) noexcept : seed_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept;

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Standard normal (Box-Muller, no cached second variate).
  double normal() noexcept;
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t counter() const noexcept { return counter_; }

  /// Independent stream for a sub-task (e.g. one bench entry).
  Rng split(std::uint64_t stream) const noexcept;

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

/// Solves A x = rhs through a Cholesky factorization. If the factorization
/// fails, retries once with the diagonal shifted by 1e-10 * (1 + max diag).
/// Throws NotPositiveDefinite if the retry fails too.
Vector spd_solve(const SymMatrix& a, const Vector& rhs);

/// omega(x) = x - log(1 + x), x >= 0.
double omega(double x);
/// omega_*(x) = -x - log(1 - x), 0 <= x < 1.
double omega_star(double x);

/// Uniform n-subset of [0, N), returned sorted. n == N returns the full
/// set without consuming randomness.
IndexSet sample_without_replacement(Index universe, Index n, Rng& rng);

/// Haar-distributed orthogonal dim x dim matrix (QR of a Gaussian matrix
/// with the column signs fixed by diag(R)).
Matrix haar_orthogonal(Index dim, Rng& rng);

/// First `cols` columns of a Haar-distributed rows x rows orthogonal matrix.
Matrix haar_frame(Index rows, Index cols, Rng& rng);

/// rows x cols matrix of independent standard normals, filled column-major.
Matrix gaussian_matrix(Index rows, Index cols, Rng& rng);

bool all_finite(const Eigen::Ref<const Matrix>& m);

}  // namespace sigma
