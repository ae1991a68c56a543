#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>

#include "sigma/numeric.hpp"
#include "sigma/objective.hpp"

namespace sigma {

struct LibsvmOptions {
  // Number of features; inferred from the largest index when absent.
  std::optional<Index> features;
  // Map labels to {-1, +1} (positive -> +1, otherwise -1).
  bool binary_labels = false;
};

/// Dense load of "label idx:val idx:val ..." lines with 1-based, strictly
/// increasing indices. Blank lines are skipped.
Dataset load_libsvm(const std::filesystem::path& path, const LibsvmOptions& opts = {});
void write_libsvm(const std::filesystem::path& path, const Dataset& data);

/// Comma-separated numeric rows; a non-numeric first row is treated as a
/// header. label_column < 0 counts from the end (-1 is the last column).
Dataset load_csv(const std::filesystem::path& path, int label_column = -1);

/// In-place {0,1} (or any sign convention) to {-1,+1} label mapping.
void to_binary_labels(Dataset& data);

struct StandardizeTransform {
  Vector mean;
  Vector scale;  // 1 for columns left unscaled

  Dataset apply(const Dataset& data) const;
};

/// Centers every column and divides by its population standard deviation
/// (divisor m). Columns with deviation below 1e-12 are only centered.
StandardizeTransform fit_standardize(const Dataset& data);
Dataset standardize(const Dataset& data);

struct SvdGapSpec {
  Index m = 0;
  Index N = 0;
  Index p = 1;
  double gap = 100.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// min(m, N) singular values in descending order: p values evenly spaced
/// over [gap, 2 gap], the remaining ones evenly spaced over [0.1, 1].
Vector prescribed_singular_values(const SvdGapSpec& spec);

/// A = U diag(sigma) V^T with Haar-distributed orthonormal frames.
Matrix svd_gap_matrix(const SvdGapSpec& spec, Rng& rng);

enum class LabelKind { GaussianNoise, PoissonCounts, LogisticSigns };

std::string_view to_string(LabelKind kind);
LabelKind label_kind_for(ModelKind model);

struct LabelSpec {
  LabelKind kind = LabelKind::GaussianNoise;
  double noise = 0.0;       // standard deviation of additive noise
  double intensity = 100.0;  // mean Poisson rate after rescaling x_true
  std::uint64_t seed = 0;
  std::optional<Vector> x_true;  // ground truth; drawn when absent
};

struct SyntheticLabels {
  Vector b;
  Vector x_true;
};

/// Gaussian: b = A x + noise. Poisson: b_i = max(1, Poisson(a_i^T x)) with
/// x chosen among up to 100 candidates 1 + 2^-k z so that A x > 0.
/// Logistic: b_i = sign(a_i^T x + noise). Throws InfeasibleSynthesis.
SyntheticLabels synth_labels(const Matrix& a, const LabelSpec& spec, Rng& rng);

/// Flips the sign of every row whose entries sum to a negative value, so
/// the all-ones direction has nonnegative margins. Singular values are
/// unchanged. Returns the number of flipped rows.
Index orient_rows(Matrix& a);

struct SyntheticProblem {
  Dataset data;
  Vector x_true;
  Vector singular_values;
};

/// svd_gap_matrix + synth_labels. Rows are oriented first for Poisson
/// labels so a positive-margin ground truth exists.
SyntheticProblem make_synthetic(const SvdGapSpec& gap, const LabelSpec& labels);

}  // namespace sigma
