#include "sigma/data.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace sigma {

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  return in;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::optional<double> parse_double(std::string_view s) {
  const std::string t = trim(s);
  if (t.empty()) return std::nullopt;
  const char* begin = t.data();
  if (*begin == '+') ++begin;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size()) return std::nullopt;
  return value;
}

std::optional<long long> parse_int(std::string_view s) {
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string at_line(const std::filesystem::path& path, std::size_t line) {
  return path.string() + " line " + std::to_string(line);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

Vector linspace_desc(double hi, double lo, Index count) {
  Vector v(count);
  if (count == 1) {
    v(0) = hi;
    return v;
  }
  for (Index i = 0; i < count; ++i) {
    v(i) = hi - (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  return v;
}

}  // namespace

Dataset load_libsvm(const std::filesystem::path& path, const LibsvmOptions& opts) {
  std::ifstream in = open_input(path);
  struct Entry {
    Index col;
    double value;
  };
  std::vector<std::vector<Entry>> rows;
  std::vector<double> labels;
  Index max_index = 0;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream tokens(line);
    std::string token;
    if (!(tokens >> token)) continue;
    const auto label = parse_double(token);
    if (!label) throw Error(ErrorCode::ParseError, at_line(path, line_no) + ": bad label '" + token + "'");
    std::vector<Entry> row;
    Index previous = 0;
    while (tokens >> token) {
      const auto colon = token.find(':');
      if (colon == std::string::npos) {
        throw Error(ErrorCode::ParseError, at_line(path, line_no) + ": expected idx:val, got '" + token + "'");
      }
      const auto idx = parse_int(std::string_view(token).substr(0, colon));
      const auto val = parse_double(std::string_view(token).substr(colon + 1));
      if (!idx || !val) {
        throw Error(ErrorCode::ParseError, at_line(path, line_no) + ": malformed entry '" + token + "'");
      }
      if (*idx < 1) {
        throw Error(ErrorCode::IndexError, at_line(path, line_no) + ": indices are 1-based");
      }
      if (*idx <= previous) {
        throw Error(ErrorCode::IndexError, at_line(path, line_no) + ": indices must be strictly ascending");
      }
      previous = static_cast<Index>(*idx);
      row.push_back({previous - 1, *val});
    }
    max_index = std::max(max_index, previous);
    rows.push_back(std::move(row));
    labels.push_back(*label);
  }
  if (rows.empty()) throw Error(ErrorCode::ParseError, path.string() + ": no data rows");

  const Index features = opts.features.value_or(max_index);
  if (features < max_index) {
    throw Error(ErrorCode::IndexError, path.string() + ": feature index " +
                                           std::to_string(max_index) + " exceeds N = " +
                                           std::to_string(features));
  }
  if (features < 1) throw Error(ErrorCode::ParseError, path.string() + ": no features");

  Dataset data;
  data.A = Matrix::Zero(static_cast<Index>(rows.size()), features);
  data.b = Eigen::Map<const Vector>(labels.data(), static_cast<Index>(labels.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const Entry& e : rows[i]) data.A(static_cast<Index>(i), e.col) = e.value;
  }
  if (opts.binary_labels) to_binary_labels(data);
  return data;
}

void write_libsvm(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  for (Index i = 0; i < data.samples(); ++i) {
    out << format_double(data.b(i));
    for (Index j = 0; j < data.features(); ++j) {
      if (data.A(i, j) != 0.0) out << ' ' << (j + 1) << ':' << format_double(data.A(i, j));
    }
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::IoError, "failed writing '" + path.string() + "'");
}

Dataset load_csv(const std::filesystem::path& path, int label_column) {
  std::ifstream in = open_input(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv(line);
    std::vector<double> values;
    values.reserve(cells.size());
    bool numeric = true;
    for (const auto& cell : cells) {
      const auto v = parse_double(cell);
      if (!v) {
        numeric = false;
        break;
      }
      values.push_back(*v);
    }
    if (!numeric) {
      if (rows.empty() && width == 0) {
        width = cells.size();  // header
        continue;
      }
      throw Error(ErrorCode::ParseError, at_line(path, line_no) + ": non-numeric cell");
    }
    if (width == 0) width = values.size();
    if (values.size() != width) {
      throw Error(ErrorCode::RaggedRows, at_line(path, line_no) + ": expected " +
                                             std::to_string(width) + " columns, got " +
                                             std::to_string(values.size()));
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw Error(ErrorCode::ParseError, path.string() + ": no data rows");
  if (width < 2) throw Error(ErrorCode::ParseError, path.string() + ": need a label and a feature column");

  const int w = static_cast<int>(width);
  const int label = label_column < 0 ? w + label_column : label_column;
  if (label < 0 || label >= w) {
    throw Error(ErrorCode::InvalidConfig, "label column " + std::to_string(label_column) +
                                              " outside " + std::to_string(w) + " columns");
  }
  Dataset data;
  data.A.resize(static_cast<Index>(rows.size()), w - 1);
  data.b.resize(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    Index col = 0;
    for (int j = 0; j < w; ++j) {
      if (j == label) {
        data.b(static_cast<Index>(i)) = rows[i][static_cast<std::size_t>(j)];
      } else {
        data.A(static_cast<Index>(i), col++) = rows[i][static_cast<std::size_t>(j)];
      }
    }
  }
  return data;
}

void to_binary_labels(Dataset& data) {
  data.b = data.b.unaryExpr([](double v) { return v > 0.0 ? 1.0 : -1.0; });
}

Dataset StandardizeTransform::apply(const Dataset& data) const {
  Dataset out = data;
  out.A.rowwise() -= mean.transpose();
  out.A.array().rowwise() /= scale.transpose().array();
  return out;
}

StandardizeTransform fit_standardize(const Dataset& data) {
  if (data.samples() < 2) {
    throw Error(ErrorCode::InvalidDimensions, "standardize needs at least 2 rows");
  }
  StandardizeTransform t;
  const double m = static_cast<double>(data.samples());
  t.mean = data.A.colwise().mean().transpose();
  t.scale = Vector::Ones(data.features());
  for (Index j = 0; j < data.features(); ++j) {
    const double sd =
        std::sqrt((data.A.col(j).array() - t.mean(j)).square().sum() / m);
    if (sd >= 1e-12) t.scale(j) = sd;
  }
  return t;
}

Dataset standardize(const Dataset& data) { return fit_standardize(data).apply(data); }

void SvdGapSpec::validate() const {
  if (m < 1 || N < 1) throw Error(ErrorCode::InvalidDimensions, "m and N must be >= 1");
  if (p < 1 || p > N) throw Error(ErrorCode::InvalidDimensions, "gap position p must lie in [1, N]");
  if (!(gap > 1.0)) throw Error(ErrorCode::InvalidDimensions, "gap must be > 1");
}

Vector prescribed_singular_values(const SvdGapSpec& spec) {
  spec.validate();
  Vector all(spec.N);
  all.head(spec.p) = linspace_desc(2.0 * spec.gap, spec.gap, spec.p);
  if (spec.N > spec.p) all.tail(spec.N - spec.p) = linspace_desc(1.0, 0.1, spec.N - spec.p);
  return all.head(std::min(spec.m, spec.N));
}

Matrix svd_gap_matrix(const SvdGapSpec& spec, Rng& rng) {
  const Vector sigma = prescribed_singular_values(spec);
  const Index k = sigma.size();
  // Only the first k columns of U (or V) meet a nonzero singular value.
  Matrix u;
  Matrix v;
  if (spec.m >= spec.N) {
    u = haar_frame(spec.m, k, rng);
    v = haar_orthogonal(spec.N, rng);
  } else {
    u = haar_orthogonal(spec.m, rng);
    v = haar_frame(spec.N, k, rng);
  }
  return u * sigma.asDiagonal() * v.leftCols(k).transpose();
}

std::string_view to_string(LabelKind kind) {
  switch (kind) {
    case LabelKind::GaussianNoise: return "gaussian";
    case LabelKind::PoissonCounts: return "poisson";
    case LabelKind::LogisticSigns: return "logistic";
  }
  return "unknown";
}

LabelKind label_kind_for(ModelKind model) {
  switch (model) {
    case ModelKind::Gaussian: return LabelKind::GaussianNoise;
    case ModelKind::PoissonIdentity: return LabelKind::PoissonCounts;
    case ModelKind::Logistic: return LabelKind::LogisticSigns;
  }
  return LabelKind::GaussianNoise;
}

SyntheticLabels synth_labels(const Matrix& a, const LabelSpec& spec, Rng& rng) {
  if (!a.allFinite()) throw Error(ErrorCode::DomainError, "matrix has non-finite entries");
  if (!(spec.noise >= 0.0)) throw Error(ErrorCode::InvalidConfig, "noise must be >= 0");
  const Index m = a.rows();
  const Index n = a.cols();
  SyntheticLabels out;

  if (spec.x_true && spec.x_true->size() != n) {
    throw Error(ErrorCode::InvalidDimensions, "x_true has wrong length");
  }

  switch (spec.kind) {
    case LabelKind::GaussianNoise: {
      out.x_true = spec.x_true ? *spec.x_true : Vector(gaussian_matrix(n, 1, rng));
      out.b = a * out.x_true;
      if (spec.noise > 0.0) {
        for (Index i = 0; i < m; ++i) out.b(i) += spec.noise * rng.normal();
      }
      break;
    }
    case LabelKind::LogisticSigns: {
      out.x_true = spec.x_true ? *spec.x_true : Vector(gaussian_matrix(n, 1, rng));
      const Vector z = a * out.x_true;
      out.b.resize(m);
      for (Index i = 0; i < m; ++i) {
        const double noisy = z(i) + (spec.noise > 0.0 ? spec.noise * rng.normal() : 0.0);
        out.b(i) = noisy > 0.0 ? 1.0 : -1.0;
      }
      break;
    }
    case LabelKind::PoissonCounts: {
      if (!(spec.intensity > 0.0)) throw Error(ErrorCode::InvalidConfig, "intensity must be > 0");
      std::optional<Vector> found;
      if (spec.x_true) {
        if ((a * *spec.x_true).minCoeff() > 0.0) found = *spec.x_true;
      } else {
        for (int attempt = 0; attempt < 100 && !found; ++attempt) {
          const Vector candidate =
              Vector::Ones(n) + std::ldexp(1.0, -attempt) * gaussian_matrix(n, 1, rng);
          if ((a * candidate).minCoeff() > 0.0) found = candidate;
        }
      }
      if (!found) {
        throw Error(ErrorCode::InfeasibleSynthesis,
                    "no ground truth with a_i^T x > 0 for every row");
      }
      const Vector z0 = a * *found;
      out.x_true = *found * (spec.intensity / z0.mean());
      const Vector rate = a * out.x_true;
      out.b.resize(m);
      for (Index i = 0; i < m; ++i) {
        std::poisson_distribution<long long> draw(rate(i));
        out.b(i) = static_cast<double>(std::max<long long>(1, draw(rng)));
      }
      break;
    }
  }
  return out;
}

Index orient_rows(Matrix& a) {
  Index flipped = 0;
  for (Index i = 0; i < a.rows(); ++i) {
    if (a.row(i).sum() < 0.0) {
      a.row(i) = -a.row(i);
      ++flipped;
    }
  }
  return flipped;
}

SyntheticProblem make_synthetic(const SvdGapSpec& gap, const LabelSpec& labels) {
  SyntheticProblem out;
  Rng matrix_rng(gap.seed);
  out.data.A = svd_gap_matrix(gap, matrix_rng);
  out.singular_values = prescribed_singular_values(gap);
  if (labels.kind == LabelKind::PoissonCounts) orient_rows(out.data.A);
  Rng label_rng(labels.seed);
  SyntheticLabels synth = synth_labels(out.data.A, labels, label_rng);
  out.data.b = std::move(synth.b);
  out.x_true = std::move(synth.x_true);
  return out;
}

}  // namespace sigma
