#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <tuple>

#include <unistd.h>

#include "sigma/data.hpp"
#include "test_support.hpp"

using namespace sigma;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("sigma_data_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

fs::path write_file(const std::string& name, const std::string& text) {
  const fs::path p = scratch_dir() / name;
  std::ofstream(p) << text;
  return p;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("load_libsvm examples") {
  LibsvmOptions opts;
  opts.features = 3;
  const Dataset d = load_libsvm(write_file("a.svm", "1 1:0.5 3:-2\n"), opts);
  REQUIRE(d.samples() == 1);
  REQUIRE(d.features() == 3);
  CHECK(d.b(0) == 1.0);
  CHECK(d.A(0, 0) == 0.5);
  CHECK(d.A(0, 1) == 0.0);
  CHECK(d.A(0, 2) == -2.0);

  LibsvmOptions binary;
  binary.features = 2;
  binary.binary_labels = true;
  const Dataset z = load_libsvm(write_file("b.svm", "0\n1 2:1\n"), binary);
  CHECK(z.A.row(0).isZero(0.0));
  CHECK(z.b(0) == -1.0);
  CHECK(z.b(1) == 1.0);

  const Dataset inferred = load_libsvm(write_file("c.svm", "2 4:1\n\n3 1:1 2:2\n"));
  CHECK(inferred.features() == 4);
  CHECK(inferred.samples() == 2);
}

TEST_CASE("load_libsvm errors") {
  const fs::path bad = write_file("bad.svm", "1 a:b\n");
  try {
    load_libsvm(bad);
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(std::string(e.what()).find("line 1") != std::string::npos);
  }
  CHECK(code_of([&] { load_libsvm(write_file("order.svm", "1 1:1\n1 3:1 2:1\n")); }) ==
        ErrorCode::IndexError);
  CHECK(code_of([&] { load_libsvm(write_file("zero.svm", "1 0:1\n")); }) == ErrorCode::IndexError);
  LibsvmOptions narrow;
  narrow.features = 2;
  CHECK(code_of([&] { load_libsvm(write_file("wide.svm", "1 3:1\n"), narrow); }) ==
        ErrorCode::IndexError);
  CHECK(code_of([&] { load_libsvm(scratch_dir() / "missing.svm"); }) == ErrorCode::IoError);
}

TEST_CASE("libsvm round trip") {
  Rng rng(1);
  Dataset d;
  d.A = gaussian_matrix(7, 5, rng);
  d.A(2, 3) = 0.0;
  d.A.col(4).setZero();
  d.b = testing::random_vector(7, rng);
  const fs::path p = scratch_dir() / "round.svm";
  write_libsvm(p, d);
  LibsvmOptions opts;
  opts.features = 5;
  const Dataset back = load_libsvm(p, opts);
  CHECK(back.A == d.A);
  CHECK(back.b == d.b);
}

TEST_CASE("load_csv") {
  const Dataset d = load_csv(write_file("a.csv", "0.5,-2,1\n"));
  REQUIRE(d.features() == 2);
  CHECK(d.A(0, 0) == 0.5);
  CHECK(d.A(0, 1) == -2.0);
  CHECK(d.b(0) == 1.0);

  const Dataset h = load_csv(write_file("h.csv", "y,x1,x2\n1,2,3\n4,5,6\n"), 0);
  CHECK(h.samples() == 2);
  CHECK(h.b(1) == 4.0);
  CHECK(h.A(1, 1) == 6.0);

  CHECK(code_of([&] { load_csv(write_file("r.csv", "1,2,3\n4,5\n")); }) == ErrorCode::RaggedRows);
  CHECK(code_of([&] { load_csv(write_file("p.csv", "1,2\n3,x\n")); }) == ErrorCode::ParseError);
}

TEST_CASE("standardize") {
  Dataset d;
  d.A.resize(2, 2);
  d.A << 0, 5, 2, 5;
  d.b = Vector::Zero(2);
  const Dataset s = standardize(d);
  CHECK(s.A(0, 0) == doctest::Approx(-1.0));
  CHECK(s.A(1, 0) == doctest::Approx(1.0));
  CHECK(s.A.col(1).isZero(0.0));

  Rng rng(2);
  Dataset r;
  r.A = gaussian_matrix(30, 4, rng);
  r.b = Vector::Zero(30);
  const Dataset once = standardize(r);
  CHECK((standardize(once).A - once.A).cwiseAbs().maxCoeff() <= 1e-12);
  const StandardizeTransform t = fit_standardize(r);
  CHECK((t.apply(r).A - once.A).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("to_binary_labels") {
  Dataset d;
  d.A = Matrix::Zero(3, 1);
  d.b.resize(3);
  d.b << 0, 1, -1;
  to_binary_labels(d);
  CHECK(d.b(0) == -1.0);
  CHECK(d.b(1) == 1.0);
  CHECK(d.b(2) == -1.0);
}

TEST_CASE("prescribed singular values") {
  SvdGapSpec spec{6, 4, 2, 100.0, 0};
  const Vector s = prescribed_singular_values(spec);
  REQUIRE(s.size() == 4);
  CHECK(s(0) == doctest::Approx(200.0));
  CHECK(s(1) == doctest::Approx(100.0));
  CHECK(s(2) == doctest::Approx(1.0));
  CHECK(s(3) == doctest::Approx(0.1));

  spec.p = 4;
  const Vector all_top = prescribed_singular_values(spec);
  CHECK(all_top.minCoeff() >= 100.0);
  CHECK(all_top.maxCoeff() <= 200.0);

  spec.gap = 1.0;
  CHECK_THROWS_AS(spec.validate(), Error);
  spec = SvdGapSpec{6, 4, 5, 100.0, 0};
  CHECK_THROWS_AS(spec.validate(), Error);
}

TEST_CASE("svd_gap_matrix realizes the prescription") {
  for (auto [m, n, p] : {std::tuple<Index, Index, Index>{12, 4, 2}, {30, 20, 5}, {8, 15, 3}}) {
    const SvdGapSpec spec{m, n, p, 100.0, 5};
    Rng rng(spec.seed);
    const Matrix a = svd_gap_matrix(spec, rng);
    CHECK(a.rows() == m);
    CHECK(a.cols() == n);
    const Vector want = prescribed_singular_values(spec);
    const Vector got = Eigen::JacobiSVD<Matrix>(a).singularValues();
    for (Index i = 0; i < want.size(); ++i) CHECK(testing::rel_diff(got(i), want(i)) <= 1e-6);
    if (m >= n) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(a.transpose() * a);
      const Vector ev = es.eigenvalues().reverse();
      for (Index i = 0; i < n; ++i) CHECK(testing::rel_diff(ev(i), want(i) * want(i)) <= 1e-6);
    }
  }
  Rng a(3), b(3);
  const SvdGapSpec spec{10, 5, 2, 100.0, 3};
  CHECK(svd_gap_matrix(spec, a) == svd_gap_matrix(spec, b));
}

TEST_CASE("synthetic labels") {
  Rng rng(4);
  const SvdGapSpec gap{40, 10, 2, 100.0, 4};
  const Matrix a = svd_gap_matrix(gap, rng);

  LabelSpec gauss;
  const SyntheticLabels g = synth_labels(a, gauss, rng);
  CHECK((g.b - a * g.x_true).norm() == 0.0);
  const Vector recovered = a.colPivHouseholderQr().solve(g.b);
  CHECK((recovered - g.x_true).norm() <= 1e-8 * g.x_true.norm());

  LabelSpec logistic;
  logistic.kind = LabelKind::LogisticSigns;
  const SyntheticLabels l = synth_labels(a, logistic, rng);
  CHECK(((l.b.array() == 1.0) || (l.b.array() == -1.0)).all());

  Matrix oriented = a;
  orient_rows(oriented);
  CHECK((Eigen::JacobiSVD<Matrix>(oriented).singularValues() -
         Eigen::JacobiSVD<Matrix>(a).singularValues())
            .norm() <= 1e-10);
  LabelSpec pois;
  pois.kind = LabelKind::PoissonCounts;
  pois.intensity = 20.0;
  Rng p1(9), p2(9);
  const SyntheticLabels c = synth_labels(oriented, pois, p1);
  CHECK((oriented * c.x_true).minCoeff() > 0.0);
  CHECK((oriented * c.x_true).mean() == doctest::Approx(20.0));
  for (Index i = 0; i < c.b.size(); ++i) {
    CHECK(c.b(i) >= 1.0);
    CHECK(c.b(i) == std::floor(c.b(i)));
  }
  CHECK(synth_labels(oriented, pois, p2).b == c.b);

  // A zero row admits no positive margin.
  Matrix dead = oriented;
  dead.row(0).setZero();
  Rng p3(1);
  CHECK(code_of([&] { synth_labels(dead, pois, p3); }) == ErrorCode::InfeasibleSynthesis);
}

TEST_CASE("make_synthetic is reproducible") {
  const SvdGapSpec gap{50, 20, 4, 100.0, 7};
  LabelSpec labels;
  labels.kind = LabelKind::PoissonCounts;
  labels.seed = 8;
  const SyntheticProblem a = make_synthetic(gap, labels);
  const SyntheticProblem b = make_synthetic(gap, labels);
  CHECK(a.data.A == b.data.A);
  CHECK(a.data.b == b.data.b);
  CHECK((a.data.A * a.x_true).minCoeff() > 0.0);
  const ObjectiveModel model(ModelKind::PoissonIdentity, a.data);
  CHECK(model.feasible(model.feasible_start()));
}
