#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "sigma/data.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

fs::path scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("sigma_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

struct Outcome {
  int code = -1;
  std::string err;
};

Outcome run(const std::string& args) {
  const fs::path err = scratch() / "stderr.txt";
  const std::string cmd = std::string(SIGMA_CLI_PATH) + " " + args + " >/dev/null 2>" + err.string();
  const int status = std::system(cmd.c_str());
  Outcome out;
  out.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(err);
  std::stringstream ss;
  ss << in.rdbuf();
  out.err = ss.str();
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

std::string without_column(const fs::path& p, std::size_t col) {
  std::string out;
  for (const auto& row : read_csv(p)) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i != col) out += row[i] + ",";
    }
    out += "\n";
  }
  return out;
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

const std::string kSolve = "solve --model gaussian --data synthetic --m 100 --N 50 --p 10 --n 25 --seed 1";

}  // namespace

TEST_CASE("solve writes a trace and summary") {
  const fs::path out = scratch() / "solve1";
  const Outcome r = run(kSolve + " --out " + out.string());
  CHECK(r.code == 0);
  const auto rows = read_csv(out / "trace.csv");
  REQUIRE(rows.size() >= 2);
  std::string header;
  for (std::size_t i = 0; i < rows[0].size(); ++i) header += (i ? "," : "") + rows[0][i];
  CHECK(header == "iter,elapsed_s,f,grad_norm,lambda_hat,lambda,step,direction,backtracks");

  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const double f = std::stod(rows[k][2]);
    CHECK(f <= prev);
    prev = f;
  }

  const json summary = read_json(out / "summary.json");
  CHECK(summary["status"] == "Converged");
  CHECK(summary["iterations"].get<int>() + 2 == static_cast<int>(rows.size()));
  const json& cfg = summary["config"];
  for (const char* key : {"solver", "n", "mu", "nu", "epsilon", "alpha", "beta", "zeta", "check_mode",
                          "rows", "max_iter", "max_seconds", "seed", "xi1", "xi2"}) {
    CHECK_MESSAGE(cfg.contains(key), key);
  }
  CHECK(cfg["n"] == 25);
  CHECK(summary["data"]["p"] == 10);
  CHECK(summary["final"]["decrement_sq"].get<double>() <= cfg["epsilon"].get<double>());
}

TEST_CASE("solve is deterministic apart from timing") {
  const fs::path a = scratch() / "det_a";
  const fs::path b = scratch() / "det_b";
  REQUIRE(run(kSolve + " --out " + a.string()).code == 0);
  REQUIRE(run(kSolve + " --out " + b.string()).code == 0);
  CHECK(without_column(a / "trace.csv", 1) == without_column(b / "trace.csv", 1));
}

TEST_CASE("solve exit codes") {
  const Outcome missing = run("solve --data /nonexistent/input.svm --out " + (scratch() / "x").string());
  CHECK(missing.code == 1);
  CHECK(missing.err.find("/nonexistent/input.svm") != std::string::npos);

  const Outcome budget = run(kSolve + " --n 1 --max-iter 2 --out " + (scratch() / "budget").string());
  CHECK(budget.code == 2);
  CHECK(read_json(scratch() / "budget" / "summary.json")["status"] == "MaxIter");

  CHECK(run("solve --alpha 0.7 --out " + (scratch() / "bad").string()).code == 1);
  CHECK(run("solve --model probit").code == 1);
  CHECK(run("frobnicate").code == 1);
}

TEST_CASE("solve reads a config file and flags override it") {
  const fs::path cfg = scratch() / "run.toml";
  std::ofstream(cfg) << "[solve]\nmodel = \"logistic\"\nm = 80\nN = 20\nsolver = \"newton\"\nmax-iter = 50\n";
  const fs::path out = scratch() / "cfg";
  CHECK(run("solve --config " + cfg.string() + " --seed 4 --max-iter 40 --out " + out.string()).code == 0);
  const json s = read_json(out / "summary.json");
  CHECK(s["config"]["solver"] == "newton");
  CHECK(s["config"]["max_iter"] == 40);
  CHECK(s["config"]["seed"] == 4);
  CHECK(s["data"]["model"] == "logistic");
  CHECK(s["data"]["m"] == 80);
}

TEST_CASE("solve on files and with every solver") {
  sigma::Dataset d;
  sigma::Rng rng(3);
  d.A = sigma::gaussian_matrix(40, 6, rng);
  d.b = d.A * sigma::Vector::Ones(6);
  const fs::path file = scratch() / "lin.svm";
  sigma::write_libsvm(file, d);
  for (const char* solver : {"sigma", "gd", "newton", "subnewton", "newsamp"}) {
    const fs::path out = scratch() / (std::string("file_") + solver);
    const Outcome r = run(std::string("solve --data ") + file.string() + " --solver " + solver +
                          " --rank 2 --max-iter 3000 --out " + out.string());
    CAPTURE(solver);
    CHECK(r.code == 0);
    CHECK(read_json(out / "summary.json")["data"]["N"] == 6);
  }
  const fs::path pois = scratch() / "pois";
  CHECK(run("solve --model poisson --m 200 --N 50 --seed 2 --out " + pois.string()).code == 0);
  CHECK(read_json(pois / "summary.json")["final"].contains("grad_norm_unscaled"));
}

TEST_CASE("bench compares solvers") {
  const fs::path out = scratch() / "bench";
  const Outcome r = run("bench --m 50 --N 30 --p 6 --solvers sigma,gd,newton --seed 2 --gnuplot --out " +
                        out.string());
  CHECK(r.code == 0);
  const auto rows = read_csv(out / "comparison.csv");
  REQUIRE(!rows.empty());
  CHECK(rows[0] == std::vector<std::string>{"solver", "iter", "elapsed_s", "grad_norm", "f"});
  std::map<std::string, int> groups;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    ++groups[rows[k][0]];
    const double g = std::stod(rows[k][3]);
    CHECK(std::isfinite(g));
    CHECK(g > 0.0);
  }
  CHECK(groups.size() == 3);
  for (const char* s : {"sigma", "gd", "newton"}) {
    CHECK(fs::exists(out / s / "trace.csv"));
    CHECK(fs::exists(out / s / "summary.json"));
  }
  CHECK(fs::exists(out / "summary.md"));
  CHECK(slurp(out / "plot.gp").find("sigma/trace.csv") != std::string::npos);
  // Seeds are derived from the base seed and the solver position.
  CHECK(read_json(out / "gd" / "summary.json")["config"]["seed"] == 3);
}

TEST_CASE("bench respects the time budget") {
  const fs::path out = scratch() / "budget_bench";
  run("bench --m 400 --N 300 --solvers sigma,gd,newton --n 2 --epsilon 1e-30 --max-iter 1000000 "
      "--max-seconds 1 --out " + out.string());
  for (const char* s : {"sigma", "gd", "newton"}) {
    const auto rows = read_csv(out / s / "trace.csv");
    REQUIRE(rows.size() >= 2);
    CHECK(std::stod(rows.back()[1]) <= 1.2);
  }
}

TEST_CASE("bench p sweep and failures") {
  const fs::path out = scratch() / "sweep";
  CHECK(run("bench --model poisson --m 100 --N 40 --p-list 0.2,0.8 --solvers sigma,gd --max-iter 50 "
            "--out " + out.string()).code == 0);
  for (const char* p : {"p0.2", "p0.8"}) {
    CHECK(fs::exists(out / p / "sigma" / "trace.csv"));
    CHECK(fs::exists(out / p / "gd" / "trace.csv"));
  }
  CHECK(read_json(out / "p0.8" / "sigma" / "summary.json")["data"]["p"] == 32);

  // One failing entry is recorded, the rest still run.
  const fs::path mixed = scratch() / "mixed";
  CHECK(run("bench --m 30 --N 10 --solvers sigma,newsamp --rank 10 --out " + mixed.string()).code == 0);
  CHECK(read_json(mixed / "bench.json")[1]["status"] == "Error");
  CHECK(slurp(mixed / "summary.md").find("newsamp") != std::string::npos);

  CHECK(run("bench --m 30 --N 10 --solvers newsamp --rank 10 --out " + (scratch() / "fail").string()).code != 0);
}

TEST_CASE("datagen") {
  const fs::path a = scratch() / "gen_a";
  const fs::path b = scratch() / "gen_b";
  const std::string args = "datagen --m 200 --N 100 --p 20 --gap 100 --labels poisson --seed 3 --out ";
  REQUIRE(run(args + a.string()).code == 0);
  REQUIRE(run(args + b.string()).code == 0);
  CHECK(slurp(a / "data.libsvm") == slurp(b / "data.libsvm"));
  CHECK(slurp(a / "meta.json") == slurp(b / "meta.json"));

  sigma::LibsvmOptions opts;
  opts.features = 100;
  const sigma::Dataset d = sigma::load_libsvm(a / "data.libsvm", opts);
  CHECK(d.samples() == 200);
  CHECK(d.b.minCoeff() >= 1.0);

  const json meta = read_json(a / "meta.json");
  for (const char* key : {"m", "N", "p", "gap", "seed"}) CHECK(meta.contains(key));
  const auto sv = meta["singular_values"].get<std::vector<double>>();
  const sigma::Vector recomputed = Eigen::JacobiSVD<sigma::Matrix>(d.A).singularValues();
  REQUIRE(static_cast<sigma::Index>(sv.size()) == recomputed.size());
  for (std::size_t i = 0; i < sv.size(); ++i) {
    CHECK(std::abs(sv[i] - recomputed(static_cast<sigma::Index>(i))) <= 1e-5 * std::max(1.0, sv[i]));
  }

  CHECK(run("datagen --m 10 --N 5 --p 9 --out " + (scratch() / "bad").string()).code == 1);
  CHECK(run("datagen --m 10 --N 5 --gap 0.5 --out " + (scratch() / "bad").string()).code == 1);
}
