// sigma: solve, bench and datagen front end for the sigma_opt library.

#include <Eigen/Dense>
#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sigma/baselines.hpp"
#include "sigma/data.hpp"
#include "sigma/objective.hpp"
#include "sigma/solver.hpp"
#include "sigma/trace_io.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace sigma;

namespace {

constexpr int kExitConverged = 0;
constexpr int kExitError = 1;
constexpr int kExitBudget = 2;

struct DataOptions {
  std::string model = "gaussian";
  std::string data = "synthetic";
  std::string format = "auto";  // auto | libsvm | csv
  int label_column = -1;
  std::optional<Index> features;
  bool standardize = false;
  // synthetic source
  Index m = 100;
  Index N = 50;
  std::optional<Index> p;
  double gap = 100.0;
  double noise = 0.1;
  double intensity = 100.0;
  std::optional<std::uint64_t> data_seed;
};

struct SolverOptions {
  std::string solver = "sigma";
  std::optional<Index> n;
  double mu = 0.5;
  double nu = 1e-4;
  double epsilon = 1e-8;
  double alpha = 0.25;
  double beta = 0.5;
  double zeta = 2.0;
  std::string check_mode = "always-coarse";
  std::optional<Index> rows;
  bool freeze_operator = false;
  bool record_newton = false;
  std::optional<Index> rank;
  double sgd_t = 1.0;
  double sgd_gamma = 1e-6;
  Index batch = 1;
  double xi1 = 0.0;
  double xi2 = 0.0;
  double c = 1e-2;
  std::uint64_t seed = 0;
  int max_iter = 1000;
  double max_seconds = 60.0;
};

struct LoadedProblem {
  Dataset data;
  json description;
};

void add_data_options(CLI::App* app, DataOptions& d) {
  app->add_option("--model", d.model, "gaussian | poisson | logistic")
      ->check(CLI::IsMember({"gaussian", "poisson", "logistic"}));
  app->add_option("--data", d.data, "data file path or 'synthetic'");
  app->add_option("--format", d.format, "auto | libsvm | csv")
      ->check(CLI::IsMember({"auto", "libsvm", "csv"}));
  app->add_option("--label-column", d.label_column, "CSV label column (negative counts from the end)");
  app->add_option("--features", d.features, "libsvm feature count override");
  app->add_flag("--standardize", d.standardize, "center and scale feature columns");
  app->add_option("--m", d.m, "synthetic rows");
  app->add_option("--N", d.N, "synthetic features");
  app->add_option("--p", d.p, "synthetic count of large singular values (default N/5)");
  app->add_option("--gap", d.gap, "synthetic singular value gap");
  app->add_option("--noise", d.noise, "synthetic label noise");
  app->add_option("--intensity", d.intensity, "synthetic mean Poisson rate");
  app->add_option("--data-seed", d.data_seed, "synthetic data seed (default --seed)");
}

void add_solver_options(CLI::App* app, SolverOptions& s, bool with_solver) {
  if (with_solver) {
    app->add_option("--solver", s.solver, "sigma | gd | sgd | newton | subnewton | newsamp")
        ->check(CLI::IsMember({"sigma", "gd", "sgd", "newton", "subnewton", "newsamp"}));
  }
  app->add_option("--n", s.n, "coarse dimension (default N/2)");
  app->add_option("--mu", s.mu);
  app->add_option("--nu", s.nu);
  app->add_option("--epsilon", s.epsilon);
  app->add_option("--alpha", s.alpha);
  app->add_option("--beta", s.beta);
  app->add_option("--zeta", s.zeta);
  app->add_option("--check-mode", s.check_mode,
                  "full-decrement | euclidean-proxy | nu-only | always-coarse");
  app->add_option("--rows", s.rows, "sampled data rows (sigma, subnewton, newsamp)");
  app->add_flag("--freeze-operator", s.freeze_operator, "draw the coarse operator once");
  app->add_flag("--record-newton", s.record_newton, "also record the Newton decrement");
  app->add_option("--rank", s.rank, "newsamp rank (default N/10)");
  app->add_option("--sgd-t", s.sgd_t);
  app->add_option("--sgd-gamma", s.sgd_gamma);
  app->add_option("--batch", s.batch, "sgd mini-batch size");
  app->add_option("--xi1", s.xi1, "pseudo-Huber weight");
  app->add_option("--xi2", s.xi2, "squared l2 weight");
  app->add_option("--huber-c", s.c, "pseudo-Huber smoothing");
  app->add_option("--seed", s.seed);
  app->add_option("--max-iter", s.max_iter);
  app->add_option("--max-seconds", s.max_seconds);
}

LoadedProblem load_problem(const DataOptions& d, std::uint64_t seed) {
  const ModelKind kind = parse_model_kind(d.model);
  LoadedProblem out;
  if (d.data == "synthetic") {
    SvdGapSpec gap;
    gap.m = d.m;
    gap.N = d.N;
    gap.p = d.p.value_or(std::max<Index>(1, d.N / 5));
    gap.gap = d.gap;
    gap.seed = d.data_seed.value_or(seed);
    LabelSpec labels;
    labels.kind = label_kind_for(kind);
    labels.noise = d.noise;
    labels.intensity = d.intensity;
    labels.seed = gap.seed + 1;
    SyntheticProblem syn = make_synthetic(gap, labels);
    out.data = std::move(syn.data);
    out.description = {{"source", "synthetic"},
                       {"m", gap.m},
                       {"N", gap.N},
                       {"p", gap.p},
                       {"gap", gap.gap},
                       {"labels", std::string(to_string(labels.kind))},
                       {"noise", labels.noise},
                       {"intensity", labels.intensity},
                       {"data_seed", gap.seed}};
  } else {
    const fs::path path(d.data);
    if (!fs::exists(path)) {
      throw Error(ErrorCode::IoError, "data file '" + path.string() + "' does not exist");
    }
    std::string format = d.format;
    if (format == "auto") format = path.extension() == ".csv" ? "csv" : "libsvm";
    if (format == "csv") {
      out.data = load_csv(path, d.label_column);
      if (kind == ModelKind::Logistic) to_binary_labels(out.data);
    } else {
      LibsvmOptions opts;
      opts.features = d.features;
      opts.binary_labels = kind == ModelKind::Logistic;
      out.data = load_libsvm(path, opts);
    }
    out.description = {{"source", path.string()},
                       {"format", format},
                       {"m", out.data.samples()},
                       {"N", out.data.features()}};
    if (format == "csv") out.description["label_column"] = d.label_column;
  }
  if (d.standardize) out.data = standardize(out.data);
  out.description["model"] = d.model;
  out.description["standardize"] = d.standardize;
  return out;
}

struct Run {
  SolveResult result;
  json config;
  double unscaled_grad_norm = std::nan("");
};

Run run_solver(const ObjectiveModel& model, const SolverOptions& s, const std::string& solver,
               std::uint64_t seed) {
  const Vector x0 = model.feasible_start();
  Run run;
  const Regularization& reg = model.regularization();
  json common = {{"solver", solver},
                 {"xi1", reg.xi1},
                 {"xi2", reg.xi2},
                 {"huber_c", reg.c},
                 {"seed", seed}};
  if (solver == "sigma") {
    SigmaConfig cfg;
    cfg.coarse_dim = s.n.value_or(std::max<Index>(1, model.dim() / 2));
    cfg.mu = s.mu;
    cfg.nu = s.nu;
    cfg.epsilon = s.epsilon;
    cfg.alpha = s.alpha;
    cfg.beta = s.beta;
    cfg.zeta = s.zeta;
    cfg.check_mode = parse_check_mode(s.check_mode);
    cfg.row_sample = s.rows;
    cfg.freeze_operator = s.freeze_operator;
    cfg.record_newton = s.record_newton;
    cfg.max_iter = s.max_iter;
    cfg.max_seconds = s.max_seconds;
    cfg.seed = seed;
    cfg.validate(model.dim());
    run.config = common;
    run.config.update(json{{"n", cfg.coarse_dim},
                           {"mu", cfg.mu},
                           {"nu", cfg.nu},
                           {"epsilon", cfg.epsilon},
                           {"alpha", cfg.alpha},
                           {"beta", cfg.beta},
                           {"zeta", cfg.zeta},
                           {"check_mode", std::string(to_string(cfg.check_mode))},
                           {"rows", cfg.row_sample ? json(*cfg.row_sample) : json(nullptr)},
                           {"freeze_operator", cfg.freeze_operator},
                           {"record_newton", cfg.record_newton},
                           {"max_iter", cfg.max_iter},
                           {"max_seconds", cfg.max_seconds}});
    run.result = sigma_solve(model, x0, cfg);
  } else {
    BaselineConfig cfg;
    cfg.method = parse_baseline_method(solver);
    cfg.sgd_t = s.sgd_t;
    cfg.sgd_gamma = s.sgd_gamma;
    cfg.batch = s.batch;
    cfg.rows = s.rows;
    cfg.rank = s.rank;
    cfg.alpha = s.alpha;
    cfg.beta = s.beta;
    cfg.zeta = s.zeta;
    cfg.epsilon = s.epsilon;
    cfg.max_iter = s.max_iter;
    cfg.max_seconds = s.max_seconds;
    cfg.seed = seed;
    cfg.validate(model.samples(), model.dim());
    run.config = common;
    run.config.update(json{{"epsilon", cfg.epsilon},
                           {"alpha", cfg.alpha},
                           {"beta", cfg.beta},
                           {"zeta", cfg.zeta},
                           {"max_iter", cfg.max_iter},
                           {"max_seconds", cfg.max_seconds}});
    switch (cfg.method) {
      case BaselineMethod::SGD:
        run.config.update(json{{"sgd_t", cfg.sgd_t}, {"sgd_gamma", cfg.sgd_gamma}, {"batch", cfg.batch}});
        break;
      case BaselineMethod::SubNewton:
        run.config["rows"] = *cfg.rows;
        break;
      case BaselineMethod::NewSamp:
        run.config.update(json{{"rows", *cfg.rows}, {"rank", *cfg.rank}});
        break;
      default:
        break;
    }
    run.result = baseline_solve(model, x0, cfg);
  }
  if (model.kind() == ModelKind::PoissonIdentity && model.feasible(run.result.x_final)) {
    run.unscaled_grad_norm = model.unscaled_gradient(run.result.x_final).norm();
  }
  return run;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json summarize(const Run& run, const json& data) {
  const SolveResult& r = run.result;
  json final_state = json::object();
  if (!r.trace.empty()) {
    const TraceRecord& last = r.trace.back();
    final_state = {{"f", number_or_null(last.f)},
                   {"grad_norm", number_or_null(last.grad_norm)},
                   {"lambda_hat", number_or_null(last.lambda_hat)},
                   {"lambda", last.lambda ? number_or_null(*last.lambda) : json(nullptr)},
                   {"decrement_sq", number_or_null(r.final_decrement_sq)},
                   {"elapsed_s", last.elapsed_s}};
  }
  if (std::isfinite(run.unscaled_grad_norm)) {
    final_state["grad_norm_unscaled"] = run.unscaled_grad_norm;
  }
  json out = {{"status", std::string(to_string(r.status))},
              {"iterations", r.iterations()},
              {"final", final_state},
              {"config", run.config},
              {"data", data}};
  if (!r.message.empty()) out["message"] = r.message;
  return out;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

int exit_code(SolveStatus status) {
  switch (status) {
    case SolveStatus::Converged: return kExitConverged;
    case SolveStatus::MaxIter:
    case SolveStatus::Timeout: return kExitBudget;
    case SolveStatus::Error: return kExitError;
  }
  return kExitError;
}

ObjectiveModel make_model(const DataOptions& d, const SolverOptions& s, Dataset data) {
  Regularization reg;
  reg.xi1 = s.xi1;
  reg.xi2 = s.xi2;
  reg.c = s.c;
  return ObjectiveModel(parse_model_kind(d.model), std::move(data), reg);
}

int cmd_solve(const DataOptions& d, const SolverOptions& s, const fs::path& out_dir) {
  LoadedProblem problem = load_problem(d, s.seed);
  const json description = problem.description;
  const ObjectiveModel model = make_model(d, s, std::move(problem.data));
  const Run run = run_solver(model, s, s.solver, s.seed);
  fs::create_directories(out_dir);
  write_trace_csv(out_dir / "trace.csv", run.result.trace);
  write_json(out_dir / "summary.json", summarize(run, description));
  const int code = exit_code(run.result.status);
  std::cout << s.solver << ": " << to_string(run.result.status) << " after "
            << run.result.iterations() << " iterations";
  if (!run.result.trace.empty()) {
    std::cout << ", grad_norm " << format_real(run.result.trace.back().grad_norm);
  }
  std::cout << '\n';
  if (code == kExitError) std::cerr << "error: " << run.result.message << '\n';
  return code;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

struct BenchEntry {
  std::string label;
  std::string solver;
  std::optional<double> p_fraction;
  std::string status;
  int iterations = 0;
  double f = std::nan("");
  double grad_norm = std::nan("");
  double elapsed = 0.0;
  std::string message;
};

void write_gnuplot(const fs::path& path, const std::vector<BenchEntry>& entries) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  out << "set datafile separator ','\n"
         "set logscale y\n"
         "set xlabel 'time (s)'\n"
         "set ylabel 'gradient norm'\n"
         "set key outside\n"
         "plot ";
  bool first = true;
  for (const BenchEntry& e : entries) {
    if (e.status == "Error" && e.iterations == 0) continue;
    if (!first) out << ", \\\n     ";
    out << "'" << e.label << "/trace.csv' every ::1 using 2:4 with lines title '" << e.label << "'";
    first = false;
  }
  out << '\n';
}

int cmd_bench(const DataOptions& d, const SolverOptions& s, const fs::path& out_dir,
              const std::string& solvers_text, const std::string& p_list, bool gnuplot) {
  const std::vector<std::string> solvers = split_list(solvers_text);
  if (solvers.empty()) throw Error(ErrorCode::InvalidConfig, "no solvers given");
  for (const std::string& name : solvers) {
    if (name != "sigma") parse_baseline_method(name);
  }
  std::vector<std::optional<double>> fractions;
  for (const std::string& item : split_list(p_list)) {
    const double v = std::stod(item);
    if (!(v > 0.0 && v <= 1.0)) {
      throw Error(ErrorCode::InvalidConfig, "--p-list entries must lie in (0, 1]");
    }
    fractions.emplace_back(v);
  }
  if (!fractions.empty() && d.data != "synthetic") {
    throw Error(ErrorCode::InvalidConfig, "--p-list needs synthetic data");
  }
  if (fractions.empty()) fractions.emplace_back(std::nullopt);

  fs::create_directories(out_dir);
  std::ofstream comparison(out_dir / "comparison.csv");
  if (!comparison) throw Error(ErrorCode::IoError, "cannot write comparison.csv");
  comparison << "solver,iter,elapsed_s,grad_norm,f\n";

  std::vector<BenchEntry> entries;
  json runs = json::array();
  for (const std::optional<double>& frac : fractions) {
    DataOptions dd = d;
    if (frac) dd.p = std::max<Index>(1, static_cast<Index>(std::lround(*frac * static_cast<double>(d.N))));
    std::optional<ObjectiveModel> model;
    json description;
    std::string data_error;
    try {
      LoadedProblem problem = load_problem(dd, s.seed);
      description = problem.description;
      model.emplace(make_model(dd, s, std::move(problem.data)));
    } catch (const std::exception& e) {
      data_error = e.what();
    }
    for (std::size_t i = 0; i < solvers.size(); ++i) {
      BenchEntry entry;
      entry.solver = solvers[i];
      entry.p_fraction = frac;
      entry.label = solvers[i];
      if (frac) {
        std::ostringstream tag;
        tag << "p" << *frac << "/" << solvers[i];
        entry.label = tag.str();
      }
      const std::uint64_t seed = s.seed + i;
      json summary;
      try {
        if (!model) throw Error(ErrorCode::InvalidConfig, data_error);
        const Run run = run_solver(*model, s, solvers[i], seed);
        const fs::path dir = out_dir / entry.label;
        fs::create_directories(dir);
        write_trace_csv(dir / "trace.csv", run.result.trace);
        summary = summarize(run, description);
        write_json(dir / "summary.json", summary);
        entry.status = std::string(to_string(run.result.status));
        entry.iterations = run.result.iterations();
        entry.message = run.result.message;
        if (!run.result.trace.empty()) {
          entry.f = run.result.trace.back().f;
          entry.grad_norm = run.result.trace.back().grad_norm;
          entry.elapsed = run.result.trace.back().elapsed_s;
        }
        for (const TraceRecord& r : run.result.trace) {
          // Rows from a failed evaluation carry no usable state.
          if (!(std::isfinite(r.grad_norm) && r.grad_norm > 0.0 && std::isfinite(r.f))) continue;
          char elapsed[32];
          std::snprintf(elapsed, sizeof elapsed, "%.6f", r.elapsed_s);
          comparison << entry.label << ',' << r.iter << ',' << elapsed << ','
                     << format_real(r.grad_norm) << ',' << format_real(r.f) << '\n';
        }
      } catch (const std::exception& e) {
        entry.status = "Error";
        entry.message = e.what();
        summary = {{"status", "Error"}, {"message", entry.message}};
      }
      if (entry.status == "Error") {
        std::cerr << entry.label << ": " << entry.message << '\n';
      }
      summary["label"] = entry.label;
      runs.push_back(summary);
      entries.push_back(entry);
    }
  }

  std::ofstream md(out_dir / "summary.md");
  if (!md) throw Error(ErrorCode::IoError, "cannot write summary.md");
  md << "| solver | p | status | iterations | time (s) | f | grad norm |\n"
        "|---|---|---|---|---|---|---|\n";
  for (const BenchEntry& e : entries) {
    md << "| " << e.solver << " | ";
    if (e.p_fraction) md << *e.p_fraction;
    else md << "-";
    md << " | " << e.status << " | " << e.iterations << " | " << e.elapsed << " | "
       << (std::isfinite(e.f) ? format_real(e.f) : "-") << " | "
       << (std::isfinite(e.grad_norm) ? format_real(e.grad_norm) : "-") << " |\n";
  }
  write_json(out_dir / "bench.json", runs);
  if (gnuplot) write_gnuplot(out_dir / "plot.gp", entries);

  md.close();
  std::cout << std::ifstream(out_dir / "summary.md").rdbuf();
  bool any_ok = false;
  for (const BenchEntry& e : entries) any_ok = any_ok || e.status != "Error";
  return any_ok ? kExitConverged : kExitError;
}

int cmd_datagen(const DataOptions& d, std::uint64_t seed, const fs::path& out_dir) {
  SvdGapSpec gap;
  gap.m = d.m;
  gap.N = d.N;
  gap.p = d.p.value_or(std::max<Index>(1, d.N / 5));
  gap.gap = d.gap;
  gap.seed = seed;
  gap.validate();
  LabelSpec labels;
  labels.kind = label_kind_for(parse_model_kind(d.model));
  labels.noise = d.noise;
  labels.intensity = d.intensity;
  labels.seed = seed + 1;
  const SyntheticProblem syn = make_synthetic(gap, labels);

  fs::create_directories(out_dir);
  write_libsvm(out_dir / "data.libsvm", syn.data);
  const Vector realized = Eigen::BDCSVD<Matrix>(syn.data.A).singularValues();
  json meta = {{"m", gap.m},
               {"N", gap.N},
               {"p", gap.p},
               {"gap", gap.gap},
               {"seed", gap.seed},
               {"labels", std::string(to_string(labels.kind))},
               {"noise", labels.noise},
               {"intensity", labels.intensity},
               {"prescribed_singular_values", std::vector<double>(syn.singular_values.begin(), syn.singular_values.end())},
               {"singular_values", std::vector<double>(realized.begin(), realized.end())},
               {"x_true", std::vector<double>(syn.x_true.begin(), syn.x_true.end())}};
  write_json(out_dir / "meta.json", meta);
  std::cout << "wrote " << (out_dir / "data.libsvm").string() << " (" << gap.m << " x " << gap.N
            << ")\n";
  return kExitConverged;
}

void apply_thread_cap() {
  const char* env = std::getenv("SIGMA_OPT_THREADS");
  if (env == nullptr) return;
  const int threads = std::atoi(env);
  if (threads > 0) Eigen::setNbThreads(threads);
}

}  // namespace

int main(int argc, char** argv) {
  apply_thread_cap();

  CLI::App app{"SIGMA: multilevel randomized Newton method and baselines"};
  app.require_subcommand(1);
  // A repeated flag overrides the earlier occurrence.
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_config("--config", "", "TOML config file with [solve], [bench] or [datagen] sections");

  DataOptions solve_data;
  SolverOptions solve_opts;
  std::string solve_out = "out";
  CLI::App* solve = app.add_subcommand("solve", "run one solver and write trace.csv and summary.json");
  add_data_options(solve, solve_data);
  add_solver_options(solve, solve_opts, true);
  solve->add_option("--out", solve_out, "output directory");

  DataOptions bench_data;
  SolverOptions bench_opts;
  std::string bench_out = "bench";
  std::string bench_solvers = "sigma,gd,newton";
  std::string p_list;
  bool gnuplot = false;
  CLI::App* bench = app.add_subcommand("bench", "compare several solvers on one dataset");
  add_data_options(bench, bench_data);
  add_solver_options(bench, bench_opts, false);
  bench->add_option("--solvers", bench_solvers, "comma separated solver list");
  bench->add_option("--p-list", p_list, "comma separated fractions of N for a p sweep");
  bench->add_flag("--gnuplot", gnuplot, "write plot.gp for comparison traces");
  bench->add_option("--out", bench_out, "output directory");

  DataOptions gen_data;
  std::uint64_t gen_seed = 0;
  std::string gen_out = "data";
  CLI::App* datagen = app.add_subcommand("datagen", "write a synthetic SVD-gap dataset");
  gen_data.model = "gaussian";
  datagen->add_option("--labels", gen_data.model, "gaussian | poisson | logistic")
      ->check(CLI::IsMember({"gaussian", "poisson", "logistic"}));
  datagen->add_option("--m", gen_data.m);
  datagen->add_option("--N", gen_data.N);
  datagen->add_option("--p", gen_data.p);
  datagen->add_option("--gap", gen_data.gap);
  datagen->add_option("--noise", gen_data.noise);
  datagen->add_option("--intensity", gen_data.intensity);
  datagen->add_option("--seed", gen_seed);
  datagen->add_option("--out", gen_out, "output directory");

  // "--config" is accepted after the subcommand name as well.
  std::vector<std::string> args(argv + 1, argv + argc);
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      std::rotate(args.begin(), args.begin() + static_cast<std::ptrdiff_t>(i),
                  args.begin() + static_cast<std::ptrdiff_t>(i + 2));
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      std::rotate(args.begin(), args.begin() + static_cast<std::ptrdiff_t>(i),
                  args.begin() + static_cast<std::ptrdiff_t>(i + 1));
      break;
    }
  }
  std::reverse(args.begin(), args.end());

  try {
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitError;
  }

  try {
    if (solve->parsed()) return cmd_solve(solve_data, solve_opts, solve_out);
    if (bench->parsed()) {
      return cmd_bench(bench_data, bench_opts, bench_out, bench_solvers, p_list, gnuplot);
    }
    if (datagen->parsed()) return cmd_datagen(gen_data, gen_seed, gen_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
