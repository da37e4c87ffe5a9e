#include "kdelinalg/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "kdelinalg/errors.hpp"
#include "kdelinalg/io.hpp"
#include "kdelinalg/kernelsum.hpp"
#include "kdelinalg/linalg.hpp"
#include "kdelinalg/rng.hpp"
#include "kdelinalg/spectral.hpp"

namespace kdelinalg {

using json = nlohmann::json;

std::string_view to_string(Command c) {
  switch (c) {
    case Command::Mvp: return "mvp";
    case Command::Matmul: return "matmul";
    case Command::Quadform: return "quadform";
    case Command::Topeig: return "topeig";
    case Command::Sum: return "sum";
    case Command::Estimator: return "estimator";
    case Command::Gen: return "gen";
    case Command::Adversary: return "adversary";
  }
  return "unknown";
}

Command parse_command(std::string_view name) {
  for (Command c : {Command::Mvp, Command::Matmul, Command::Quadform, Command::Topeig, Command::Sum,
                    Command::Estimator, Command::Gen, Command::Adversary})
    if (to_string(c) == name) return c;
  throw ArgumentError("unknown command: " + std::string(name));
}

void ExperimentConfig::validate() const {
  kernel.validate();
  if (!(eps > 0.0 && eps < 1.0)) throw ArgumentError("eps must lie in (0,1)");
  if (trials < 1) throw ArgumentError("trials must be >= 1");
  if (input_path && gen_spec) throw ArgumentError("--input and --gen are mutually exclusive");
  if (vector != "random" && vector != "ones" && vector != "e1")
    throw ArgumentError("vector must be random, ones or e1");
  if (command == Command::Matmul && cols < 1) throw ArgumentError("cols must be >= 1");
  if (q < 0.0 || q > 1.0) throw ArgumentError("q must lie in (0,1]");
  if (command == Command::Adversary && mode != "stagnation" && mode != "iteration-lb" && mode != "signed")
    throw ArgumentError("adversary mode must be stagnation, iteration-lb or signed");
  if (delta && !(*delta > 0.0)) throw ArgumentError("delta must be positive");
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

struct Trial {
  double estimate = 0.0;
  std::optional<double> oracle;
  std::optional<double> rel;
  std::optional<bool> pass;
  double wall_ms = 0.0;
  double work = 0.0;
  std::size_t evals = 0;
  json details = json::object();
};

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> median(std::vector<double> v) {
  if (v.empty()) return std::nullopt;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

PointSet load_dataset(const ExperimentConfig& cfg) {
  if (cfg.input_path) return read_points_file(*cfg.input_path);
  if (cfg.gen_spec) return generate(parse_generator_spec(*cfg.gen_spec), cfg.seed);
  throw ArgumentError("a dataset is required: pass --input PATH or --gen SPEC");
}

Eigen::VectorXd make_vector(const std::string& kind, std::size_t n, std::uint64_t seed) {
  const auto len = static_cast<Eigen::Index>(n);
  if (kind == "ones") return Eigen::VectorXd::Ones(len);
  if (kind == "e1") return Eigen::VectorXd::Unit(len, 0);
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd v(len);
  for (auto& x : v) x = u(gen);
  return v;
}

void require_cap(std::size_t n) {
  const std::size_t cap = default_oracle_cap();
  if (n > cap)
    throw CapacityError("oracle requested for n=" + std::to_string(n) + " above cap " + std::to_string(cap));
}

json kernel_json(const KernelSpec& k) {
  return {{"family", to_string(k.family)}, {"bandwidth_scale", k.bandwidth_scale}, {"rq_beta", k.rq_beta}};
}

json config_json(const ExperimentConfig& c) {
  const auto s = [](const std::optional<std::string>& v) { return v ? json(*v) : json(nullptr); };
  return {{"command", to_string(c.command)},
          {"kernel", kernel_json(c.kernel)},
          {"eps", c.eps},
          {"backend", to_string(c.backend)},
          {"seed", c.seed},
          {"trials", c.trials},
          {"input", s(c.input_path)},
          {"gen", s(c.gen_spec)},
          {"oracle", c.oracle},
          {"strict", c.strict},
          {"out", s(c.output_path)},
          {"vector", c.vector},
          {"cols", c.cols},
          {"q", c.q},
          {"median", c.median},
          {"mode", c.mode},
          {"n", c.n},
          {"delta", opt(c.delta)},
          {"points", s(c.points_path)}};
}

// Runs `body` once per trial with a derived seed, timing each call.
std::vector<Trial> run_trials(const ExperimentConfig& cfg, const std::function<Trial(std::uint64_t)>& body) {
  std::vector<Trial> out;
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    const auto t0 = Clock::now();
    Trial tr = body(derive_seed(cfg.seed, t));
    tr.wall_ms = ms_since(t0);
    out.push_back(std::move(tr));
  }
  return out;
}

void grade_relative(Trial& tr, double truth, double err_norm, double tol) {
  tr.oracle = truth;
  tr.rel = truth != 0.0 ? std::abs(err_norm) / std::abs(truth) : std::abs(err_norm);
  tr.pass = *tr.rel <= tol;
}

std::vector<Trial> run_mvp(const ExperimentConfig& cfg, const PointSet& X, double& oracle_ms) {
  const std::size_t n = X.n();
  const Eigen::VectorXd y = make_vector(cfg.vector, n, derive_seed(cfg.seed, 0x7965));
  std::optional<Eigen::VectorXd> ky;
  if (cfg.oracle) {
    require_cap(n);
    const auto t0 = Clock::now();
    ky = exact_matvec(cfg.kernel, X, y);
    oracle_ms = ms_since(t0);
  }
  return run_trials(cfg, [&](std::uint64_t seed) {
    const MvpResult r = nonneg_mvp(cfg.kernel, X, y, cfg.eps, {cfg.backend, seed});
    Trial tr;
    tr.estimate = r.z.norm();
    tr.work = r.total_work;
    tr.evals = r.kernel_evals;
    tr.details = {{"buckets", r.buckets.size()}, {"bucket_count", r.bucket_count},
                  {"internal_eps", r.internal_eps}, {"dropped", r.dropped},
                  {"min_slack", nullptr}, {"sandwich_c", nullptr}};
    if (ky) {
      const Eigen::VectorXd diff = r.z - *ky;
      const double min_slack = diff.minCoeff();
      grade_relative(tr, ky->norm(), diff.norm(), cfg.eps);
      const double scale = std::max(1.0, ky->cwiseAbs().maxCoeff());
      tr.pass = *tr.pass && min_slack >= -1e-12 * scale;
      // Per-coordinate sandwich for the unit-norm input: z <= (1+eps) Ky + c eps / sqrt(n).
      const double root = std::sqrt(static_cast<double>(n));
      const double c = ((r.z - (1.0 + cfg.eps) * *ky) / y.norm()).maxCoeff() * root / cfg.eps;
      tr.details["min_slack"] = min_slack;
      tr.details["sandwich_c"] = std::max(0.0, c);
    }
    return tr;
  });
}

std::vector<Trial> run_matmul(const ExperimentConfig& cfg, const PointSet& X, double& oracle_ms) {
  const std::size_t n = X.n();
  Eigen::MatrixXd A(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cfg.cols));
  for (Eigen::Index c = 0; c < A.cols(); ++c)
    A.col(c) = make_vector("random", n, derive_seed(cfg.seed, 0x6d6d, static_cast<std::uint64_t>(c)));
  std::optional<Eigen::MatrixXd> ka;
  if (cfg.oracle) {
    require_cap(n);
    const auto t0 = Clock::now();
    ka = Eigen::MatrixXd(A.rows(), A.cols());
    for (Eigen::Index c = 0; c < A.cols(); ++c) ka->col(c) = exact_matvec(cfg.kernel, X, A.col(c));
    oracle_ms = ms_since(t0);
  }
  return run_trials(cfg, [&](std::uint64_t seed) {
    const MatmulResult r = kernel_matmul(cfg.kernel, X, A, cfg.eps, {cfg.backend, seed});
    Trial tr;
    tr.estimate = r.B.norm();
    tr.work = r.total_work;
    tr.evals = r.kernel_evals;
    tr.details = {{"min_slack", nullptr}};
    if (ka) {
      const Eigen::MatrixXd diff = r.B - *ka;
      grade_relative(tr, ka->norm(), diff.norm(), cfg.eps);
      const double scale = std::max(1.0, ka->cwiseAbs().maxCoeff());
      tr.pass = *tr.pass && diff.minCoeff() >= -1e-12 * scale;
      tr.details["min_slack"] = diff.minCoeff();
    }
    return tr;
  });
}

std::vector<Trial> run_quadform(const ExperimentConfig& cfg, const PointSet& X, double& oracle_ms) {
  const Eigen::VectorXd v = make_vector(cfg.vector, X.n(), derive_seed(cfg.seed, 0x7166));
  std::optional<double> truth;
  if (cfg.oracle) {
    require_cap(X.n());
    const auto t0 = Clock::now();
    truth = v.dot(exact_matvec(cfg.kernel, X, v));
    oracle_ms = ms_since(t0);
  }
  return run_trials(cfg, [&](std::uint64_t seed) {
    const QuadformResult r = quadform(cfg.kernel, X, v, cfg.eps, {cfg.backend, seed});
    Trial tr;
    tr.estimate = r.value;
    tr.work = r.total_work;
    tr.evals = r.kernel_evals;
    if (truth) {
      grade_relative(tr, *truth, r.value - *truth, 10.0 * cfg.eps);
      tr.pass = r.value >= *truth * (1.0 - 1e-12) && r.value <= (1.0 + 10.0 * cfg.eps) * *truth;
    }
    return tr;
  });
}

std::vector<Trial> run_topeig(const ExperimentConfig& cfg, const PointSet& X, double& oracle_ms) {
  std::optional<double> lambda1;
  if (cfg.oracle) {
    require_cap(X.n());
    const auto t0 = Clock::now();
    lambda1 = exact_top_eig(cfg.kernel, X).value;
    oracle_ms = ms_since(t0);
  }
  return run_trials(cfg, [&](std::uint64_t seed) {
    const EigenPair r = top_eigenpair(cfg.kernel, X, cfg.eps, {cfg.backend, seed});
    Trial tr;
    tr.estimate = r.lambda;
    tr.work = r.total_work;
    tr.evals = r.kernel_evals;
    tr.details = {{"iterations", r.iterations}, {"best_step", r.best_step}, {"rayleigh", nullptr},
                  {"rayleigh_ratio", nullptr}};
    if (lambda1) {
      const double l1 = *lambda1;
      const double uku = r.u.dot(exact_matvec(cfg.kernel, X, r.u));
      grade_relative(tr, l1, r.lambda - l1, cfg.eps / 2.0);
      tr.pass = uku >= (1.0 - 5.0 * cfg.eps / 8.0) * l1 && r.lambda <= (1.0 + cfg.eps / 8.0) * l1 &&
                r.lambda >= (1.0 - cfg.eps / 2.0) * l1;
      tr.details["rayleigh"] = uku;
      tr.details["rayleigh_ratio"] = uku / l1;
    }
    return tr;
  });
}

std::optional<double> sum_oracle(const ExperimentConfig& cfg, const PointSet& X, double& oracle_ms) {
  if (!cfg.oracle) return std::nullopt;
  require_cap(X.n());
  const auto t0 = Clock::now();
  const double s = exact_sum(cfg.kernel, X);
  oracle_ms = ms_since(t0);
  return s;
}

std::vector<Trial> run_sum(const ExperimentConfig& cfg, const PointSet& X, double& oracle_ms) {
  const std::optional<double> truth = sum_oracle(cfg, X, oracle_ms);
  KernelSumOptions opts;
  opts.backend = cfg.backend;
  return run_trials(cfg, [&](std::uint64_t seed) {
    Trial tr;
    if (cfg.median) {
      const MedianSumEstimate r = kernel_sum_median(cfg.kernel, X, cfg.eps, seed, 0, opts);
      tr.estimate = r.value;
      tr.work = r.total_work;
      tr.evals = r.kernel_evals;
      tr.details = {{"runs", r.trials.size()}};
    } else {
      const SumEstimate r = kernel_sum(cfg.kernel, X, cfg.eps, seed, opts);
      tr.estimate = r.value;
      tr.work = r.total_work;
      tr.evals = r.kernel_evals;
      tr.details = {{"m", r.m}, {"heavy_count", r.heavy_count}, {"mprime", r.mprime}, {"q1", r.q1},
                    {"q2", r.q2}, {"tau", r.tau}, {"mu", r.mu}, {"mu_prime", r.mu_prime}};
    }
    if (truth) grade_relative(tr, *truth, tr.estimate - *truth, cfg.eps);
    return tr;
  });
}

std::vector<Trial> run_estimator(const ExperimentConfig& cfg, const PointSet& X, double& oracle_ms) {
  const std::optional<double> truth = sum_oracle(cfg, X, oracle_ms);
  const double q = cfg.q > 0.0 ? cfg.q : level_one_rate(X.n(), cfg.eps);
  return run_trials(cfg, [&](std::uint64_t seed) {
    Trial tr;
    tr.estimate = submatrix_sum_estimator(cfg.kernel, X, q, seed);
    tr.details = {{"q", q}};
    if (truth) grade_relative(tr, *truth, tr.estimate - *truth, cfg.eps);
    return tr;
  });
}

std::vector<Trial> run_adversary(const ExperimentConfig& cfg) {
  Trial tr;
  const auto t0 = Clock::now();
  const double n = static_cast<double>(cfg.n);
  if (cfg.mode == "stagnation") {
    const double delta = cfg.delta.value_or(stagnation_default_delta(cfg.eps));
    const StagnationReport r = adversary_stagnation_report(cfg.n, cfg.eps, delta);
    const double lam = r.lambda;
    const double closed = (1.0 - lam) * std::sqrt((n - 1.0) / n) / std::sqrt(1.0 / n + (n - 1.0) * lam * lam / n);
    tr.estimate = r.ratio;
    tr.oracle = closed;
    tr.rel = std::abs(r.ratio - closed) / closed;
    tr.pass = r.legal == (closed <= delta);
    tr.details = {{"delta", delta}, {"legal", r.legal}, {"stagnates", r.stagnates()}, {"lambda", lam},
                  {"rayleigh", r.rayleigh}};
  } else if (cfg.mode == "iteration-lb") {
    const double delta = cfg.delta.value_or(cfg.eps);
    const std::size_t sim = adversary_iteration_lb_check(cfg.n, cfg.eps, delta);
    const std::size_t closed = iteration_lb_closed_form(cfg.n, cfg.eps, delta);
    tr.estimate = static_cast<double>(sim);
    tr.oracle = static_cast<double>(closed);
    tr.rel = sim == closed ? 0.0 : std::abs(static_cast<double>(sim) - static_cast<double>(closed)) /
                                       std::max(1.0, static_cast<double>(closed));
    tr.pass = sim == closed;
    tr.details = {{"delta", delta}, {"stagnation_steps", sim}};
  } else {
    const double delta = cfg.delta.value_or(0.1);
    const SignedNoiseReport r = adversary_signed_noise_report(cfg.n, delta);
    const bool predicted = delta >= 2.0 / std::sqrt(n + 3.0);
    tr.estimate = r.overlap;
    if (r.legal) tr.oracle = 0.0;
    tr.pass = r.legal == predicted && (!r.legal || r.overlap == 0.0);
    tr.details = {{"delta", delta}, {"legal", r.legal}, {"error_norm", r.error_norm}, {"budget", r.budget},
                  {"rayleigh_after", r.rayleigh_after}, {"lambda1", r.lambda1}};
  }
  tr.wall_ms = ms_since(t0);
  return {tr};
}

}  // namespace

RunResult run(const ExperimentConfig& cfg) {
  cfg.validate();
  json report;
  report["command"] = to_string(cfg.command);
  report["config"] = config_json(cfg);
  report["dataset"] = nullptr;

  std::vector<Trial> trials;
  double oracle_ms = 0.0;
  if (cfg.command == Command::Adversary) {
    trials = run_adversary(cfg);
  } else {
    const auto t0 = Clock::now();
    const PointSet X = load_dataset(cfg);
    report["dataset"] = {{"n", X.n()}, {"d", X.d()},
                         {"source", cfg.input_path ? *cfg.input_path : *cfg.gen_spec}};
    switch (cfg.command) {
      case Command::Mvp: trials = run_mvp(cfg, X, oracle_ms); break;
      case Command::Matmul: trials = run_matmul(cfg, X, oracle_ms); break;
      case Command::Quadform: trials = run_quadform(cfg, X, oracle_ms); break;
      case Command::Topeig: trials = run_topeig(cfg, X, oracle_ms); break;
      case Command::Sum: trials = run_sum(cfg, X, oracle_ms); break;
      case Command::Estimator: trials = run_estimator(cfg, X, oracle_ms); break;
      case Command::Gen: {
        if (!cfg.points_path) throw ArgumentError("gen needs --points PATH");
        write_points_file(*cfg.points_path, X);
        Trial tr;
        tr.wall_ms = ms_since(t0);
        tr.details = {{"points", *cfg.points_path}};
        trials.push_back(tr);
        break;
      }
      case Command::Adversary: break;
    }
  }

  RunResult out;
  json jt = json::array();
  std::vector<double> est, rel, wall, work, evals;
  std::size_t passes = 0;
  bool graded = !trials.empty();
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const Trial& t = trials[i];
    jt.push_back({{"trial", i},
                  {"seed", derive_seed(cfg.seed, i)},
                  {"estimate", t.estimate},
                  {"oracle", opt(t.oracle)},
                  {"relative_error", opt(t.rel)},
                  {"wall_time_ms", t.wall_ms},
                  {"kde_work", t.work},
                  {"kernel_evals", t.evals},
                  {"pass", t.pass ? json(*t.pass) : json(nullptr)},
                  {"details", t.details}});
    est.push_back(t.estimate);
    wall.push_back(t.wall_ms);
    work.push_back(t.work);
    evals.push_back(static_cast<double>(t.evals));
    if (t.rel) rel.push_back(*t.rel);
    if (!t.pass) graded = false;
    else if (*t.pass) ++passes;
    else out.all_passed = false;
  }
  report["trials"] = jt;
  report["aggregate"] = {
      {"trials", trials.size()},
      {"passes", graded ? json(passes) : json(nullptr)},
      {"success_rate", graded ? json(static_cast<double>(passes) / static_cast<double>(trials.size())) : json(nullptr)},
      {"median_estimate", opt(median(est))},
      {"median_relative_error", opt(median(rel))},
      {"median_wall_time_ms", opt(median(wall))},
      {"median_kde_work", opt(median(work))},
      {"median_kernel_evals", opt(median(evals))},
      {"oracle_wall_time_ms", cfg.oracle ? json(oracle_ms) : json(nullptr)}};
  out.report = std::move(report);
  return out;
}

json strip_timings(json report) {
  if (report.contains("trials"))
    for (auto& t : report["trials"]) t.erase("wall_time_ms");
  if (report.contains("aggregate")) {
    report["aggregate"].erase("median_wall_time_ms");
    report["aggregate"].erase("oracle_wall_time_ms");
  }
  return report;
}

}  // namespace kdelinalg
