#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "kdelinalg/errors.hpp"
#include "kdelinalg/experiment.hpp"

int main(int argc, char** argv) {
  using namespace kdelinalg;
  CLI::App app{"KDE-driven kernel matrix linear algebra benchmarks"};
  app.set_version_flag("--version", std::string("kdelinalg 0.1.0"));

  ExperimentConfig cfg;
  std::string command, kernel = "gaussian", backend = "sampling";
  std::string input, gen, out, points;
  double delta = 0.0;

  app.add_option("command", command, "mvp | matmul | quadform | topeig | sum | estimator | gen | adversary")
      ->required();
  auto* in_opt = app.add_option("--input", input, "point file (CSV or whitespace, one point per row)");
  auto* gen_opt = app.add_option("--gen", gen, "generator spec, e.g. gaussian_blobs:n=500,d=5");
  in_opt->excludes(gen_opt);
  app.add_option("--eps", cfg.eps, "error parameter in (0,1)");
  app.add_option("--backend", backend, "exact | sampling");
  app.add_option("--seed", cfg.seed, "random seed");
  app.add_option("--trials", cfg.trials, "number of trials");
  app.add_flag("--oracle", cfg.oracle, "compare against the brute-force oracle");
  app.add_flag("--strict", cfg.strict, "exit with status 2 if any trial fails its contract");
  app.add_option("--out", out, "write the JSON report here instead of stdout");
  app.add_option("--kernel", kernel, "gaussian | exponential | laplacian | rational_quadratic");
  app.add_option("--bandwidth", cfg.kernel.bandwidth_scale, "bandwidth scale s");
  app.add_option("--rq-beta", cfg.kernel.rq_beta, "rational quadratic exponent");
  app.add_option("--vector", cfg.vector, "mvp/quadform input vector: random | ones | e1");
  app.add_option("--cols", cfg.cols, "matmul: number of columns");
  app.add_option("--q", cfg.q, "estimator: sampling probability");
  app.add_flag("--median", cfg.median, "sum: median of ceil(ln n) runs per trial");
  app.add_option("--mode", cfg.mode, "adversary: stagnation | iteration-lb | signed");
  app.add_option("--n", cfg.n, "adversary: problem size");
  auto* delta_opt = app.add_option("--delta", delta, "adversary: noise budget");
  app.add_option("--points", points, "gen: CSV destination");

  CLI11_PARSE(app, argc, argv);

  try {
    cfg.command = parse_command(command);
    cfg.kernel.family = parse_kernel_family(kernel);
    cfg.backend = parse_backend(backend);
    if (*in_opt) cfg.input_path = input;
    if (*gen_opt) cfg.gen_spec = gen;
    if (!out.empty()) cfg.output_path = out;
    if (!points.empty()) cfg.points_path = points;
    if (*delta_opt) cfg.delta = delta;

    const RunResult result = run(cfg);
    const std::string text = result.report.dump(2) + "\n";
    if (cfg.output_path) {
      std::ofstream f(*cfg.output_path);
      if (!f) throw ArgumentError("cannot open output file: " + *cfg.output_path);
      f << text;
    } else {
      std::cout << text;
    }
    if (cfg.strict && !result.all_passed) return 2;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 1;
  } catch (const CapacityError& e) {
    std::cerr << "capacity error: " << e.what() << "\n";
    return 1;
  } catch (const ArgumentError& e) {
    std::cerr << "argument error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
