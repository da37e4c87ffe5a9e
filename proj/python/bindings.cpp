#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "kdelinalg/errors.hpp"
#include "kdelinalg/experiment.hpp"
#include "kdelinalg/kernels.hpp"
#include "kdelinalg/kernelsum.hpp"
#include "kdelinalg/linalg.hpp"
#include "kdelinalg/spectral.hpp"

namespace py = pybind11;
using namespace kdelinalg;

namespace {

PointSet points(const RowMatrix& X) { return PointSet(X); }

MvpOptions mvp_options(const std::string& backend, std::uint64_t seed) {
  MvpOptions o;
  o.backend = parse_backend(backend);
  o.seed = seed;
  return o;
}

py::dict mvp_dict(const MvpResult& r) {
  py::list buckets;
  for (const BucketInfo& b : r.buckets)
    buckets.append(py::dict(py::arg("index") = b.index, py::arg("level") = b.level,
                            py::arg("cardinality") = b.cardinality, py::arg("t") = b.t, py::arg("mu") = b.mu,
                            py::arg("work") = b.work));
  return py::dict(py::arg("z") = r.z, py::arg("buckets") = buckets, py::arg("total_work") = r.total_work,
                  py::arg("kernel_evals") = r.kernel_evals, py::arg("internal_eps") = r.internal_eps,
                  py::arg("bucket_count") = r.bucket_count, py::arg("dropped") = r.dropped,
                  py::arg("dropped_mass") = r.dropped_mass);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "KDE-driven kernel matrix linear algebra";

  py::register_exception<ArgumentError>(m, "ArgumentError", PyExc_ValueError);
  py::register_exception<CapacityError>(m, "CapacityError", PyExc_OverflowError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

  py::enum_<KernelFamily>(m, "KernelFamily")
      .value("Gaussian", KernelFamily::Gaussian)
      .value("Exponential", KernelFamily::Exponential)
      .value("Laplacian", KernelFamily::Laplacian)
      .value("RationalQuadratic", KernelFamily::RationalQuadratic);

  py::class_<KernelSpec>(m, "KernelSpec")
      .def(py::init([](KernelFamily f, double s, double beta) { return KernelSpec{f, s, beta}; }),
           py::arg("family") = KernelFamily::Gaussian, py::arg("bandwidth_scale") = 1.0, py::arg("rq_beta") = 1.0)
      .def_readwrite("family", &KernelSpec::family)
      .def_readwrite("bandwidth_scale", &KernelSpec::bandwidth_scale)
      .def_readwrite("rq_beta", &KernelSpec::rq_beta);

  m.def("kernel_eval", [](const KernelSpec& k, const std::vector<double>& x, const std::vector<double>& y) {
    return kernel_eval(k, x, y);
  });
  m.def("exact_matvec", [](const KernelSpec& k, const RowMatrix& X, const Eigen::VectorXd& y) {
    return exact_matvec(k, points(X), y);
  });
  m.def("exact_sum", [](const KernelSpec& k, const RowMatrix& X) { return exact_sum(k, points(X)); });
  m.def("exact_top_eig", [](const KernelSpec& k, const RowMatrix& X) {
    const TopEigen e = exact_top_eig(k, points(X));
    return py::make_tuple(e.value, e.vector);
  });

  m.def(
      "nonneg_mvp",
      [](const KernelSpec& k, const RowMatrix& X, const Eigen::VectorXd& y, double eps, const std::string& backend,
         std::uint64_t seed) { return mvp_dict(nonneg_mvp(k, points(X), y, eps, mvp_options(backend, seed))); },
      py::arg("kernel"), py::arg("X"), py::arg("y"), py::arg("eps"), py::arg("backend") = "sampling",
      py::arg("seed") = 0);
  m.def(
      "kernel_matmul",
      [](const KernelSpec& k, const RowMatrix& X, const Eigen::MatrixXd& A, double eps, const std::string& backend,
         std::uint64_t seed) { return kernel_matmul(k, points(X), A, eps, mvp_options(backend, seed)).B; },
      py::arg("kernel"), py::arg("X"), py::arg("A"), py::arg("eps"), py::arg("backend") = "sampling",
      py::arg("seed") = 0);
  m.def(
      "quadform",
      [](const KernelSpec& k, const RowMatrix& X, const Eigen::VectorXd& v, double eps, const std::string& backend,
         std::uint64_t seed) { return quadform(k, points(X), v, eps, mvp_options(backend, seed)).value; },
      py::arg("kernel"), py::arg("X"), py::arg("v"), py::arg("eps"), py::arg("backend") = "sampling",
      py::arg("seed") = 0);
  m.def(
      "top_eigenpair",
      [](const KernelSpec& k, const RowMatrix& X, double eps, const std::string& backend, std::uint64_t seed) {
        const PointSet P = points(X);
        const EigenPair e = top_eigenpair(k, P, eps, mvp_options(backend, seed));
        std::vector<std::pair<double, double>> trace;
        for (const PowerStep& s : e.trace) trace.emplace_back(s.inner, s.norm);
        return py::dict(py::arg("lambda") = e.lambda, py::arg("u") = e.u, py::arg("trace") = trace,
                        py::arg("total_work") = e.total_work);
      },
      py::arg("kernel"), py::arg("X"), py::arg("eps"), py::arg("backend") = "sampling", py::arg("seed") = 0);
  m.def(
      "kernel_sum",
      [](const KernelSpec& k, const RowMatrix& X, double eps, std::uint64_t seed, const std::string& backend) {
        KernelSumOptions o;
        o.backend = parse_backend(backend);
        const SumEstimate e = kernel_sum(k, points(X), eps, seed, o);
        return py::dict(py::arg("value") = e.value, py::arg("s1_hat") = e.s1_hat, py::arg("s2_hat") = e.s2_hat,
                        py::arg("s3_hat") = e.s3_hat, py::arg("s4_hat") = e.s4_hat, py::arg("m") = e.m,
                        py::arg("heavy_count") = e.heavy_count, py::arg("mprime") = e.mprime, py::arg("q1") = e.q1,
                        py::arg("q2") = e.q2, py::arg("tau") = e.tau, py::arg("mu") = e.mu,
                        py::arg("mu_prime") = e.mu_prime, py::arg("total_work") = e.total_work);
      },
      py::arg("kernel"), py::arg("X"), py::arg("eps"), py::arg("seed") = 0, py::arg("backend") = "sampling");
  m.def(
      "kernel_sum_median",
      [](const KernelSpec& k, const RowMatrix& X, double eps, std::uint64_t seed, std::size_t trials,
         const std::string& backend) {
        KernelSumOptions o;
        o.backend = parse_backend(backend);
        return kernel_sum_median(k, points(X), eps, seed, trials, o).value;
      },
      py::arg("kernel"), py::arg("X"), py::arg("eps"), py::arg("seed") = 0, py::arg("trials") = 0,
      py::arg("backend") = "sampling");
  m.def("submatrix_sum_estimator", [](const KernelSpec& k, const RowMatrix& X, double q, std::uint64_t seed) {
    return submatrix_sum_estimator(k, points(X), q, seed);
  });
  m.def(
      "generate_dp_dataset",
      [](std::size_t n, double p, double scale, std::uint64_t seed) {
        return generate_dp_dataset(n, p, scale, seed).coords();
      },
      py::arg("n"), py::arg("p"), py::arg("scale") = 0.0, py::arg("seed") = 0);
  m.def("adversary_stagnation_check", py::overload_cast<std::size_t, double, double>(&adversary_stagnation_check),
        py::arg("n"), py::arg("eps"), py::arg("delta"));
  m.def("adversary_iteration_lb_check", &adversary_iteration_lb_check, py::arg("n"), py::arg("eps"),
        py::arg("delta"));
  m.def("adversary_signed_noise_demo", &adversary_signed_noise_demo, py::arg("n"), py::arg("delta"));

  m.def(
      "run_experiment",
      [](const std::string& command, const std::string& gen, double eps, const std::string& backend,
         std::uint64_t seed, std::size_t trials, bool oracle) {
        ExperimentConfig cfg;
        cfg.command = parse_command(command);
        if (!gen.empty()) cfg.gen_spec = gen;
        cfg.eps = eps;
        cfg.backend = parse_backend(backend);
        cfg.seed = seed;
        cfg.trials = trials;
        cfg.oracle = oracle;
        return run(cfg).report.dump();
      },
      py::arg("command"), py::arg("gen") = "", py::arg("eps") = 0.1, py::arg("backend") = "sampling",
      py::arg("seed") = 0, py::arg("trials") = 1, py::arg("oracle") = false);
}
