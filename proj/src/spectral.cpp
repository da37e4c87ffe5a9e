#include "kdelinalg/spectral.hpp"

#include <cmath>
#include <limits>

#include "kdelinalg/errors.hpp"
#include "kdelinalg/rng.hpp"

namespace kdelinalg {

std::string_view to_string(OracleMode mode) {
  switch (mode) {
    case OracleMode::KdeBacked: return "kde";
    case OracleMode::Exact: return "exact";
    case OracleMode::AdversarialStagnation: return "stagnation";
    case OracleMode::AdversarialSigned: return "signed";
    case OracleMode::AdversarialIterationLB: return "iteration-lb";
  }
  return "unknown";
}

namespace {

void check_size(const NoisyMvpOracle& o, const Eigen::VectorXd& z) {
  if (static_cast<std::size_t>(z.size()) != o.size()) throw ArgumentError("oracle: length mismatch");
}

}  // namespace

KdeBackedOracle::KdeBackedOracle(const KernelSpec& spec, const PointSet& X, const MvpOptions& opts)
    : spec_(spec), X_(X), opts_(opts) {
  spec_.validate();
}

Eigen::VectorXd KdeBackedOracle::multiply(const Eigen::VectorXd& z, double delta, std::size_t step) {
  check_size(*this, z);
  MvpOptions o = opts_;
  o.seed = derive_seed(opts_.seed, step);
  MvpResult r = nonneg_mvp(spec_, X_, z, delta, o);
  work_ += r.total_work;
  kernel_evals_ += r.kernel_evals;
  return std::move(r.z);
}

Eigen::VectorXd ExactOracle::multiply(const Eigen::VectorXd& z, double, std::size_t) {
  check_size(*this, z);
  return K_ * z;
}

StagnationAdversary::StagnationAdversary(std::size_t n, double eps) : n_(n) {
  if (n < 2) throw ArgumentError("stagnation adversary needs n >= 2");
  if (!(eps > 0.0 && eps < 1.0)) throw ArgumentError("eps must lie in (0,1)");
  const double nd = static_cast<double>(n);
  const double eps_dot = 1e-6 * eps;
  lambda_ = 1.0 - nd * (eps + eps_dot) / (nd - 1.0);
  if (!(lambda_ > 0.0)) throw ArgumentError("stagnation adversary: eps too large for n");
}

Eigen::VectorXd StagnationAdversary::diagonal() const {
  Eigen::VectorXd d = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n_), lambda_);
  d[0] = 1.0;
  return d;
}

Eigen::VectorXd StagnationAdversary::multiply(const Eigen::VectorXd& z, double delta, std::size_t) {
  check_size(*this, z);
  Eigen::VectorXd kz = diagonal().cwiseProduct(z);
  if ((z - kz).norm() <= delta * kz.norm()) return z;
  return kz;
}

SignedNoiseAdversary::SignedNoiseAdversary(std::size_t n) : n_(n) {
  if (n < 2) throw ArgumentError("signed-noise adversary needs n >= 2");
}

Eigen::VectorXd SignedNoiseAdversary::diagonal() const {
  Eigen::VectorXd d = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n_), 0.5);
  d[0] = 1.0;
  return d;
}

Eigen::VectorXd SignedNoiseAdversary::multiply(const Eigen::VectorXd& z, double delta, std::size_t) {
  check_size(*this, z);
  Eigen::VectorXd kz = diagonal().cwiseProduct(z);
  if (std::abs(kz[0]) <= delta * kz.norm()) kz[0] -= kz[0];
  return kz;
}

IterationLbAdversary::IterationLbAdversary(std::size_t n, double eps) : n_(n), eps_(eps) {
  if (n < 2) throw ArgumentError("iteration adversary needs n >= 2");
  if (!(eps > 0.0 && eps < 1.0)) throw ArgumentError("eps must lie in (0,1)");
}

Eigen::VectorXd IterationLbAdversary::multiply(const Eigen::VectorXd& z, double delta, std::size_t) {
  check_size(*this, z);
  Eigen::VectorXd out = z;  // K = I
  const double push = 2.0 * eps_ * z[0];
  if (!broken_ && std::abs(push) <= delta * z.norm()) {
    out[0] += push;
    ++mimicked_;
  } else {
    broken_ = true;
  }
  return out;
}

std::size_t power_iteration_count(std::size_t n, double eps) {
  return static_cast<std::size_t>(std::ceil(10.0 * std::log(static_cast<double>(n)) / eps));
}

EigenPair noisy_power_iteration(NoisyMvpOracle& oracle, double eps, double delta, std::size_t iterations) {
  const std::size_t n = oracle.size();
  if (n == 0) throw ArgumentError("power iteration: empty problem");
  EigenPair out;
  out.eps = eps;
  out.delta = delta;
  out.iterations = iterations;
  out.lambda = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd z = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), 1.0 / std::sqrt(static_cast<double>(n)));
  out.u = z;
  const double work0 = oracle.work();
  const std::size_t evals0 = oracle.kernel_evals();
  for (std::size_t t = 0; t <= iterations; ++t) {
    const Eigen::VectorXd next = oracle.multiply(z, delta, t);
    const PowerStep step{z.dot(next), next.norm()};
    out.trace.push_back(step);
    if (step.inner > out.lambda) {
      out.lambda = step.inner;
      out.u = z;
      out.best_step = t;
    }
    if (!(step.norm > 0.0)) break;
    z = next / step.norm;
  }
  out.total_work = oracle.work() - work0;
  out.kernel_evals = oracle.kernel_evals() - evals0;
  return out;
}

EigenPair top_eigenpair(NoisyMvpOracle& oracle, double eps) {
  if (!(eps > 0.0 && eps < kMaxEigenEps)) throw ArgumentError("top_eigenpair: eps must lie in (0, 1/2)");
  if (oracle.size() == 0) throw ArgumentError("top_eigenpair: n must be positive");
  return noisy_power_iteration(oracle, eps, eps / 8.0, power_iteration_count(oracle.size(), eps));
}

EigenPair top_eigenpair(const KernelSpec& spec, const PointSet& X, double eps, const MvpOptions& opts) {
  KdeBackedOracle oracle(spec, X, opts);
  return top_eigenpair(oracle, eps);
}

double stagnation_default_delta(double eps) { return 1.01 * eps / (1.0 - eps); }

StagnationReport adversary_stagnation_report(std::size_t n, double eps, double delta) {
  if (n < 100) throw ArgumentError("stagnation check needs n >= 100");
  if (!(delta > 0.0)) throw ArgumentError("delta must be positive");
  StagnationAdversary adv(n, eps);
  const Eigen::VectorXd diag = adv.diagonal();
  const Eigen::VectorXd z0 =
      Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), 1.0 / std::sqrt(static_cast<double>(n)));
  const Eigen::VectorXd kz0 = diag.cwiseProduct(z0);
  const Eigen::VectorXd e = z0 - kz0;  // ((1 - lambda)/sqrt(n)) (0, 1, ..., 1)

  StagnationReport r;
  r.lambda = adv.lambda();
  r.delta = delta;
  r.error_norm = e.norm();
  r.kz0_norm = kz0.norm();
  r.ratio = r.error_norm / r.kz0_norm;
  r.rayleigh = z0.dot(kz0);
  r.legal = r.error_norm <= delta * r.kz0_norm;
  r.below_target = r.rayleigh < (1.0 - eps) * diag.maxCoeff();
  return r;
}

bool adversary_stagnation_check(std::size_t n, double eps, double delta) {
  return adversary_stagnation_report(n, eps, delta).stagnates();
}

bool adversary_stagnation_check(std::size_t n, double eps) {
  return adversary_stagnation_check(n, eps, stagnation_default_delta(eps));
}

std::size_t adversary_iteration_lb_check(std::size_t n, double eps, double delta) {
  if (n < 2) throw ArgumentError("iteration check needs n >= 2");
  if (!(eps > 0.0 && eps < 1.0)) throw ArgumentError("eps must lie in (0,1)");
  if (!(delta > 0.0)) throw ArgumentError("delta must be positive");
  // Unnormalized iterates w_t = (K')^t 1 live on two coordinates: w_t(1) =
  // (1+2eps)^t and 1 elsewhere. The move at step t is e = 2eps w_t(1) e1,
  // charged against delta ||w_t|| >= delta sqrt(n).
  const double budget = delta * std::sqrt(static_cast<double>(n));
  double head = 1.0;
  std::size_t last = 0;
  for (std::size_t t = 0;; ++t) {
    if (2.0 * eps * head > budget) break;
    last = t;
    head *= 1.0 + 2.0 * eps;
  }
  return last;
}

std::size_t iteration_lb_closed_form(std::size_t n, double eps, double delta) {
  const double x = std::log(delta / (2.0 * eps) * std::sqrt(static_cast<double>(n))) / std::log1p(2.0 * eps);
  return x <= 0.0 ? 0 : static_cast<std::size_t>(std::floor(x));
}

SignedNoiseReport adversary_signed_noise_report(std::size_t n, double delta, std::size_t extra_steps) {
  if (!(delta > 0.0)) throw ArgumentError("delta must be positive");
  SignedNoiseAdversary adv(n);
  const Eigen::VectorXd diag = adv.diagonal();
  const Eigen::VectorXd z0 =
      Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), 1.0 / std::sqrt(static_cast<double>(n)));
  const Eigen::VectorXd kz0 = diag.cwiseProduct(z0);

  SignedNoiseReport r;
  r.error_norm = std::abs(kz0[0]);
  r.budget = delta * kz0.norm();
  r.legal = r.error_norm <= r.budget;
  Eigen::VectorXd z = adv.multiply(z0, delta, 0);
  z /= z.norm();
  r.overlap = z[0];  // v1 = e1
  for (std::size_t k = 0; k < extra_steps; ++k) {
    z = diag.cwiseProduct(z);
    z /= z.norm();
  }
  r.rayleigh_after = z.dot(diag.cwiseProduct(z));
  return r;
}

double adversary_signed_noise_demo(std::size_t n, double delta) {
  return adversary_signed_noise_report(n, delta).overlap;
}

}  // namespace kdelinalg
