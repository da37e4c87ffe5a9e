#pragma once

#include <cstddef>
#include <memory>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "kdelinalg/kernels.hpp"
#include "kdelinalg/linalg.hpp"

namespace kdelinalg {

// Largest eps accepted by top_eigenpair.
inline constexpr double kMaxEigenEps = 0.5;

enum class OracleMode { KdeBacked, Exact, AdversarialStagnation, AdversarialSigned, AdversarialIterationLB };

std::string_view to_string(OracleMode mode);

// Source of noisy products z~ = Kz + e for power iteration.
class NoisyMvpOracle {
 public:
  virtual ~NoisyMvpOracle() = default;
  virtual Eigen::VectorXd multiply(const Eigen::VectorXd& z, double delta, std::size_t step) = 0;
  virtual std::size_t size() const = 0;
  virtual OracleMode mode() const = 0;
  double work() const { return work_; }
  std::size_t kernel_evals() const { return kernel_evals_; }

 protected:
  double work_ = 0.0;
  std::size_t kernel_evals_ = 0;
};

// nonneg_mvp at precision delta: the error is entrywise non-negative, so it
// never has a negative component along the (non-negative) top eigenvector.
class KdeBackedOracle final : public NoisyMvpOracle {
 public:
  KdeBackedOracle(const KernelSpec& spec, const PointSet& X, const MvpOptions& opts = {});
  Eigen::VectorXd multiply(const Eigen::VectorXd& z, double delta, std::size_t step) override;
  std::size_t size() const override { return X_.n(); }
  OracleMode mode() const override { return OracleMode::KdeBacked; }

 private:
  KernelSpec spec_;
  const PointSet& X_;
  MvpOptions opts_;
};

// Noiseless products with an explicit matrix (delta ignored).
class ExactOracle final : public NoisyMvpOracle {
 public:
  explicit ExactOracle(Eigen::MatrixXd K) : K_(std::move(K)) {}
  Eigen::VectorXd multiply(const Eigen::VectorXd& z, double delta, std::size_t step) override;
  std::size_t size() const override { return static_cast<std::size_t>(K_.rows()); }
  OracleMode mode() const override { return OracleMode::Exact; }
  const Eigen::MatrixXd& matrix() const { return K_; }

 private:
  Eigen::MatrixXd K_;
};

// K = [1] (+) lambda I, with lambda = 1 - n(eps + eps_dot)/(n-1). The
// adversary returns z~ = z whenever e = (I - K) z fits the budget delta ||Kz||,
// so iteration stalls at the start vector.
class StagnationAdversary final : public NoisyMvpOracle {
 public:
  StagnationAdversary(std::size_t n, double eps);
  Eigen::VectorXd multiply(const Eigen::VectorXd& z, double delta, std::size_t step) override;
  std::size_t size() const override { return n_; }
  OracleMode mode() const override { return OracleMode::AdversarialStagnation; }
  double lambda() const { return lambda_; }
  Eigen::VectorXd diagonal() const;

 private:
  std::size_t n_;
  double lambda_;
};

// K = diag(1, 1/2, ..., 1/2). Zeroes the first coordinate of Kz whenever the
// signed error -(Kz)_1 e_1 fits the budget.
class SignedNoiseAdversary final : public NoisyMvpOracle {
 public:
  explicit SignedNoiseAdversary(std::size_t n);
  Eigen::VectorXd multiply(const Eigen::VectorXd& z, double delta, std::size_t step) override;
  std::size_t size() const override { return n_; }
  OracleMode mode() const override { return OracleMode::AdversarialSigned; }
  Eigen::VectorXd diagonal() const;

 private:
  std::size_t n_;
};

// True matrix K = I; while the budget allows, the adversary answers as if the
// matrix were K' = I + 2 eps e1 e1^T (e = 2 eps e1 e1^T z).
class IterationLbAdversary final : public NoisyMvpOracle {
 public:
  IterationLbAdversary(std::size_t n, double eps);
  Eigen::VectorXd multiply(const Eigen::VectorXd& z, double delta, std::size_t step) override;
  std::size_t size() const override { return n_; }
  OracleMode mode() const override { return OracleMode::AdversarialIterationLB; }
  // Steps answered with the K' product so far.
  std::size_t mimicked() const { return mimicked_; }

 private:
  std::size_t n_;
  double eps_;
  std::size_t mimicked_ = 0;
  bool broken_ = false;
};

struct PowerStep {
  double inner = 0.0;  // <z_t, z~_{t+1}>
  double norm = 0.0;   // ||z~_{t+1}||
};

struct EigenPair {
  double lambda = 0.0;
  Eigen::VectorXd u;  // unit, entrywise >= 0 for non-negative oracles
  std::vector<PowerStep> trace;
  std::size_t best_step = 0;
  std::size_t iterations = 0;  // T
  double eps = 0.0;
  double delta = 0.0;
  double total_work = 0.0;
  std::size_t kernel_evals = 0;
};

// Power iteration from z0 = 1/sqrt(n), steps t = 0..T with
// T = ceil(10 ln n / eps); keeps the iterate with the largest <z_t, z~_{t+1}>.
EigenPair noisy_power_iteration(NoisyMvpOracle& oracle, double eps, double delta, std::size_t iterations);

std::size_t power_iteration_count(std::size_t n, double eps);

// Top eigenpair of K with the KDE-backed oracle at precision eps/8.
EigenPair top_eigenpair(const KernelSpec& spec, const PointSet& X, double eps, const MvpOptions& opts = {});
EigenPair top_eigenpair(NoisyMvpOracle& oracle, double eps);

struct StagnationReport {
  bool legal = false;           // ||e|| <= delta ||K z0||
  bool below_target = false;    // z0^T K z0 < (1 - eps) lambda_1
  double lambda = 0.0;          // bulk eigenvalue
  double error_norm = 0.0;
  double kz0_norm = 0.0;
  double ratio = 0.0;           // error_norm / kz0_norm
  double rayleigh = 0.0;        // z0^T K z0
  double delta = 0.0;
  bool stagnates() const { return legal && below_target; }
};

double stagnation_default_delta(double eps);
StagnationReport adversary_stagnation_report(std::size_t n, double eps, double delta);
bool adversary_stagnation_check(std::size_t n, double eps, double delta);
bool adversary_stagnation_check(std::size_t n, double eps);

// Last step t at which the iteration-count adversary can still answer with
// K' (so the streams for K and K' agree through z_{t+1}); 0 when it has no
// budget at all.
std::size_t adversary_iteration_lb_check(std::size_t n, double eps, double delta);
std::size_t iteration_lb_closed_form(std::size_t n, double eps, double delta);

struct SignedNoiseReport {
  bool legal = false;
  double overlap = 0.0;         // <v1, z1>
  double error_norm = 0.0;
  double budget = 0.0;          // delta ||K z0||
  double rayleigh_after = 0.0;  // Rayleigh quotient after further noiseless steps
  double lambda1 = 1.0;
};

SignedNoiseReport adversary_signed_noise_report(std::size_t n, double delta, std::size_t extra_steps = 50);
double adversary_signed_noise_demo(std::size_t n, double delta);

}  // namespace kdelinalg
