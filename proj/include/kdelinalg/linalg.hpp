#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "kdelinalg/kde.hpp"
#include "kdelinalg/kernels.hpp"

namespace kdelinalg {

struct MvpOptions {
  KdeBackend backend = KdeBackend::Sampling;
  std::uint64_t seed = 0;
  double bucket_constant = 4.0;  // C in b = C ln(n/gamma)/gamma and in mu_i
  double precision_split = 4.0;  // internal precision gamma = eps / precision_split
  double fail_poly = 1.0;
};

struct BucketInfo {
  std::size_t index = 0;        // i >= 1
  double level = 0.0;           // (1 - gamma/2)^(i-1), the rounded-up entry value
  std::size_t cardinality = 0;  // |Y_i|
  int t = 0;                    // scale class of the level relative to 1/sqrt(n)
  double mu = 0.0;              // 2^t gamma' / (C n)
  double work = 0.0;
};

struct MvpResult {
  Eigen::VectorXd z;
  std::vector<BucketInfo> buckets;  // non-empty buckets only, increasing index
  double total_work = 0.0;
  std::size_t kernel_evals = 0;
  double eps = 0.0;
  double internal_eps = 0.0;        // gamma
  std::size_t bucket_count = 0;     // b
  double drop_threshold = 0.0;      // entries (of normalized y) at or below this are dropped
  std::size_t dropped = 0;          // positive entries dropped
  double dropped_mass = 0.0;        // their total (normalized), added back to every coordinate
  double input_norm = 0.0;          // ||y||_2
};

// Bucket geometry shared by nonneg_mvp and its tests.
struct BucketPlan {
  double gamma = 0.0;
  std::size_t b = 0;
  double ratio = 0.0;  // 1 - gamma/2
  double drop_threshold = 0.0;
  std::vector<double> levels;  // levels[k] = ratio^k, k = 0..b

  // Bucket i in [1,b] with levels[i] < v <= levels[i-1]; 0 when v is dropped.
  std::size_t bucket_of(double v) const;
};

BucketPlan make_bucket_plan(std::size_t n, double eps, const MvpOptions& opts = {});

// t >= 0 with level in [2^t/sqrt(n), 2^(t+1)/sqrt(n)) when level >= 1/sqrt(n)
// (*above = true), else with level in (1/(2^(t+1) sqrt(n)), 1/(2^t sqrt(n))].
int scale_class(double level, std::size_t n, bool* above = nullptr);

// z = Ky + e with e >= 0 entrywise and ||e|| <= eps ||Ky|| w.h.p.
// Requires y >= 0, y != 0, eps in (0,1).
MvpResult nonneg_mvp(const KernelSpec& spec, const PointSet& X, const Eigen::VectorXd& y, double eps,
                     const MvpOptions& opts = {});

struct MatmulResult {
  Eigen::MatrixXd B;
  double total_work = 0.0;
  std::size_t kernel_evals = 0;
};

// Column-wise nonneg_mvp; all-zero columns map to zero columns.
MatmulResult kernel_matmul(const KernelSpec& spec, const PointSet& X, const Eigen::MatrixXd& A,
                           double eps, const MvpOptions& opts = {});

struct QuadformResult {
  double value = 0.0;
  double total_work = 0.0;
  std::size_t kernel_evals = 0;
};

// v^T z with z = nonneg_mvp(v); lies in [v^T K v, (1 + c eps) v^T K v].
QuadformResult quadform(const KernelSpec& spec, const PointSet& X, const Eigen::VectorXd& v, double eps,
                        const MvpOptions& opts = {});

}  // namespace kdelinalg
