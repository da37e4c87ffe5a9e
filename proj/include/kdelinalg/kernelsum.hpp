#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "kdelinalg/kde.hpp"
#include "kdelinalg/kernels.hpp"

namespace kdelinalg {

struct KernelSumOptions {
  KdeBackend backend = KdeBackend::Sampling;
  double C = 4.0;
  double fail_poly = 1.0;
  // Sampling rates; 0 selects the defaults q1 = min(C/(eps^2 sqrt n), 1) and
  // q2 = min(C eps^1.5 sqrt(m tau), 1).
  double q1 = 0.0;
  double q2 = 0.0;
};

struct SumEstimate {
  double value = 0.0;  // n + q1^-2 (s3_hat + q2^-2 s4_hat)
  double s1_hat = 0.0, s2_hat = 0.0, s3_hat = 0.0, s4_hat = 0.0;
  std::size_t n = 0;
  std::size_t m = 0;            // |A|
  std::size_t heavy_count = 0;  // |B|
  std::size_t mprime = 0;       // |B'|
  double q1 = 1.0, q2 = 1.0;
  double tau = 0.0;             // heavy rows: estimated off-diagonal row sum >= tau * m
  double mu = 0.0;              // additive error for heavy-row queries
  double mu_prime = 0.0;        // additive error for the light-part queries
  double kde_eps = 0.0;
  double total_work = 0.0;
  std::size_t kernel_evals = 0;
  std::vector<std::size_t> A, B, B_prime;  // indices into X, increasing
};

// Two-level sampling estimate of s(K) = sum_ij K_ij, accurate to 1 +- eps with
// probability >= 0.99.
SumEstimate kernel_sum(const KernelSpec& spec, const PointSet& X, double eps, std::uint64_t seed,
                       const KernelSumOptions& opts = {});

struct MedianSumEstimate {
  double value = 0.0;
  std::vector<double> trials;
  double total_work = 0.0;
  std::size_t kernel_evals = 0;
};

// Median of `trials` independent runs (0 selects ceil(ln n)).
MedianSumEstimate kernel_sum_median(const KernelSpec& spec, const PointSet& X, double eps, std::uint64_t seed,
                                    std::size_t trials = 0, const KernelSumOptions& opts = {});

double level_one_rate(std::size_t n, double eps, double C = 4.0);

// Keep each index with probability q; Z = n + s_o(K_A) / q^2 with the
// off-diagonal sum of the sampled principal submatrix computed exactly.
double submatrix_sum_estimator(const KernelSpec& spec, const PointSet& X, double q, std::uint64_t seed);

// D(p): each of n points is the origin with probability p, otherwise scale
// times a uniformly random basis vector of R^n.
struct DpSample {
  std::size_t n = 0;
  double scale = 0.0;
  std::vector<long> labels;  // -1 for the origin, else the basis index
};

// Smallest scale (to bisection precision) putting every distinct pair of
// D(p) support points at kernel value < 1e-12.
double dp_default_scale(const KernelSpec& spec);

DpSample draw_dp_labels(std::size_t n, double p, double scale, std::uint64_t seed);
PointSet materialize(const DpSample& sample);
double dp_kernel_sum(const KernelSpec& spec, const DpSample& sample);

// scale <= 0 selects dp_default_scale for the Gaussian kernel with s = 1.
inline constexpr std::size_t kDpMaterializeCap = 10000;
PointSet generate_dp_dataset(std::size_t n, double p, double scale, std::uint64_t seed);

}  // namespace kdelinalg
