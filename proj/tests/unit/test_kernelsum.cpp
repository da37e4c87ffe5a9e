#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "kdelinalg/errors.hpp"
#include "kdelinalg/kernelsum.hpp"
#include "oracles.hpp"

using namespace kdelinalg;

namespace {

// Off-diagonal sum of K restricted to rows R and columns Q (i != j).
double block_sum(const oracle::Matrix& K, const std::vector<std::size_t>& R, const std::vector<std::size_t>& Q) {
  double s = 0.0;
  for (std::size_t i : R)
    for (std::size_t j : Q)
      if (i != j) s += K[i][j];
  return s;
}

std::vector<std::size_t> minus(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  std::vector<std::size_t> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

PointSet clustered(std::size_t n, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_int_distribution<int> pick(0, 3);
  std::normal_distribution<double> g(0.0, 0.4);
  const double centers[4][2] = {{0, 0}, {4, 0}, {0, 4}, {4, 4}};
  std::vector<double> flat;
  for (std::size_t i = 0; i < n; ++i) {
    const int c = pick(gen);
    flat.push_back(centers[c][0] + g(gen));
    flat.push_back(centers[c][1] + g(gen));
  }
  return PointSet(n, 2, flat);
}

KernelSumOptions exact_backend() {
  KernelSumOptions o;
  o.backend = KdeBackend::Exact;
  return o;
}

}  // namespace

TEST(KernelSum, IdenticalPointsAllHeavy) {
  const std::size_t n = 200;
  const PointSet X(n, 2, std::vector<double>(2 * n, 0.25));
  const double eps = 0.3;
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const SumEstimate e = kernel_sum(KernelSpec{}, X, eps, seed);
    ok += std::abs(e.value - n * n) <= eps * n * n;
    EXPECT_EQ(e.B, e.A);
    EXPECT_EQ(e.mprime, 0u);
    EXPECT_EQ(e.s4_hat, 0.0);
  }
  EXPECT_GE(ok, 95);
}

TEST(KernelSum, SeparatedPointsNoHeavyRows) {
  std::vector<double> flat;
  for (int i = 0; i < 150; ++i) flat.push_back(100.0 * i);
  const PointSet X(150, 1, flat);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SumEstimate e = kernel_sum(KernelSpec{}, X, 0.2, seed);
    EXPECT_EQ(e.heavy_count, 0u);
    EXPECT_NEAR(e.value, 150.0, 0.2 * 150.0);
  }
}

TEST(KernelSum, ParametersAndReturnLine) {
  const PointSet X = clustered(1000, 3);
  const double eps = 0.4, C = 4.0;
  const SumEstimate e = kernel_sum(KernelSpec{}, X, eps, 11);
  EXPECT_DOUBLE_EQ(e.q1, std::min(C / (eps * eps * std::sqrt(1000.0)), 1.0));
  EXPECT_LT(e.q1, 1.0);
  const double m = static_cast<double>(e.m);
  EXPECT_DOUBLE_EQ(e.tau, 1.0 / (C * m * eps * eps * eps));
  EXPECT_DOUBLE_EQ(e.mu, eps * e.tau / C);
  EXPECT_DOUBLE_EQ(e.q2, std::min(C * std::pow(eps, 1.5) * std::sqrt(m * e.tau), 1.0));
  EXPECT_DOUBLE_EQ(e.s3_hat, 2 * e.s2_hat - e.s1_hat);
  EXPECT_DOUBLE_EQ(e.value, 1000.0 + (e.s3_hat + e.s4_hat / (e.q2 * e.q2)) / (e.q1 * e.q1));
  EXPECT_DOUBLE_EQ(e.kde_eps, eps / C);
  EXPECT_TRUE(std::is_sorted(e.A.begin(), e.A.end()));
  EXPECT_TRUE(std::includes(e.A.begin(), e.A.end(), e.B.begin(), e.B.end()));
  const auto light = minus(e.A, e.B);
  EXPECT_TRUE(std::includes(light.begin(), light.end(), e.B_prime.begin(), e.B_prime.end()));
}

TEST(KernelSum, DecompositionIdentity) {
  const KernelSpec g{};
  const PointSet X = clustered(400, 5);
  const auto K = oracle::ref_matrix(g, X);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    KernelSumOptions o;
    o.q1 = 0.5;
    const SumEstimate e = kernel_sum(g, X, 0.3, seed, o);
    const auto L = minus(e.A, e.B);
    const double lhs = block_sum(K, e.A, e.A);
    const double rhs = block_sum(K, e.B, e.B) + block_sum(K, L, L) + 2 * block_sum(K, e.B, L);
    EXPECT_NEAR(lhs, rhs, 1e-9 * lhs);
  }
}

TEST(KernelSum, ExactBackendConditionalIdentity) {
  const KernelSpec g{};
  const PointSet X = clustered(300, 7);
  const auto K = oracle::ref_matrix(g, X);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    KernelSumOptions o = exact_backend();
    o.q1 = 0.45;
    o.q2 = 0.6;
    const SumEstimate e = kernel_sum(g, X, 0.25, seed, o);
    const double s1 = block_sum(K, e.B, e.B);
    const double s2 = block_sum(K, e.B, e.A);
    const double s4 = block_sum(K, e.B_prime, e.B_prime);
    EXPECT_NEAR(e.s1_hat, s1, 1e-9 * std::max(1.0, s1));
    EXPECT_NEAR(e.s2_hat, s2, 1e-9 * std::max(1.0, s2));
    EXPECT_NEAR(e.s4_hat, s4, 1e-9 * std::max(1.0, s4));
    const double expect = 300.0 + (2 * s2 - s1 + s4 / (0.6 * 0.6)) / (0.45 * 0.45);
    EXPECT_NEAR(e.value, expect, 1e-9 * expect);
  }
}

TEST(KernelSum, LightRowsAreTrulyLight) {
  // A sparse background (row sums near the heavy threshold) plus one dense cluster.
  const KernelSpec g{};
  std::mt19937 gen(9);
  std::uniform_real_distribution<double> box(-10.0, 10.0);
  std::normal_distribution<double> tight(3.0, 0.3);
  std::vector<double> flat;
  for (int i = 0; i < 400; ++i) flat.insert(flat.end(), {box(gen), box(gen)});
  for (int i = 0; i < 200; ++i) flat.insert(flat.end(), {tight(gen), tight(gen)});
  const PointSet X(600, 2, flat);
  const auto K = oracle::ref_matrix(g, X);
  std::size_t light_rows = 0, violations = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (KdeBackend backend : {KdeBackend::Exact, KdeBackend::Sampling}) {
      KernelSumOptions o;
      o.backend = backend;
      o.q1 = 0.3;
      const SumEstimate e = kernel_sum(g, X, 0.5, seed, o);
      const double limit = e.tau * static_cast<double>(e.m);
      for (std::size_t a : minus(e.A, e.B)) {
        const bool bad = block_sum(K, {a}, e.A) > limit;
        ++light_rows;
        violations += bad;
        if (backend == KdeBackend::Exact) EXPECT_FALSE(bad);
      }
    }
  }
  EXPECT_GT(light_rows, 100u);
  EXPECT_LE(violations, light_rows / 100);
}

TEST(KernelSum, TinyLevelOneSample) {
  const PointSet X = oracle::random_points(50, 2, 3);
  KernelSumOptions o;
  o.q1 = 1e-6;
  const SumEstimate e = kernel_sum(KernelSpec{}, X, 0.2, 1, o);
  EXPECT_LT(e.m, 2u);
  EXPECT_EQ(e.value, 50.0);
}

TEST(KernelSum, Deterministic) {
  const PointSet X = clustered(500, 2);
  const SumEstimate a = kernel_sum(KernelSpec{}, X, 0.3, 4);
  const SumEstimate b = kernel_sum(KernelSpec{}, X, 0.3, 4);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.A, b.A);
}

TEST(KernelSum, MedianWrapper) {
  const PointSet X = clustered(400, 12);
  const MedianSumEstimate m = kernel_sum_median(KernelSpec{}, X, 0.3, 1);
  ASSERT_EQ(m.trials.size(), static_cast<std::size_t>(std::ceil(std::log(400.0))));
  std::vector<double> v = m.trials;
  std::sort(v.begin(), v.end());
  EXPECT_DOUBLE_EQ(m.value, 0.5 * (v[2] + v[3]));
  const double s = exact_sum(KernelSpec{}, X);
  EXPECT_NEAR(m.value, s, 0.3 * s);
}

TEST(KernelSum, Errors) {
  const PointSet X = oracle::random_points(10, 2, 1);
  EXPECT_THROW(kernel_sum(KernelSpec{}, X, 0.0, 1), ArgumentError);
  EXPECT_THROW(kernel_sum(KernelSpec{}, X, 1.0, 1), ArgumentError);
  EXPECT_THROW(kernel_sum(KernelSpec{}, PointSet(1, 1, {0.0}), 0.5, 1), ArgumentError);
  KernelSumOptions o;
  o.q1 = 1.5;
  EXPECT_THROW(kernel_sum(KernelSpec{}, X, 0.5, 1, o), ArgumentError);
}

TEST(SubmatrixEstimator, FullSampleIsExact) {
  const PointSet X = oracle::random_points(60, 3, 8);
  const double s = oracle::total(oracle::ref_matrix(KernelSpec{}, X));
  EXPECT_NEAR(submatrix_sum_estimator(KernelSpec{}, X, 1.0, 5), s, 1e-12 * s);
  EXPECT_THROW(submatrix_sum_estimator(KernelSpec{}, X, 0.0, 5), ArgumentError);
  EXPECT_THROW(submatrix_sum_estimator(KernelSpec{}, X, 1.01, 5), ArgumentError);
}

TEST(SubmatrixEstimator, IdenticalPointsMeanIsNSquared) {
  const std::size_t n = 30;
  const PointSet X(n, 1, std::vector<double>(n, 2.0));
  const int draws = 10000;
  std::vector<double> z(draws);
  for (int k = 0; k < draws; ++k) z[k] = submatrix_sum_estimator(KernelSpec{}, X, 0.3, k);
  const double mean = std::accumulate(z.begin(), z.end(), 0.0) / draws;
  double var = 0.0;
  for (double x : z) var += (x - mean) * (x - mean);
  var /= draws - 1;
  EXPECT_LE(std::abs(mean - 900.0), 3 * std::sqrt(var / draws));
}

TEST(SubmatrixEstimator, UnbiasedWithExactVariance) {
  std::size_t within = 0;
  for (unsigned inst = 0; inst < 20; ++inst) {
    const PointSet X = oracle::random_points(40, 2, 300 + inst, -1.5, 1.5);
    const auto K = oracle::ref_matrix(KernelSpec{}, X);
    const double s = oracle::total(K);
    const double q = 0.4;
    const int draws = 4000;
    double sum = 0.0, sq = 0.0;
    for (int k = 0; k < draws; ++k) {
      const double z = submatrix_sum_estimator(KernelSpec{}, X, q, 1000 * inst + k);
      sum += z;
      sq += z * z;
    }
    const double mean = sum / draws;
    const double var = (sq - draws * mean * mean) / (draws - 1);
    const double exact_var = oracle::submatrix_estimator_variance(K, q);
    within += std::abs(mean - s) <= 3 * std::sqrt(exact_var / draws);
    EXPECT_NEAR(var / exact_var, 1.0, 0.15) << inst;
  }
  EXPECT_GE(within, 19u);
}

TEST(DpDistribution, DefaultScaleSeparatesSupport) {
  for (const KernelSpec& k : {KernelSpec{}, KernelSpec{KernelFamily::Exponential, 1.0, 1.0},
                              KernelSpec{KernelFamily::Laplacian, 2.0, 1.0},
                              KernelSpec{KernelFamily::RationalQuadratic, 1.0, 1.0}}) {
    const double s = dp_default_scale(k);
    const std::vector<double> o{0.0, 0.0, 0.0}, a{s, 0.0, 0.0}, b{0.0, s, 0.0};
    EXPECT_LT(kernel_eval(k, o, a), 1e-12);
    EXPECT_LT(kernel_eval(k, a, b), 1e-12);
    const std::vector<double> a2{0.99 * s, 0, 0}, b2{0, 0.99 * s, 0};
    EXPECT_GE(std::max(kernel_eval(k, o, a2), kernel_eval(k, a2, b2)), 1e-12);
  }
}

TEST(DpDistribution, LabelSumMatchesMaterializedSum) {
  for (double p : {0.0, 0.05, 0.5, 1.0}) {
    const DpSample d = draw_dp_labels(300, p, 3.0, 17);
    const double fast = dp_kernel_sum(KernelSpec{}, d);
    const double slow = exact_sum(KernelSpec{}, materialize(d));
    EXPECT_NEAR(fast, slow, 1e-9 * slow) << p;
  }
}

TEST(DpDistribution, PointsAreOriginOrScaledBasisVectors) {
  const PointSet X = generate_dp_dataset(200, 1.0, 0.0, 1);
  EXPECT_EQ(X.d(), 200u);
  EXPECT_DOUBLE_EQ(exact_sum(KernelSpec{}, X), 200.0 * 200.0);
  const PointSet Y = generate_dp_dataset(200, 0.3, 0.0, 2);
  const double s = dp_default_scale(KernelSpec{});
  for (std::size_t i = 0; i < 200; ++i) {
    int nonzero = 0;
    for (std::size_t k = 0; k < 200; ++k) {
      const double v = Y.data(i)[k];
      if (v != 0.0) {
        ++nonzero;
        EXPECT_EQ(v, s);
      }
    }
    EXPECT_LE(nonzero, 1);
  }
  EXPECT_THROW(generate_dp_dataset(10001, 0.1, 0.0, 1), CapacityError);
  EXPECT_THROW(draw_dp_labels(10, 1.5, 1.0, 1), ArgumentError);
}

TEST(DpDistribution, ExpectedSumMatchesCollisionCount) {
  const KernelSpec g{};
  const double scale = dp_default_scale(g);
  for (double n : {1000.0, 10000.0}) {
    for (double p : {0.0, 1.0 / std::sqrt(n)}) {
      const int draws = 100;
      double mean = 0.0;
      for (int k = 0; k < draws; ++k)
        mean += dp_kernel_sum(g, draw_dp_labels(static_cast<std::size_t>(n), p, scale, 7 * k + 1));
      mean /= draws;
      EXPECT_NEAR(mean / oracle::dp_expected_sum(n, p), 1.0, 0.02) << n << " " << p;
    }
  }
}

TEST(DpDistribution, OriginFractionBinomial) {
  const std::size_t n = 1000;
  const double p = 0.0316;
  const int draws = 100;
  std::size_t origins = 0;
  for (int k = 0; k < draws; ++k)
    for (long l : draw_dp_labels(n, p, 1.0, 40 + k).labels) origins += l < 0;
  const double total = static_cast<double>(n) * draws;
  const double sigma = std::sqrt(p * (1 - p) / total);
  EXPECT_LE(std::abs(origins / total - p), 3 * sigma);
}
