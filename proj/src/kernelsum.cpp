#include "kdelinalg/kernelsum.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iterator>
#include <random>

#include "kdelinalg/errors.hpp"
#include "kdelinalg/rng.hpp"

namespace kdelinalg {

namespace {

enum Stream : std::uint64_t { kLevelOne = 1, kHeavyTest, kHeavyRows, kHeavyBlock, kLevelTwo, kLight };

std::vector<std::size_t> bernoulli_subset(const std::vector<std::size_t>& from, double q, std::uint64_t seed) {
  if (q >= 1.0) return from;
  std::mt19937_64 gen(seed);
  std::bernoulli_distribution keep(q);
  std::vector<std::size_t> out;
  for (std::size_t i : from)
    if (keep(gen)) out.push_back(i);
  return out;
}

// sum_{b in idx} (|idx| - 1) * D_{idx \ b}(b), one exclusion structure over idx.
double excluded_row_sums(KdeBackend backend, const KernelSpec& spec, const PointSet& X,
                         const std::vector<std::size_t>& idx, const KdeParams& params, std::uint64_t seed,
                         std::size_t population, SumEstimate& acct) {
  if (idx.size() < 2) return 0.0;
  const PointSet sub = X.subset(idx);
  const ExclusionKde ex(backend, spec, sub, params, seed, population);
  const double rest = static_cast<double>(idx.size() - 1);
  double total = 0.0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const KdeAnswer a = ex.query_excluding(sub.row(k), k, k);
    total += rest * a.value;
    acct.total_work += a.work;
    acct.kernel_evals += a.kernel_evals;
  }
  return total;
}

}  // namespace

double level_one_rate(std::size_t n, double eps, double C) {
  return std::min(C / (eps * eps * std::sqrt(static_cast<double>(n))), 1.0);
}

SumEstimate kernel_sum(const KernelSpec& spec, const PointSet& X, double eps, std::uint64_t seed,
                       const KernelSumOptions& opts) {
  spec.validate();
  if (!(eps > 0.0 && eps < 1.0)) throw ArgumentError("kernel_sum: eps must lie in (0,1)");
  if (X.n() < 2) throw ArgumentError("kernel_sum: need n >= 2");
  if (!(opts.C >= 1.0)) throw ArgumentError("kernel_sum: C must be >= 1");
  if (opts.q1 < 0.0 || opts.q1 > 1.0 || opts.q2 < 0.0 || opts.q2 > 1.0)
    throw ArgumentError("kernel_sum: sampling rates must lie in (0,1]");

  const std::size_t n = X.n();
  const double C = opts.C;
  SumEstimate est;
  est.n = n;
  est.kde_eps = eps / C;
  est.q1 = opts.q1 > 0.0 ? opts.q1 : level_one_rate(n, eps, C);

  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  est.A = bernoulli_subset(all, est.q1, derive_seed(seed, kLevelOne));
  est.m = est.A.size();
  if (est.m < 2) {
    est.q2 = opts.q2 > 0.0 ? opts.q2 : 1.0;
    est.value = static_cast<double>(n);
    return est;
  }
  const double m = static_cast<double>(est.m);
  est.tau = 1.0 / (C * m * eps * eps * eps);
  est.mu = std::min(eps * est.tau / C, 0.5);
  est.q2 = opts.q2 > 0.0 ? opts.q2 : std::min(C * std::pow(eps, 1.5) * std::sqrt(m * est.tau), 1.0);

  // Heavy rows of K_A.
  const KdeParams heavy_params{est.kde_eps, est.mu, opts.fail_poly};
  const PointSet XA = X.subset(est.A);
  {
    const ExclusionKde ex(opts.backend, spec, XA, heavy_params, derive_seed(seed, kHeavyTest), n);
    const double threshold = est.tau * m;
    for (std::size_t k = 0; k < est.m; ++k) {
      const KdeAnswer a = ex.query_excluding(XA.row(k), k, k);
      est.total_work += a.work;
      est.kernel_evals += a.kernel_evals;
      if ((m - 1.0) * a.value >= threshold) est.B.push_back(est.A[k]);
    }
  }
  est.heavy_count = est.B.size();

  if (!est.B.empty()) {
    // S2: heavy rows against all of A; S1: heavy rows against B.
    const ExclusionKde ex(opts.backend, spec, XA, heavy_params, derive_seed(seed, kHeavyRows), n);
    std::size_t pos = 0;
    for (std::size_t b : est.B) {
      while (est.A[pos] != b) ++pos;
      const KdeAnswer a = ex.query_excluding(XA.row(pos), pos, pos);
      est.s2_hat += (m - 1.0) * a.value;
      est.total_work += a.work;
      est.kernel_evals += a.kernel_evals;
    }
    est.s1_hat = excluded_row_sums(opts.backend, spec, X, est.B, heavy_params, derive_seed(seed, kHeavyBlock), n,
                                   est);
  }
  est.s3_hat = 2.0 * est.s2_hat - est.s1_hat;

  // Light part: resample A \ B.
  std::vector<std::size_t> light;
  std::set_difference(est.A.begin(), est.A.end(), est.B.begin(), est.B.end(), std::back_inserter(light));
  est.B_prime = bernoulli_subset(light, est.q2, derive_seed(seed, kLevelTwo));
  est.mprime = est.B_prime.size();
  if (est.mprime >= 2) {
    const double mp = static_cast<double>(est.mprime);
    const double scale = est.q1 * est.q1 * est.q2 * est.q2;
    est.mu_prime = std::min(eps * static_cast<double>(n) * scale / (C * mp * (mp - 1.0)), 0.5);
    const KdeParams light_params{est.kde_eps, est.mu_prime, opts.fail_poly};
    est.s4_hat = excluded_row_sums(opts.backend, spec, X, est.B_prime, light_params, derive_seed(seed, kLight),
                                   n, est);
  }

  est.value = static_cast<double>(n) + (est.s3_hat + est.s4_hat / (est.q2 * est.q2)) / (est.q1 * est.q1);
  return est;
}

MedianSumEstimate kernel_sum_median(const KernelSpec& spec, const PointSet& X, double eps, std::uint64_t seed,
                                    std::size_t trials, const KernelSumOptions& opts) {
  if (trials == 0)
    trials = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::log(static_cast<double>(X.n())))));
  MedianSumEstimate out;
  for (std::size_t t = 0; t < trials; ++t) {
    const SumEstimate e = kernel_sum(spec, X, eps, derive_seed(seed, t), opts);
    out.trials.push_back(e.value);
    out.total_work += e.total_work;
    out.kernel_evals += e.kernel_evals;
  }
  std::vector<double> v = out.trials;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  out.value = v.size() % 2 == 1 ? v[h] : 0.5 * (v[h - 1] + v[h]);
  return out;
}

double submatrix_sum_estimator(const KernelSpec& spec, const PointSet& X, double q, std::uint64_t seed) {
  spec.validate();
  if (!(q > 0.0 && q <= 1.0)) throw ArgumentError("submatrix_sum_estimator: q must lie in (0,1]");
  const std::size_t n = X.n();
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  const std::vector<std::size_t> A = bernoulli_subset(all, q, seed);
  double off = 0.0;
  for (std::size_t a = 0; a < A.size(); ++a) {
    double row = 0.0;
    for (std::size_t b = a + 1; b < A.size(); ++b) row += spec.unchecked(X.data(A[a]), X.data(A[b]), X.d());
    off += row;
  }
  return static_cast<double>(n) + 2.0 * off / (q * q);
}

double dp_default_scale(const KernelSpec& spec) {
  spec.validate();
  constexpr double kTarget = 1e-12;
  // Support points of D(p) realize two distances: origin to basis vector and
  // basis to basis. Three planar points reproduce both under every family.
  const auto worst = [&spec](double s) {
    const std::array<double, 2> o{0.0, 0.0}, a{s, 0.0}, b{0.0, s};
    return std::max(spec.unchecked(o.data(), a.data(), 2), spec.unchecked(a.data(), b.data(), 2));
  };
  double lo = 0.0, hi = 1.0;
  while (!(worst(hi) < kTarget)) {
    hi *= 2.0;
    if (!std::isfinite(hi)) throw ArgumentError("dp_default_scale: kernel never decays below 1e-12");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (worst(mid) < kTarget ? hi : lo) = mid;
  }
  return hi;
}

DpSample draw_dp_labels(std::size_t n, double p, double scale, std::uint64_t seed) {
  if (n < 1) throw ArgumentError("D(p): n must be positive");
  if (!(p >= 0.0 && p <= 1.0)) throw ArgumentError("D(p): p must lie in [0,1]");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ArgumentError("D(p): scale must be positive");
  DpSample s;
  s.n = n;
  s.scale = scale;
  s.labels.resize(n);
  std::mt19937_64 gen(seed);
  std::bernoulli_distribution origin(p);
  std::uniform_int_distribution<long> basis(0, static_cast<long>(n) - 1);
  for (auto& l : s.labels) l = origin(gen) ? -1 : basis(gen);
  return s;
}

PointSet materialize(const DpSample& sample) {
  if (sample.n > kDpMaterializeCap)
    throw CapacityError("D(p) points live in R^n; materialization is capped at n = 10000");
  const auto n = static_cast<Eigen::Index>(sample.n);
  RowMatrix coords = RowMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const long l = sample.labels[static_cast<std::size_t>(i)];
    if (l >= 0) coords(i, l) = sample.scale;
  }
  return PointSet(std::move(coords));
}

double dp_kernel_sum(const KernelSpec& spec, const DpSample& sample) {
  spec.validate();
  const double s = sample.scale;
  const std::array<double, 2> o{0.0, 0.0}, a{s, 0.0}, b{0.0, s};
  const double k_ob = spec.unchecked(o.data(), a.data(), 2);
  const double k_bb = spec.unchecked(a.data(), b.data(), 2);

  std::vector<double> count(sample.n, 0.0);
  double at_origin = 0.0;
  for (long l : sample.labels) (l < 0 ? at_origin : count[static_cast<std::size_t>(l)]) += 1.0;
  const double on_basis = static_cast<double>(sample.labels.size()) - at_origin;
  double same_basis = 0.0;
  for (double c : count) same_basis += c * c;
  return at_origin * at_origin + same_basis + 2.0 * at_origin * on_basis * k_ob +
         (on_basis * on_basis - same_basis) * k_bb;
}

PointSet generate_dp_dataset(std::size_t n, double p, double scale, std::uint64_t seed) {
  if (n > kDpMaterializeCap) throw CapacityError("D(p) generation is capped at n = 10000");
  if (!(scale > 0.0)) scale = dp_default_scale(KernelSpec{});
  return materialize(draw_dp_labels(n, p, scale, seed));
}

}  // namespace kdelinalg
