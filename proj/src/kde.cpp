#include "kdelinalg/kde.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <string>

#include "kdelinalg/errors.hpp"
#include "kdelinalg/rng.hpp"

namespace kdelinalg {

void KdeParams::validate() const {
  if (!(eps > 0.0 && eps < 1.0)) throw ArgumentError("KDE eps must lie in (0,1)");
  if (!(mu > 0.0 && mu < 1.0)) throw ArgumentError("KDE mu must lie in (0,1)");
  if (!(fail_poly >= 1.0) || !std::isfinite(fail_poly)) throw ArgumentError("KDE fail_poly must be >= 1");
}

std::string_view to_string(KdeBackend backend) {
  return backend == KdeBackend::Exact ? "exact" : "sampling";
}

KdeBackend parse_backend(std::string_view name) {
  if (name == "exact") return KdeBackend::Exact;
  if (name == "sampling") return KdeBackend::Sampling;
  throw ArgumentError("unknown KDE backend: " + std::string(name));
}

double sampling_draws(const KdeParams& params, std::size_t population) {
  params.validate();
  const double n = static_cast<double>(std::max<std::size_t>(population, 2));
  return std::ceil(kSamplingConstant * std::log(n * params.fail_poly) /
                   (params.eps * params.eps * params.mu));
}

KdeEstimator::KdeEstimator(const KernelSpec& spec, PointSet S, const KdeParams& params,
                           std::uint64_t seed, std::size_t population)
    : spec_(spec), S_(std::move(S)), params_(params), seed_(seed),
      population_(population == 0 ? S_.n() : population) {
  spec_.validate();
  params_.validate();
  if (S_.n() == 0) throw ArgumentError("KDE base set is empty");
}

KdeAnswer KdeEstimator::query(Point q, std::uint64_t stream) const {
  if (q.size() != dim()) throw ArgumentError("KDE query: dimension mismatch");
  return do_query(q.data(), stream);
}

KdeAnswer ExactKde::do_query(const double* q, std::uint64_t) const {
  const std::size_t m = S_.n();
  double acc = 0.0;
  for (std::size_t j = 0; j < m; ++j) acc += spec_.unchecked(q, S_.data(j), S_.d());
  return {acc / static_cast<double>(m), static_cast<double>(m), m};
}

SamplingKde::SamplingKde(const KernelSpec& spec, PointSet S, const KdeParams& params,
                         std::uint64_t seed, std::size_t population)
    : KdeEstimator(spec, std::move(S), params, seed, population),
      draws_(sampling_draws(params_, population_)) {}

double SamplingKde::one_sided(double raw, const KdeParams& params) {
  return std::max(0.0, (raw + 0.5 * params.mu) * (1.0 + 0.5 * params.eps));
}

double SamplingKde::raw_mean(Point q, std::uint64_t stream, std::size_t* evals) const {
  if (q.size() != dim()) throw ArgumentError("KDE query: dimension mismatch");
  return raw_impl(q.data(), stream, evals);
}

double SamplingKde::raw_impl(const double* q, std::uint64_t stream, std::size_t* evals) const {
  constexpr double kCachedFactor = 32.0;
  const std::size_t m = S_.n();
  const std::size_t d = S_.d();
  const double md = static_cast<double>(m);
  SplitMix64 gen(derive_seed(seed_, stream));

  if (draws_ <= md) {
    const auto r = static_cast<std::size_t>(draws_);
    std::uniform_int_distribution<std::size_t> pick(0, m - 1);
    double acc = 0.0;
    for (std::size_t k = 0; k < r; ++k) acc += spec_.unchecked(q, S_.data(pick(gen)), d);
    if (evals) *evals = r;
    return acc / draws_;
  }

  std::vector<double> vals(m);
  for (std::size_t j = 0; j < m; ++j) vals[j] = spec_.unchecked(q, S_.data(j), d);
  if (evals) *evals = m;

  if (draws_ <= kCachedFactor * md) {
    const auto r = static_cast<std::size_t>(draws_);
    std::uniform_int_distribution<std::size_t> pick(0, m - 1);
    double acc = 0.0;
    for (std::size_t k = 0; k < r; ++k) acc += vals[pick(gen)];
    return acc / draws_;
  }

  double mean = 0.0, m2 = 0.0;
  double lo = vals[0], hi = vals[0];
  for (std::size_t j = 0; j < m; ++j) {
    const double delta = vals[j] - mean;
    mean += delta / static_cast<double>(j + 1);
    m2 += delta * (vals[j] - mean);
    lo = std::min(lo, vals[j]);
    hi = std::max(hi, vals[j]);
  }
  const double sd = std::sqrt(std::max(0.0, m2 / md) / draws_);
  std::normal_distribution<double> normal(0.0, 1.0);
  return std::clamp(mean + sd * normal(gen), lo, hi);
}

KdeAnswer SamplingKde::do_query(const double* q, std::uint64_t stream) const {
  std::size_t evals = 0;
  const double raw = raw_impl(q, stream, &evals);
  return {one_sided(raw, params_), draws_, evals};
}

std::unique_ptr<KdeEstimator> build_kde(KdeBackend backend, const KernelSpec& spec, PointSet S,
                                        const KdeParams& params, std::uint64_t seed,
                                        std::size_t population) {
  if (S.n() == 0) throw ArgumentError("KDE base set is empty");
  if (backend == KdeBackend::Exact)
    return std::make_unique<ExactKde>(spec, std::move(S), params, seed, population);
  return std::make_unique<SamplingKde>(spec, std::move(S), params, seed, population);
}

ExclusionKde::ExclusionKde(KdeBackend backend, const KernelSpec& spec, const PointSet& S,
                           const KdeParams& params, std::uint64_t seed, std::size_t population)
    : m_(S.n()), leaves_(std::bit_ceil(std::max<std::size_t>(S.n(), 1))), dim_(S.d()),
      params_(params) {
  params_.validate();
  if (m_ == 0) throw ArgumentError("KDE base set is empty");
  const double depth = std::max(1.0, std::log2(static_cast<double>(leaves_)));
  child_params_ = params_;
  child_params_.mu = params_.mu / (100.0 * depth);
  const std::size_t pop = population == 0 ? m_ : population;

  nodes_.resize(2 * leaves_);
  for (std::size_t k = nodes_.size() - 1; k >= 1; --k) {
    const int level = std::bit_width(k) - 1;
    const std::size_t span = leaves_ >> level;
    const std::size_t first = (k - (std::size_t{1} << level)) * span;
    nodes_[k].lo = std::min(first, m_);
    nodes_[k].hi = std::min(first + span, m_);
  }
  // The root never appears in a decomposition, so only proper subtrees get an estimator.
  std::vector<std::size_t> idx;
  for (std::size_t k = 2; k < nodes_.size(); ++k) {
    Node& node = nodes_[k];
    if (node.hi <= node.lo) continue;
    idx.resize(node.hi - node.lo);
    for (std::size_t i = node.lo; i < node.hi; ++i) idx[i - node.lo] = i;
    node.est = build_kde(backend, spec, S.subset(idx), child_params_, derive_seed(seed, k), pop);
  }
}

std::vector<std::pair<std::size_t, std::size_t>> ExclusionKde::decomposition(std::size_t skip) const {
  if (skip >= m_) throw ArgumentError("query_excluding: skip index out of range");
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t k = leaves_ + skip; k > 1; k >>= 1) {
    const Node& sib = nodes_[k ^ 1];
    if (sib.hi > sib.lo) out.emplace_back(sib.lo, sib.hi);
  }
  std::sort(out.begin(), out.end());
  return out;
}

KdeAnswer ExclusionKde::query_excluding(Point q, std::size_t skip, std::uint64_t stream) const {
  if (skip >= m_) throw ArgumentError("query_excluding: skip index out of range");
  if (q.size() != dim_) throw ArgumentError("KDE query: dimension mismatch");
  KdeAnswer out;
  double weighted = 0.0;
  std::size_t count = 0;
  for (std::size_t k = leaves_ + skip; k > 1; k >>= 1) {
    const Node& sib = nodes_[k ^ 1];
    if (sib.hi <= sib.lo) continue;
    const KdeAnswer a = sib.est->query(q, derive_seed(stream, k ^ 1));
    const std::size_t c = sib.hi - sib.lo;
    weighted += static_cast<double>(c) * a.value;
    count += c;
    out.work += a.work;
    out.kernel_evals += a.kernel_evals;
  }
  out.value = count == 0 ? 0.0 : weighted / static_cast<double>(count);
  return out;
}

}  // namespace kdelinalg
