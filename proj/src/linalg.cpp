#include "kdelinalg/linalg.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>

#include "kdelinalg/errors.hpp"
#include "kdelinalg/rng.hpp"

namespace kdelinalg {

namespace {

void check_eps(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw ArgumentError("eps must lie in (0,1)");
}

void check_nonneg(const double* v, std::size_t len, const char* what) {
  for (std::size_t i = 0; i < len; ++i) {
    if (!std::isfinite(v[i])) throw ArgumentError(std::string(what) + " has a non-finite entry");
    if (v[i] < 0.0) throw ArgumentError(std::string(what) + " has a negative entry");
  }
}

}  // namespace

std::size_t BucketPlan::bucket_of(double v) const {
  if (!(v > 0.0) || v < drop_threshold) return 0;
  // First k >= 1 with levels[k] < v.
  const auto first = levels.begin() + 1;
  const auto it = std::partition_point(first, levels.end(), [v](double lv) { return lv >= v; });
  if (it == levels.end()) return 0;
  return static_cast<std::size_t>(it - levels.begin());
}

BucketPlan make_bucket_plan(std::size_t n, double eps, const MvpOptions& opts) {
  check_eps(eps);
  if (n == 0) throw ArgumentError("empty point set");
  if (!(opts.bucket_constant > 0.0) || !(opts.precision_split >= 1.0))
    throw ArgumentError("invalid MVP constants");
  BucketPlan plan;
  plan.gamma = eps / opts.precision_split;
  const double nd = static_cast<double>(n);
  plan.b = static_cast<std::size_t>(
      std::ceil(opts.bucket_constant * std::log(std::max(nd, 2.0) / plan.gamma) / plan.gamma));
  plan.ratio = 1.0 - 0.5 * plan.gamma;
  plan.drop_threshold = plan.gamma / (static_cast<double>(plan.b + 1) * nd * std::sqrt(nd));
  plan.levels.resize(plan.b + 1);
  for (std::size_t k = 0; k <= plan.b; ++k) plan.levels[k] = std::pow(plan.ratio, static_cast<double>(k));
  return plan;
}

int scale_class(double level, std::size_t n, bool* above) {
  const double root = std::sqrt(static_cast<double>(n));
  const double up = level * root;
  if (above) *above = up >= 1.0;
  const double ratio = up >= 1.0 ? up : 1.0 / up;
  const auto whole = static_cast<std::uint64_t>(std::floor(ratio));
  return std::bit_width(whole) - 1;
}

MvpResult nonneg_mvp(const KernelSpec& spec, const PointSet& X, const Eigen::VectorXd& y, double eps,
                     const MvpOptions& opts) {
  spec.validate();
  check_eps(eps);
  const std::size_t n = X.n();
  if (static_cast<std::size_t>(y.size()) != n) throw ArgumentError("nonneg_mvp: length mismatch");
  check_nonneg(y.data(), n, "y");
  const double norm = y.norm();
  if (!(norm > 0.0)) throw ArgumentError("nonneg_mvp: y must be non-zero");

  const BucketPlan plan = make_bucket_plan(n, eps, opts);
  MvpResult res;
  res.eps = eps;
  res.internal_eps = plan.gamma;
  res.bucket_count = plan.b;
  res.drop_threshold = std::max(plan.drop_threshold, plan.levels.back());
  res.input_norm = norm;
  res.z = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));

  std::map<std::size_t, std::vector<std::size_t>> members;
  for (std::size_t j = 0; j < n; ++j) {
    if (y[j] == 0.0) continue;
    const double v = y[j] / norm;
    const std::size_t i = plan.bucket_of(v);
    if (i == 0) {
      ++res.dropped;
      res.dropped_mass += v;
    } else {
      members[i].push_back(j);
    }
  }

  const double nd = static_cast<double>(n);
  const double gamma_prime = plan.gamma / static_cast<double>(plan.b);
  for (const auto& [i, idx] : members) {
    BucketInfo info;
    info.index = i;
    info.level = plan.levels[i - 1];
    info.cardinality = idx.size();
    info.t = scale_class(info.level, n);
    info.mu = std::ldexp(gamma_prime, info.t) / (opts.bucket_constant * nd);

    const KdeParams params{plan.gamma, info.mu, opts.fail_poly};
    const auto est = build_kde(opts.backend, spec, X.subset(idx), params, derive_seed(opts.seed, i), n);
    const double scale = info.level * static_cast<double>(idx.size()) * (1.0 + plan.gamma);
    for (std::size_t j = 0; j < n; ++j) {
      const KdeAnswer a = est->query(X.row(j), j);
      res.z[static_cast<Eigen::Index>(j)] += scale * a.value;
      info.work += a.work;
      res.kernel_evals += a.kernel_evals;
    }
    res.total_work += info.work;
    res.buckets.push_back(info);
  }

  // Dropped entries are tiny; charging their full mass to every coordinate
  // (kernel values are at most 1) keeps the error one-sided.
  if (res.dropped_mass > 0.0) res.z.array() += res.dropped_mass;
  res.z *= norm;
  return res;
}

MatmulResult kernel_matmul(const KernelSpec& spec, const PointSet& X, const Eigen::MatrixXd& A,
                           double eps, const MvpOptions& opts) {
  check_eps(eps);
  const auto n = static_cast<Eigen::Index>(X.n());
  if (A.rows() != n) throw ArgumentError("kernel_matmul: row count mismatch");
  check_nonneg(A.data(), static_cast<std::size_t>(A.size()), "A");
  MatmulResult res;
  res.B = Eigen::MatrixXd::Zero(n, A.cols());
  for (Eigen::Index c = 0; c < A.cols(); ++c) {
    if (!(A.col(c).maxCoeff() > 0.0)) continue;
    MvpOptions col_opts = opts;
    col_opts.seed = derive_seed(opts.seed, static_cast<std::uint64_t>(c));
    const MvpResult r = nonneg_mvp(spec, X, A.col(c), eps, col_opts);
    res.B.col(c) = r.z;
    res.total_work += r.total_work;
    res.kernel_evals += r.kernel_evals;
  }
  return res;
}

QuadformResult quadform(const KernelSpec& spec, const PointSet& X, const Eigen::VectorXd& v, double eps,
                        const MvpOptions& opts) {
  const MvpResult r = nonneg_mvp(spec, X, v, eps, opts);
  return {v.dot(r.z), r.total_work, r.kernel_evals};
}

}  // namespace kdelinalg
