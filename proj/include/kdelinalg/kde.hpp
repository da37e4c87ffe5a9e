#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string_view>
#include <vector>

#include "kdelinalg/kernels.hpp"

namespace kdelinalg {

struct KdeParams {
  double eps = 0.1;       // multiplicative error, in (0,1)
  double mu = 0.01;       // additive error, in (0,1)
  double fail_poly = 1.0; // per-query failure target n^-fail_poly, >= 1

  void validate() const;
};

enum class KdeBackend { Exact, Sampling };

std::string_view to_string(KdeBackend backend);
KdeBackend parse_backend(std::string_view name);

struct KdeAnswer {
  double value = 0.0;          // one-sided estimate of the mean kernel value
  double work = 0.0;           // nominal kernel evaluations (sample count r, or |S|)
  std::size_t kernel_evals = 0;  // evaluations actually performed
};

// Sample-count constant of the uniform sampling backend.
inline constexpr double kSamplingConstant = 3.0;

// r = ceil(c0 * ln(max(n,2) * fail_poly) / (eps^2 mu)).
double sampling_draws(const KdeParams& params, std::size_t population);

// Estimates (1/|S|) sum_{x in S} k(q, x) with the one-sided guarantee
//   mean <= value <= (1+eps) mean + mu   (w.p. >= 1 - n^-fail_poly).
// Immutable after construction; query() is safe to call concurrently.
class KdeEstimator {
 public:
  KdeEstimator(const KernelSpec& spec, PointSet S, const KdeParams& params, std::uint64_t seed,
               std::size_t population);
  virtual ~KdeEstimator() = default;

  // `stream` selects an independent random stream; equal (seed, stream)
  // reproduce the same answer.
  KdeAnswer query(Point q, std::uint64_t stream = 0) const;

  virtual KdeBackend backend() const = 0;
  virtual double backend_p() const = 0;

  std::size_t size() const { return S_.n(); }
  std::size_t dim() const { return S_.d(); }
  const PointSet& base_set() const { return S_; }
  const KdeParams& params() const { return params_; }
  const KernelSpec& kernel() const { return spec_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t population() const { return population_; }

 protected:
  virtual KdeAnswer do_query(const double* q, std::uint64_t stream) const = 0;

  KernelSpec spec_;
  PointSet S_;
  KdeParams params_;
  std::uint64_t seed_;
  std::size_t population_;
};

class ExactKde final : public KdeEstimator {
 public:
  using KdeEstimator::KdeEstimator;
  KdeBackend backend() const override { return KdeBackend::Exact; }
  double backend_p() const override { return 0.0; }

 protected:
  KdeAnswer do_query(const double* q, std::uint64_t stream) const override;
};

// Uniform sampling with replacement (p = 1).
//
// The nominal sample count r is usually far larger than |S|. Three regimes:
//   r <= |S|        draw r indices and evaluate each;
//   r <= 32 |S|     evaluate all |S| kernel values once, then draw r indices
//                   from the cached values (same law as direct sampling);
//   otherwise       draw the sample mean from its normal limit
//                   N(mean, var/r), clamped to [min, max] of the kernel values.
// `work` always reports r.
class SamplingKde final : public KdeEstimator {
 public:
  SamplingKde(const KernelSpec& spec, PointSet S, const KdeParams& params, std::uint64_t seed,
              std::size_t population);
  KdeBackend backend() const override { return KdeBackend::Sampling; }
  double backend_p() const override { return 1.0; }
  double draws() const { return draws_; }

  // Raw sample mean before the one-sided correction.
  double raw_mean(Point q, std::uint64_t stream, std::size_t* evals = nullptr) const;

  // (raw + mu/2)(1 + eps/2)
  static double one_sided(double raw, const KdeParams& params);

 protected:
  KdeAnswer do_query(const double* q, std::uint64_t stream) const override;

 private:
  double raw_impl(const double* q, std::uint64_t stream, std::size_t* evals) const;

  double draws_;
};

// population: the n in ln(n * fail_poly); 0 means |S|.
std::unique_ptr<KdeEstimator> build_kde(KdeBackend backend, const KernelSpec& spec, PointSet S,
                                        const KdeParams& params, std::uint64_t seed,
                                        std::size_t population = 0);

// Answers mean queries over S \ {x_skip}. A complete binary tree over S
// (padded to a power of two with empty leaves) holds one estimator per
// non-empty node with additive error mu / (100 log2 m); S \ {x_skip} is the
// disjoint union of the siblings along the root-to-leaf path.
class ExclusionKde {
 public:
  ExclusionKde(KdeBackend backend, const KernelSpec& spec, const PointSet& S, const KdeParams& params,
               std::uint64_t seed, std::size_t population = 0);

  KdeAnswer query_excluding(Point q, std::size_t skip, std::uint64_t stream = 0) const;

  // Half-open index ranges [first, second) whose union is S \ {skip}.
  std::vector<std::pair<std::size_t, std::size_t>> decomposition(std::size_t skip) const;

  std::size_t size() const { return m_; }
  double child_mu() const { return child_params_.mu; }
  const KdeParams& params() const { return params_; }

 private:
  struct Node {
    std::size_t lo = 0, hi = 0;  // clipped to [0, m)
    std::unique_ptr<KdeEstimator> est;
  };

  std::size_t m_;
  std::size_t leaves_;  // power of two >= m
  std::size_t dim_;
  KdeParams params_;
  KdeParams child_params_;
  std::vector<Node> nodes_;  // heap layout, root at 1
};

}  // namespace kdelinalg
