#include "kdelinalg/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include <Eigen/Eigenvalues>

#include "kdelinalg/errors.hpp"

namespace kdelinalg {

std::string_view to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::Gaussian: return "gaussian";
    case KernelFamily::Exponential: return "exponential";
    case KernelFamily::Laplacian: return "laplacian";
    case KernelFamily::RationalQuadratic: return "rational_quadratic";
  }
  return "unknown";
}

KernelFamily parse_kernel_family(std::string_view name) {
  if (name == "gaussian") return KernelFamily::Gaussian;
  if (name == "exponential") return KernelFamily::Exponential;
  if (name == "laplacian") return KernelFamily::Laplacian;
  if (name == "rational_quadratic" || name == "rq") return KernelFamily::RationalQuadratic;
  throw ArgumentError("unknown kernel family: " + std::string(name));
}

double kde_exponent(KernelFamily family) {
  switch (family) {
    case KernelFamily::Gaussian: return 0.173;
    case KernelFamily::Exponential: return 0.1;
    case KernelFamily::Laplacian: return 0.5;
    case KernelFamily::RationalQuadratic: return 0.0;
  }
  return 1.0;
}

void KernelSpec::validate() const {
  if (!(bandwidth_scale > 0.0) || !std::isfinite(bandwidth_scale))
    throw ArgumentError("bandwidth_scale must be positive and finite");
  if (family == KernelFamily::RationalQuadratic && (!(rq_beta > 0.0) || !std::isfinite(rq_beta)))
    throw ArgumentError("rq_beta must be positive and finite");
}

double KernelSpec::unchecked(const double* x, const double* y, std::size_t d) const {
  double acc = 0.0;
  switch (family) {
    case KernelFamily::Gaussian:
      for (std::size_t k = 0; k < d; ++k) {
        const double t = x[k] - y[k];
        acc += t * t;
      }
      return std::exp(-bandwidth_scale * acc);
    case KernelFamily::Exponential:
      for (std::size_t k = 0; k < d; ++k) {
        const double t = x[k] - y[k];
        acc += t * t;
      }
      return std::exp(-bandwidth_scale * std::sqrt(acc));
    case KernelFamily::Laplacian:
      for (std::size_t k = 0; k < d; ++k) acc += std::abs(x[k] - y[k]);
      return std::exp(-bandwidth_scale * acc);
    case KernelFamily::RationalQuadratic:
      for (std::size_t k = 0; k < d; ++k) {
        const double t = x[k] - y[k];
        acc += t * t;
      }
      return std::pow(1.0 + bandwidth_scale * acc, -rq_beta);
  }
  return 0.0;
}

namespace {

void require_finite(const double* p, std::size_t len, const char* what) {
  for (std::size_t i = 0; i < len; ++i)
    if (!std::isfinite(p[i])) throw ArgumentError(std::string(what) + " has a non-finite coordinate");
}

void check_cap(std::size_t n, std::size_t cap) {
  if (n > cap)
    throw CapacityError("oracle requested for n=" + std::to_string(n) + " above cap " +
                        std::to_string(cap));
}

}  // namespace

PointSet::PointSet(RowMatrix coords) : coords_(std::move(coords)) {
  if (coords_.rows() < 1 || coords_.cols() < 1) throw ArgumentError("PointSet needs n >= 1 and d >= 1");
  require_finite(coords_.data(), static_cast<std::size_t>(coords_.size()), "PointSet");
}

PointSet::PointSet(std::size_t n, std::size_t d, std::vector<double> flat) {
  if (n < 1 || d < 1) throw ArgumentError("PointSet needs n >= 1 and d >= 1");
  if (flat.size() != n * d) throw ArgumentError("PointSet data length does not match n*d");
  coords_ = Eigen::Map<RowMatrix>(flat.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  require_finite(coords_.data(), flat.size(), "PointSet");
}

PointSet PointSet::subset(std::span<const std::size_t> indices) const {
  if (indices.empty()) throw ArgumentError("empty subset");
  RowMatrix out(static_cast<Eigen::Index>(indices.size()), coords_.cols());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    if (indices[r] >= n()) throw ArgumentError("subset index out of range");
    out.row(static_cast<Eigen::Index>(r)) = coords_.row(static_cast<Eigen::Index>(indices[r]));
  }
  return PointSet(std::move(out));
}

double kernel_eval(const KernelSpec& spec, Point x, Point y) {
  spec.validate();
  if (x.size() != y.size()) throw ArgumentError("kernel_eval: dimension mismatch");
  if (x.empty()) throw ArgumentError("kernel_eval: empty point");
  require_finite(x.data(), x.size(), "x");
  require_finite(y.data(), y.size(), "y");
  return spec.unchecked(x.data(), y.data(), x.size());
}

std::size_t default_oracle_cap() {
  if (const char* env = std::getenv("KDELINALG_ORACLE_CAP")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return 5000;
}

Eigen::VectorXd exact_matvec(const KernelSpec& spec, const PointSet& X, const Eigen::VectorXd& y) {
  spec.validate();
  const std::size_t n = X.n();
  if (static_cast<std::size_t>(y.size()) != n) throw ArgumentError("exact_matvec: length mismatch");
  require_finite(y.data(), n, "y");
  Eigen::VectorXd out(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += spec.unchecked(X.data(i), X.data(j), X.d()) * y[j];
    out[i] = acc;
  }
  return out;
}

Eigen::MatrixXd kernel_matrix(const KernelSpec& spec, const PointSet& X, std::size_t cap) {
  spec.validate();
  check_cap(X.n(), cap);
  const auto n = static_cast<Eigen::Index>(X.n());
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    K(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = spec.unchecked(X.data(i), X.data(j), X.d());
      K(i, j) = v;
      K(j, i) = v;
    }
  }
  return K;
}

double exact_sum(const KernelSpec& spec, const PointSet& X, std::size_t cap) {
  spec.validate();
  check_cap(X.n(), cap);
  const std::size_t n = X.n();
  double off = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) row += spec.unchecked(X.data(i), X.data(j), X.d());
    off += row;
  }
  return static_cast<double>(n) + 2.0 * off;
}

TopEigen top_eig_of(const Eigen::MatrixXd& K) {
  const auto n = K.rows();
  if (n < 1 || K.cols() != n) throw ArgumentError("top_eig_of: need a square non-empty matrix");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(K);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigen-decomposition failed");
  const Eigen::VectorXd& vals = solver.eigenvalues();  // ascending
  const double top = vals[n - 1];

  // Project the all-ones vector onto the top eigenspace. For a non-negative PSD
  // matrix this is the limit of normalized K^t 1, hence entrywise >= 0, even
  // when the top eigenvalue is repeated.
  const double tol = 1e-10 * std::max(std::abs(top), 1.0);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  for (Eigen::Index k = n - 1; k >= 0 && top - vals[k] <= tol; --k) {
    const auto col = solver.eigenvectors().col(k);
    v += col.dot(ones) * col;
  }
  if (!(v.norm() > 0.0)) {
    v = solver.eigenvectors().col(n - 1);
    if (v.sum() < 0.0) v = -v;
  }
  v = v.cwiseMax(0.0);
  v /= v.norm();
  return {top, v};
}

TopEigen exact_top_eig(const KernelSpec& spec, const PointSet& X, std::size_t cap) {
  return top_eig_of(kernel_matrix(spec, X, cap));
}

}  // namespace kdelinalg
