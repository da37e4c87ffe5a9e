#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace kdelinalg {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Point = std::span<const double>;

enum class KernelFamily { Gaussian, Exponential, Laplacian, RationalQuadratic };

std::string_view to_string(KernelFamily family);
KernelFamily parse_kernel_family(std::string_view name);

// KDE exponent p of the best known data structure for the family. Recorded as
// metadata only; the backends built here have p = 1 (sampling) or 0 (exact).
double kde_exponent(KernelFamily family);

struct KernelSpec {
  KernelFamily family = KernelFamily::Gaussian;
  double bandwidth_scale = 1.0;
  double rq_beta = 1.0;  // RationalQuadratic only

  void validate() const;

  // No argument checks; callers guarantee equal dimension and finite input.
  double unchecked(const double* x, const double* y, std::size_t d) const;
};

// n points in d dimensions, stored row-major. Coordinates must be finite.
class PointSet {
 public:
  PointSet() = default;
  explicit PointSet(RowMatrix coords);
  PointSet(std::size_t n, std::size_t d, std::vector<double> flat);

  std::size_t n() const { return static_cast<std::size_t>(coords_.rows()); }
  std::size_t d() const { return static_cast<std::size_t>(coords_.cols()); }
  const RowMatrix& coords() const { return coords_; }
  const double* data(std::size_t i) const { return coords_.data() + i * d(); }
  Point row(std::size_t i) const { return {data(i), d()}; }

  PointSet subset(std::span<const std::size_t> indices) const;

 private:
  RowMatrix coords_;
};

double kernel_eval(const KernelSpec& spec, Point x, Point y);

// Brute-force oracles. Sizes above the cap raise CapacityError.
std::size_t default_oracle_cap();  // KDELINALG_ORACLE_CAP or 5000

Eigen::VectorXd exact_matvec(const KernelSpec& spec, const PointSet& X, const Eigen::VectorXd& y);
Eigen::MatrixXd kernel_matrix(const KernelSpec& spec, const PointSet& X,
                              std::size_t cap = default_oracle_cap());
double exact_sum(const KernelSpec& spec, const PointSet& X, std::size_t cap = default_oracle_cap());

struct TopEigen {
  double value = 0.0;
  Eigen::VectorXd vector;  // unit norm, entrywise >= 0
};

TopEigen exact_top_eig(const KernelSpec& spec, const PointSet& X,
                       std::size_t cap = default_oracle_cap());
TopEigen top_eig_of(const Eigen::MatrixXd& K);

}  // namespace kdelinalg
