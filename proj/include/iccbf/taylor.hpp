// Truncated multivariate Taylor-polynomial arithmetic with conservative
// interval enclosure over centered hyper-rectangles.
#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace iccbf {

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct SingularDomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
  double mag() const { return std::max(std::abs(lo), std::abs(hi)); }
  bool contains(double x) const { return x >= lo && x <= hi; }
  bool straddles_zero() const { return lo < 0.0 && hi > 0.0; }
};

Interval operator+(Interval a, Interval b);
Interval operator*(Interval a, Interval b);
// Enclosure of x^e for x in [a.lo, a.hi], integer e >= 0.
Interval interval_pow(Interval a, int e);

struct BoxDomain {
  Eigen::VectorXd center;
  Eigen::VectorXd half_widths;

  BoxDomain() = default;
  BoxDomain(Eigen::VectorXd c, Eigen::VectorXd hw);

  int dim() const { return static_cast<int>(center.size()); }
  bool contains(const Eigen::VectorXd& x) const;
};

// Shared monomial index tables for a fixed (n_vars, max total degree).
class MonomialBasis {
 public:
  static constexpr int kMaxVars = 8;
  using Exponents = std::array<uint8_t, kMaxVars>;

  static std::shared_ptr<const MonomialBasis> get(int n_vars, int order);

  int n_vars() const { return n_vars_; }
  int order() const { return order_; }
  int size() const { return size_; }
  const Exponents& exponents(int i) const { return exps_[i]; }
  int degree(int i) const { return degree_[i]; }
  // Index of the monomial with the given exponents, -1 if above order.
  int index_of(const Exponents& e) const;
  // prod_table[i * size + j]: index of monomial i*j, or -1 if truncated.
  const std::vector<int32_t>& product_table() const { return prod_; }
  // Index after lowering exponent of `var` by one; -1 if exponent is zero.
  int lower_index(int i, int var) const { return lower_[i * n_vars_ + var]; }

 private:
  MonomialBasis(int n_vars, int order);

  int n_vars_;
  int order_;
  int size_;
  std::vector<Exponents> exps_;
  std::vector<uint8_t> degree_;
  std::vector<int32_t> prod_;
  std::vector<int32_t> lower_;
  std::vector<uint64_t> keys_;  // sorted packed exponents
  std::vector<int32_t> key_index_;
};

// Polynomial in the shifted variables dx_i, each ranging over
// [-zeta_i, zeta_i]. Values are immutable after construction; all
// operations return new polynomials truncated to the carried order.
class TaylorPoly {
 public:
  TaylorPoly() = default;

  static TaylorPoly constant(double value, const Eigen::VectorXd& zeta, int order);
  // center_i + dx_i as a polynomial.
  static TaylorPoly variable(int var, double center, const Eigen::VectorXd& zeta, int order);
  // Seed polynomials x_i = center_i + dx_i for every variable.
  static std::vector<TaylorPoly> variables(const Eigen::VectorXd& center,
                                           const Eigen::VectorXd& zeta, int order);

  bool empty() const { return basis_ == nullptr; }
  int n_vars() const { return basis_->n_vars(); }
  int order() const { return basis_->order(); }
  const Eigen::VectorXd& zeta() const { return zeta_; }
  const MonomialBasis& basis() const { return *basis_; }

  double constant_term() const { return coeffs_.empty() ? 0.0 : coeffs_[0]; }
  const std::vector<double>& coeffs() const { return coeffs_; }
  double coeff(const MonomialBasis::Exponents& e) const;
  double max_abs_coeff() const;
  bool is_zero(double tol = 0.0) const;

  // Formal partial derivative with respect to variable `var`.
  TaylorPoly derive(int var) const;

  // Value at a shifted point dx (no domain check).
  double eval(std::span<const double> dx) const;

  // Conservative monomial-wise range enclosure over the carried domain,
  // or over an alternative centered box with the given half-widths.
  Interval bound() const;
  Interval bound(const Eigen::VectorXd& half_widths) const;
  // One dyadic subdivision pass (each axis split once). Never wider
  // than bound().
  Interval bound_refined() const;

  TaylorPoly& operator+=(const TaylorPoly& rhs);
  TaylorPoly& operator-=(const TaylorPoly& rhs);
  TaylorPoly& operator+=(double rhs);
  TaylorPoly& operator-=(double rhs);
  TaylorPoly& operator*=(double rhs);

  friend TaylorPoly operator+(TaylorPoly a, const TaylorPoly& b) { return a += b; }
  friend TaylorPoly operator-(TaylorPoly a, const TaylorPoly& b) { return a -= b; }
  friend TaylorPoly operator+(TaylorPoly a, double b) { return a += b; }
  friend TaylorPoly operator+(double a, TaylorPoly b) { return b += a; }
  friend TaylorPoly operator-(TaylorPoly a, double b) { return a -= b; }
  friend TaylorPoly operator-(double a, const TaylorPoly& b);
  friend TaylorPoly operator-(const TaylorPoly& a);
  friend TaylorPoly operator*(TaylorPoly a, double b) { return a *= b; }
  friend TaylorPoly operator*(double a, TaylorPoly b) { return b *= a; }
  friend TaylorPoly operator*(const TaylorPoly& a, const TaylorPoly& b);
  friend TaylorPoly operator/(const TaylorPoly& a, const TaylorPoly& b);
  friend TaylorPoly operator/(TaylorPoly a, double b) { return a *= (1.0 / b); }
  friend TaylorPoly operator/(double a, const TaylorPoly& b);

  // Composition with a univariate series sum_j series[j] * (p - p0)^j.
  TaylorPoly compose_series(std::span<const double> series) const;

 private:
  void check_compatible(const TaylorPoly& rhs) const;
  void drop_small_coeffs();

  std::shared_ptr<const MonomialBasis> basis_;
  Eigen::VectorXd zeta_;
  std::vector<double> coeffs_;
};

// Elementary functions composed via truncated univariate series about the
// constant term. Domain validity is checked against the enclosure of the
// inner polynomial over its carried box; see each function for the guard.
TaylorPoly sqrt(const TaylorPoly& p);       // constant term must be > 0
TaylorPoly recip(const TaylorPoly& p);      // enclosure must exclude 0
TaylorPoly pow(const TaylorPoly& p, int e); // integer power, e >= 0
TaylorPoly pow(const TaylorPoly& p, double alpha);
TaylorPoly sin(const TaylorPoly& p);
TaylorPoly cos(const TaylorPoly& p);
TaylorPoly atan(const TaylorPoly& p);
TaylorPoly asin(const TaylorPoly& p);       // enclosure must stay in (-1, 1)
TaylorPoly acos(const TaylorPoly& p);

inline double recip(double x) { return 1.0 / x; }

// poly_bound over an explicit box: the box must have the polynomial's
// dimension; its center is the expansion point.
Interval poly_bound(const TaylorPoly& p, const BoxDomain& box);

// Degree-`order` Taylor expansion of a scalar function about `center`,
// valid for fn written generically over double/TaylorPoly arithmetic.
template <class F>
TaylorPoly compose_dynamics(F&& fn, const Eigen::VectorXd& center,
                            const BoxDomain& box, int order) {
  if (box.dim() != center.size()) {
    throw DimensionError("compose_dynamics: box/center dimension mismatch");
  }
  auto seeds = TaylorPoly::variables(center, box.half_widths, order);
  return fn(std::span<const TaylorPoly>(seeds));
}

}  // namespace iccbf
