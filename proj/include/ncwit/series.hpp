#pragma once

// Dense truncated multivariate Taylor series over a generic coefficient ring,
// plus a small dense univariate polynomial type used both as a real "witness
// cubic" container and as the coefficient ring for series whose entries are
// themselves polynomials in the displacement strength x.
//
// The series keeps, for every mode j, all powers lambda_j^0..lambda_j^{cap_j};
// mixed terms are kept whenever every per-mode degree is within its cap.  Caps
// are small (<= 6 per mode), so dense storage with precomputed degree tables
// is both simplest and fastest.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <type_traits>
#include <vector>

#include "ncwit/errors.hpp"

namespace ncwit {

using Cplx = std::complex<double>;
using MultiIndex = std::vector<int>;

namespace detail {
inline bool scalar_is_zero(double v) { return v == 0.0; }
inline bool scalar_is_zero(const Cplx& v) { return v == Cplx(0.0, 0.0); }
}  // namespace detail

// ---------------------------------------------------------------------------
// Polynomial<T>: dense univariate polynomial, coefficients lowest degree first.
// ---------------------------------------------------------------------------

template <typename T>
class Polynomial {
 public:
  using value_type = T;

  Polynomial() = default;
  explicit Polynomial(T constant) : coef_{constant} { trim(); }
  explicit Polynomial(std::vector<T> coef) : coef_(std::move(coef)) { trim(); }

  static Polynomial monomial(int degree, T c) {
    std::vector<T> v(static_cast<std::size_t>(degree) + 1, T{});
    v.back() = c;
    return Polynomial(std::move(v));
  }

  // Degree of the zero polynomial is reported as -1.
  int degree() const { return static_cast<int>(coef_.size()) - 1; }

  T coeff(int k) const {
    if (k < 0 || k >= static_cast<int>(coef_.size())) return T{};
    return coef_[static_cast<std::size_t>(k)];
  }

  bool is_zero() const { return coef_.empty(); }

  T eval(double x) const {  // Horner
    T acc{};
    for (std::size_t i = coef_.size(); i-- > 0;) acc = acc * x + coef_[i];
    return acc;
  }

  Polynomial& operator+=(const Polynomial& o) {
    if (o.coef_.size() > coef_.size()) coef_.resize(o.coef_.size(), T{});
    for (std::size_t i = 0; i < o.coef_.size(); ++i) coef_[i] += o.coef_[i];
    trim();
    return *this;
  }
  Polynomial& operator-=(const Polynomial& o) {
    if (o.coef_.size() > coef_.size()) coef_.resize(o.coef_.size(), T{});
    for (std::size_t i = 0; i < o.coef_.size(); ++i) coef_[i] -= o.coef_[i];
    trim();
    return *this;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.coef_.empty() || b.coef_.empty()) return Polynomial();
    std::vector<T> out(a.coef_.size() + b.coef_.size() - 1, T{});
    for (std::size_t i = 0; i < a.coef_.size(); ++i)
      for (std::size_t j = 0; j < b.coef_.size(); ++j)
        out[i + j] += a.coef_[i] * b.coef_[j];
    Polynomial p;
    p.coef_ = std::move(out);
    p.trim();
    return p;
  }

  Polynomial& operator*=(const Polynomial& o) { return *this = *this * o; }

  Polynomial operator-() const {
    Polynomial p(*this);
    for (auto& c : p.coef_) c = -c;
    return p;
  }

  Polynomial& scale(T s) {
    for (auto& c : coef_) c *= s;
    trim();
    return *this;
  }
  friend Polynomial operator*(Polynomial a, T s) { return a.scale(s); }
  friend Polynomial operator*(T s, Polynomial a) { return a.scale(s); }

 private:
  void trim() {
    while (!coef_.empty() && detail::scalar_is_zero(coef_.back())) coef_.pop_back();
  }
  std::vector<T> coef_;
};

using Poly = Polynomial<double>;
using PolyC = Polynomial<Cplx>;

namespace detail {
inline bool ring_is_zero(double v) { return v == 0.0; }
inline bool ring_is_zero(const Cplx& v) { return v == Cplx(0.0, 0.0); }
template <typename T>
inline bool ring_is_zero(const Polynomial<T>& p) {
  return p.is_zero();
}
template <typename T>
inline Polynomial<T> ring_scale(const Polynomial<T>& p, double s) {
  return p * T(s);
}
inline double ring_scale(double v, double s) { return v * s; }
inline Cplx ring_scale(const Cplx& v, double s) { return v * s; }
}  // namespace detail

// ---------------------------------------------------------------------------
// TruncatedSeries<T>: multivariate Taylor series in lambda_1..lambda_n,
// truncated per mode at cap[j].  T is the coefficient ring (double, Cplx, or
// Polynomial<...> for coefficients that depend on the displacement strength).
// ---------------------------------------------------------------------------

template <typename T>
class TruncatedSeries {
 public:
  explicit TruncatedSeries(MultiIndex cap) : cap_(std::move(cap)) {
    if (cap_.empty()) throw ValidationError("series: empty cap vector");
    std::size_t total = 1;
    stride_.resize(cap_.size());
    for (std::size_t j = 0; j < cap_.size(); ++j) {
      if (cap_[j] < 0) throw ValidationError("series: negative cap");
      stride_[j] = total;
      total *= static_cast<std::size_t>(cap_[j]) + 1;
    }
    data_.assign(total, T{});
    degree_of_.resize(total);
    MultiIndex deg(cap_.size(), 0);
    for (std::size_t i = 0; i < total; ++i) {
      degree_of_[i] = deg;
      for (std::size_t j = 0; j < cap_.size(); ++j) {
        if (++deg[j] <= cap_[j]) break;
        deg[j] = 0;
      }
    }
  }

  static TruncatedSeries constant(const MultiIndex& cap, T value) {
    TruncatedSeries s(cap);
    s.data_[0] = std::move(value);
    return s;
  }

  const MultiIndex& cap() const { return cap_; }
  int modes() const { return static_cast<int>(cap_.size()); }

  T& at(const MultiIndex& k) { return data_[index_of(k)]; }
  const T& at(const MultiIndex& k) const { return data_[index_of(k)]; }

  TruncatedSeries& operator+=(const TruncatedSeries& o) {
    check_same_cap(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  friend TruncatedSeries operator+(TruncatedSeries a, const TruncatedSeries& b) {
    return a += b;
  }

  TruncatedSeries& scale(double s) {
    for (auto& v : data_) v = detail::ring_scale(v, s);
    return *this;
  }

  friend TruncatedSeries operator*(const TruncatedSeries& a, const TruncatedSeries& b) {
    a.check_same_cap(b);
    TruncatedSeries out(a.cap_);
    const std::size_t n = a.data_.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (detail::ring_is_zero(a.data_[i])) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (detail::ring_is_zero(b.data_[j])) continue;
        std::size_t k = 0;
        bool keep = true;
        const MultiIndex& di = a.degree_of_[i];
        const MultiIndex& dj = a.degree_of_[j];
        for (std::size_t m = 0; m < a.cap_.size(); ++m) {
          const int d = di[m] + dj[m];
          if (d > a.cap_[m]) {
            keep = false;
            break;
          }
          k += static_cast<std::size_t>(d) * a.stride_[m];
        }
        if (keep) out.data_[k] += a.data_[i] * b.data_[j];
      }
    }
    return out;
  }

  TruncatedSeries& operator*=(const TruncatedSeries& o) { return *this = *this * o; }

  // exp of a series with vanishing constant term: sum_{p<=P} S^p / p! where
  // P = sum of caps (higher powers cannot reach any kept multi-degree).
  TruncatedSeries exp_no_constant() const {
    if (!detail::ring_is_zero(data_[0]))
      throw ConsistencyError("series: exp requires zero constant term");
    int total_cap = 0;
    for (int c : cap_) total_cap += c;
    TruncatedSeries result = constant(cap_, unit());
    TruncatedSeries term = constant(cap_, unit());
    for (int p = 1; p <= total_cap; ++p) {
      term = term * (*this);
      term.scale(1.0 / static_cast<double>(p));
      result += term;
    }
    return result;
  }

 private:
  static T unit() {
    if constexpr (std::is_same_v<T, double> || std::is_same_v<T, Cplx>) {
      return T(1.0);
    } else {
      return T(typename T::value_type{} + 1.0);
    }
  }

  std::size_t index_of(const MultiIndex& k) const {
    if (k.size() != cap_.size())
      throw ValidationError("series: multi-index rank mismatch");
    std::size_t idx = 0;
    for (std::size_t j = 0; j < k.size(); ++j) {
      if (k[j] < 0 || k[j] > cap_[j])
        throw ValidationError("series: multi-index outside truncation cap");
      idx += static_cast<std::size_t>(k[j]) * stride_[j];
    }
    return idx;
  }

  void check_same_cap(const TruncatedSeries& o) const {
    if (cap_ != o.cap_) throw ValidationError("series: cap mismatch");
  }

  MultiIndex cap_;
  std::vector<std::size_t> stride_;
  std::vector<T> data_;
  std::vector<MultiIndex> degree_of_;
};

}  // namespace ncwit
