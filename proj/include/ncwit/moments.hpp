#pragma once

// Normal-ordered intensity-moment engine.
//
// The central object is the normal-ordered generating function
//
//   G(lambda) = det(I + Lambda A)^{-1/2}
//               * exp( -1/2 Xi^dag (I + Lambda A)^{-1} Lambda Xi ),
//
// where A is the assembled normal-ordered covariance matrix (rows/cols paired
// as (a_k^dag, a_k)), Lambda = diag(lambda_1, lambda_1, ..., lambda_n,
// lambda_n), and Xi = (xi_1, conj(xi_1), ..., xi_n, conj(xi_n)) collects the
// coherent displacements.  Mixed intensity moments follow by differentiation:
//
//   <W_1^{k_1} ... W_n^{k_n}> = prod_j k_j! * (-1)^{k_1+...+k_n}
//                               * [coeff of lambda^k in G].
//
// The engine expands both factors as truncated multivariate Taylor series:
//   -1/2 log det(I + Lambda A) = -1/2 sum_{m>=1} (-1)^{m+1} tr((Lambda A)^m)/m
//   -1/2 Xi^dag (I+Lambda A)^{-1} Lambda Xi
//       = -1/2 sum_{m>=0} (-1)^m Xi^dag (Lambda A)^m Lambda Xi,
// exponentiates their sum, and reads off coefficients.  Matrix entries carry
// one lambda factor of the row's mode, so a matrix power contributes exactly
// its word-length in lambda degrees; per-mode caps bound everything.
//
// Two variants:
//   * numeric: coefficients are doubles for a fixed displacement;
//   * symbolic in x: per-mode amplitudes are sqrt(x) with fixed phases, so
//     series coefficients are real polynomials in x (the scalar quadratic
//     form contributes one power of x per Xi pair).

#include <map>

#include "ncwit/gaussian.hpp"
#include "ncwit/series.hpp"

namespace ncwit {

inline constexpr int kMaxOrderPerMode = 6;

// Multi-index maps keyed by per-mode powers (size = modes; entries <= cap).
struct MomentTable {
  MultiIndex cap;
  std::map<MultiIndex, double> values;

  double at(const MultiIndex& k) const;
};

struct MomentPolynomialTable {
  MultiIndex cap;
  std::map<MultiIndex, Poly> polys;  // coefficients in x = |xi|^2

  const Poly& at(const MultiIndex& k) const;
  MomentTable evaluate(double x) const;
};

// Taylor series of G(lambda) itself (constant term 1).
TruncatedSeries<double> generating_series(const NormalCM& cm,
                                          const DisplacementConfig& disp,
                                          const MultiIndex& cap);

// Same, with amplitude_k = sqrt(x) symbolic: coefficients are Poly in x.
TruncatedSeries<Poly> generating_series_in_x(const NormalCM& cm,
                                             const Eigen::VectorXd& phases,
                                             const MultiIndex& cap);

// All mixed moments with per-mode order <= cap.
MomentTable intensity_moments(const NormalCM& cm, const DisplacementConfig& disp,
                              const MultiIndex& cap);

MomentPolynomialTable intensity_moment_polynomials(const NormalCM& cm,
                                                   const Eigen::VectorXd& phases,
                                                   const MultiIndex& cap);

// Scalar G at a real lambda vector (exact closed form, no truncation); the
// finite-difference oracle differentiates this.
double generating_function_value(const NormalCM& cm,
                                 const DisplacementConfig& disp,
                                 const Eigen::VectorXd& lambda);

}  // namespace ncwit
