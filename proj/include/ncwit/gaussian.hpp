#pragma once

// Gaussian-state containers and conversions.
//
// Conventions (stated once, used everywhere):
//   * quadratures x = (a + a^dag)/sqrt(2), p = (a - a^dag)/(i sqrt(2));
//     vacuum variance 1/2, i.e. sigma_vacuum = I/2;
//   * quadrature vectors are interleaved (x_1, p_1, ..., x_n, p_n);
//   * the normal-ordered covariance data per mode k is
//       B_k = <Delta a_k^dag Delta a_k>   (real, >= -1/2; negative only for
//                                          nonclassical states is NOT allowed —
//                                          B is a mean photon fluctuation and
//                                          is >= 0 for physical states; the
//                                          container enforces B >= -1/2 and
//                                          physicality checks do the rest),
//       C_k = <(Delta a_k)^2>             (complex),
//     and between modes j < l
//       D_jl    = <Delta a_j Delta a_l>       (symmetric in j,l),
//       Dbar_jl = <Delta a_j^dag Delta a_l>   (Dbar_lj = conj(Dbar_jl)).
//
// The assembled 2n x 2n matrix pairs rows/cols as (a_k^dag, a_k) per mode:
// diagonal blocks [[B, C], [conj(C), B]], off-diagonal (j,l), j != l, blocks
// [[conj(Dbar), D], [conj(D), Dbar]] — Hermitian overall.

#include <Eigen/Dense>
#include <complex>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "ncwit/errors.hpp"
#include "ncwit/series.hpp"

namespace ncwit {

inline constexpr double kSymmetryTol = 1e-12;   // relative, covariance symmetry
inline constexpr double kPhysicalTol = 1e-10;   // margin threshold, symplectic
inline constexpr double kClassicalTol = 1e-10;  // margin threshold, eigenvalue
inline constexpr double kZeroCTol = 1e-12;      // |C| considered zero for
                                                // standard-form reduction
inline constexpr double kResidueTol = 1e-10;    // imaginary residues (scaled)
inline constexpr double kEntangleTol = 1e-10;   // quadrature-sum / PT margins

struct MarginResult {
  bool ok = false;      // criterion satisfied within tolerance
  double margin = 0.0;  // signed distance to the boundary (>0 inside)
};

// --- quadrature representation ---------------------------------------------

class QuadratureState {
 public:
  QuadratureState(Eigen::MatrixXd sigma, Eigen::VectorXd mean);
  explicit QuadratureState(Eigen::MatrixXd sigma);

  int modes() const { return static_cast<int>(sigma_.rows()) / 2; }
  const Eigen::MatrixXd& sigma() const { return sigma_; }
  const Eigen::VectorXd& mean() const { return mean_; }

  static QuadratureState vacuum(int n);

 private:
  Eigen::MatrixXd sigma_;  // symmetrized on construction
  Eigen::VectorXd mean_;
};

// Symplectic form Omega in interleaved ordering: blocks [[0,1],[-1,0]].
Eigen::MatrixXd symplectic_form(int n);

// Symplectic eigenvalues of a symmetric 2n x 2n matrix, ascending.
Eigen::VectorXd symplectic_eigenvalues(const Eigen::MatrixXd& sigma);

// Physicality: sigma + (i/2) Omega >= 0, tested as min nu - 1/2 >= -tol.
MarginResult is_physical(const QuadratureState& state, double tol = kPhysicalTol);

// --- normal-ordered representation ------------------------------------------

class NormalCM {
 public:
  NormalCM(Eigen::VectorXd b, Eigen::VectorXcd c,
           std::map<std::pair<int, int>, Cplx> d,
           std::map<std::pair<int, int>, Cplx> dbar);

  static NormalCM single_mode(double b, Cplx c);
  static NormalCM two_mode(double b0, double b1, Cplx c0, Cplx c1, Cplx d,
                           Cplx dbar);

  int modes() const { return static_cast<int>(b_.size()); }
  double b(int k) const;
  Cplx c(int k) const;
  Cplx d(int j, int l) const;     // 0 when j == l or pair absent
  Cplx dbar(int j, int l) const;  // dbar(l,j) = conj(dbar(j,l)); 0 when j == l

  // Hermitian 2n x 2n matrix with (a_k^dag, a_k) row/col pairing.
  Eigen::MatrixXcd assemble() const;

  // Marginal over a subset of modes (indices are re-numbered in order).
  NormalCM restricted(const std::vector<int>& keep) const;

 private:
  Eigen::VectorXd b_;
  Eigen::VectorXcd c_;
  std::map<std::pair<int, int>, Cplx> d_;     // keys j < l
  std::map<std::pair<int, int>, Cplx> dbar_;  // keys j < l
};

// Conversions; both directions validate physicality of the quadrature side.
NormalCM to_normal(const QuadratureState& state, double tol = kPhysicalTol);
QuadratureState from_normal(const NormalCM& cm, double tol = kPhysicalTol);

// Classicality of the Gaussian P function: assembled matrix >= 0
// (equivalently sigma >= I/2).  margin = smallest eigenvalue.
MarginResult is_classical(const NormalCM& cm, double tol = kClassicalTol);
MarginResult is_classical(const QuadratureState& state, double tol = kClassicalTol);

// Local phase rotation a_k -> a_k e^{-i phi_k}:
// C_k -> C_k e^{-2 i phi_k}, D_jl -> D_jl e^{-i(phi_j+phi_l)},
// Dbar_jl -> Dbar_jl e^{+i(phi_j-phi_l)}, B invariant.
NormalCM phase_shift(const NormalCM& cm, const Eigen::VectorXd& phis);

// --- displacement ------------------------------------------------------------

// Coherent displacement per mode, xi_k = amplitude_k * exp(i * phase_k).
// Amplitudes are nonnegative; phases normalized into [0, 2*pi).
class DisplacementConfig {
 public:
  DisplacementConfig(Eigen::VectorXd amplitudes, Eigen::VectorXd phases);

  static DisplacementConfig none(int n);
  // Same strength x = |xi|^2 on every mode, individual phases.
  static DisplacementConfig uniform(double x, Eigen::VectorXd phases);

  int modes() const { return static_cast<int>(amp_.size()); }
  double amplitude(int k) const { return amp_[k]; }
  double phase(int k) const { return phase_[k]; }
  Cplx xi(int k) const;
  bool is_zero() const;

 private:
  Eigen::VectorXd amp_;
  Eigen::VectorXd phase_;
};

// Coherent amplitudes equivalent to a quadrature mean vector:
// xi_k = (mean_x + i mean_p)/sqrt(2).
DisplacementConfig mean_displacement(const QuadratureState& state);

// --- two-mode standard form ---------------------------------------------------

// Parameters of the phase-reduced two-mode form with C = 0:
//   sigma_st = [[q_j, 0, q_jl, 0], [0, q_j, 0, q_pjl],
//               [q_jl, 0, q_l, 0], [0, q_pjl, 0, q_l]]
// where q_k = B_k + 1/2 and (q_jl, q_pjl) are the x-x and p-p cross
// covariances after the local phase rotation.
struct StandardFormParams {
  double q_j = 0.0;
  double q_l = 0.0;
  double q_jl = 0.0;
  double q_pjl = 0.0;

  Eigen::Matrix4d sigma_st() const;
};

struct StandardFormReduction {
  StandardFormParams params;
  double phi_j = 0.0;  // local phases applied, reported in (-pi, pi]; chosen so
  double phi_l = 0.0;  // the rotated D and Dbar are real and nonnegative
};

// Requires a two-mode state with |C_k| <= kZeroCTol; otherwise throws
// UnsupportedError pointing at the general witness path.
StandardFormReduction reduce_to_standard_form(const NormalCM& cm);

// Optimized two-mode quadrature-sum criterion on the standard form:
// min over the +-1 gearing of Var(u) + Var(v) for
// u = (|h| x_j + x_l/h)/sqrt2, v = (|h| p_j - p_l/h)/sqrt2 with h = +-1.
// Values below 1 certify entanglement (vacuum-normalized units).
double duan_sum(const StandardFormParams& params);

}  // namespace ncwit
