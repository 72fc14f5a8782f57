#pragma once

// Shared fixtures for the test suites: canonical state factories, random
// physical/classical state generators, and comparison helpers.
//
// Reference values used across the suites were produced by the independent
// oracles in this repository (combinatorial pairing expansion, finite
// differences of the exact generating-function evaluator, Monte Carlo) and
// cross-checked against each other before being frozen here; see each literal
// for its source.

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "ncwit/gaussian.hpp"

namespace testutil {

using ncwit::Cplx;
using ncwit::NormalCM;
using ncwit::QuadratureState;

inline constexpr double kPi = 3.14159265358979323846;

// --- canonical states ---------------------------------------------------------

// Squeezed vacuum: var(x) = e^{-2r}/2, var(p) = e^{+2r}/2.
inline QuadratureState squeezed_vacuum(double r) {
  Eigen::MatrixXd s(2, 2);
  s << std::exp(-2 * r) / 2, 0, 0, std::exp(2 * r) / 2;
  return QuadratureState(s);
}

// Thermal state with mean occupation nbar: sigma = (nbar + 1/2) I.
inline QuadratureState thermal(double nbar) {
  return QuadratureState(Eigen::MatrixXd::Identity(2, 2) * (nbar + 0.5));
}

// Twin beam (two-mode squeezed vacuum): x-x correlated, p-p anticorrelated.
inline QuadratureState twin_beam(double r) {
  const double ch = std::cosh(2 * r) / 2, sh = std::sinh(2 * r) / 2;
  Eigen::MatrixXd s(4, 4);
  s << ch, 0, sh, 0,
       0, ch, 0, -sh,
       sh, 0, ch, 0,
       0, -sh, 0, ch;
  return QuadratureState(s);
}

// --- random state generators ----------------------------------------------------

inline double uniform(std::mt19937& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Local rotation on one mode (2x2 symplectic).
inline Eigen::Matrix2d rot2(double theta) {
  Eigen::Matrix2d m;
  m << std::cos(theta), std::sin(theta), -std::sin(theta), std::cos(theta);
  return m;
}

inline Eigen::Matrix2d squeeze2(double r) {
  Eigen::Matrix2d m;
  m << std::exp(-r), 0, 0, std::exp(r);
  return m;
}

// Random physical single-mode state: rotate/squeeze a thermal core.
// nu >= 1/2 is the symplectic eigenvalue; r the squeeze strength.
inline QuadratureState random_single_mode(std::mt19937& rng, double nu_max = 2.0,
                                          double r_max = 1.0) {
  const double nu = uniform(rng, 0.5, nu_max);
  const double r = uniform(rng, 0.0, r_max);
  const Eigen::Matrix2d s = rot2(uniform(rng, 0.0, 2 * kPi)) * squeeze2(r);
  const Eigen::Matrix2d sigma = s * (nu * Eigen::Matrix2d::Identity()) * s.transpose();
  return QuadratureState(sigma);
}

// Random physical two-mode state: thermal cores, local squeezes/rotations, and
// a beam splitter to correlate the pair.
inline QuadratureState random_two_mode(std::mt19937& rng, double nu_max = 1.8,
                                       double r_max = 1.0) {
  Eigen::Matrix4d d = Eigen::Matrix4d::Zero();
  const double nu1 = uniform(rng, 0.5, nu_max), nu2 = uniform(rng, 0.5, nu_max);
  d.diagonal() << nu1, nu1, nu2, nu2;

  auto local = [&](double t1, double r1, double t2, double r2) {
    Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
    m.block<2, 2>(0, 0) = rot2(t1) * squeeze2(r1);
    m.block<2, 2>(2, 2) = rot2(t2) * squeeze2(r2);
    return m;
  };
  const double th = uniform(rng, 0.0, 2 * kPi);
  Eigen::Matrix4d bs = Eigen::Matrix4d::Zero();
  bs.block<2, 2>(0, 0) = std::cos(th) * Eigen::Matrix2d::Identity();
  bs.block<2, 2>(0, 2) = std::sin(th) * Eigen::Matrix2d::Identity();
  bs.block<2, 2>(2, 0) = -std::sin(th) * Eigen::Matrix2d::Identity();
  bs.block<2, 2>(2, 2) = std::cos(th) * Eigen::Matrix2d::Identity();

  const Eigen::Matrix4d s =
      local(uniform(rng, 0, 2 * kPi), uniform(rng, 0, r_max),
            uniform(rng, 0, 2 * kPi), uniform(rng, 0, r_max)) *
      bs *
      local(uniform(rng, 0, 2 * kPi), uniform(rng, 0, r_max),
            uniform(rng, 0, 2 * kPi), uniform(rng, 0, r_max));
  return QuadratureState(s * d * s.transpose());
}

// Random classical state: sigma = I/2 + L L^T (P-function a proper Gaussian).
inline QuadratureState random_classical(std::mt19937& rng, int modes,
                                        double spread = 0.7) {
  const int dim = 2 * modes;
  Eigen::MatrixXd l(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) l(i, j) = uniform(rng, -spread, spread);
  Eigen::MatrixXd sigma =
      Eigen::MatrixXd::Identity(dim, dim) * 0.5 + l * l.transpose();
  return QuadratureState(sigma);
}

// Random nonclassical single-mode normal covariance: |C| > B by a set margin.
inline NormalCM random_nonclassical(std::mt19937& rng, double min_gap = 1e-6,
                                    double b_max = 2.0) {
  const double b = uniform(rng, 0.01, b_max);
  const double cmax = std::sqrt(b * (b + 1.0));  // physicality bound on |C|
  const double cabs = b + min_gap + uniform(rng, 0.0, 1.0) * (cmax - b - min_gap);
  const double phase = uniform(rng, 0.0, 2 * kPi);
  return NormalCM::single_mode(b, std::polar(cabs, phase));
}

// --- comparison helpers -----------------------------------------------------------

// |a - b| <= tol * max(1, |a|, |b|): relative at scale, absolute near zero.
inline bool close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

inline bool close(const Cplx& a, const Cplx& b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

// --- frozen oracle values ----------------------------------------------------------
//
// Squeezed vacuum r = 0.5 (B = sinh^2 0.5, C = -sinh 0.5 cosh 0.5): moments
// and the displacement cubic at phase alpha = 0, produced by the pairing
// oracle and confirmed by finite differences (<= 1e-8 rel) and the exact
// evaluator.
namespace frozen {

// <W>, <W^2>, <W^3> at zero displacement.
inline constexpr double kSq05W1 = 0.27154031740762186;
inline constexpr double kSq05W2 = 0.49274274934111789;
inline constexpr double kSq05W3 = 0.96393418869328518;

// R cubic in x at alpha = 0 (Vandermonde fit of pairing values at x=0..3).
inline constexpr double kSq05A = -0.63212055882855878;
inline constexpr double kSq05B = 0.27550437144177498;
inline constexpr double kSq05C = 1.4760053594842246;
inline constexpr double kSq05D = 0.018951578529589369;
// Largest real root of that cubic (companion-matrix eigenvalues).
inline constexpr double kSq05Xcr = 1.7669408490025915;

// Squeezed vacuum r = 1.0, same construction.
inline constexpr double kSq10A = -0.8646647167633944;
inline constexpr double kSq10B = 3.1814097447942031;
inline constexpr double kSq10C = 55.756735679725146;
inline constexpr double kSq10D = 27.825380393799072;

// Twin beam r = 0.3: M cubic at phases (pi/4, -pi/4).
inline constexpr double kTwin03A = -0.90237672781194367;
inline constexpr double kTwin03B = -0.72375515148720548;
inline constexpr double kTwin03C = -0.16799412553127538;
inline constexpr double kTwin03D = -0.011789092545042127;

// Displaced squeezed-thermal mode: B = 0.8, C = 0.3 + 0.2i, xi = 0.9 e^{0.7i}.
// Pairing values; finite differences agree to <= 6e-9, engine to <= 2e-16.
inline constexpr double kDispW1 = 1.6100000000000003;
inline constexpr double kDispW2 = 5.0599897439657795;
inline constexpr double kDispW3 = 23.41245923439045;
// R cubic in x at alpha = 0.7 for the same covariance (fit as above).
inline constexpr double kDispA = 2.096160177735479;
inline constexpr double kDispBB = 6.7315376467833259;
inline constexpr double kDispC = 6.5947109225423208;
inline constexpr double kDispD = 1.2183000000000004;

// Correlated displaced pair: B = (0.4, 0.7), C = (0.1i, -0.2),
// D = 0.25+0.1i, Dbar = -0.15+0.05i, xi = (0.8 e^{0.3i}, 0.6 e^{-1.1i}).
inline constexpr double kPairW10 = 1.04;
inline constexpr double kPairW01 = 1.0600000000000001;
inline constexpr double kPairW11 = 1.2264665698998847;
inline constexpr double kPairW20 = 1.8358742365945648;
inline constexpr double kPairW02 = 2.2423441608847696;
inline constexpr double kPairW21 = 2.373256086005715;
inline constexpr double kPairW12 = 2.8840780629606781;
inline constexpr double kPairW22 = 6.0050194932806118;
// M cubic in x at phases (0.3, -1.1) for the same covariance.
inline constexpr double kPairA = 2.4376349003316014;
inline constexpr double kPairB = 4.4595971801936338;
inline constexpr double kPairC = 1.8765822114785471;
inline constexpr double kPairD = 0.19409375000000004;

// First outputs of the seeded counter generator at seed 42 (reference
// implementation of the published splitmix64 constants).
inline constexpr unsigned long long kSplit42a = 13679457532755275413ull;
inline constexpr unsigned long long kSplit42b = 2949826092126892291ull;
inline constexpr unsigned long long kSplit42c = 5139283748462763858ull;

}  // namespace frozen

// The displaced squeezed-thermal covariance used by the kDisp* values.
inline NormalCM disp_state_cm() { return NormalCM::single_mode(0.8, Cplx(0.3, 0.2)); }

// The correlated-pair covariance used by the kPair* values.
inline NormalCM pair_state_cm() {
  return NormalCM::two_mode(0.4, 0.7, Cplx(0.0, 0.1), Cplx(-0.2, 0.0),
                            Cplx(0.25, 0.1), Cplx(-0.15, 0.05));
}

}  // namespace testutil
