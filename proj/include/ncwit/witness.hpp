#pragma once

// Displacement-enhanced nonclassicality and entanglement witnesses.
//
// For a single mode, R = <W><W^3> - <W^2>^2; for a pair of modes,
// M = <W_j^2><W_l^2> - <W_j W_l>^2.  With every scanned mode coherently
// displaced at common strength x = |xi|^2 (individual phases alpha), both
// witnesses reduce to cubics in x:
//
//   f(x) = a x^3 + b x^2 + c x + d,
//
// the quartic terms cancelling identically.  A negative value certifies
// nonclassicality (R, or M on a single mode plus a coherent ancilla) or, on
// states in two-mode standard form at the optimal phases, entanglement-
// relevant correlations per the quadrature-sum criterion.  The leading
// coefficient at optimal phases is a faithful distillate of the state:
// for R,  a = 2 (B - |C|); driving it negative is exactly nonclassicality.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "ncwit/gaussian.hpp"
#include "ncwit/moments.hpp"

namespace ncwit {

inline constexpr double kDetectTol = 1e-10;   // witness value < -tol
inline constexpr double kCubicXsectTol = 1e-10;  // scaled x^4 cancellation
inline constexpr double kRootsCrossTol = 1e-8;   // radical vs companion roots

enum class WitnessKind { R, M };

struct WitnessPolynomial {
  WitnessKind kind = WitnessKind::R;
  std::vector<int> modes;      // scanned mode indices (size 1 or 2)
  std::vector<double> phases;  // displacement phases used
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
  double x4_residue = 0.0;  // |largest surviving coefficient beyond x^3|

  double eval(double x) const { return ((a * x + b) * x + c) * x + d; }
};

// Witness values straight from the moment engine at a concrete displacement.
double witness_R(const NormalCM& cm, int mode, const DisplacementConfig& disp);
double witness_M(const NormalCM& cm, int mode_j, int mode_l,
                 const DisplacementConfig& disp);

// Cubic in x extracted from the symbolic engine; throws ConsistencyError if
// the x^4 coefficient fails to cancel (relative to the surviving scale).
WitnessPolynomial witness_polynomial(const NormalCM& cm, WitnessKind kind,
                                     const std::vector<int>& modes,
                                     const std::vector<double>& phases);

// Leading-coefficient closed forms (per unit displacement strength; the
// extracted cubic's `a` equals twice these).
double leading_R(const NormalCM& cm, int mode, double alpha);
double leading_M(const NormalCM& cm, int mode_j, int mode_l, double alpha_j,
                 double alpha_l);

// Phase choices minimizing the leading coefficient.
double optimal_phase_R(const NormalCM& cm, int mode);

struct PhasePair {
  double alpha_j = 0.0;
  double alpha_l = 0.0;
  double leading = 0.0;  // minimized closed-form value (before the factor 2)
};
PhasePair optimal_phases_M(const NormalCM& cm, int mode_j, int mode_l);

// Cubic roots two ways: companion-matrix eigenvalues (authoritative) and the
// closed radical form over its three branches.  Both expect a != 0.
std::array<Cplx, 3> cubic_roots_companion(double a, double b, double c, double d);
std::array<Cplx, 3> cubic_roots_radical(double a, double b, double c, double d);

// Smallest displacement strength beyond which the cubic stays negative:
// max(0, largest real root) when a < 0; nullopt when a >= 0 (no tail).
// Cross-checks radical vs companion roots to kRootsCrossTol (ConsistencyError).
std::optional<double> critical_strength(const WitnessPolynomial& poly);

// For a >= 0 cubics that dip negative on a bounded interval: the (lo, hi)
// window with f < -tol, if any.
std::optional<std::pair<double, double>> negativity_window(
    const WitnessPolynomial& poly, double tol = kDetectTol);

// max(0, |C| - B): positive exactly on nonclassical single-mode Gaussians;
// invariant under phase rotation and displacement.
double nonclassicality_gap(const NormalCM& cm, int mode);

// --- top-level analysis -------------------------------------------------------

enum class AnalysisStrategy {
  Auto,               // R for one mode, M for two
  R,                  //
  M,                  //
  MWithVacuumAncilla  // single-mode nonclassicality via M against vacuum
};

struct WitnessReport {
  WitnessKind kind = WitnessKind::R;
  AnalysisStrategy strategy = AnalysisStrategy::Auto;
  std::vector<int> modes;
  std::vector<double> phases;
  WitnessPolynomial poly;
  double x = 0.0;      // strength at which `value` was computed
  double value = 0.0;  // engine-evaluated witness at x
  bool detected = false;
  std::optional<double> x_critical;
  std::optional<std::pair<double, double>> negative_window;
  double gap = 0.0;  // max(0, -min over phases of the leading closed form);
                     // positive iff some displacement strength detects
};

WitnessReport analyze(const NormalCM& cm, const std::vector<int>& modes,
                      AnalysisStrategy strategy = AnalysisStrategy::Auto,
                      std::optional<double> x_request = std::nullopt,
                      const std::optional<std::vector<double>>& phases_override =
                          std::nullopt,
                      double detect_tol = kDetectTol);

}  // namespace ncwit
