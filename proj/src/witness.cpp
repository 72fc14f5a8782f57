#include "ncwit/witness.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace ncwit {

namespace {

constexpr double kPi = std::numbers::pi;

DisplacementConfig restrict_disp(const DisplacementConfig& disp,
                                 const std::vector<int>& keep) {
  Eigen::VectorXd amp(static_cast<int>(keep.size()));
  Eigen::VectorXd ph(static_cast<int>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) {
    amp[static_cast<int>(i)] = disp.amplitude(keep[i]);
    ph[static_cast<int>(i)] = disp.phase(keep[i]);
  }
  return DisplacementConfig(std::move(amp), std::move(ph));
}

void check_scan_modes(const NormalCM& cm, const std::vector<int>& modes,
                      std::size_t expect) {
  if (modes.size() != expect)
    throw ValidationError("witness: wrong number of scanned modes");
  for (int m : modes)
    if (m < 0 || m >= cm.modes())
      throw ValidationError("witness: scanned mode index out of range");
  if (expect == 2 && modes[0] == modes[1])
    throw ValidationError("witness: scanned modes must be distinct");
}

// Real roots of a polynomial of degree <= 3 given highest-first coefficients;
// degenerate leading coefficients degrade the degree.
std::vector<double> real_roots_upto_cubic(double a, double b, double c, double d) {
  std::vector<double> roots;
  if (a != 0.0) {
    for (const Cplx& r : cubic_roots_companion(a, b, c, d)) {
      if (std::abs(r.imag()) <= 1e-9 * std::max(1.0, std::abs(r)))
        roots.push_back(r.real());
    }
  } else if (b != 0.0) {
    const double disc = c * c - 4.0 * b * d;
    if (disc >= 0.0) {
      const double s = std::sqrt(disc);
      // numerically stable pairing: q avoids cancellation in one root
      const double q = -0.5 * (c + (c >= 0.0 ? s : -s));
      roots.push_back(q / b);
      if (q != 0.0) roots.push_back(d / q);
      else roots.push_back(0.0);
    }
  } else if (c != 0.0) {
    roots.push_back(-d / c);
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

}  // namespace

// --- direct witness values -----------------------------------------------------

double witness_R(const NormalCM& cm, int mode, const DisplacementConfig& disp) {
  check_scan_modes(cm, {mode}, 1);
  if (disp.modes() != cm.modes())
    throw ValidationError("witness: displacement mode count mismatch");
  const NormalCM marg = cm.restricted({mode});
  const MomentTable t = intensity_moments(marg, restrict_disp(disp, {mode}), {3});
  return t.at({1}) * t.at({3}) - t.at({2}) * t.at({2});
}

double witness_M(const NormalCM& cm, int mode_j, int mode_l,
                 const DisplacementConfig& disp) {
  check_scan_modes(cm, {mode_j, mode_l}, 2);
  if (disp.modes() != cm.modes())
    throw ValidationError("witness: displacement mode count mismatch");
  const NormalCM marg = cm.restricted({mode_j, mode_l});
  const MomentTable t =
      intensity_moments(marg, restrict_disp(disp, {mode_j, mode_l}), {2, 2});
  return t.at({2, 0}) * t.at({0, 2}) - t.at({1, 1}) * t.at({1, 1});
}

// --- cubic extraction ------------------------------------------------------------

WitnessPolynomial witness_polynomial(const NormalCM& cm, WitnessKind kind,
                                     const std::vector<int>& modes,
                                     const std::vector<double>& phases) {
  if (phases.size() != modes.size())
    throw ValidationError("witness: one displacement phase per scanned mode required");
  WitnessPolynomial out;
  out.kind = kind;
  out.modes = modes;
  out.phases = phases;

  Poly f;
  if (kind == WitnessKind::R) {
    check_scan_modes(cm, modes, 1);
    const NormalCM marg = cm.restricted(modes);
    Eigen::VectorXd ph(1);
    ph << phases[0];
    const MomentPolynomialTable t = intensity_moment_polynomials(marg, ph, {3});
    f = t.at({1}) * t.at({3}) - t.at({2}) * t.at({2});
  } else {
    check_scan_modes(cm, modes, 2);
    const NormalCM marg = cm.restricted(modes);
    Eigen::VectorXd ph(2);
    ph << phases[0], phases[1];
    const MomentPolynomialTable t = intensity_moment_polynomials(marg, ph, {2, 2});
    f = t.at({2, 0}) * t.at({0, 2}) - t.at({1, 1}) * t.at({1, 1});
  }

  // The quartic term must cancel identically; anything surviving beyond
  // rounding noise means the moment algebra is wrong.
  double scale = 1.0;
  for (int i = 0; i <= 3; ++i) scale = std::max(scale, std::abs(f.coeff(i)));
  for (int i = 4; i <= f.degree(); ++i) {
    out.x4_residue = std::max(out.x4_residue, std::abs(f.coeff(i)));
    if (std::abs(f.coeff(i)) > kCubicXsectTol * scale)
      throw ConsistencyError("witness: quartic term failed to cancel");
  }
  out.a = f.coeff(3);
  out.b = f.coeff(2);
  out.c = f.coeff(1);
  out.d = f.coeff(0);
  return out;
}

// --- leading-coefficient closed forms and phase optimization ---------------------

double leading_R(const NormalCM& cm, int mode, double alpha) {
  check_scan_modes(cm, {mode}, 1);
  return cm.b(mode) + (cm.c(mode) * std::polar(1.0, -2.0 * alpha)).real();
}

double leading_M(const NormalCM& cm, int mode_j, int mode_l, double alpha_j,
                 double alpha_l) {
  check_scan_modes(cm, {mode_j, mode_l}, 2);
  const double cj = (cm.c(mode_j) * std::polar(1.0, -2.0 * alpha_j)).real();
  const double cl = (cm.c(mode_l) * std::polar(1.0, -2.0 * alpha_l)).real();
  const double dd =
      (cm.d(mode_j, mode_l) * std::polar(1.0, -(alpha_j + alpha_l))).real();
  const double db =
      (cm.dbar(mode_j, mode_l) * std::polar(1.0, alpha_j - alpha_l)).real();
  return cm.b(mode_j) + cm.b(mode_l) + cj + cl - 2.0 * dd - 2.0 * db;
}

double optimal_phase_R(const NormalCM& cm, int mode) {
  check_scan_modes(cm, {mode}, 1);
  const Cplx c = cm.c(mode);
  if (std::abs(c) == 0.0) return 0.0;
  return (std::arg(c) - kPi) / 2.0;  // aligns C e^{-2 i alpha} with -|C|
}

PhasePair optimal_phases_M(const NormalCM& cm, int mode_j, int mode_l) {
  check_scan_modes(cm, {mode_j, mode_l}, 2);
  const Cplx cjv = cm.c(mode_j);
  const Cplx clv = cm.c(mode_l);
  const Cplx dv = cm.d(mode_j, mode_l);
  const Cplx dbv = cm.dbar(mode_j, mode_l);
  const auto f = [&](double aj, double al) {
    return leading_M(cm, mode_j, mode_l, aj, al);
  };

  double best_aj = 0.0, best_al = 0.0;
  double best = f(0.0, 0.0);
  const auto consider = [&](double aj, double al) {
    const double v = f(aj, al);
    if (v < best) {
      best = v;
      best_aj = aj;
      best_al = al;
    }
  };

  // Newton polish with analytic first and second derivatives.  The objective
  // is a three-term trigonometric polynomial, so from a seed inside a basin a
  // few iterations reach that basin's floor; backtracking keeps every accepted
  // move a strict descent, and a gradient step covers indefinite Hessians.
  const auto polish = [&](double aj, double al) {
    for (int it = 0; it < 60; ++it) {
      const Cplx zj = cjv * std::polar(1.0, -2.0 * aj);
      const Cplx zl = clv * std::polar(1.0, -2.0 * al);
      const Cplx w = dv * std::polar(1.0, -(aj + al));
      const Cplx wb = dbv * std::polar(1.0, aj - al);
      const double gj = 2.0 * (zj.imag() - w.imag() + wb.imag());
      const double gl = 2.0 * (zl.imag() - w.imag() - wb.imag());
      if (std::hypot(gj, gl) < 1e-14) break;
      const double hjj = -4.0 * zj.real() + 2.0 * w.real() + 2.0 * wb.real();
      const double hll = -4.0 * zl.real() + 2.0 * w.real() + 2.0 * wb.real();
      const double hjl = 2.0 * w.real() - 2.0 * wb.real();
      const double det = hjj * hll - hjl * hjl;
      double sj, sl;
      if (det > 0.0 && hjj > 0.0) {  // positive definite: Newton step
        sj = -(hll * gj - hjl * gl) / det;
        sl = -(hjj * gl - hjl * gj) / det;
      } else {
        sj = -gj;
        sl = -gl;
      }
      const double norm = std::hypot(sj, sl);
      if (norm > 0.5) {
        sj *= 0.5 / norm;
        sl *= 0.5 / norm;
      }
      const double f0 = f(aj, al);
      double t = 1.0;
      bool moved = false;
      for (int bt = 0; bt < 50; ++bt, t *= 0.5) {
        if (f(aj + t * sj, al + t * sl) < f0) {
          aj += t * sj;
          al += t * sl;
          moved = true;
          break;
        }
      }
      if (!moved) break;
    }
    consider(aj, al);
  };

  // Coarse periodic grid; every cell at or below its eight neighbours seeds a
  // polish, so each basin the grid resolves gets its own descent.  The seed
  // list is capped for flat objectives, lowest values first.
  const int grid = 192;
  std::vector<double> vals(static_cast<std::size_t>(grid) * grid);
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j)
      vals[static_cast<std::size_t>(i) * grid + j] =
          f(2.0 * kPi * i / grid, 2.0 * kPi * j / grid);
  struct Seed {
    double v;
    int i, j;
  };
  std::vector<Seed> seeds;
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < grid; ++j) {
      const double v = vals[static_cast<std::size_t>(i) * grid + j];
      bool lowest = true;
      for (int di = -1; di <= 1 && lowest; ++di) {
        for (int dj = -1; dj <= 1; ++dj) {
          if (di == 0 && dj == 0) continue;
          const int ii = (i + di + grid) % grid;
          const int jj = (j + dj + grid) % grid;
          if (vals[static_cast<std::size_t>(ii) * grid + jj] < v) {
            lowest = false;
            break;
          }
        }
      }
      if (lowest) seeds.push_back({v, i, j});
    }
  }
  std::sort(seeds.begin(), seeds.end(),
            [](const Seed& a, const Seed& b) { return a.v < b.v; });
  if (seeds.size() > 64) seeds.resize(64);
  for (const Seed& s : seeds)
    polish(2.0 * kPi * s.i / grid, 2.0 * kPi * s.j / grid);

  // Analytic candidates: phases aligning the cross terms (sum = arg D,
  // difference = -arg Dbar) and phases aligning each single-mode term.
  {
    const double sum = std::abs(dv) == 0.0 ? 0.0 : std::arg(dv);
    const double diff = std::abs(dbv) == 0.0 ? 0.0 : -std::arg(dbv);
    polish((sum + diff) / 2.0, (sum - diff) / 2.0);
    const double cj = std::abs(cjv) == 0.0 ? 0.0 : (std::arg(cjv) - kPi) / 2.0;
    const double cl = std::abs(clv) == 0.0 ? 0.0 : (std::arg(clv) - kPi) / 2.0;
    for (int mj = 0; mj < 2; ++mj)
      for (int ml = 0; ml < 2; ++ml)
        polish(cj + mj * kPi / 2.0, cl + ml * kPi / 2.0);
  }

  PhasePair out;
  out.alpha_j = std::remainder(best_aj, 2.0 * kPi);
  out.alpha_l = std::remainder(best_al, 2.0 * kPi);
  out.leading = best;
  return out;
}

// --- cubic roots -------------------------------------------------------------------

std::array<Cplx, 3> cubic_roots_companion(double a, double b, double c, double d) {
  if (a == 0.0) throw ValidationError("cubic roots: leading coefficient is zero");
  Eigen::Matrix3d comp = Eigen::Matrix3d::Zero();
  comp(1, 0) = 1.0;
  comp(2, 1) = 1.0;
  comp(0, 2) = -d / a;
  comp(1, 2) = -c / a;
  comp(2, 2) = -b / a;
  Eigen::EigenSolver<Eigen::Matrix3d> es(comp);
  return {es.eigenvalues()(0), es.eigenvalues()(1), es.eigenvalues()(2)};
}

std::array<Cplx, 3> cubic_roots_radical(double a, double b, double c, double d) {
  if (a == 0.0) throw ValidationError("cubic roots: leading coefficient is zero");
  const double d0 = b * b - 3.0 * a * c;
  const double d1 = 2.0 * b * b * b - 9.0 * a * b * c + 27.0 * a * a * d;
  const Cplx inner = std::sqrt(Cplx(d1 * d1 - 4.0 * d0 * d0 * d0, 0.0));
  // Pick the branch that avoids cancellation in d1 -+ inner.
  const Cplx num = (std::abs(d1 + inner) >= std::abs(d1 - inner)) ? (Cplx(d1) + inner)
                                                                  : (Cplx(d1) - inner);
  const Cplx fbase = std::pow(num / 2.0, 1.0 / 3.0);
  std::array<Cplx, 3> roots;
  if (std::abs(fbase) == 0.0) {
    // d0 = d1 = 0: triple root
    roots.fill(Cplx(-b / (3.0 * a), 0.0));
    return roots;
  }
  const Cplx eta(-0.5, std::sqrt(3.0) / 2.0);
  Cplx fh = fbase;
  for (int h = 0; h < 3; ++h) {
    roots[static_cast<std::size_t>(h)] = -(Cplx(b) + fh + Cplx(d0) / fh) / (3.0 * a);
    fh *= eta;
  }
  return roots;
}

// --- critical strength and negativity window -----------------------------------------

std::optional<double> critical_strength(const WitnessPolynomial& poly) {
  const double scale = std::max({1.0, std::abs(poly.b), std::abs(poly.c), std::abs(poly.d)});
  if (poly.a >= -1e-13 * scale) return std::nullopt;  // no negative tail

  const std::array<Cplx, 3> numeric =
      cubic_roots_companion(poly.a, poly.b, poly.c, poly.d);
  const std::array<Cplx, 3> radical =
      cubic_roots_radical(poly.a, poly.b, poly.c, poly.d);
  double root_scale = 1.0;
  for (const Cplx& r : numeric) root_scale = std::max(root_scale, std::abs(r));
  for (const Cplx& r : radical) {
    double dist = std::numeric_limits<double>::infinity();
    for (const Cplx& q : numeric) dist = std::min(dist, std::abs(r - q));
    if (dist > kRootsCrossTol * root_scale)
      throw ConsistencyError("cubic roots: radical and companion solvers disagree");
  }

  double largest = -std::numeric_limits<double>::infinity();
  for (const Cplx& r : numeric) {
    if (std::abs(r.imag()) <= 1e-9 * std::max(1.0, std::abs(r)))
      largest = std::max(largest, r.real());
  }
  if (!std::isfinite(largest))
    throw ConsistencyError("cubic roots: no real root found for a downward cubic");
  return std::max(0.0, largest);
}

std::optional<std::pair<double, double>> negativity_window(
    const WitnessPolynomial& poly, double tol) {
  const std::vector<double> roots =
      real_roots_upto_cubic(poly.a, poly.b, poly.c, poly.d);
  // Bounded windows only: check every gap between consecutive nonnegative
  // crossing points (and the segment from 0 to the first crossing).
  std::vector<double> edges;
  edges.push_back(0.0);
  for (double r : roots)
    if (r > 0.0) edges.push_back(r);
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double mid = 0.5 * (edges[i] + edges[i + 1]);
    if (poly.eval(mid) < -tol) return std::make_pair(edges[i], edges[i + 1]);
  }
  return std::nullopt;
}

double nonclassicality_gap(const NormalCM& cm, int mode) {
  check_scan_modes(cm, {mode}, 1);
  return std::max(0.0, std::abs(cm.c(mode)) - cm.b(mode));
}

// --- top-level analysis ---------------------------------------------------------------

WitnessReport analyze(const NormalCM& cm, const std::vector<int>& modes,
                      AnalysisStrategy strategy, std::optional<double> x_request,
                      const std::optional<std::vector<double>>& phases_override,
                      double detect_tol) {
  AnalysisStrategy resolved = strategy;
  if (resolved == AnalysisStrategy::Auto)
    resolved = modes.size() == 1 ? AnalysisStrategy::R : AnalysisStrategy::M;
  if (resolved == AnalysisStrategy::M && modes.size() == 1)
    resolved = AnalysisStrategy::MWithVacuumAncilla;

  WitnessReport report;
  report.strategy = resolved;
  report.modes = modes;

  // Working state and scanned-mode list in the working state's numbering.
  NormalCM work = cm;
  std::vector<int> scan;
  switch (resolved) {
    case AnalysisStrategy::R: {
      check_scan_modes(cm, modes, 1);
      report.kind = WitnessKind::R;
      scan = modes;
      break;
    }
    case AnalysisStrategy::M: {
      check_scan_modes(cm, modes, 2);
      report.kind = WitnessKind::M;
      scan = modes;
      break;
    }
    case AnalysisStrategy::MWithVacuumAncilla: {
      check_scan_modes(cm, modes, 1);
      report.kind = WitnessKind::M;
      const int k = modes[0];
      work = NormalCM::two_mode(cm.b(k), 0.0, cm.c(k), Cplx(0.0, 0.0),
                                Cplx(0.0, 0.0), Cplx(0.0, 0.0));
      scan = {0, 1};
      break;
    }
    case AnalysisStrategy::Auto:
      break;  // unreachable
  }

  // Displacement phases: caller override or the optimizer's choice.  The
  // detection gap is always the phase-optimal quantity.
  std::vector<double> phases;
  if (report.kind == WitnessKind::R) {
    const double opt = optimal_phase_R(work, scan[0]);
    report.gap = nonclassicality_gap(work, scan[0]);
    phases = {opt};
  } else {
    const PhasePair opt = optimal_phases_M(work, scan[0], scan[1]);
    report.gap = std::max(0.0, -opt.leading);
    phases = {opt.alpha_j, opt.alpha_l};
  }
  if (phases_override) {
    if (phases_override->size() != scan.size())
      throw ValidationError("analysis: phase override must match scanned mode count");
    phases = *phases_override;
  }
  report.phases = phases;

  report.poly = witness_polynomial(work, report.kind, scan, phases);
  report.x_critical = critical_strength(report.poly);
  report.negative_window = negativity_window(report.poly, detect_tol);

  double x = 0.0;
  if (x_request) {
    if (!(*x_request >= 0.0))
      throw ValidationError("analysis: displacement strength must be nonnegative");
    x = *x_request;
  } else if (report.x_critical) {
    x = std::max(2.0 * *report.x_critical, 1.0);  // safely inside the tail
  } else if (report.negative_window) {
    x = 0.5 * (report.negative_window->first + report.negative_window->second);
  }
  report.x = x;

  Eigen::VectorXd amp = Eigen::VectorXd::Zero(work.modes());
  Eigen::VectorXd ph = Eigen::VectorXd::Zero(work.modes());
  for (std::size_t i = 0; i < scan.size(); ++i) {
    amp[scan[i]] = std::sqrt(x);
    ph[scan[i]] = phases[i];
  }
  const DisplacementConfig disp(std::move(amp), std::move(ph));
  report.value = report.kind == WitnessKind::R
                     ? witness_R(work, scan[0], disp)
                     : witness_M(work, scan[0], scan[1], disp);
  report.detected = report.value < -detect_tol;
  return report;
}

}  // namespace ncwit
