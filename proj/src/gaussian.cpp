#include "ncwit/gaussian.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace ncwit {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_2pi(double phi) {
  double w = std::fmod(phi, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  return w;
}

std::pair<int, int> ordered_key(int j, int l) { return {std::min(j, l), std::max(j, l)}; }

}  // namespace

// --- QuadratureState ---------------------------------------------------------

QuadratureState::QuadratureState(Eigen::MatrixXd sigma, Eigen::VectorXd mean)
    : sigma_(std::move(sigma)), mean_(std::move(mean)) {
  const auto rows = sigma_.rows();
  if (rows < 2 || rows != sigma_.cols() || rows % 2 != 0)
    throw ValidationError("quadrature covariance must be square with even dimension >= 2");
  if (mean_.size() == 0) mean_ = Eigen::VectorXd::Zero(rows);
  if (mean_.size() != rows)
    throw ValidationError("mean vector length must match covariance dimension");
  const double scale = std::max(1.0, sigma_.cwiseAbs().maxCoeff());
  const double asym = (sigma_ - sigma_.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryTol * scale) {
    std::ostringstream os;
    os << "quadrature covariance is not symmetric (max asymmetry " << asym << ")";
    throw ValidationError(os.str());
  }
  sigma_ = ((sigma_ + sigma_.transpose()) / 2.0).eval();
}

QuadratureState::QuadratureState(Eigen::MatrixXd sigma)
    : QuadratureState(std::move(sigma), Eigen::VectorXd()) {}

QuadratureState QuadratureState::vacuum(int n) {
  if (n < 1) throw ValidationError("vacuum: mode count must be positive");
  return QuadratureState(Eigen::MatrixXd::Identity(2 * n, 2 * n) / 2.0);
}

Eigen::MatrixXd symplectic_form(int n) {
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (int k = 0; k < n; ++k) {
    omega(2 * k, 2 * k + 1) = 1.0;
    omega(2 * k + 1, 2 * k) = -1.0;
  }
  return omega;
}

Eigen::VectorXd symplectic_eigenvalues(const Eigen::MatrixXd& sigma) {
  if (sigma.rows() != sigma.cols() || sigma.rows() % 2 != 0 || sigma.rows() < 2)
    throw ValidationError("symplectic eigenvalues: need a 2n x 2n matrix");
  const int n = static_cast<int>(sigma.rows()) / 2;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sym(sigma);
  if (sym.eigenvalues()(0) <= 0.0)
    throw ValidationError("symplectic eigenvalues: matrix must be positive definite");
  // Spectrum of Omega * sigma is {+-i nu_j}; each nu appears twice among the
  // absolute imaginary parts, so sort and keep every other entry.
  Eigen::EigenSolver<Eigen::MatrixXd> es(symplectic_form(n) * sigma, false);
  std::vector<double> im(2 * n);
  for (int i = 0; i < 2 * n; ++i) im[i] = std::abs(es.eigenvalues()(i).imag());
  std::sort(im.begin(), im.end());
  Eigen::VectorXd nu(n);
  for (int j = 0; j < n; ++j) nu(j) = im[2 * j];
  return nu;
}

MarginResult is_physical(const QuadratureState& state, double tol) {
  const Eigen::MatrixXd& sigma = state.sigma();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sym(sigma);
  const double min_eig = sym.eigenvalues()(0);
  if (min_eig <= 0.0) {
    // Below the positive-definite boundary no symplectic spectrum exists; the
    // reported margin continuously extends nu_min - 1/2 -> -1/2 there.
    return {false, min_eig - 0.5};
  }
  const Eigen::VectorXd nu = symplectic_eigenvalues(sigma);
  const double margin = nu(0) - 0.5;
  return {margin >= -tol, margin};
}

// --- NormalCM ----------------------------------------------------------------

NormalCM::NormalCM(Eigen::VectorXd b, Eigen::VectorXcd c,
                   std::map<std::pair<int, int>, Cplx> d,
                   std::map<std::pair<int, int>, Cplx> dbar)
    : b_(std::move(b)), c_(std::move(c)) {
  const int n = static_cast<int>(b_.size());
  if (n < 1) throw ValidationError("normal covariance: at least one mode required");
  if (c_.size() != n)
    throw ValidationError("normal covariance: B and C must have one entry per mode");
  for (int k = 0; k < n; ++k) {
    if (!(b_[k] >= -0.5 - 1e-12)) {
      std::ostringstream os;
      os << "normal covariance: B[" << k << "] = " << b_[k] << " below -1/2";
      throw ValidationError(os.str());
    }
  }
  auto normalize = [n](std::map<std::pair<int, int>, Cplx> in, bool conj_on_swap,
                       const char* name) {
    std::map<std::pair<int, int>, Cplx> out;
    for (const auto& [key, val] : in) {
      auto [j, l] = key;
      if (j < 0 || l < 0 || j >= n || l >= n || j == l) {
        std::ostringstream os;
        os << "normal covariance: bad " << name << " pair (" << j << "," << l << ")";
        throw ValidationError(os.str());
      }
      Cplx v = val;
      if (j > l) {
        std::swap(j, l);
        if (conj_on_swap) v = std::conj(v);
      }
      auto [it, inserted] = out.emplace(std::make_pair(j, l), v);
      if (!inserted) {
        std::ostringstream os;
        os << "normal covariance: duplicate " << name << " pair (" << j << "," << l << ")";
        throw ValidationError(os.str());
      }
    }
    return out;
  };
  d_ = normalize(std::move(d), /*conj_on_swap=*/false, "D");
  dbar_ = normalize(std::move(dbar), /*conj_on_swap=*/true, "Dbar");
}

NormalCM NormalCM::single_mode(double b, Cplx c) {
  Eigen::VectorXd bv(1);
  bv << b;
  Eigen::VectorXcd cv(1);
  cv << c;
  return NormalCM(bv, cv, {}, {});
}

NormalCM NormalCM::two_mode(double b0, double b1, Cplx c0, Cplx c1, Cplx d, Cplx dbar) {
  Eigen::VectorXd bv(2);
  bv << b0, b1;
  Eigen::VectorXcd cv(2);
  cv << c0, c1;
  std::map<std::pair<int, int>, Cplx> dm, dbm;
  if (d != Cplx(0.0, 0.0)) dm[{0, 1}] = d;
  if (dbar != Cplx(0.0, 0.0)) dbm[{0, 1}] = dbar;
  return NormalCM(bv, cv, std::move(dm), std::move(dbm));
}

double NormalCM::b(int k) const {
  if (k < 0 || k >= modes()) throw ValidationError("normal covariance: mode index out of range");
  return b_[k];
}

Cplx NormalCM::c(int k) const {
  if (k < 0 || k >= modes()) throw ValidationError("normal covariance: mode index out of range");
  return c_[k];
}

Cplx NormalCM::d(int j, int l) const {
  if (j == l) return {0.0, 0.0};
  auto it = d_.find(ordered_key(j, l));
  return it == d_.end() ? Cplx(0.0, 0.0) : it->second;  // symmetric in (j, l)
}

Cplx NormalCM::dbar(int j, int l) const {
  if (j == l) return {0.0, 0.0};
  auto it = dbar_.find(ordered_key(j, l));
  if (it == dbar_.end()) return {0.0, 0.0};
  return j < l ? it->second : std::conj(it->second);
}

Eigen::MatrixXcd NormalCM::assemble() const {
  const int n = modes();
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
  for (int k = 0; k < n; ++k) {
    a(2 * k, 2 * k) = b_[k];
    a(2 * k + 1, 2 * k + 1) = b_[k];
    a(2 * k, 2 * k + 1) = c_[k];
    a(2 * k + 1, 2 * k) = std::conj(c_[k]);
  }
  for (int j = 0; j < n; ++j) {
    for (int l = 0; l < n; ++l) {
      if (j == l) continue;
      const Cplx dv = d(j, l);
      const Cplx db = dbar(j, l);
      a(2 * j, 2 * l) = std::conj(db);
      a(2 * j, 2 * l + 1) = dv;
      a(2 * j + 1, 2 * l) = std::conj(dv);
      a(2 * j + 1, 2 * l + 1) = db;
    }
  }
  return a;
}

NormalCM NormalCM::restricted(const std::vector<int>& keep) const {
  if (keep.empty()) throw ValidationError("restriction: at least one mode required");
  for (int k : keep)
    if (k < 0 || k >= modes())
      throw ValidationError("restriction: mode index out of range");
  const int m = static_cast<int>(keep.size());
  Eigen::VectorXd b(m);
  Eigen::VectorXcd c(m);
  std::map<std::pair<int, int>, Cplx> dm, dbm;
  for (int i = 0; i < m; ++i) {
    b[i] = b_[keep[i]];
    c[i] = c_[keep[i]];
  }
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      if (keep[i] == keep[j])
        throw ValidationError("restriction: repeated mode index");
      const Cplx dv = d(keep[i], keep[j]);
      const Cplx db = dbar(keep[i], keep[j]);
      if (dv != Cplx(0.0, 0.0)) dm[{i, j}] = dv;
      if (db != Cplx(0.0, 0.0)) dbm[{i, j}] = db;
    }
  }
  return NormalCM(std::move(b), std::move(c), std::move(dm), std::move(dbm));
}

// --- conversions --------------------------------------------------------------

NormalCM to_normal(const QuadratureState& state, double tol) {
  const MarginResult phys = is_physical(state, tol);
  if (!phys.ok) {
    std::ostringstream os;
    os << "conversion requires a physical state (margin " << phys.margin << ")";
    throw ValidationError(os.str());
  }
  const Eigen::MatrixXd& s = state.sigma();
  const int n = state.modes();
  Eigen::VectorXd b(n);
  Eigen::VectorXcd c(n);
  std::map<std::pair<int, int>, Cplx> dm, dbm;
  for (int k = 0; k < n; ++k) {
    const double sxx = s(2 * k, 2 * k);
    const double spp = s(2 * k + 1, 2 * k + 1);
    const double sxp = s(2 * k, 2 * k + 1);
    b[k] = (sxx + spp) / 2.0 - 0.5;
    c[k] = Cplx((sxx - spp) / 2.0, sxp);
  }
  for (int j = 0; j < n; ++j) {
    for (int l = j + 1; l < n; ++l) {
      const double xx = s(2 * j, 2 * l);
      const double xp = s(2 * j, 2 * l + 1);
      const double px = s(2 * j + 1, 2 * l);
      const double pp = s(2 * j + 1, 2 * l + 1);
      const Cplx dv((xx - pp) / 2.0, (xp + px) / 2.0);
      const Cplx db((xx + pp) / 2.0, (xp - px) / 2.0);
      if (dv != Cplx(0.0, 0.0)) dm[{j, l}] = dv;
      if (db != Cplx(0.0, 0.0)) dbm[{j, l}] = db;
    }
  }
  return NormalCM(std::move(b), std::move(c), std::move(dm), std::move(dbm));
}

QuadratureState from_normal(const NormalCM& cm, double tol) {
  const int n = cm.modes();
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (int k = 0; k < n; ++k) {
    const double b = cm.b(k);
    const Cplx c = cm.c(k);
    s(2 * k, 2 * k) = b + 0.5 + c.real();
    s(2 * k + 1, 2 * k + 1) = b + 0.5 - c.real();
    s(2 * k, 2 * k + 1) = c.imag();
    s(2 * k + 1, 2 * k) = c.imag();
  }
  for (int j = 0; j < n; ++j) {
    for (int l = j + 1; l < n; ++l) {
      const Cplx dv = cm.d(j, l);
      const Cplx db = cm.dbar(j, l);
      const Cplx sum = dv + db;    // x_j x_l + i x_j p_l
      const Cplx diff = db - dv;   // p_j p_l - i p_j x_l
      s(2 * j, 2 * l) = sum.real();
      s(2 * j, 2 * l + 1) = sum.imag();
      s(2 * j + 1, 2 * l) = -diff.imag();
      s(2 * j + 1, 2 * l + 1) = diff.real();
      s.block<2, 2>(2 * l, 2 * j) = s.block<2, 2>(2 * j, 2 * l).transpose();
    }
  }
  QuadratureState state(std::move(s));
  const MarginResult phys = is_physical(state, tol);
  if (!phys.ok) {
    std::ostringstream os;
    os << "normal covariance does not describe a physical state (margin "
       << phys.margin << ")";
    throw ValidationError(os.str());
  }
  return state;
}

// --- classicality --------------------------------------------------------------

MarginResult is_classical(const NormalCM& cm, double tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(cm.assemble());
  const double margin = es.eigenvalues()(0);
  return {margin >= -tol, margin};
}

MarginResult is_classical(const QuadratureState& state, double tol) {
  const int dim = static_cast<int>(state.sigma().rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      state.sigma() - Eigen::MatrixXd::Identity(dim, dim) / 2.0);
  const double margin = es.eigenvalues()(0);
  return {margin >= -tol, margin};
}

// --- phase rotation --------------------------------------------------------------

NormalCM phase_shift(const NormalCM& cm, const Eigen::VectorXd& phis) {
  const int n = cm.modes();
  if (phis.size() != n)
    throw ValidationError("phase shift: one angle per mode required");
  Eigen::VectorXd b(n);
  Eigen::VectorXcd c(n);
  std::map<std::pair<int, int>, Cplx> dm, dbm;
  for (int k = 0; k < n; ++k) {
    b[k] = cm.b(k);
    c[k] = cm.c(k) * std::polar(1.0, -2.0 * phis[k]);
  }
  for (int j = 0; j < n; ++j) {
    for (int l = j + 1; l < n; ++l) {
      const Cplx dv = cm.d(j, l) * std::polar(1.0, -(phis[j] + phis[l]));
      const Cplx db = cm.dbar(j, l) * std::polar(1.0, phis[j] - phis[l]);
      if (dv != Cplx(0.0, 0.0)) dm[{j, l}] = dv;
      if (db != Cplx(0.0, 0.0)) dbm[{j, l}] = db;
    }
  }
  return NormalCM(std::move(b), std::move(c), std::move(dm), std::move(dbm));
}

// --- displacement -----------------------------------------------------------------

DisplacementConfig::DisplacementConfig(Eigen::VectorXd amplitudes, Eigen::VectorXd phases)
    : amp_(std::move(amplitudes)), phase_(std::move(phases)) {
  if (amp_.size() < 1) throw ValidationError("displacement: at least one mode required");
  if (phase_.size() != amp_.size())
    throw ValidationError("displacement: amplitude/phase length mismatch");
  for (int k = 0; k < amp_.size(); ++k) {
    if (!(amp_[k] >= 0.0))
      throw ValidationError("displacement: amplitudes must be nonnegative");
    phase_[k] = wrap_2pi(phase_[k]);
  }
}

DisplacementConfig DisplacementConfig::none(int n) {
  return DisplacementConfig(Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n));
}

DisplacementConfig DisplacementConfig::uniform(double x, Eigen::VectorXd phases) {
  if (!(x >= 0.0)) throw ValidationError("displacement: strength x must be nonnegative");
  const auto n = phases.size();
  return DisplacementConfig(Eigen::VectorXd::Constant(n, std::sqrt(x)), std::move(phases));
}

Cplx DisplacementConfig::xi(int k) const {
  return std::polar(amp_[k], phase_[k]);
}

bool DisplacementConfig::is_zero() const {
  return (amp_.array() == 0.0).all();
}

DisplacementConfig mean_displacement(const QuadratureState& state) {
  const int n = state.modes();
  Eigen::VectorXd amp(n), ph(n);
  for (int k = 0; k < n; ++k) {
    const Cplx xi(state.mean()[2 * k] / std::sqrt(2.0),
                  state.mean()[2 * k + 1] / std::sqrt(2.0));
    amp[k] = std::abs(xi);
    ph[k] = amp[k] == 0.0 ? 0.0 : std::arg(xi);
  }
  return DisplacementConfig(std::move(amp), std::move(ph));
}

// --- two-mode standard form --------------------------------------------------------

Eigen::Matrix4d StandardFormParams::sigma_st() const {
  Eigen::Matrix4d s = Eigen::Matrix4d::Zero();
  s(0, 0) = s(1, 1) = q_j;
  s(2, 2) = s(3, 3) = q_l;
  s(0, 2) = s(2, 0) = q_jl;
  s(1, 3) = s(3, 1) = q_pjl;
  return s;
}

StandardFormReduction reduce_to_standard_form(const NormalCM& cm) {
  if (cm.modes() != 2)
    throw ValidationError("standard form: exactly two modes required");
  const double cmag = std::max(std::abs(cm.c(0)), std::abs(cm.c(1)));
  if (cmag > kZeroCTol)
    throw UnsupportedError(
        "standard form requires vanishing single-mode C terms; use the general "
        "witness analysis for squeezed marginals");

  const Cplx dv = cm.d(0, 1);
  const Cplx db = cm.dbar(0, 1);
  // Phases that rotate both cross terms onto the nonnegative real axis:
  // sum = arg D fixes D' = |D|, difference = arg Dbar fixes Dbar' = |Dbar|.
  const double sum = std::abs(dv) == 0.0 ? 0.0 : std::arg(dv);
  const double diff = std::abs(db) == 0.0 ? 0.0 : std::arg(db);
  StandardFormReduction red;
  red.phi_j = (sum - diff) / 2.0;
  red.phi_l = (sum + diff) / 2.0;

  Eigen::VectorXd phis(2);
  phis << red.phi_j, red.phi_l;
  const NormalCM rotated = phase_shift(cm, phis);
  const Cplx dr = rotated.d(0, 1);
  const Cplx dbr = rotated.dbar(0, 1);
  const double scale = std::max({1.0, std::abs(dr), std::abs(dbr)});
  if (std::abs(dr.imag()) > kResidueTol * scale ||
      std::abs(dbr.imag()) > kResidueTol * scale)
    throw ConsistencyError("standard form: cross terms failed to rotate real");

  red.params.q_j = rotated.b(0) + 0.5;
  red.params.q_l = rotated.b(1) + 0.5;
  red.params.q_jl = dbr.real() + dr.real();
  red.params.q_pjl = dbr.real() - dr.real();

  const QuadratureState st(red.params.sigma_st());
  const MarginResult phys = is_physical(st);
  if (!phys.ok) {
    std::ostringstream os;
    os << "standard form describes an unphysical state (margin " << phys.margin
       << "); check the input covariances";
    throw ValidationError(os.str());
  }
  return red;
}

double duan_sum(const StandardFormParams& params) {
  const Eigen::Matrix4d s = params.sigma_st();
  const MarginResult phys = is_physical(QuadratureState(s));
  if (!phys.ok)
    throw ValidationError("quadrature-sum criterion: parameters are unphysical");
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  double best = 0.0;
  for (int i = 0; i < 2; ++i) {
    const double h = i == 0 ? 1.0 : -1.0;
    Eigen::Vector4d u = Eigen::Vector4d::Zero(), v = Eigen::Vector4d::Zero();
    u(0) = std::abs(h) * inv_sqrt2;  // x_j
    u(2) = inv_sqrt2 / h;            // x_l
    v(1) = std::abs(h) * inv_sqrt2;  // p_j
    v(3) = -inv_sqrt2 / h;           // p_l
    const double total = u.dot(s * u) + v.dot(s * v);
    if (i == 0 || total < best) best = total;
  }
  // Closed form of the same minimization; disagreement means a wiring bug.
  const double closed = params.q_j + params.q_l - std::abs(params.q_jl - params.q_pjl);
  if (std::abs(best - closed) > 1e-10 * std::max(1.0, std::abs(closed)))
    throw ConsistencyError("quadrature-sum criterion: vector and closed forms disagree");
  return best;
}

}  // namespace ncwit
