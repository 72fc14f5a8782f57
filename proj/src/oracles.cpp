#include "ncwit/oracles.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace ncwit {

namespace {

constexpr int kMcChunks = 8;
constexpr int kMaxFdOrder = 4;
constexpr int kMaxPairingSymbols = 12;

void validate_oracle_cap(int modes, const MultiIndex& cap, int max_order,
                         const char* who) {
  if (static_cast<int>(cap.size()) != modes)
    throw ValidationError(std::string(who) + ": cap must list one order per mode");
  for (int c : cap) {
    if (c < 0) throw ValidationError(std::string(who) + ": negative order requested");
    if (c > max_order) {
      std::ostringstream os;
      os << who << ": per-mode order " << c << " exceeds " << max_order;
      throw UnsupportedError(os.str());
    }
  }
}

// Odometer enumeration of all multi-indices <= cap, in a fixed order shared by
// the sampler and the conversion step.
std::vector<MultiIndex> enumerate_indices(const MultiIndex& cap) {
  std::vector<MultiIndex> out;
  MultiIndex k(cap.size(), 0);
  for (;;) {
    out.push_back(k);
    std::size_t j = 0;
    for (; j < k.size(); ++j) {
      if (++k[j] <= cap[j]) break;
      k[j] = 0;
    }
    if (j == k.size()) break;
  }
  return out;
}

double binom(int n, int k) {
  double v = 1.0;
  for (int i = 0; i < k; ++i) v = v * (n - i) / (i + 1);
  return v;
}

double factorial(int n) {
  double v = 1.0;
  for (int i = 2; i <= n; ++i) v *= i;
  return v;
}

// Weight of the reordering step for one ladder difference p against order m:
// prod_k binom(m_k, p_k)^2 p_k!.
double ladder_weight(const MultiIndex& m, const MultiIndex& p) {
  double w = 1.0;
  for (std::size_t k = 0; k < m.size(); ++k) {
    const double b = binom(m[k], p[k]);
    w *= b * b * factorial(p[k]);
  }
  return w;
}

struct Welford {
  long n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double v) {
    ++n;
    const double d = v - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (v - mean);
  }

  // Chan et al. pairwise combination; merge order is fixed by the caller.
  void merge(const Welford& o) {
    if (o.n == 0) return;
    if (n == 0) {
      *this = o;
      return;
    }
    const double d = o.mean - mean;
    const double total = static_cast<double>(n + o.n);
    mean += d * static_cast<double>(o.n) / total;
    m2 += o.m2 + d * d * static_cast<double>(n) * static_cast<double>(o.n) / total;
    n += o.n;
  }
};

}  // namespace

void SplitMix64::normal_pair(double& z0, double& z1) {
  // u1 in (0, 1] keeps the log finite; u2 in [0, 1).
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  z0 = r * std::cos(2.0 * std::numbers::pi * u2);
  z1 = r * std::sin(2.0 * std::numbers::pi * u2);
}

std::map<MultiIndex, MCEstimate> mc_intensity_moments(const QuadratureState& state,
                                                      const MultiIndex& cap,
                                                      long n_samples,
                                                      std::uint64_t seed) {
  const int n = state.modes();
  validate_oracle_cap(n, cap, kMaxOrderPerMode, "monte carlo");
  if (n_samples < 2)
    throw ValidationError("monte carlo: at least two samples required");
  const MarginResult phys = is_physical(state);
  if (!phys.ok)
    throw ValidationError("monte carlo: state must be physical to sample");

  const int dim = 2 * n;
  const Eigen::MatrixXd husimi =
      state.sigma() + Eigen::MatrixXd::Identity(dim, dim) / 2.0;
  Eigen::LLT<Eigen::MatrixXd> llt(husimi);
  if (llt.info() != Eigen::Success)
    throw ValidationError("monte carlo: sampling covariance is not positive definite");
  const Eigen::MatrixXd chol = llt.matrixL();

  const std::vector<MultiIndex> indices = enumerate_indices(cap);

  // Fixed chunking with per-chunk seeds derived from the master seed: the
  // estimate is bit-identical for a given (seed, n_samples) pair.
  SplitMix64 seeder(seed);
  std::array<std::uint64_t, kMcChunks> chunk_seed{};
  for (auto& s : chunk_seed) s = seeder.next();

  std::vector<Welford> acc(indices.size());
  Eigen::VectorXd z(dim), y(dim);
  std::vector<std::vector<double>> powers(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k)
    powers[static_cast<std::size_t>(k)].resize(static_cast<std::size_t>(cap[k]) + 1);

  for (int chunk = 0; chunk < kMcChunks; ++chunk) {
    long count = n_samples / kMcChunks;
    if (chunk < n_samples % kMcChunks) ++count;
    SplitMix64 rng(chunk_seed[static_cast<std::size_t>(chunk)]);
    std::vector<Welford> local(indices.size());
    for (long s = 0; s < count; ++s) {
      for (int i = 0; i < n; ++i) rng.normal_pair(z[2 * i], z[2 * i + 1]);
      y = chol * z + state.mean();
      for (int k = 0; k < n; ++k) {
        // |beta_k|^2 for beta = (x + i p)/sqrt(2)
        const double w = 0.5 * (y[2 * k] * y[2 * k] + y[2 * k + 1] * y[2 * k + 1]);
        auto& pw = powers[static_cast<std::size_t>(k)];
        pw[0] = 1.0;
        for (int e = 1; e <= cap[k]; ++e) pw[static_cast<std::size_t>(e)] = pw[e - 1] * w;
      }
      for (std::size_t i = 0; i < indices.size(); ++i) {
        double v = 1.0;
        for (int k = 0; k < n; ++k)
          v *= powers[static_cast<std::size_t>(k)][static_cast<std::size_t>(indices[i][static_cast<std::size_t>(k)])];
        local[i].add(v);
      }
    }
    for (std::size_t i = 0; i < indices.size(); ++i) acc[i].merge(local[i]);
  }

  // Antinormal estimates -> normal order through the triangular ladder
  // inversion, tracking each result as a linear combination of the raw
  // estimates so standard errors can be propagated (covariances between the
  // raw moments are ignored; the errors are indicative).
  std::map<MultiIndex, std::size_t> pos;
  for (std::size_t i = 0; i < indices.size(); ++i) pos[indices[i]] = i;

  std::vector<std::vector<double>> weight(indices.size(),
                                          std::vector<double>(indices.size(), 0.0));
  std::vector<std::size_t> order(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    int ta = 0, tb = 0;
    for (int v : indices[a]) ta += v;
    for (int v : indices[b]) tb += v;
    return ta < tb;
  });
  for (std::size_t oi : order) {
    const MultiIndex& m = indices[oi];
    weight[oi][oi] = 1.0;
    // subtract ladder_weight(m, p) * N(m - p) for every 0 != p <= m
    std::vector<MultiIndex> subs = enumerate_indices(m);
    for (const MultiIndex& p : subs) {
      bool zero = true;
      for (int v : p)
        if (v != 0) zero = false;
      if (zero) continue;
      MultiIndex rest(m.size());
      for (std::size_t k = 0; k < m.size(); ++k) rest[k] = m[k] - p[k];
      const double w = ladder_weight(m, p);
      const auto& inner = weight[pos.at(rest)];
      for (std::size_t q = 0; q < indices.size(); ++q) weight[oi][q] -= w * inner[q];
    }
  }

  std::map<MultiIndex, MCEstimate> out;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    double value = 0.0, var = 0.0;
    for (std::size_t q = 0; q < indices.size(); ++q) {
      const double w = weight[i][q];
      if (w == 0.0) continue;
      const Welford& a = acc[q];
      value += w * a.mean;
      const double se2 = a.n > 1 ? a.m2 / static_cast<double>(a.n - 1) /
                                       static_cast<double>(a.n)
                                 : 0.0;
      var += w * w * se2;
    }
    out[indices[i]] = MCEstimate{value, std::sqrt(var), n_samples, seed};
  }
  return out;
}

// --- finite differences --------------------------------------------------------

namespace {

struct Stencil {
  std::vector<std::pair<int, double>> taps;  // (offset multiple, weight)
};

// Central stencils; k-th derivative weights divided by h^k at evaluation time.
const Stencil& stencil_for(int k) {
  static const std::array<Stencil, kMaxFdOrder + 1> table = {{
      {{{0, 1.0}}},
      {{{-1, -0.5}, {1, 0.5}}},
      {{{-1, 1.0}, {0, -2.0}, {1, 1.0}}},
      {{{-2, -0.5}, {-1, 1.0}, {1, -1.0}, {2, 0.5}}},
      {{{-2, 1.0}, {-1, -4.0}, {0, 6.0}, {1, -4.0}, {2, 1.0}}},
  }};
  return table[static_cast<std::size_t>(k)];
}

// Step sizes chosen so that, after two Richardson levels, truncation and
// roundoff both sit well under 1e-7 relative for total orders <= 3.  Roundoff
// scales as eps / prod_k h_k^{m_k} and dominates mixed indices, so the steps
// lean large and the Richardson ladder absorbs the truncation cost.
double base_step(int k) {
  switch (k) {
    case 1:
      return 5e-3;
    case 2:
      return 7.5e-3;
    case 3:
      return 1.5e-2;
    default:
      return 3e-2;
  }
}

double mixed_difference(const NormalCM& cm, const DisplacementConfig& disp,
                        const MultiIndex& m, const Eigen::VectorXd& steps) {
  const int n = cm.modes();
  std::vector<const Stencil*> st(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) st[static_cast<std::size_t>(k)] = &stencil_for(m[static_cast<std::size_t>(k)]);
  std::vector<std::size_t> tap(static_cast<std::size_t>(n), 0);
  double total = 0.0;
  for (;;) {
    double w = 1.0;
    Eigen::VectorXd lambda = Eigen::VectorXd::Zero(n);
    for (int k = 0; k < n; ++k) {
      const auto& [off, wt] = st[static_cast<std::size_t>(k)]->taps[tap[static_cast<std::size_t>(k)]];
      lambda[k] = off * steps[k];
      w *= wt / std::pow(steps[k], m[static_cast<std::size_t>(k)]);
    }
    total += w * generating_function_value(cm, disp, lambda);
    std::size_t j = 0;
    for (; j < tap.size(); ++j) {
      if (++tap[j] < st[j]->taps.size()) break;
      tap[j] = 0;
    }
    if (j == tap.size()) break;
  }
  return total;
}

}  // namespace

MomentTable finite_difference_moments(const NormalCM& cm,
                                      const DisplacementConfig& disp,
                                      const MultiIndex& cap) {
  const int n = cm.modes();
  validate_oracle_cap(n, cap, kMaxFdOrder, "finite differences");
  if (disp.modes() != n)
    throw ValidationError("finite differences: displacement mode count mismatch");

  MomentTable table;
  table.cap = cap;
  for (const MultiIndex& m : enumerate_indices(cap)) {
    int total_order = 0;
    for (int v : m) total_order += v;
    if (total_order == 0) {
      table.values[m] = 1.0;
      continue;
    }
    Eigen::VectorXd steps(n);
    for (int k = 0; k < n; ++k) {
      const double amp = disp.amplitude(k);
      const double scale =
          1.0 + cm.b(k) + std::abs(cm.c(k)) + amp * amp;  // moment magnitude proxy
      steps[k] = m[static_cast<std::size_t>(k)] == 0 ? 1.0 : base_step(m[static_cast<std::size_t>(k)]) / scale;
    }
    const double d4 = mixed_difference(cm, disp, m, 4.0 * steps);
    const double d2 = mixed_difference(cm, disp, m, 2.0 * steps);
    const double d1 = mixed_difference(cm, disp, m, steps);
    // Two Richardson levels eliminate the h^2 and h^4 truncation terms while
    // the finest step -- and with it the relative roundoff floor -- stays put.
    const double r1 = (4.0 * d1 - d2) / 3.0;
    const double r0 = (4.0 * d2 - d4) / 3.0;
    const double deriv = (16.0 * r1 - r0) / 15.0;
    table.values[m] = (total_order % 2 == 0 ? 1.0 : -1.0) * deriv;
  }
  return table;
}

// --- pairing expansion -----------------------------------------------------------

namespace {

struct Symbol {
  int mode = 0;
  bool dagger = false;
};

Cplx symbol_mean(const DisplacementConfig& disp, const Symbol& s) {
  const Cplx xi = disp.xi(s.mode);
  return s.dagger ? std::conj(xi) : xi;
}

Cplx pair_value(const NormalCM& cm, const Symbol& p, const Symbol& q) {
  if (p.dagger && q.dagger)
    return p.mode == q.mode ? std::conj(cm.c(p.mode)) : std::conj(cm.d(p.mode, q.mode));
  if (!p.dagger && !q.dagger)
    return p.mode == q.mode ? cm.c(p.mode) : cm.d(p.mode, q.mode);
  if (p.dagger)  // dagger paired with plain
    return p.mode == q.mode ? Cplx(cm.b(p.mode), 0.0) : cm.dbar(p.mode, q.mode);
  // plain paired with dagger
  return p.mode == q.mode ? Cplx(cm.b(p.mode), 0.0) : std::conj(cm.dbar(p.mode, q.mode));
}

Cplx pairing_sum(const NormalCM& cm, const DisplacementConfig& disp,
                 std::vector<Symbol>& symbols) {
  if (symbols.empty()) return {1.0, 0.0};
  const Symbol head = symbols.back();
  symbols.pop_back();
  Cplx total = symbol_mean(disp, head) * pairing_sum(cm, disp, symbols);
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    const Symbol partner = symbols[i];
    std::swap(symbols[i], symbols.back());
    Symbol saved = symbols.back();
    symbols.pop_back();
    total += pair_value(cm, head, partner) * pairing_sum(cm, disp, symbols);
    symbols.push_back(saved);
    std::swap(symbols[i], symbols.back());
  }
  symbols.push_back(head);
  return total;
}

}  // namespace

double pairing_moment(const NormalCM& cm, const DisplacementConfig& disp,
                      const MultiIndex& m) {
  if (static_cast<int>(m.size()) != cm.modes())
    throw ValidationError("pairing oracle: one order per mode required");
  if (disp.modes() != cm.modes())
    throw ValidationError("pairing oracle: displacement mode count mismatch");
  std::vector<Symbol> symbols;
  for (int k = 0; k < cm.modes(); ++k) {
    if (m[static_cast<std::size_t>(k)] < 0)
      throw ValidationError("pairing oracle: negative order requested");
    for (int i = 0; i < m[static_cast<std::size_t>(k)]; ++i) {
      symbols.push_back({k, true});
      symbols.push_back({k, false});
    }
  }
  if (static_cast<int>(symbols.size()) > kMaxPairingSymbols)
    throw UnsupportedError("pairing oracle: total order too large");
  const Cplx v = pairing_sum(cm, disp, symbols);
  if (std::abs(v.imag()) > 1e-10 * std::max(1.0, std::abs(v.real())))
    throw ConsistencyError("pairing oracle: moment has a complex residue");
  return v.real();
}

// --- partial transpose -------------------------------------------------------------

PptResult ppt_entangled(const QuadratureState& state, double tol) {
  if (state.modes() != 2)
    throw ValidationError("partial transpose: exactly two modes required");
  const MarginResult phys = is_physical(state, tol);
  if (!phys.ok)
    throw ValidationError("partial transpose: state must be physical");
  Eigen::Matrix4d flip = Eigen::Matrix4d::Identity();
  flip(3, 3) = -1.0;  // transpose = momentum reversal on the second mode
  const Eigen::MatrixXd tilde = flip * state.sigma() * flip;
  const Eigen::VectorXd nu = symplectic_eigenvalues(tilde);
  PptResult out;
  out.nu_min = nu(0);
  out.margin = 0.5 - nu(0);
  out.entangled = nu(0) < 0.5 - tol;
  return out;
}

}  // namespace ncwit
