#pragma once

// Independent cross-check oracles.  Nothing here reuses the series engine's
// algebra: moments are reproduced by (a) Monte Carlo sampling of the Husimi
// distribution, (b) finite differences of the scalar generating function, and
// (c) direct Gaussian-moment (pairing) expansion.  A separate partial-transpose
// test provides the entanglement ground truth for two-mode states.

#include <cstdint>
#include <map>

#include "ncwit/gaussian.hpp"
#include "ncwit/moments.hpp"

namespace ncwit {

// --- deterministic RNG ---------------------------------------------------------

// SplitMix64: tiny, seedable, and stable across platforms — results must be
// bit-identical for a given seed no matter how the work is chunked.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Standard normal pair via Box-Muller (no caching: keeps the stream
  // position independent of call parity).
  void normal_pair(double& z0, double& z1);

 private:
  std::uint64_t state_;
};

// --- Monte Carlo ----------------------------------------------------------------

struct MCEstimate {
  double value = 0.0;
  double std_error = 0.0;
  long n_samples = 0;
  std::uint64_t seed = 0;
};

// Samples the Husimi distribution (Gaussian with covariance sigma + I/2 around
// the mean), forms antinormally-ordered intensity moments E[prod |beta_k|^{2m_k}],
// and converts them to normal order through the binomial ladder
//   <a^m a^dag^m> = sum_p binom(m,p)^2 p! <a^dag^{m-p} a^{m-p}>.
// Work is split into 8 fixed chunks with seeds derived from `seed`; the merge
// order is fixed, so results are bit-identical for a given seed regardless of
// threading.  Standard errors propagate the conversion weights (covariances
// between estimated antinormal moments are ignored — errors are indicative).
std::map<MultiIndex, MCEstimate> mc_intensity_moments(const QuadratureState& state,
                                                      const MultiIndex& cap,
                                                      long n_samples,
                                                      std::uint64_t seed);

// --- finite differences -----------------------------------------------------------

// Mixed central differences of generating_function_value at lambda = 0 with
// two Richardson levels.  Steps are order- and scale-adjusted: a fixed 1e-3
// step cannot reach 1e-7 relative accuracy at third order (roundoff ~ eps/h^3),
// so h grows with the derivative order and shrinks with the moment scale, and
// the double extrapolation absorbs the truncation cost of the larger steps.
// Practical accuracy: <= 3rd total order ~3e-8 relative worst-case; mixed
// 4th-order indices ~5e-6 (roundoff-floor limited).
MomentTable finite_difference_moments(const NormalCM& cm,
                                      const DisplacementConfig& disp,
                                      const MultiIndex& cap);

// --- pairing (Gaussian-moment) expansion ---------------------------------------

// Normal-ordered mixed moment <prod_k (a_k^dag)^{m_k} (a_k)^{m_k}> evaluated by
// enumerating partial pairings: every symbol either pairs with a later one
// (second moments B, C, D, Dbar and conjugates) or contributes its first
// moment (xi or conj(xi)).  Exact; cost grows factorially, fine for |m| <= 6.
double pairing_moment(const NormalCM& cm, const DisplacementConfig& disp,
                      const MultiIndex& m);

// --- partial transpose -------------------------------------------------------------

struct PptResult {
  bool entangled = false;
  double margin = 0.0;  // 1/2 - min symplectic eigenvalue after PT
  double nu_min = 0.0;
};

// Two-mode partial-transpose test: negate the second mode's momentum row and
// column of sigma; the state is entangled iff the smallest symplectic
// eigenvalue of the result drops below 1/2.
PptResult ppt_entangled(const QuadratureState& state, double tol = kPhysicalTol);

}  // namespace ncwit
