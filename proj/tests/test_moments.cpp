#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "helpers.hpp"
#include "ncwit/errors.hpp"
#include "ncwit/gaussian.hpp"
#include "ncwit/moments.hpp"

using namespace ncwit;
using namespace testutil;

TEST_CASE("thermal intensity moments are k! nbar^k") {
  const double nbar = 0.7;
  const NormalCM cm = to_normal(thermal(nbar));
  const MomentTable t = intensity_moments(cm, DisplacementConfig::none(1), {3});
  CHECK(t.at({1}) == Catch::Approx(nbar).margin(1e-13));
  CHECK(t.at({2}) == Catch::Approx(2 * nbar * nbar).margin(1e-13));
  CHECK(t.at({3}) == Catch::Approx(6 * nbar * nbar * nbar).margin(1e-13));
  CHECK(t.at({0}) == Catch::Approx(1.0));
}

TEST_CASE("coherent intensity moments are x^k") {
  const NormalCM cm = NormalCM::single_mode(0.0, Cplx(0, 0));
  Eigen::VectorXd amp(1), ph(1);
  amp << 1.3;
  ph << 0.4;
  const MomentTable t = intensity_moments(cm, DisplacementConfig(amp, ph), {3});
  const double x = 1.3 * 1.3;
  CHECK(t.at({1}) == Catch::Approx(x).margin(1e-13));
  CHECK(t.at({2}) == Catch::Approx(x * x).margin(1e-13));
  CHECK(t.at({3}) == Catch::Approx(x * x * x).margin(1e-12));
}

TEST_CASE("squeezed-vacuum moments match frozen oracle values") {
  const NormalCM cm = to_normal(squeezed_vacuum(0.5));
  const MomentTable t = intensity_moments(cm, DisplacementConfig::none(1), {3});
  CHECK(close(t.at({1}), frozen::kSq05W1, 1e-12));
  CHECK(close(t.at({2}), frozen::kSq05W2, 1e-12));
  CHECK(close(t.at({3}), frozen::kSq05W3, 1e-12));

  // The same values in closed form: 2B^2 + |C|^2 and 6B^3 + 9B|C|^2.
  const double b = cm.b(0), c2 = std::norm(cm.c(0));
  CHECK(close(t.at({2}), 2 * b * b + c2, 1e-12));
  CHECK(close(t.at({3}), 6 * b * b * b + 9 * b * c2, 1e-12));
}

TEST_CASE("displaced squeezed-thermal moments match frozen oracle values") {
  Eigen::VectorXd amp(1), ph(1);
  amp << 0.9;
  ph << 0.7;
  const MomentTable t =
      intensity_moments(disp_state_cm(), DisplacementConfig(amp, ph), {3});
  CHECK(close(t.at({1}), frozen::kDispW1, 1e-12));
  CHECK(close(t.at({2}), frozen::kDispW2, 1e-12));
  CHECK(close(t.at({3}), frozen::kDispW3, 1e-12));
}

TEST_CASE("correlated-pair moment table matches frozen oracle values") {
  Eigen::VectorXd amp(2), ph(2);
  amp << 0.8, 0.6;
  ph << 0.3, -1.1;
  const MomentTable t =
      intensity_moments(pair_state_cm(), DisplacementConfig(amp, ph), {2, 2});
  CHECK(close(t.at({1, 0}), frozen::kPairW10, 1e-12));
  CHECK(close(t.at({0, 1}), frozen::kPairW01, 1e-12));
  CHECK(close(t.at({1, 1}), frozen::kPairW11, 1e-12));
  CHECK(close(t.at({2, 0}), frozen::kPairW20, 1e-12));
  CHECK(close(t.at({0, 2}), frozen::kPairW02, 1e-12));
  CHECK(close(t.at({2, 1}), frozen::kPairW21, 1e-12));
  CHECK(close(t.at({1, 2}), frozen::kPairW12, 1e-12));
  CHECK(close(t.at({2, 2}), frozen::kPairW22, 1e-12));
}

TEST_CASE("polynomial-in-x path agrees with the numeric path") {
  Eigen::VectorXd phases(2);
  phases << 0.3, -1.1;
  const MomentPolynomialTable pt =
      intensity_moment_polynomials(pair_state_cm(), phases, {2, 2});
  for (double x : {0.0, 0.7, 2.3}) {
    const MomentTable direct = intensity_moments(
        pair_state_cm(), DisplacementConfig::uniform(x, phases), {2, 2});
    const MomentTable via_poly = pt.evaluate(x);
    for (const auto& [k, v] : direct.values)
      CHECK(close(via_poly.at(k), v, 1e-11));
  }
}

TEST_CASE("scalar generating function matches closed forms") {
  Eigen::VectorXd lam(1);

  // Thermal: 1/(1 + lambda nbar).
  const double nbar = 0.7;
  lam << 0.37;
  CHECK(generating_function_value(to_normal(thermal(nbar)),
                                  DisplacementConfig::none(1), lam) ==
        Catch::Approx(1.0 / (1 + 0.37 * nbar)).margin(1e-13));

  // Displaced thermal: exp(-lambda x / (1 + lambda nbar)) / (1 + lambda nbar).
  Eigen::VectorXd amp(1), ph(1);
  amp << 0.9;
  ph << 0.7;
  const double x = 0.81;
  const double denom = 1 + 0.37 * nbar;
  CHECK(generating_function_value(to_normal(thermal(nbar)),
                                  DisplacementConfig(amp, ph), lam) ==
        Catch::Approx(std::exp(-0.37 * x / denom) / denom).margin(1e-13));

  // Squeezed vacuum, no displacement: ((1+lambda B)^2 - lambda^2 |C|^2)^{-1/2}.
  const NormalCM sq = to_normal(squeezed_vacuum(0.5));
  lam << 0.2;
  const double det =
      (1 + 0.2 * sq.b(0)) * (1 + 0.2 * sq.b(0)) - 0.04 * std::norm(sq.c(0));
  CHECK(generating_function_value(sq, DisplacementConfig::none(1), lam) ==
        Catch::Approx(1.0 / std::sqrt(det)).margin(1e-13));

  // Displaced squeezed-thermal: the exponent picks up the phase-sensitive
  // c-tilde = Re[C e^{-2 i alpha}] term.
  const NormalCM dm = disp_state_cm();
  lam << 0.4;
  const double b = dm.b(0);
  const double ct = (dm.c(0) * std::polar(1.0, -2 * 0.7)).real();
  const double det2 = (1 + 0.4 * b) * (1 + 0.4 * b) - 0.16 * std::norm(dm.c(0));
  const double expo = -0.4 * 0.81 * (1 + 0.4 * b - 0.4 * ct) / det2;
  CHECK(generating_function_value(dm, DisplacementConfig(amp, ph), lam) ==
        Catch::Approx(std::exp(expo) / std::sqrt(det2)).margin(1e-13));
}

TEST_CASE("moment engine input validation") {
  const NormalCM cm = to_normal(thermal(0.5));
  CHECK_THROWS_AS(intensity_moments(cm, DisplacementConfig::none(1), {7}),
                  CapacityError);
  CHECK_THROWS_AS(intensity_moments(cm, DisplacementConfig::none(2), {3}),
                  ValidationError);
  CHECK_THROWS_AS(intensity_moments(cm, DisplacementConfig::none(1), {2, 2}),
                  ValidationError);

  const MomentTable t = intensity_moments(cm, DisplacementConfig::none(1), {2});
  CHECK_THROWS_AS(t.at({3}), ValidationError);

  Eigen::VectorXd lam(2);
  lam << 0.1, 0.2;
  CHECK_THROWS_AS(generating_function_value(cm, DisplacementConfig::none(1), lam),
                  ValidationError);
}
