#include "ncwit/moments.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

namespace ncwit {

namespace {

void validate_cap(const NormalCM& cm, const MultiIndex& cap) {
  if (static_cast<int>(cap.size()) != cm.modes())
    throw ValidationError("moment engine: cap must list one order per mode");
  for (int c : cap) {
    if (c < 0) throw ValidationError("moment engine: negative order requested");
    if (c > kMaxOrderPerMode) {
      std::ostringstream os;
      os << "moment engine: per-mode order " << c << " exceeds the cap of "
         << kMaxOrderPerMode;
      throw CapacityError(os.str());
    }
  }
}

int total_of(const MultiIndex& cap) {
  int t = 0;
  for (int c : cap) t += c;
  return t;
}

// Square matrix whose entries are truncated lambda-series with complex
// coefficients.  Row r of the base matrix Lambda*A carries one factor of
// lambda_{r/2}, so the m-th power has entries of lambda-degree exactly m.
struct SeriesMatrix {
  int dim = 0;
  std::vector<TruncatedSeries<Cplx>> entry;  // row-major

  SeriesMatrix(int d, const MultiIndex& cap)
      : dim(d), entry(static_cast<std::size_t>(d) * d, TruncatedSeries<Cplx>(cap)) {}

  TruncatedSeries<Cplx>& at(int r, int c) { return entry[static_cast<std::size_t>(r) * dim + c]; }
  const TruncatedSeries<Cplx>& at(int r, int c) const {
    return entry[static_cast<std::size_t>(r) * dim + c];
  }
};

SeriesMatrix multiply(const SeriesMatrix& a, const SeriesMatrix& b, const MultiIndex& cap) {
  SeriesMatrix out(a.dim, cap);
  for (int r = 0; r < a.dim; ++r)
    for (int k = 0; k < a.dim; ++k)
      for (int c = 0; c < a.dim; ++c) out.at(r, c) += a.at(r, k) * b.at(k, c);
  return out;
}

// Base matrix Lambda * A as series entries: monomial lambda_{mode(r)} * A(r,c).
SeriesMatrix lambda_a(const NormalCM& cm, const MultiIndex& cap) {
  const Eigen::MatrixXcd a = cm.assemble();
  const int dim = static_cast<int>(a.rows());
  SeriesMatrix m(dim, cap);
  for (int r = 0; r < dim; ++r) {
    const int mode = r / 2;
    if (cap[mode] == 0) continue;  // lambda_mode is truncated away entirely
    MultiIndex deg(cap.size(), 0);
    deg[mode] = 1;
    for (int c = 0; c < dim; ++c) {
      if (a(r, c) != Cplx(0.0, 0.0)) m.at(r, c).at(deg) = a(r, c);
    }
  }
  return m;
}

// -1/2 log det(I + Lambda A) as a lambda-series (zero constant term):
//   -1/2 sum_{m>=1} (-1)^{m+1} tr((Lambda A)^m) / m.
// Also returns the power table (Lambda A)^m for m = 1..M for reuse by the
// displacement quadratic form.
struct LogDetExpansion {
  TruncatedSeries<Cplx> series;
  std::vector<SeriesMatrix> powers;  // powers[m-1] = (Lambda A)^m
};

LogDetExpansion expand_logdet(const NormalCM& cm, const MultiIndex& cap) {
  const int total = total_of(cap);
  LogDetExpansion out{TruncatedSeries<Cplx>(cap), {}};
  const SeriesMatrix base = lambda_a(cm, cap);
  SeriesMatrix power = base;
  for (int m = 1; m <= std::max(total, 1); ++m) {
    if (m > 1) power = multiply(power, base, cap);
    TruncatedSeries<Cplx> trace(cap);
    for (int r = 0; r < power.dim; ++r) trace += power.at(r, r);
    const double coeff = -0.5 * ((m % 2 == 1) ? 1.0 : -1.0) / static_cast<double>(m);
    out.series += trace.scale(coeff);
    // scale() mutated `trace` only; keep the unscaled power for the table
    out.powers.push_back(power);
    if (m >= total) break;
  }
  return out;
}

TruncatedSeries<double> realize(const TruncatedSeries<Cplx>& s) {
  TruncatedSeries<double> out(s.cap());
  MultiIndex k(s.cap().size(), 0);
  for (;;) {
    const Cplx v = s.at(k);
    if (std::abs(v.imag()) > kResidueTol * std::max(1.0, std::abs(v.real())))
      throw ConsistencyError("moment engine: generating series has a complex residue");
    out.at(k) = v.real();
    std::size_t j = 0;
    for (; j < k.size(); ++j) {
      if (++k[j] <= s.cap()[j]) break;
      k[j] = 0;
    }
    if (j == k.size()) break;
  }
  return out;
}

TruncatedSeries<Poly> realize_poly(const TruncatedSeries<PolyC>& s) {
  TruncatedSeries<Poly> out(s.cap());
  MultiIndex k(s.cap().size(), 0);
  for (;;) {
    const PolyC& p = s.at(k);
    std::vector<double> coef(static_cast<std::size_t>(p.degree() + 1), 0.0);
    for (int i = 0; i <= p.degree(); ++i) {
      const Cplx v = p.coeff(i);
      if (std::abs(v.imag()) > kResidueTol * std::max(1.0, std::abs(v.real())))
        throw ConsistencyError("moment engine: x-polynomial has a complex residue");
      coef[static_cast<std::size_t>(i)] = v.real();
    }
    out.at(k) = Poly(std::move(coef));
    std::size_t j = 0;
    for (; j < k.size(); ++j) {
      if (++k[j] <= s.cap()[j]) break;
      k[j] = 0;
    }
    if (j == k.size()) break;
  }
  return out;
}

}  // namespace

TruncatedSeries<double> generating_series(const NormalCM& cm,
                                          const DisplacementConfig& disp,
                                          const MultiIndex& cap) {
  validate_cap(cm, cap);
  if (disp.modes() != cm.modes())
    throw ValidationError("moment engine: displacement mode count mismatch");
  const int n = cm.modes();
  const int dim = 2 * n;
  const int total = total_of(cap);

  LogDetExpansion ld = expand_logdet(cm, cap);
  TruncatedSeries<Cplx> s = ld.series;

  if (!disp.is_zero()) {
    // Xi slot layout matches the coefficient matrix: Xi[2k] = xi_k,
    // Xi[2k+1] = conj(xi_k).
    Eigen::VectorXcd xi(dim);
    for (int k = 0; k < n; ++k) {
      xi[2 * k] = disp.xi(k);
      xi[2 * k + 1] = std::conj(disp.xi(k));
    }
    // -1/2 Xi^dag (I + Lambda A)^{-1} Lambda Xi
    //   = -1/2 sum_{m>=0} (-1)^m Xi^dag (Lambda A)^m Lambda Xi.
    for (int m = 0; m <= total - 1; ++m) {
      const double sign = (m % 2 == 0) ? 1.0 : -1.0;
      TruncatedSeries<Cplx> quad(cap);
      for (int c = 0; c < dim; ++c) {
        const int mode = c / 2;
        if (cap[mode] == 0) continue;
        MultiIndex deg(cap.size(), 0);
        deg[mode] = 1;  // the trailing Lambda factor on column c
        for (int r = 0; r < dim; ++r) {
          const Cplx w = std::conj(xi[r]) * xi[c];
          if (w == Cplx(0.0, 0.0)) continue;
          if (m == 0) {
            if (r == c) quad.at(deg) += w;
          } else {
            TruncatedSeries<Cplx> term = ld.powers[static_cast<std::size_t>(m - 1)].at(r, c);
            TruncatedSeries<Cplx> mono(cap);
            mono.at(deg) = w;
            quad += term * mono;
          }
        }
      }
      s += quad.scale(-0.5 * sign);
    }
  }
  return realize(s.exp_no_constant());
}

TruncatedSeries<Poly> generating_series_in_x(const NormalCM& cm,
                                             const Eigen::VectorXd& phases,
                                             const MultiIndex& cap) {
  validate_cap(cm, cap);
  if (phases.size() != cm.modes())
    throw ValidationError("moment engine: one displacement phase per mode required");
  const int n = cm.modes();
  const int dim = 2 * n;
  const int total = total_of(cap);

  LogDetExpansion ld = expand_logdet(cm, cap);

  // Lift the displacement-free part to polynomial coefficients (x-degree 0)
  // and add the quadratic form with xi_k = sqrt(x) e^{i alpha_k}: each
  // Xi^dag ... Xi sandwich carries exactly one power of x.
  TruncatedSeries<PolyC> s(cap);
  {
    MultiIndex k(cap.size(), 0);
    for (;;) {
      const Cplx v = ld.series.at(k);
      if (v != Cplx(0.0, 0.0)) s.at(k) = PolyC(v);
      std::size_t j = 0;
      for (; j < k.size(); ++j) {
        if (++k[j] <= cap[j]) break;
        k[j] = 0;
      }
      if (j == k.size()) break;
    }
  }

  Eigen::VectorXcd unit_xi(dim);  // Xi at x = 1
  for (int k = 0; k < n; ++k) {
    unit_xi[2 * k] = std::polar(1.0, phases[k]);
    unit_xi[2 * k + 1] = std::polar(1.0, -phases[k]);
  }
  for (int m = 0; m <= total - 1; ++m) {
    const double sign = (m % 2 == 0) ? 1.0 : -1.0;
    for (int c = 0; c < dim; ++c) {
      const int mode = c / 2;
      if (cap[mode] == 0) continue;
      MultiIndex deg(cap.size(), 0);
      deg[mode] = 1;
      for (int r = 0; r < dim; ++r) {
        const Cplx w = std::conj(unit_xi[r]) * unit_xi[c] * (-0.5 * sign);
        if (m == 0) {
          if (r != c) continue;
          s.at(deg) += PolyC::monomial(1, w);
        } else {
          const TruncatedSeries<Cplx>& term = ld.powers[static_cast<std::size_t>(m - 1)].at(r, c);
          // multiply term by lambda_mode and by w * x, accumulate
          MultiIndex kk(cap.size(), 0);
          for (;;) {
            const Cplx v = term.at(kk);
            if (v != Cplx(0.0, 0.0)) {
              MultiIndex shifted = kk;
              shifted[mode] += 1;
              if (shifted[mode] <= cap[mode]) s.at(shifted) += PolyC::monomial(1, w * v);
            }
            std::size_t j = 0;
            for (; j < kk.size(); ++j) {
              if (++kk[j] <= cap[j]) break;
              kk[j] = 0;
            }
            if (j == kk.size()) break;
          }
        }
      }
    }
  }
  return realize_poly(s.exp_no_constant());
}

namespace {

template <typename Table, typename Series, typename Scale>
void fill_table(Table& table, const Series& g, const MultiIndex& cap, Scale&& put) {
  MultiIndex k(cap.size(), 0);
  for (;;) {
    double factor = 1.0;
    int order = 0;
    for (std::size_t j = 0; j < k.size(); ++j) {
      order += k[j];
      for (int i = 2; i <= k[j]; ++i) factor *= i;
    }
    if (order % 2 == 1) factor = -factor;
    put(table, k, g.at(k), factor);
    std::size_t j = 0;
    for (; j < k.size(); ++j) {
      if (++k[j] <= cap[j]) break;
      k[j] = 0;
    }
    if (j == k.size()) break;
  }
}

}  // namespace

double MomentTable::at(const MultiIndex& k) const {
  auto it = values.find(k);
  if (it == values.end()) throw ValidationError("moment table: index not tabulated");
  return it->second;
}

const Poly& MomentPolynomialTable::at(const MultiIndex& k) const {
  auto it = polys.find(k);
  if (it == polys.end()) throw ValidationError("moment table: index not tabulated");
  return it->second;
}

MomentTable MomentPolynomialTable::evaluate(double x) const {
  MomentTable out;
  out.cap = cap;
  for (const auto& [k, p] : polys) out.values[k] = p.eval(x);
  return out;
}

MomentTable intensity_moments(const NormalCM& cm, const DisplacementConfig& disp,
                              const MultiIndex& cap) {
  const TruncatedSeries<double> g = generating_series(cm, disp, cap);
  MomentTable table;
  table.cap = cap;
  fill_table(table, g, cap,
             [](MomentTable& t, const MultiIndex& k, double coeff, double factor) {
               t.values[k] = factor * coeff;
             });
  return table;
}

MomentPolynomialTable intensity_moment_polynomials(const NormalCM& cm,
                                                   const Eigen::VectorXd& phases,
                                                   const MultiIndex& cap) {
  const TruncatedSeries<Poly> g = generating_series_in_x(cm, phases, cap);
  MomentPolynomialTable table;
  table.cap = cap;
  fill_table(table, g, cap,
             [](MomentPolynomialTable& t, const MultiIndex& k, const Poly& coeff,
                double factor) { t.polys[k] = coeff * factor; });
  return table;
}

double generating_function_value(const NormalCM& cm, const DisplacementConfig& disp,
                                 const Eigen::VectorXd& lambda) {
  if (lambda.size() != cm.modes())
    throw ValidationError("generating function: one lambda per mode required");
  if (disp.modes() != cm.modes())
    throw ValidationError("generating function: displacement mode count mismatch");
  const int n = cm.modes();
  const int dim = 2 * n;
  Eigen::VectorXcd lam(dim);
  for (int k = 0; k < n; ++k) lam[2 * k] = lam[2 * k + 1] = lambda[k];
  const Eigen::MatrixXcd m =
      Eigen::MatrixXcd::Identity(dim, dim) + lam.asDiagonal() * cm.assemble();
  const Cplx det = m.determinant();
  Cplx exponent = -0.5 * std::log(det);
  if (!disp.is_zero()) {
    Eigen::VectorXcd xi(dim);
    for (int k = 0; k < n; ++k) {
      xi[2 * k] = disp.xi(k);
      xi[2 * k + 1] = std::conj(disp.xi(k));
    }
    const Eigen::VectorXcd rhs = lam.asDiagonal() * xi;
    const Eigen::VectorXcd sol = m.partialPivLu().solve(rhs);
    exponent += -0.5 * xi.dot(sol);  // Eigen's dot conjugates the left factor
  }
  const Cplx g = std::exp(exponent);
  if (std::abs(g.imag()) > kResidueTol * std::max(1.0, std::abs(g.real())))
    throw ConsistencyError("generating function: complex residue in scalar value");
  return g.real();
}

}  // namespace ncwit
