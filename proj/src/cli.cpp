#include "ncwit/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#include "ncwit/json_io.hpp"
#include "ncwit/oracles.hpp"

namespace ncwit {

using nlohmann::json;

namespace {

std::vector<int> parse_mode_list(const std::string& text) {
  std::vector<int> out;
  std::istringstream is(text);
  std::string item;
  while (std::getline(is, item, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ParseError("--modes: '" + item + "' is not an integer");
    }
  }
  if (out.empty()) throw ParseError("--modes: at least one mode required");
  return out;
}

std::vector<double> parse_double_list(const std::string& text, const char* flag) {
  std::vector<double> out;
  std::istringstream is(text);
  std::string item;
  while (std::getline(is, item, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ParseError(std::string(flag) + ": '" + item + "' is not a number");
    }
  }
  if (out.empty()) throw ParseError(std::string(flag) + ": empty list");
  return out;
}

MultiIndex parse_cap_list(const std::string& text) {
  MultiIndex out;
  for (int v : parse_mode_list(text)) out.push_back(v);
  return out;
}

struct Grid {
  double lo = 0.0;
  double hi = 0.0;
  int points = 0;
};

Grid parse_grid(const std::string& text) {
  Grid g;
  char c1 = '\0', c2 = '\0';
  std::istringstream is(text);
  if (!(is >> g.lo >> c1 >> g.hi >> c2 >> g.points) || c1 != ':' || c2 != ':' ||
      !(is >> std::ws).eof())
    throw ParseError("--grid: expected min:max:count");
  if (g.points < 2) throw ParseError("--grid: at least two points required");
  if (!(g.lo >= 0.0) || !(g.hi > g.lo))
    throw ParseError("--grid: need 0 <= min < max");
  return g;
}

AnalysisStrategy parse_strategy(const std::string& witness) {
  if (witness == "auto") return AnalysisStrategy::Auto;
  if (witness == "R") return AnalysisStrategy::R;
  if (witness == "M") return AnalysisStrategy::M;
  throw ParseError("--witness: must be one of auto, R, M");
}

void write_output(const std::string& path, const std::string& content,
                  std::ostream& fallback) {
  if (path.empty()) {
    fallback << content;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ParseError("cannot open output file: " + path);
  f << content;
  if (!f) throw ParseError("failed while writing output file: " + path);
}

std::string format_csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// Shared flags for the witness-analysis family of commands.
struct AnalyzeOptions {
  std::string input;
  std::string output;
  std::string modes_text;
  std::string witness = "auto";
  std::string phases_text;
  double x = -1.0;  // negative = not requested
  double tol_detect = kDetectTol;
};

WitnessReport run_analysis(const AnalyzeOptions& opt) {
  if (opt.modes_text.empty()) throw ParseError("--modes is required");
  const StateFile state = load_state_file(opt.input);
  const NormalCM cm = state.as_normal();
  const std::vector<int> modes = parse_mode_list(opt.modes_text);
  std::optional<std::vector<double>> phases;
  if (!opt.phases_text.empty())
    phases = parse_double_list(opt.phases_text, "--phases");
  std::optional<double> x;
  if (opt.x >= 0.0) x = opt.x;
  return analyze(cm, modes, parse_strategy(opt.witness), x, phases, opt.tol_detect);
}

int cmd_validate(const std::string& input, const std::string& output,
                 double tol_physical, std::ostream& out) {
  const StateFile state = load_state_file(input);
  // The margin machinery needs a covariance matrix; build one without the
  // physicality gate so invalid states still get a report.
  const QuadratureState quad =
      state.quad ? *state.quad
                 : from_normal(*state.normal, std::numeric_limits<double>::infinity());
  const MarginResult phys = is_physical(quad, tol_physical);
  const MarginResult classical = is_classical(quad);
  json report;
  report["modes"] = state.modes();
  report["representation"] =
      state.repr == Representation::Quadrature ? "quadrature" : "normal";
  report["physical"] = phys.ok;
  report["physical_margin"] = phys.margin;
  report["classical"] = classical.ok;
  report["classical_margin"] = classical.margin;
  if (phys.ok) {
    json nus = json::array();
    const Eigen::VectorXd nu = symplectic_eigenvalues(quad.sigma());
    for (int i = 0; i < nu.size(); ++i) nus.push_back(nu[i]);
    report["symplectic_eigenvalues"] = std::move(nus);
  } else {
    report["symplectic_eigenvalues"] = nullptr;
  }
  write_output(output, report.dump(2) + "\n", out);
  return phys.ok ? kExitOk : kExitValidation;
}

int cmd_analyze(const AnalyzeOptions& opt, std::ostream& out) {
  const WitnessReport report = run_analysis(opt);
  write_output(opt.output, report_to_json(report).dump(2) + "\n", out);
  return kExitOk;
}

int cmd_scan(const AnalyzeOptions& opt, const std::string& grid_text,
             std::ostream& out) {
  const Grid grid = parse_grid(grid_text);
  const StateFile state = load_state_file(opt.input);
  const NormalCM cm = state.as_normal();
  if (opt.modes_text.empty()) throw ParseError("--modes is required");
  const std::vector<int> modes = parse_mode_list(opt.modes_text);
  std::optional<std::vector<double>> phases;
  if (!opt.phases_text.empty())
    phases = parse_double_list(opt.phases_text, "--phases");
  // Fix phases and strategy once, then evaluate the witness on the grid.
  const WitnessReport base =
      analyze(cm, modes, parse_strategy(opt.witness), 0.0, phases, opt.tol_detect);

  NormalCM work = cm;
  std::vector<int> scan_modes = modes;
  if (base.strategy == AnalysisStrategy::MWithVacuumAncilla) {
    const int k = modes[0];
    work = NormalCM::two_mode(cm.b(k), 0.0, cm.c(k), Cplx(0.0, 0.0), Cplx(0.0, 0.0),
                              Cplx(0.0, 0.0));
    scan_modes = {0, 1};
  }

  std::ostringstream csv;
  csv << "x,value,detected\n";
  for (int i = 0; i < grid.points; ++i) {
    const double x =
        grid.lo + (grid.hi - grid.lo) * static_cast<double>(i) / (grid.points - 1);
    Eigen::VectorXd amp = Eigen::VectorXd::Zero(work.modes());
    Eigen::VectorXd ph = Eigen::VectorXd::Zero(work.modes());
    for (std::size_t s = 0; s < scan_modes.size(); ++s) {
      amp[scan_modes[s]] = std::sqrt(x);
      ph[scan_modes[s]] = base.phases[s];
    }
    const DisplacementConfig disp(std::move(amp), std::move(ph));
    const double value = base.kind == WitnessKind::R
                             ? witness_R(work, scan_modes[0], disp)
                             : witness_M(work, scan_modes[0], scan_modes[1], disp);
    csv << format_csv_number(x) << "," << format_csv_number(value) << ","
        << (value < -opt.tol_detect ? 1 : 0) << "\n";
  }
  write_output(opt.output, csv.str(), out);
  return kExitOk;
}

int cmd_optimize(const AnalyzeOptions& opt, std::ostream& out) {
  const WitnessReport report = run_analysis(opt);
  json j;
  j["witness"] = report.kind == WitnessKind::R ? "R" : "M";
  j["modes"] = report.modes;
  j["phases"] = report.phases;
  j["a"] = report.poly.a;
  j["gap"] = report.gap;
  j["detectable"] = report.gap > 0.0;
  write_output(opt.output, j.dump(2) + "\n", out);
  return kExitOk;
}

int cmd_critical(const AnalyzeOptions& opt, std::ostream& out) {
  const WitnessReport report = run_analysis(opt);
  json j;
  j["witness"] = report.kind == WitnessKind::R ? "R" : "M";
  j["modes"] = report.modes;
  j["phases"] = report.phases;
  j["polynomial"] = {{"a", report.poly.a},
                     {"b", report.poly.b},
                     {"c", report.poly.c},
                     {"d", report.poly.d}};
  if (report.x_critical) {
    j["x_critical"] = *report.x_critical;
    j["xi_critical"] = std::sqrt(*report.x_critical);
  } else {
    j["x_critical"] = nullptr;
    j["xi_critical"] = nullptr;
  }
  if (report.negative_window)
    j["negative_window"] =
        json::array({report.negative_window->first, report.negative_window->second});
  else
    j["negative_window"] = nullptr;
  write_output(opt.output, j.dump(2) + "\n", out);
  return kExitOk;
}

int cmd_standard_form(const std::string& input, const std::string& output,
                      std::ostream& out) {
  const StateFile state = load_state_file(input);
  const NormalCM cm = state.as_normal();
  const StandardFormReduction red = reduce_to_standard_form(cm);
  const double sum = duan_sum(red.params);
  json j;
  j["phi_j"] = red.phi_j;
  j["phi_l"] = red.phi_l;
  j["q_j"] = red.params.q_j;
  j["q_l"] = red.params.q_l;
  j["q_jl"] = red.params.q_jl;
  j["q_pjl"] = red.params.q_pjl;
  j["duan_sum"] = sum;
  j["entangled_by_sum"] = sum < 1.0 - kEntangleTol;
  json sigma = json::array();
  const Eigen::Matrix4d st = red.params.sigma_st();
  for (int r = 0; r < 4; ++r) {
    json row = json::array();
    for (int c = 0; c < 4; ++c) row.push_back(st(r, c));
    sigma.push_back(std::move(row));
  }
  j["sigma_st"] = std::move(sigma);
  write_output(output, j.dump(2) + "\n", out);
  return kExitOk;
}

int cmd_verify(const std::string& input, const std::string& output,
               const std::string& cap_text, long samples, std::uint64_t seed,
               std::ostream& out) {
  const StateFile state = load_state_file(input);
  const NormalCM cm = state.as_normal();
  const QuadratureState quad = state.as_quadrature();
  const int n = cm.modes();

  MultiIndex cap;
  if (!cap_text.empty()) {
    cap = parse_cap_list(cap_text);
    if (static_cast<int>(cap.size()) != n)
      throw ParseError("--cap: one order per mode required");
    for (int v : cap)
      if (v < 0 || v > 4)
        throw ParseError("--cap: orders must lie in 0..4 (finite-difference oracle limit)");
  } else {
    cap.assign(static_cast<std::size_t>(n), n == 1 ? 3 : 2);
  }

  const DisplacementConfig disp = mean_displacement(quad);
  const MomentTable engine = intensity_moments(cm, disp, cap);
  const MomentTable fd = finite_difference_moments(cm, disp, cap);
  const auto mc = mc_intensity_moments(quad, cap, samples, seed);

  json rows = json::array();
  double max_fd = 0.0, max_pairing = 0.0, max_mc = 0.0;
  for (const auto& [k, val] : engine.values) {
    int total = 0;
    for (int v : k) total += v;
    if (total == 0) continue;
    const double fd_val = fd.at(k);
    const double pair_val = pairing_moment(cm, disp, k);
    const MCEstimate est = mc.at(k);
    const double scale = std::max(1.0, std::abs(val));
    const double fd_rel = std::abs(fd_val - val) / scale;
    const double pair_rel = std::abs(pair_val - val) / scale;
    const double mc_sig =
        std::abs(est.value - val) / std::max(est.std_error, 1e-12 * scale);
    max_fd = std::max(max_fd, fd_rel);
    max_pairing = std::max(max_pairing, pair_rel);
    max_mc = std::max(max_mc, mc_sig);
    rows.push_back(json{{"index", multi_index_key(k)},
                        {"engine", val},
                        {"finite_difference", fd_val},
                        {"pairing", pair_val},
                        {"mc", est.value},
                        {"mc_std_error", est.std_error},
                        {"fd_rel_err", fd_rel},
                        {"pairing_rel_err", pair_rel},
                        {"mc_sigmas", mc_sig}});
  }
  const bool ok = max_fd <= 1e-6 && max_pairing <= 1e-9 && max_mc <= 6.0;
  json j;
  j["cap"] = cap;
  j["samples"] = samples;
  j["seed"] = seed;
  j["rows"] = std::move(rows);
  j["max_fd_rel_err"] = max_fd;
  j["max_pairing_rel_err"] = max_pairing;
  j["max_mc_sigmas"] = max_mc;
  j["ok"] = ok;
  write_output(output, j.dump(2) + "\n", out);
  return ok ? kExitOk : kExitConsistency;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Displacement-enhanced nonclassicality and entanglement witnesses "
               "for Gaussian states"};
  app.require_subcommand(1);

  AnalyzeOptions opt;
  std::string grid_text;
  std::string cap_text;
  long samples = 200000;
  std::uint64_t seed = 12345;
  double tol_physical = kPhysicalTol;

  auto add_common = [&](CLI::App* cmd, bool with_phases_x) {
    cmd->add_option("--input", opt.input, "JSON state file")->required();
    cmd->add_option("--output", opt.output, "output file (default: stdout)");
    cmd->add_option("--modes", opt.modes_text, "scanned mode indices, e.g. 0 or 0,1")
        ->required();
    cmd->add_option("--witness", opt.witness, "witness: auto, R, or M");
    if (with_phases_x) {
      cmd->add_option("--phases", opt.phases_text,
                      "displacement phases (radians), one per scanned mode");
    }
    cmd->add_option("--tol-detect", opt.tol_detect,
                    "negativity threshold (default 1e-10)");
  };

  CLI::App* validate = app.add_subcommand("validate", "check physicality and classicality");
  std::string v_input, v_output;
  validate->add_option("--input", v_input, "JSON state file")->required();
  validate->add_option("--output", v_output, "output file (default: stdout)");
  validate->add_option("--tol-physical", tol_physical,
                       "physicality margin tolerance (default 1e-10)");

  CLI::App* analyze_cmd = app.add_subcommand("analyze", "full witness analysis");
  add_common(analyze_cmd, true);
  analyze_cmd->add_option("--x", opt.x, "displacement strength |xi|^2 to evaluate at")
      ->check(CLI::NonNegativeNumber);

  CLI::App* scan = app.add_subcommand("scan", "witness value over a strength grid (CSV)");
  add_common(scan, true);
  scan->add_option("--grid", grid_text, "strength grid min:max:count")->required();

  CLI::App* optimize = app.add_subcommand("optimize", "optimal displacement phases");
  add_common(optimize, false);

  CLI::App* critical = app.add_subcommand("critical-xi",
                                          "critical displacement strength/amplitude");
  add_common(critical, true);

  CLI::App* standard = app.add_subcommand("standard-form",
                                          "two-mode standard-form reduction");
  std::string s_input, s_output;
  standard->add_option("--input", s_input, "JSON state file")->required();
  standard->add_option("--output", s_output, "output file (default: stdout)");

  CLI::App* verify = app.add_subcommand("verify", "cross-check engine against oracles");
  std::string verify_input, verify_output;
  verify->add_option("--input", verify_input, "JSON state file")->required();
  verify->add_option("--output", verify_output, "output file (default: stdout)");
  verify->add_option("--cap", cap_text, "per-mode moment orders, e.g. 3 or 2,2");
  verify->add_option("--samples", samples, "Monte Carlo sample count");
  verify->add_option("--seed", seed, "Monte Carlo seed");

  try {
    // CLI11's vector overload consumes arguments from the back.
    app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
  } catch (const CLI::CallForHelp&) {
    const auto subs = app.get_subcommands();
    out << (subs.empty() ? app.help() : subs.front()->help());
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }

  try {
    if (app.got_subcommand(validate)) return cmd_validate(v_input, v_output, tol_physical, out);
    if (app.got_subcommand(analyze_cmd)) return cmd_analyze(opt, out);
    if (app.got_subcommand(scan)) return cmd_scan(opt, grid_text, out);
    if (app.got_subcommand(optimize)) return cmd_optimize(opt, out);
    if (app.got_subcommand(critical)) return cmd_critical(opt, out);
    if (app.got_subcommand(standard)) return cmd_standard_form(s_input, s_output, out);
    if (app.got_subcommand(verify))
      return cmd_verify(verify_input, verify_output, cap_text, samples, seed, out);
    err << "error: no command selected\n";
    return kExitIo;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const CapacityError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const UnsupportedError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ConsistencyError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConsistency;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitConsistency;
  }
}

}  // namespace ncwit
