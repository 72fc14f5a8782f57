#include "ncwit/json_io.hpp"

#include <fstream>
#include <sstream>

namespace ncwit {

using nlohmann::json;

namespace {

const json& require(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end())
    throw ParseError(std::string("state file: missing field '") + key + "'");
  return *it;
}

double as_number(const json& j, const std::string& where) {
  if (!j.is_number())
    throw ParseError("state file: '" + where + "' must be a number");
  return j.get<double>();
}

Cplx as_complex(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ParseError("state file: '" + where + "' must be a [re, im] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

std::pair<int, int> parse_pair_key(const std::string& key) {
  std::istringstream is(key);
  int j = -1, l = -1;
  char comma = '\0';
  if (!(is >> j >> comma >> l) || comma != ',' || !(is >> std::ws).eof())
    throw ParseError("state file: pair key '" + key + "' is not of the form 'j,l'");
  return {j, l};
}

std::map<std::pair<int, int>, Cplx> parse_pair_map(const json& j,
                                                   const std::string& where) {
  if (!j.is_object())
    throw ParseError("state file: '" + where + "' must be an object keyed by 'j,l'");
  std::map<std::pair<int, int>, Cplx> out;
  for (const auto& [key, value] : j.items())
    out[parse_pair_key(key)] = as_complex(value, where + "[" + key + "]");
  return out;
}

}  // namespace

int StateFile::modes() const { return quad ? quad->modes() : normal->modes(); }

NormalCM StateFile::as_normal() const {
  if (normal) return *normal;
  return to_normal(*quad);
}

QuadratureState StateFile::as_quadrature() const {
  if (quad) return *quad;
  return from_normal(*normal);
}

StateFile parse_state_json(const json& j) {
  if (!j.is_object()) throw ParseError("state file: top level must be an object");
  const json& jm = require(j, "modes");
  if (!jm.is_number_integer() || jm.get<int>() < 1)
    throw ParseError("state file: 'modes' must be a positive integer");
  const int n = jm.get<int>();
  const json& jr = require(j, "representation");
  if (!jr.is_string())
    throw ParseError("state file: 'representation' must be a string");
  const std::string repr = jr.get<std::string>();

  StateFile out;
  if (repr == "quadrature") {
    out.repr = Representation::Quadrature;
    const json& js = require(j, "sigma");
    const int dim = 2 * n;
    if (!js.is_array() || static_cast<int>(js.size()) != dim)
      throw ParseError("state file: 'sigma' must be a 2n x 2n array of rows");
    Eigen::MatrixXd sigma(dim, dim);
    for (int r = 0; r < dim; ++r) {
      const json& row = js[static_cast<std::size_t>(r)];
      if (!row.is_array() || static_cast<int>(row.size()) != dim)
        throw ParseError("state file: 'sigma' rows must each have 2n entries");
      for (int c = 0; c < dim; ++c) {
        std::ostringstream os;
        os << "sigma[" << r << "][" << c << "]";
        sigma(r, c) = as_number(row[static_cast<std::size_t>(c)], os.str());
      }
    }
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
    if (auto it = j.find("mean"); it != j.end()) {
      if (!it->is_array() || static_cast<int>(it->size()) != dim)
        throw ParseError("state file: 'mean' must have 2n entries");
      for (int i = 0; i < dim; ++i) {
        std::ostringstream os;
        os << "mean[" << i << "]";
        mean[i] = as_number((*it)[static_cast<std::size_t>(i)], os.str());
      }
    }
    out.quad.emplace(std::move(sigma), std::move(mean));
  } else if (repr == "normal") {
    out.repr = Representation::Normal;
    const json& jb = require(j, "B");
    const json& jc = require(j, "C");
    if (!jb.is_array() || static_cast<int>(jb.size()) != n)
      throw ParseError("state file: 'B' must list one number per mode");
    if (!jc.is_array() || static_cast<int>(jc.size()) != n)
      throw ParseError("state file: 'C' must list one [re, im] pair per mode");
    Eigen::VectorXd b(n);
    Eigen::VectorXcd c(n);
    for (int k = 0; k < n; ++k) {
      std::ostringstream os;
      os << "B[" << k << "]";
      b[k] = as_number(jb[static_cast<std::size_t>(k)], os.str());
      std::ostringstream osc;
      osc << "C[" << k << "]";
      c[k] = as_complex(jc[static_cast<std::size_t>(k)], osc.str());
    }
    std::map<std::pair<int, int>, Cplx> d, dbar;
    if (auto it = j.find("D"); it != j.end()) d = parse_pair_map(*it, "D");
    if (auto it = j.find("Dbar"); it != j.end()) dbar = parse_pair_map(*it, "Dbar");
    out.normal.emplace(std::move(b), std::move(c), std::move(d), std::move(dbar));
  } else {
    throw ParseError("state file: representation must be 'quadrature' or 'normal'");
  }
  return out;
}

StateFile load_state_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open state file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError("state file " + path + ": " + e.what());
  }
  return parse_state_json(j);
}

json state_to_json(const QuadratureState& state) {
  const int dim = 2 * state.modes();
  json sigma = json::array();
  for (int r = 0; r < dim; ++r) {
    json row = json::array();
    for (int c = 0; c < dim; ++c) row.push_back(state.sigma()(r, c));
    sigma.push_back(std::move(row));
  }
  json mean = json::array();
  for (int i = 0; i < dim; ++i) mean.push_back(state.mean()[i]);
  return json{{"modes", state.modes()},
              {"representation", "quadrature"},
              {"sigma", std::move(sigma)},
              {"mean", std::move(mean)}};
}

json state_to_json(const NormalCM& cm) {
  const int n = cm.modes();
  json b = json::array(), c = json::array();
  for (int k = 0; k < n; ++k) {
    b.push_back(cm.b(k));
    c.push_back(json::array({cm.c(k).real(), cm.c(k).imag()}));
  }
  json d = json::object(), dbar = json::object();
  for (int j = 0; j < n; ++j) {
    for (int l = j + 1; l < n; ++l) {
      const Cplx dv = cm.d(j, l);
      const Cplx db = cm.dbar(j, l);
      std::ostringstream key;
      key << j << "," << l;
      if (dv != Cplx(0.0, 0.0)) d[key.str()] = json::array({dv.real(), dv.imag()});
      if (db != Cplx(0.0, 0.0)) dbar[key.str()] = json::array({db.real(), db.imag()});
    }
  }
  return json{{"modes", n},           {"representation", "normal"},
              {"B", std::move(b)},    {"C", std::move(c)},
              {"D", std::move(d)},    {"Dbar", std::move(dbar)}};
}

json report_to_json(const WitnessReport& report) {
  json out;
  out["witness"] = report.kind == WitnessKind::R ? "R" : "M";
  switch (report.strategy) {
    case AnalysisStrategy::R:
      out["strategy"] = "R";
      break;
    case AnalysisStrategy::M:
      out["strategy"] = "M";
      break;
    case AnalysisStrategy::MWithVacuumAncilla:
      out["strategy"] = "M-vacuum-ancilla";
      break;
    case AnalysisStrategy::Auto:
      out["strategy"] = "auto";
      break;
  }
  out["modes"] = report.modes;
  out["phases"] = report.phases;
  out["polynomial"] = {{"a", report.poly.a},
                       {"b", report.poly.b},
                       {"c", report.poly.c},
                       {"d", report.poly.d}};
  out["x"] = report.x;
  out["value"] = report.value;
  out["detected"] = report.detected;
  out["gap"] = report.gap;
  if (report.x_critical)
    out["x_critical"] = *report.x_critical;
  else
    out["x_critical"] = nullptr;
  if (report.negative_window)
    out["negative_window"] =
        json::array({report.negative_window->first, report.negative_window->second});
  else
    out["negative_window"] = nullptr;
  return out;
}

json moment_table_to_json(const MomentTable& table) {
  json values = json::object();
  for (const auto& [k, v] : table.values) values[multi_index_key(k)] = v;
  return json{{"cap", table.cap}, {"values", std::move(values)}};
}

std::string multi_index_key(const MultiIndex& k) {
  std::ostringstream os;
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (i) os << ",";
    os << k[i];
  }
  return os.str();
}

}  // namespace ncwit
