#pragma once

// JSON state files and report serialization.
//
// State schema (one object per file):
//   {
//     "modes": n,
//     "representation": "quadrature" | "normal",
//     // quadrature:
//     "sigma": [[...2n x 2n...]],
//     "mean":  [...2n...],            // optional, defaults to zero
//     // normal:
//     "B": [b_1, ..., b_n],
//     "C": [[re, im], ...],           // per mode
//     "D":    {"j,l": [re, im], ...}, // optional, j < l
//     "Dbar": {"j,l": [re, im], ...}  // optional, j < l
//   }

#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "ncwit/gaussian.hpp"
#include "ncwit/moments.hpp"
#include "ncwit/oracles.hpp"
#include "ncwit/witness.hpp"

namespace ncwit {

enum class Representation { Quadrature, Normal };

// A parsed state file; exactly one representation is populated.
struct StateFile {
  Representation repr = Representation::Quadrature;
  std::optional<QuadratureState> quad;
  std::optional<NormalCM> normal;

  int modes() const;
  // Normal-ordered view (converts, validating physicality, when needed).
  NormalCM as_normal() const;
  // Quadrature view (zero mean when converting from normal).
  QuadratureState as_quadrature() const;
};

StateFile parse_state_json(const nlohmann::json& j);
StateFile load_state_file(const std::string& path);

nlohmann::json state_to_json(const QuadratureState& state);
nlohmann::json state_to_json(const NormalCM& cm);
nlohmann::json report_to_json(const WitnessReport& report);
nlohmann::json moment_table_to_json(const MomentTable& table);

std::string multi_index_key(const MultiIndex& k);

}  // namespace ncwit
