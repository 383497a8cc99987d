#pragma once

#include <string>
#include <vector>

#include "gflsim/scenario.hpp"

namespace gfl {

/// Parse a structured-text (JSON) scenario document. Overrides are
/// "section.field=value" strings applied to the document before parsing,
/// so any config field can be swept from the command line. Throws
/// ConfigError with the offending field name.
[[nodiscard]] Scenario parse_scenario_text(const std::string& text,
                                           const std::vector<std::string>& overrides = {});

[[nodiscard]] Scenario load_scenario_file(const std::string& path,
                                          const std::vector<std::string>& overrides = {});

/// Serialize a scenario to the same document format (round-trips).
[[nodiscard]] std::string scenario_to_text(const Scenario& scn);

/// Impedance strings: "0.495+j0.0495", "j0.2", "-0.1", "10ohm", "1 ohm".
/// Ohm-suffixed values convert through Z_base = U_b^2 / S_b.
[[nodiscard]] Phasor parse_impedance(const std::string& text, const Bases& bases,
                                     const std::string& field);

}  // namespace gfl
