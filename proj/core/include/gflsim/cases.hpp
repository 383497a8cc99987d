#pragma once

#include <string>
#include <vector>

#include "gflsim/scenario.hpp"

namespace gfl {

/// Built-in study cases:
///   case2_like  2-bus, impedance load, remote-type bolted grid-bus fault
///   casefig7    2-bus variant (K_q = 2, resistive coupling), nearby-type
///   case3       2-bus, 100% motor load, 10-ohm fault, heavier source
///   case4       modified 9-bus, remote tie (0.03+j0.3), 50% motor load
///   case5       modified 9-bus, short tie (0.05+j0.07), impedance load
[[nodiscard]] std::vector<std::string> builtin_case_names();
[[nodiscard]] Scenario builtin_case(const std::string& name);  ///< throws ConfigError

}  // namespace gfl
