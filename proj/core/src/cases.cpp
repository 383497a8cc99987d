#include "gflsim/cases.hpp"

#include "gflsim/config.hpp"
#include "gflsim/errors.hpp"

namespace gfl {

namespace {

// 2-bus study system: stiff-ish source, reactive coupling, impedance load;
// bolted grid-bus fault reads as a remote fault to the converter.
const char* k_case2_like = R"({
  "name": "case2_like",
  "system": {"topology": "two_bus", "S_b": 100, "S_c": 100, "U_b": 230, "U_dc": 640,
             "omega0": 314.1592653589793,
             "U_g": 1.1, "Z_g": "j0.2", "Z_c": "j0.2"},
  "converter": {"I_max": 1.2, "K_q": 1.5, "U_low": 0.9, "I_cd_ref": 0.817, "I_cq_ref": 0,
                "mode": "traditional", "tau_c": 0, "t_decouple_delay": 0.1},
  "pll": {"K_p": 20, "K_i": 500},
  "load": {"mix": 0, "Z_imp": "0.495+j0.0495"},
  "fault": {"Z_cf": "0", "Z_f": "0", "t_on": 0.2, "t_clear": 0.344, "location": "line"},
  "sim": {"dt": 1e-4, "t_end": 2.5, "integrator": "rk4", "dt_out": 1e-3}
})";

// the K_q = 2 variant with resistive converter coupling: the same bolted
// grid-bus fault saturates the droop and pulls the PLL angle down
const char* k_casefig7 = R"({
  "name": "casefig7",
  "system": {"topology": "two_bus", "S_b": 100, "S_c": 100, "U_b": 230, "U_dc": 640,
             "omega0": 314.1592653589793,
             "U_g": 1.1, "Z_g": "j0.2", "Z_c": "0.0684+j0.1879"},
  "converter": {"I_max": 1.2, "K_q": 2, "U_low": 0.9, "I_cd_ref": 0.817, "I_cq_ref": 0,
                "mode": "traditional", "tau_c": 0, "t_decouple_delay": 0.1},
  "pll": {"K_p": 20, "K_i": 500},
  "load": {"mix": 0, "Z_imp": "0.495+j0.0495"},
  "fault": {"Z_cf": "0", "Z_f": "0", "t_on": 0.2, "t_clear": 0.32, "location": "line"},
  "sim": {"dt": 1e-4, "t_end": 2.5, "integrator": "rk4", "dt_out": 1e-3}
})";

// motor load behind a raised source; 10-ohm fault at the grid bus
const char* k_case3 = R"({
  "name": "case3",
  "system": {"topology": "two_bus", "S_b": 100, "S_c": 120, "U_b": 230, "U_dc": 640,
             "omega0": 376.99111843077515,
             "U_g": 1.2, "Z_g": "j0.12", "Z_c": "j0.12"},
  "converter": {"I_max": 1.0, "K_q": 2, "U_low": 0.9, "I_cd_ref": 0.833, "I_cq_ref": 0,
                "mode": "traditional", "tau_c": 0.005, "t_decouple_delay": 0.1},
  "pll": {"K_p": 20, "K_i": 1000},
  "load": {"mix": 1, "Z_imp": "1", "im_scale": 1,
           "Z_s": "j0.295", "X_r": 0.12, "R_r": 0.02, "X_m": 3.5, "H_m": 0.6, "s_r0": 0.02},
  "fault": {"Z_cf": "0", "Z_f": "10ohm", "t_on": 0.2, "t_clear": 0.34, "location": "line"},
  "sim": {"dt": 1e-4, "t_end": 3.0, "integrator": "rk4", "dt_out": 1e-3}
})";

// modified 9-bus, long tie to the faulted bus, half the load is motors
const char* k_case4 = R"({
  "name": "case4",
  "system": {"topology": "nine_bus", "S_b": 100, "S_c": 100, "U_b": 230, "U_dc": 640,
             "omega0": 314.1592653589793,
             "Z_7": "0.03+j0.3", "R_f": "1ohm"},
  "converter": {"I_max": 1.2, "K_q": 1.5, "U_low": 0.9, "I_cd_ref": 0.817, "I_cq_ref": 0,
                "mode": "traditional", "tau_c": 0.005, "t_decouple_delay": 0.1},
  "pll": {"K_p": 20, "K_i": 500},
  "load": {"mix": 0.5, "Z_imp": "1",
           "Z_s": "j0.295", "X_r": 0.12, "R_r": 0.02, "X_m": 3.5, "H_m": 0.6, "s_r0": 0.02},
  "fault": {"Z_cf": "0", "Z_f": "0", "t_on": 0.2, "t_clear": 0.3, "location": "line"},
  "sim": {"dt": 1e-4, "t_end": 2.5, "integrator": "rk4", "dt_out": 1e-3}
})";

// modified 9-bus, short tie: the bus-7 fault reads nearby; impedance load
const char* k_case5 = R"({
  "name": "case5",
  "system": {"topology": "nine_bus", "S_b": 100, "S_c": 100, "U_b": 230, "U_dc": 640,
             "omega0": 314.1592653589793,
             "Z_7": "0.05+j0.07", "R_f": "1ohm"},
  "converter": {"I_max": 1.2, "K_q": 1.5, "U_low": 0.9, "I_cd_ref": 0.817, "I_cq_ref": 0,
                "mode": "traditional", "tau_c": 0.005, "t_decouple_delay": 0.1},
  "pll": {"K_p": 20, "K_i": 500},
  "load": {"mix": 0, "Z_imp": "1"},
  "fault": {"Z_cf": "0", "Z_f": "0", "t_on": 0.2, "t_clear": 0.3, "location": "line"},
  "sim": {"dt": 1e-4, "t_end": 2.5, "integrator": "rk4", "dt_out": 1e-3}
})";

}  // namespace

std::vector<std::string> builtin_case_names() {
    return {"case2_like", "casefig7", "case3", "case4", "case5"};
}

Scenario builtin_case(const std::string& name) {
    if (name == "case2_like") return parse_scenario_text(k_case2_like);
    if (name == "casefig7") return parse_scenario_text(k_casefig7);
    if (name == "case3") return parse_scenario_text(k_case3);
    if (name == "case4") return parse_scenario_text(k_case4);
    if (name == "case5") return parse_scenario_text(k_case5);
    throw ConfigError("case", "unknown built-in case '" + name + "'");
}

}  // namespace gfl
