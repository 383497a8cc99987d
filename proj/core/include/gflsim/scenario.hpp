#pragma once

#include <string>
#include <variant>
#include <vector>

#include "gflsim/control.hpp"
#include "gflsim/network.hpp"
#include "gflsim/phasor.hpp"
#include "gflsim/pll.hpp"
#include "gflsim/ybus.hpp"

namespace gfl {

/// Per-unit bases. Converter quantities are on S_c, network quantities on
/// S_b; voltages share U_b. kV only at the reporting boundary.
struct Bases {
    double s_b_mva = 100.0;
    double s_c_mva = 100.0;
    double u_b_kv = 230.0;
    double u_dc_kv = 640.0;
    double omega0 = 100.0 * pi;

    [[nodiscard]] double injection_scale() const { return s_c_mva / s_b_mva; }
    [[nodiscard]] double z_base_ohm() const { return u_b_kv * u_b_kv / s_b_mva; }
};

enum class Integrator { Rk4, Heun };

struct SimParams {
    double dt = 1e-4;
    double t_end = 2.0;
    double dt_out = 1e-3;
    Integrator integrator = Integrator::Rk4;
};

struct Scenario {
    std::string name = "scenario";
    std::variant<TwoBusNetwork, YBusNetwork> network;
    FaultSpec fault;
    ControlParams control;
    PllParams pll;
    SimParams sim;
    Bases bases;

    [[nodiscard]] bool is_two_bus() const { return std::holds_alternative<TwoBusNetwork>(network); }
    [[nodiscard]] const TwoBusNetwork& two_bus() const { return std::get<TwoBusNetwork>(network); }
    [[nodiscard]] TwoBusNetwork& two_bus() { return std::get<TwoBusNetwork>(network); }
    [[nodiscard]] const YBusNetwork& ybus() const { return std::get<YBusNetwork>(network); }
    [[nodiscard]] YBusNetwork& ybus() { return std::get<YBusNetwork>(network); }
};

enum class EventKind { FaultOn, FaultClear, LossOfSync, DcCollapse };

struct SimEvent {
    EventKind kind;
    double t = 0.0;
};

struct Sample {
    double t = 0.0;
    double u_c = 0.0;        ///< PCC voltage magnitude, p.u.
    double ang_u_c = 0.0;    ///< PCC voltage angle, grid frame, rad
    double delta_c = 0.0;    ///< PLL angle, rad (unwrapped)
    double omega_c = 0.0;    ///< PLL frequency deviation, rad/s
    double theta_v = 0.0;    ///< voltage angle in the PLL frame, rad
    double i_cd = 0.0;       ///< injected d-axis current, converter p.u.
    double i_cq = 0.0;
    double p_c = 0.0;        ///< converter p.u.
    double q_c = 0.0;
    double s_r = 0.0;
    double u_dc = 1.0;
    bool lvrt_active = false;
    EffectiveLaw law = EffectiveLaw::Inactive;
};

struct TimeSeries {
    std::vector<Sample> samples;
    std::vector<SimEvent> events;
    double max_algebraic_residual = 0.0;

    [[nodiscard]] bool has_event(EventKind k) const {
        for (const auto& e : events)
            if (e.kind == k) return true;
        return false;
    }
};

[[nodiscard]] const char* to_string(EffectiveLaw law);
[[nodiscard]] const char* to_string(EventKind kind);
[[nodiscard]] const char* to_string(ControlMode mode);

}  // namespace gfl
