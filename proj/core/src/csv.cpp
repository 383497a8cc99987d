#include "gflsim/csv.hpp"

#include <cstdio>

namespace gfl {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

const char* to_string(EffectiveLaw law) {
    switch (law) {
        case EffectiveLaw::Inactive: return "inactive";
        case EffectiveLaw::Traditional: return "traditional";
        case EffectiveLaw::Decoupled: return "decoupled";
    }
    return "?";
}

const char* to_string(EventKind kind) {
    switch (kind) {
        case EventKind::FaultOn: return "fault_on";
        case EventKind::FaultClear: return "fault_clear";
        case EventKind::LossOfSync: return "loss_of_sync";
        case EventKind::DcCollapse: return "dc_collapse";
    }
    return "?";
}

const char* to_string(ControlMode mode) {
    return mode == ControlMode::Traditional ? "traditional" : "decoupled";
}

void write_timeseries_csv(std::ostream& os, const TimeSeries& ts) {
    os << "t,U_c,ang_U_c,delta_c,omega_c,theta_v,I_cd,I_cq,P_c,Q_c,s_r,U_dc,lvrt_active,mode\n";
    for (const auto& s : ts.samples) {
        os << format_double(s.t) << ',' << format_double(s.u_c) << ','
           << format_double(s.ang_u_c) << ',' << format_double(s.delta_c) << ','
           << format_double(s.omega_c) << ',' << format_double(s.theta_v) << ','
           << format_double(s.i_cd) << ',' << format_double(s.i_cq) << ','
           << format_double(s.p_c) << ',' << format_double(s.q_c) << ','
           << format_double(s.s_r) << ',' << format_double(s.u_dc) << ','
           << (s.lvrt_active ? 1 : 0) << ',' << to_string(s.law) << '\n';
    }
}

void write_surface_csv(std::ostream& os, const SurfaceGrid& grid) {
    os << "U_c,theta_v_deg,P_ideal,Q_ideal,P_actual,Q_actual\n";
    for (size_t iu = 0; iu < grid.u_c.size(); ++iu) {
        for (size_t it = 0; it < grid.theta_v.size(); ++it) {
            const auto& n = grid.at(iu, it);
            os << format_double(grid.u_c[iu]) << ',' << format_double(deg(grid.theta_v[it]))
               << ',' << format_double(n.ideal.p) << ',' << format_double(n.ideal.q) << ','
               << format_double(n.actual.p) << ',' << format_double(n.actual.q) << '\n';
        }
    }
}

void write_crossover_csv(std::ostream& os, const SurfaceGrid& grid) {
    os << "theta_v_deg,q_crossover_u\n";
    for (size_t it = 0; it < grid.theta_v.size(); ++it) {
        os << format_double(deg(grid.theta_v[it])) << ','
           << format_double(grid.q_crossover[it]) << '\n';
    }
}

void write_stability_map_csv(std::ostream& os, const StabilityMap& map) {
    os << "delta_offset_deg,omega_c,label\n";
    for (size_t i = 0; i < map.delta_offsets.size(); ++i) {
        for (size_t j = 0; j < map.omega_values.size(); ++j) {
            const NodeLabel l = map.labels[i * map.omega_values.size() + j];
            const char* name = l == NodeLabel::Stable ? "stable"
                               : l == NodeLabel::LossOfSync ? "los"
                                                            : "no_solution";
            os << format_double(deg(map.delta_offsets[i])) << ','
               << format_double(map.omega_values[j]) << ',' << name << '\n';
        }
    }
}

}  // namespace gfl
