#pragma once

#include <map>
#include <optional>
#include <string>

#include "gflsim/scenario.hpp"

namespace gfl {

/// Headline numbers of one run, derived from its time series.
struct RunSummary {
    std::string scenario;
    ControlMode mode = ControlMode::Traditional;
    std::vector<SimEvent> events;
    double u_c_pre = 0.0;              ///< equilibrium voltage before the fault
    double min_u_c_onfault = 0.0;
    double min_u_c_postfault = 0.0;    ///< the dip the recovery starts from
    double max_u_c_postfault = 0.0;
    double max_u_dc = 0.0;
    double max_abs_theta_v = 0.0;
    double delta_c_change_onfault = 0.0;  ///< rad, clearing minus inception
    double final_u_c = 0.0;
    double final_delta_c = 0.0;
    double max_algebraic_residual = 0.0;
    std::optional<double> cct;

    [[nodiscard]] bool terminal_event() const {
        for (const auto& e : events)
            if (e.kind == EventKind::LossOfSync || e.kind == EventKind::DcCollapse) return true;
        return false;
    }
    /// Named metrics for manifests and reports.
    [[nodiscard]] std::map<std::string, double> metrics() const;
};

[[nodiscard]] RunSummary summarize(const std::string& scenario_name, ControlMode mode,
                                   const TimeSeries& ts, const FaultSpec& fault);

[[nodiscard]] std::string format_summary(const RunSummary& s);

}  // namespace gfl
