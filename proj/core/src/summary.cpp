#include "gflsim/summary.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gflsim/csv.hpp"

namespace gfl {

RunSummary summarize(const std::string& scenario_name, ControlMode mode, const TimeSeries& ts,
                     const FaultSpec& fault) {
    RunSummary s;
    s.scenario = scenario_name;
    s.mode = mode;
    s.events = ts.events;
    s.max_algebraic_residual = ts.max_algebraic_residual;
    if (ts.samples.empty()) return s;

    s.u_c_pre = ts.samples.front().u_c;
    s.final_u_c = ts.samples.back().u_c;
    s.final_delta_c = ts.samples.back().delta_c;

    double min_on = std::numeric_limits<double>::infinity();
    double min_post = std::numeric_limits<double>::infinity();
    double max_post = 0.0;
    double delta_at_on = ts.samples.front().delta_c;
    double delta_at_clear = ts.samples.back().delta_c;
    bool saw_on = false;
    bool saw_post = false;
    for (const auto& sample : ts.samples) {
        s.max_u_dc = std::max(s.max_u_dc, sample.u_dc);
        s.max_abs_theta_v = std::max(s.max_abs_theta_v, std::abs(sample.theta_v));
        if (sample.t >= fault.t_on && sample.t <= fault.t_clear) {
            if (!saw_on) {
                delta_at_on = sample.delta_c;
                saw_on = true;
            }
            delta_at_clear = sample.delta_c;
            min_on = std::min(min_on, sample.u_c);
        }
        if (sample.t >= fault.t_clear) {
            saw_post = true;
            min_post = std::min(min_post, sample.u_c);
            max_post = std::max(max_post, sample.u_c);
        }
    }
    s.min_u_c_onfault = saw_on ? min_on : s.u_c_pre;
    s.min_u_c_postfault = saw_post ? min_post : s.final_u_c;
    s.max_u_c_postfault = saw_post ? max_post : s.final_u_c;
    s.delta_c_change_onfault = delta_at_clear - delta_at_on;
    return s;
}

std::map<std::string, double> RunSummary::metrics() const {
    std::map<std::string, double> m;
    m["u_c_pre"] = u_c_pre;
    m["min_u_c_onfault"] = min_u_c_onfault;
    m["min_u_c_postfault"] = min_u_c_postfault;
    m["max_u_c_postfault"] = max_u_c_postfault;
    m["max_u_dc"] = max_u_dc;
    m["max_abs_theta_v"] = max_abs_theta_v;
    m["delta_c_change_onfault"] = delta_c_change_onfault;
    m["final_u_c"] = final_u_c;
    m["final_delta_c"] = final_delta_c;
    m["max_algebraic_residual"] = max_algebraic_residual;
    m["terminal_event"] = terminal_event() ? 1.0 : 0.0;
    if (cct.has_value()) m["cct"] = *cct;
    return m;
}

std::string format_summary(const RunSummary& s) {
    std::ostringstream os;
    os << "scenario: " << s.scenario << "\n";
    os << "mode: " << to_string(s.mode) << "\n";
    os << "events:";
    if (s.events.empty()) os << " none";
    for (const auto& e : s.events) {
        os << ' ' << to_string(e.kind) << "@" << format_double(e.t) << "s";
    }
    os << "\n";
    os << "U_c pre-fault: " << format_double(s.u_c_pre) << " p.u.\n";
    os << "U_c min on-fault: " << format_double(s.min_u_c_onfault) << " p.u.\n";
    os << "U_c min post-fault: " << format_double(s.min_u_c_postfault) << " p.u.\n";
    os << "U_c max post-fault: " << format_double(s.max_u_c_postfault) << " p.u.\n";
    os << "U_dc max: " << format_double(s.max_u_dc) << " p.u.\n";
    os << "|theta_v| max: " << format_double(deg(s.max_abs_theta_v)) << " deg\n";
    os << "delta_c change on-fault: " << format_double(deg(s.delta_c_change_onfault))
       << " deg\n";
    if (s.cct.has_value()) os << "cct: " << format_double(*s.cct) << " s\n";
    os << "max algebraic residual: " << format_double(s.max_algebraic_residual) << "\n";
    return os.str();
}

}  // namespace gfl
