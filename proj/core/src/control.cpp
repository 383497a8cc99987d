#include "gflsim/control.hpp"

#include <algorithm>
#include <cmath>

namespace gfl {

CurrentRefs lvrt_droop_refs(double u_c, const ControlParams& p) {
    CurrentRefs refs;
    if (u_c < p.saturation_voltage()) {
        refs.i_cq = -p.i_max;
        refs.i_cd = 0.0;
        return refs;
    }
    refs.i_cq = std::clamp(-p.k_q * (p.u_low - u_c), -p.i_max, 0.0);
    const double headroom_sq = std::max(p.i_max * p.i_max - refs.i_cq * refs.i_cq, 0.0);
    refs.i_cd = std::min(std::sqrt(headroom_sq), p.i_cd_ref);
    return refs;
}

CurrentRefs lvrt_traditional(double u_c, const ControlParams& p) {
    return lvrt_droop_refs(u_c, p);
}

CurrentRefs lvrt_decoupled(double u_c, double theta_v, const ControlParams& p) {
    const CurrentRefs v = lvrt_droop_refs(u_c, p);  // aligned to the voltage vector
    const double c = std::cos(theta_v);
    const double s = std::sin(theta_v);
    CurrentRefs refs;
    refs.i_cq = v.i_cq * c + v.i_cd * s;
    refs.i_cd = v.i_cd * c - v.i_cq * s;
    return refs;
}

PowerPair power_ideal(const CurrentRefs& refs, double u_c) {
    return {refs.i_cd * u_c, -refs.i_cq * u_c};
}

PowerPair power_actual(const CurrentRefs& refs, double u_c, double theta_v) {
    const double c = std::cos(theta_v);
    const double s = std::sin(theta_v);
    PowerPair out;
    out.p = refs.i_cd * u_c * c + refs.i_cq * u_c * s;
    out.q = refs.i_cd * u_c * s - refs.i_cq * u_c * c;
    return out;
}

EffectiveLaw select_law(bool lvrt_active, double t_since_lvrt_entry, const ControlParams& p) {
    if (!lvrt_active) return EffectiveLaw::Inactive;
    if (p.mode == ControlMode::Decoupled && t_since_lvrt_entry >= p.t_decouple_delay) {
        return EffectiveLaw::Decoupled;
    }
    return EffectiveLaw::Traditional;
}

CurrentRefs steady_refs(const ControlParams& p) { return {p.i_cd_ref, p.i_cq_ref}; }

double dc_link_derivative(double u_dc, double p_in, double p_c, double c_dc) {
    return (p_in - p_c) / (c_dc * u_dc);
}

}  // namespace gfl
