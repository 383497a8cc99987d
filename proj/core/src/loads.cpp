#include "gflsim/loads.hpp"

#include <cmath>

namespace gfl {

namespace {
constexpr double k_open_slip = 1e-9;
}

Phasor im_impedance(double s_r, const ImParams& p) {
    if (s_r < k_open_slip) {
        // open-rotor limit
        return p.z_s + Phasor{0.0, p.x_m};
    }
    const Phasor z_rotor{p.r_r / s_r, p.x_r};
    const Phasor z_mag{0.0, p.x_m};
    return p.z_s + parallel(z_mag, z_rotor);
}

Phasor im_rotor_current(const Phasor& u_load, double s_r, const ImParams& p) {
    if (s_r < k_open_slip) return {0.0, 0.0};
    const Phasor z_rotor{p.r_r / s_r, p.x_r};
    const Phasor i_stator = u_load / im_impedance(s_r, p);
    const Phasor u_gap = u_load - i_stator * p.z_s;
    return u_gap / z_rotor;
}

double im_torque(const Phasor& u_load, double s_r, const ImParams& p) {
    if (s_r < k_open_slip) return 0.0;
    const Phasor i_r = im_rotor_current(u_load, s_r, p);
    return std::norm(i_r) * p.r_r / s_r;
}

double im_slip_derivative(double t_e, double t_m, const ImParams& p) {
    return (t_m - t_e) / (2.0 * p.h_m);
}

Phasor composite_load(const Phasor& z_imp, const Phasor& im_z, double mix) {
    if (mix <= 0.0) return z_imp;
    if (mix >= 1.0) return im_z;
    return parallel(z_imp / (1.0 - mix), im_z / mix);
}

double LoadDescriptor::resolved_im_scale() const {
    if (!im.has_value()) return 1.0;
    if (!std::isnan(im_scale)) return im_scale;
    const double raw = std::abs(im_impedance(im->s_r0, *im));
    if (raw <= 0.0) return 1.0;
    return std::abs(z_imp) / raw;
}

Phasor LoadDescriptor::impedance(double s_r) const {
    if (!has_motor()) return z_imp;
    const Phasor z_motor = im_impedance(s_r, *im) * resolved_im_scale();
    return composite_load(z_imp, z_motor, mix);
}

}  // namespace gfl
