#pragma once

#include <limits>
#include <optional>

#include "gflsim/phasor.hpp"

namespace gfl {

/// First-order induction-motor equivalent circuit plus mechanical data.
/// Impedances are per-unit on the motor's own base.
struct ImParams {
    Phasor z_s{0.0, 0.295};  ///< stator impedance
    double x_r = 0.12;       ///< rotor leakage reactance
    double r_r = 0.02;       ///< rotor resistance
    double x_m = 3.5;        ///< magnetizing reactance
    double h_m = 0.6;        ///< inertia constant, s
    double s_r0 = 0.02;      ///< initial slip
    /// Mechanical torque (constant-torque load). NaN = set from the
    /// pre-fault equilibrium during initialization.
    double t_m = std::numeric_limits<double>::quiet_NaN();
};

struct ImState {
    double s_r = 0.02;
};

/// Terminal impedance of the motor at slip s_r:
/// Z = Z_s + jX_m || (R_r/s_r + jX_r). s_r -> 0 gives the open-rotor limit.
[[nodiscard]] Phasor im_impedance(double s_r, const ImParams& p);

/// Rotor-branch current for a given terminal voltage.
[[nodiscard]] Phasor im_rotor_current(const Phasor& u_load, double s_r, const ImParams& p);

/// Air-gap torque T_e = |I_r|^2 R_r / s_r (per unit, synchronous speed = 1).
[[nodiscard]] double im_torque(const Phasor& u_load, double s_r, const ImParams& p);

/// ds_r/dt = (T_m - T_e) / (2 H_m).
[[nodiscard]] double im_slip_derivative(double t_e, double t_m, const ImParams& p);

/// Parallel combination of an impedance branch and a motor branch, each
/// scaled by the inverse of its power share: mix = 0 gives z_imp alone,
/// mix = 1 gives im_z alone.
[[nodiscard]] Phasor composite_load(const Phasor& z_imp, const Phasor& im_z, double mix);

/// Load seen by the network: constant-impedance part plus an optional
/// motor whose branch is sized to carry `mix` of the load power at
/// nominal voltage. `im_scale` multiplies the raw motor impedance before
/// mixing; NaN requests auto-sizing to the declared z_imp magnitude.
struct LoadDescriptor {
    Phasor z_imp{1.0, 0.0};
    std::optional<ImParams> im;
    double mix = 0.0;
    double im_scale = std::numeric_limits<double>::quiet_NaN();

    [[nodiscard]] bool has_motor() const { return im.has_value() && mix > 0.0; }
    /// Motor-branch scale, resolving auto-sizing at the motor's initial slip.
    [[nodiscard]] double resolved_im_scale() const;
    /// Impedance presented to the network at motor slip s_r.
    [[nodiscard]] Phasor impedance(double s_r) const;
};

}  // namespace gfl
