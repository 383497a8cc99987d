#pragma once

#include "gflsim/phasor.hpp"

namespace gfl {

enum class ControlMode { Traditional, Decoupled };

/// Which current law is in force at a given instant.
enum class EffectiveLaw { Inactive, Traditional, Decoupled };

struct ControlParams {
    double i_max = 1.2;        ///< converter current ceiling, p.u.
    double k_q = 2.0;          ///< reactive droop, p.u./p.u.
    double u_low = 0.9;        ///< ride-through activation voltage, p.u.
    double i_cd_ref = 0.8;     ///< pre-fault active-current reference, p.u.
    double i_cq_ref = 0.0;     ///< steady reactive reference, p.u.
    ControlMode mode = ControlMode::Traditional;
    double t_decouple_delay = 0.1;  ///< s, decoupled law armed this long after activation
    double exit_hysteresis = 0.01;  ///< p.u. band above u_low before ride-through exits
    double tau_c = 0.0;             ///< current-tracking lag, s (0 disables)
    double c_dc = 0.1;              ///< DC-link energy constant, s

    /// Sag depth below which the reactive branch saturates.
    [[nodiscard]] double saturation_voltage() const { return u_low - i_max / k_q; }
};

/// d/q current references in the PLL frame.
struct CurrentRefs {
    double i_cd = 0.0;
    double i_cq = 0.0;

    [[nodiscard]] Phasor as_complex() const { return {i_cd, i_cq}; }
    [[nodiscard]] double magnitude() const { return std::hypot(i_cd, i_cq); }
};

struct PowerPair {
    double p = 0.0;
    double q = 0.0;  ///< positive = injected into the grid
};

/// Droop law: I_cq = -I_max below the saturation voltage, otherwise
/// -K_q (U_low - U_c) clamped to [-I_max, 0]; the d-axis takes whatever
/// headroom is left, capped at the reference.
[[nodiscard]] CurrentRefs lvrt_traditional(double u_c, const ControlParams& p);

/// Same droop computed against the voltage vector, then rotated by theta_v
/// so the injected current is phased to the voltage, not to the PLL.
/// Magnitude is preserved exactly.
[[nodiscard]] CurrentRefs lvrt_decoupled(double u_c, double theta_v, const ControlParams& p);

/// The droop references before rotation (the law behind both variants).
[[nodiscard]] CurrentRefs lvrt_droop_refs(double u_c, const ControlParams& p);

/// P = I_cd U_c, Q = -I_cq U_c: the steady-state proportionality.
[[nodiscard]] PowerPair power_ideal(const CurrentRefs& refs, double u_c);

/// P = U_c (I_cd cos + I_cq sin), Q = U_c (I_cd sin - I_cq cos): what the
/// grid actually receives when the PLL frame is off by theta_v.
[[nodiscard]] PowerPair power_actual(const CurrentRefs& refs, double u_c, double theta_v);

/// Switch logic: traditional while ride-through is active and the decoupled
/// law is not yet armed; decoupled afterwards (when configured); inactive
/// when ride-through is off.
[[nodiscard]] EffectiveLaw select_law(bool lvrt_active, double t_since_lvrt_entry,
                                      const ControlParams& p);

/// Constant-current references used while ride-through is inactive.
[[nodiscard]] CurrentRefs steady_refs(const ControlParams& p);

/// DC-link proxy: dU_dc/dt = (P_in - P_c) / (C_dc U_dc).
[[nodiscard]] double dc_link_derivative(double u_dc, double p_in, double p_c, double c_dc);

}  // namespace gfl
