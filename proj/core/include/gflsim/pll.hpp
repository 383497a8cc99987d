#pragma once

#include <cmath>
#include <utility>

namespace gfl {

struct PllParams {
    double k_p = 20.0;     ///< rad/s per p.u.
    double k_i = 500.0;    ///< rad/s^2 per p.u.
    double omega0 = 100.0 * 3.14159265358979323846;  ///< nominal rad/s (reporting only)
};

/// delta_c is kept unwrapped so on-fault drift stays observable.
struct PllState {
    double delta_c = 0.0;     ///< rad, relative to the grid reference
    double integrator = 0.0;  ///< rad/s

    [[nodiscard]] double omega_c(double u_cq, const PllParams& p) const {
        return p.k_p * u_cq + integrator;
    }
};

struct PllDerivatives {
    double d_delta_c = 0.0;
    double d_integrator = 0.0;
};

/// d(integrator)/dt = K_i U_cq, d(delta_c)/dt = K_p U_cq + integrator.
[[nodiscard]] inline PllDerivatives pll_derivatives(const PllState& s, double u_cq,
                                                    const PllParams& p) {
    return {p.k_p * u_cq + s.integrator, p.k_i * u_cq};
}

/// Synchronized when both the q-axis voltage and the frequency deviation
/// are negligible.
[[nodiscard]] inline bool pll_equilibrium_check(const PllState& s, double u_cq,
                                                const PllParams& p,
                                                double eps_sync = 1e-6,
                                                double eps_omega = 1e-4) {
    return std::abs(u_cq) < eps_sync && std::abs(s.omega_c(u_cq, p)) < eps_omega;
}

}  // namespace gfl
