#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gflsim/control.hpp"
#include "gflsim/network.hpp"
#include "gflsim/scenario.hpp"
#include "gflsim/simulator.hpp"

namespace gfl {

/// Ideal-vs-actual power over a (U_c, theta_v) grid, plus the per-column
/// voltage above which actual Q exceeds ideal Q.
struct SurfaceGrid {
    std::vector<double> u_c;        ///< axis values, p.u.
    std::vector<double> theta_v;    ///< axis values, rad
    struct Node {
        PowerPair ideal;
        PowerPair actual;
    };
    std::vector<Node> nodes;  ///< row-major, u_c rows x theta_v columns
    /// Smallest grid voltage with actual Q > ideal Q, NaN when none.
    std::vector<double> q_crossover;

    [[nodiscard]] const Node& at(size_t iu, size_t it) const {
        return nodes[iu * theta_v.size() + it];
    }
};

struct SurfaceSpec {
    double u_max = 1.2;
    double u_step = 0.01;
    double theta_span = rad(90.0);
    double theta_step = rad(1.0);
};

[[nodiscard]] SurfaceGrid qp_surface(const ControlParams& p, const SurfaceSpec& spec = {});

enum class FaultCategory { Pcc, Nearby, Remote };
enum class DeltaTrend { Negligible, Decrease, Increase };
enum class VoltageTendency { Negligible, High, Low };

struct FaultClass {
    FaultCategory category = FaultCategory::Pcc;
    DeltaTrend delta_trend = DeltaTrend::Negligible;
    VoltageTendency voltage_tendency = VoltageTendency::Negligible;
    bool dc_risk = false;
    double onfault_u_c = 0.0;       ///< bypass-approximation estimate
    double onfault_u_cq = 0.0;      ///< drives the trend sign
    double projected_drift = 0.0;   ///< |delta_c| excursion over the fault window, rad
};

/// Table-driven classification from the bypass on-fault circuit.
[[nodiscard]] FaultClass classify_fault(const TwoBusNetwork& net, const FaultSpec& fault,
                                        const ControlParams& p, const PllParams& pll,
                                        double inj_scale = 1.0,
                                        double dc_risk_drift = rad(30.0));

struct CriticalAngle {
    double delta_c_cr = 0.0;   ///< rad
    double theta_c_cr = 0.0;   ///< current angle at the crossing, rad
    double residual = 0.0;     ///< |U_c(delta_c_cr) - reference|
    bool extrapolated = false; ///< outside the studied [-80, 130] degree range
};

struct CriticalAngleResult {
    std::vector<CriticalAngle> crossings;
    double reference_voltage = 0.0;
};

/// Scan the PLL angle over [-180, 180] degrees solving the algebraic layer
/// per angle, and bisect every sign change of U_c(delta_c) - reference.
/// reference = the pre-fault voltage, or (use_postfault_reference) the
/// post-fault voltage at the pre-fault angle.
[[nodiscard]] CriticalAngleResult critical_angle(const TheveninEquivalent& equiv,
                                                 const ControlParams& p, double inj_scale,
                                                 double reference_voltage,
                                                 double scan_step = rad(0.5));

struct EpExistence {
    bool exists = false;
    double residual = 0.0;  ///< wrapped theta_zf + theta_c, rad
    double u_c = 0.0;
    CurrentRefs refs;
};

/// On-fault equilibrium existence for the decoupled law behind Z_cf: the
/// voltage-aligned current must be antiphase to the path angle.
[[nodiscard]] EpExistence ep_exists_onfault(const Phasor& z_cf, const ControlParams& p);

struct EquilibriumPoint {
    double delta_c = 0.0;
    double u_c = 0.0;
    double theta_v = 0.0;
    double residual = 0.0;
};

/// Post-fault equilibrium from multiple angle starts. For the decoupled
/// law the solution is the theta_v = 0 point of the traditional law; the
/// (theta_v = delta_c1 - delta_c) family is checked by substitution.
[[nodiscard]] std::optional<EquilibriumPoint> ep_solve_postfault(const TheveninEquivalent& equiv,
                                                                 const ControlParams& p,
                                                                 ControlMode mode,
                                                                 double inj_scale = 1.0);

enum class NodeLabel { Stable, LossOfSync, NoSolution };

struct StabilityMap {
    std::vector<double> delta_offsets;  ///< rad, relative to the equilibrium angle
    std::vector<double> omega_values;   ///< rad/s
    std::vector<NodeLabel> labels;      ///< row-major, delta rows x omega columns
    double delta_ep = 0.0;
    double stable_fraction = 0.0;
};

struct StabilityGridSpec {
    int n_delta = 181;
    int n_omega = 101;
    double omega_span = 100.0;  ///< rad/s
    double horizon = 2.0;       ///< s
    double dt = 1e-3;
    int threads = 0;            ///< 0 = hardware concurrency
};

/// Label every initial (delta_c, omega_c) node by integrating the
/// post-fault closed loop. Impedance-load networks only.
[[nodiscard]] StabilityMap stability_map(const TheveninEquivalent& equiv,
                                         const ControlParams& p, const PllParams& pll,
                                         ControlMode mode, double inj_scale = 1.0,
                                         const StabilityGridSpec& spec = {});

}  // namespace gfl
