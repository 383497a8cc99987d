#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "gflsim/scenario.hpp"

namespace gfl {

/// One consistent solution of the coupled network/control algebraic layer
/// at a fixed PLL angle.
struct AlgebraicSolution {
    double u_c = 0.0;
    double theta_v = 0.0;
    CurrentRefs refs;
    double u_cq = 0.0;
    double residual = 0.0;
};

/// Network plus control law as seen by the algebraic solver.
struct AlgebraicProblem {
    TheveninEquivalent equiv;
    EffectiveLaw law = EffectiveLaw::Inactive;
    ControlParams control;
    double inj_scale = 1.0;  ///< converter-p.u. current to system-p.u. injection
};

/// Damped fixed-point solve of U_c = |U'_g + Z_eq I_c(U_c, theta_v)| with
/// the current law closed through theta_v. Falls back to a scan plus
/// bisection when the iteration cycles. nullopt = the combined equations
/// admit no solution (a loss-of-synchronization condition, not an error).
[[nodiscard]] std::optional<AlgebraicSolution> solve_algebraic(double delta_c,
                                                               const AlgebraicProblem& prob,
                                                               double u_c_hint = 1.0,
                                                               double theta_v_hint = 0.0);

struct SystemState {
    PllState pll;
    double s_r = 0.0;
    double u_dc = 1.0;
    Phasor i_lag{0.0, 0.0};  ///< tracked current, converter p.u., grid frame
    AlgebraicSolution algebraic;
    double t_m = 0.0;    ///< mechanical torque fixed by initialization
    double p_in = 0.0;   ///< DC-side source power, frozen pre-fault P_c
};

/// Pre-fault synchronized equilibrium: U_cq = 0 with steady current
/// references, motor torque balanced. Throws NoPrefaultEp when no start
/// converges.
[[nodiscard]] SystemState initialize(const Scenario& scn);

/// Fixed-step integration with stage-wise algebraic re-solve; network
/// swaps exactly at t_on and t_clear. Stops early on loss of
/// synchronization or DC collapse, flagging the event.
[[nodiscard]] TimeSeries simulate(const Scenario& scn);
[[nodiscard]] TimeSeries simulate(const Scenario& scn, const SystemState& initial);

/// Piecewise-linear recovery envelope applied after fault clearance; flat
/// beyond the last knot.
struct RecoveryCriterion {
    std::vector<std::pair<double, double>> envelope{{0.0, 0.15}, {1.0, 0.90}};
    double horizon = 1.2;  ///< s after clearing over which the envelope is enforced

    [[nodiscard]] double bound_at(double t_after_clear) const;
    [[nodiscard]] bool satisfied(const TimeSeries& ts, double t_clear) const;
};

struct CctResult {
    double duration = 0.0;   ///< largest passing fault duration, s
    bool hit_upper = false;  ///< criterion never violated up to the bracket top
};

/// Bisection on fault duration to `resolution` seconds. Throws
/// BracketFailure when both endpoints pass or both fail (unless the upper
/// endpoint passes, which returns the bracket top flagged).
[[nodiscard]] CctResult cct_search(const Scenario& scn, const RecoveryCriterion& criterion,
                                   double lo = 0.02, double hi = 0.6,
                                   double resolution = 1e-3);

}  // namespace gfl
