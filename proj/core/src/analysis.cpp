#include "gflsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "gflsim/errors.hpp"

namespace gfl {

namespace {
constexpr double k_negligible_ucq = 1e-3;
}

SurfaceGrid qp_surface(const ControlParams& p, const SurfaceSpec& spec) {
    SurfaceGrid g;
    for (double u = 0.0; u <= spec.u_max + 0.5 * spec.u_step; u += spec.u_step) {
        g.u_c.push_back(u);
    }
    for (double th = -spec.theta_span; th <= spec.theta_span + 0.5 * spec.theta_step;
         th += spec.theta_step) {
        g.theta_v.push_back(th);
    }
    g.nodes.reserve(g.u_c.size() * g.theta_v.size());
    for (double u : g.u_c) {
        const CurrentRefs refs = lvrt_traditional(u, p);
        for (double th : g.theta_v) {
            SurfaceGrid::Node n;
            n.ideal = power_ideal(refs, u);
            n.actual = power_actual(refs, u, th);
            g.nodes.push_back(n);
        }
    }
    g.q_crossover.assign(g.theta_v.size(), std::numeric_limits<double>::quiet_NaN());
    for (size_t it = 0; it < g.theta_v.size(); ++it) {
        for (size_t iu = 0; iu < g.u_c.size(); ++iu) {
            const auto& n = g.at(iu, it);
            if (n.actual.q > n.ideal.q) {
                g.q_crossover[it] = g.u_c[iu];
                break;
            }
        }
    }
    return g;
}

FaultClass classify_fault(const TwoBusNetwork& net, const FaultSpec& fault,
                          const ControlParams& p, const PllParams& pll, double inj_scale,
                          double dc_risk_drift) {
    FaultClass fc;
    const double eps_z = 1e-6;
    const double eps_f = 0.01;

    if (fault.location == FaultLocation::Terminal && std::abs(fault.z_cf) < eps_z &&
        std::abs(fault.z_f) < eps_f) {
        fc.category = FaultCategory::Pcc;
        fc.delta_trend = DeltaTrend::Negligible;
        fc.voltage_tendency = VoltageTendency::Negligible;
        fc.onfault_u_c = p.i_max * inj_scale * std::abs(fault.z_f);
        fc.onfault_u_cq = 0.0;
        fc.dc_risk = false;
        return fc;
    }

    // bypass circuit: dead source behind the series path to the fault
    const TheveninEquivalent byp = onfault_overlay(net, fault);
    const AlgebraicProblem prob{byp, EffectiveLaw::Traditional, p, inj_scale};
    const auto sol = solve_algebraic(0.0, prob, 0.5 * p.u_low, 0.0);
    if (sol.has_value()) {
        fc.onfault_u_c = sol->u_c;
        fc.onfault_u_cq = sol->u_cq;
    } else {
        fc.onfault_u_c = 0.0;
        fc.onfault_u_cq = 0.0;
    }

    fc.category = fc.onfault_u_c < p.saturation_voltage() ? FaultCategory::Nearby
                                                          : FaultCategory::Remote;
    if (std::abs(fc.onfault_u_cq) < k_negligible_ucq) {
        fc.delta_trend = DeltaTrend::Negligible;
    } else {
        fc.delta_trend =
            fc.onfault_u_cq < 0.0 ? DeltaTrend::Decrease : DeltaTrend::Increase;
    }

    const double window = std::max(fault.t_clear - fault.t_on, 0.0);
    fc.projected_drift = pll.k_p * fc.onfault_u_cq * window +
                         0.5 * pll.k_i * fc.onfault_u_cq * window * window;
    fc.dc_risk = std::abs(fc.projected_drift) > dc_risk_drift;

    switch (fc.delta_trend) {
        case DeltaTrend::Negligible:
            fc.voltage_tendency = VoltageTendency::Negligible;
            break;
        case DeltaTrend::Decrease:
            fc.voltage_tendency = VoltageTendency::High;
            break;
        case DeltaTrend::Increase:
            fc.voltage_tendency = VoltageTendency::Low;
            break;
    }
    return fc;
}

CriticalAngleResult critical_angle(const TheveninEquivalent& equiv, const ControlParams& p,
                                   double inj_scale, double reference_voltage,
                                   double scan_step) {
    CriticalAngleResult out;
    out.reference_voltage = reference_voltage;
    const AlgebraicProblem prob{equiv, EffectiveLaw::Traditional, p, inj_scale};

    const auto voltage_at = [&](double delta, double hint) -> std::optional<double> {
        const auto sol = solve_algebraic(delta, prob, hint, 0.0);
        if (!sol.has_value()) return std::nullopt;
        return sol->u_c;
    };

    double hint = reference_voltage;
    std::optional<double> prev;
    double prev_delta = -pi;
    for (double d = -pi; d <= pi + 0.5 * scan_step; d += scan_step) {
        const double delta = std::min(d, pi);
        auto u = voltage_at(delta, hint);
        if (u.has_value()) hint = *u;
        if (u.has_value() && prev.has_value()) {
            const double f_prev = *prev - reference_voltage;
            const double f_here = *u - reference_voltage;
            if ((f_prev <= 0.0) != (f_here <= 0.0)) {
                double a = prev_delta;
                double b = delta;
                double fa = f_prev;
                double local_hint = hint;
                for (int i = 0; i < 100 && (b - a) > 1e-8; ++i) {
                    const double m = 0.5 * (a + b);
                    const auto um = voltage_at(m, local_hint);
                    if (!um.has_value()) break;
                    local_hint = *um;
                    const double fm = *um - reference_voltage;
                    if ((fa <= 0.0) == (fm <= 0.0)) {
                        a = m;
                        fa = fm;
                    } else {
                        b = m;
                    }
                }
                const double root = 0.5 * (a + b);
                const auto sol = solve_algebraic(root, prob, local_hint, 0.0);
                if (sol.has_value()) {
                    CriticalAngle ca;
                    ca.delta_c_cr = root;
                    ca.theta_c_cr = std::atan2(sol->refs.i_cq, sol->refs.i_cd);
                    ca.residual = std::abs(sol->u_c - reference_voltage);
                    ca.extrapolated = root < rad(-80.0) || root > rad(130.0);
                    out.crossings.push_back(ca);
                }
            }
        }
        prev = u;
        prev_delta = delta;
        if (delta >= pi) break;
    }
    return out;
}

EpExistence ep_exists_onfault(const Phasor& z_cf, const ControlParams& p) {
    EpExistence out;
    out.u_c = p.i_max * std::abs(z_cf);
    out.refs = lvrt_droop_refs(out.u_c, p);
    const double theta_c = std::atan2(out.refs.i_cq, out.refs.i_cd);
    const double theta_zf = ang(z_cf);
    out.residual = wrap_angle(theta_zf + theta_c);
    out.exists = std::abs(out.residual) < 1e-6;
    return out;
}

std::optional<EquilibriumPoint> ep_solve_postfault(const TheveninEquivalent& equiv,
                                                   const ControlParams& p, ControlMode mode,
                                                   double inj_scale) {
    if (std::abs(equiv.u_src) < 1e-9) {
        // dead source: only the on-fault existence condition applies
        if (mode == ControlMode::Decoupled) {
            const EpExistence ex = ep_exists_onfault(equiv.z_eq, p);
            if (!ex.exists) return std::nullopt;
            return EquilibriumPoint{0.0, ex.u_c, 0.0, std::abs(ex.residual)};
        }
        return std::nullopt;
    }

    const AlgebraicProblem prob{equiv, EffectiveLaw::Traditional, p, inj_scale};
    const auto ucq_at = [&](double delta, double hint) -> std::optional<double> {
        const auto sol = solve_algebraic(delta, prob, hint, 0.0);
        if (!sol.has_value()) return std::nullopt;
        return sol->u_cq;
    };

    // bracket U_cq sign changes from 16 evenly spaced starts, keep the
    // root with the voltage vector on the forward (U_cd > 0) branch
    std::optional<EquilibriumPoint> best;
    const int n_starts = 16;
    double hint = 1.0;
    for (int i = 0; i < n_starts; ++i) {
        const double a0 = -pi + 2.0 * pi * i / n_starts;
        const double b0 = -pi + 2.0 * pi * (i + 1) / n_starts;
        auto fa = ucq_at(a0, hint);
        auto fb = ucq_at(b0, hint);
        if (!fa.has_value() || !fb.has_value()) continue;
        if ((*fa <= 0.0) == (*fb <= 0.0)) continue;
        double a = a0;
        double b = b0;
        double va = *fa;
        for (int it = 0; it < 200 && (b - a) > 1e-12; ++it) {
            const double m = 0.5 * (a + b);
            const auto fm = ucq_at(m, hint);
            if (!fm.has_value()) break;
            if ((va <= 0.0) == (*fm <= 0.0)) {
                a = m;
                va = *fm;
            } else {
                b = m;
            }
        }
        const double root = 0.5 * (a + b);
        const auto sol = solve_algebraic(root, prob, hint, 0.0);
        if (!sol.has_value()) continue;
        if (std::cos(sol->theta_v) <= 0.0) continue;  // antiphase root
        EquilibriumPoint ep{root, sol->u_c, sol->theta_v, std::abs(sol->u_cq)};
        if (!best.has_value() || ep.residual < best->residual) best = ep;
    }
    if (!best.has_value()) return std::nullopt;

    if (mode == ControlMode::Decoupled) {
        // the (theta_v = delta_c1 - delta_c) family must solve the flow for
        // any PLL angle; fold the worst deviation into the residual
        double worst = best->residual;
        const AlgebraicProblem dprob{equiv, EffectiveLaw::Decoupled, p, inj_scale};
        for (int i = 0; i < 8; ++i) {
            const double delta = best->delta_c + rad(-60.0 + 120.0 * i / 7.0);
            const auto sol = solve_algebraic(delta, dprob, best->u_c,
                                             wrap_angle(best->delta_c - delta));
            if (!sol.has_value()) return std::nullopt;
            worst = std::max(worst, std::abs(sol->u_c - best->u_c));
            worst = std::max(
                worst, std::abs(wrap_angle(sol->theta_v - (best->delta_c - delta))));
        }
        best->residual = worst;
    }
    return best;
}

namespace {

NodeLabel integrate_node(const TheveninEquivalent& equiv, const ControlParams& p,
                         const PllParams& pll, ControlMode mode, double inj_scale,
                         double delta0, double omega0, double delta_ep,
                         const StabilityGridSpec& spec) {
    const EffectiveLaw active_law =
        mode == ControlMode::Decoupled ? EffectiveLaw::Decoupled : EffectiveLaw::Traditional;

    double hint_u = 1.0;
    double hint_tv = 0.0;
    bool lvrt = false;

    const auto solve_at = [&](double delta,
                              bool* changed) -> std::optional<AlgebraicSolution> {
        for (int pass = 0; pass < 3; ++pass) {
            const AlgebraicProblem prob{
                equiv, lvrt ? active_law : EffectiveLaw::Inactive, p, inj_scale};
            const auto sol = solve_algebraic(delta, prob, hint_u, hint_tv);
            if (!sol.has_value()) return std::nullopt;
            bool flip = false;
            if (!lvrt && sol->u_c < p.u_low) {
                lvrt = true;
                flip = true;
            } else if (lvrt && sol->u_c >= p.u_low + p.exit_hysteresis) {
                lvrt = false;
                flip = true;
            }
            hint_u = sol->u_c;
            hint_tv = sol->theta_v;
            if (!flip) {
                if (changed != nullptr) *changed = pass > 0;
                return sol;
            }
        }
        const AlgebraicProblem prob{equiv, lvrt ? active_law : EffectiveLaw::Inactive, p,
                                    inj_scale};
        return solve_algebraic(delta, prob, hint_u, hint_tv);
    };

    auto s0 = solve_at(delta0, nullptr);
    if (!s0.has_value()) return NodeLabel::NoSolution;
    double delta = delta0;
    double x_i = omega0 - pll.k_p * s0->u_cq;

    const double dt = spec.dt;
    const int n_steps = static_cast<int>(spec.horizon / dt);
    double u_cq = s0->u_cq;
    for (int i = 0; i < n_steps; ++i) {
        // RK4 on (delta, x_i) with the algebraic layer re-solved per stage
        const auto f = [&](double d, double xi,
                           double* out_ucq) -> std::optional<std::pair<double, double>> {
            const auto sol = solve_at(d, nullptr);
            if (!sol.has_value()) return std::nullopt;
            if (out_ucq != nullptr) *out_ucq = sol->u_cq;
            return std::make_pair(pll.k_p * sol->u_cq + xi, pll.k_i * sol->u_cq);
        };
        const auto k1 = f(delta, x_i, &u_cq);
        if (!k1.has_value()) return NodeLabel::NoSolution;
        const auto k2 = f(delta + 0.5 * dt * k1->first, x_i + 0.5 * dt * k1->second, nullptr);
        if (!k2.has_value()) return NodeLabel::NoSolution;
        const auto k3 = f(delta + 0.5 * dt * k2->first, x_i + 0.5 * dt * k2->second, nullptr);
        if (!k3.has_value()) return NodeLabel::NoSolution;
        const auto k4 = f(delta + dt * k3->first, x_i + dt * k3->second, nullptr);
        if (!k4.has_value()) return NodeLabel::NoSolution;
        delta += dt / 6.0 * (k1->first + 2 * k2->first + 2 * k3->first + k4->first);
        x_i += dt / 6.0 * (k1->second + 2 * k2->second + 2 * k3->second + k4->second);
        if (std::abs(delta - delta_ep) > 2.0 * pi) return NodeLabel::LossOfSync;
    }
    const auto sf = solve_at(delta, nullptr);
    if (!sf.has_value()) return NodeLabel::NoSolution;
    const double omega_end = pll.k_p * sf->u_cq + x_i;
    if (std::abs(delta - delta_ep) < rad(2.0) && std::abs(omega_end) < 0.1) {
        return NodeLabel::Stable;
    }
    return NodeLabel::LossOfSync;
}

}  // namespace

StabilityMap stability_map(const TheveninEquivalent& equiv, const ControlParams& p,
                           const PllParams& pll, ControlMode mode, double inj_scale,
                           const StabilityGridSpec& spec) {
    const auto ep = ep_solve_postfault(equiv, p, mode, inj_scale);
    if (!ep.has_value()) {
        throw NoPrefaultEp("stability map needs a post-fault equilibrium");
    }

    StabilityMap map;
    map.delta_ep = ep->delta_c;
    map.delta_offsets.reserve(spec.n_delta);
    for (int i = 0; i < spec.n_delta; ++i) {
        map.delta_offsets.push_back(-pi + 2.0 * pi * i / (spec.n_delta - 1));
    }
    map.omega_values.reserve(spec.n_omega);
    for (int j = 0; j < spec.n_omega; ++j) {
        map.omega_values.push_back(-spec.omega_span +
                                   2.0 * spec.omega_span * j / (spec.n_omega - 1));
    }
    map.labels.assign(static_cast<size_t>(spec.n_delta) * spec.n_omega, NodeLabel::LossOfSync);

    unsigned n_threads = spec.threads > 0 ? static_cast<unsigned>(spec.threads)
                                          : std::thread::hardware_concurrency();
    if (n_threads == 0) n_threads = 1;
    n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(spec.n_delta));

    const auto worker = [&](unsigned tid) {
        for (int i = static_cast<int>(tid); i < spec.n_delta; i += static_cast<int>(n_threads)) {
            for (int j = 0; j < spec.n_omega; ++j) {
                const double d0 = ep->delta_c + map.delta_offsets[i];
                const double w0 = map.omega_values[j];
                map.labels[static_cast<size_t>(i) * spec.n_omega + j] = integrate_node(
                    equiv, p, pll, mode, inj_scale, d0, w0, ep->delta_c, spec);
            }
        }
    };
    if (n_threads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (unsigned tcount = 0; tcount < n_threads; ++tcount) {
            pool.emplace_back(worker, tcount);
        }
        for (auto& th : pool) th.join();
    }

    size_t stable = 0;
    for (const auto l : map.labels) {
        if (l == NodeLabel::Stable) ++stable;
    }
    map.stable_fraction = static_cast<double>(stable) / static_cast<double>(map.labels.size());
    return map;
}

}  // namespace gfl
