#include "gflsim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "gflsim/errors.hpp"

namespace gfl {

namespace {

constexpr double k_tiny_voltage = 1e-9;
constexpr double k_fp_tol = 1e-8;
constexpr int k_fp_max_iter = 50;
constexpr double k_scan_step = 0.005;
constexpr double k_min_slip = 1e-6;

Phasor dq_source(const TheveninEquivalent& eq, double delta_c) {
    return eq.u_src * std::polar(1.0, -delta_c);
}

CurrentRefs law_refs(EffectiveLaw law, double u_c, double theta_v, const ControlParams& p) {
    switch (law) {
        case EffectiveLaw::Inactive: return steady_refs(p);
        case EffectiveLaw::Traditional: return lvrt_traditional(u_c, p);
        case EffectiveLaw::Decoupled: return lvrt_decoupled(u_c, theta_v, p);
    }
    return {};
}

/// Bisect f on [a, b] assuming a sign change; returns the root abscissa.
template <typename F>
double bisect(F&& f, double a, double b, double fa, double tol) {
    for (int i = 0; i < 200 && (b - a) > tol; ++i) {
        const double m = 0.5 * (a + b);
        const double fm = f(m);
        if ((fa <= 0.0) == (fm <= 0.0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

/// All sign-change roots of f over [0, u_max].
template <typename F>
std::vector<double> scan_roots(F&& f, double u_max, double step, double tol) {
    std::vector<double> roots;
    double prev_u = 0.0;
    double prev_f = f(0.0);
    if (std::abs(prev_f) < tol) roots.push_back(0.0);
    for (double u = step; u <= u_max + 0.5 * step; u += step) {
        const double fu = f(u);
        if ((prev_f <= 0.0) != (fu <= 0.0)) {
            roots.push_back(bisect(f, prev_u, u, prev_f, 1e-10));
        } else if (std::abs(fu) < tol) {
            roots.push_back(u);
        }
        prev_u = u;
        prev_f = fu;
    }
    return roots;
}

double nearest_to(const std::vector<double>& xs, double target) {
    double best = xs.front();
    for (double x : xs)
        if (std::abs(x - target) < std::abs(best - target)) best = x;
    return best;
}

}  // namespace

std::optional<AlgebraicSolution> solve_algebraic(double delta_c, const AlgebraicProblem& prob,
                                                 double u_c_hint, double theta_v_hint) {
    const Phasor e = dq_source(prob.equiv, delta_c);
    const Phasor zk = prob.equiv.z_eq * prob.inj_scale;
    const ControlParams& ctl = prob.control;

    // any solution obeys |U| <= |E| + |Z I|
    const double i_bound = std::max(ctl.i_max, std::hypot(ctl.i_cd_ref, ctl.i_cq_ref));
    const double u_scan_max = std::max(1.5, std::abs(e) + std::abs(zk) * i_bound + 0.1);

    const auto finish = [&](const CurrentRefs& refs, double u_c,
                            double theta_v) -> AlgebraicSolution {
        AlgebraicSolution sol;
        const Phasor u_dq = zk * refs.as_complex() + e;
        sol.u_c = u_c;
        sol.theta_v = theta_v;
        sol.refs = refs;
        sol.u_cq = u_c * std::sin(theta_v);
        sol.residual = std::abs(std::abs(u_dq) - u_c);
        return sol;
    };

    if (prob.law == EffectiveLaw::Inactive) {
        const CurrentRefs refs = steady_refs(ctl);
        const Phasor u_dq = zk * refs.as_complex() + e;
        const double u_c = std::abs(u_dq);
        const double theta_v = u_c < k_tiny_voltage ? 0.0 : ang(u_dq);
        return finish(refs, u_c, theta_v);
    }

    if (prob.law == EffectiveLaw::Traditional) {
        const auto voltage_map = [&](double u) {
            const CurrentRefs refs = lvrt_traditional(u, ctl);
            return std::abs(zk * refs.as_complex() + e);
        };
        double u = std::clamp(u_c_hint, 0.0, u_scan_max);
        bool converged = false;
        for (int it = 0; it < k_fp_max_iter; ++it) {
            const double step = voltage_map(u) - u;
            if (std::abs(step) < k_fp_tol) {
                converged = true;
                break;
            }
            u = std::max(0.0, u + 0.5 * step);
        }
        if (!converged) {
            const auto resid = [&](double v) { return voltage_map(v) - v; };
            const auto roots = scan_roots(resid, u_scan_max, k_scan_step, k_fp_tol);
            if (roots.empty()) return std::nullopt;
            u = nearest_to(roots, u_c_hint);
        }
        const CurrentRefs refs = lvrt_traditional(u, ctl);
        const Phasor u_dq = zk * refs.as_complex() + e;
        const double theta_v = std::abs(u_dq) < k_tiny_voltage ? 0.0 : ang(u_dq);
        return finish(refs, u, theta_v);
    }

    // decoupled: the rotation factors out of the network equation, leaving
    // |U_c - Z I'(U_c)| = |E| with theta_v recovered from the argument
    const auto w = [&](double u) {
        const CurrentRefs refs = lvrt_droop_refs(u, ctl);
        return Phasor{u, 0.0} - zk * refs.as_complex();
    };
    const double target = std::abs(e);

    if (target < k_tiny_voltage) {
        // dead source: W(u) must vanish as a vector, generically impossible
        double best_u = 0.0;
        double best = std::abs(w(0.0));
        for (double u = 0.0; u <= u_scan_max; u += k_scan_step) {
            const double m = std::abs(w(u));
            if (m < best) {
                best = m;
                best_u = u;
            }
        }
        if (best > k_fp_tol) return std::nullopt;
        const CurrentRefs refs = lvrt_decoupled(best_u, theta_v_hint, ctl);
        return finish(refs, best_u, theta_v_hint);
    }

    double u = std::clamp(u_c_hint, 0.0, u_scan_max);
    bool converged = false;
    for (int it = 0; it < k_fp_max_iter; ++it) {
        const double step = target - std::abs(w(u));
        if (std::abs(step) < k_fp_tol) {
            converged = true;
            break;
        }
        u = std::max(0.0, u + 0.5 * step);
    }
    if (!converged) {
        const auto resid = [&](double v) { return std::abs(w(v)) - target; };
        const auto roots = scan_roots(resid, u_scan_max, k_scan_step, k_fp_tol);
        if (roots.empty()) return std::nullopt;
        u = nearest_to(roots, u_c_hint);
    }
    const Phasor wv = w(u);
    const double theta_v =
        std::abs(wv) < k_tiny_voltage ? theta_v_hint : wrap_angle(ang(e) - ang(wv));
    const CurrentRefs refs = lvrt_decoupled(u, theta_v, ctl);
    return finish(refs, u, theta_v);
}

// ---------------------------------------------------------------------------
// stage-aware network models

namespace {

enum class Stage { Pre, On, Post };

class StageModel {
public:
    virtual ~StageModel() = default;
    [[nodiscard]] virtual TheveninEquivalent equivalent(Stage st, double s_r) const = 0;
    [[nodiscard]] virtual const ImParams* motor() const = 0;
    /// Load-share-weighted air-gap torque for a given injection (system
    /// p.u., grid frame).
    [[nodiscard]] virtual double aggregate_torque(Stage st, double s_r,
                                                  const Phasor& i_net) const = 0;
};

class TwoBusModel final : public StageModel {
public:
    TwoBusModel(const TwoBusNetwork& net, const FaultSpec& fault) : net_(net), fault_(fault) {}

    [[nodiscard]] TheveninEquivalent equivalent(Stage st, double s_r) const override {
        const Phasor z_l = net_.load.impedance(s_r);
        if (st == Stage::On) return onfault_exact(net_, z_l, fault_);
        return thevenin_reduce(net_, z_l);
    }
    [[nodiscard]] const ImParams* motor() const override {
        return net_.load.has_motor() ? &*net_.load.im : nullptr;
    }
    [[nodiscard]] double aggregate_torque(Stage st, double s_r,
                                          const Phasor& i_net) const override {
        const ImParams* im = motor();
        if (im == nullptr) return 0.0;
        const Phasor z_l = net_.load.impedance(s_r);
        const FaultSpec* f = st == Stage::On ? &fault_ : nullptr;
        const Phasor u_m = grid_bus_voltage(net_, z_l, f, i_net);
        return im_torque(u_m, s_r, *im);
    }

private:
    TwoBusNetwork net_;
    FaultSpec fault_;
};

class YBusModel final : public StageModel {
public:
    explicit YBusModel(const YBusNetwork& net) : net_(&net) {
        double total = 0.0;
        for (const auto& l : net.loads()) {
            if (l.desc.has_motor()) total += l.desc.mix / std::abs(l.desc.z_imp);
        }
        for (const auto& l : net.loads()) {
            const double w =
                l.desc.has_motor() && total > 0.0
                    ? (l.desc.mix / std::abs(l.desc.z_imp)) / total
                    : 0.0;
            weights_.push_back(w);
        }
    }

    [[nodiscard]] TheveninEquivalent equivalent(Stage st, double s_r) const override {
        return net_->thevenin(s_r, st == Stage::On);
    }
    [[nodiscard]] const ImParams* motor() const override {
        for (const auto& l : net_->loads())
            if (l.desc.has_motor()) return &*l.desc.im;
        return nullptr;
    }
    [[nodiscard]] double aggregate_torque(Stage st, double s_r,
                                          const Phasor& i_net) const override {
        if (motor() == nullptr) return 0.0;
        const auto v = net_->solve(i_net, s_r, st == Stage::On);
        double torque = 0.0;
        const auto& loads = net_->loads();
        for (size_t i = 0; i < loads.size(); ++i) {
            if (weights_[i] <= 0.0) continue;
            torque += weights_[i] * im_torque(v[loads[i].bus], s_r, *loads[i].desc.im);
        }
        return torque;
    }

private:
    const YBusNetwork* net_;
    std::vector<double> weights_;
};

std::unique_ptr<StageModel> make_model(const Scenario& scn) {
    if (scn.is_two_bus()) return std::make_unique<TwoBusModel>(scn.two_bus(), scn.fault);
    return std::make_unique<YBusModel>(scn.ybus());
}

// ---------------------------------------------------------------------------
// ODE machinery

struct OdeState {
    double delta_c = 0.0;
    double x_i = 0.0;
    double s_r = 0.0;
    double u_dc = 1.0;
    Phasor i_lag{0.0, 0.0};
};

struct OdeDeriv {
    double d_delta = 0.0;
    double d_xi = 0.0;
    double d_sr = 0.0;
    double d_udc = 0.0;
    Phasor d_ilag{0.0, 0.0};
};

OdeState advance(const OdeState& y, double h, const OdeDeriv& d) {
    OdeState out = y;
    out.delta_c += h * d.d_delta;
    out.x_i += h * d.d_xi;
    out.s_r += h * d.d_sr;
    out.u_dc += h * d.d_udc;
    out.i_lag += h * d.d_ilag;
    return out;
}

OdeDeriv combine_rk4(const OdeDeriv& k1, const OdeDeriv& k2, const OdeDeriv& k3,
                     const OdeDeriv& k4) {
    OdeDeriv d;
    d.d_delta = (k1.d_delta + 2 * k2.d_delta + 2 * k3.d_delta + k4.d_delta) / 6.0;
    d.d_xi = (k1.d_xi + 2 * k2.d_xi + 2 * k3.d_xi + k4.d_xi) / 6.0;
    d.d_sr = (k1.d_sr + 2 * k2.d_sr + 2 * k3.d_sr + k4.d_sr) / 6.0;
    d.d_udc = (k1.d_udc + 2 * k2.d_udc + 2 * k3.d_udc + k4.d_udc) / 6.0;
    d.d_ilag = (k1.d_ilag + 2.0 * k2.d_ilag + 2.0 * k3.d_ilag + k4.d_ilag) / 6.0;
    return d;
}

struct EvalResult {
    OdeDeriv deriv;
    AlgebraicSolution sol;   // consistent snapshot at this state
    PowerPair power;         // converter p.u.
    CurrentRefs injected;    // actual dq current (equals refs when lag is off)
    bool ok = false;
};

class Stepper {
public:
    Stepper(const Scenario& scn, const SystemState& init)
        : scn_(scn),
          model_(make_model(scn)),
          k_(scn.bases.injection_scale()),
          ctl_(scn.control),
          state_{} {
        state_.delta_c = init.pll.delta_c;
        state_.x_i = init.pll.integrator;
        state_.s_r = init.s_r;
        state_.u_dc = init.u_dc;
        state_.i_lag = init.i_lag;
        t_m_ = init.t_m;
        p_in_ = init.p_in;
        delta_c0_ = init.pll.delta_c;
        hint_u_ = init.algebraic.u_c;
        hint_tv_ = init.algebraic.theta_v;
        use_lag_ = ctl_.tau_c > 0.0;
    }

    EvalResult eval(Stage stage, const OdeState& y) const {
        EvalResult r;
        const TheveninEquivalent equiv = model_->equivalent(stage, y.s_r);
        Phasor i_net;
        if (use_lag_) {
            i_net = k_ * y.i_lag;
            const Phasor u_glob = equiv.u_src + equiv.z_eq * i_net;
            const double u_c = std::abs(u_glob);
            const double theta_v =
                u_c < k_tiny_voltage ? 0.0 : wrap_angle(ang(u_glob) - y.delta_c);
            const CurrentRefs target = law_refs(law_, u_c, theta_v, ctl_);
            const Phasor rot = std::polar(1.0, y.delta_c);
            const Phasor i_target = target.as_complex() * rot;
            r.deriv.d_ilag = (i_target - y.i_lag) / ctl_.tau_c;
            const Phasor i_dq = y.i_lag * std::conj(rot);
            r.injected = {i_dq.real(), i_dq.imag()};
            r.sol.u_c = u_c;
            r.sol.theta_v = theta_v;
            r.sol.refs = target;
            r.sol.u_cq = u_c * std::sin(theta_v);
            r.sol.residual = 0.0;
            const Phasor s = u_glob * std::conj(rot) * std::conj(i_dq);
            r.power = {s.real(), s.imag()};
        } else {
            AlgebraicProblem prob{equiv, law_, ctl_, k_};
            const auto sol = solve_algebraic(y.delta_c, prob, hint_u_, hint_tv_);
            if (!sol.has_value()) return r;  // no solution: loss of synchronization
            r.sol = *sol;
            r.injected = sol->refs;
            i_net = k_ * sol->refs.as_complex() * std::polar(1.0, y.delta_c);
            r.power = power_actual(sol->refs, sol->u_c, sol->theta_v);
        }

        const PllDerivatives pd =
            pll_derivatives({y.delta_c, y.x_i}, r.sol.u_cq, scn_.pll);
        r.deriv.d_delta = pd.d_delta_c;
        r.deriv.d_xi = pd.d_integrator;

        const ImParams* im = model_->motor();
        if (im != nullptr) {
            const double t_e = model_->aggregate_torque(stage, y.s_r, i_net);
            double d_sr = im_slip_derivative(t_e, t_m_, *im);
            if (y.s_r >= 1.0 && d_sr > 0.0) d_sr = 0.0;  // stall clamp
            if (y.s_r <= k_min_slip && d_sr < 0.0) d_sr = 0.0;
            r.deriv.d_sr = d_sr;
        }
        r.deriv.d_udc = dc_link_derivative(y.u_dc, p_in_, r.power.p, ctl_.c_dc);
        r.ok = true;
        return r;
    }

    // discrete state (ride-through flag, effective law); returns true if changed
    bool update_discrete(double t, double u_c) {
        bool changed = false;
        if (!lvrt_active_ && u_c < ctl_.u_low) {
            lvrt_active_ = true;
            if (!ever_active_) {
                ever_active_ = true;
                t_entry_ = t;
            }
            changed = true;
        } else if (lvrt_active_ && u_c >= ctl_.u_low + ctl_.exit_hysteresis) {
            lvrt_active_ = false;
            changed = true;
        }
        const EffectiveLaw next =
            select_law(lvrt_active_, ever_active_ ? t - t_entry_ : 0.0, ctl_);
        if (next != law_) {
            law_ = next;
            changed = true;
        }
        return changed;
    }

    const Scenario& scn_;
    std::unique_ptr<StageModel> model_;
    double k_;
    ControlParams ctl_;
    OdeState state_;
    double t_m_ = 0.0;
    double p_in_ = 0.0;
    double delta_c0_ = 0.0;
    mutable double hint_u_ = 1.0;
    mutable double hint_tv_ = 0.0;
    bool use_lag_ = false;
    bool lvrt_active_ = false;
    bool ever_active_ = false;
    double t_entry_ = 0.0;
    EffectiveLaw law_ = EffectiveLaw::Inactive;
};

Sample make_sample(double t, const OdeState& y, const EvalResult& ev, const PllParams& pll,
                   bool lvrt_active, EffectiveLaw law) {
    Sample s;
    s.t = t;
    s.u_c = ev.sol.u_c;
    s.theta_v = ev.sol.theta_v;
    s.ang_u_c = wrap_angle(y.delta_c + ev.sol.theta_v);
    s.delta_c = y.delta_c;
    s.omega_c = pll.k_p * ev.sol.u_cq + y.x_i;
    s.i_cd = ev.injected.i_cd;
    s.i_cq = ev.injected.i_cq;
    s.p_c = ev.power.p;
    s.q_c = ev.power.q;
    s.s_r = y.s_r;
    s.u_dc = y.u_dc;
    s.lvrt_active = lvrt_active;
    s.law = law;
    return s;
}

}  // namespace

// ---------------------------------------------------------------------------

SystemState initialize(const Scenario& scn) {
    const auto model = make_model(scn);
    const double k = scn.bases.injection_scale();
    const CurrentRefs refs = steady_refs(scn.control);
    const ImParams* im = model->motor();

    // U_cq(delta) = Im(Z k I) + |U'| sin(arg U' - delta) = 0 has the closed
    // form delta = arg U' + asin(Im(Z k I) / |U'|) on the U_cd > 0 branch.
    const auto solve_delta = [&](double s_r) -> std::optional<double> {
        const TheveninEquivalent eq = model->equivalent(Stage::Pre, s_r);
        const Phasor zki = eq.z_eq * k * refs.as_complex();
        const double b = std::abs(eq.u_src);
        if (b < k_tiny_voltage) {
            return std::nullopt;
        }
        const double ratio = zki.imag() / b;
        if (std::abs(ratio) > 1.0) return std::nullopt;
        const double delta = ang(eq.u_src) + std::asin(ratio);
        const double u_cd = zki.real() + b * std::cos(ang(eq.u_src) - delta);
        if (u_cd <= 0.0) return std::nullopt;
        return wrap_angle(delta);
    };

    double s_ep = im != nullptr ? im->s_r0 : 0.0;
    std::optional<double> delta = solve_delta(s_ep);

    const bool solve_slip = im != nullptr && !std::isnan(im->t_m);
    if (solve_slip) {
        // torque balance g(s) = T_e(s, delta(s)) - T_m = 0, secant from
        // standard slip starts with a bisection fallback
        const auto g = [&](double s) -> std::optional<double> {
            const auto d = solve_delta(s);
            if (!d.has_value()) return std::nullopt;
            const Phasor i_net = k * refs.as_complex() * std::polar(1.0, *d);
            return model->aggregate_torque(Stage::Pre, s, i_net) - im->t_m;
        };
        const double starts[] = {im->s_r0, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5};
        bool found = false;
        for (double s0 : starts) {
            double a = s0;
            auto fa = g(a);
            if (!fa.has_value()) continue;
            double b_hi = std::min(1.0, s0 * 4.0 + 0.01);
            auto fb = g(b_hi);
            if (!fb.has_value() || (*fa <= 0.0) == (*fb <= 0.0)) continue;
            for (int i = 0; i < 100 && (b_hi - a) > 1e-12; ++i) {
                const double m = 0.5 * (a + b_hi);
                const auto fm = g(m);
                if (!fm.has_value()) break;
                if ((*fa <= 0.0) == (*fm <= 0.0)) {
                    a = m;
                    fa = fm;
                } else {
                    b_hi = m;
                }
            }
            s_ep = 0.5 * (a + b_hi);
            delta = solve_delta(s_ep);
            found = delta.has_value();
            if (found) break;
        }
        if (!found) throw NoPrefaultEp("no slip balances the mechanical torque");
    }

    if (!delta.has_value()) {
        throw NoPrefaultEp("no synchronized operating point for the steady references");
    }

    const TheveninEquivalent eq = model->equivalent(Stage::Pre, s_ep);
    AlgebraicProblem prob{eq, EffectiveLaw::Inactive, scn.control, k};
    const auto sol = solve_algebraic(*delta, prob, 1.0, 0.0);
    if (!sol.has_value() || std::abs(sol->u_cq) > 1e-9) {
        throw NoPrefaultEp("equilibrium verification failed");
    }
    if (sol->u_c < scn.control.u_low - 1e-9) {
        throw NoPrefaultEp("equilibrium sits below the ride-through threshold");
    }

    SystemState st;
    st.pll = {*delta, 0.0};
    st.s_r = s_ep;
    st.u_dc = 1.0;
    st.i_lag = refs.as_complex() * std::polar(1.0, *delta);
    st.algebraic = *sol;
    const Phasor i_net = k * st.i_lag;
    st.t_m = im != nullptr
                 ? (solve_slip ? im->t_m : model->aggregate_torque(Stage::Pre, s_ep, i_net))
                 : 0.0;
    st.p_in = power_actual(sol->refs, sol->u_c, sol->theta_v).p;
    return st;
}

TimeSeries simulate(const Scenario& scn) { return simulate(scn, initialize(scn)); }

TimeSeries simulate(const Scenario& scn, const SystemState& initial) {
    TimeSeries ts;
    Stepper stp(scn, initial);
    const double dt = scn.sim.dt;
    const double dt_out = scn.sim.dt_out;
    const double t_end = scn.sim.t_end;

    struct Segment {
        double t0, t1;
        Stage stage;
    };
    std::vector<Segment> segments;
    const double t_on = std::clamp(scn.fault.t_on, 0.0, t_end);
    const double t_clear = std::clamp(scn.fault.t_clear, t_on, t_end);
    if (t_clear > t_on) {
        if (t_on > 0.0) segments.push_back({0.0, t_on, Stage::Pre});
        segments.push_back({t_on, t_clear, Stage::On});
        if (t_end > t_clear) segments.push_back({t_clear, t_end, Stage::Post});
    } else {
        segments.push_back({0.0, t_end, Stage::Pre});  // zero-duration fault
    }

    double t = 0.0;
    const double eps = 1e-12;
    double next_sample = 0.0;

    EvalResult current = stp.eval(segments.front().stage, stp.state_);
    if (!current.ok) {
        ts.events.push_back({EventKind::LossOfSync, t});
        return ts;
    }
    stp.update_discrete(t, current.sol.u_c);
    current = stp.eval(segments.front().stage, stp.state_);

    const auto record = [&](double at) {
        ts.samples.push_back(
            make_sample(at, stp.state_, current, scn.pll, stp.lvrt_active_, stp.law_));
        ts.max_algebraic_residual =
            std::max(ts.max_algebraic_residual, current.sol.residual);
    };
    const auto refresh_hints = [&]() {
        stp.hint_u_ = current.sol.u_c;
        stp.hint_tv_ = current.sol.theta_v;
    };

    record(0.0);
    next_sample = dt_out;
    if (segments.front().stage == Stage::On) {
        ts.events.push_back({EventKind::FaultOn, 0.0});
    }

    bool terminal = false;
    for (size_t iseg = 0; iseg < segments.size() && !terminal; ++iseg) {
        const Segment seg = segments[iseg];
        const Stage stage = seg.stage;

        if (iseg > 0) {
            t = seg.t0;  // snap accumulated time to the event instant
            ts.events.push_back(
                {stage == Stage::On ? EventKind::FaultOn : EventKind::FaultClear, seg.t0});
            // network jump: re-solve and settle the discrete state
            for (int pass = 0; pass < 3; ++pass) {
                current = stp.eval(stage, stp.state_);
                if (!current.ok) break;
                refresh_hints();
                if (!stp.update_discrete(t, current.sol.u_c)) break;
            }
            if (!current.ok) {
                ts.events.push_back({EventKind::LossOfSync, t});
                break;
            }
            if (!ts.samples.empty() && std::abs(ts.samples.back().t - t) < eps) {
                ts.samples.pop_back();  // event sample supersedes the grid sample
            }
            record(t);
        }

        while (t < seg.t1 - eps) {
            double h = std::min(dt, seg.t1 - t);
            if (next_sample > t + eps) h = std::min(h, next_sample - t);

            const OdeState& y = stp.state_;
            const OdeDeriv k1 = current.deriv;
            OdeDeriv d;
            bool ok = true;
            if (scn.sim.integrator == Integrator::Rk4) {
                const EvalResult e2 = stp.eval(stage, advance(y, 0.5 * h, k1));
                const EvalResult e3 =
                    e2.ok ? stp.eval(stage, advance(y, 0.5 * h, e2.deriv)) : e2;
                const EvalResult e4 =
                    e3.ok ? stp.eval(stage, advance(y, h, e3.deriv)) : e3;
                ok = e2.ok && e3.ok && e4.ok;
                if (ok) d = combine_rk4(k1, e2.deriv, e3.deriv, e4.deriv);
            } else {
                const EvalResult e2 = stp.eval(stage, advance(y, h, k1));
                ok = e2.ok;
                if (ok) {
                    d.d_delta = 0.5 * (k1.d_delta + e2.deriv.d_delta);
                    d.d_xi = 0.5 * (k1.d_xi + e2.deriv.d_xi);
                    d.d_sr = 0.5 * (k1.d_sr + e2.deriv.d_sr);
                    d.d_udc = 0.5 * (k1.d_udc + e2.deriv.d_udc);
                    d.d_ilag = 0.5 * (k1.d_ilag + e2.deriv.d_ilag);
                }
            }
            if (!ok) {
                ts.events.push_back({EventKind::LossOfSync, t});
                terminal = true;
                break;
            }

            stp.state_ = advance(y, h, d);
            stp.state_.s_r = std::clamp(stp.state_.s_r, k_min_slip, 1.0);
            t += h;

            current = stp.eval(stage, stp.state_);
            if (!current.ok) {
                ts.events.push_back({EventKind::LossOfSync, t});
                terminal = true;
                break;
            }
            refresh_hints();
            if (stp.update_discrete(t, current.sol.u_c)) {
                current = stp.eval(stage, stp.state_);
                if (!current.ok) {
                    ts.events.push_back({EventKind::LossOfSync, t});
                    terminal = true;
                    break;
                }
                refresh_hints();
            }

            if (stp.state_.u_dc <= 1e-6) {
                ts.events.push_back({EventKind::DcCollapse, t});
                terminal = true;
            }
            if (std::abs(stp.state_.delta_c - stp.delta_c0_) > 2.0 * pi) {
                ts.events.push_back({EventKind::LossOfSync, t});
                terminal = true;
            }

            if (t >= next_sample - eps) {
                record(t);
                while (next_sample <= t + eps) next_sample += dt_out;
            } else if (terminal) {
                record(t);
            }
            if (terminal) break;
        }
    }

    if (!terminal && (ts.samples.empty() || ts.samples.back().t < t - eps)) {
        record(t);
    }
    return ts;
}

// ---------------------------------------------------------------------------

double RecoveryCriterion::bound_at(double t_after_clear) const {
    if (envelope.empty()) return 0.0;
    if (t_after_clear <= envelope.front().first) return envelope.front().second;
    for (size_t i = 1; i < envelope.size(); ++i) {
        const auto& [t1, u1] = envelope[i - 1];
        const auto& [t2, u2] = envelope[i];
        if (t_after_clear <= t2) {
            const double w = (t_after_clear - t1) / (t2 - t1);
            return u1 + w * (u2 - u1);
        }
    }
    return envelope.back().second;
}

bool RecoveryCriterion::satisfied(const TimeSeries& ts, double t_clear) const {
    if (ts.has_event(EventKind::LossOfSync) || ts.has_event(EventKind::DcCollapse)) {
        return false;
    }
    if (ts.samples.empty() || ts.samples.back().t < t_clear + horizon - 1e-9) {
        return false;
    }
    for (const auto& s : ts.samples) {
        const double dt_after = s.t - t_clear;
        if (dt_after < 0.0 || dt_after > horizon) continue;
        if (s.u_c < bound_at(dt_after) - 1e-12) return false;
    }
    return true;
}

CctResult cct_search(const Scenario& scn, const RecoveryCriterion& criterion, double lo,
                     double hi, double resolution) {
    Scenario trial = scn;
    const SystemState init = initialize(scn);

    const auto passes = [&](double duration) {
        trial.fault.t_clear = trial.fault.t_on + duration;
        trial.sim.t_end =
            std::max(scn.sim.t_end, trial.fault.t_clear + criterion.horizon + 0.1);
        const TimeSeries ts = simulate(trial, init);
        return criterion.satisfied(ts, trial.fault.t_clear);
    };

    if (!passes(lo)) {
        throw BracketFailure("recovery criterion already violated at the lower bracket");
    }
    if (passes(hi)) {
        return {hi, true};
    }
    while (hi - lo > resolution) {
        const double mid = 0.5 * (lo + hi);
        if (passes(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return {lo, false};
}

}  // namespace gfl
