#include "gflsim/network.hpp"

#include <cmath>

#include "gflsim/errors.hpp"

namespace gfl {

namespace {

constexpr double k_short = 1e-12;

Phasor admittance(const Phasor& z) {
    if (std::abs(z) < k_short) return {0.0, 0.0};  // callers special-case shorts
    return Phasor{1.0, 0.0} / z;
}

bool is_short(const Phasor& z) { return std::abs(z) < k_short; }

struct NodeSolve {
    Phasor u_c;
    Phasor u_m;
};

// Exact node voltages of the two-bus chain for a given converter
// injection (system p.u., grid frame). Stage networks:
//   healthy:        C --Z_c-- M { Z_l } --Z_g-- U_g
//   line fault:     C --Z_c-- M { Z_l } --Z_cf-- F { Z_f } --Z_g-- U_g
//   terminal fault: C { Z_cf+Z_f } --Z_c-- M { Z_l } --Z_g-- U_g
NodeSolve solve_nodes(const TwoBusNetwork& net, const Phasor& z_l,
                      const FaultSpec* fault, const Phasor& i_net) {
    const Phasor u_g{net.u_g, 0.0};
    const Phasor y_l = admittance(z_l);

    if (fault != nullptr && fault->location == FaultLocation::Terminal) {
        const Phasor z_sh = fault->z_cf + fault->z_f;
        if (is_short(z_sh)) {
            // converter terminal bolted to ground
            Phasor u_m;
            if (is_short(net.z_g)) {
                u_m = u_g;
            } else if (is_short(net.z_c)) {
                u_m = {0.0, 0.0};
            } else {
                const Phasor y_c = admittance(net.z_c);
                const Phasor y_g = admittance(net.z_g);
                u_m = u_g * y_g / (y_c + y_g + y_l);
            }
            return {{0.0, 0.0}, u_m};
        }
        const Phasor y_sh = admittance(z_sh);
        if (is_short(net.z_c)) {
            // C and M coincide
            Phasor u;
            if (is_short(net.z_g)) {
                u = u_g;
            } else {
                const Phasor y_g = admittance(net.z_g);
                u = (i_net + u_g * y_g) / (y_sh + y_l + y_g);
            }
            return {u, u};
        }
        const Phasor y_c = admittance(net.z_c);
        if (is_short(net.z_g)) {
            // M pinned at the source voltage
            const Phasor u_c = (i_net + u_g * y_c) / (y_sh + y_c);
            return {u_c, u_g};
        }
        const Phasor y_g = admittance(net.z_g);
        // [ y_sh + y_c   -y_c        ] [U_C]   [ i_net     ]
        // [ -y_c          y_c+y_g+y_l] [U_M] = [ U_g * y_g ]
        const Phasor a = y_sh + y_c;
        const Phasor b = -y_c;
        const Phasor c = -y_c;
        const Phasor d = y_c + y_g + y_l;
        const Phasor det = a * d - b * c;
        const Phasor u_c = (i_net * d - b * u_g * y_g) / det;
        const Phasor u_m = (a * u_g * y_g - c * i_net) / det;
        return {u_c, u_m};
    }

    if (fault != nullptr) {
        // line fault between M and the source
        if (is_short(fault->z_f)) {
            // fault node grounded: source side fully intercepted
            Phasor u_m;
            if (is_short(fault->z_cf)) {
                u_m = {0.0, 0.0};
            } else {
                const Phasor y_cf = admittance(fault->z_cf);
                u_m = i_net / (y_l + y_cf);
            }
            return {u_m + net.z_c * i_net, u_m};
        }
        const Phasor y_f = admittance(fault->z_f);
        const Phasor y_g = is_short(net.z_g) ? Phasor{0.0, 0.0} : admittance(net.z_g);
        const Phasor src_inj = is_short(net.z_g) ? Phasor{0.0, 0.0} : u_g * y_g;
        if (is_short(fault->z_cf)) {
            // fault node is M itself
            Phasor u_m;
            if (is_short(net.z_g)) {
                // ideal source shorted through z_f at M: source branch wins
                u_m = u_g;
            } else {
                u_m = (i_net + src_inj) / (y_l + y_f + y_g);
            }
            return {u_m + net.z_c * i_net, u_m};
        }
        const Phasor y_cf = admittance(fault->z_cf);
        if (is_short(net.z_g)) {
            // F pinned at the source voltage
            const Phasor u_m = (i_net + u_g * y_cf) / (y_l + y_cf);
            return {u_m + net.z_c * i_net, u_m};
        }
        // [ y_l + y_cf   -y_cf          ] [U_M]   [ i_net     ]
        // [ -y_cf         y_cf+y_f+y_g ] [U_F] = [ U_g * y_g ]
        const Phasor a = y_l + y_cf;
        const Phasor b = -y_cf;
        const Phasor c = -y_cf;
        const Phasor d = y_cf + y_f + y_g;
        const Phasor det = a * d - b * c;
        const Phasor u_m = (i_net * d - b * src_inj) / det;
        return {u_m + net.z_c * i_net, u_m};
    }

    // healthy network
    if (is_short(net.z_g)) {
        return {u_g + net.z_c * i_net, u_g};
    }
    const Phasor y_g = admittance(net.z_g);
    const Phasor u_m = (i_net + u_g * y_g) / (y_g + y_l);
    return {u_m + net.z_c * i_net, u_m};
}

}  // namespace

TheveninEquivalent thevenin_reduce(const TwoBusNetwork& net, const Phasor& z_l) {
    constexpr double open_circuit = 1e12;
    if (std::abs(z_l) >= open_circuit || !std::isfinite(std::abs(z_l))) {
        // load removed
        return {Phasor{net.u_g, 0.0}, net.z_g + net.z_c};
    }
    if (is_short(net.z_g)) {
        return {Phasor{net.u_g, 0.0}, net.z_c};
    }
    const Phasor denom = net.z_g + z_l;
    if (std::abs(denom) < 1e-12) {
        throw DegenerateNetwork("Z_g + Z_l vanishes in Thevenin reduction");
    }
    TheveninEquivalent eq;
    eq.u_src = Phasor{net.u_g, 0.0} * z_l / denom;
    eq.z_eq = net.z_g * z_l / denom + net.z_c;
    return eq;
}

TheveninEquivalent onfault_overlay(const TwoBusNetwork& net, const FaultSpec& fault) {
    TheveninEquivalent eq;
    eq.u_src = {0.0, 0.0};
    if (fault.location == FaultLocation::Terminal) {
        eq.z_eq = fault.z_cf + fault.z_f;
    } else {
        eq.z_eq = net.z_c + fault.z_cf + fault.z_f;
    }
    return eq;
}

TheveninEquivalent onfault_exact(const TwoBusNetwork& net, const Phasor& z_l,
                                 const FaultSpec& fault) {
    const NodeSolve open = solve_nodes(net, z_l, &fault, {0.0, 0.0});
    const NodeSolve unit = solve_nodes(net, z_l, &fault, {1.0, 0.0});
    return {open.u_c, unit.u_c - open.u_c};
}

Phasor grid_bus_voltage(const TwoBusNetwork& net, const Phasor& z_l, const FaultSpec* fault,
                        const Phasor& i_net) {
    return solve_nodes(net, z_l, fault, i_net).u_m;
}

}  // namespace gfl
