#pragma once

#include <optional>

#include "gflsim/loads.hpp"
#include "gflsim/phasor.hpp"

namespace gfl {

/// Thevenin pair seen from the converter terminal: one source behind one
/// impedance. The source phasor carries the equivalent angle delta_g.
struct TheveninEquivalent {
    Phasor u_src{1.0, 0.0};
    Phasor z_eq{0.0, 0.1};
};

/// Where the fault attaches.
///  - Line: fault point inserted between the grid bus and the source, at
///    electrical distance z_cf from the bus; z_f to ground. Covers nearby
///    and remote faults, and the bolted grid-bus fault at z_cf = 0.
///  - Terminal: shunt z_cf + z_f at the converter terminal itself (the
///    fault that collapses U_c toward zero).
enum class FaultLocation { Line, Terminal };

struct FaultSpec {
    Phasor z_cf{0.0, 0.0};
    Phasor z_f{0.0, 0.0};
    double t_on = 0.1;
    double t_clear = 0.2;
    FaultLocation location = FaultLocation::Line;
};

/// Source U_g /_ 0 behind Z_g, load at the grid bus, converter behind Z_c:
///
///   converter --Z_c-- bus { Z_l } --Z_g-- U_g
///
/// U_c is the converter-terminal voltage.
struct TwoBusNetwork {
    double u_g = 1.0;
    Phasor z_g{0.0, 0.2};
    Phasor z_c{0.0, 0.2};
    LoadDescriptor load;
    std::optional<FaultSpec> fault;
};

/// Pre/post-fault reduction: U'_g = U_g Z_l/(Z_g+Z_l),
/// Z_eq = Z_g Z_l/(Z_g+Z_l) + Z_c. Throws DegenerateNetwork when
/// |Z_g + Z_l| vanishes. An open-circuit load (|Z_l| huge) removes the
/// load branch.
[[nodiscard]] TheveninEquivalent thevenin_reduce(const TwoBusNetwork& net, const Phasor& z_l);

/// The bypass approximation of the on-fault circuit: source side dead,
/// series path from the converter through the fault:
/// U'_g = 0, Z_eq = Z_c + Z_cf + Z_f (terminal faults: Z_eq = Z_cf + Z_f).
[[nodiscard]] TheveninEquivalent onfault_overlay(const TwoBusNetwork& net, const FaultSpec& fault);

/// Exact mesh reduction of the on-fault circuit (used by the simulator).
[[nodiscard]] TheveninEquivalent onfault_exact(const TwoBusNetwork& net, const Phasor& z_l,
                                               const FaultSpec& fault);

/// Voltage at the grid (load) bus for a given converter injection, exact
/// per stage; pass fault = nullptr for the healthy network. Feeds the
/// motor torque computation.
[[nodiscard]] Phasor grid_bus_voltage(const TwoBusNetwork& net, const Phasor& z_l,
                                      const FaultSpec* fault, const Phasor& i_net);

}  // namespace gfl
