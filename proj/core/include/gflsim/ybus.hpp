#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "gflsim/loads.hpp"
#include "gflsim/network.hpp"
#include "gflsim/phasor.hpp"

namespace gfl {

/// General admittance-matrix network with ideal sources behind series
/// impedances, composite loads, and one current-injection bus. The base
/// matrix holds branch and shunt terms only; sources, loads, and the
/// fault shunt are folded in at solve time.
class YBusNetwork {
public:
    struct Source {
        int bus = 0;
        Phasor e{1.0, 0.0};
        Phasor z{0.0, 0.1};
    };
    struct Load {
        int bus = 0;
        LoadDescriptor desc;
    };

    explicit YBusNetwork(int bus_count);

    void add_branch(int from, int to, const Phasor& z_series, double b_charging = 0.0);
    void add_shunt(int bus, const Phasor& y);
    void add_source(int bus, const Phasor& e, const Phasor& z);
    void add_load(int bus, LoadDescriptor desc);
    void set_injection_bus(int bus) { injection_bus_ = bus; }
    void set_fault_shunt(int bus, const Phasor& z_f) { fault_shunt_ = {bus, z_f}; }

    [[nodiscard]] int bus_count() const { return n_; }
    [[nodiscard]] int injection_bus() const { return injection_bus_; }
    [[nodiscard]] const std::vector<Source>& sources() const { return sources_; }
    [[nodiscard]] const std::vector<Load>& loads() const { return loads_; }
    [[nodiscard]] const std::optional<std::pair<int, Phasor>>& fault_shunt() const {
        return fault_shunt_;
    }
    [[nodiscard]] const Phasor& y(int i, int j) const { return y_[static_cast<size_t>(i) * n_ + j]; }

    /// Bus voltages with `injection` amps (p.u., system base) injected at the
    /// injection bus. Loads evaluated at motor slip s_r; with_fault adds the
    /// fault shunt. Throws SingularNetwork if the factorization fails.
    [[nodiscard]] std::vector<Phasor> solve(const Phasor& injection, double s_r = 0.0,
                                            bool with_fault = false) const;

    /// Thevenin pair seen from the injection bus (open-circuit voltage and
    /// driving-point impedance with sources killed).
    [[nodiscard]] TheveninEquivalent thevenin(double s_r = 0.0, bool with_fault = false) const;

private:
    int n_;
    std::vector<Phasor> y_;
    std::vector<Source> sources_;
    std::vector<Load> loads_;
    int injection_bus_ = 0;
    std::optional<std::pair<int, Phasor>> fault_shunt_;

    Phasor& at(int i, int j) { return y_[static_cast<size_t>(i) * n_ + j]; }
};

/// Free-function form used by the tests and the analysis layer.
[[nodiscard]] std::vector<Phasor> solve_ybus(const YBusNetwork& net, const Phasor& injection,
                                             double s_r = 0.0, bool with_fault = false);

}  // namespace gfl
