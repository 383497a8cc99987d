#include "gflsim/ybus.hpp"

#include <Eigen/Dense>

#include "gflsim/errors.hpp"

namespace gfl {

YBusNetwork::YBusNetwork(int bus_count)
    : n_(bus_count), y_(static_cast<size_t>(bus_count) * bus_count, Phasor{0.0, 0.0}) {}

void YBusNetwork::add_branch(int from, int to, const Phasor& z_series, double b_charging) {
    const Phasor y_series = Phasor{1.0, 0.0} / z_series;
    at(from, from) += y_series + Phasor{0.0, b_charging / 2.0};
    at(to, to) += y_series + Phasor{0.0, b_charging / 2.0};
    at(from, to) -= y_series;
    at(to, from) -= y_series;
}

void YBusNetwork::add_shunt(int bus, const Phasor& y) { at(bus, bus) += y; }

void YBusNetwork::add_source(int bus, const Phasor& e, const Phasor& z) {
    sources_.push_back({bus, e, z});
}

void YBusNetwork::add_load(int bus, LoadDescriptor desc) {
    loads_.push_back({bus, std::move(desc)});
}

namespace {

using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

struct Assembled {
    ComplexMatrix y;
    ComplexVector i_sources;
};

Assembled assemble(const YBusNetwork& net, double s_r, bool with_fault,
                   const std::optional<std::pair<int, Phasor>>& fault_shunt) {
    const int n = net.bus_count();
    Assembled a{ComplexMatrix::Zero(n, n), ComplexVector::Zero(n)};
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a.y(i, j) = net.y(i, j);
    for (const auto& s : net.sources()) {
        const Phasor y_src = Phasor{1.0, 0.0} / s.z;
        a.y(s.bus, s.bus) += y_src;         // Norton conversion
        a.i_sources(s.bus) += s.e * y_src;
    }
    for (const auto& l : net.loads()) {
        const Phasor z = l.desc.impedance(s_r);
        a.y(l.bus, l.bus) += Phasor{1.0, 0.0} / z;
    }
    if (with_fault && fault_shunt.has_value()) {
        const auto& [bus, z_f] = *fault_shunt;
        constexpr double bolted = 1e-9;
        const Phasor z = std::abs(z_f) < bolted ? Phasor{bolted, 0.0} : z_f;
        a.y(bus, bus) += Phasor{1.0, 0.0} / z;
    }
    return a;
}

ComplexVector lu_solve(const ComplexMatrix& y, const ComplexVector& rhs) {
    Eigen::PartialPivLU<ComplexMatrix> lu(y);
    const ComplexVector v = lu.solve(rhs);
    const double residual = (y * v - rhs).cwiseAbs().maxCoeff();
    if (!std::isfinite(residual) || residual > 1e-8 * (1.0 + rhs.cwiseAbs().maxCoeff())) {
        throw SingularNetwork("admittance matrix factorization failed");
    }
    return v;
}

}  // namespace

std::vector<Phasor> YBusNetwork::solve(const Phasor& injection, double s_r,
                                       bool with_fault) const {
    Assembled a = assemble(*this, s_r, with_fault, fault_shunt_);
    ComplexVector rhs = a.i_sources;
    rhs(injection_bus_) += injection;
    const ComplexVector v = lu_solve(a.y, rhs);
    return {v.data(), v.data() + v.size()};
}

TheveninEquivalent YBusNetwork::thevenin(double s_r, bool with_fault) const {
    Assembled a = assemble(*this, s_r, with_fault, fault_shunt_);
    Eigen::PartialPivLU<ComplexMatrix> lu(a.y);

    const ComplexVector v_open = lu.solve(a.i_sources);
    ComplexVector unit = ComplexVector::Zero(n_);
    unit(injection_bus_) = Phasor{1.0, 0.0};
    const ComplexVector v_unit = lu.solve(unit);

    const double res = (a.y * v_open - a.i_sources).cwiseAbs().maxCoeff();
    if (!std::isfinite(res) || res > 1e-8) {
        throw SingularNetwork("admittance matrix factorization failed");
    }
    return {v_open(injection_bus_), v_unit(injection_bus_)};
}

std::vector<Phasor> solve_ybus(const YBusNetwork& net, const Phasor& injection, double s_r,
                               bool with_fault) {
    return net.solve(injection, s_r, with_fault);
}

}  // namespace gfl
