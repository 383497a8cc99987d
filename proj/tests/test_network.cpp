#include <doctest.h>

#include <random>

#include "gflsim/errors.hpp"
#include "gflsim/network.hpp"
#include "gflsim/ybus.hpp"

using namespace gfl;

namespace {

TwoBusNetwork study_network() {
    TwoBusNetwork net;
    net.u_g = 1.1;
    net.z_g = {0.0, 0.2};
    net.z_c = {0.0, 0.2};
    net.load.z_imp = {0.495, 0.0495};
    return net;
}

}  // namespace

TEST_CASE("phasor arithmetic round-trips within 1e-12") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    for (int i = 0; i < 200; ++i) {
        const Phasor a{dist(rng), dist(rng)};
        const Phasor b{dist(rng), dist(rng)};
        if (std::abs(b) < 1e-3) continue;
        CHECK(std::abs((a + b) - b - a) < 1e-12);
        CHECK(std::abs(a * b / b - a) < 1e-12);
        CHECK(std::abs(std::conj(std::conj(a)) - a) == 0.0);
        CHECK(std::abs(from_polar(mag(a), ang(a)) - a) < 1e-12);
        CHECK(ang(a) <= pi);
        CHECK(ang(a) > -pi);
    }
}

TEST_CASE("thevenin reduction matches the study-system reference values") {
    const TwoBusNetwork net = study_network();
    const TheveninEquivalent eq = thevenin_reduce(net, net.load.z_imp);
    CHECK(std::abs(eq.u_src.real() - 0.9214) <= 1e-3);
    CHECK(std::abs(eq.u_src.imag() - (-0.3544)) <= 1e-3);
    CHECK(std::abs(eq.z_eq.real() - 0.0644) <= 1e-3);
    CHECK(std::abs(eq.z_eq.imag() - 0.3675) <= 1e-3);
}

TEST_CASE("thevenin reduction limit cases") {
    TwoBusNetwork net = study_network();

    SUBCASE("zero grid impedance pins the source") {
        net.z_g = {0.0, 0.0};
        const TheveninEquivalent eq = thevenin_reduce(net, net.load.z_imp);
        CHECK(std::abs(eq.u_src - Phasor{1.1, 0.0}) < 1e-12);
        CHECK(std::abs(eq.z_eq - net.z_c) < 1e-12);
    }
    SUBCASE("open-circuit load removes the branch") {
        const TheveninEquivalent eq = thevenin_reduce(net, {1e15, 0.0});
        CHECK(std::abs(eq.u_src - Phasor{1.1, 0.0}) < 1e-12);
        CHECK(std::abs(eq.z_eq - (net.z_g + net.z_c)) < 1e-12);
    }
    SUBCASE("degenerate series loop throws") {
        CHECK_THROWS_AS((void)thevenin_reduce(net, -net.z_g), DegenerateNetwork);
    }
}

TEST_CASE("thevenin reduction commutes with impedance scaling") {
    const TwoBusNetwork base = study_network();
    const TheveninEquivalent ref = thevenin_reduce(base, base.load.z_imp);
    for (double k : {0.5, 2.0, 7.3}) {
        TwoBusNetwork net = base;
        net.z_g *= k;
        net.z_c *= k;
        const Phasor z_l = base.load.z_imp * k;
        const TheveninEquivalent eq = thevenin_reduce(net, z_l);
        CHECK(std::abs(eq.u_src - ref.u_src) < 1e-12);
        CHECK(std::abs(eq.z_eq - ref.z_eq * k) < 1e-12);
    }
}

TEST_CASE("on-fault bypass overlay is the series path behind a dead source") {
    const TwoBusNetwork net = study_network();

    FaultSpec f;
    f.z_cf = {0.0, 0.0};
    f.z_f = {0.0, 0.0};
    TheveninEquivalent eq = onfault_overlay(net, f);
    CHECK(std::abs(eq.u_src) == 0.0);
    CHECK(std::abs(eq.z_eq - net.z_c) < 1e-12);

    f.z_cf = {0.0, 0.3};
    eq = onfault_overlay(net, f);
    CHECK(std::abs(eq.z_eq - (net.z_c + Phasor{0.0, 0.3})) < 1e-12);

    f.location = FaultLocation::Terminal;
    f.z_cf = {0.0, 0.0};
    f.z_f = {0.001, 0.0};
    eq = onfault_overlay(net, f);
    CHECK(std::abs(eq.z_eq - Phasor{0.001, 0.0}) < 1e-12);
}

TEST_CASE("exact on-fault mesh stays within 5% of the bypass for small fault impedance") {
    // light load so the shunt it adds between converter and fault is weak
    TwoBusNetwork net = study_network();
    net.load.z_imp = {4.95, 0.495};
    FaultSpec f;
    f.z_cf = {0.03, 0.3};
    f.z_f = {0.00189, 0.0};  // one ohm on the 230 kV / 100 MVA base

    const TheveninEquivalent exact = onfault_exact(net, net.load.z_imp, f);
    const TheveninEquivalent byp = onfault_overlay(net, f);
    CHECK(std::abs(exact.z_eq - byp.z_eq) / std::abs(byp.z_eq) < 0.05);
    CHECK(std::abs(exact.u_src) < 0.05);

    // a bolted grid-bus fault reduces to the bypass exactly
    f.z_cf = {0.0, 0.0};
    f.z_f = {0.0, 0.0};
    const TheveninEquivalent bolted = onfault_exact(net, net.load.z_imp, f);
    CHECK(std::abs(bolted.u_src) == 0.0);
    CHECK(std::abs(bolted.z_eq - net.z_c) < 1e-12);
}

namespace {

YBusNetwork two_bus_as_ybus(const TwoBusNetwork& net) {
    YBusNetwork y(2);
    y.add_branch(0, 1, net.z_c);
    y.add_source(1, {net.u_g, 0.0}, net.z_g);
    y.add_load(1, net.load);
    y.set_injection_bus(0);
    return y;
}

}  // namespace

TEST_CASE("admittance solve agrees with the closed-form reduction to 1e-10") {
    const TwoBusNetwork net = study_network();
    const YBusNetwork y = two_bus_as_ybus(net);
    const TheveninEquivalent closed = thevenin_reduce(net, net.load.z_imp);

    const TheveninEquivalent reduced = y.thevenin();
    CHECK(std::abs(reduced.u_src - closed.u_src) < 1e-10);
    CHECK(std::abs(reduced.z_eq - closed.z_eq) < 1e-10);

    std::mt19937 rng(11);
    std::uniform_real_distribution<double> dist(-1.5, 1.5);
    for (int i = 0; i < 20; ++i) {
        const Phasor inj{dist(rng), dist(rng)};
        const auto v = solve_ybus(y, inj);
        const Phasor expected = closed.u_src + closed.z_eq * inj;
        CHECK(std::abs(v[0] - expected) < 1e-10);
    }
}

TEST_CASE("admittance solve superposition and zero-injection baseline") {
    const YBusNetwork y = two_bus_as_ybus(study_network());
    const auto v0 = solve_ybus(y, {0.0, 0.0});

    // zero injection equals the source-only network solution
    const TheveninEquivalent closed = thevenin_reduce(study_network(), {0.495, 0.0495});
    CHECK(std::abs(v0[0] - closed.u_src) < 1e-10);

    std::mt19937 rng(13);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        const Phasor i1{dist(rng), dist(rng)};
        const Phasor i2{dist(rng), dist(rng)};
        const auto va = solve_ybus(y, i1);
        const auto vb = solve_ybus(y, i2);
        const auto vab = solve_ybus(y, i1 + i2);
        for (int b = 0; b < 2; ++b) {
            CHECK(std::abs(vab[b] - (va[b] + vb[b] - v0[b])) < 1e-10);
        }
    }
}

TEST_CASE("grid bus voltage is consistent with the reduced equivalent") {
    const TwoBusNetwork net = study_network();
    const Phasor inj{0.8, -0.4};
    const TheveninEquivalent eq = thevenin_reduce(net, net.load.z_imp);
    const Phasor u_c = eq.u_src + eq.z_eq * inj;
    const Phasor u_m = grid_bus_voltage(net, net.load.z_imp, nullptr, inj);
    CHECK(std::abs((u_c - u_m) - net.z_c * inj) < 1e-12);
}
