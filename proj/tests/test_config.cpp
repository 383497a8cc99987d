#include <doctest.h>

#include "gflsim/cases.hpp"
#include "gflsim/config.hpp"
#include "gflsim/errors.hpp"

using namespace gfl;

TEST_CASE("impedance strings") {
    Bases b;  // 230 kV / 100 MVA
    CHECK(std::abs(parse_impedance("j0.2", b, "x") - Phasor{0.0, 0.2}) < 1e-15);
    CHECK(std::abs(parse_impedance("-j0.2", b, "x") - Phasor{0.0, -0.2}) < 1e-15);
    CHECK(std::abs(parse_impedance("0.495+j0.0495", b, "x") - Phasor{0.495, 0.0495}) < 1e-15);
    CHECK(std::abs(parse_impedance("0.03-j0.3", b, "x") - Phasor{0.03, -0.3}) < 1e-15);
    CHECK(std::abs(parse_impedance("0.5", b, "x") - Phasor{0.5, 0.0}) < 1e-15);
    CHECK(std::abs(parse_impedance("0.3j", b, "x") - Phasor{0.0, 0.3}) < 1e-15);

    SUBCASE("ohm suffix converts through the base impedance") {
        // Z_base = 230^2 / 100 = 529 ohm
        const Phasor ten = parse_impedance("10ohm", b, "x");
        CHECK(ten.real() == doctest::Approx(0.0189036).epsilon(1e-5));
        const Phasor one = parse_impedance("1 ohm", b, "x");
        CHECK(one.real() == doctest::Approx(0.00189036).epsilon(1e-5));
        const Phasor cplx = parse_impedance("5+j10 ohm", b, "x");
        CHECK(cplx.real() == doctest::Approx(5.0 / 529.0).epsilon(1e-12));
        CHECK(cplx.imag() == doctest::Approx(10.0 / 529.0).epsilon(1e-12));
    }
    SUBCASE("malformed strings raise a config error naming the field") {
        CHECK_THROWS_WITH_AS((void)parse_impedance("abc", b, "fault.Z_f"),
                             doctest::Contains("fault.Z_f"), ConfigError);
        CHECK_THROWS_AS((void)parse_impedance("1+2", b, "x"), ConfigError);
        CHECK_THROWS_AS((void)parse_impedance("j1+j2", b, "x"), ConfigError);
        CHECK_THROWS_AS((void)parse_impedance("", b, "x"), ConfigError);
    }
}

TEST_CASE("every built-in case round-trips through its config document") {
    for (const auto& name : builtin_case_names()) {
        const Scenario scn = builtin_case(name);
        const std::string text1 = scenario_to_text(scn);
        const Scenario reparsed = parse_scenario_text(text1);
        const std::string text2 = scenario_to_text(reparsed);
        CHECK(text1 == text2);
        CHECK(reparsed.name == scn.name);
        CHECK(reparsed.is_two_bus() == scn.is_two_bus());
    }
}

TEST_CASE("overrides rewrite any config field") {
    const Scenario base = builtin_case("case3");
    const std::string text = scenario_to_text(base);
    const Scenario scn =
        parse_scenario_text(text, {"--converter.K_q=3.5", "converter.mode=decoupled",
                                   "sim.dt=5e-5", "name=swept"});
    CHECK(scn.control.k_q == doctest::Approx(3.5));
    CHECK(scn.control.mode == ControlMode::Decoupled);
    CHECK(scn.sim.dt == doctest::Approx(5e-5));
    CHECK(scn.name == "swept");
}

TEST_CASE("validation failures carry the field name") {
    const std::string text = scenario_to_text(builtin_case("case2_like"));
    CHECK_THROWS_WITH_AS((void)parse_scenario_text(text, {"sim.dt=0.01"}),
                         doctest::Contains("sim.dt"), ConfigError);
    CHECK_THROWS_WITH_AS((void)parse_scenario_text(text, {"converter.mode=omnidirectional"}),
                         doctest::Contains("converter.mode"), ConfigError);
    CHECK_THROWS_WITH_AS((void)parse_scenario_text(text, {"fault.Z_f=banana"}),
                         doctest::Contains("fault.Z_f"), ConfigError);
    CHECK_THROWS_WITH_AS((void)parse_scenario_text(text, {"converter.U_low=1.7"}),
                         doctest::Contains("converter.U_low"), ConfigError);
    CHECK_THROWS_AS((void)parse_scenario_text("not json at all"), ConfigError);
}

TEST_CASE("nine-bus cases build and expose the fault shunt") {
    const Scenario scn = builtin_case("case4");
    REQUIRE(!scn.is_two_bus());
    const YBusNetwork& net = scn.ybus();
    CHECK(net.bus_count() == 9);
    CHECK(net.injection_bus() == 1);
    REQUIRE(net.fault_shunt().has_value());
    CHECK(net.fault_shunt()->first == 6);
    CHECK(net.loads().size() == 3);
    for (const auto& l : net.loads()) {
        CHECK(l.desc.mix == doctest::Approx(0.5));
        CHECK(l.desc.has_motor());
    }
    const Scenario five = builtin_case("case5");
    for (const auto& l : five.ybus().loads()) CHECK_FALSE(l.desc.has_motor());
}
