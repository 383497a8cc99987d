#include "gflsim/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gflsim/csv.hpp"
#include "gflsim/errors.hpp"

namespace gfl {

using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
    size_t a = 0;
    size_t b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a])) != 0) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1])) != 0) --b;
    return s.substr(a, b - a);
}

bool consume_number(const char*& p, double& out) {
    char* end = nullptr;
    const double v = std::strtod(p, &end);
    if (end == p) return false;
    p = end;
    out = v;
    return true;
}

}  // namespace

Phasor parse_impedance(const std::string& text, const Bases& bases, const std::string& field) {
    std::string s = trim(text);
    bool ohm = false;
    const auto lower = [](std::string v) {
        for (auto& c : v) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return v;
    };
    std::string ls = lower(s);
    if (ls.size() >= 3 && ls.compare(ls.size() - 3, 3, "ohm") == 0) {
        ohm = true;
        s = trim(s.substr(0, s.size() - 3));
    } else if (s.size() >= 2 && s.compare(s.size() - 2, 2, "Ω") == 0) {  // Ω
        ohm = true;
        s = trim(s.substr(0, s.size() - 2));
    }
    if (s.empty()) throw ConfigError(field, "empty impedance '" + text + "'");

    double re = 0.0;
    double im = 0.0;
    const char* p = s.c_str();
    bool any = false;
    bool seen_re = false;
    bool seen_im = false;
    while (*p != '\0') {
        while (std::isspace(static_cast<unsigned char>(*p)) != 0) ++p;
        if (*p == '\0') break;
        double sign = 1.0;
        if (*p == '+' || *p == '-') {
            sign = *p == '-' ? -1.0 : 1.0;
            ++p;
            while (std::isspace(static_cast<unsigned char>(*p)) != 0) ++p;
        }
        if (*p == 'j' || *p == 'J') {
            ++p;
            double v = 1.0;
            if (*p != '\0' && *p != '+' && *p != '-') {
                if (!consume_number(p, v)) throw ConfigError(field, "malformed impedance '" + text + "'");
            }
            if (seen_im) throw ConfigError(field, "malformed impedance '" + text + "'");
            im = sign * v;
            seen_im = true;
        } else {
            double v = 0.0;
            if (!consume_number(p, v)) throw ConfigError(field, "malformed impedance '" + text + "'");
            // trailing j as in "0.3j"
            if (*p == 'j' || *p == 'J') {
                ++p;
                if (seen_im) throw ConfigError(field, "malformed impedance '" + text + "'");
                im = sign * v;
                seen_im = true;
            } else {
                if (seen_re) throw ConfigError(field, "malformed impedance '" + text + "'");
                re = sign * v;
                seen_re = true;
            }
        }
        any = true;
    }
    if (!any) throw ConfigError(field, "malformed impedance '" + text + "'");
    Phasor z{re, im};
    if (ohm) z /= bases.z_base_ohm();
    return z;
}

namespace {

std::string impedance_to_string(const Phasor& z) {
    const double re = z.real();
    const double im = z.imag();
    if (im == 0.0) return format_double(re);
    std::string imag_part = im < 0.0 ? "-j" + format_double(-im) : "j" + format_double(im);
    if (re == 0.0) return imag_part;
    return im < 0.0 ? format_double(re) + imag_part : format_double(re) + "+" + imag_part;
}

const json* find_section(const json& doc, const std::string& name) {
    const auto it = doc.find(name);
    if (it == doc.end()) return nullptr;
    if (!it->is_object()) throw ConfigError(name, "must be an object");
    return &*it;
}

double get_number(const json& sec, const std::string& section, const std::string& key,
                  std::optional<double> fallback = std::nullopt) {
    const auto it = sec.find(key);
    if (it == sec.end() || it->is_null()) {
        if (fallback.has_value()) return *fallback;
        throw ConfigError(section + "." + key, "missing required number");
    }
    if (!it->is_number()) throw ConfigError(section + "." + key, "expected a number");
    return it->get<double>();
}

std::string get_string(const json& sec, const std::string& section, const std::string& key,
                       std::optional<std::string> fallback = std::nullopt) {
    const auto it = sec.find(key);
    if (it == sec.end() || it->is_null()) {
        if (fallback.has_value()) return *fallback;
        throw ConfigError(section + "." + key, "missing required string");
    }
    if (!it->is_string()) throw ConfigError(section + "." + key, "expected a string");
    return it->get<std::string>();
}

Phasor get_impedance(const json& sec, const std::string& section, const std::string& key,
                     const Bases& bases, std::optional<Phasor> fallback = std::nullopt) {
    const auto it = sec.find(key);
    if (it == sec.end() || it->is_null()) {
        if (fallback.has_value()) return *fallback;
        throw ConfigError(section + "." + key, "missing required impedance");
    }
    if (it->is_number()) return {it->get<double>(), 0.0};
    if (it->is_string()) return parse_impedance(it->get<std::string>(), bases, section + "." + key);
    throw ConfigError(section + "." + key, "expected an impedance string or number");
}

// the standard 9-bus backbone with the tie impedance z7 inserted in the
// generator-2 transformer branch and the fault shunt prepared at bus 7
YBusNetwork build_nine_bus(const Phasor& z7, const Phasor& r_f, const LoadDescriptor& load_tpl) {
    YBusNetwork net(9);
    net.add_branch(3, 4, {0.010, 0.085}, 0.176);
    net.add_branch(3, 5, {0.017, 0.092}, 0.158);
    net.add_branch(4, 6, {0.032, 0.161}, 0.306);
    net.add_branch(5, 8, {0.039, 0.170}, 0.358);
    net.add_branch(6, 7, {0.0085, 0.072}, 0.149);
    net.add_branch(7, 8, {0.0119, 0.1008}, 0.209);
    net.add_branch(0, 3, {0.0, 0.0576});
    net.add_branch(1, 6, Phasor{0.0, 0.0625} + z7);
    net.add_branch(2, 8, {0.0, 0.0586});
    net.add_source(0, from_polar(1.05661, rad(2.2707)), {0.0, 0.0608});
    net.add_source(2, from_polar(1.01690, rad(13.158)), {0.0, 0.1813});

    const Phasor s5{1.25, 0.50};
    const Phasor s6{0.90, 0.30};
    const Phasor s8{1.00, 0.35};
    for (const auto& [bus, s_load] : {std::pair<int, Phasor>{4, s5}, {5, s6}, {7, s8}}) {
        LoadDescriptor d = load_tpl;
        d.z_imp = Phasor{1.0, 0.0} / std::conj(s_load);
        net.add_load(bus, d);
    }
    net.set_injection_bus(1);
    net.set_fault_shunt(6, r_f);
    return net;
}

}  // namespace

Scenario parse_scenario_text(const std::string& text, const std::vector<std::string>& overrides) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("<document>", e.what());
    }
    if (!doc.is_object()) throw ConfigError("<document>", "top level must be an object");

    for (const auto& ov : overrides) {
        std::string s = ov;
        if (s.rfind("--", 0) == 0) s = s.substr(2);
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError(s, "override needs key=value");
        const std::string path = s.substr(0, eq);
        const std::string value = s.substr(eq + 1);
        const auto dot = path.find('.');
        json parsed;
        char* end = nullptr;
        const double num = std::strtod(value.c_str(), &end);
        if (end != value.c_str() && *end == '\0') {
            parsed = num;
        } else if (value == "true" || value == "false") {
            parsed = value == "true";
        } else {
            parsed = value;
        }
        if (dot == std::string::npos) {
            doc[path] = parsed;
        } else {
            doc[path.substr(0, dot)][path.substr(dot + 1)] = parsed;
        }
    }

    Scenario scn;
    scn.name = doc.value("name", std::string("scenario"));

    const json* system = find_section(doc, "system");
    if (system == nullptr) throw ConfigError("system", "missing section");
    Bases bases;
    bases.s_b_mva = get_number(*system, "system", "S_b", 100.0);
    bases.s_c_mva = get_number(*system, "system", "S_c", bases.s_b_mva);
    bases.u_b_kv = get_number(*system, "system", "U_b", 230.0);
    bases.u_dc_kv = get_number(*system, "system", "U_dc", 640.0);
    bases.omega0 = get_number(*system, "system", "omega0", 100.0 * pi);
    scn.bases = bases;

    const std::string topology = get_string(*system, "system", "topology", "two_bus");

    const json* conv = find_section(doc, "converter");
    if (conv != nullptr) {
        ControlParams& c = scn.control;
        c.i_max = get_number(*conv, "converter", "I_max", c.i_max);
        c.k_q = get_number(*conv, "converter", "K_q", c.k_q);
        c.u_low = get_number(*conv, "converter", "U_low", c.u_low);
        c.i_cd_ref = get_number(*conv, "converter", "I_cd_ref", c.i_cd_ref);
        c.i_cq_ref = get_number(*conv, "converter", "I_cq_ref", c.i_cq_ref);
        c.t_decouple_delay = get_number(*conv, "converter", "t_decouple_delay", c.t_decouple_delay);
        c.exit_hysteresis = get_number(*conv, "converter", "exit_hysteresis", c.exit_hysteresis);
        c.tau_c = get_number(*conv, "converter", "tau_c", c.tau_c);
        c.c_dc = get_number(*conv, "converter", "C_dc", c.c_dc);
        const std::string mode = get_string(*conv, "converter", "mode", "traditional");
        if (mode == "traditional") {
            c.mode = ControlMode::Traditional;
        } else if (mode == "decoupled") {
            c.mode = ControlMode::Decoupled;
        } else {
            throw ConfigError("converter.mode", "must be 'traditional' or 'decoupled'");
        }
        if (c.i_max <= 0.0) throw ConfigError("converter.I_max", "must be positive");
        if (c.k_q <= 0.0) throw ConfigError("converter.K_q", "must be positive");
        if (c.u_low <= 0.0 || c.u_low > 1.0) throw ConfigError("converter.U_low", "must be in (0, 1]");
        if (c.i_cd_ref < 0.0 || c.i_cd_ref > c.i_max) {
            throw ConfigError("converter.I_cd_ref", "must be in [0, I_max]");
        }
    }

    const json* pll = find_section(doc, "pll");
    if (pll != nullptr) {
        scn.pll.k_p = get_number(*pll, "pll", "K_p", scn.pll.k_p);
        scn.pll.k_i = get_number(*pll, "pll", "K_i", scn.pll.k_i);
        if (scn.pll.k_p <= 0.0 || scn.pll.k_i <= 0.0) {
            throw ConfigError("pll.K_p", "PLL gains must be positive");
        }
    }
    scn.pll.omega0 = bases.omega0;

    LoadDescriptor load;
    const json* load_sec = find_section(doc, "load");
    if (load_sec != nullptr) {
        load.mix = get_number(*load_sec, "load", "mix", 0.0);
        if (load.mix < 0.0 || load.mix > 1.0) throw ConfigError("load.mix", "must be in [0, 1]");
        load.z_imp = get_impedance(*load_sec, "load", "Z_imp", bases, Phasor{1.0, 0.0});
        if (load.mix > 0.0) {
            ImParams im;
            im.z_s = get_impedance(*load_sec, "load", "Z_s", bases, im.z_s);
            im.x_r = get_number(*load_sec, "load", "X_r", im.x_r);
            im.r_r = get_number(*load_sec, "load", "R_r", im.r_r);
            im.x_m = get_number(*load_sec, "load", "X_m", im.x_m);
            im.h_m = get_number(*load_sec, "load", "H_m", im.h_m);
            im.s_r0 = get_number(*load_sec, "load", "s_r0", im.s_r0);
            im.t_m = get_number(*load_sec, "load", "T_m",
                                std::numeric_limits<double>::quiet_NaN());
            if (im.r_r <= 0.0 || im.x_m <= 0.0 || im.h_m <= 0.0) {
                throw ConfigError("load.R_r", "motor constants must be positive");
            }
            load.im = im;
            load.im_scale = get_number(*load_sec, "load", "im_scale",
                                       std::numeric_limits<double>::quiet_NaN());
        }
    }

    const json* fault = find_section(doc, "fault");
    if (fault != nullptr) {
        scn.fault.z_cf = get_impedance(*fault, "fault", "Z_cf", bases, Phasor{0.0, 0.0});
        scn.fault.z_f = get_impedance(*fault, "fault", "Z_f", bases, Phasor{0.0, 0.0});
        scn.fault.t_on = get_number(*fault, "fault", "t_on", scn.fault.t_on);
        scn.fault.t_clear = get_number(*fault, "fault", "t_clear", scn.fault.t_clear);
        const std::string loc = get_string(*fault, "fault", "location", "line");
        if (loc == "line") {
            scn.fault.location = FaultLocation::Line;
        } else if (loc == "terminal") {
            scn.fault.location = FaultLocation::Terminal;
        } else {
            throw ConfigError("fault.location", "must be 'line' or 'terminal'");
        }
        if (scn.fault.t_on < 0.0 || scn.fault.t_clear < scn.fault.t_on) {
            throw ConfigError("fault.t_clear", "need t_clear >= t_on >= 0");
        }
    }

    const json* sim = find_section(doc, "sim");
    if (sim != nullptr) {
        scn.sim.dt = get_number(*sim, "sim", "dt", scn.sim.dt);
        scn.sim.t_end = get_number(*sim, "sim", "t_end", scn.sim.t_end);
        scn.sim.dt_out = get_number(*sim, "sim", "dt_out", scn.sim.dt_out);
        const std::string integ = get_string(*sim, "sim", "integrator", "rk4");
        if (integ == "rk4") {
            scn.sim.integrator = Integrator::Rk4;
        } else if (integ == "heun") {
            scn.sim.integrator = Integrator::Heun;
        } else {
            throw ConfigError("sim.integrator", "must be 'rk4' or 'heun'");
        }
        if (scn.sim.dt <= 0.0 || scn.sim.dt > 1e-3) {
            throw ConfigError("sim.dt", "must be in (0, 1e-3]");
        }
        if (scn.sim.t_end <= scn.fault.t_clear) {
            throw ConfigError("sim.t_end", "must exceed fault.t_clear");
        }
    }

    if (topology == "two_bus") {
        TwoBusNetwork net;
        net.u_g = get_number(*system, "system", "U_g", 1.0);
        net.z_g = get_impedance(*system, "system", "Z_g", bases, Phasor{0.0, 0.2});
        net.z_c = get_impedance(*system, "system", "Z_c", bases, Phasor{0.0, 0.2});
        if (std::abs(net.z_g) <= 0.0) throw ConfigError("system.Z_g", "must be nonzero");
        net.load = load;
        net.fault = scn.fault;
        scn.network = net;
    } else if (topology == "nine_bus") {
        const Phasor z7 = get_impedance(*system, "system", "Z_7", bases, Phasor{0.03, 0.3});
        const Phasor r_f = get_impedance(*system, "system", "R_f", bases, Phasor{0.00189, 0.0});
        scn.network = build_nine_bus(z7, r_f, load);
    } else {
        throw ConfigError("system.topology", "must be 'two_bus' or 'nine_bus'");
    }
    return scn;
}

Scenario load_scenario_file(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("<file>", "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario_text(buf.str(), overrides);
}

std::string scenario_to_text(const Scenario& scn) {
    json doc;
    doc["name"] = scn.name;

    json system;
    system["S_b"] = scn.bases.s_b_mva;
    system["S_c"] = scn.bases.s_c_mva;
    system["U_b"] = scn.bases.u_b_kv;
    system["U_dc"] = scn.bases.u_dc_kv;
    system["omega0"] = scn.bases.omega0;

    const ControlParams& c = scn.control;
    json conv;
    conv["I_max"] = c.i_max;
    conv["K_q"] = c.k_q;
    conv["U_low"] = c.u_low;
    conv["I_cd_ref"] = c.i_cd_ref;
    conv["I_cq_ref"] = c.i_cq_ref;
    conv["mode"] = to_string(c.mode);
    conv["t_decouple_delay"] = c.t_decouple_delay;
    conv["exit_hysteresis"] = c.exit_hysteresis;
    conv["tau_c"] = c.tau_c;
    conv["C_dc"] = c.c_dc;
    doc["converter"] = conv;

    json pll;
    pll["K_p"] = scn.pll.k_p;
    pll["K_i"] = scn.pll.k_i;
    doc["pll"] = pll;

    const auto load_to_json = [&](const LoadDescriptor& load) {
        json l;
        l["mix"] = load.mix;
        l["Z_imp"] = impedance_to_string(load.z_imp);
        if (load.im.has_value()) {
            l["Z_s"] = impedance_to_string(load.im->z_s);
            l["X_r"] = load.im->x_r;
            l["R_r"] = load.im->r_r;
            l["X_m"] = load.im->x_m;
            l["H_m"] = load.im->h_m;
            l["s_r0"] = load.im->s_r0;
            if (std::isnan(load.im->t_m)) {
                l["T_m"] = nullptr;
            } else {
                l["T_m"] = load.im->t_m;
            }
            if (std::isnan(load.im_scale)) {
                l["im_scale"] = nullptr;
            } else {
                l["im_scale"] = load.im_scale;
            }
        }
        return l;
    };

    json fault;
    fault["Z_cf"] = impedance_to_string(scn.fault.z_cf);
    fault["Z_f"] = impedance_to_string(scn.fault.z_f);
    fault["t_on"] = scn.fault.t_on;
    fault["t_clear"] = scn.fault.t_clear;
    fault["location"] = scn.fault.location == FaultLocation::Line ? "line" : "terminal";
    doc["fault"] = fault;

    json sim;
    sim["dt"] = scn.sim.dt;
    sim["t_end"] = scn.sim.t_end;
    sim["dt_out"] = scn.sim.dt_out;
    sim["integrator"] = scn.sim.integrator == Integrator::Rk4 ? "rk4" : "heun";
    doc["sim"] = sim;

    if (scn.is_two_bus()) {
        const TwoBusNetwork& net = scn.two_bus();
        system["topology"] = "two_bus";
        system["U_g"] = net.u_g;
        system["Z_g"] = impedance_to_string(net.z_g);
        system["Z_c"] = impedance_to_string(net.z_c);
        doc["load"] = load_to_json(net.load);
    } else {
        const YBusNetwork& net = scn.ybus();
        system["topology"] = "nine_bus";
        const Phasor y_tie = net.y(1, 6);
        const Phasor z_tie = Phasor{-1.0, 0.0} / y_tie;
        system["Z_7"] = impedance_to_string(z_tie - Phasor{0.0, 0.0625});
        if (net.fault_shunt().has_value()) {
            system["R_f"] = impedance_to_string(net.fault_shunt()->second);
        }
        doc["load"] = net.loads().empty() ? json::object() : load_to_json(net.loads().front().desc);
    }
    doc["system"] = system;

    return doc.dump(2) + "\n";
}

}  // namespace gfl
