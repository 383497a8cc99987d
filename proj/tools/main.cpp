// gflsim: quasi-static phasor simulator and analysis toolkit for a
// grid-following converter under short-circuit faults.
//
// Exit codes: 0 success, 1 config error, 2 simulation event or failed
// expectation, 3 internal error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gflsim/analysis.hpp"
#include "gflsim/cases.hpp"
#include "gflsim/config.hpp"
#include "gflsim/csv.hpp"
#include "gflsim/errors.hpp"
#include "gflsim/manifest.hpp"
#include "gflsim/simulator.hpp"
#include "gflsim/summary.hpp"

namespace fs = std::filesystem;
using namespace gfl;

namespace {

struct ScenarioArgs {
    std::string case_name;
    std::string config_path;
    std::string mode;
    std::vector<std::string> overrides;
};

void add_scenario_options(CLI::App* cmd, ScenarioArgs& args) {
    cmd->add_option("--case", args.case_name, "built-in case name (see `gflsim cases`)");
    cmd->add_option("--config", args.config_path, "scenario config file (JSON)");
    cmd->add_option("--mode", args.mode, "control mode: traditional | decoupled");
    cmd->add_option("--set", args.overrides,
                    "config override, section.field=value (repeatable)");
}

Scenario resolve_scenario(const ScenarioArgs& args) {
    Scenario scn;
    if (!args.config_path.empty()) {
        scn = load_scenario_file(args.config_path, args.overrides);
    } else if (!args.case_name.empty()) {
        if (args.overrides.empty()) {
            scn = builtin_case(args.case_name);
        } else {
            scn = parse_scenario_text(scenario_to_text(builtin_case(args.case_name)),
                                      args.overrides);
        }
    } else {
        throw ConfigError("<args>", "need --case or --config");
    }
    if (!args.mode.empty()) {
        if (args.mode == "traditional") {
            scn.control.mode = ControlMode::Traditional;
        } else if (args.mode == "decoupled") {
            scn.control.mode = ControlMode::Decoupled;
        } else {
            throw ConfigError("--mode", "must be 'traditional' or 'decoupled'");
        }
    }
    return scn;
}

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << content;
}

std::string timeseries_string(const TimeSeries& ts) {
    std::ostringstream os;
    write_timeseries_csv(os, ts);
    return os.str();
}

int run_summary_exit(const RunSummary& sum) { return sum.terminal_event() ? 2 : 0; }

int cmd_run(const ScenarioArgs& args, const std::string& out_dir) {
    const Scenario scn = resolve_scenario(args);
    const TimeSeries ts = simulate(scn);
    const RunSummary sum = summarize(scn.name, scn.control.mode, ts, scn.fault);
    const fs::path csv =
        fs::path(out_dir) / (scn.name + "_" + to_string(scn.control.mode) + ".csv");
    write_file(csv, timeseries_string(ts));
    std::cout << format_summary(sum);
    std::cout << "timeseries: " << csv.string() << "\n";
    return run_summary_exit(sum);
}

int cmd_compare(const ScenarioArgs& args, const std::string& out_dir,
                const std::string& modes_csv, bool with_cct) {
    std::vector<ControlMode> modes;
    std::stringstream ss(modes_csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok == "traditional") {
            modes.push_back(ControlMode::Traditional);
        } else if (tok == "decoupled") {
            modes.push_back(ControlMode::Decoupled);
        } else if (!tok.empty()) {
            throw ConfigError("--modes", "unknown mode '" + tok + "'");
        }
    }
    if (modes.empty()) modes = {ControlMode::Traditional, ControlMode::Decoupled};

    int exit_code = 0;
    std::vector<RunSummary> sums;
    for (const ControlMode m : modes) {
        Scenario scn = resolve_scenario(args);
        scn.control.mode = m;
        const TimeSeries ts = simulate(scn);
        RunSummary sum = summarize(scn.name, m, ts, scn.fault);
        if (with_cct) sum.cct = cct_search(scn, RecoveryCriterion{}).duration;
        const fs::path csv = fs::path(out_dir) / (scn.name + "_" + to_string(m) + ".csv");
        write_file(csv, timeseries_string(ts));
        std::cout << format_summary(sum) << "\n";
        exit_code = std::max(exit_code, run_summary_exit(sum));
        sums.push_back(std::move(sum));
    }
    if (sums.size() == 2) {
        std::cout << "delta (second minus first):\n";
        std::cout << "  recovery-start U_c: "
                  << format_double(sums[1].min_u_c_postfault - sums[0].min_u_c_postfault)
                  << " p.u.\n";
        std::cout << "  peak post-fault U_c: "
                  << format_double(sums[1].max_u_c_postfault - sums[0].max_u_c_postfault)
                  << " p.u.\n";
        std::cout << "  peak U_dc: " << format_double(sums[1].max_u_dc - sums[0].max_u_dc)
                  << " p.u.\n";
        if (sums[0].cct.has_value() && sums[1].cct.has_value()) {
            std::cout << "  cct: " << format_double(*sums[1].cct - *sums[0].cct) << " s\n";
        }
    }
    return exit_code;
}

int cmd_surface(const ScenarioArgs& args, const std::string& out_path) {
    const Scenario scn = resolve_scenario(args);
    const SurfaceGrid g = qp_surface(scn.control);
    std::ostringstream os;
    write_surface_csv(os, g);
    write_file(out_path, os.str());
    std::ostringstream cross;
    write_crossover_csv(cross, g);
    const fs::path cross_path = fs::path(out_path).replace_extension(".crossover.csv");
    write_file(cross_path, cross.str());
    std::cout << "surface: " << out_path << " (" << g.u_c.size() << "x" << g.theta_v.size()
              << " nodes)\ncrossover: " << cross_path.string() << "\n";
    return 0;
}

int cmd_classify(const ScenarioArgs& args) {
    const Scenario scn = resolve_scenario(args);
    if (!scn.is_two_bus()) throw ConfigError("--case", "classification needs a two-bus case");
    const FaultClass fc = classify_fault(scn.two_bus(), scn.fault, scn.control, scn.pll,
                                         scn.bases.injection_scale());
    const char* cat = fc.category == FaultCategory::Pcc      ? "PCC"
                      : fc.category == FaultCategory::Nearby ? "Nearby"
                                                             : "Remote";
    const char* trend = fc.delta_trend == DeltaTrend::Negligible ? "Negligible"
                        : fc.delta_trend == DeltaTrend::Decrease ? "Decrease"
                                                                 : "Increase";
    const char* tendency = fc.voltage_tendency == VoltageTendency::Negligible ? "negligible"
                           : fc.voltage_tendency == VoltageTendency::High     ? "high"
                                                                              : "low";
    std::cout << cat << "," << trend << "\n";
    std::cout << "on-fault U_c estimate: " << format_double(fc.onfault_u_c) << " p.u.\n";
    std::cout << "on-fault U_cq estimate: " << format_double(fc.onfault_u_cq) << " p.u.\n";
    std::cout << "voltage tendency: " << tendency << "\n";
    std::cout << "projected angle drift: " << format_double(deg(fc.projected_drift))
              << " deg\n";
    std::cout << "dc-side risk: " << (fc.dc_risk ? "yes" : "no") << "\n";
    return 0;
}

int cmd_cct(const ScenarioArgs& args, double lo, double hi) {
    const Scenario scn = resolve_scenario(args);
    const CctResult r = cct_search(scn, RecoveryCriterion{}, lo, hi);
    std::cout << "cct: " << format_double(r.duration) << " s"
              << (r.hit_upper ? " (criterion never violated up to the bracket top)" : "")
              << "\n";
    return 0;
}

int cmd_domain(const ScenarioArgs& args, const std::string& out_path, int n_delta,
               int n_omega, double omega_span, int threads) {
    const Scenario scn = resolve_scenario(args);
    if (!scn.is_two_bus()) throw ConfigError("--case", "domain sampling needs a two-bus case");
    if (scn.two_bus().load.has_motor()) {
        throw ConfigError("--case", "domain sampling is restricted to impedance loads");
    }
    const TheveninEquivalent eq = thevenin_reduce(scn.two_bus(), scn.two_bus().load.z_imp);
    StabilityGridSpec spec;
    spec.n_delta = n_delta;
    spec.n_omega = n_omega;
    spec.omega_span = omega_span;
    spec.threads = threads;
    const StabilityMap map = stability_map(eq, scn.control, scn.pll, scn.control.mode,
                                           scn.bases.injection_scale(), spec);
    std::ostringstream os;
    write_stability_map_csv(os, map);
    write_file(out_path, os.str());
    std::cout << "domain: " << out_path << "\n";
    std::cout << "stable fraction: " << format_double(map.stable_fraction) << "\n";
    return 0;
}

int cmd_cases(const std::string& emit_dir) {
    for (const auto& name : builtin_case_names()) {
        std::cout << name << "\n";
        if (!emit_dir.empty()) {
            const Scenario scn = builtin_case(name);
            write_file(fs::path(emit_dir) / (name + ".json"), scenario_to_text(scn));
        }
    }
    return 0;
}

int cmd_accept(const std::string& manifests_dir) {
    std::vector<fs::path> files;
    if (fs::is_directory(manifests_dir)) {
        for (const auto& e : fs::directory_iterator(manifests_dir)) {
            if (e.path().extension() == ".json") files.push_back(e.path());
        }
        std::sort(files.begin(), files.end());
    } else if (fs::exists(manifests_dir)) {
        files.emplace_back(manifests_dir);
    } else {
        throw ConfigError("--manifests", "no such file or directory: " + manifests_dir);
    }

    std::vector<ManifestReport> reports;
    for (const auto& f : files) {
        std::ifstream in(f);
        std::ostringstream buf;
        buf << in.rdbuf();
        reports.push_back(run_manifest(parse_manifest_text(buf.str())));
    }
    std::cout << format_report(reports);
    for (const auto& r : reports) {
        if (!r.all_passed) return 2;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quasi-static phasor simulator for a grid-following converter under faults"};
    app.require_subcommand(1);

    ScenarioArgs run_args;
    std::string run_out = "out";
    auto* run = app.add_subcommand("run", "simulate one scenario, emit CSV + summary");
    add_scenario_options(run, run_args);
    run->add_option("--out", run_out, "output directory");

    ScenarioArgs cmp_args;
    std::string cmp_out = "out";
    std::string cmp_modes = "traditional,decoupled";
    bool cmp_cct = false;
    auto* cmp = app.add_subcommand("compare", "run the same scenario under several modes");
    add_scenario_options(cmp, cmp_args);
    cmp->add_option("--out", cmp_out, "output directory");
    cmp->add_option("--modes", cmp_modes, "comma-separated mode list");
    cmp->add_flag("--cct", cmp_cct, "also search the critical clearing time per mode");

    ScenarioArgs surf_args;
    std::string surf_out = "surface.csv";
    auto* surf = app.add_subcommand("surface", "ideal-vs-actual power surface grid");
    add_scenario_options(surf, surf_args);
    surf->add_option("--out", surf_out, "output CSV path");

    ScenarioArgs cls_args;
    auto* cls = app.add_subcommand("classify", "classify the configured fault");
    add_scenario_options(cls, cls_args);

    ScenarioArgs cct_args;
    double cct_lo = 0.02;
    double cct_hi = 0.6;
    auto* cct = app.add_subcommand("cct", "bisect the critical clearing time");
    add_scenario_options(cct, cct_args);
    cct->add_option("--lo", cct_lo, "lower bracket, s");
    cct->add_option("--hi", cct_hi, "upper bracket, s");

    ScenarioArgs dom_args;
    std::string dom_out = "domain.csv";
    int dom_nd = 181;
    int dom_nw = 101;
    double dom_span = 100.0;
    int dom_threads = 0;
    auto* dom = app.add_subcommand("domain", "sample the post-fault stability domain");
    add_scenario_options(dom, dom_args);
    dom->add_option("--out", dom_out, "output CSV path");
    dom->add_option("--n-delta", dom_nd, "angle-axis node count");
    dom->add_option("--n-omega", dom_nw, "frequency-axis node count");
    dom->add_option("--omega-span", dom_span, "frequency half-range, rad/s");
    dom->add_option("--threads", dom_threads, "worker threads (0 = hardware)");

    std::string cases_emit;
    auto* cases = app.add_subcommand("cases", "list built-in cases");
    cases->add_option("--emit", cases_emit, "also write each case config to this directory");

    std::string accept_manifests = "scenarios/manifests";
    auto* accept = app.add_subcommand("accept", "run expectation manifests");
    accept->add_option("--manifests", accept_manifests, "manifest file or directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(run_args, run_out);
        if (cmp->parsed()) return cmd_compare(cmp_args, cmp_out, cmp_modes, cmp_cct);
        if (surf->parsed()) return cmd_surface(surf_args, surf_out);
        if (cls->parsed()) return cmd_classify(cls_args);
        if (cct->parsed()) return cmd_cct(cct_args, cct_lo, cct_hi);
        if (dom->parsed())
            return cmd_domain(dom_args, dom_out, dom_nd, dom_nw, dom_span, dom_threads);
        if (cases->parsed()) return cmd_cases(cases_emit);
        if (accept->parsed()) return cmd_accept(accept_manifests);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const BracketFailure& e) {
        std::cerr << "search error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
