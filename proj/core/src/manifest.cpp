#include "gflsim/manifest.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "gflsim/cases.hpp"
#include "gflsim/config.hpp"
#include "gflsim/csv.hpp"
#include "gflsim/errors.hpp"
#include "gflsim/simulator.hpp"

namespace gfl {

using nlohmann::json;

ExpectationManifest parse_manifest_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("<manifest>", e.what());
    }
    ExpectationManifest m;
    m.scenario = doc.at("scenario").get<std::string>();
    m.with_cct = doc.value("with_cct", false);
    if (doc.contains("overrides")) {
        for (const auto& o : doc["overrides"]) m.overrides.push_back(o.get<std::string>());
    }
    m.modes.clear();
    if (doc.contains("modes")) {
        for (const auto& mode : doc["modes"]) {
            const std::string s = mode.get<std::string>();
            if (s == "traditional") {
                m.modes.push_back(ControlMode::Traditional);
            } else if (s == "decoupled") {
                m.modes.push_back(ControlMode::Decoupled);
            } else {
                throw ConfigError("manifest.modes", "unknown mode '" + s + "'");
            }
        }
    }
    if (m.modes.empty()) m.modes.push_back(ControlMode::Traditional);

    for (const auto& a : doc.at("assertions")) {
        Assertion as;
        as.quantity = a.at("quantity").get<std::string>();
        as.comparator = a.at("comparator").get<std::string>();
        if (a.contains("bound") && !a["bound"].is_null()) as.bound = a["bound"].get<double>();
        if (a.contains("reference") && !a["reference"].is_null()) {
            as.reference = a["reference"].get<std::string>();
        }
        as.margin = a.value("margin", 0.0);
        as.tolerance = a.value("tolerance", 0.0);
        as.source = a.value("source", std::string{});
        if (as.source != "reported" && as.source != "definition" && as.source != "computed") {
            throw ConfigError("manifest.assertions",
                              "'" + as.quantity + "' needs source reported|definition|computed");
        }
        if (!as.bound.has_value() && !as.reference.has_value()) {
            throw ConfigError("manifest.assertions",
                              "'" + as.quantity + "' needs a bound or a reference");
        }
        m.assertions.push_back(std::move(as));
    }
    return m;
}

namespace {

struct MetricTable {
    std::map<std::string, double> values;

    [[nodiscard]] std::optional<double> lookup(const std::string& name) const {
        const auto it = values.find(name);
        if (it == values.end()) return std::nullopt;
        return it->second;
    }
};

bool compare(const std::string& op, double lhs, double rhs, double tolerance) {
    if (op == ">=") return lhs >= rhs - tolerance;
    if (op == "<=") return lhs <= rhs + tolerance;
    if (op == ">") return lhs > rhs - tolerance;
    if (op == "<") return lhs < rhs + tolerance;
    if (op == "==") return std::abs(lhs - rhs) <= tolerance;
    throw ConfigError("manifest.comparator", "unknown comparator '" + op + "'");
}

}  // namespace

ManifestReport run_manifest(const ExpectationManifest& m) {
    ManifestReport report;
    report.scenario = m.scenario;

    MetricTable table;
    try {
        for (const ControlMode mode : m.modes) {
            Scenario scn = builtin_case(m.scenario);
            if (!m.overrides.empty()) {
                scn = parse_scenario_text(scenario_to_text(scn), m.overrides);
            }
            scn.control.mode = mode;
            const TimeSeries ts = simulate(scn);
            RunSummary sum = summarize(scn.name, mode, ts, scn.fault);
            if (m.with_cct) {
                const CctResult cct = cct_search(scn, RecoveryCriterion{});
                sum.cct = cct.duration;
            }
            const std::string suffix = std::string("@") + to_string(mode);
            for (const auto& [k, v] : sum.metrics()) {
                table.values[k + suffix] = v;
                if (m.modes.size() == 1) table.values[k] = v;
            }
        }
    } catch (const std::exception& e) {
        report.error = e.what();
        report.all_passed = false;
        return report;
    }

    for (const auto& a : m.assertions) {
        AssertionOutcome out;
        out.assertion = a;
        const auto lhs = table.lookup(a.quantity);
        std::optional<double> rhs = a.bound;
        if (a.reference.has_value()) {
            const auto ref = table.lookup(*a.reference);
            if (ref.has_value()) rhs = *ref + a.margin;
        } else if (rhs.has_value()) {
            rhs = *rhs + a.margin;
        }
        if (!lhs.has_value() || !rhs.has_value()) {
            out.passed = false;
            out.measured = lhs.value_or(std::numeric_limits<double>::quiet_NaN());
            out.target = rhs.value_or(std::numeric_limits<double>::quiet_NaN());
        } else {
            out.measured = *lhs;
            out.target = *rhs;
            out.passed = compare(a.comparator, *lhs, *rhs, a.tolerance);
        }
        report.all_passed = report.all_passed && out.passed;
        report.outcomes.push_back(std::move(out));
    }
    return report;
}

std::string format_report(const std::vector<ManifestReport>& reports) {
    std::ostringstream os;
    size_t passed = 0;
    size_t total = 0;
    for (const auto& r : reports) {
        os << "== " << r.scenario << "\n";
        if (!r.error.empty()) {
            os << "  ERROR " << r.error << "\n";
            ++total;
            continue;
        }
        for (const auto& o : r.outcomes) {
            ++total;
            if (o.passed) ++passed;
            os << "  " << (o.passed ? "PASS" : "FAIL") << " " << o.assertion.quantity << " "
               << o.assertion.comparator << " ";
            if (o.assertion.reference.has_value()) {
                os << *o.assertion.reference;
                if (o.assertion.margin != 0.0) os << "+" << format_double(o.assertion.margin);
            } else {
                os << format_double(o.target);
            }
            os << "  (measured " << format_double(o.measured) << ", target "
               << format_double(o.target) << ", source " << o.assertion.source << ")\n";
        }
    }
    os << passed << "/" << total << " assertions passed\n";
    return os.str();
}

}  // namespace gfl
