#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gflsim/summary.hpp"

namespace gfl {

/// One mechanically checkable expectation on a run metric. The metric
/// name is "<metric>" or "<metric>@<mode>"; the right-hand side is either
/// a numeric bound or another metric (plus margin). Every assertion
/// carries its source: "reported" (taken from the studied system's
/// published behavior), "definition" (true by construction), or
/// "computed" (derived by independent calculation).
struct Assertion {
    std::string quantity;
    std::string comparator;  ///< ">=", "<=", ">", "<", "=="
    std::optional<double> bound;
    std::optional<std::string> reference;
    double margin = 0.0;     ///< added to the reference side
    double tolerance = 0.0;  ///< slack applied toward passing
    std::string source;
};

struct ExpectationManifest {
    std::string scenario;  ///< built-in case name
    std::vector<ControlMode> modes{ControlMode::Traditional};
    bool with_cct = false;
    std::vector<std::string> overrides;
    std::vector<Assertion> assertions;
};

struct AssertionOutcome {
    Assertion assertion;
    double measured = 0.0;
    double target = 0.0;
    bool passed = false;
};

struct ManifestReport {
    std::string scenario;
    std::vector<AssertionOutcome> outcomes;
    bool all_passed = true;
    std::string error;  ///< nonempty when the manifest could not run
};

[[nodiscard]] ExpectationManifest parse_manifest_text(const std::string& text);
[[nodiscard]] ManifestReport run_manifest(const ExpectationManifest& m);

/// Plain-text report, one line per assertion plus a suite footer.
[[nodiscard]] std::string format_report(const std::vector<ManifestReport>& reports);

}  // namespace gfl
