#pragma once

#include <stdexcept>
#include <string>

namespace gfl {

struct DegenerateNetwork : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SingularNetwork : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NoPrefaultEp : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BracketFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& field, const std::string& what)
        : std::runtime_error("config field '" + field + "': " + what), field(field) {}
    std::string field;
};

}  // namespace gfl
