#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace meandense {

// Invalid scenario or argument; the CLI maps this to exit status 1.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Collected configuration violations, one message per offending key.
class ValidationError : public ConfigError {
public:
    explicit ValidationError(std::vector<std::string> violations)
        : ConfigError(join(violations)), violations_(std::move(violations)) {}

    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    static std::string join(const std::vector<std::string>& v) {
        std::string out = std::to_string(v.size()) + " configuration violation(s)";
        for (const auto& s : v) {
            out += "\n  - ";
            out += s;
        }
        return out;
    }

    std::vector<std::string> violations_;
};

// A query the guard zone cannot answer exactly (ball outside the window, r > r_max).
class QueryError : public std::runtime_error {
public:
    explicit QueryError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite values produced during integration; exit status 2 in the CLI.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace meandense
