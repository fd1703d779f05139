#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "slef/errors.hpp"

namespace slef {

// Config format: "key = value" lines grouped under "[section]" headers; "#" starts a
// comment. Top-level keys (before any header) are "experiment" and "seed".
// Numbers accept products like 2*pi/3 or 2^-10. Lists are comma separated.

enum class ConfigErrorKind { syntax, unknown_key, range, missing };

struct ConfigError : Error {
    ConfigError(ConfigErrorKind k, const std::string& what, int line_ = 0, int column_ = 0)
        : Error(what), kind(k), line(line_), column(column_) {}
    ConfigErrorKind kind;
    int line, column;
};

const char* config_error_name(ConfigErrorKind k);

struct ConfigValue {
    std::string text;
    int line = 0;
    int column = 0;
};

class RunConfig {
public:
    std::string experiment;
    // section -> key -> value; top-level keys live in section ""
    std::map<std::string, std::map<std::string, ConfigValue>> entries;
    std::string source;  // original text, echoed into the manifest

    bool has(const std::string& section, const std::string& key) const;
    std::string str(const std::string& section, const std::string& key, const std::string& dflt) const;
    double num(const std::string& section, const std::string& key, double dflt) const;
    double num(const std::string& section, const std::string& key) const;  // required
    long integer(const std::string& section, const std::string& key, long dflt) const;
    std::vector<double> list(const std::string& section, const std::string& key,
                             std::vector<double> dflt = {}) const;
    void set(const std::string& section, const std::string& key, const std::string& value);
    // canonical text, sorted by section and key
    std::string canonical() const;
};

// number grammar shared with the CLI: factor (('*'|'/') factor)*, factor = (number|pi) ['^' number]
double parse_number(const std::string& s);

// Parses and fully validates: unknown sections/keys, numeric syntax, ranges, and the
// sections the chosen experiment needs.
RunConfig parse_config(const std::string& text);
void validate_config(const RunConfig& cfg);

const std::vector<std::string>& experiment_names();

}  // namespace slef
