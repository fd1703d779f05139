#include "slef/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>

namespace slef {

const char* config_error_name(ConfigErrorKind k) {
    switch (k) {
        case ConfigErrorKind::syntax: return "syntax error";
        case ConfigErrorKind::unknown_key: return "unknown key";
        case ConfigErrorKind::range: return "range violation";
        case ConfigErrorKind::missing: return "missing key";
    }
    return "config error";
}

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> n{"spectral", "solve",          "ode",   "fit", "recursion",
                                            "harnack",  "counterexample", "probe", "sweep"};
    return n;
}

namespace {

enum class Kind { number, integer, text, list, choice };

struct KeySpec {
    Kind kind;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    bool lo_open = false, hi_open = false;
    std::vector<std::string> choices{};
};

using Schema = std::map<std::string, std::map<std::string, KeySpec>>;

KeySpec num(double lo = -INFINITY, double hi = INFINITY, bool lo_open = false, bool hi_open = false) {
    return {Kind::number, lo, hi, lo_open, hi_open};
}
KeySpec pos() { return num(0.0, INFINITY, true); }
KeySpec nonneg() { return num(0.0); }
KeySpec unit_open() { return num(0.0, 1.0, true, true); }
KeySpec integer(double lo, double hi = INFINITY) { return {Kind::integer, lo, hi}; }
KeySpec choice(std::vector<std::string> c) { return {Kind::choice, 0, 0, false, false, std::move(c)}; }
KeySpec text() { return {Kind::text}; }
KeySpec list() { return {Kind::list}; }

const Schema& schema() {
    static const Schema s = [] {
        Schema s;
        s[""] = {{"experiment", choice(experiment_names())}, {"seed", integer(0)}};
        s["domain"] = {{"shape", choice({"sector", "cap", "box", "disk", "flat", "tilted", "bumpy", "interval"})},
                       {"theta", num(0.0, 2 * M_PI, true, true)},
                       {"alpha", num(0.0, M_PI, true, true)},
                       {"radius", pos()},
                       {"x_min", num()},
                       {"x_max", num()},
                       {"top", pos()},
                       {"slope", num(-1e6, 1e6)},
                       {"R", num(1.0, INFINITY, true)},
                       {"i_max", integer(1, 1000)},
                       {"a", num()},
                       {"b", num()},
                       {"data", nonneg()},
                       {"outer_data", nonneg()}};
        s["equation"] = {{"gamma", pos()}, {"f", pos()}, {"lambda", pos()}, {"Lambda", pos()}};
        s["mesh"] = {{"h", num(0.0, 1.0, true)},          {"n_r", integer(8, 1 << 16)},
                     {"n_omega", integer(8, 1 << 16)},    {"grading", num(1.0, 1.2)},
                     {"n", integer(2, 1e8)},              {"grading_power", num(1.0, 10.0)},
                     {"cap_nodes", integer(64, 1e7)},     {"samples", integer(2, 1e7)}};
        s["solver"] = {{"newton_tol", unit_open()},
                       {"eps0", pos()},
                       {"eps_factor", unit_open()},
                       {"eps_min", nonneg()},
                       {"max_newton", integer(1, 10000)},
                       {"backend", choice({"automatic", "direct", "multigrid", "jacobi"})},
                       {"linear_tol", num(0.0, 1e-6, true)}};
        s["output"] = {{"dir", text()}, {"precision", integer(1, 17)}};
        s["ode"] = {{"family", choice({"flat", "annulus", "angular", "log"})},
                    {"param", num()},
                    {"t_max", pos()},
                    {"samples", integer(2, 1e7)},
                    {"inner_radius", pos()},
                    {"slope", pos()},
                    {"n_shoot", integer(8, 1e7)},
                    {"a_values", list()},
                    {"t_hi", unit_open()}};
        s["fit"] = {{"omega", nonneg()},        {"t_hi", pos()}, {"t_lo", pos()}, {"per_octave", integer(1, 1000)},
                    {"phi_fixed", pos()},       {"model", choice({"pure", "log", "both"})}};
        s["recursion"] = {{"kind", choice({"ak", "sigma_geometric", "sigma_harmonic"})},
                          {"a1", pos()},
                          {"k_max", integer(1, 1e8)},
                          {"Q", num(0.0, 1.0, true)},
                          {"q", unit_open()}};
        s["harnack"] = {{"data_u", pos()}, {"data_v", pos()}, {"depth_hi", pos()}, {"depth_lo", pos()},
                        {"probe_radius", pos()}};
        s["counterexample"] = {{"R", num(1.0, INFINITY, true)},
                               {"i_max", integer(1, 1000)},
                               {"gamma", unit_open()},
                               {"k", nonneg()},
                               {"h", num(0.0, 1.0 / 16, true)},
                               {"eps_min", nonneg()},
                               {"eps_factor", unit_open()},
                               {"apex_index", integer(1, 1000)},
                               {"refine", choice({"true", "false"})},
                               {"depths", list()}};
        s["probe"] = {{"kind", choice({"interior_improvement", "critical_source", "harmonic_coefficient",
                                       "nondegeneracy"})},
                      {"t", list()},
                      {"caps", list()},
                      {"radii", list()},
                      {"center_x", num()},
                      {"center_y", num()},
                      {"r", pos()}};
        s["sweep"] = {{"key", text()}, {"values", text()}};
        return s;
    }();
    return s;
}

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    return out;
}

double parse_factor(const std::string& f) {
    const auto caret = f.find('^');
    auto base = [](const std::string& b) {
        if (b == "pi") return M_PI;
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(b, &used);
        } catch (...) {
            throw ConfigError(ConfigErrorKind::syntax, "not a number: '" + b + "'");
        }
        if (used != b.size()) throw ConfigError(ConfigErrorKind::syntax, "not a number: '" + b + "'");
        return v;
    };
    if (caret == std::string::npos) return base(trim(f));
    return std::pow(base(trim(f.substr(0, caret))), base(trim(f.substr(caret + 1))));
}

void check_range(const std::string& sec, const std::string& key, const KeySpec& sp, double v, const ConfigValue& cv) {
    const bool bad = !std::isfinite(v) || (sp.lo_open ? v <= sp.lo : v < sp.lo) || (sp.hi_open ? v >= sp.hi : v > sp.hi);
    if (bad) {
        std::ostringstream os;
        os << "line " << cv.line << ": " << (sec.empty() ? "" : sec + ".") << key << " = " << cv.text
           << " outside " << (sp.lo_open ? "(" : "[") << sp.lo << ", " << sp.hi << (sp.hi_open ? ")" : "]");
        throw ConfigError(ConfigErrorKind::range, os.str(), cv.line, cv.column);
    }
}

void check_value(const std::string& sec, const std::string& key, const ConfigValue& cv) {
    const auto& sp = schema().at(sec).at(key);
    auto syntax = [&](const std::string& why) {
        throw ConfigError(ConfigErrorKind::syntax,
                          "line " + std::to_string(cv.line) + ", column " + std::to_string(cv.column) + ": " + why,
                          cv.line, cv.column);
    };
    switch (sp.kind) {
        case Kind::number:
        case Kind::integer: {
            double v = 0;
            try {
                v = parse_number(cv.text);
            } catch (const ConfigError& e) {
                syntax(e.what());
            }
            if (sp.kind == Kind::integer && v != std::floor(v)) syntax(key + " must be an integer");
            check_range(sec, key, sp, v, cv);
            break;
        }
        case Kind::list:
            for (const auto& item : split_list(cv.text)) {
                try {
                    parse_number(item);
                } catch (const ConfigError& e) {
                    syntax(e.what());
                }
            }
            break;
        case Kind::choice:
            if (std::find(sp.choices.begin(), sp.choices.end(), cv.text) == sp.choices.end()) {
                std::string opts;
                for (const auto& c : sp.choices) opts += (opts.empty() ? "" : ", ") + c;
                throw ConfigError(ConfigErrorKind::range,
                                  "line " + std::to_string(cv.line) + ": " + key + " = " + cv.text +
                                      " is not one of {" + opts + "}",
                                  cv.line, cv.column);
            }
            break;
        case Kind::text:
            if (cv.text.empty()) syntax(key + " is empty");
            break;
    }
}

void require(const RunConfig& c, const std::string& sec, const std::string& key) {
    if (!c.has(sec, key))
        throw ConfigError(ConfigErrorKind::missing, "experiment '" + c.experiment + "' needs " + sec + "." + key);
}

}  // namespace

double parse_number(const std::string& s) {
    const std::string t = trim(s);
    if (t.empty()) throw ConfigError(ConfigErrorKind::syntax, "empty number");
    // split on * and / outside exponents
    double v = 1.0;
    char op = '*';
    std::size_t start = 0;
    for (std::size_t i = 0; i <= t.size(); ++i) {
        const bool end = i == t.size();
        if (!end && t[i] != '*' && t[i] != '/') continue;
        const double f = parse_factor(t.substr(start, i - start));
        v = op == '*' ? v * f : v / f;
        if (!end) op = t[i];
        start = i + 1;
    }
    return v;
}

bool RunConfig::has(const std::string& section, const std::string& key) const {
    auto s = entries.find(section);
    return s != entries.end() && s->second.count(key);
}

std::string RunConfig::str(const std::string& section, const std::string& key, const std::string& dflt) const {
    return has(section, key) ? entries.at(section).at(key).text : dflt;
}

double RunConfig::num(const std::string& section, const std::string& key, double dflt) const {
    return has(section, key) ? parse_number(entries.at(section).at(key).text) : dflt;
}

double RunConfig::num(const std::string& section, const std::string& key) const {
    if (!has(section, key)) throw ConfigError(ConfigErrorKind::missing, "missing " + section + "." + key);
    return parse_number(entries.at(section).at(key).text);
}

long RunConfig::integer(const std::string& section, const std::string& key, long dflt) const {
    return has(section, key) ? std::lround(parse_number(entries.at(section).at(key).text)) : dflt;
}

std::vector<double> RunConfig::list(const std::string& section, const std::string& key,
                                    std::vector<double> dflt) const {
    if (!has(section, key)) return dflt;
    std::vector<double> out;
    for (const auto& item : split_list(entries.at(section).at(key).text)) out.push_back(parse_number(item));
    return out;
}

void RunConfig::set(const std::string& section, const std::string& key, const std::string& value) {
    auto s = schema().find(section);
    if (s == schema().end() || !s->second.count(key))
        throw ConfigError(ConfigErrorKind::unknown_key, "unknown key '" + (section.empty() ? key : section + "." + key) + "'");
    ConfigValue cv{value, 0, 0};
    check_value(section, key, cv);
    entries[section][key] = cv;
    if (section.empty() && key == "experiment") experiment = value;
}

std::string RunConfig::canonical() const {
    std::ostringstream os;
    for (const auto& [sec, kv] : entries) {
        if (!sec.empty()) os << "[" << sec << "]\n";
        for (const auto& [k, v] : kv) os << k << " = " << v.text << "\n";
    }
    return os.str();
}

RunConfig parse_config(const std::string& text) {
    RunConfig c;
    c.source = text;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string body = hash == std::string::npos ? raw : raw.substr(0, hash);
        const std::string t = trim(body);
        if (t.empty()) continue;
        const int indent = static_cast<int>(body.find_first_not_of(" \t")) + 1;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ConfigError(ConfigErrorKind::syntax,
                                  "line " + std::to_string(line) + ", column " + std::to_string(indent) +
                                      ": unterminated section header",
                                  line, indent);
            section = trim(t.substr(1, t.size() - 2));
            if (!schema().count(section) || section.empty())
                throw ConfigError(ConfigErrorKind::unknown_key,
                                  "line " + std::to_string(line) + ": unknown section '" + section + "'", line, indent);
            c.entries[section];
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError(ConfigErrorKind::syntax,
                              "line " + std::to_string(line) + ", column " + std::to_string(indent) +
                                  ": expected 'key = value'",
                              line, indent);
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        const int vcol = static_cast<int>(eq + 2 + (body.substr(eq + 1).find_first_not_of(" \t") == std::string::npos
                                                        ? 0
                                                        : body.substr(eq + 1).find_first_not_of(" \t")));
        if (key.empty() || key.find_first_of(" \t") != std::string::npos)
            throw ConfigError(ConfigErrorKind::syntax,
                              "line " + std::to_string(line) + ", column " + std::to_string(indent) + ": bad key",
                              line, indent);
        if (value.empty())
            throw ConfigError(ConfigErrorKind::syntax,
                              "line " + std::to_string(line) + ", column " + std::to_string(vcol) + ": missing value",
                              line, vcol);
        const auto& sec = schema().at(section);
        if (!sec.count(key))
            throw ConfigError(ConfigErrorKind::unknown_key,
                              "line " + std::to_string(line) + ": unknown key '" +
                                  (section.empty() ? key : section + "." + key) + "'",
                              line, indent);
        if (c.entries[section].count(key))
            throw ConfigError(ConfigErrorKind::syntax, "line " + std::to_string(line) + ": duplicate key '" + key + "'",
                              line, indent);
        ConfigValue cv{value, line, vcol};
        check_value(section, key, cv);
        c.entries[section][key] = cv;
    }
    c.experiment = c.str("", "experiment", "");
    validate_config(c);
    return c;
}

void validate_config(const RunConfig& c) {
    if (c.experiment.empty()) throw ConfigError(ConfigErrorKind::missing, "missing top-level 'experiment'");
    const std::string& e = c.experiment;
    const std::string shape = c.str("domain", "shape", "");
    auto need_gamma = [&] { require(c, "equation", "gamma"); };
    if (e == "spectral") {
        require(c, "domain", "shape");
        if (shape == "sector") require(c, "domain", "theta");
        else if (shape == "cap") require(c, "domain", "alpha");
        else throw ConfigError(ConfigErrorKind::range, "spectral needs shape sector or cap");
        need_gamma();
    } else if (e == "solve") {
        require(c, "domain", "shape");
        need_gamma();
        if (shape == "cap") throw ConfigError(ConfigErrorKind::range, "solve does not mesh 3D caps");
        if (shape == "sector") {
            require(c, "domain", "theta");
            require(c, "mesh", "n_r");
            require(c, "mesh", "n_omega");
        } else if (shape == "interval") {
            require(c, "mesh", "n");
        } else {
            require(c, "mesh", "h");
        }
    } else if (e == "ode") {
        require(c, "ode", "family");
        if (c.str("ode", "family", "") != "log") need_gamma();
    } else if (e == "fit" || e == "harnack") {
        require(c, "domain", "theta");
        need_gamma();
        require(c, "mesh", "n_r");
        require(c, "mesh", "n_omega");
    } else if (e == "recursion") {
        require(c, "recursion", "kind");
    } else if (e == "probe") {
        require(c, "probe", "kind");
    } else if (e == "sweep") {
        throw ConfigError(ConfigErrorKind::range, "experiment must name the swept experiment, not 'sweep'");
    }
    if (c.has("equation", "lambda") && c.has("equation", "Lambda") &&
        c.num("equation", "lambda") > c.num("equation", "Lambda"))
        throw ConfigError(ConfigErrorKind::range, "equation.lambda exceeds equation.Lambda");
    if (c.has("domain", "x_min") && c.has("domain", "x_max") && !(c.num("domain", "x_min") < c.num("domain", "x_max")))
        throw ConfigError(ConfigErrorKind::range, "domain.x_min must be below domain.x_max");
    if (c.has("fit", "t_lo") && c.has("fit", "t_hi") && !(c.num("fit", "t_lo") < c.num("fit", "t_hi")))
        throw ConfigError(ConfigErrorKind::range, "fit.t_lo must be below fit.t_hi");
}

}  // namespace slef
