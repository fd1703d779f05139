#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "slef/config.hpp"
#include "slef/run.hpp"

namespace fs = std::filesystem;

namespace {

int fail_early(const std::string& sub, const fs::path& out, const std::string& status, const std::string& msg,
               int code, const std::string& echo) {
    slef::RunManifest m;
    m.experiment = sub;
    m.status = status;
    m.error = msg;
    m.exit_code = code;
    m.config_echo = echo;
    std::error_code ec;
    fs::create_directories(out, ec);
    if (!ec) std::ofstream(out / "manifest.txt") << slef::format_manifest(m);
    std::cerr << "slef-lab: " << msg << "\n";
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical lab for -Delta u = f u^-gamma"};
    app.set_version_flag("--version", slef::kVersionTag);
    app.require_subcommand(1);

    std::string config_path, out_dir;
    int jobs = 1;
    std::vector<std::string> names = slef::experiment_names();
    for (const auto& n : names) {
        auto* sc = app.add_subcommand(n, n == "sweep" ? "run one experiment per value of [sweep] key" : "run the " + n + " experiment");
        sc->add_option("--config", config_path, "run config")->required()->check(CLI::ExistingFile);
        sc->add_option("--out", out_dir, "output directory (env SLEF_LAB_OUT)");
        sc->add_option("--jobs", jobs, "parallel sweep sub-runs")->check(CLI::PositiveNumber);
    }

    CLI11_PARSE(app, argc, argv);
    const std::string sub = app.get_subcommands().front()->get_name();

    if (out_dir.empty()) {
        if (const char* env = std::getenv("SLEF_LAB_OUT"); env && *env) out_dir = env;
        else out_dir = "slef-out/" + sub;
    }

    std::ifstream in(config_path);
    std::stringstream buf;
    buf << in.rdbuf();
    slef::RunConfig cfg;
    try {
        cfg = slef::parse_config(buf.str());
    } catch (const slef::ConfigError& e) {
        std::string where = e.line > 0 ? " (line " + std::to_string(e.line) + ", column " + std::to_string(e.column) + ")" : "";
        return fail_early(sub, out_dir, "invalid_config",
                          std::string(slef::config_error_name(e.kind)) + ": " + e.what() + where, 3, buf.str());
    }

    slef::RunManifest man;
    if (sub == "sweep") {
        if (!cfg.has("sweep", "key"))
            return fail_early(sub, out_dir, "invalid_config", "missing: sweep subcommand needs a [sweep] section", 3,
                              cfg.canonical());
        man = slef::sweep(cfg, out_dir, jobs);
    } else {
        if (cfg.experiment != sub)
            return fail_early(sub, out_dir, "invalid_config",
                              "range: config experiment '" + cfg.experiment + "' does not match subcommand '" + sub + "'", 3,
                              cfg.canonical());
        if (cfg.has("sweep", "key"))
            return fail_early(sub, out_dir, "invalid_config", "unknown_key: [sweep] only applies to the sweep subcommand",
                              3, cfg.canonical());
        man = slef::run(cfg, out_dir);
    }

    for (const auto& [k, v] : man.summary) std::cout << k << ": " << v << "\n";
    for (const auto& w : man.warnings) std::cerr << "warning: " << w << "\n";
    if (man.exit_code != 0) std::cerr << "slef-lab: " << man.status << ": " << man.error << "\n";
    std::cout << "manifest: " << (fs::path(out_dir) / "manifest.txt").string() << "\n";
    return man.exit_code;
}
