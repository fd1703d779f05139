#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "slef/config.hpp"

namespace slef {

inline constexpr const char* kVersionTag = "slef-lab 0.3.0";

struct OutputFile {
    std::string name;
    std::string sha256;
    std::size_t bytes = 0;
};

struct RunManifest {
    std::string experiment;
    std::string version = kVersionTag;
    std::string config_echo;
    std::vector<std::pair<std::string, double>> timings;  // seconds per stage
    std::vector<OutputFile> files;                        // excludes manifest.txt itself
    std::vector<std::pair<std::string, std::string>> summary;
    std::vector<std::string> warnings;
    std::string status = "ok";  // ok | convergence_failure | invalid_config | error
    std::string error;
    int exit_code = 0;
};

std::string sha256_hex(const std::string& bytes);

// Runs one experiment into out_dir: data CSVs, summary.txt and manifest.txt.
// Never throws for experiment failures: they land in the manifest and exit_code.
RunManifest run(const RunConfig& cfg, const std::filesystem::path& out_dir);

// One sub-run per value of [sweep] key, each in out_dir/run_<i>; aggregates sweep.csv.
RunManifest sweep(const RunConfig& cfg, const std::filesystem::path& out_dir, int jobs = 1);

std::string format_manifest(const RunManifest& m);

}  // namespace slef
