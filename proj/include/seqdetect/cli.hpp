#pragma once

#include "seqdetect/io.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace seqdetect {

struct ExperimentConfig {
    std::string action; // solve, rates, mc, sweep, adaptive
    std::optional<ProblemSpec> spec;
    std::optional<BesovSpec> besov;
    json rule = json::object();        // selection: {"kind": ..., builder parameters}
    json alternative = json::object(); // {"eta": [...]} or {"scale": c}
    json rates = json::object();
    json sweep = json::object();
    json adaptive = json::object();
    std::uint64_t reps = 10000;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    std::string format = "json";
    bool rows = false;
};

// Validates and fills defaults. Throws ConfigError.
ExperimentConfig parse_config(const json& j, const std::string& action);

// Everything that determines the output, for embedding in artifacts.
json resolved_config(const ExperimentConfig& cfg);

struct Artifact {
    std::string suffix; // appended to the output path; empty for the main file
    std::string content;
};

std::vector<Artifact> run(const ExperimentConfig& cfg);

// Full command line front-end; returns the process exit status.
int cli_main(int argc, char** argv);

} // namespace seqdetect
