// config.hpp: run configuration documents.
//
// {
//   "schema_version": 1,
//   "problem":  {"name": "blackhole", "params": {...}},
//   "kernel":   {"family": "beta", "beta": 0.75},
//   "method":   "gaussian" | "monte-carlo",
//   "accuracy": {"eps": 1e-4} | {"K": 8, "M": 16, "Q": 6} | {"K": 8, "Ns": 10000, "seed": 1},
//   "T": 1.0,
//   "output": "out",
//   "emit": ["json", "csv"]
// }
//
// With "monte-carlo", an eps-driven accuracy block may also carry "seed".

#pragma once

#include "inflchs/kernel.hpp"
#include "inflchs/sampling.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace inflchs {

inline constexpr int kConfigSchemaVersion = 1;

struct AccuracySpec {
    std::optional<double> eps;
    double K = 0.0;
    int M = 0;
    int Q = 0;
    std::int64_t Ns = 0;
    std::uint64_t seed = 0;

    bool explicit_plan() const { return !eps.has_value(); }
};

struct RunConfig {
    std::string problem;
    nlohmann::json params = nlohmann::json::object();
    kernel::Family family = kernel::Family::beta;
    double beta = kernel::kDefaultBeta;
    sampling::Method method = sampling::Method::gaussian;
    AccuracySpec accuracy;
    double T = 0.0;
    std::string output = "out";
    bool emit_json = true;
    bool emit_csv = false;

    kernel::KernelSpec make_kernel() const;
};

// Throws ConfigError naming the offending field by JSON pointer.
RunConfig parse_config(const nlohmann::json& doc);
// Throws IoError when unreadable, ConfigError when malformed.
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& cfg);

} // namespace inflchs
