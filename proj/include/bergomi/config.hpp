#pragma once

// Run configuration: an INI file plus "section.key=value" overrides. Unknown
// sections or keys are errors so typos cannot silently fall back to defaults.
// See docs/config.md for the keys.

#include "bergomi/losses.hpp"
#include "bergomi/mc.hpp"
#include "bergomi/network.hpp"
#include "bergomi/trainer.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace bergomi {

struct EvalConfig {
    std::size_t points = 500;
    std::uint64_t seed = 7;
    double h = 0.25;
};

/// A one-dimensional slice in s through fixed inputs.
struct SliceConfig {
    ParamPoint base;
    std::size_t points = 41;
    std::optional<double> s_min; ///< defaults to the kind's test range
    std::optional<double> s_max;
};

struct RunConfig {
    Architecture arch;
    TrainConfig train;
    LossConfig loss;
    McConfig mc;
    EvalConfig eval;
    SliceConfig slice;
    std::filesystem::path vanilla_checkpoint; ///< frozen vanilla net for knock-in training
};

/// Parses INI text and applies overrides in order. Throws ConfigError.
RunConfig parse_config(const std::string& ini_text, const std::vector<std::string>& overrides = {});
RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

/// Canonical "section.key=value" listing of every resolved setting, one per
/// line, sorted. Hashing it identifies a run.
std::string canonical_text(const RunConfig& cfg);
std::uint64_t config_hash(const RunConfig& cfg);

} // namespace bergomi
