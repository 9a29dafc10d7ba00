#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "malurl/dataset.hpp"
#include "malurl/rbfn.hpp"
#include "malurl/som_rmo.hpp"
#include "malurl/tabu.hpp"

namespace malurl {

enum class ClassificationMode { binary, multiclass };

std::string_view to_string(ClassificationMode mode);
std::string_view to_string(FeatureMode mode);

struct PipelineConfig {
    SomConfig som;
    RmoConfig rmo;
    GdConfig gd;
    TabuConfig tabu;
    std::size_t rbf_centers = 100;
    FeatureMode feature_mode = FeatureMode::concat;
    ClassificationMode mode = ClassificationMode::binary;
    SplitRatios split;
    CsvColumns columns;
    std::uint64_t seed = 42;

    // Stage seeds are the master seed plus a fixed per-stage offset.
    std::uint64_t split_seed() const { return seed + 1; }
    std::uint64_t som_seed() const { return seed + 2; }
    std::uint64_t rbfn_seed() const { return seed + 3; }
    std::uint64_t tabu_seed() const { return seed + 4; }

    void validate() const;
};

/// Parses `key = value` lines ('#' starts a comment). Unknown keys, repeated
/// keys and out-of-range values are errors naming the line; omitted keys keep
/// their defaults.
PipelineConfig parse_config(std::string_view text);

/// Reads a config file; an empty path yields the defaults.
PipelineConfig load_config(const std::filesystem::path& path);

/// Canonical text of every key; parse_config(config_text(c)) reproduces c.
std::string config_text(const PipelineConfig& config);

/// Every key with its default value and a short description.
std::string config_reference();

}  // namespace malurl
