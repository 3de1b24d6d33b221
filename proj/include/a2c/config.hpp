#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "a2c/classifier.hpp"
#include "a2c/coex.hpp"
#include "a2c/data.hpp"
#include "a2c/metrics.hpp"
#include "a2c/pipeline.hpp"
#include "a2c/rejector.hpp"

namespace a2c {

struct PersonaSettings {
    std::vector<std::string> names = {"Jordan", "Alex", "John"};
    std::size_t budget = 12;
    std::string model = "gpt-4";
    std::size_t samples = 7;
    /// "scripted" replays `script`; "http" uses A2C_CHAT_ENDPOINT / A2C_CHAT_KEY.
    std::string backend = "scripted";
    std::optional<std::filesystem::path> script;
};

/// One experiment setup shared by every command. Relative paths are resolved
/// against the directory of the config file.
struct ExperimentConfig {
    std::filesystem::path data_path;
    DatasetFormat format = DatasetFormat::KddCsv;
    bool include_normal = false;
    std::string normal_class = "normal";

    std::string assignment_preset;  // empty when listed explicitly
    ClassAssignment assignment;
    SubsetCaps caps;

    std::uint64_t partition_seed = 0;
    std::uint64_t training_seed = 0;
    std::uint64_t draw_seed = 0;

    ScorerKind rejector_kind = ScorerKind::KnnDistance;
    double q = 0.05;
    RejectorHyper rejector_hyper;
    double calibration_fraction = 0.2;

    ClassifierConfig classifier;

    double split_ratio = 0.8;
    std::vector<int> tiers = {1, 2, 3};
    std::vector<RateLevel> rates = {RateLevel::None, RateLevel::R1, RateLevel::R2, RateLevel::R3, RateLevel::R4};
    DrawSchedule schedule = DrawSchedule::Stochastic;
    Mode mode = Mode::Deferral;
    int tier = 3;
    RateLevel rate = RateLevel::None;
    std::filesystem::path out = "a2c-out";

    std::optional<std::filesystem::path> rejector_model;
    std::optional<std::filesystem::path> classifier_model;

    PersonaSettings persona;
};

/// Parses `[section]` headers and `key = value` lines; `#` starts a comment.
/// Unknown sections or keys and missing seeds are UsageErrors.
ExperimentConfig parse_config(std::string_view text, std::string_view source = "<config>",
                              const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Referenced files exist, class sets are disjoint, numeric ranges hold.
void validate_config(const ExperimentConfig& config);

/// Canonical config text with every field spelled out; parse_config of the
/// result reproduces the same config.
std::string config_snapshot(const ExperimentConfig& config);

}  // namespace a2c
