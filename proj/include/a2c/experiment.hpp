#pragma once

#include <memory>
#include <vector>

#include "a2c/config.hpp"
#include "a2c/pipeline.hpp"

namespace a2c {

/// Dataset loaded and partitioned per the config, D_A split into a_train / a_test.
struct Experiment {
    ExperimentConfig config;
    DatasetPartition partition;
};

Experiment prepare_experiment(const ExperimentConfig& config);

/// a_train split into the rejector's fitting part and its calibration hold-out.
struct RejectorSplit {
    std::vector<std::size_t> fit;
    std::vector<std::size_t> calibration;
};

RejectorSplit rejector_split(const Experiment& experiment);

/// Fits on the fitting part and calibrates theta_r on the hold-out.
RejectorModel train_rejector(const Experiment& experiment);
ClassifierModel train_classifier(const Experiment& experiment);

/// Uses saved models named in the config when present, otherwise trains.
PipelineComponents build_components(const Experiment& experiment, int tier, RateLevel rate);

}  // namespace a2c
