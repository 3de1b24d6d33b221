#include "a2c/experiment.hpp"

#include "a2c/error.hpp"
#include "a2c/persistence.hpp"
#include "a2c/rng.hpp"

namespace a2c {

Experiment prepare_experiment(const ExperimentConfig& config) {
    validate_config(config);
    auto dataset = std::make_shared<const Dataset>(load_dataset(config.data_path, config.format));
    PartitionOptions options;
    options.caps = config.caps;
    options.seed = config.partition_seed;
    options.include_normal = config.include_normal;
    options.normal_class = config.normal_class;
    auto partition = partition_dataset(dataset, config.assignment, options);
    partition = split_known(std::move(partition), config.split_ratio, mix64(config.partition_seed, hash_name("split")));
    return {config, std::move(partition)};
}

RejectorSplit rejector_split(const Experiment& ex) {
    const auto& c = ex.config;
    if (c.calibration_fraction == 0.0) return {ex.partition.a_train, ex.partition.a_train};
    auto [fit, calibration] = stratified_split(*ex.partition.dataset, ex.partition.a_train, 1.0 - c.calibration_fraction,
                                               mix64(c.training_seed, hash_name("calibration")), "rejector");
    return {std::move(fit), std::move(calibration)};
}

RejectorModel train_rejector(const Experiment& ex) {
    const auto split = rejector_split(ex);
    auto model = fit_rejector(ex.partition, split.fit, ex.config.rejector_kind, ex.config.rejector_hyper);
    return calibrate_threshold(std::move(model), gather_features(*ex.partition.dataset, split.calibration), ex.config.q);
}

ClassifierModel train_classifier(const Experiment& ex) { return fit_classifier(ex.partition, ex.config.classifier); }

PipelineComponents build_components(const Experiment& ex, int tier, RateLevel rate) {
    PipelineComponents c;
    c.rejector = ex.config.rejector_model ? load_rejector(*ex.config.rejector_model) : train_rejector(ex);
    c.classifier = ex.config.classifier_model ? load_classifier(*ex.config.classifier_model) : train_classifier(ex);
    c.expert = build_expert(tier, ex.partition);
    c.coex = {rate, ex.config.draw_seed};
    validate_components(c, ex.partition);
    return c;
}

}  // namespace a2c
