#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "a2c/types.hpp"

namespace a2c {

/// Class names of one dataset. Ids are assigned in sorted name order so they
/// do not depend on row order in the source file.
class ClassRegistry {
public:
    ClassRegistry() = default;
    explicit ClassRegistry(std::vector<std::string> sorted_unique_names);

    std::size_t size() const noexcept { return names_.size(); }
    const std::string& name(ClassId id) const;
    ClassLabel label(ClassId id) const { return {id, name(id)}; }
    std::optional<ClassId> find(std::string_view name) const;
    const std::vector<std::string>& names() const noexcept { return names_; }

private:
    std::vector<std::string> names_;
};

struct Dataset {
    std::vector<std::string> feature_names;
    ClassRegistry classes;
    std::vector<Sample> samples;

    std::size_t dimension() const noexcept { return feature_names.size(); }
};

enum class DatasetFormat { KddCsv, GenericCsv };

/// Accepts "kdd-csv" and "generic-csv"; anything else is a UsageError.
DatasetFormat parse_dataset_format(std::string_view tag);

/// Loads and preprocesses a dataset: KDD categorical columns are one-hot
/// encoded, numeric columns are z-scored with statistics of the loaded file,
/// and a trailing '.' is stripped from labels.
Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format);
Dataset parse_dataset(std::istream& in, DatasetFormat format, std::string_view source = "<stream>");

/// Number of KDD feature columns (without the label).
inline constexpr std::size_t kKddFeatureColumns = 41;

enum class Group { A = 0, B = 1, C = 2 };

const char* group_name(Group g);

/// Class names per subset. Sets must be pairwise disjoint.
struct ClassAssignment {
    std::vector<std::string> a;
    std::vector<std::string> b;
    std::vector<std::string> c;

    const std::vector<std::string>& of(Group g) const;
};

/// Throws InvariantError naming the classes that appear in more than one set.
void validate_assignment(const ClassAssignment& assignment);

/// Table-2 presets.
ClassAssignment kdd_assignment();
ClassAssignment mnist_assignment();
ClassAssignment fmnist_assignment();
ClassAssignment cifar10_assignment();

/// Per-class sample caps. A class-specific cap overrides its group cap.
struct SubsetCaps {
    std::array<std::optional<std::size_t>, 3> per_group{};
    std::map<std::string, std::size_t> per_class;

    std::optional<std::size_t> cap_for(Group g, const std::string& class_name) const;
    bool empty() const;
};

struct PartitionOptions {
    SubsetCaps caps;
    std::uint64_t seed = 0;
    /// Keep samples of `normal_class` in `reserve` instead of dropping them.
    bool include_normal = false;
    std::string normal_class = "normal";
};

/// Samples routed into D_A/D_B/D_C by label. Index vectors refer to
/// dataset->samples and are kept sorted ascending.
struct DatasetPartition {
    std::shared_ptr<const Dataset> dataset;
    ClassAssignment assignment;
    std::array<std::vector<ClassId>, 3> class_sets;
    std::array<std::vector<std::size_t>, 3> subsets;
    std::vector<std::size_t> reserve;
    std::vector<std::size_t> a_train;
    std::vector<std::size_t> a_test;
    std::map<std::string, std::size_t> dropped;
    PartitionOptions options;
    std::optional<double> split_ratio;
    std::optional<std::uint64_t> split_seed;

    const std::vector<std::size_t>& d_a() const { return subsets[0]; }
    const std::vector<std::size_t>& d_b() const { return subsets[1]; }
    const std::vector<std::size_t>& d_c() const { return subsets[2]; }
    const std::vector<std::size_t>& subset(Group g) const { return subsets[static_cast<int>(g)]; }
    const std::vector<ClassId>& classes(Group g) const { return class_sets[static_cast<int>(g)]; }

    const Sample& sample(std::size_t index) const { return dataset->samples[index]; }
    std::optional<Group> group_of(ClassId id) const;

    /// a_test followed by D_B and D_C: the evaluation set used by every report.
    std::vector<std::size_t> evaluation_indices() const;
};

DatasetPartition partition_dataset(std::shared_ptr<const Dataset> dataset, const ClassAssignment& assignment,
                                   const PartitionOptions& options);

/// Stratified train/test split of D_A. |a_train| = round(ratio * |D_A|).
DatasetPartition split_known(DatasetPartition partition, double ratio = 0.8, std::uint64_t seed = 0);

/// Stratified split of an arbitrary index set; used for the rejector's
/// calibration hold-out as well as split_known.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_split(
    const Dataset& dataset, const std::vector<std::size_t>& indices, double ratio, std::uint64_t seed,
    std::string_view stage);

/// Canonical manifest: sorted `key = value` lines, LF endings.
std::string partition_manifest(const DatasetPartition& partition);

FeatureMatrix gather_features(const Dataset& dataset, std::span<const std::size_t> indices);

}  // namespace a2c
