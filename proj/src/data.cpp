#include "a2c/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "a2c/error.hpp"
#include "a2c/rng.hpp"
#include "a2c/text.hpp"

namespace a2c {
namespace {

constexpr const char* kStage = "data";

const std::array<const char*, kKddFeatureColumns> kKddColumns = {
    "duration", "protocol_type", "service", "flag", "src_bytes", "dst_bytes", "land",
    "wrong_fragment", "urgent", "hot", "num_failed_logins", "logged_in", "num_compromised",
    "root_shell", "su_attempted", "num_root", "num_file_creations", "num_shells",
    "num_access_files", "num_outbound_cmds", "is_host_login", "is_guest_login", "count",
    "srv_count", "serror_rate", "srv_serror_rate", "rerror_rate", "srv_rerror_rate",
    "same_srv_rate", "diff_srv_rate", "srv_diff_host_rate", "dst_host_count",
    "dst_host_srv_count", "dst_host_same_srv_rate", "dst_host_diff_srv_rate",
    "dst_host_same_src_port_rate", "dst_host_srv_diff_host_rate", "dst_host_serror_rate",
    "dst_host_srv_serror_rate", "dst_host_rerror_rate", "dst_host_srv_rerror_rate"};

bool is_kdd_categorical(std::size_t column) { return column >= 1 && column <= 3; }

std::string strip_label(std::string_view raw) {
    auto s = text::trim(raw);
    if (!s.empty() && s.back() == '.') s.remove_suffix(1);
    return std::string(s);
}

[[noreturn]] void row_error(std::string_view source, std::size_t line, const std::string& what) {
    throw Error(kStage, std::string(source) + ":" + std::to_string(line) + ": " + what);
}

struct RawRows {
    std::vector<std::vector<double>> numeric;
    std::vector<std::array<std::string, 3>> categorical;
    std::vector<std::string> labels;
};

/// z-scores every column in place using population statistics.
void standardize(std::vector<std::vector<double>>& rows, std::size_t cols) {
    if (rows.empty()) return;
    const double n = static_cast<double>(rows.size());
    for (std::size_t j = 0; j < cols; ++j) {
        double mean = 0.0;
        for (const auto& r : rows) mean += r[j];
        mean /= n;
        double var = 0.0;
        for (const auto& r : rows) var += (r[j] - mean) * (r[j] - mean);
        const double sd = std::sqrt(var / n);
        for (auto& r : rows) r[j] = sd > 0.0 ? (r[j] - mean) / sd : 0.0;
    }
}

ClassRegistry build_registry(const std::vector<std::string>& labels) {
    std::set<std::string> names;
    for (const auto& l : labels) {
        if (!l.empty()) names.insert(l);
    }
    return ClassRegistry(std::vector<std::string>(names.begin(), names.end()));
}

void attach_labels(Dataset& ds, const std::vector<std::string>& labels) {
    ds.classes = build_registry(labels);
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        if (!labels[i].empty()) ds.samples[i].label = ds.classes.find(labels[i]);
    }
}

Dataset parse_kdd(std::istream& in, std::string_view source) {
    RawRows raw;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        const auto fields = text::split(text::trim(line), ',');
        if (fields.size() != kKddFeatureColumns + 1) {
            row_error(source, line_no, "expected " + std::to_string(kKddFeatureColumns + 1) + " fields, found " +
                                           std::to_string(fields.size()));
        }
        std::vector<double> numeric;
        numeric.reserve(kKddFeatureColumns - 3);
        std::array<std::string, 3> cats;
        for (std::size_t j = 0; j < kKddFeatureColumns; ++j) {
            if (is_kdd_categorical(j)) {
                cats[j - 1] = std::string(text::trim(fields[j]));
                continue;
            }
            auto v = text::parse_double(fields[j]);
            if (!v || !std::isfinite(*v)) {
                row_error(source, line_no, std::string("column ") + kKddColumns[j] + " is not a number: '" +
                                               std::string(fields[j]) + "'");
            }
            numeric.push_back(*v);
        }
        auto label = strip_label(fields.back());
        if (label.empty()) row_error(source, line_no, "empty label");
        raw.numeric.push_back(std::move(numeric));
        raw.categorical.push_back(std::move(cats));
        raw.labels.push_back(std::move(label));
    }
    if (raw.labels.empty()) throw Error(kStage, std::string(source) + ": file contains no rows");

    standardize(raw.numeric, kKddFeatureColumns - 3);

    std::array<std::vector<std::string>, 3> categories;
    for (int c = 0; c < 3; ++c) {
        std::set<std::string> seen;
        for (const auto& r : raw.categorical) seen.insert(r[c]);
        categories[c].assign(seen.begin(), seen.end());
    }

    Dataset ds;
    for (std::size_t j = 0; j < kKddFeatureColumns; ++j) {
        if (is_kdd_categorical(j)) {
            for (const auto& value : categories[j - 1]) ds.feature_names.push_back(std::string(kKddColumns[j]) + "=" + value);
        } else {
            ds.feature_names.emplace_back(kKddColumns[j]);
        }
    }

    ds.samples.reserve(raw.labels.size());
    for (std::size_t i = 0; i < raw.labels.size(); ++i) {
        Sample s;
        s.id = i;
        s.features.reserve(ds.feature_names.size());
        std::size_t numeric_col = 0;
        for (std::size_t j = 0; j < kKddFeatureColumns; ++j) {
            if (is_kdd_categorical(j)) {
                const auto& values = categories[j - 1];
                const auto& v = raw.categorical[i][j - 1];
                for (const auto& candidate : values) s.features.push_back(candidate == v ? 1.0 : 0.0);
            } else {
                s.features.push_back(raw.numeric[i][numeric_col++]);
            }
        }
        ds.samples.push_back(std::move(s));
    }
    attach_labels(ds, raw.labels);
    return ds;
}

Dataset parse_generic(std::istream& in, std::string_view source) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        for (auto f : text::split(text::trim(line), ',')) header.emplace_back(text::trim(f));
        break;
    }
    if (header.empty()) throw Error(kStage, std::string(source) + ": file is empty");
    const auto label_it = std::find(header.begin(), header.end(), "label");
    if (label_it == header.end()) throw Error(kStage, std::string(source) + ": header has no 'label' column");
    const auto label_col = static_cast<std::size_t>(label_it - header.begin());

    std::vector<std::vector<double>> rows;
    std::vector<std::string> labels;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        const auto fields = text::split(text::trim(line), ',');
        if (fields.size() != header.size()) {
            row_error(source, line_no, "expected " + std::to_string(header.size()) + " fields, found " +
                                           std::to_string(fields.size()));
        }
        std::vector<double> values;
        values.reserve(header.size() - 1);
        for (std::size_t j = 0; j < fields.size(); ++j) {
            if (j == label_col) continue;
            auto v = text::parse_double(fields[j]);
            if (!v || !std::isfinite(*v)) {
                row_error(source, line_no, "column " + header[j] + " is not a number: '" + std::string(fields[j]) + "'");
            }
            values.push_back(*v);
        }
        rows.push_back(std::move(values));
        labels.push_back(strip_label(fields[label_col]));
    }
    if (rows.empty()) throw Error(kStage, std::string(source) + ": file contains no data rows");

    standardize(rows, header.size() - 1);

    Dataset ds;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (j != label_col) ds.feature_names.push_back(header[j]);
    }
    ds.samples.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        ds.samples.push_back(Sample{i, std::move(rows[i]), std::nullopt});
    }
    attach_labels(ds, labels);
    return ds;
}

/// Per-class train counts: largest-remainder rounding to hit round(ratio*N)
/// while keeping at least one sample on each side.
std::vector<std::size_t> allocate_train_counts(const std::vector<std::size_t>& sizes, double ratio) {
    const std::size_t total = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
    const auto target = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(total)));
    std::vector<std::size_t> base(sizes.size());
    std::vector<double> exact(sizes.size());
    std::size_t sum = 0;
    for (std::size_t c = 0; c < sizes.size(); ++c) {
        exact[c] = ratio * static_cast<double>(sizes[c]);
        base[c] = std::clamp<std::size_t>(static_cast<std::size_t>(std::floor(exact[c])), 1, sizes[c] - 1);
        sum += base[c];
    }
    while (sum < target) {
        std::optional<std::size_t> pick;
        for (std::size_t c = 0; c < sizes.size(); ++c) {
            if (base[c] + 1 >= sizes[c]) continue;
            if (!pick || exact[c] - base[c] > exact[*pick] - base[*pick]) pick = c;
        }
        if (!pick) break;
        ++base[*pick];
        ++sum;
    }
    while (sum > target) {
        std::optional<std::size_t> pick;
        for (std::size_t c = 0; c < sizes.size(); ++c) {
            if (base[c] <= 1) continue;
            if (!pick || exact[c] - base[c] < exact[*pick] - base[*pick]) pick = c;
        }
        if (!pick) break;
        --base[*pick];
        --sum;
    }
    return base;
}

}  // namespace

ClassRegistry::ClassRegistry(std::vector<std::string> sorted_unique_names) : names_(std::move(sorted_unique_names)) {}

const std::string& ClassRegistry::name(ClassId id) const {
    if (id >= names_.size()) throw Error(kStage, "class id " + std::to_string(id) + " out of range");
    return names_[id];
}

std::optional<ClassId> ClassRegistry::find(std::string_view name) const {
    auto it = std::lower_bound(names_.begin(), names_.end(), name);
    if (it == names_.end() || *it != name) return std::nullopt;
    return static_cast<ClassId>(it - names_.begin());
}

DatasetFormat parse_dataset_format(std::string_view tag) {
    if (tag == "kdd-csv") return DatasetFormat::KddCsv;
    if (tag == "generic-csv") return DatasetFormat::GenericCsv;
    throw UsageError(kStage, "unknown dataset format '" + std::string(tag) + "' (expected kdd-csv or generic-csv)");
}

Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format) {
    std::ifstream in(path);
    if (!in) throw Error(kStage, "cannot open dataset " + path.string());
    return parse_dataset(in, format, path.string());
}

Dataset parse_dataset(std::istream& in, DatasetFormat format, std::string_view source) {
    return format == DatasetFormat::KddCsv ? parse_kdd(in, source) : parse_generic(in, source);
}

const char* group_name(Group g) {
    switch (g) {
        case Group::A: return "a";
        case Group::B: return "b";
        case Group::C: return "c";
    }
    return "?";
}

const std::vector<std::string>& ClassAssignment::of(Group g) const {
    switch (g) {
        case Group::A: return a;
        case Group::B: return b;
        case Group::C: return c;
    }
    return a;
}

void validate_assignment(const ClassAssignment& assignment) {
    std::map<std::string, int> seen;
    std::vector<std::string> overlaps;
    for (Group g : {Group::A, Group::B, Group::C}) {
        std::set<std::string> unique(assignment.of(g).begin(), assignment.of(g).end());
        for (const auto& name : unique) {
            if (++seen[name] == 2) overlaps.push_back(name);
        }
    }
    if (!overlaps.empty()) {
        throw InvariantError(kStage, "class sets overlap: " + text::join(overlaps, ", "));
    }
}

ClassAssignment kdd_assignment() {
    return {{"back", "land", "pod", "smurf", "teardrop"},
            {"buffer_overflow", "ftp_write", "guess_passwd", "imap", "ipsweep", "perl", "portsweep", "rootkit",
             "satan", "warezclient"},
            {"loadmodule", "multihop", "neptune", "nmap", "phf", "spy", "warezmaster"}};
}

ClassAssignment mnist_assignment() { return {{"0", "2", "4", "6", "8"}, {"1", "3", "5"}, {"7", "9"}}; }

ClassAssignment fmnist_assignment() {
    return {{"T-shirt/top", "Pullover", "Coat", "Shirt", "Bag"}, {"Trouser", "Dress", "Sandal"},
            {"Sneaker", "Ankle boot"}};
}

ClassAssignment cifar10_assignment() {
    return {{"airplane", "bird", "deer", "frog", "ship"}, {"automobile", "cat", "dog"}, {"horse", "truck"}};
}

std::optional<std::size_t> SubsetCaps::cap_for(Group g, const std::string& class_name) const {
    if (auto it = per_class.find(class_name); it != per_class.end()) return it->second;
    return per_group[static_cast<int>(g)];
}

bool SubsetCaps::empty() const {
    return per_class.empty() && std::none_of(per_group.begin(), per_group.end(), [](auto& c) { return c.has_value(); });
}

std::optional<Group> DatasetPartition::group_of(ClassId id) const {
    for (Group g : {Group::A, Group::B, Group::C}) {
        const auto& set = classes(g);
        if (std::binary_search(set.begin(), set.end(), id)) return g;
    }
    return std::nullopt;
}

std::vector<std::size_t> DatasetPartition::evaluation_indices() const {
    std::vector<std::size_t> out = a_test;
    out.insert(out.end(), d_b().begin(), d_b().end());
    out.insert(out.end(), d_c().begin(), d_c().end());
    return out;
}

DatasetPartition partition_dataset(std::shared_ptr<const Dataset> dataset, const ClassAssignment& assignment,
                                   const PartitionOptions& options) {
    if (!dataset) throw Error(kStage, "partition requires a dataset");
    validate_assignment(assignment);

    DatasetPartition p;
    p.dataset = dataset;
    p.assignment = assignment;
    p.options = options;

    std::vector<std::string> missing;
    std::map<ClassId, Group> route;
    for (Group g : {Group::A, Group::B, Group::C}) {
        auto& ids = p.class_sets[static_cast<int>(g)];
        for (const auto& name : assignment.of(g)) {
            auto id = dataset->classes.find(name);
            if (!id) {
                missing.push_back(name);
                continue;
            }
            ids.push_back(*id);
            route[*id] = g;
        }
        std::sort(ids.begin(), ids.end());
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    }
    if (!missing.empty()) {
        throw Error(kStage, "classes in assignment not present in dataset: " + text::join(missing, ", "));
    }

    const auto normal_id = dataset->classes.find(options.normal_class);
    std::map<ClassId, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < dataset->samples.size(); ++i) {
        const auto& s = dataset->samples[i];
        if (!s.label) {
            ++p.dropped["<unlabeled>"];
            continue;
        }
        if (route.count(*s.label)) {
            by_class[*s.label].push_back(i);
        } else if (options.include_normal && normal_id && *s.label == *normal_id) {
            p.reserve.push_back(i);
        } else {
            ++p.dropped[dataset->classes.name(*s.label)];
        }
    }

    for (auto& [cls, indices] : by_class) {
        const Group g = route.at(cls);
        const auto& name = dataset->classes.name(cls);
        if (auto cap = options.caps.cap_for(g, name); cap && indices.size() > *cap) {
            Rng rng(mix64(options.seed, hash_name(name)));
            shuffle(indices, rng);
            indices.resize(*cap);
            std::sort(indices.begin(), indices.end());
        }
        auto& dest = p.subsets[static_cast<int>(g)];
        dest.insert(dest.end(), indices.begin(), indices.end());
    }
    for (auto& s : p.subsets) std::sort(s.begin(), s.end());
    return p;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_split(
    const Dataset& dataset, const std::vector<std::size_t>& indices, double ratio, std::uint64_t seed,
    std::string_view stage) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw Error(std::string(stage), "split ratio must lie in (0, 1)");
    if (indices.empty()) throw Error(std::string(stage), "cannot split an empty sample set");

    std::map<ClassId, std::vector<std::size_t>> by_class;
    for (auto i : indices) {
        const auto& label = dataset.samples.at(i).label;
        if (!label) throw Error(std::string(stage), "sample " + std::to_string(i) + " has no label");
        by_class[*label].push_back(i);
    }
    std::vector<std::size_t> sizes;
    for (const auto& [cls, members] : by_class) {
        if (members.size() < 2) {
            throw Error(std::string(stage), "class '" + dataset.classes.name(cls) + "' has " +
                                                std::to_string(members.size()) + " sample(s); cannot stratify");
        }
        sizes.push_back(members.size());
    }
    const auto counts = allocate_train_counts(sizes, ratio);

    std::vector<std::size_t> train, test;
    std::size_t c = 0;
    for (auto& [cls, members] : by_class) {
        Rng rng(mix64(seed, cls));
        shuffle(members, rng);
        train.insert(train.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(counts[c]));
        test.insert(test.end(), members.begin() + static_cast<std::ptrdiff_t>(counts[c]), members.end());
        ++c;
    }
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {std::move(train), std::move(test)};
}

DatasetPartition split_known(DatasetPartition partition, double ratio, std::uint64_t seed) {
    auto [train, test] = stratified_split(*partition.dataset, partition.d_a(), ratio, seed, kStage);
    partition.a_train = std::move(train);
    partition.a_test = std::move(test);
    partition.split_ratio = ratio;
    partition.split_seed = seed;
    return partition;
}

std::string partition_manifest(const DatasetPartition& p) {
    std::map<std::string, std::string> kv;
    kv["format"] = "a2c-partition-1";
    kv["seed"] = std::to_string(p.options.seed);
    kv["dataset.samples"] = std::to_string(p.dataset->samples.size());
    kv["dataset.dimension"] = std::to_string(p.dataset->dimension());
    kv["include_normal"] = p.options.include_normal ? "true" : "false";
    for (Group g : {Group::A, Group::B, Group::C}) {
        const std::string key = group_name(g);
        kv["caps." + key] = p.options.caps.per_group[static_cast<int>(g)]
                                ? std::to_string(*p.options.caps.per_group[static_cast<int>(g)])
                                : "none";
        const auto& members = p.subset(g);
        kv[key + ".count"] = std::to_string(members.size());
        kv[key + ".indices"] = text::format_ranges(members);
        std::map<ClassId, std::size_t> counts;
        for (auto cls : p.classes(g)) counts[cls] = 0;
        for (auto i : members) ++counts[*p.sample(i).label];
        for (const auto& [cls, n] : counts) kv[key + ".class." + p.dataset->classes.name(cls)] = std::to_string(n);
    }
    for (const auto& [name, cap] : p.options.caps.per_class) kv["caps.class." + name] = std::to_string(cap);
    for (const auto& [name, n] : p.dropped) kv["dropped." + name] = std::to_string(n);
    kv["reserve.count"] = std::to_string(p.reserve.size());
    kv["reserve.indices"] = text::format_ranges(p.reserve);
    if (p.split_ratio) {
        kv["split.ratio"] = text::format_double(*p.split_ratio);
        kv["split.seed"] = std::to_string(*p.split_seed);
        kv["a_train.count"] = std::to_string(p.a_train.size());
        kv["a_train.indices"] = text::format_ranges(p.a_train);
        kv["a_test.count"] = std::to_string(p.a_test.size());
        kv["a_test.indices"] = text::format_ranges(p.a_test);
    }
    std::string out;
    for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
    return out;
}

FeatureMatrix gather_features(const Dataset& dataset, std::span<const std::size_t> indices) {
    FeatureMatrix m;
    m.rows = indices.size();
    m.cols = dataset.dimension();
    m.data.reserve(m.rows * m.cols);
    for (auto i : indices) {
        const auto& f = dataset.samples.at(i).features;
        m.data.insert(m.data.end(), f.begin(), f.end());
    }
    return m;
}

}  // namespace a2c
