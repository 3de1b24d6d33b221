#include "a2c/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include "a2c/error.hpp"
#include "a2c/rng.hpp"
#include "a2c/text.hpp"

namespace a2c {
namespace {

constexpr const char* kStage = "synthetic";

struct KddProfile {
    const char* protocol;
    const char* service;
    const char* flag;
};

const std::map<std::string, KddProfile>& kdd_profiles() {
    static const std::map<std::string, KddProfile> profiles = {
        {"back", {"tcp", "http", "SF"}},           {"buffer_overflow", {"tcp", "telnet", "SF"}},
        {"ftp_write", {"tcp", "ftp", "SF"}},       {"guess_passwd", {"tcp", "telnet", "RSTO"}},
        {"imap", {"tcp", "imap4", "SH"}},          {"ipsweep", {"icmp", "eco_i", "SF"}},
        {"land", {"tcp", "finger", "S0"}},         {"loadmodule", {"tcp", "telnet", "SF"}},
        {"multihop", {"tcp", "ftp_data", "SF"}},   {"neptune", {"tcp", "private", "S0"}},
        {"nmap", {"udp", "private", "SF"}},        {"normal", {"tcp", "http", "SF"}},
        {"perl", {"tcp", "telnet", "SF"}},         {"phf", {"tcp", "http", "SF"}},
        {"pod", {"icmp", "ecr_i", "SF"}},          {"portsweep", {"tcp", "private", "REJ"}},
        {"rootkit", {"tcp", "telnet", "SF"}},      {"satan", {"tcp", "other", "REJ"}},
        {"smurf", {"icmp", "ecr_i", "SF"}},        {"spy", {"tcp", "telnet", "SF"}},
        {"teardrop", {"udp", "private", "SF"}},    {"warezclient", {"tcp", "ftp_data", "SF"}},
        {"warezmaster", {"tcp", "ftp", "SF"}},
    };
    return profiles;
}

const char* const kServices[] = {"http", "private", "ecr_i", "smtp", "ftp_data", "other"};

}  // namespace

Dataset make_gaussian_dataset(const GaussianSpec& spec) {
    if (spec.classes == 0 || spec.per_class == 0) throw UsageError(kStage, "need at least one class and one sample");
    if (spec.classes > spec.dimension) {
        throw UsageError(kStage, "dimension " + std::to_string(spec.dimension) + " cannot hold " +
                                     std::to_string(spec.classes) + " axis-aligned centers");
    }
    if (!(spec.sigma > 0.0)) throw UsageError(kStage, "sigma must be positive");
    Dataset ds;
    for (std::size_t j = 0; j < spec.dimension; ++j) ds.feature_names.push_back("x" + std::to_string(j));
    std::vector<std::string> names;
    for (std::size_t c = 0; c < spec.classes; ++c) names.push_back(spec.prefix + std::to_string(c));
    auto sorted = names;
    std::sort(sorted.begin(), sorted.end());
    ds.classes = ClassRegistry(sorted);

    const double offset = spec.separation * spec.sigma / std::sqrt(2.0);
    Rng rng(mix64(spec.seed, hash_name("gaussian")));
    SampleId id = 0;
    for (std::size_t c = 0; c < spec.classes; ++c) {
        const auto label = ds.classes.find(names[c]);
        for (std::size_t i = 0; i < spec.per_class; ++i) {
            Sample s;
            s.id = id++;
            s.label = label;
            s.features.resize(spec.dimension);
            for (std::size_t j = 0; j < spec.dimension; ++j) {
                s.features[j] = spec.sigma * standard_normal(rng) + (j == c ? offset : 0.0);
            }
            ds.samples.push_back(std::move(s));
        }
    }
    return ds;
}

void write_generic_csv(const Dataset& dataset, std::ostream& out) {
    for (const auto& f : dataset.feature_names) out << f << ",";
    out << "label\n";
    for (const auto& s : dataset.samples) {
        for (double v : s.features) out << text::format_double(v) << ",";
        out << (s.label ? dataset.classes.name(*s.label) : std::string()) << "\n";
    }
}

const std::vector<std::pair<std::string, std::size_t>>& kdd_ten_percent_counts() {
    static const std::vector<std::pair<std::string, std::size_t>> counts = {
        {"smurf", 280790},    {"neptune", 107201},    {"normal", 97278},  {"back", 2203},
        {"satan", 1589},      {"ipsweep", 1247},      {"portsweep", 1040}, {"warezclient", 1020},
        {"teardrop", 979},    {"pod", 264},           {"nmap", 231},      {"guess_passwd", 53},
        {"buffer_overflow", 30}, {"land", 21},        {"warezmaster", 20}, {"imap", 12},
        {"rootkit", 10},      {"loadmodule", 9},      {"ftp_write", 8},   {"multihop", 7},
        {"phf", 4},           {"perl", 3},            {"spy", 2},
    };
    return counts;
}

void write_synthetic_kdd(std::ostream& out, const KddSynthOptions& options) {
    if (!(options.scale > 0.0)) throw UsageError(kStage, "scale must be positive");
    constexpr std::size_t kNumeric = kKddFeatureColumns - 3;
    for (const auto& [name, full] : kdd_ten_percent_counts()) {
        const auto& profile = kdd_profiles().at(name);
        const auto n = std::max(options.min_per_class,
                                static_cast<std::size_t>(std::llround(options.scale * static_cast<double>(full))));
        Rng shape(mix64(options.seed, hash_name(name)));
        std::vector<double> mean(kNumeric), spread(kNumeric);
        for (std::size_t j = 0; j < kNumeric; ++j) {
            mean[j] = 10.0 * unit_interval(shape());
            spread[j] = 0.5 + unit_interval(shape());
        }
        Rng rng(mix64(options.seed ^ 0x5eedULL, hash_name(name)));
        for (std::size_t i = 0; i < n; ++i) {
            const char* service = profile.service;
            if (unit_interval(rng()) < 0.1) service = kServices[uniform_index(rng, std::size(kServices))];
            std::size_t j = 0;
            auto numeric = [&] {
                const double v = std::max(0.0, mean[j] + spread[j] * standard_normal(rng));
                ++j;
                return text::format_double(std::round(v * 100.0) / 100.0);
            };
            out << numeric() << "," << profile.protocol << "," << service << "," << profile.flag;
            while (j < kNumeric) out << "," << numeric();
            out << "," << name << ".\n";
        }
    }
}

}  // namespace a2c
