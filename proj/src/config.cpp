#include "a2c/config.hpp"

#include <map>
#include <set>
#include <sstream>

#include "a2c/error.hpp"
#include "a2c/persistence.hpp"
#include "a2c/text.hpp"

namespace a2c {
namespace {

constexpr const char* kStage = "config";

const std::set<std::string> kSections = {"data", "assignment", "caps", "seeds", "rejector",
                                         "classifier", "experiment", "models", "persona"};

class Entries {
public:
    explicit Entries(std::string source) : source_(std::move(source)) {}

    void put(const std::string& key, std::string value, std::size_t line) {
        if (values_.count(key)) fail(line, "duplicate key '" + key + "'");
        values_[key] = {std::move(value), line};
    }

    std::optional<std::string> take(const std::string& key) {
        auto it = values_.find(key);
        if (it == values_.end()) return std::nullopt;
        used_.insert(key);
        return it->second.first;
    }

    std::uint64_t take_uint(const std::string& key, std::uint64_t fallback) {
        auto v = take(key);
        if (!v) return fallback;
        auto n = text::parse_uint(*v);
        if (!n) fail(line_of(key), "'" + key + "' must be a non-negative integer, got '" + *v + "'");
        return *n;
    }

    double take_double(const std::string& key, double fallback) {
        auto v = take(key);
        if (!v) return fallback;
        auto d = text::parse_double(*v);
        if (!d) fail(line_of(key), "'" + key + "' must be a number, got '" + *v + "'");
        return *d;
    }

    bool take_bool(const std::string& key, bool fallback) {
        auto v = take(key);
        if (!v) return fallback;
        const auto s = text::to_lower(*v);
        if (s == "true" || s == "yes" || s == "1") return true;
        if (s == "false" || s == "no" || s == "0") return false;
        fail(line_of(key), "'" + key + "' must be true or false, got '" + *v + "'");
    }

    /// Keys under `prefix` not yet consumed.
    std::vector<std::string> keys_with_prefix(const std::string& prefix) const {
        std::vector<std::string> out;
        for (const auto& [k, v] : values_) {
            if (k.rfind(prefix, 0) == 0 && !used_.count(k)) out.push_back(k);
        }
        return out;
    }

    void check_all_used() const {
        for (const auto& [k, v] : values_) {
            if (!used_.count(k)) fail(v.second, "unknown key '" + k + "'");
        }
    }

    std::size_t line_of(const std::string& key) const {
        auto it = values_.find(key);
        return it == values_.end() ? 0 : it->second.second;
    }

    template <typename F>
    auto wrap(const std::string& key, F&& f) -> decltype(f()) {
        try {
            return f();
        } catch (const UsageError& e) {
            fail(line_of(key), "'" + key + "': " + e.what());
        }
    }

    [[noreturn]] void fail(std::size_t line, const std::string& what) const {
        throw UsageError(kStage, source_ + (line ? ":" + std::to_string(line) : std::string()) + ": " + what);
    }

private:
    std::string source_;
    std::map<std::string, std::pair<std::string, std::size_t>> values_;
    std::set<std::string> used_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value) {
    std::filesystem::path p(value);
    if (p.is_relative() && !base.empty()) p = base / p;
    return p.lexically_normal();
}

std::string list(const std::vector<std::string>& v) { return text::join(v, ","); }

}  // namespace

ExperimentConfig parse_config(std::string_view content, std::string_view source_view,
                              const std::filesystem::path& base_dir) {
    const std::string source(source_view);
    Entries e(source);
    std::string section;
    std::size_t line_no = 0;
    std::istringstream in{std::string(content)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++line_no;
        auto line = raw;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto t = text::trim(line);
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']') e.fail(line_no, "malformed section header");
            section = std::string(text::trim(t.substr(1, t.size() - 2)));
            if (!kSections.count(section)) e.fail(line_no, "unknown section [" + section + "]");
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string_view::npos) e.fail(line_no, "expected 'key = value'");
        if (section.empty()) e.fail(line_no, "key outside of a section");
        const auto key = std::string(text::trim(t.substr(0, eq)));
        if (key.empty()) e.fail(line_no, "empty key");
        e.put(section + "." + key, std::string(text::trim(t.substr(eq + 1))), line_no);
    }

    ExperimentConfig c;
    if (auto p = e.take("data.path")) c.data_path = resolve(base_dir, *p);
    else e.fail(0, "data.path is required");
    if (auto f = e.take("data.format")) c.format = e.wrap("data.format", [&] { return parse_dataset_format(*f); });
    c.include_normal = e.take_bool("data.include_normal", false);
    if (auto n = e.take("data.normal_class")) c.normal_class = *n;

    if (auto preset = e.take("assignment.preset")) {
        c.assignment_preset = *preset;
        if (*preset == "kdd") c.assignment = kdd_assignment();
        else if (*preset == "mnist") c.assignment = mnist_assignment();
        else if (*preset == "fmnist") c.assignment = fmnist_assignment();
        else if (*preset == "cifar10") c.assignment = cifar10_assignment();
        else e.fail(e.line_of("assignment.preset"), "unknown preset '" + *preset + "' (kdd, mnist, fmnist, cifar10)");
        for (auto k : {"assignment.a", "assignment.b", "assignment.c"}) {
            if (e.take(k)) e.fail(e.line_of(k), "preset and explicit class lists are mutually exclusive");
        }
    } else {
        auto a = e.take("assignment.a"), b = e.take("assignment.b"), cc = e.take("assignment.c");
        if (!a || !b || !cc) e.fail(0, "assignment needs either preset or all of a, b and c");
        c.assignment = {text::split_list(*a), text::split_list(*b), text::split_list(*cc)};
    }

    int g = 0;
    for (auto k : {"caps.a", "caps.b", "caps.c"}) {
        if (e.take(k)) c.caps.per_group[g] = e.take_uint(k, 0);
        ++g;
    }
    for (const auto& k : e.keys_with_prefix("caps.class.")) {
        c.caps.per_class[k.substr(std::string("caps.class.").size())] = e.take_uint(k, 0);
    }

    for (auto k : {"seeds.partition", "seeds.training", "seeds.draws"}) {
        if (!e.take(k)) e.fail(0, std::string(k) + " is required; seeds must be explicit");
    }
    c.partition_seed = e.take_uint("seeds.partition", 0);
    c.training_seed = e.take_uint("seeds.training", 0);
    c.draw_seed = e.take_uint("seeds.draws", 0);

    if (auto k = e.take("rejector.kind")) c.rejector_kind = e.wrap("rejector.kind", [&] { return parse_scorer_kind(*k); });
    c.q = e.take_double("rejector.q", c.q);
    c.rejector_hyper.k = e.take_uint("rejector.k", c.rejector_hyper.k);
    c.rejector_hyper.components = e.take_uint("rejector.components", c.rejector_hyper.components);
    c.calibration_fraction = e.take_double("rejector.calibration_fraction", c.calibration_fraction);

    if (auto k = e.take("classifier.kind")) {
        c.classifier.kind = e.wrap("classifier.kind", [&] { return parse_classifier_kind(*k); });
    }
    c.classifier.epochs = e.take_uint("classifier.epochs", c.classifier.epochs);
    c.classifier.learning_rate = e.take_double("classifier.learning_rate", c.classifier.learning_rate);
    c.classifier.hidden = e.take_uint("classifier.hidden", c.classifier.hidden);
    c.classifier.seed = c.training_seed;

    c.split_ratio = e.take_double("experiment.split_ratio", c.split_ratio);
    if (auto t = e.take("experiment.tiers")) {
        c.tiers.clear();
        for (const auto& s : text::split_list(*t)) {
            auto v = text::parse_uint(s);
            if (!v || *v < 1 || *v > 3) e.fail(e.line_of("experiment.tiers"), "tiers must be 1, 2 or 3");
            c.tiers.push_back(static_cast<int>(*v));
        }
    }
    if (auto r = e.take("experiment.rates")) {
        c.rates.clear();
        for (const auto& s : text::split_list(*r)) {
            c.rates.push_back(e.wrap("experiment.rates", [&] { return parse_rate_level(s); }));
        }
    }
    if (auto s = e.take("experiment.schedule")) {
        if (*s == "stochastic") c.schedule = DrawSchedule::Stochastic;
        else if (*s == "stratified") c.schedule = DrawSchedule::Stratified;
        else e.fail(e.line_of("experiment.schedule"), "schedule must be stochastic or stratified");
    }
    if (auto m = e.take("experiment.mode")) c.mode = e.wrap("experiment.mode", [&] { return parse_mode(*m); });
    c.tier = static_cast<int>(e.take_uint("experiment.tier", static_cast<std::uint64_t>(c.tier)));
    if (auto r = e.take("experiment.rate")) c.rate = e.wrap("experiment.rate", [&] { return parse_rate_level(*r); });
    if (auto o = e.take("experiment.out")) c.out = resolve(base_dir, *o);

    if (auto m = e.take("models.rejector")) c.rejector_model = resolve(base_dir, *m);
    if (auto m = e.take("models.classifier")) c.classifier_model = resolve(base_dir, *m);

    if (auto n = e.take("persona.names")) c.persona.names = text::split_list(*n);
    c.persona.budget = e.take_uint("persona.budget", c.persona.budget);
    if (auto m = e.take("persona.model")) c.persona.model = *m;
    c.persona.samples = e.take_uint("persona.samples", c.persona.samples);
    if (auto b = e.take("persona.backend")) {
        if (*b != "scripted" && *b != "http") e.fail(e.line_of("persona.backend"), "backend must be scripted or http");
        c.persona.backend = *b;
    }
    if (auto s = e.take("persona.script")) c.persona.script = resolve(base_dir, *s);

    e.check_all_used();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    if (!std::filesystem::is_regular_file(path)) throw UsageError(kStage, "config file not found: " + path.string());
    return parse_config(read_text_file(path), path.string(), std::filesystem::absolute(path).parent_path());
}

void validate_config(const ExperimentConfig& c) {
    validate_assignment(c.assignment);
    auto must_exist = [](const std::filesystem::path& p, const char* what) {
        if (!std::filesystem::is_regular_file(p)) {
            throw UsageError(kStage, std::string(what) + " not found: " + p.string());
        }
    };
    must_exist(c.data_path, "dataset");
    if (c.rejector_model) must_exist(*c.rejector_model, "rejector model");
    if (c.classifier_model) must_exist(*c.classifier_model, "classifier model");
    if (c.persona.script) must_exist(*c.persona.script, "persona script");
    if (!(c.q > 0.0 && c.q < 1.0)) throw UsageError(kStage, "rejector.q must lie in (0, 1)");
    if (!(c.calibration_fraction >= 0.0 && c.calibration_fraction < 1.0)) {
        throw UsageError(kStage, "rejector.calibration_fraction must lie in [0, 1)");
    }
    if (!(c.split_ratio > 0.0 && c.split_ratio < 1.0)) throw UsageError(kStage, "experiment.split_ratio must lie in (0, 1)");
    if (c.tier < 1 || c.tier > 3) throw UsageError(kStage, "experiment.tier must be 1, 2 or 3");
    if (c.tiers.empty() || c.rates.empty()) throw UsageError(kStage, "experiment.tiers and experiment.rates must be non-empty");
    if (!(c.classifier.learning_rate > 0.0)) throw UsageError(kStage, "classifier.learning_rate must be positive");
    if (c.persona.budget == 0) throw UsageError(kStage, "persona.budget must be at least 1");
}

std::string config_snapshot(const ExperimentConfig& c) {
    std::ostringstream os;
    os << "[data]\n";
    os << "path = " << c.data_path.string() << "\n";
    os << "format = " << (c.format == DatasetFormat::KddCsv ? "kdd-csv" : "generic-csv") << "\n";
    os << "include_normal = " << (c.include_normal ? "true" : "false") << "\n";
    os << "normal_class = " << c.normal_class << "\n";
    os << "\n[assignment]\n";
    if (!c.assignment_preset.empty()) {
        os << "preset = " << c.assignment_preset << "\n";
    } else {
        os << "a = " << list(c.assignment.a) << "\n";
        os << "b = " << list(c.assignment.b) << "\n";
        os << "c = " << list(c.assignment.c) << "\n";
    }
    if (!c.caps.empty()) {
        os << "\n[caps]\n";
        const char* names[] = {"a", "b", "c"};
        for (int g = 0; g < 3; ++g) {
            if (c.caps.per_group[g]) os << names[g] << " = " << *c.caps.per_group[g] << "\n";
        }
        for (const auto& [name, cap] : c.caps.per_class) os << "class." << name << " = " << cap << "\n";
    }
    os << "\n[seeds]\n";
    os << "partition = " << c.partition_seed << "\n";
    os << "training = " << c.training_seed << "\n";
    os << "draws = " << c.draw_seed << "\n";
    os << "\n[rejector]\n";
    os << "kind = " << scorer_name(c.rejector_kind) << "\n";
    os << "q = " << text::format_double(c.q) << "\n";
    os << "k = " << c.rejector_hyper.k << "\n";
    os << "components = " << c.rejector_hyper.components << "\n";
    os << "calibration_fraction = " << text::format_double(c.calibration_fraction) << "\n";
    os << "\n[classifier]\n";
    os << "kind = " << classifier_kind_name(c.classifier.kind) << "\n";
    os << "epochs = " << c.classifier.epochs << "\n";
    os << "learning_rate = " << text::format_double(c.classifier.learning_rate) << "\n";
    os << "hidden = " << c.classifier.hidden << "\n";
    os << "\n[experiment]\n";
    os << "split_ratio = " << text::format_double(c.split_ratio) << "\n";
    std::vector<std::string> tiers, rates;
    for (int t : c.tiers) tiers.push_back(std::to_string(t));
    for (auto r : c.rates) rates.push_back(rate_level_name(r));
    os << "tiers = " << list(tiers) << "\n";
    os << "rates = " << list(rates) << "\n";
    os << "schedule = " << (c.schedule == DrawSchedule::Stochastic ? "stochastic" : "stratified") << "\n";
    os << "mode = " << mode_name(c.mode) << "\n";
    os << "tier = " << c.tier << "\n";
    os << "rate = " << rate_level_name(c.rate) << "\n";
    os << "out = " << c.out.string() << "\n";
    if (c.rejector_model || c.classifier_model) {
        os << "\n[models]\n";
        if (c.rejector_model) os << "rejector = " << c.rejector_model->string() << "\n";
        if (c.classifier_model) os << "classifier = " << c.classifier_model->string() << "\n";
    }
    os << "\n[persona]\n";
    os << "names = " << list(c.persona.names) << "\n";
    os << "budget = " << c.persona.budget << "\n";
    os << "model = " << c.persona.model << "\n";
    os << "samples = " << c.persona.samples << "\n";
    os << "backend = " << c.persona.backend << "\n";
    if (c.persona.script) os << "script = " << c.persona.script->string() << "\n";
    return os.str();
}

}  // namespace a2c
