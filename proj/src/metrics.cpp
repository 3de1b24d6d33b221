#include "a2c/metrics.hpp"

#include <algorithm>
#include <sstream>

#include "a2c/error.hpp"
#include "a2c/rng.hpp"
#include "a2c/text.hpp"

namespace a2c {
namespace {

constexpr const char* kStage = "metrics";

bool tier_covers(int tier, Group g) {
    switch (g) {
        case Group::A: return tier == 1 || tier == 3;
        case Group::B: return tier == 2 || tier == 3;
        case Group::C: return false;
    }
    return false;
}

double ratio(std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::string label_text(std::optional<ClassId> id, const ClassRegistry* names) {
    if (!id) return "caution";
    return names ? names->name(*id) : std::to_string(*id);
}

}  // namespace

double micro_f1(std::span<const LabelPair> pairs) {
    if (pairs.empty()) throw Error(kStage, "micro-F1 of an empty prediction list");
    std::size_t correct = 0;
    for (const auto& [truth, predicted] : pairs) {
        if (predicted && truth == predicted) ++correct;
    }
    return ratio(correct, pairs.size());
}

double expected_grid_oracle(const ComponentRates& r, const GroupSizes& n, int tier, RateLevel rate) {
    if (tier < 1 || tier > 3) throw Error(kStage, "tier must be 1, 2 or 3");
    if (n.total() == 0) throw Error(kStage, "oracle needs a non-empty evaluation set");
    for (double v : {r.p_acc_A, r.p_def_B, r.p_def_C, r.a_known}) {
        if (!(v >= 0.0 && v <= 1.0)) throw Error(kStage, "component rates must lie in [0, 1]");
    }
    const double rho = resolve_probability(rate);
    const auto e = [&](Group g) { return tier_covers(tier, g) ? 1.0 : rho; };
    const double correct = static_cast<double>(n.n_a) * (r.p_acc_A * r.a_known + (1.0 - r.p_acc_A) * e(Group::A)) +
                           static_cast<double>(n.n_b) * r.p_def_B * e(Group::B) +
                           static_cast<double>(n.n_c) * r.p_def_C * e(Group::C);
    return correct / static_cast<double>(n.total());
}

const GridCell& GridResult::at(int tier, RateLevel rate) const {
    auto it = cells.find({tier, rate});
    if (it == cells.end()) throw Error(kStage, "grid has no cell t=" + std::to_string(tier) + " r=" + rate_level_name(rate));
    return it->second;
}

GridResult run_grid(const DatasetPartition& partition, const PipelineComponents& components,
                    const GridOptions& options) {
    if (partition.a_test.empty() && partition.d_b().empty() && partition.d_c().empty()) {
        throw Error(kStage, "evaluation set is empty");
    }
    const auto& ds = *partition.dataset;
    const auto eval = partition.evaluation_indices();

    struct Row {
        std::size_t index;
        Group group;
        Assessment assessment;
        double draw;
    };
    std::vector<Row> rows;
    rows.reserve(eval.size());
    for (std::size_t k = 0; k < eval.size(); ++k) {
        const auto& s = ds.samples[eval[k]];
        const Group g = k < partition.a_test.size() ? Group::A
                        : k < partition.a_test.size() + partition.d_b().size() ? Group::B
                                                                               : Group::C;
        rows.push_back({eval[k], g, assess(components, s), sample_draw(options.seed, s.id)});
    }

    GridResult result;
    result.seed = options.seed;
    result.schedule = options.schedule;
    result.sizes = {partition.a_test.size(), partition.d_b().size(), partition.d_c().size()};

    std::size_t acc_a = 0, acc_a_correct = 0, def_b = 0, def_c = 0;
    for (const auto& row : rows) {
        const bool accepted = row.assessment.reject.value == RejectVerdict::Accept;
        if (row.group == Group::A && accepted) {
            ++acc_a;
            if (ds.samples[row.index].label == row.assessment.predicted) ++acc_a_correct;
        }
        if (row.group == Group::B && !accepted) ++def_b;
        if (row.group == Group::C && !accepted) ++def_c;
    }
    result.rates = {ratio(acc_a, result.sizes.n_a), ratio(def_b, result.sizes.n_b), ratio(def_c, result.sizes.n_c),
                    ratio(acc_a_correct, acc_a)};

    if (options.schedule == DrawSchedule::Stratified) {
        for (Group g : {Group::A, Group::B, Group::C}) {
            std::vector<Row*> deferred;
            for (auto& row : rows) {
                if (row.group == g && row.assessment.reject.value == RejectVerdict::Defer) deferred.push_back(&row);
            }
            std::sort(deferred.begin(), deferred.end(), [&](const Row* a, const Row* b) {
                const auto ka = mix64(options.seed, ds.samples[a->index].id);
                const auto kb = mix64(options.seed, ds.samples[b->index].id);
                return ka != kb ? ka < kb : a->index < b->index;
            });
            const double m = static_cast<double>(deferred.size());
            for (std::size_t k = 0; k < deferred.size(); ++k) deferred[k]->draw = (static_cast<double>(k) + 0.5) / m;
        }
    }

    for (int tier : options.tiers) {
        PipelineComponents c = components;
        c.expert = build_expert(tier, partition);
        for (RateLevel rate : options.rates) {
            c.coex.rate_level = rate;
            const Mode mode = rate == RateLevel::None ? Mode::Deferral : Mode::Collaborative;
            GridCell cell;
            cell.n_eval = rows.size();
            for (const auto& row : rows) {
                if (route_assessed(c, mode, ds.samples[row.index], row.assessment, row.draw).correct()) ++cell.correct;
            }
            cell.micro_f1 = ratio(cell.correct, cell.n_eval);
            result.cells[{tier, rate}] = cell;
        }
    }
    return result;
}

ReportFormat parse_report_format(std::string_view tag) {
    if (tag == "csv") return ReportFormat::Csv;
    if (tag == "markdown" || tag == "md") return ReportFormat::Markdown;
    throw UsageError(kStage, "unknown report format '" + std::string(tag) + "' (expected csv or markdown)");
}

std::string render_report(const GridResult& g, ReportFormat format) {
    if (g.cells.empty()) throw InvariantError(kStage, "grid result has no cells");
    std::ostringstream os;
    if (format == ReportFormat::Csv) {
        os << "tier,rate_level,micro_f1,n_eval,p_acc_A,p_def_B,p_def_C,a_known\n";
        for (const auto& [key, cell] : g.cells) {
            os << key.first << "," << rate_level_name(key.second) << "," << text::format_double(cell.micro_f1) << ","
               << cell.n_eval << "," << text::format_double(g.rates.p_acc_A) << ","
               << text::format_double(g.rates.p_def_B) << "," << text::format_double(g.rates.p_def_C) << ","
               << text::format_double(g.rates.a_known) << "\n";
        }
        return os.str();
    }
    std::vector<int> tiers;
    std::vector<RateLevel> rates;
    for (const auto& [key, cell] : g.cells) {
        if (std::find(tiers.begin(), tiers.end(), key.first) == tiers.end()) tiers.push_back(key.first);
        if (std::find(rates.begin(), rates.end(), key.second) == rates.end()) rates.push_back(key.second);
    }
    std::sort(rates.begin(), rates.end());
    os << "| t |";
    for (auto r : rates) os << " r=" << (r == RateLevel::None ? "∅" : rate_level_name(r)) << " |";
    os << "\n|---|";
    for (std::size_t i = 0; i < rates.size(); ++i) os << "---:|";
    os << "\n";
    for (int t : tiers) {
        os << "| " << t << " |";
        for (auto r : rates) {
            auto it = g.cells.find({t, r});
            os << " " << (it == g.cells.end() ? std::string("-") : text::format_percent(it->second.micro_f1) + "%") << " |";
        }
        os << "\n";
    }
    os << "\nEvaluation set: a_test=" << g.sizes.n_a << ", D_B=" << g.sizes.n_b << ", D_C=" << g.sizes.n_c
       << "; p_acc_A=" << text::format_percent(g.rates.p_acc_A) << "%, p_def_B=" << text::format_percent(g.rates.p_def_B)
       << "%, p_def_C=" << text::format_percent(g.rates.p_def_C) << "%, a_known=" << text::format_percent(g.rates.a_known)
       << "%\n";
    return os.str();
}

std::string render_report(const RunReport& r, ReportFormat format, const ClassRegistry* names) {
    if (r.decisions.empty()) throw InvariantError(kStage, "run report has no decisions");
    std::ostringstream os;
    if (format == ReportFormat::Csv) {
        os << "sample_id,true,predicted,stage,s_i\n";
        for (const auto& d : r.decisions) {
            os << d.sample_id << "," << label_text(d.truth, names) << "," << label_text(d.predicted, names) << ","
               << stage_name(d.stage) << "," << text::format_double(d.score) << "\n";
        }
        return os.str();
    }
    os << "| mode | t | r | micro-F1 |\n|---|---|---|---:|\n";
    os << "| " << mode_name(r.mode) << " | " << r.tier << " | " << rate_level_name(r.rate) << " | "
       << text::format_percent(r.micro_f1) << "% |\n\n";
    os << "| stage | correct | incorrect |\n|---|---:|---:|\n";
    for (const auto& [stage, tally] : r.by_stage) {
        os << "| " << stage_name(stage) << " | " << tally.correct << " | " << tally.incorrect << " |\n";
    }
    return os.str();
}

std::string render_summary(const RunReport& r) {
    std::ostringstream os;
    os << "mode = " << mode_name(r.mode) << "\n";
    os << "tier = " << r.tier << "\n";
    os << "rate_level = " << rate_level_name(r.rate) << "\n";
    os << "seed = " << r.seed << "\n";
    os << "micro_f1 = " << text::format_double(r.micro_f1) << "\n";
    os << "n = " << r.decisions.size() << "\n";
    os << "composition = " << r.composition << "\n";
    for (const auto& [stage, tally] : r.by_stage) {
        os << "stage." << stage_name(stage) << ".correct = " << tally.correct << "\n";
        os << "stage." << stage_name(stage) << ".incorrect = " << tally.incorrect << "\n";
    }
    return os.str();
}

}  // namespace a2c
