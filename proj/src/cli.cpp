#include "a2c/cli.hpp"

#include <CLI11.hpp>
#include <zlib.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "a2c/error.hpp"
#include "a2c/experiment.hpp"
#include "a2c/persistence.hpp"
#include "a2c/persona.hpp"
#include "a2c/rng.hpp"
#include "a2c/text.hpp"

namespace a2c {
namespace {

namespace fs = std::filesystem;

constexpr const char* kStage = "cli";

const std::vector<std::pair<std::string, std::string>> kCommands = {
    {"partition", "split the data into D_A/D_B/D_C and a_train/a_test"},
    {"train-rejector", "fit and calibrate the rejector"},
    {"train-classifier", "train the known-class classifier"},
    {"eval-rejector", "known-vs-unknown accuracy of the rejector"},
    {"eval-classifier", "micro-F1 on known classes and on the full evaluation set"},
    {"run-mode", "route the evaluation set in one mode"},
    {"grid", "micro-F1 for every tier and rate level"},
    {"coex-persona", "persona sessions on D_C samples"},
    {"report", "render a saved grid as markdown or csv"},
};

struct Options {
    std::string config;
    std::optional<int> tier;
    std::optional<std::string> rate;
    std::optional<std::string> mode;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    bool force = false;
    std::string format = "markdown";
    std::optional<std::string> from;
};

std::string file_crc(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("io", "cannot open " + path.string());
    uLong crc = crc32(0L, Z_NULL, 0);
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        crc = crc32(crc, reinterpret_cast<const Bytef*>(buf.data()), static_cast<uInt>(in.gcount()));
    }
    char hex[9];
    std::snprintf(hex, sizeof hex, "%08lx", static_cast<unsigned long>(crc));
    return hex;
}

class Run {
public:
    Run(std::string command, const Options& opt, std::ostream& out) : command_(std::move(command)), out_(out) {
        config_ = load_config(opt.config);
        if (opt.tier) config_.tier = *opt.tier;
        if (opt.rate) config_.rate = parse_rate_level(*opt.rate);
        if (opt.mode) config_.mode = parse_mode(*opt.mode);
        if (opt.seed) config_.partition_seed = config_.training_seed = config_.draw_seed = *opt.seed;
        if (opt.tier) config_.tiers = {*opt.tier};
        dir_ = opt.out ? fs::absolute(*opt.out) : config_.out / command_;
        force_ = opt.force;
        try {
            validate_config(config_);
        } catch (const InvariantError& e) {
            throw UsageError("config", e.what());
        }
    }

    ExperimentConfig& config() { return config_; }
    const fs::path& dir() const { return dir_; }
    std::ostream& out() { return out_; }

    /// Creates the artifact directory; fails when it exists unless forced.
    void open() {
        if (dir_.has_parent_path()) fs::create_directories(dir_.parent_path());
        if (!fs::create_directory(dir_) && !force_) {
            throw UsageError(kStage, "output directory " + dir_.string() + " already exists (use --force to overwrite)");
        }
    }

    void write(const std::string& name, std::string_view content) {
        write_text_file(dir_ / name, content);
        artifacts_.push_back(name);
    }

    void finish() {
        write_text_file(dir_ / "config.cfg", config_snapshot(config_));
        std::map<std::string, std::string> kv;
        kv["a2c.version"] = A2C_VERSION;
        kv["command"] = command_;
        kv["config"] = "config.cfg";
        kv["rerun"] = "a2c " + command_ + " --config config.cfg --out <dir> --force";
        kv["seeds.partition"] = std::to_string(config_.partition_seed);
        kv["seeds.training"] = std::to_string(config_.training_seed);
        kv["seeds.draws"] = std::to_string(config_.draw_seed);
        kv["data.path"] = config_.data_path.string();
        kv["data.crc32"] = file_crc(config_.data_path);
        if (config_.rejector_model) kv["models.rejector.crc32"] = file_crc(*config_.rejector_model);
        if (config_.classifier_model) kv["models.classifier.crc32"] = file_crc(*config_.classifier_model);
        std::sort(artifacts_.begin(), artifacts_.end());
        kv["artifacts"] = text::join(artifacts_, ",");
        std::string manifest;
        for (const auto& [k, v] : kv) manifest += k + " = " + v + "\n";
        write_text_file(dir_ / "manifest.txt", manifest);
        out_ << "wrote " << dir_.string() << "\n";
    }

private:
    std::string command_;
    std::ostream& out_;
    ExperimentConfig config_;
    fs::path dir_;
    bool force_ = false;
    std::vector<std::string> artifacts_;
};

std::string kv_lines(const std::vector<std::pair<std::string, std::string>>& rows) {
    std::string s;
    for (const auto& [k, v] : rows) s += k + " = " + v + "\n";
    return s;
}

void cmd_partition(Run& run) {
    const auto ex = prepare_experiment(run.config());
    run.open();
    run.write("partition.txt", partition_manifest(ex.partition));
    const auto& p = ex.partition;
    run.out() << "D_A=" << p.d_a().size() << " (train " << p.a_train.size() << ", test " << p.a_test.size()
              << ") D_B=" << p.d_b().size() << " D_C=" << p.d_c().size() << "\n";
    run.finish();
}

void cmd_train_rejector(Run& run) {
    const auto ex = prepare_experiment(run.config());
    const auto model = train_rejector(ex);
    run.open();
    run.write("rejector.model", serialize_model(model));
    run.out() << "theta_r = " << text::format_double(*model.theta_r) << "\n";
    run.finish();
}

void cmd_train_classifier(Run& run) {
    const auto ex = prepare_experiment(run.config());
    const auto model = train_classifier(ex);
    run.open();
    run.write("classifier.model", serialize_model(model));
    run.write("training_curve.csv", training_curve_csv(model));
    run.out() << "final_loss = " << text::format_double(model.meta.final_loss) << "\n";
    run.finish();
}

void cmd_eval_rejector(Run& run) {
    const auto ex = prepare_experiment(run.config());
    const auto model = ex.config.rejector_model ? load_rejector(*ex.config.rejector_model) : train_rejector(ex);
    const auto ev = evaluate_rejector(model, ex.partition);
    const auto text = kv_lines({{"accuracy", text::format_double(ev.accuracy)},
                                {"known_accepted", std::to_string(ev.known_accepted)},
                                {"known_total", std::to_string(ev.known_total)},
                                {"theta_r", text::format_double(*model.theta_r)},
                                {"unknown_deferred", std::to_string(ev.unknown_deferred)},
                                {"unknown_total", std::to_string(ev.unknown_total)}});
    run.open();
    run.write("rejector_eval.txt", text);
    run.out() << text;
    run.finish();
}

void cmd_eval_classifier(Run& run) {
    const auto ex = prepare_experiment(run.config());
    const auto model = ex.config.classifier_model ? load_classifier(*ex.config.classifier_model) : train_classifier(ex);
    const auto& p = ex.partition;
    const auto eval = p.evaluation_indices();
    const auto text = kv_lines(
        {{"known_micro_f1", text::format_double(evaluate_classifier(model, *p.dataset, p.a_test, EvalScope::KnownOnly))},
         {"full_micro_f1", text::format_double(evaluate_classifier(model, *p.dataset, eval, EvalScope::Full))},
         {"known_share", text::format_double(static_cast<double>(p.a_test.size()) / static_cast<double>(eval.size()))},
         {"n_known", std::to_string(p.a_test.size())},
         {"n_eval", std::to_string(eval.size())}});
    run.open();
    run.write("classifier_eval.txt", text);
    run.out() << text;
    run.finish();
}

void cmd_run_mode(Run& run) {
    const auto& cfg = run.config();
    if (cfg.mode == Mode::Collaborative && cfg.rate == RateLevel::None) {
        throw UsageError(kStage, "collaborative mode requires --rate 1..4");
    }
    const auto ex = prepare_experiment(cfg);
    const auto components = build_components(ex, cfg.tier, cfg.rate);
    const auto eval = ex.partition.evaluation_indices();
    auto report = run_mode(components, cfg.mode, *ex.partition.dataset, eval, cfg.draw_seed);
    report.composition = "a_test=" + std::to_string(ex.partition.a_test.size()) + " D_B=" +
                         std::to_string(ex.partition.d_b().size()) + " D_C=" + std::to_string(ex.partition.d_c().size());
    run.open();
    run.write("decisions.csv", render_report(report, ReportFormat::Csv, &ex.partition.dataset->classes));
    run.write("summary.txt", render_summary(report));
    run.write("report.md", render_report(report, ReportFormat::Markdown));
    run.out() << mode_name(report.mode) << " micro_f1 = " << text::format_percent(report.micro_f1) << "%\n";
    run.finish();
}

void cmd_grid(Run& run) {
    const auto& cfg = run.config();
    const auto ex = prepare_experiment(cfg);
    const auto components = build_components(ex, cfg.tiers.front(), RateLevel::None);
    GridOptions options;
    options.tiers = cfg.tiers;
    options.rates = cfg.rates;
    options.seed = cfg.draw_seed;
    options.schedule = cfg.schedule;
    const auto grid = run_grid(ex.partition, components, options);
    run.open();
    run.write("grid.csv", render_report(grid, ReportFormat::Csv));
    const auto md = render_report(grid, ReportFormat::Markdown);
    run.write("grid.md", md);
    run.out() << md;
    run.finish();
}

std::pair<std::vector<std::string>, std::vector<std::string>> read_script(const fs::path& path) {
    std::vector<std::string> analyst, collaborator;
    std::istringstream in(read_text_file(path));
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        const auto t = text::trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto colon = t.find(':');
        const auto who = colon == std::string_view::npos ? std::string() : text::to_lower(text::trim(t.substr(0, colon)));
        const auto body = colon == std::string_view::npos ? std::string() : std::string(text::trim(t.substr(colon + 1)));
        if (who == "analyst") analyst.push_back(body);
        else if (who == "collaborator") collaborator.push_back(body);
        else throw UsageError("persona", path.string() + ":" + std::to_string(n) + ": expected 'analyst:' or 'collaborator:'");
    }
    return {analyst, collaborator};
}

void cmd_coex_persona(Run& run) {
    const auto& cfg = run.config();
    const auto ex = prepare_experiment(cfg);
    const auto& ds = *ex.partition.dataset;
    std::vector<std::string> analyst_script, collaborator_script;
    if (cfg.persona.script) std::tie(analyst_script, collaborator_script) = read_script(*cfg.persona.script);
    std::unique_ptr<HttpChatBackend> http;
    if (cfg.persona.backend == "http") http = HttpChatBackend::from_environment();

    run.open();
    const auto transcripts = run.dir() / "transcripts";
    fs::create_directories(transcripts);

    const auto base = build_components(ex, cfg.tiers.front(), RateLevel::None);
    std::string csv = "persona,tier,sample_id,truth,outcome,s_i\n";
    std::ostringstream summary;
    for (int tier : cfg.tiers) {
        auto c = base;
        c.expert = build_expert(tier, ex.partition);
        std::vector<std::pair<std::uint64_t, std::size_t>> escalated;
        for (auto i : ex.partition.evaluation_indices()) {
            const auto& s = ds.samples[i];
            const auto a = assess(c, s);
            if (a.reject.value == RejectVerdict::Defer && !c.expert.knows(*s.label)) {
                escalated.push_back({mix64(cfg.draw_seed, s.id), i});
            }
        }
        std::sort(escalated.begin(), escalated.end());
        escalated.resize(std::min(escalated.size(), cfg.persona.samples));

        std::set<std::string> known;
        for (auto id : c.expert.known_classes) known.insert(ds.classes.name(id));
        SessionOptions session;
        session.budget = cfg.persona.budget;
        session.model = cfg.persona.model;
        session.tier = tier;
        for (const auto& name : known) session.history.push_back("previously triaged: " + name);
        session.store_dir = transcripts;

        for (const auto& name : cfg.persona.names) {
            const auto persona = persona_preset(name, known);
            std::vector<double> scores;
            for (const auto& [key, i] : escalated) {
                const auto& s = ds.samples[i];
                const auto ctx = make_expert_context(c, assess(c, s), ds);
                ScriptedBackend scripted(analyst_script, collaborator_script);
                ChatBackend& backend = http ? static_cast<ChatBackend&>(*http) : scripted;
                const auto transcript = run_persona_session(s, ctx, persona, backend, session);
                const auto outcome = transcript.valid ? parse_final_decision(transcript) : TriageOutcome::Caution;
                const auto truth =
                    ds.classes.name(*s.label) == cfg.normal_class ? TriageTruth::Normal : TriageTruth::Intrusion;
                const double score = score_outcome(outcome, truth);
                scores.push_back(score);
                csv += name + "," + std::to_string(tier) + "," + std::to_string(s.id) + "," +
                       (truth == TriageTruth::Normal ? "normal" : "intrusion") + "," + triage_outcome_name(outcome) +
                       "," + text::format_double(score) + "\n";
            }
            if (!scores.empty()) {
                summary << "coex_sr." << name << ".t" << tier << " = " << text::format_percent(coex_success_rate(scores), 1)
                        << "\n";
            }
        }
    }
    run.write("coex_persona.csv", csv);
    run.write("summary.txt", summary.str());
    run.out() << summary.str();
    run.finish();
}

GridResult parse_grid_csv(const std::string& content, const std::string& source) {
    GridResult g;
    std::istringstream in(content);
    std::string line;
    std::getline(in, line);
    if (line != "tier,rate_level,micro_f1,n_eval,p_acc_A,p_def_B,p_def_C,a_known") {
        throw Error("report", source + ": not a grid CSV");
    }
    std::size_t n = 1;
    while (std::getline(in, line)) {
        ++n;
        const auto f = text::split_list(line);
        if (f.size() != 8) throw Error("report", source + ":" + std::to_string(n) + ": expected 8 fields");
        auto num = [&](std::size_t k) {
            auto v = text::parse_double(f[k]);
            if (!v) throw Error("report", source + ":" + std::to_string(n) + ": bad number '" + f[k] + "'");
            return *v;
        };
        GridCell cell;
        cell.micro_f1 = num(2);
        cell.n_eval = static_cast<std::size_t>(num(3));
        g.cells[{static_cast<int>(num(0)), parse_rate_level(f[1])}] = cell;
        g.rates = {num(4), num(5), num(6), num(7)};
    }
    return g;
}

void cmd_report(Run& run, const Options& opt) {
    const auto format = parse_report_format(opt.format);
    const fs::path from = opt.from ? fs::path(*opt.from) : run.config().out / "grid";
    const auto csv_path = from / "grid.csv";
    if (!fs::is_regular_file(csv_path)) throw UsageError("report", "no grid.csv in " + from.string());
    const auto grid = parse_grid_csv(read_text_file(csv_path), csv_path.string());
    const auto text = render_report(grid, format);
    run.open();
    run.write(format == ReportFormat::Csv ? "report.csv" : "report.md", text);
    run.out() << text;
    run.finish();
}

}  // namespace

int execute_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"a2c: rejector, classifier, expert and collaborative exploration experiments", "a2c"};
    app.require_subcommand(1);
    Options opt;
    for (const auto& [name, description] : kCommands) {
        auto* sub = app.add_subcommand(name, description);
        sub->add_option("--config", opt.config, "experiment config file")->required();
        sub->add_option("--tier", opt.tier, "expert competence tier (1, 2, 3)")->check(CLI::Range(1, 3));
        sub->add_option("--rate", opt.rate, "CoEx rate level (none, 1..4)");
        sub->add_option("--mode", opt.mode, "automation, deferral or collaborative");
        sub->add_option("--seed", opt.seed, "replaces the partition, training and draw seeds");
        sub->add_option("--out", opt.out, "artifact directory");
        sub->add_flag("--force", opt.force, "reuse an existing artifact directory");
        if (name == "report") {
            sub->add_option("--format", opt.format, "markdown or csv");
            sub->add_option("--from", opt.from, "grid run directory (default <experiment.out>/grid)");
        }
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "[cli] " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    const auto* sub = app.get_subcommands().front();
    const auto command = sub->get_name();
    try {
        Run run(command, opt, out);
        if (command == "partition") cmd_partition(run);
        else if (command == "train-rejector") cmd_train_rejector(run);
        else if (command == "train-classifier") cmd_train_classifier(run);
        else if (command == "eval-rejector") cmd_eval_rejector(run);
        else if (command == "eval-classifier") cmd_eval_classifier(run);
        else if (command == "run-mode") cmd_run_mode(run);
        else if (command == "grid") cmd_grid(run);
        else if (command == "coex-persona") cmd_coex_persona(run);
        else cmd_report(run, opt);
        return kExitOk;
    } catch (const UsageError& e) {
        err << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        err << e.what() << "\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        err << "[" << command << "] " << e.what() << "\n";
        return kExitRuntime;
    }
}

}  // namespace a2c
