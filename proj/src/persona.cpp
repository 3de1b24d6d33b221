#include "a2c/persona.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <numeric>
#include <regex>
#include <sstream>

#include "a2c/error.hpp"
#include "a2c/text.hpp"

namespace a2c {
namespace {

constexpr const char* kStage = "persona";
constexpr const char* kMagic = "a2c-transcript 1";

const char* kMarkerRule =
    "When you reach a conclusion, end your message with exactly one line of the form\n"
    "FINAL: normal | FINAL: intrusion | FINAL: caution\n"
    "Use caution only when the evidence does not support a definite answer.";

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string session_context(const Sample& sample, const ExpertContext& ctx, const SessionOptions& options) {
    std::ostringstream os;
    os << "Sample " << sample.id << " (standardized features): " << text::format_doubles(sample.features) << "\n";
    os << "Rejector acceptance score: " << text::format_double(ctx.reject_score) << " ("
       << (ctx.reject_decision.value == RejectVerdict::Accept ? "accepted" : "deferred") << ")\n";
    if (!ctx.classifier_probs.probs.empty()) {
        os << "Classifier probabilities over known classes: " << text::format_doubles(ctx.classifier_probs.probs) << "\n";
    }
    for (const auto& line : ctx.contextual_info) os << "Context: " << line << "\n";
    for (const auto& line : ctx.side_info) os << "Side information: " << line << "\n";
    os << "Competence tier: t=" << options.tier << "\n";
    if (!options.history.empty()) {
        os << "Historical labeled examples from classes within the analyst's competence:\n";
        for (const auto& h : options.history) os << "  " << h << "\n";
    }
    os << kMarkerRule;
    return os.str();
}

ChatRequest build_request(const Transcript& t, Role speaker, const std::string& system_prompt,
                          const std::string& model) {
    ChatRequest req;
    req.model = model;
    req.speaker = speaker;
    req.messages.push_back({"system", system_prompt + "\n\n" + t.messages.front().text});
    for (std::size_t i = 1; i < t.messages.size(); ++i) {
        const auto& m = t.messages[i];
        req.messages.push_back({m.role == speaker ? "assistant" : "user", m.text});
    }
    if (req.messages.size() == 1) {
        req.messages.push_back({"user", "Please present your analysis of this sample."});
    }
    return req;
}

bool has_marker(const std::string& s) {
    static const std::regex re(R"(FINAL:\s*(normal|intrusion|caution))", std::regex::icase);
    return std::regex_search(s, re);
}

void persist(const Transcript& t, const SessionOptions& options) {
    if (options.store_dir) write_transcript(t, *options.store_dir);
}

std::string one_line(std::string s) {
    for (auto& c : s) {
        if (c == '\n' || c == '\r') c = ' ';
    }
    return s;
}

}  // namespace

const char* experience_band_name(ExperienceBand band) {
    switch (band) {
        case ExperienceBand::Novice: return "novice";
        case ExperienceBand::Intermediate: return "intermediate";
        case ExperienceBand::Expert: return "expert";
    }
    return "?";
}

PersonaSpec persona_preset(std::string_view name, std::set<std::string> known_class_names) {
    PersonaSpec p;
    p.known_class_names = std::move(known_class_names);
    const auto lower = text::to_lower(name);
    if (lower == "jordan") {
        p.name = "Jordan";
        p.band = ExperienceBand::Novice;
        p.system_prompt =
            "You are Jordan, a security operations centre analyst with less than one year of experience. "
            "You know the basics of network traffic triage and rely on runbooks. You are careful and prefer "
            "to flag uncertainty rather than commit to a verdict you cannot justify. You are working with "
            "Scout, an analytics assistant, to decide whether a network connection record is normal "
            "traffic or an intrusion.";
    } else if (lower == "alex") {
        p.name = "Alex";
        p.band = ExperienceBand::Intermediate;
        p.system_prompt =
            "You are Alex, a security operations centre analyst with one to three years of experience. "
            "You are comfortable reading connection statistics and weigh evidence before deciding. You are "
            "working with Scout, an analytics assistant, to decide whether a network connection record "
            "is normal traffic or an intrusion.";
    } else if (lower == "john") {
        p.name = "John";
        p.band = ExperienceBand::Expert;
        p.system_prompt =
            "You are John, a senior security operations centre analyst with more than five years of "
            "experience in intrusion detection. You decide quickly and trust your own judgement. You are "
            "working with Scout, an analytics assistant, to decide whether a network connection record "
            "is normal traffic or an intrusion.";
    } else {
        throw UsageError(kStage, "unknown persona preset '" + std::string(name) + "' (expected Jordan, Alex or John)");
    }
    if (!p.known_class_names.empty()) {
        std::vector<std::string> names(p.known_class_names.begin(), p.known_class_names.end());
        p.system_prompt += " From past cases you can reliably recognise these traffic classes: " +
                           text::join(names, ", ") + ".";
    }
    return p;
}

std::vector<std::string> persona_preset_names() { return {"Jordan", "Alex", "John"}; }

std::string collaborator_prompt() {
    return "You are Scout, an analytics assistant for security analysts. You examine network connection "
           "records, summarise notable feature values, compare them with known traffic patterns and suggest "
           "further checks. You advise; the analyst makes the final decision.";
}

const char* role_name(Role role) {
    switch (role) {
        case Role::System: return "system";
        case Role::Analyst: return "analyst";
        case Role::Collaborator: return "collaborator";
    }
    return "?";
}

Role parse_role(std::string_view tag) {
    if (tag == "system") return Role::System;
    if (tag == "analyst") return Role::Analyst;
    if (tag == "collaborator") return Role::Collaborator;
    throw Error(kStage, "unknown message role '" + std::string(tag) + "'");
}

ScriptedBackend::ScriptedBackend(std::vector<std::string> analyst, std::vector<std::string> collaborator)
    : analyst_(std::move(analyst)), collaborator_(std::move(collaborator)) {}

std::string ScriptedBackend::complete(const ChatRequest& request) {
    ++calls_;
    const bool analyst = request.speaker == Role::Analyst;
    auto& script = analyst ? analyst_ : collaborator_;
    auto& turn = analyst ? analyst_turn_ : collaborator_turn_;
    if (script.empty()) return analyst ? "I need more information." : "Here is what the record shows.";
    const auto& reply = script[std::min(turn, script.size() - 1)];
    ++turn;
    return reply;
}

Transcript run_persona_session(const Sample& sample, const ExpertContext& context, const PersonaSpec& persona,
                               ChatBackend& backend, const SessionOptions& options) {
    if (options.budget == 0) throw Error(kStage, "budget must be at least one exchange");
    if (persona.system_prompt.empty()) throw Error(kStage, "persona '" + persona.name + "' has no system prompt");
    const auto clock = options.clock ? options.clock : utc_now;

    Transcript t;
    t.persona = persona.name;
    t.tier = options.tier;
    t.sample_id = sample.id;
    t.budget = options.budget;
    t.messages.push_back({Role::System, session_context(sample, context, options), clock()});

    const auto ask = [&](Role speaker, const std::string& prompt) -> std::optional<std::string> {
        std::string reply;
        try {
            reply = backend.complete(build_request(t, speaker, prompt, options.model));
        } catch (const TransportError& e) {
            t.error = e.what();
            persist(t, options);
            throw;
        }
        if (text::trim(reply).empty()) {
            t.valid = false;
            t.error = std::string("malformed reply from ") + role_name(speaker) + ": empty completion";
            std::clog << "[" << kStage << "] session " << transcript_filename(t) << " invalid: " << t.error << "\n";
            return std::nullopt;
        }
        return reply;
    };

    for (std::size_t exchange = 1; exchange <= options.budget; ++exchange) {
        auto collab = ask(Role::Collaborator, collaborator_prompt());
        if (!collab) break;
        t.messages.push_back({Role::Collaborator, *collab, clock()});
        auto analyst = ask(Role::Analyst, persona.system_prompt);
        if (!analyst) break;
        t.messages.push_back({Role::Analyst, *analyst, clock()});
        t.budget_used = exchange;
        if (has_marker(*analyst)) break;
    }
    persist(t, options);
    return t;
}

const char* triage_outcome_name(TriageOutcome outcome) {
    switch (outcome) {
        case TriageOutcome::Normal: return "normal";
        case TriageOutcome::Intrusion: return "intrusion";
        case TriageOutcome::Caution: return "caution";
    }
    return "?";
}

TriageOutcome parse_final_decision(const Transcript& transcript) {
    if (!transcript.valid) throw Error(kStage, "transcript is marked invalid: " + transcript.error);
    static const std::regex re(R"(FINAL:\s*(normal|intrusion|caution))", std::regex::icase);
    for (auto it = transcript.messages.rbegin(); it != transcript.messages.rend(); ++it) {
        if (it->role != Role::Analyst) continue;
        std::optional<std::string> last;
        for (std::sregex_iterator m(it->text.begin(), it->text.end(), re), end; m != end; ++m) {
            last = text::to_lower((*m)[1].str());
        }
        if (!last) continue;
        if (*last == "normal") return TriageOutcome::Normal;
        if (*last == "intrusion") return TriageOutcome::Intrusion;
        return TriageOutcome::Caution;
    }
    return TriageOutcome::Caution;
}

double score_outcome(TriageOutcome outcome, TriageTruth truth) {
    if (outcome == TriageOutcome::Caution) return 0.5;
    const bool match = (outcome == TriageOutcome::Normal) == (truth == TriageTruth::Normal);
    return match ? 1.0 : 0.0;
}

double coex_success_rate(std::span<const double> scores) {
    if (scores.empty()) throw Error(kStage, "success rate of an empty score list");
    return std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
}

std::string transcript_filename(const Transcript& t) {
    return t.persona + "_" + std::to_string(t.tier) + "_" + std::to_string(t.sample_id) + ".transcript";
}

namespace {

std::string serialize_impl(const Transcript& t, bool with_timestamps) {
    std::ostringstream os;
    os << kMagic << "\n";
    os << "persona: " << t.persona << "\n";
    os << "tier: " << t.tier << "\n";
    os << "sample_id: " << t.sample_id << "\n";
    os << "budget: " << t.budget << "\n";
    os << "budget_used: " << t.budget_used << "\n";
    os << "valid: " << (t.valid ? "true" : "false") << "\n";
    os << "error: " << one_line(t.error) << "\n";
    os << "messages: " << t.messages.size() << "\n";
    for (const auto& m : t.messages) {
        const std::string ts = with_timestamps && !m.timestamp.empty() ? m.timestamp : "-";
        os << "message: " << role_name(m.role) << " " << ts << " " << m.text.size() << "\n" << m.text << "\n";
    }
    return os.str();
}

std::string_view take_line(std::string_view& rest) {
    const auto pos = rest.find('\n');
    if (pos == std::string_view::npos) throw Error(kStage, "truncated transcript");
    auto line = rest.substr(0, pos);
    rest.remove_prefix(pos + 1);
    return line;
}

std::string field(std::string_view& rest, std::string_view key) {
    const auto line = take_line(rest);
    const std::string prefix = std::string(key) + ": ";
    if (line.substr(0, prefix.size()) != prefix) {
        if (line == std::string(key) + ":") return {};
        throw Error(kStage, "expected field '" + std::string(key) + "' in transcript");
    }
    return std::string(line.substr(prefix.size()));
}

std::uint64_t uint_field(std::string_view& rest, std::string_view key) {
    auto v = text::parse_uint(field(rest, key));
    if (!v) throw Error(kStage, "field '" + std::string(key) + "' is not a non-negative integer");
    return *v;
}

}  // namespace

std::string serialize_transcript(const Transcript& t) { return serialize_impl(t, true); }
std::string canonical_transcript(const Transcript& t) { return serialize_impl(t, false); }

Transcript parse_transcript(std::string_view rest) {
    if (take_line(rest) != kMagic) throw Error(kStage, "not a transcript (bad header)");
    Transcript t;
    t.persona = field(rest, "persona");
    t.tier = static_cast<int>(uint_field(rest, "tier"));
    t.sample_id = uint_field(rest, "sample_id");
    t.budget = uint_field(rest, "budget");
    t.budget_used = uint_field(rest, "budget_used");
    t.valid = field(rest, "valid") == "true";
    t.error = field(rest, "error");
    const auto count = uint_field(rest, "messages");
    for (std::uint64_t i = 0; i < count; ++i) {
        const auto line = field(rest, "message");
        const auto header = text::split(line, ' ');
        if (header.size() != 3) throw Error(kStage, "bad message header");
        const auto len = text::parse_uint(header[2]);
        if (!len || rest.size() < *len + 1) throw Error(kStage, "truncated message body");
        Message m;
        m.role = parse_role(header[0]);
        m.timestamp = header[1] == "-" ? "" : std::string(header[1]);
        m.text = std::string(rest.substr(0, *len));
        rest.remove_prefix(*len + 1);
        t.messages.push_back(std::move(m));
    }
    return t;
}

void write_transcript(const Transcript& t, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto path = dir / transcript_filename(t);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(kStage, "cannot write transcript " + path.string());
    out << serialize_transcript(t);
}

Transcript read_transcript(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(kStage, "cannot read transcript " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_transcript(ss.str());
}

}  // namespace a2c
