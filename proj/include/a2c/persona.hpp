#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "a2c/types.hpp"

namespace a2c {

enum class ExperienceBand { Novice, Intermediate, Expert };

const char* experience_band_name(ExperienceBand band);

/// An analyst persona. known_class_names carries the competence tier.
struct PersonaSpec {
    std::string name;
    ExperienceBand band = ExperienceBand::Novice;
    std::string system_prompt;
    std::set<std::string> known_class_names;
};

/// Jordan (novice, <1y), Alex (intermediate, 1-3y), John (expert, 5+y).
PersonaSpec persona_preset(std::string_view name, std::set<std::string> known_class_names = {});
std::vector<std::string> persona_preset_names();

/// The collaborator agent's system prompt.
std::string collaborator_prompt();

enum class Role { System, Analyst, Collaborator };

const char* role_name(Role role);
Role parse_role(std::string_view tag);

struct Message {
    Role role = Role::System;
    std::string text;
    std::string timestamp;
};

struct Transcript {
    std::string persona;
    int tier = 0;
    SampleId sample_id = 0;
    std::size_t budget = 0;
    /// Exchanges used (one collaborator turn plus one analyst turn each).
    std::size_t budget_used = 0;
    bool valid = true;
    std::string error;
    std::vector<Message> messages;
};

/// Chat backend request: ordered messages seen from the speaker's side
/// ("system", "user", "assistant") plus the model name.
struct ChatTurn {
    std::string role;
    std::string text;
};

struct ChatRequest {
    std::string model;
    Role speaker = Role::Analyst;
    std::vector<ChatTurn> messages;
};

class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    /// Returns a single completion. Throws TransportError when unreachable.
    virtual std::string complete(const ChatRequest& request) = 0;
};

/// Replays fixed replies per speaker. When a script runs out its last entry
/// repeats; an empty script answers with a neutral holding line.
class ScriptedBackend : public ChatBackend {
public:
    ScriptedBackend(std::vector<std::string> analyst, std::vector<std::string> collaborator);
    std::string complete(const ChatRequest& request) override;

    std::size_t calls() const noexcept { return calls_; }

private:
    std::vector<std::string> analyst_;
    std::vector<std::string> collaborator_;
    std::size_t analyst_turn_ = 0;
    std::size_t collaborator_turn_ = 0;
    std::size_t calls_ = 0;
};

/// OpenAI-style chat-completions client. Endpoint and key come from
/// A2C_CHAT_ENDPOINT and A2C_CHAT_KEY.
class HttpChatBackend : public ChatBackend {
public:
    HttpChatBackend(std::string endpoint, std::string key);
    static std::unique_ptr<HttpChatBackend> from_environment();
    std::string complete(const ChatRequest& request) override;

    /// Request body and reply extraction, exposed for tests.
    static std::string encode_request(const ChatRequest& request);
    static std::string decode_reply(std::string_view body);

private:
    std::string endpoint_;
    std::string key_;
};

struct SessionOptions {
    std::size_t budget = 12;
    std::string model = "gpt-4";
    int tier = 1;
    /// Labeled examples from the expert's known classes, one line each.
    std::vector<std::string> history;
    /// When set, the transcript is written here (also on failure).
    std::optional<std::filesystem::path> store_dir;
    std::function<std::string()> clock;
};

/// Runs collaborator/analyst exchanges until the analyst emits a decision
/// marker or the budget is exhausted.
Transcript run_persona_session(const Sample& sample, const ExpertContext& context, const PersonaSpec& persona,
                               ChatBackend& backend, const SessionOptions& options);

enum class TriageOutcome { Normal, Intrusion, Caution };
enum class TriageTruth { Normal, Intrusion };

const char* triage_outcome_name(TriageOutcome outcome);

/// Finds `FINAL: (normal|intrusion|caution)` (case-insensitive) in analyst
/// messages, scanning from the last message backwards and taking the last
/// marker in a message. No marker means Caution.
TriageOutcome parse_final_decision(const Transcript& transcript);

/// Correct -> 1, Caution -> 0.5, wrong -> 0.
double score_outcome(TriageOutcome outcome, TriageTruth truth);

/// Mean of per-sample scores, as a fraction in [0, 1].
double coex_success_rate(std::span<const double> scores);

std::string transcript_filename(const Transcript& transcript);
std::string serialize_transcript(const Transcript& transcript);
Transcript parse_transcript(std::string_view text);
/// Serialization with timestamps blanked, for byte comparisons.
std::string canonical_transcript(const Transcript& transcript);

void write_transcript(const Transcript& transcript, const std::filesystem::path& dir);
Transcript read_transcript(const std::filesystem::path& path);

}  // namespace a2c
