#include <doctest.h>

#include <cmath>
#include <fstream>

#include "a2c/error.hpp"
#include "a2c/persona.hpp"
#include "support/fixtures.hpp"

using namespace a2c;

namespace {

struct Setup {
    Sample sample{42, {0.5, -1.25, 3.0}, ClassId{2}};
    ExpertContext context;
    PersonaSpec persona = persona_preset("Alex", {"back", "smurf"});
    SessionOptions options;

    Setup() {
        context.reject_score = -4.5;
        context.classifier_probs.probs = {0.7, 0.2, 0.1};
        context.contextual_info = {"acceptance score -4.5 <= threshold -2"};
        context.side_info = {"source host flagged in last week's feed"};
        options.tier = 2;
        options.budget = 4;
        int tick = 0;
        options.clock = [tick]() mutable { return "t" + std::to_string(tick++); };
    }
};

double pattern_rate(const std::string& marks) {
    std::vector<double> scores;
    for (char c : marks) {
        const auto outcome = c == 'v' ? TriageOutcome::Intrusion : c == 'w' ? TriageOutcome::Caution : TriageOutcome::Normal;
        scores.push_back(score_outcome(outcome, TriageTruth::Intrusion));
    }
    return coex_success_rate(scores);
}

class FailingBackend : public ChatBackend {
public:
    std::string complete(const ChatRequest& request) override {
        if (request.speaker == Role::Analyst) throw TransportError("chat", "connection refused");
        return "collaborator notes";
    }
};

}  // namespace

TEST_CASE("decision on the first exchange") {
    Setup s;
    ScriptedBackend backend({"Looks like a flood. FINAL: intrusion"}, {"High count and srv_count."});
    const auto t = run_persona_session(s.sample, s.context, s.persona, backend, s.options);
    CHECK(t.messages.size() == 3);
    CHECK(t.messages[0].role == Role::System);
    CHECK(t.messages[1].role == Role::Collaborator);
    CHECK(t.messages[2].role == Role::Analyst);
    CHECK(t.budget_used == 1);
    CHECK(parse_final_decision(t) == TriageOutcome::Intrusion);
    CHECK(backend.calls() == 2);
    CHECK(t.messages[0].text.find("-4.5") != std::string::npos);
    CHECK(t.messages[0].text.find("last week's feed") != std::string::npos);
}

TEST_CASE("decide normal after a few exchanges") {
    Setup s;
    ScriptedBackend backend({"Need the flag.", "Still unsure.", "Benign browsing. final: Normal"}, {"ok"});
    const auto t = run_persona_session(s.sample, s.context, s.persona, backend, s.options);
    CHECK(t.messages.size() == 7);
    CHECK(t.budget_used == 3);
    CHECK(parse_final_decision(t) == TriageOutcome::Normal);
}

TEST_CASE("budget exhaustion means Caution") {
    Setup s;
    ScriptedBackend backend({}, {});
    const auto t = run_persona_session(s.sample, s.context, s.persona, backend, s.options);
    CHECK(t.messages.size() == 1 + 2 * 4);
    CHECK(t.budget_used == 4);
    CHECK(parse_final_decision(t) == TriageOutcome::Caution);
    for (std::size_t i = 1; i < t.messages.size(); ++i) {
        CHECK(t.messages[i].role == (i % 2 == 1 ? Role::Collaborator : Role::Analyst));
    }
}

TEST_CASE("empty reply invalidates the transcript") {
    Setup s;
    ScriptedBackend backend({"   "}, {"notes"});
    const auto t = run_persona_session(s.sample, s.context, s.persona, backend, s.options);
    CHECK_FALSE(t.valid);
    CHECK(t.error.find("analyst") != std::string::npos);
    CHECK_THROWS_AS(parse_final_decision(t), Error);
}

TEST_CASE("transport failure keeps the partial transcript on disk") {
    Setup s;
    const auto dir = testing::scratch_dir("persona-transport");
    s.options.store_dir = dir;
    FailingBackend backend;
    CHECK_THROWS_AS(run_persona_session(s.sample, s.context, s.persona, backend, s.options), TransportError);
    const auto saved = read_transcript(dir / "Alex_2_42.transcript");
    CHECK(saved.messages.size() == 2);
    CHECK(saved.error.find("connection refused") != std::string::npos);
    std::filesystem::remove_all(dir);
}

TEST_CASE("marker grammar") {
    Transcript t;
    t.messages = {{Role::System, "FINAL: normal", ""},
                  {Role::Analyst, "...I would classify this sample as a potential intrusion. FINAL: intrusion", ""}};
    CHECK(parse_final_decision(t) == TriageOutcome::Intrusion);
    t.messages.push_back({Role::Analyst, "FINAL: intrusion, no wait. FINAL: normal", ""});
    CHECK(parse_final_decision(t) == TriageOutcome::Normal);
    t.messages.push_back({Role::Collaborator, "FINAL: caution", ""});
    CHECK(parse_final_decision(t) == TriageOutcome::Normal);
    Transcript none;
    none.messages = {{Role::Analyst, "not sure", ""}};
    CHECK(parse_final_decision(none) == TriageOutcome::Caution);
}

TEST_CASE("transcript round trip is lossless") {
    Setup s;
    const auto dir = testing::scratch_dir("persona-roundtrip");
    s.options.store_dir = dir;
    ScriptedBackend backend({"line one\nline two with = and : signs", "FINAL: caution"}, {"multi\n\nline"});
    const auto t = run_persona_session(s.sample, s.context, s.persona, backend, s.options);
    const auto path = dir / transcript_filename(t);
    CHECK(transcript_filename(t) == "Alex_2_42.transcript");
    const auto back = read_transcript(path);
    CHECK(serialize_transcript(back) == serialize_transcript(t));
    CHECK(canonical_transcript(back) == canonical_transcript(t));
    CHECK(parse_final_decision(back) == parse_final_decision(t));
    CHECK(back.messages[2].text == "line one\nline two with = and : signs");
    CHECK(back.messages[1].timestamp == "t1");
    std::filesystem::remove_all(dir);
}

TEST_CASE("outcome scoring and success rate") {
    CHECK(score_outcome(TriageOutcome::Intrusion, TriageTruth::Intrusion) == 1.0);
    CHECK(score_outcome(TriageOutcome::Caution, TriageTruth::Intrusion) == 0.5);
    CHECK(score_outcome(TriageOutcome::Normal, TriageTruth::Intrusion) == 0.0);
    CHECK(score_outcome(TriageOutcome::Normal, TriageTruth::Normal) == 1.0);
    CHECK(pattern_rate("xwwvvxx") == doctest::Approx(3.0 / 7.0));
    CHECK(pattern_rate("xxvxwwx") == doctest::Approx(2.0 / 7.0));
    CHECK(pattern_rate("vvvvvvv") == 1.0);
    CHECK_THROWS_AS(coex_success_rate(std::vector<double>{}), Error);
}

TEST_CASE("persona presets") {
    CHECK(persona_preset("jordan").band == ExperienceBand::Novice);
    CHECK(persona_preset("John").band == ExperienceBand::Expert);
    CHECK(persona_preset("Alex", {"smurf"}).system_prompt.find("smurf") != std::string::npos);
    CHECK_THROWS_AS(persona_preset("Morgan"), UsageError);
}

TEST_CASE("chat wire format") {
    ChatRequest req{"gpt-4", Role::Analyst, {{"system", "be brief"}, {"user", "hi"}}};
    const auto body = HttpChatBackend::encode_request(req);
    CHECK(body.find("\"model\":\"gpt-4\"") != std::string::npos);
    CHECK(body.find("\"role\":\"system\"") != std::string::npos);
    CHECK(HttpChatBackend::decode_reply(R"({"choices":[{"message":{"role":"assistant","content":"FINAL: normal"}}]})") ==
          "FINAL: normal");
    CHECK(HttpChatBackend::decode_reply(R"({"text":"x"})") == "x");
    CHECK_THROWS_AS(HttpChatBackend::decode_reply("not json"), Error);
    CHECK_THROWS_AS(HttpChatBackend("ftp://nowhere", ""), UsageError);
}

TEST_CASE("unreachable endpoint is a transport error") {
    HttpChatBackend backend("http://127.0.0.1:9", "");
    CHECK_THROWS_AS(backend.complete({"m", Role::Analyst, {{"user", "hi"}}}), TransportError);
}
