#include <doctest.h>

#include "ompforge/agent.hpp"
#include "ompforge/errors.hpp"
#include "ompforge/util.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <thread>

using namespace ompforge;
namespace fs = std::filesystem;

TEST_CASE("render: exact substitution") {
    PromptTemplate t{StageTemplate::analysis, "work in {kernel_dir}"};
    CHECK(render_prompt(t, {{"kernel_dir", "/runs/cg"}}) == "work in /runs/cg");
}

TEST_CASE("render: missing binding names the placeholder") {
    PromptTemplate t{StageTemplate::analysis, "ls: {file_listing}"};
    try {
        render_prompt(t, {{"kernel_dir", "x"}});
        FAIL("expected UnboundPlaceholder");
    } catch (const UnboundPlaceholder& e) {
        CHECK(e.placeholder == "file_listing");
    }
}

TEST_CASE("render: inserted braces are never re-expanded") {
    PromptTemplate t{StageTemplate::analysis, "body: {payload}"};
    auto out = render_prompt(t, {{"payload", "{kernel_dir} stays literal"}});
    CHECK(out == "body: {kernel_dir} stays literal");
}

TEST_CASE("default templates carry their placeholders") {
    auto baseline = default_template(StageTemplate::baseline_single_pass);
    // the single-pass prompt is the five-item task list
    for (const char* item : {"1.", "2.", "3.", "4.", "5."})
        CHECK(baseline.body.find(item) != std::string::npos);
    CHECK(baseline.body.find("{kernel_dir}") != std::string::npos);

    auto tuning = default_template(StageTemplate::tuning);
    CHECK(tuning.body.find("{profiler_output}") != std::string::npos);
    CHECK(tuning.body.find("{prior_actions}") != std::string::npos);
}

TEST_CASE("transcript round-trip and totals") {
    auto file = fs::temp_directory_path() / "ofg_transcript.jsonl";
    AgentTranscript t;
    t.kernel_id = "toy";
    t.turns.push_back({"hash1", "response one", {100, 20}});
    t.turns.push_back({"hash2", "response two\nwith newline", {300, 50}});
    save_transcript(t, file);
    auto loaded = load_transcript(file);
    REQUIRE(loaded.turns.size() == 2);
    CHECK(loaded.turns[1].response == "response two\nwith newline");
    CHECK(loaded.totals().prompt_tokens == 400);
    CHECK(loaded.totals().completion_tokens == 70);
    fs::remove(file);
}

TEST_CASE("replay: recorded turns come back verbatim, drift fails loudly") {
    auto file = fs::temp_directory_path() / "ofg_replay.jsonl";
    AgentTranscript recorded;
    recorded.turns.push_back({util::sha256_hex("prompt-a"), "answer-a", {10, 5}});
    recorded.turns.push_back({util::sha256_hex("prompt-b"), "answer-b", {20, 6}});
    save_transcript(recorded, file);

    auto session = AgentSession(std::make_shared<ReplayTransport>(file), "toy");
    auto r1 = session.invoke("prompt-a", "m");
    CHECK(r1.text == "answer-a");
    auto r2 = session.invoke("prompt-b", "m");
    CHECK(r2.text == "answer-b");
    CHECK(session.transcript().totals().prompt_tokens == 30);
    CHECK(session.transcript().totals().completion_tokens == 11);

    auto bad = AgentSession(std::make_shared<ReplayTransport>(file), "toy");
    CHECK_THROWS_AS(bad.invoke("prompt-DRIFTED", "m"), ReplayMismatch);

    auto exhausted = AgentSession(std::make_shared<ReplayTransport>(file), "toy");
    exhausted.invoke("prompt-a", "m");
    exhausted.invoke("prompt-b", "m");
    CHECK_THROWS_AS(exhausted.invoke("prompt-a", "m"), ReplayMismatch);
    fs::remove(file);
}

TEST_CASE("canonicalization makes transcripts location independent") {
    AgentTranscript recorded;
    recorded.turns.push_back({util::sha256_hex("work in {kernel_dir} now"), "ok", {1, 1}});
    auto file = fs::temp_directory_path() / "ofg_canon.jsonl";
    save_transcript(recorded, file);

    for (const char* dir : {"/tmp/run_one/kernel", "/var/other/place"}) {
        auto session = AgentSession(std::make_shared<ReplayTransport>(file), "toy");
        session.set_canonical_substitution(dir, "{kernel_dir}");
        auto r = session.invoke(std::string("work in ") + dir + " now", "m");
        CHECK(r.text == "ok");
    }
    fs::remove(file);
}

TEST_CASE("live transport refuses to start without a credential") {
    unsetenv("OMPFORGE_API_KEY");
    HttpTransportConfig cfg;
    cfg.endpoint_url = "http://localhost:1/v1/chat/completions";
    CHECK_THROWS_AS(HttpTransport{cfg}, ConfigError);
}

TEST_CASE("live transport speaks the chat-completion wire shape") {
    httplib::Server server;
    server.Post("/v1/chat/completions", [](const httplib::Request& req, httplib::Response& res) {
        auto j = nlohmann::json::parse(req.body);
        std::string content = j["messages"][0]["content"];
        nlohmann::json out;
        out["choices"] = {{{"message", {{"role", "assistant"}, {"content", "echo: " + content}}}}};
        out["usage"] = {{"prompt_tokens", 42}, {"completion_tokens", 7}};
        res.set_content(out.dump(), "application/json");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    std::thread t([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    setenv("OMPFORGE_API_KEY", "test-key", 1);
    HttpTransportConfig cfg;
    cfg.endpoint_url = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
    HttpTransport transport(cfg);
    auto r = transport.send("hash", "hello agent", "some-model");
    CHECK(r.text == "echo: hello agent");
    CHECK(r.usage.prompt_tokens == 42);
    CHECK(r.usage.completion_tokens == 7);
    server.stop();
    t.join();
    unsetenv("OMPFORGE_API_KEY");
}

TEST_CASE("token accounting reproduces the recorded per-kernel ledger") {
    auto mk = [](const char* id, long long total) {
        AgentTranscript t;
        t.kernel_id = id;
        t.turns.push_back({"", "r1", {total / 2, total - total / 2 - 1000}});
        t.turns.push_back({"", "r2", {700, 300}});
        return t;
    };
    std::vector<AgentTranscript> staged = {mk("cg", 776036), mk("ep", 967774), mk("ft", 1031208),
                                           mk("mg", 575786)};
    auto report = account_tokens(staged);
    CHECK(report.mean == doctest::Approx(837701.0));
    // accounting consistency: totals equal the per-turn sums
    for (size_t i = 0; i < staged.size(); ++i)
        CHECK(report.per_kernel[i].second == staged[i].totals().total());

    std::vector<AgentTranscript> single_pass = {mk("cg", 286118), mk("ep", 1379682), mk("ft", 880104),
                                                mk("mg", 475765)};
    auto base_report = account_tokens(single_pass);
    CHECK(base_report.mean == doctest::Approx(755417.25));

    auto text = format_token_report(report, "staged", &base_report, "single-pass");
    CHECK(text.find("| mean | 837701 |") != std::string::npos);
    CHECK(text.find("| mean | 755417 |") != std::string::npos);
    CHECK(text.find("1.11") != std::string::npos);
}
