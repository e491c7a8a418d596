#include <atomic>
#include <cmath>
#include <deque>
#include <set>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>

#include "fixtures.hpp"
#include "igsim/common/errors.hpp"
#include "igsim/common/rng.hpp"
#include "igsim/gateway/programs.hpp"
#include "igsim/gateway/remote.hpp"
#include "igsim/gateway/scripted.hpp"

using namespace igsim;
using namespace igsim::gateway;

namespace {

class CannedGateway : public ModelGateway {
public:
    explicit CannedGateway(std::deque<std::string> replies) : replies_(std::move(replies)) {}
    std::string complete(const ChatRequest& req) override {
        seen.push_back(req);
        auto r = replies_.front();
        replies_.pop_front();
        return r;
    }
    std::vector<ChatRequest> seen;

private:
    std::deque<std::string> replies_;
};

ContextFeatures intergroup(xdesign::ConditionCell cell, long tick) {
    ContextFeatures f;
    f.cell = cell;
    f.intergroup = true;
    f.tick = tick;
    f.agent_index = 0;
    f.target_index = 1;
    f.actor_name = "Ada Stone";
    f.target_name = "Ben Reyes";
    f.target_group = "Group B";
    f.location = "cafe";
    return f;
}

ChatRequest act_request(const ContextFeatures& f, std::uint64_t seed) {
    ChatRequest r;
    r.system_text = "sys";
    r.user_text = "what next?";
    r.purpose = Purpose::act;
    r.features = f;
    r.decoding = DecodingParams::generative(seed);
    return r;
}

// Local chat-completions endpoint answering with a scripted status sequence.
struct FakeServer {
    httplib::Server server;
    std::thread thread;
    int port = 0;
    std::atomic<int> hits{0};
    std::string last_body;
    std::string last_request_id;
    std::string last_auth;

    explicit FakeServer(std::function<int(int)> status_for_hit) {
        server.Post("/v1/chat/completions", [this, status_for_hit](const httplib::Request& req, httplib::Response& res) {
            const int n = hits++;
            last_body = req.body;
            last_request_id = req.get_header_value("X-Request-Id");
            last_auth = req.get_header_value("Authorization");
            res.status = status_for_hit(n);
            if (res.status == 200)
                res.set_content(R"({"choices":[{"message":{"role":"assistant","content":"hello there"}}]})",
                                "application/json");
            else
                res.set_content("oops", "text/plain");
        });
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~FakeServer() {
        server.stop();
        thread.join();
    }
    RemoteConfig config() const {
        RemoteConfig c;
        c.base_url = "http://127.0.0.1:" + std::to_string(port);
        c.model = "test-model";
        c.timeout_s = 5;
        c.backoff_initial_s = 0.01;
        c.api_key_env = "IGSIM_TEST_KEY";
        return c;
    }
};

}  // namespace

TEST(Purpose, NamesRoundTrip) {
    for (auto p : {Purpose::plan, Purpose::act, Purpose::converse, Purpose::probe, Purpose::classify_hostile,
                   Purpose::rate_hostility, Purpose::reflect})
        EXPECT_EQ(parse_purpose(purpose_name(p)), p);
    EXPECT_THROW(parse_purpose("dance"), ConfigError);
}

TEST(Validate, EmptyTextsRejected) {
    ChatRequest r;
    r.system_text = "s";
    EXPECT_THROW(validate(r), ValidationError);
    r.user_text = "u";
    EXPECT_NO_THROW(validate(r));
}

TEST(Scripted, PureInInputs) {
    ScriptedGateway gw(test::test_profile(0.5));
    xdesign::ConditionCell both{xdesign::Threat::strong, xdesign::Threat::strong, false, false};
    for (long t = 0; t < 50; ++t) {
        const auto req = act_request(intergroup(both, t), 1000 + t);
        EXPECT_EQ(gw.complete(req), gw.complete(req));
    }
}

TEST(Scripted, PropensityZeroAndOne) {
    xdesign::ConditionCell none{};
    for (std::uint64_t s = 0; s < 200; ++s) {
        const auto f = intergroup(none, static_cast<long>(s));
        EXPECT_FALSE(scripted_behavior(f, 0.0, s).hostile);
        EXPECT_TRUE(scripted_behavior(f, 1.0, s).hostile);
        auto same = f;
        same.intergroup = false;
        EXPECT_FALSE(scripted_behavior(same, 1.0, s).hostile);
    }
}

TEST(Scripted, BinomialRateMatchesPropensity) {
    xdesign::ConditionCell none{};
    for (double p : {0.05, 0.2, 0.5}) {
        int hostile = 0;
        const int n = 2000;
        for (int i = 0; i < n; ++i) hostile += scripted_behavior(intergroup(none, i), p, mix_seed({77, std::uint64_t(i)})).hostile;
        EXPECT_NEAR(hostile / double(n), p, 0.015 + 3 * std::sqrt(p * (1 - p) / n) - 0.015 * (p > 0.3)) << p;
    }
}

TEST(Scripted, HostileTextsCarryMarker) {
    const auto d = scripted_behavior(intergroup({}, 3), 1.0, 9);
    EXPECT_NE(d.text.find(kHostileMarker), std::string::npos);
    EXPECT_NE(d.text.find("Ada Stone"), std::string::npos);
    EXPECT_EQ(scripted_behavior(intergroup({}, 3), 0.0, 9).text.find(kHostileMarker), std::string::npos);
}

TEST(Scripted, MissingRuleIsConfigError) {
    ScriptedProfile p;
    ScriptedGateway gw(p);
    try {
        gw.complete(act_request(intergroup({}, 0), 1));
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("act"), std::string::npos);
    }
    EXPECT_THROW(ScriptedProfile::from_json({{"rules", {{"act", {{"weird_cell", {{"reply", "x"}}}}}}}}), ConfigError);
    EXPECT_THROW(ScriptedProfile::from_json({{"rules", {{"act", {{"default", {{"hostile_propensity", 1.5}}}}}}}}),
                 ConfigError);
}

TEST(Scripted, CellSpecificRuleWinsOverDefault) {
    auto p = ScriptedProfile::from_json(
        {{"rules", {{"plan", {{"default", {{"reply", "d"}}}, {"both", {{"reply", "b"}}}}}}}});
    xdesign::ConditionCell both{xdesign::Threat::strong, xdesign::Threat::strong, false, false};
    EXPECT_EQ(p.lookup(Purpose::plan, both).reply, "b");
    EXPECT_EQ(p.lookup(Purpose::plan, {}).reply, "d");
}

TEST(Scripted, LikertSpreadStaysInRange) {
    auto p = ScriptedProfile::from_json(
        {{"rules", {{"probe", {{"default", {{"likert", {{"default", 6}}}, {"likert_spread", 2}}}}}}}});
    ScriptedGateway gw(p);
    std::set<std::string> seen;
    for (std::uint64_t s = 0; s < 200; ++s) {
        ChatRequest r;
        r.system_text = "s";
        r.user_text = "u";
        r.purpose = Purpose::probe;
        r.decoding = DecodingParams::deterministic(s);
        const auto v = gw.complete(r);
        const int k = std::stoi(v);
        EXPECT_GE(k, 4);
        EXPECT_LE(k, 7);
        seen.insert(v);
    }
    EXPECT_EQ(seen.size(), 4u);
}

TEST(YesNo, Normalization) {
    EXPECT_EQ(normalize_yes_no("Yes."), true);
    EXPECT_EQ(normalize_yes_no("  NO!\n"), false);
    EXPECT_EQ(normalize_yes_no("maybe"), std::nullopt);
    EXPECT_EQ(normalize_yes_no("yes, definitely"), std::nullopt);
}

TEST(Classify, TwoUnparsableRepliesLeaveUnlabeled) {
    CannedGateway gw({"maybe", "maybe"});
    const auto out = classify_hostile(gw, "Ada shouts.", "Group A", "Group B", 1);
    EXPECT_FALSE(out.hostile.has_value());
    EXPECT_EQ(out.attempts, 2);
    EXPECT_FALSE(out.error.empty());
    EXPECT_NE(gw.seen[0].decoding.seed, gw.seen[1].decoding.seed);
    EXPECT_LT(gw.seen[0].decoding.temperature, 0.1);
}

TEST(Classify, SecondAttemptCanSucceed) {
    CannedGateway gw({"hmm", "Yes."});
    const auto out = classify_hostile(gw, "Ada shouts.", "Group A", "Group B", 1);
    EXPECT_EQ(out.hostile, true);
    EXPECT_EQ(out.attempts, 2);
    EXPECT_NE(gw.seen[0].user_text.find("Ada shouts."), std::string::npos);
}

TEST(Classify, IntragroupIsRefused) {
    CannedGateway gw({});
    EXPECT_THROW(classify_hostile(gw, "x", "Group A", "Group A", 1), ValidationError);
}

TEST(Rating, ParsesEmbeddedJson) {
    const auto r = parse_hostility_rating(
        "Sure. {\"rating\": 4, \"behavior_type\": \"verbal\", \"is_hostile\": true, \"reasoning\": \"r\", "
        "\"specific_actions\": [\"insult\"]} done");
    EXPECT_EQ(r.rating, 4.0);
    EXPECT_TRUE(r.is_hostile);
    EXPECT_EQ(r.behavior_type, "verbal");
    EXPECT_EQ(r.specific_actions, std::vector<std::string>{"insult"});
    EXPECT_TRUE(r.warnings.empty());
}

TEST(Rating, ClampsOutOfRange) {
    const auto r = parse_hostility_rating("{\"rating\": 9}");
    EXPECT_EQ(r.rating, 5.0);
    EXPECT_TRUE(r.is_hostile);
    ASSERT_FALSE(r.warnings.empty());
    EXPECT_NE(r.warnings[0].find("clamped"), std::string::npos);
    EXPECT_FALSE(parse_hostility_rating("{\"rating\": 2}").is_hostile);
    EXPECT_TRUE(parse_hostility_rating("{\"rating\": 3}").is_hostile);
}

TEST(Rating, NonJsonTwiceIsError) {
    CannedGateway gw({"no idea", "still no idea"});
    EXPECT_THROW(rate_hostility(gw, "scenario", "response", 1), RatingError);
    CannedGateway ok({"nope", "{\"rating\": 2}"});
    EXPECT_EQ(rate_hostility(ok, "scenario", "response", 1).rating, 2.0);
}

TEST(Remote, ConfigParsing) {
    const auto c = parse_remote_config("# comment\nbase_url = http://h:1/x\nmodel=m\nretries=5\ntimeout_s=2.5\n");
    EXPECT_EQ(c.base_url, "http://h:1/x");
    EXPECT_EQ(c.retries, 5);
    EXPECT_DOUBLE_EQ(c.timeout_s, 2.5);
    EXPECT_THROW(parse_remote_config("model=m\n"), ConfigError);
    EXPECT_THROW(parse_remote_config("base_url=http://h\nmodel=m\ncolour=blue\n"), ConfigError);
    EXPECT_THROW(parse_remote_config("base_url=http://h\nmodel=m\nretries=abc\n"), ConfigError);
    EXPECT_THROW(parse_remote_config("base_url=http://h\nmodel=m\nretries=0\n"), ConfigError);
}

TEST(Remote, RequestBodyCarriesDecoding) {
    RemoteConfig c;
    c.base_url = "http://127.0.0.1:9";
    c.model = "m";
    RemoteGateway gw(c);
    ChatRequest r = act_request({}, 42);
    const auto j = nlohmann::json::parse(gw.request_body(r));
    EXPECT_EQ(j["model"], "m");
    EXPECT_EQ(j["messages"][0]["role"], "system");
    EXPECT_EQ(j["messages"][1]["content"], "what next?");
    EXPECT_EQ(j["seed"], 42);
    EXPECT_DOUBLE_EQ(j["temperature"].get<double>(), 0.8);
    EXPECT_EQ(j["top_k"], 50);
}

TEST(Remote, SuccessAfterTransientFailure) {
    FakeServer srv([](int hit) { return hit == 0 ? 503 : 200; });
    setenv("IGSIM_TEST_KEY", "sekrit", 1);
    RemoteGateway gw(srv.config());
    EXPECT_EQ(gw.complete(act_request({}, 1)), "hello there");
    EXPECT_EQ(srv.hits.load(), 2);
    EXPECT_EQ(srv.last_auth, "Bearer sekrit");
    EXPECT_FALSE(srv.last_request_id.empty());
    unsetenv("IGSIM_TEST_KEY");
}

TEST(Remote, PersistentServerErrorRaisesWithRequestId) {
    FakeServer srv([](int) { return 500; });
    RemoteGateway gw(srv.config());
    try {
        gw.complete(act_request({}, 1));
        FAIL();
    } catch (const GatewayError& e) {
        EXPECT_EQ(srv.hits.load(), 3);
        EXPECT_EQ(e.request_id(), srv.last_request_id);
        EXPECT_NE(std::string(e.what()).find(e.request_id()), std::string::npos);
    }
}

TEST(Remote, ClientErrorIsNotRetried) {
    FakeServer srv([](int) { return 400; });
    RemoteGateway gw(srv.config());
    EXPECT_THROW(gw.complete(act_request({}, 1)), GatewayError);
    EXPECT_EQ(srv.hits.load(), 1);
}

TEST(Remote, UnreachableHostRaises) {
    RemoteConfig c;
    c.base_url = "http://127.0.0.1:1";
    c.model = "m";
    c.timeout_s = 1;
    c.retries = 2;
    c.backoff_initial_s = 0.01;
    RemoteGateway gw(c);
    EXPECT_THROW(gw.complete(act_request({}, 1)), GatewayError);
}

TEST(Inspecting, HookSeesEveryRequest) {
    CannedGateway inner({"a", "b"});
    int calls = 0;
    InspectingGateway gw(inner, [&](const ChatRequest&) { ++calls; });
    gw.complete(act_request({}, 1));
    gw.complete(act_request({}, 2));
    EXPECT_EQ(calls, 2);
}
