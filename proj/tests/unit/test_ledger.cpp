#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "igsim/common/errors.hpp"
#include "igsim/common/io.hpp"
#include "igsim/gateway/scripted.hpp"
#include "igsim/ledger/annotate.hpp"
#include "igsim/ledger/event_log.hpp"
#include "igsim/ledger/panel.hpp"
#include "igsim/ledger/scorer.hpp"
#include "igsim/world/clock.hpp"

using namespace igsim;
using namespace igsim::ledger;
using world::EventKind;
using world::EventRecord;

namespace {

StreamHeader header(const std::string& run, std::size_t n_agents, long hours, bool asym = false) {
    StreamHeader h;
    h.schema = kEventSchema;
    h.run_id = run;
    h.cell.realistic = xdesign::Threat::strong;
    h.cell.asymmetric = asym;
    h.hours = hours;
    h.seed = 4;
    for (std::size_t i = 0; i < n_agents; ++i) {
        h.agents.push_back("agent" + std::to_string(i));
        h.groups.push_back(asym ? (i < n_agents / 5 ? "B" : "A") : (i % 2 ? "B" : "A"));
    }
    return h;
}

EventRecord event(const StreamHeader& h, long tick, int from, int to, const std::string& text, bool social = true) {
    EventRecord e;
    e.run_id = h.run_id;
    e.tick = tick;
    e.sim_hour = tick / world::kTicksPerHour;
    e.initiator = h.agents[from];
    e.initiator_index = from;
    e.initiator_group = h.groups[from];
    if (to >= 0) {
        e.target = h.agents[to];
        e.target_index = to;
        e.target_group = h.groups[to];
    }
    e.text = text;
    e.location = "cafe";
    e.social = social;
    return e;
}

// Random ordered event stream over `hours` for a header.
std::vector<EventRecord> random_events(const StreamHeader& h, std::uint64_t seed, int n) {
    std::mt19937_64 g(seed);
    const auto n_agents = static_cast<int>(h.agents.size());
    std::uniform_int_distribution<long> tick(0, h.hours * world::kTicksPerHour - 1);
    std::uniform_int_distribution<int> who(0, n_agents - 1), target(-1, n_agents - 1);
    std::bernoulli_distribution hostile(0.3);
    std::vector<EventRecord> out;
    for (int k = 0; k < n; ++k) {
        const int a = who(g);
        int b = target(g);
        if (b == a) b = -1;
        out.push_back(event(h, tick(g), a, b, hostile(g) ? "rude [HOSTILE]" : "hello", b >= 0));
    }
    std::stable_sort(out.begin(), out.end(), [](const EventRecord& x, const EventRecord& y) {
        return std::tie(x.tick, x.initiator_index) < std::tie(y.tick, y.initiator_index);
    });
    return out;
}

class FailingAfter : public gateway::ModelGateway {
public:
    FailingAfter(gateway::ModelGateway& inner, int ok_calls) : inner_(inner), left_(ok_calls) {}
    std::string complete(const gateway::ChatRequest& req) override {
        if (left_-- <= 0) throw gateway::GatewayError("simulated outage", "req-1");
        return inner_.complete(req);
    }

private:
    gateway::ModelGateway& inner_;
    int left_;
};

std::vector<AnnotatedEvent> annotate_all(const std::vector<EventRecord>& ev, const xdesign::ConditionCell& cell) {
    gateway::ScriptedGateway gw(test::test_profile());
    auto p = annotate_hostility(ev, gw, cell, 1);
    EXPECT_TRUE(p.complete);
    return p.annotated;
}

}  // namespace

TEST(Stream, WriteThreeReadThree) {
    const auto h = header("none/0", 4, 2);
    const auto path = test::scratch_dir("stream3") / "events.jsonl";
    {
        EventWriter w(path, h);
        w.append(event(h, 1, 0, 1, "hi"));
        w.append(event(h, 1, 2, -1, "reads", false));
        auto conv = event(h, 400, 1, 3, "how are you?");
        conv.kind = EventKind::conversation_turn;
        conv.conversation_id = 0;
        conv.turn = 0;
        w.append(conv);
        EXPECT_EQ(w.records(), 3u);
    }
    const auto s = read_events(path);
    ASSERT_EQ(s.events.size(), 3u);
    EXPECT_EQ(s.header.run_id, "none/0");
    EXPECT_EQ(s.header.agents, h.agents);
    EXPECT_EQ(s.events[0], event(h, 1, 0, 1, "hi"));
    EXPECT_FALSE(s.events[1].target.has_value());
    EXPECT_EQ(s.events[2].kind, EventKind::conversation_turn);
    EXPECT_FALSE(std::filesystem::exists(path.string() + ".lock"));
}

TEST(Stream, MalformedRecordNamesField) {
    const auto h = header("r/0", 2, 1);
    const auto dir = test::scratch_dir("stream_bad");
    {
        EventWriter w(dir / "e.jsonl", h);
        w.append(event(h, 5, 0, 1, "hi"));
    }
    auto text = read_file(dir / "e.jsonl");
    std::ofstream(dir / "e.jsonl", std::ios::app) << "{\"run_id\":\"r/0\",\"tick\":\"late\"}\n";
    try {
        read_events(dir / "e.jsonl");
        FAIL();
    } catch (const SchemaError& e) {
        EXPECT_EQ(e.field(), "tick");
        EXPECT_NE(std::string(e.what()).find(":3"), std::string::npos);
    }
    auto j = to_json(event(h, 5, 0, 1, "hi"));
    j.erase("initiator");
    try {
        event_from_json(j);
        FAIL();
    } catch (const SchemaError& e) {
        EXPECT_EQ(e.field(), "initiator");
    }
}

TEST(Stream, SecondWriterIsLockedOut) {
    const auto h = header("r/0", 2, 1);
    const auto path = test::scratch_dir("stream_lock") / "e.jsonl";
    EventWriter w(path, h);
    EXPECT_THROW(EventWriter(path, h), LockError);
}

TEST(Stream, StaleLockIsTakenOver) {
    const auto h = header("r/0", 2, 1);
    const auto path = test::scratch_dir("stream_stale") / "e.jsonl";
    std::ofstream(path.string() + ".lock") << "999999999";
    EXPECT_NO_THROW(EventWriter(path, h));
}

TEST(Stream, OrderingIsEnforced) {
    const auto h = header("r/0", 3, 1);
    const auto path = test::scratch_dir("stream_order") / "e.jsonl";
    EventWriter w(path, h);
    w.append(event(h, 10, 1, 0, "a"));
    w.append(event(h, 10, 2, 0, "b"));
    EXPECT_THROW(w.append(event(h, 10, 0, 1, "c")), ValidationError);
    EXPECT_THROW(w.append(event(h, 9, 2, 1, "d")), ValidationError);
    auto bad = event(h, 11, 0, 1, "e");
    bad.sim_hour = 3;
    EXPECT_THROW(w.append(bad), SchemaError);
}

TEST(Stream, ReopenTruncatesToKeptRecords) {
    const auto h = header("r/0", 2, 1);
    const auto path = test::scratch_dir("stream_keep") / "e.jsonl";
    {
        EventWriter w(path, h);
        for (long t = 0; t < 5; ++t) w.append(event(h, t, 0, 1, "x"));
    }
    {
        EventWriter w(path, h, false, 2);
        EXPECT_EQ(w.records(), 2u);
        EXPECT_THROW(w.append(event(h, 0, 0, 1, "old")), ValidationError);
        w.append(event(h, 2, 1, 0, "new"));
    }
    const auto s = read_events(path);
    ASSERT_EQ(s.events.size(), 3u);
    EXPECT_EQ(s.events[2].text, "new");
    EXPECT_THROW(truncate_stream(path, 10), IntegrityError);
}

TEST(Stream, ProbeRoundTrip) {
    auto h = header("r/0", 2, 1);
    h.schema = kProbeSchema;
    const auto path = test::scratch_dir("stream_probe") / "p.jsonl";
    {
        ProbeWriter w(path, h);
        w.append({"r/0", 12, "agent0", 0, "bias", "bias1", 5});
        w.append({"r/0", 12, "agent0", 0, "bias", "bias2", std::nullopt});
        EXPECT_THROW(w.append({"r/0", 12, "agent0", 0, "bias", "bias3", 9}), SchemaError);
    }
    const auto s = read_probes(path);
    ASSERT_EQ(s.probes.size(), 2u);
    EXPECT_EQ(s.probes[0].response, 5);
    EXPECT_FALSE(s.probes[1].response.has_value());
    EXPECT_THROW(read_events(path), SchemaError);
}

TEST(Annotate, DerivedVariableRules) {
    const auto h = header("r/0", 4, 1);
    // 0,2 are A; 1,3 are B
    const std::vector<EventRecord> ev = {event(h, 1, 0, 1, "shoves [HOSTILE]"), event(h, 2, 0, 2, "shoves [HOSTILE]"),
                                         event(h, 3, 1, 0, "waves"), event(h, 4, 3, -1, "reads [HOSTILE]", false)};
    const auto a = annotate_all(ev, h.cell);
    ASSERT_EQ(a.size(), 4u);
    EXPECT_EQ(a[0].hostile, true);
    EXPECT_TRUE(a[0].intergroup);
    EXPECT_FALSE(a[0].contact);
    EXPECT_EQ(a[1].hostile, false);  // intragroup
    EXPECT_FALSE(a[1].intergroup);
    EXPECT_EQ(a[2].hostile, false);
    EXPECT_TRUE(a[2].contact);
    EXPECT_EQ(a[3].hostile, false);  // untargeted
    EXPECT_FALSE(a[3].contact);
}

TEST(Annotate, UnlabeledIsNeitherHostileNorContact) {
    const auto h = header("r/0", 2, 1);
    const auto d = derive(event(h, 1, 0, 1, "?"), std::nullopt);
    EXPECT_FALSE(d.hostile.has_value());
    EXPECT_FALSE(d.contact);
    EXPECT_TRUE(d.intergroup);
}

TEST(Annotate, ResumesAfterGatewayFailure) {
    const auto h = header("r/0", 6, 3);
    const auto ev = random_events(h, 3, 120);
    const auto full = annotate_all(ev, h.cell);
    gateway::ScriptedGateway inner(test::test_profile());
    FailingAfter flaky(inner, 10);
    auto partial = annotate_hostility(ev, flaky, h.cell, 1);
    EXPECT_FALSE(partial.complete);
    EXPECT_NE(partial.error.find("req-1"), std::string::npos);
    EXPECT_LT(partial.cursor, ev.size());
    auto done = annotate_hostility(ev, inner, h.cell, 1, nullptr, partial);
    ASSERT_TRUE(done.complete);
    ASSERT_EQ(done.annotated.size(), full.size());
    for (std::size_t i = 0; i < full.size(); ++i) EXPECT_EQ(to_json(done.annotated[i]), to_json(full[i]));
}

TEST(Annotate, FileRoundTrip) {
    const auto h = header("r/0", 4, 2);
    KeywordScorer scorer;
    gateway::ScriptedGateway gw(test::test_profile());
    const auto a = annotate_hostility(random_events(h, 5, 30), gw, h.cell, 2, &scorer).annotated;
    const auto path = test::scratch_dir("annot") / "a.jsonl";
    write_annotated(path, a);
    const auto b = read_annotated(path);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(to_json(a[i]), to_json(b[i]));
}

TEST(Scorer, KeywordLexicon) {
    KeywordScorer s;
    EXPECT_GE(s.score("I hate your kind").hate, kHateThreshold);
    EXPECT_LT(s.score("Lovely weather today").hate, kHateThreshold);
}

TEST(Panel, ConservesCountsOverRandomStreams) {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        const auto h = header("c/" + std::to_string(seed), 5, 4);
        const auto ev = random_events(h, seed, 200);
        const auto a = annotate_all(ev, h.cell);
        for (bool social_only : {false, true}) {
            const auto panel = build_hourly_panel(h, a, {}, {social_only});
            ASSERT_EQ(panel.size(), 20u);
            long hostile = 0, total = 0, contact = 0, social = 0;
            for (const auto& r : panel) {
                hostile += r.hostile_count;
                total += r.total_actions;
                contact += r.contact_count;
                social += r.social_actions;
                EXPECT_LE(r.hostile_count + r.contact_count, r.social_actions);
            }
            long want_h = 0, want_c = 0, want_s = 0;
            for (const auto& x : a) {
                want_h += x.hostile.value_or(false);
                want_c += x.contact;
                want_s += x.event.social;
            }
            EXPECT_EQ(hostile, want_h);
            EXPECT_EQ(contact, want_c);
            EXPECT_EQ(social, want_s);
            EXPECT_EQ(total, social_only ? want_s : static_cast<long>(a.size()));
        }
    }
}

TEST(Panel, DenseShapeAndLagShift) {
    const auto h = header("r/0", 3, 6);
    const auto ev = random_events(h, 9, 150);
    const auto panel = build_hourly_panel(h, annotate_all(ev, h.cell), {});
    ASSERT_EQ(panel.size(), 18u);
    for (std::size_t a = 0; a < 3; ++a)
        for (long t = 0; t < 6; ++t) {
            const auto& r = panel[a * 6 + static_cast<std::size_t>(t)];
            EXPECT_EQ(r.hour, t);
            EXPECT_EQ(r.agent_index, static_cast<int>(a));
            EXPECT_EQ(r.realistic, 1);
            EXPECT_EQ(r.symbolic, 0);
            if (t == 0) {
                EXPECT_FALSE(r.hostile_lag.has_value());
            } else {
                EXPECT_EQ(*r.hostile_lag, panel[a * 6 + t - 1].hostile_count);
                EXPECT_EQ(*r.total_lag, panel[a * 6 + t - 1].total_actions);
            }
        }
}

TEST(Panel, EmptyHoursStillHaveRows) {
    const auto h = header("r/0", 2, 8);
    const std::vector<EventRecord> ev = {event(h, world::ticks_for_hours(5) + 3, 0, 1, "[HOSTILE] shove")};
    const auto panel = build_hourly_panel(h, annotate_all(ev, h.cell), {});
    ASSERT_EQ(panel.size(), 16u);
    EXPECT_EQ(panel[5].hostile_count, 1);
    EXPECT_EQ(*panel[6].hostile_lag, 1);
    for (std::size_t i = 0; i < panel.size(); ++i) {
        if (i != 5) {
            EXPECT_EQ(panel[i].total_actions, 0) << i;
        }
    }
}

TEST(Panel, ProbesAveragePerHourAndLag) {
    const auto h = header("r/0", 2, 3);
    std::vector<world::ProbeRecord> probes = {
        {"r/0", 10, "agent0", 0, "bias", "bias1", 6}, {"r/0", 10, "agent0", 0, "bias", "bias2", 3},
        {"r/0", 20, "agent0", 0, "bias", "bias3", std::nullopt}};
    const auto panel = build_hourly_panel(h, {}, probes);
    EXPECT_DOUBLE_EQ(panel[0].attitudes.at("bias"), 4.5);
    EXPECT_TRUE(std::isnan(panel[1].attitudes.at("bias")));
    EXPECT_DOUBLE_EQ(panel[1].attitudes_lag.at("bias"), 4.5);
    EXPECT_TRUE(std::isnan(panel[0].attitudes_lag.at("bias")));
}

TEST(Panel, RejectsForeignOrOutOfRangeEvents) {
    const auto h = header("r/0", 2, 1);
    auto e = event(h, world::ticks_for_hours(2), 0, 1, "late");
    EXPECT_THROW(build_hourly_panel(h, {derive(e, false)}, {}), IntegrityError);
    auto f = event(h, 3, 0, 1, "x");
    f.run_id = "other/0";
    EXPECT_THROW(build_hourly_panel(h, {derive(f, false)}, {}), IntegrityError);
}

TEST(Panel, MinorityFlagInAsymmetricCells) {
    const auto h = header("r/0", 25, 1, true);
    const auto panel = build_hourly_panel(h, {}, {});
    int minority = 0;
    for (const auto& r : panel) minority += r.minority;
    EXPECT_EQ(minority, 5);
}

TEST(Panel, DuplicateKeysRejectedOnConcat) {
    const auto h = header("r/0", 2, 2);
    const auto p = build_hourly_panel(h, {}, {});
    EXPECT_EQ(concat_panels({p, build_hourly_panel(header("r/1", 2, 2), {}, {})}).size(), 8u);
    EXPECT_THROW(concat_panels({p, p}), IntegrityError);
}

TEST(SystemPanel, AggregatesAndConserves) {
    std::vector<std::vector<HourlyPanelRow>> runs;
    for (int r = 0; r < 3; ++r) {
        const auto h = header("s/" + std::to_string(r), 25, 5);
        runs.push_back(build_hourly_panel(h, annotate_all(random_events(h, 40 + r, 300), h.cell), {}));
    }
    const auto panel = concat_panels(runs);
    const auto sys = aggregate_system(panel);
    ASSERT_EQ(sys.size(), 15u);
    long a = 0, b = 0, c = 0, d = 0;
    for (const auto& r : panel) {
        a += r.hostile_count;
        c += r.total_actions;
    }
    for (const auto& r : sys) {
        b += r.hostile_count;
        d += r.total_actions;
    }
    EXPECT_EQ(a, b);
    EXPECT_EQ(c, d);
    EXPECT_EQ(sys[1].hostile_lag, sys[0].hostile_count);
}

TEST(Frames, LaggedRatesAndColumns) {
    const auto h = header("r/0", 2, 3);
    std::vector<EventRecord> ev = {event(h, 5, 0, 1, "[HOSTILE] a"), event(h, 6, 0, 1, "b")};
    const auto panel = build_hourly_panel(h, annotate_all(ev, h.cell), {});
    const auto f = panel_frame(panel);
    for (const auto& c : panel_columns()) EXPECT_TRUE(f.has(c)) << c;
    EXPECT_DOUBLE_EQ(f.numeric("hostile_rate_lag")[1], 0.5);
    EXPECT_DOUBLE_EQ(f.numeric("hostile_rate_lag")[2], 0.0);
    EXPECT_TRUE(inferkit::is_missing(f.numeric("hostile_rate_lag")[0]));
    EXPECT_TRUE(f.has("time_z"));
    const auto s = system_frame(aggregate_system(panel));
    for (const auto& c : system_columns()) EXPECT_TRUE(s.has(c)) << c;
}
