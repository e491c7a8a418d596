#include "igsim/world/sim.hpp"

#include <algorithm>

#include <json.hpp>

#include "igsim/common/errors.hpp"
#include "igsim/common/rng.hpp"
#include "igsim/gateway/programs.hpp"
#include "igsim/world/beliefs.hpp"
#include "igsim/world/clock.hpp"
#include "igsim/world/context.hpp"
#include "igsim/world/planner.hpp"
#include "igsim/world/probe.hpp"

namespace igsim::world {

using gateway::ChatRequest;
using gateway::DecodingParams;
using gateway::Purpose;

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n\"");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t\r\n\"") - b + 1);
}

}  // namespace

World::World(WorldMap map, std::vector<PersonaSpec> personas, WorldConfig cfg)
    : map_(std::move(map)), cfg_(std::move(cfg)) {
    if (personas.empty()) throw ConfigError("world needs at least one persona");
    if (cfg_.horizon_ticks <= 0) throw ConfigError("horizon must be positive");
    if (cfg_.act_interval <= 0) throw ConfigError("act_interval must be positive");
    if (cfg_.max_turns < 1 || cfg_.max_turns > 8) throw ConfigError("max_turns must lie in 1..8");
    for (const auto& s : cfg_.probe_scales) scale_items(s, xdesign::Group::A);
    if (cfg_.probe_scales.empty()) cfg_.probe_scales = probe_scales();

    std::vector<std::string> names;
    std::vector<xdesign::HomePoint> homes;
    for (const auto& p : personas) {
        if (!map_.walkable(p.home)) throw ConfigError("home of '" + p.name + "' is not walkable");
        names.push_back(p.name);
        homes.push_back({p.home.x, p.home.y});
    }
    assignment_ = xdesign::assign_groups(names, homes, cfg_.seed, cfg_.cell);
    for (std::size_t i = 0; i < personas.size(); ++i) {
        AgentState a;
        a.persona = std::move(personas[i]);
        a.index = static_cast<int>(i);
        a.group = assignment_.group[i];
        a.location = a.persona.home;
        a.identity = xdesign::identity_statement(a.persona.name, a.group);
        for (auto& ev : inject_beliefs(a.persona.name, xdesign::group_letter(a.group), cfg_.cell, 0))
            a.beliefs.push_back(std::move(ev.text));
        agents_.push_back(std::move(a));
    }
    probe_hour_.assign(agents_.size(), -1);
}

std::string World::place_key(Cell c) const {
    const auto& loc = map_.location_at(c);
    if (!loc.empty()) return loc;
    return "cell:" + std::to_string(c.x) + "," + std::to_string(c.y);
}

std::string World::location_label(const AgentState& a) const {
    const auto& loc = map_.location_at(a.location);
    if (!loc.empty()) return loc;
    return a.location == a.persona.home ? "home" : "street";
}

void World::set_location(int agent, Cell c) {
    if (!map_.walkable(c)) throw ValidationError("set_location: cell is not walkable");
    agents_.at(static_cast<std::size_t>(agent)).location = c;
}

void World::set_plan(int agent, std::vector<PlanItem> plan) {
    std::stable_sort(plan.begin(), plan.end(), [](const PlanItem& a, const PlanItem& b) { return a.start_tick < b.start_tick; });
    agents_.at(static_cast<std::size_t>(agent)).plan = std::move(plan);
}

gateway::ContextFeatures World::features(int agent, int target) const {
    gateway::ContextFeatures f;
    const auto& a = agents_[static_cast<std::size_t>(agent)];
    f.cell = cfg_.cell;
    f.tick = tick_;
    f.agent_index = agent;
    f.target_index = target;
    f.actor_name = a.persona.name;
    f.location = location_label(a);
    if (target >= 0) {
        const auto& t = agents_[static_cast<std::size_t>(target)];
        f.intergroup = t.group != a.group;
        f.target_name = t.persona.name;
        f.target_group = xdesign::group_name(t.group);
    }
    return f;
}

std::uint64_t World::call_seed(Purpose p, int agent, std::uint64_t extra) const {
    return mix_seed({cfg_.seed, static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(agent),
                     static_cast<std::uint64_t>(tick_), extra});
}

const std::vector<int>& World::field_for(const AgentState& a, const std::string& location) {
    const std::string key = location == "home" ? "home:" + std::to_string(a.persona.home.x) + "," +
                                                     std::to_string(a.persona.home.y)
                                               : location;
    auto it = fields_.find(key);
    if (it == fields_.end()) {
        auto targets = location == "home" ? std::vector<Cell>{a.persona.home} : map_.location(location);
        it = fields_.emplace(key, map_.distance_field(targets)).first;
    }
    return it->second;
}

void World::remember(AgentState& a, MemoryEvent ev) {
    a.memory.push_back(std::move(ev));
    if (a.memory.size() > cfg_.memory_cap + cfg_.memory_cap / 4)
        a.memory.erase(a.memory.begin(), a.memory.end() - static_cast<long>(cfg_.memory_cap));
}

bool World::asleep(const AgentState& a) const {
    const auto* item = a.current_item(tick_);
    return item && item->sleep && a.location == a.persona.home;
}

EventRecord World::base_event(int initiator, int target) const {
    const auto& a = agents_[static_cast<std::size_t>(initiator)];
    EventRecord e;
    e.run_id = cfg_.run_id;
    e.tick = tick_;
    e.sim_hour = sim_hour(tick_);
    e.initiator = a.persona.name;
    e.initiator_index = initiator;
    e.initiator_group = xdesign::group_letter(a.group);
    e.location = location_label(a);
    if (target >= 0) {
        const auto& t = agents_[static_cast<std::size_t>(target)];
        e.target = t.persona.name;
        e.target_index = target;
        e.target_group = xdesign::group_letter(t.group);
    }
    return e;
}

void World::day_boundary(gateway::ModelGateway& gw) {
    const long day = day_of(tick_);
    for (auto& a : agents_) {
        if (day > 0) {
            ChatRequest req;
            req.system_text = system_context(a);
            req.user_text = memory_context(a, cfg_.memory_k) + "\n\nIt is the end of day " + std::to_string(day) +
                            ". In two sentences, what are the most important things " + a.persona.name +
                            " learned or felt today?";
            req.purpose = Purpose::reflect;
            req.features = features(a.index, -1);
            req.decoding = DecodingParams::generative(call_seed(Purpose::reflect, a.index, 0));
            const auto text = trim(gw.complete(req));
            if (!text.empty()) remember(a, {tick_, MemoryKind::reflection, text, 0.8});
        }
        auto r = plan_day(a, gw, map_, day, call_seed(Purpose::plan, a.index, 0), features(a.index, -1));
        a.plan = std::move(r.plan);
    }
}

void World::conversation_turn(Conversation& c, gateway::ModelGateway& gw, StepOutput& out) {
    const int speaker = c.turn % 2 == 0 ? c.a : c.b;
    const int listener = c.turn % 2 == 0 ? c.b : c.a;
    auto& s = agents_[static_cast<std::size_t>(speaker)];
    auto& l = agents_[static_cast<std::size_t>(listener)];
    ChatRequest req;
    req.system_text = system_context(s);
    req.user_text = memory_context(s, cfg_.memory_k) + "\n\n" + clock_text(tick_) + ". " + s.persona.name +
                    " is talking with " + l.persona.name + " (" + xdesign::group_name(l.group) + ") at " +
                    location_label(s) + ".\nConversation so far:";
    for (const auto& line : c.lines) req.user_text += "\n" + line;
    req.user_text += "\nWrite " + s.persona.name + "'s next line of dialogue. If the conversation is over, reply [END].";
    req.purpose = Purpose::converse;
    req.features = features(speaker, listener);
    req.features.turn = c.turn;
    req.decoding = DecodingParams::generative(call_seed(Purpose::converse, speaker, static_cast<std::uint64_t>(c.turn) + 1));
    const auto text = trim(gw.complete(req));
    if (text.empty() || text == "[END]") {
        c.ended = true;
    } else {
        auto e = base_event(speaker, listener);
        e.kind = EventKind::conversation_turn;
        e.text = text;
        e.conversation_id = c.id;
        e.turn = c.turn;
        out.events.push_back(std::move(e));
        const auto line = s.persona.name + ": " + text;
        remember(s, {tick_, MemoryKind::conversation, line, 0.6});
        remember(l, {tick_, MemoryKind::conversation, line, 0.6});
        c.lines.push_back(line);
        ++c.turn;
        if (c.turn >= cfg_.max_turns) c.ended = true;
        maybe_probe(speaker, gw, out);
    }
    if (c.ended) {
        s.conversation = -1;
        l.conversation = -1;
    }
}

void World::act(int i, gateway::ModelGateway& gw, StepOutput& out) {
    auto& a = agents_[static_cast<std::size_t>(i)];
    const auto place = place_key(a.location);
    std::vector<int> present;
    std::vector<std::string> names;
    for (const auto& o : agents_) {
        if (o.index == i || place_key(o.location) != place || asleep(o)) continue;
        names.push_back(o.persona.name);
        if (o.conversation < 0) present.push_back(o.index);
    }
    if (names != a.last_seen) {
        if (!names.empty()) {
            std::string t = a.persona.name + " sees";
            for (std::size_t k = 0; k < names.size(); ++k) t += (k ? ", " : " ") + names[k];
            remember(a, {tick_, MemoryKind::percept, t + " at the " + location_label(a) + ".", 0.3});
        }
        a.last_seen = names;
    }
    const auto* item = a.current_item(tick_);
    const std::string intent = item ? item->intent : "free time";
    const std::string head = memory_context(a, cfg_.memory_k) + "\n\n" + clock_text(tick_) + ". " + a.persona.name +
                             " is at the " + location_label(a) + " (plan: " + intent + ").";

    ChatRequest req;
    req.system_text = system_context(a);
    if (present.empty()) {
        req.user_text = head + "\nDescribe in one sentence what " + a.persona.name + " does now.";
        req.purpose = Purpose::act;
        req.features = features(i, -1);
        req.decoding = DecodingParams::generative(call_seed(Purpose::act, i, 0));
        auto e = base_event(i, -1);
        e.text = trim(gw.complete(req));
        if (e.text.empty()) return;
        e.social = false;
        remember(a, {tick_, MemoryKind::action, e.text, 0.2});
        out.events.push_back(std::move(e));
        return;
    }

    const int j = present[a.rotation++ % present.size()];
    auto& t = agents_[static_cast<std::size_t>(j)];
    const std::string who = t.persona.name + " (" + xdesign::group_name(t.group) + ")";
    req.user_text = head + "\n" + who + " is also here. Does " + a.persona.name + " start a conversation with " +
                    t.persona.name + "? Respond only with \"yes\" or \"no\".";
    req.purpose = Purpose::converse;
    req.features = features(i, j);
    req.features.turn = -1;
    req.decoding = DecodingParams::deterministic(call_seed(Purpose::converse, i, 0));
    if (gateway::normalize_yes_no(gw.complete(req)).value_or(false)) {
        Conversation c;
        c.id = next_conversation_++;
        c.a = i;
        c.b = j;
        a.conversation = c.id;
        t.conversation = c.id;
        conversations_.push_back(std::move(c));
        conversation_turn(conversations_.back(), gw, out);
        return;
    }
    req.user_text = head + "\n" + who + " is also here. Describe in one sentence what " + a.persona.name +
                    " does toward " + t.persona.name + ".";
    req.purpose = Purpose::act;
    req.decoding = DecodingParams::generative(call_seed(Purpose::act, i, 1));
    auto e = base_event(i, j);
    e.text = trim(gw.complete(req));
    if (e.text.empty()) return;
    remember(a, {tick_, MemoryKind::action, e.text, 0.5});
    remember(t, {tick_, MemoryKind::percept, e.text, 0.5});
    out.events.push_back(std::move(e));
    maybe_probe(i, gw, out);
}

void World::maybe_probe(int i, gateway::ModelGateway& gw, StepOutput& out) {
    if (!cfg_.probes) return;
    const long hour = sim_hour(tick_);
    if (probe_hour_[static_cast<std::size_t>(i)] == hour) return;
    probe_hour_[static_cast<std::size_t>(i)] = hour;
    for (const auto& scale : cfg_.probe_scales) {
        auto recs = run_probe(agents_[static_cast<std::size_t>(i)], scale, gw,
                              call_seed(Purpose::probe, i, fnv1a64(scale)), features(i, -1), cfg_.run_id);
        for (auto& r : recs) out.probes.push_back(std::move(r));
    }
}

StepOutput World::step(gateway::ModelGateway& gw) {
    if (tick_ >= cfg_.horizon_ticks) throw ValidationError("horizon reached");
    StepOutput out;
    if (tick_ == 0 || tick_of_day(tick_) == 0) day_boundary(gw);
    if (tick_ % kTicksPerHour == 0)
        for (auto& a : agents_)
            for (auto& ev : inject_beliefs(a.persona.name, xdesign::group_letter(a.group), cfg_.cell, tick_))
                remember(a, std::move(ev));

    for (std::size_t idx = 0; idx < agents_.size(); ++idx) {
        const int i = static_cast<int>(idx);
        auto& a = agents_[idx];
        if (a.conversation >= 0) {
            for (auto& c : conversations_)
                if (c.id == a.conversation && !c.ended && c.a == i) {
                    conversation_turn(c, gw, out);
                    break;
                }
            continue;
        }
        const auto* item = a.current_item(tick_);
        const auto& field = field_for(a, item ? item->location : "home");
        if (field[map_.index(a.location)] > 0) {
            a.location = map_.next_step(a.location, field);
            continue;
        }
        if (item && item->sleep) continue;
        if ((tick_ + i) % cfg_.act_interval != 0) continue;
        act(i, gw, out);
    }
    conversations_.erase(std::remove_if(conversations_.begin(), conversations_.end(),
                                        [](const Conversation& c) { return c.ended; }),
                         conversations_.end());
    std::stable_sort(out.events.begin(), out.events.end(),
                     [](const EventRecord& x, const EventRecord& y) { return x.initiator_index < y.initiator_index; });
    ++tick_;
    return out;
}

std::string World::snapshot() const {
    nlohmann::json j;
    j["tick"] = tick_;
    j["next_conversation"] = next_conversation_;
    j["probe_hour"] = probe_hour_;
    auto& convs = j["conversations"] = nlohmann::json::array();
    for (const auto& c : conversations_)
        convs.push_back({{"id", c.id}, {"a", c.a}, {"b", c.b}, {"turn", c.turn}, {"lines", c.lines}});
    auto& agents = j["agents"] = nlohmann::json::array();
    for (const auto& a : agents_) {
        nlohmann::json ja;
        ja["name"] = a.persona.name;
        ja["location"] = {a.location.x, a.location.y};
        ja["conversation"] = a.conversation;
        ja["rotation"] = a.rotation;
        ja["last_seen"] = a.last_seen;
        auto& mem = ja["memory"] = nlohmann::json::array();
        for (const auto& m : a.memory) mem.push_back({m.tick, memory_kind_name(m.kind), m.text, m.salience});
        auto& plan = ja["plan"] = nlohmann::json::array();
        for (const auto& p : a.plan) plan.push_back({p.start_tick, p.location, p.intent, p.sleep});
        agents.push_back(std::move(ja));
    }
    const auto bytes = nlohmann::json::to_cbor(j);
    return std::string(bytes.begin(), bytes.end());
}

void World::restore(const std::string& snapshot) {
    nlohmann::json j;
    try {
        j = nlohmann::json::from_cbor(std::vector<std::uint8_t>(snapshot.begin(), snapshot.end()));
    } catch (const nlohmann::json::exception& e) {
        throw IntegrityError(std::string("world snapshot unreadable: ") + e.what());
    }
    const auto& ja = j.at("agents");
    if (ja.size() != agents_.size()) throw IntegrityError("world snapshot has a different agent count");
    for (std::size_t i = 0; i < agents_.size(); ++i)
        if (ja[i].at("name").get<std::string>() != agents_[i].persona.name)
            throw IntegrityError("world snapshot roster differs at agent " + std::to_string(i));
    tick_ = j.at("tick").get<long>();
    next_conversation_ = j.at("next_conversation").get<long>();
    probe_hour_ = j.at("probe_hour").get<std::vector<long>>();
    conversations_.clear();
    for (const auto& c : j.at("conversations"))
        conversations_.push_back({c.at("id").get<long>(), c.at("a").get<int>(), c.at("b").get<int>(),
                                  c.at("turn").get<int>(), false, c.at("lines").get<std::vector<std::string>>()});
    for (std::size_t i = 0; i < agents_.size(); ++i) {
        auto& a = agents_[i];
        const auto& s = ja[i];
        a.location = {s.at("location")[0].get<int>(), s.at("location")[1].get<int>()};
        a.conversation = s.at("conversation").get<long>();
        a.rotation = s.at("rotation").get<unsigned long>();
        a.last_seen = s.at("last_seen").get<std::vector<std::string>>();
        a.memory.clear();
        for (const auto& m : s.at("memory"))
            a.memory.push_back({m[0].get<long>(), parse_memory_kind(m[1].get<std::string>()), m[2].get<std::string>(),
                                m[3].get<double>()});
        a.plan.clear();
        for (const auto& p : s.at("plan"))
            a.plan.push_back({p[0].get<long>(), p[1].get<std::string>(), p[2].get<std::string>(), p[3].get<bool>()});
    }
}

}  // namespace igsim::world
