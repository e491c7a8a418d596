#include "igsim/ledger/event_log.hpp"

#include <cerrno>
#include <csignal>
#include <fcntl.h>
#include <sstream>
#include <unistd.h>

#include "igsim/common/io.hpp"
#include "igsim/world/clock.hpp"

namespace igsim::ledger {

using nlohmann::json;

namespace {

template <typename T>
T field(const json& j, const char* key, const char* what) {
    if (!j.is_object() || !j.contains(key)) throw SchemaError(key, std::string(what) + ": missing field '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw SchemaError(key, std::string(what) + ": field '" + key + "' has the wrong type");
    }
}

}  // namespace

json to_json(const StreamHeader& h) {
    return {{"schema", h.schema}, {"version", h.version}, {"run_id", h.run_id}, {"cell", xdesign::to_json(h.cell)},
            {"agents", h.agents}, {"groups", h.groups},   {"hours", h.hours},   {"seed", h.seed}};
}

StreamHeader header_from_json(const json& j) {
    StreamHeader h;
    h.schema = field<std::string>(j, "schema", "stream header");
    h.version = field<int>(j, "version", "stream header");
    if (h.version != kSchemaVersion) throw SchemaError("version", "unsupported stream version " + std::to_string(h.version));
    h.run_id = field<std::string>(j, "run_id", "stream header");
    if (!j.contains("cell")) throw SchemaError("cell", "stream header: missing field 'cell'");
    h.cell = xdesign::cell_from_json(j["cell"]);
    h.agents = field<std::vector<std::string>>(j, "agents", "stream header");
    h.groups = field<std::vector<std::string>>(j, "groups", "stream header");
    if (h.groups.size() != h.agents.size()) throw SchemaError("groups", "stream header: groups and agents differ in length");
    h.hours = field<long>(j, "hours", "stream header");
    h.seed = j.contains("seed") ? j["seed"].get<std::uint64_t>() : 0;
    return h;
}

void validate_event(const world::EventRecord& e) {
    auto bad = [](const char* f, const std::string& what) { throw SchemaError(f, "event rejected: " + what); };
    if (e.run_id.empty()) bad("run_id", "empty run_id");
    if (e.tick < 0) bad("tick", "negative tick");
    if (e.sim_hour != world::sim_hour(e.tick)) bad("sim_hour", "sim_hour inconsistent with tick");
    if (e.initiator.empty() || e.initiator_index < 0) bad("initiator", "missing initiator");
    if (e.initiator_group != "A" && e.initiator_group != "B") bad("initiator_group", "initiator_group must be A or B");
    if (e.text.empty()) bad("text", "empty text");
    if (e.target.has_value() != e.target_group.has_value()) bad("target_group", "target and target_group must come together");
    if (e.target && e.target_index < 0) bad("target_index", "target without index");
    if (e.target_group && *e.target_group != "A" && *e.target_group != "B") bad("target_group", "target_group must be A or B");
    if (e.kind == world::EventKind::conversation_turn && (!e.target || e.conversation_id < 0 || e.turn < 0))
        bad("target", "conversation turns carry both participants, a conversation id and a turn");
}

json to_json(const world::EventRecord& e) {
    json j = {{"run_id", e.run_id},
              {"tick", e.tick},
              {"sim_hour", e.sim_hour},
              {"initiator", e.initiator},
              {"initiator_index", e.initiator_index},
              {"initiator_group", e.initiator_group},
              {"target", e.target ? json(*e.target) : json(nullptr)},
              {"target_index", e.target_index},
              {"target_group", e.target_group ? json(*e.target_group) : json(nullptr)},
              {"kind", world::event_kind_name(e.kind)},
              {"text", e.text},
              {"location", e.location},
              {"social", e.social}};
    if (e.kind == world::EventKind::conversation_turn) {
        j["conversation_id"] = e.conversation_id;
        j["turn"] = e.turn;
    }
    return j;
}

world::EventRecord event_from_json(const json& j) {
    constexpr const char* w = "event";
    world::EventRecord e;
    e.run_id = field<std::string>(j, "run_id", w);
    e.tick = field<long>(j, "tick", w);
    e.sim_hour = field<long>(j, "sim_hour", w);
    e.initiator = field<std::string>(j, "initiator", w);
    e.initiator_index = field<int>(j, "initiator_index", w);
    e.initiator_group = field<std::string>(j, "initiator_group", w);
    if (!j.contains("target")) throw SchemaError("target", "event: missing field 'target'");
    if (!j["target"].is_null()) e.target = field<std::string>(j, "target", w);
    e.target_index = j.contains("target_index") ? field<int>(j, "target_index", w) : -1;
    if (!j.contains("target_group")) throw SchemaError("target_group", "event: missing field 'target_group'");
    if (!j["target_group"].is_null()) e.target_group = field<std::string>(j, "target_group", w);
    const auto kind = field<std::string>(j, "kind", w);
    if (kind == "action") e.kind = world::EventKind::action;
    else if (kind == "conversation_turn") e.kind = world::EventKind::conversation_turn;
    else throw SchemaError("kind", "event: unknown kind '" + kind + "'");
    e.text = field<std::string>(j, "text", w);
    e.location = field<std::string>(j, "location", w);
    e.social = j.contains("social") ? field<bool>(j, "social", w) : true;
    if (j.contains("conversation_id")) e.conversation_id = field<long>(j, "conversation_id", w);
    if (j.contains("turn")) e.turn = field<int>(j, "turn", w);
    validate_event(e);
    return e;
}

json to_json(const world::ProbeRecord& p) {
    return {{"run_id", p.run_id},     {"tick", p.tick},
            {"agent", p.agent},       {"agent_index", p.agent_index},
            {"scale_id", p.scale_id}, {"item_id", p.item_id},
            {"response", p.response ? json(*p.response) : json(nullptr)}};
}

world::ProbeRecord probe_from_json(const json& j) {
    constexpr const char* w = "probe";
    world::ProbeRecord p;
    p.run_id = field<std::string>(j, "run_id", w);
    p.tick = field<long>(j, "tick", w);
    p.agent = field<std::string>(j, "agent", w);
    p.agent_index = field<int>(j, "agent_index", w);
    p.scale_id = field<std::string>(j, "scale_id", w);
    p.item_id = field<std::string>(j, "item_id", w);
    if (!j.contains("response")) throw SchemaError("response", "probe: missing field 'response'");
    if (!j["response"].is_null()) {
        const int r = field<int>(j, "response", w);
        if (r < 1 || r > 7) throw SchemaError("response", "probe: response outside 1..7");
        p.response = r;
    }
    return p;
}

StreamLock::StreamLock(std::filesystem::path target) : path_(target.string() + ".lock") {
    for (int attempt = 0; attempt < 2; ++attempt) {
        const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
        if (fd >= 0) {
            const auto pid = std::to_string(::getpid());
            [[maybe_unused]] auto n = ::write(fd, pid.data(), pid.size());
            ::close(fd);
            return;
        }
        if (errno != EEXIST) throw LockError("cannot create lock " + path_.string());
        long owner = 0;
        try {
            owner = std::stol(read_file(path_));
        } catch (const std::exception&) {
        }
        if (owner > 0 && owner != ::getpid() && ::kill(static_cast<pid_t>(owner), 0) != 0 && errno == ESRCH) {
            std::filesystem::remove(path_);
            continue;
        }
        throw LockError("stream " + target.string() + " is locked by another writer (pid " + std::to_string(owner) + ")");
    }
    throw LockError("cannot acquire lock " + path_.string());
}

StreamLock::~StreamLock() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
}

void truncate_stream(const std::filesystem::path& path, std::uint64_t records) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open stream " + path.string());
    std::string line, kept;
    std::uint64_t n = 0;
    while (n <= records && std::getline(in, line)) {
        kept += line + "\n";
        ++n;
    }
    if (n < records + 1)
        throw IntegrityError("stream " + path.string() + " holds fewer records than the checkpoint expects");
    in.close();
    write_file_atomic(path, kept);
}

JsonlWriter::JsonlWriter(const std::filesystem::path& path, const StreamHeader& header, bool fresh,
                         std::uint64_t keep_records)
    : lock_(path) {
    if (fresh) {
        out_.open(path, std::ios::binary | std::ios::trunc);
        if (!out_) throw ConfigError("cannot write " + path.string());
        out_ << to_json(header).dump() << '\n';
    } else {
        truncate_stream(path, keep_records);
        out_.open(path, std::ios::binary | std::ios::app);
        if (!out_) throw ConfigError("cannot append to " + path.string());
        records_ = keep_records;
    }
}

void JsonlWriter::write(const json& record) {
    out_ << record.dump() << '\n';
    ++records_;
}

void JsonlWriter::flush() {
    out_.flush();
    if (!out_) throw Error("write failure on event stream");
}

EventWriter::EventWriter(const std::filesystem::path& path, const StreamHeader& header, bool fresh,
                         std::uint64_t keep_records)
    : w_(path, header, fresh, keep_records) {
    if (!fresh && keep_records > 0) {
        const auto s = read_events(path);
        last_tick_ = s.events.back().tick;
        last_index_ = s.events.back().initiator_index;
    }
}

void EventWriter::append(const world::EventRecord& e) {
    validate_event(e);
    if (e.tick < last_tick_ || (e.tick == last_tick_ && e.initiator_index < last_index_))
        throw ValidationError("event out of order at tick " + std::to_string(e.tick));
    last_tick_ = e.tick;
    last_index_ = e.initiator_index;
    w_.write(to_json(e));
}

ProbeWriter::ProbeWriter(const std::filesystem::path& path, const StreamHeader& header, bool fresh,
                         std::uint64_t keep_records)
    : w_(path, header, fresh, keep_records) {}

void ProbeWriter::append(const world::ProbeRecord& p) {
    if (p.response && (*p.response < 1 || *p.response > 7)) throw SchemaError("response", "probe response outside 1..7");
    w_.write(to_json(p));
}

namespace {

template <typename Rec, typename Parse>
std::pair<StreamHeader, std::vector<Rec>> read_stream(const std::filesystem::path& path, const char* schema, Parse parse) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open stream " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("schema", path.string() + ": empty stream");
    StreamHeader h;
    try {
        h = header_from_json(json::parse(line));
    } catch (const json::parse_error& e) {
        throw SchemaError("schema", path.string() + ": unreadable header: " + e.what());
    }
    if (h.schema != schema) throw SchemaError("schema", path.string() + ": expected schema " + schema + ", found " + h.schema);
    std::vector<Rec> out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            out.push_back(parse(json::parse(line)));
        } catch (const json::parse_error& e) {
            throw SchemaError("line", path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        } catch (const SchemaError& e) {
            throw SchemaError(e.field(), path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return {std::move(h), std::move(out)};
}

}  // namespace

EventStream read_events(const std::filesystem::path& path) {
    auto [h, ev] = read_stream<world::EventRecord>(path, kEventSchema, event_from_json);
    return {std::move(h), std::move(ev)};
}

ProbeStream read_probes(const std::filesystem::path& path) {
    auto [h, pr] = read_stream<world::ProbeRecord>(path, kProbeSchema, probe_from_json);
    return {std::move(h), std::move(pr)};
}

}  // namespace igsim::ledger
