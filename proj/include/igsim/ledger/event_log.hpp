#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "igsim/common/errors.hpp"
#include "igsim/world/records.hpp"
#include "igsim/xdesign/condition.hpp"

namespace igsim::ledger {

inline constexpr const char* kEventSchema = "igsim.events";
inline constexpr const char* kProbeSchema = "igsim.probes";
inline constexpr int kSchemaVersion = 1;

/// First line of every stream.
struct StreamHeader {
    std::string schema;
    int version = kSchemaVersion;
    std::string run_id;
    xdesign::ConditionCell cell;
    std::vector<std::string> agents;
    std::vector<std::string> groups;  // "A"/"B" per agent
    long hours = 0;
    std::uint64_t seed = 0;
};

nlohmann::json to_json(const StreamHeader& h);
StreamHeader header_from_json(const nlohmann::json& j);

/// Serialization with field-level validation. Parsing failures raise
/// SchemaError whose field() names the offending key.
nlohmann::json to_json(const world::EventRecord& e);
world::EventRecord event_from_json(const nlohmann::json& j);
nlohmann::json to_json(const world::ProbeRecord& p);
world::ProbeRecord probe_from_json(const nlohmann::json& j);

/// Checks an event before it is written (non-empty identity fields, sim_hour
/// consistent with tick, conversation turns carry both participants).
void validate_event(const world::EventRecord& e);

class LockError : public Error {
public:
    using Error::Error;
};

/// Exclusive "<path>.lock" file held for the lifetime of the object. A lock
/// left behind by a dead process is taken over.
class StreamLock {
public:
    explicit StreamLock(std::filesystem::path target);
    ~StreamLock();
    StreamLock(const StreamLock&) = delete;
    StreamLock& operator=(const StreamLock&) = delete;

private:
    std::filesystem::path path_;
};

/// Append-only JSONL writer with a single-writer lock.
class JsonlWriter {
public:
    /// `fresh` truncates and writes the header; otherwise the stream must exist
    /// and is truncated to `keep_records` records after its header.
    JsonlWriter(const std::filesystem::path& path, const StreamHeader& header, bool fresh,
                std::uint64_t keep_records = 0);

    void write(const nlohmann::json& record);
    void flush();
    std::uint64_t records() const noexcept { return records_; }

private:
    StreamLock lock_;
    std::ofstream out_;
    std::uint64_t records_ = 0;
};

/// Events must arrive ordered by (tick, initiator index).
class EventWriter {
public:
    EventWriter(const std::filesystem::path& path, const StreamHeader& header, bool fresh = true,
                std::uint64_t keep_records = 0);
    void append(const world::EventRecord& e);
    void flush() { w_.flush(); }
    std::uint64_t records() const noexcept { return w_.records(); }

private:
    JsonlWriter w_;
    long last_tick_ = -1;
    int last_index_ = -1;
};

class ProbeWriter {
public:
    ProbeWriter(const std::filesystem::path& path, const StreamHeader& header, bool fresh = true,
                std::uint64_t keep_records = 0);
    void append(const world::ProbeRecord& p);
    void flush() { w_.flush(); }
    std::uint64_t records() const noexcept { return w_.records(); }

private:
    JsonlWriter w_;
};

struct EventStream {
    StreamHeader header;
    std::vector<world::EventRecord> events;
};

struct ProbeStream {
    StreamHeader header;
    std::vector<world::ProbeRecord> probes;
};

EventStream read_events(const std::filesystem::path& path);
ProbeStream read_probes(const std::filesystem::path& path);

/// Keeps the header line plus the first `records` record lines.
void truncate_stream(const std::filesystem::path& path, std::uint64_t records);

}  // namespace igsim::ledger
