#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "igsim/common/errors.hpp"

namespace igsim::ctl {

enum class RunStatus { pending, running, done, failed };

const char* status_name(RunStatus s);
RunStatus parse_status(const std::string& s);

struct RunEntry {
    std::string run_id;
    RunStatus status = RunStatus::pending;
    std::string dir;  // relative to the output root
    std::string error;
};

class ManifestError : public Error {
public:
    using Error::Error;
};

struct RunManifest {
    std::string plan_hash;
    std::vector<RunEntry> runs;

    RunEntry& entry(const std::string& run_id);
    const RunEntry* find(const std::string& run_id) const;

    /// Allowed moves: pending->running, running->done, running->failed.
    /// Anything else raises ManifestError.
    void transition(const std::string& run_id, RunStatus to, const std::string& error = "");
    /// Puts a failed or interrupted (running) run back to pending for --resume.
    void reopen(const std::string& run_id);

    bool all_done() const;
};

nlohmann::json to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);

/// Throws ManifestError with a diagnostic when the file is unreadable or
/// malformed; the file itself is left untouched.
RunManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const std::filesystem::path& path, const RunManifest& m);

}  // namespace igsim::ctl
