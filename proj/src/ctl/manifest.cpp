#include "igsim/ctl/manifest.hpp"

#include "igsim/common/io.hpp"

namespace igsim::ctl {

const char* status_name(RunStatus s) {
    switch (s) {
        case RunStatus::pending: return "pending";
        case RunStatus::running: return "running";
        case RunStatus::done: return "done";
        case RunStatus::failed: return "failed";
    }
    return "?";
}

RunStatus parse_status(const std::string& s) {
    for (auto st : {RunStatus::pending, RunStatus::running, RunStatus::done, RunStatus::failed})
        if (s == status_name(st)) return st;
    throw ManifestError("unknown run status '" + s + "'");
}

RunEntry& RunManifest::entry(const std::string& run_id) {
    for (auto& r : runs)
        if (r.run_id == run_id) return r;
    throw ManifestError("manifest has no run '" + run_id + "'");
}

const RunEntry* RunManifest::find(const std::string& run_id) const {
    for (const auto& r : runs)
        if (r.run_id == run_id) return &r;
    return nullptr;
}

void RunManifest::transition(const std::string& run_id, RunStatus to, const std::string& error) {
    auto& e = entry(run_id);
    const bool ok = (e.status == RunStatus::pending && to == RunStatus::running) ||
                    (e.status == RunStatus::running && (to == RunStatus::done || to == RunStatus::failed));
    if (!ok)
        throw ManifestError("illegal status change for " + run_id + ": " + status_name(e.status) + " -> " + status_name(to));
    e.status = to;
    e.error = error;
}

void RunManifest::reopen(const std::string& run_id) {
    auto& e = entry(run_id);
    if (e.status == RunStatus::failed || e.status == RunStatus::running) e.status = RunStatus::pending;
}

bool RunManifest::all_done() const {
    for (const auto& r : runs)
        if (r.status != RunStatus::done) return false;
    return true;
}

nlohmann::json to_json(const RunManifest& m) {
    nlohmann::json runs = nlohmann::json::array();
    for (const auto& r : m.runs) {
        nlohmann::json e = {{"run_id", r.run_id}, {"status", status_name(r.status)}, {"dir", r.dir}};
        if (!r.error.empty()) e["error"] = r.error;
        runs.push_back(std::move(e));
    }
    return {{"plan_hash", m.plan_hash}, {"runs", runs}};
}

RunManifest manifest_from_json(const nlohmann::json& j) {
    RunManifest m;
    try {
        m.plan_hash = j.at("plan_hash").get<std::string>();
        for (const auto& e : j.at("runs")) {
            RunEntry r;
            r.run_id = e.at("run_id").get<std::string>();
            r.status = parse_status(e.at("status").get<std::string>());
            r.dir = e.at("dir").get<std::string>();
            if (e.contains("error")) r.error = e["error"].get<std::string>();
            m.runs.push_back(std::move(r));
        }
    } catch (const nlohmann::json::exception& ex) {
        throw ManifestError(std::string("manifest is malformed: ") + ex.what());
    }
    return m;
}

RunManifest load_manifest(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& ex) {
        throw ManifestError("manifest " + path.string() + " is corrupt (" + ex.what() +
                            "); it was left untouched, repair or remove it to continue");
    }
    try {
        return manifest_from_json(j);
    } catch (const ManifestError& ex) {
        throw ManifestError("manifest " + path.string() + ": " + ex.what() + "; it was left untouched");
    }
}

void save_manifest(const std::filesystem::path& path, const RunManifest& m) {
    write_file_atomic(path, to_json(m).dump(2) + "\n");
}

}  // namespace igsim::ctl
