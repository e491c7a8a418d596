#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

namespace igsim::world {

inline constexpr char kCheckpointMagic[4] = {'I', 'G', 'C', 'K'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
    std::string run_id;
    std::string snapshot;           // World::snapshot()
    std::uint64_t event_lines = 0;  // records written before the snapshot
    std::uint64_t probe_lines = 0;
};

std::string encode_checkpoint(const Checkpoint& cp);
/// Throws IntegrityError on a bad magic, version or truncated payload.
Checkpoint decode_checkpoint(const std::string& bytes);

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& cp);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace igsim::world
