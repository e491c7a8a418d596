#include "igsim/world/checkpoint.hpp"

#include <cstring>

#include <json.hpp>

#include "igsim/common/errors.hpp"
#include "igsim/common/io.hpp"

namespace igsim::world {

namespace {

void put_u32(std::string& s, std::uint32_t v) {
    for (int k = 0; k < 4; ++k) s.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
}

std::uint32_t get_u32(const std::string& s, std::size_t off) {
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(s[off + k])) << (8 * k);
    return v;
}

}  // namespace

std::string encode_checkpoint(const Checkpoint& cp) {
    nlohmann::json j = {{"run_id", cp.run_id}, {"event_lines", cp.event_lines}, {"probe_lines", cp.probe_lines},
                        {"snapshot", nlohmann::json::binary(std::vector<std::uint8_t>(cp.snapshot.begin(), cp.snapshot.end()))}};
    const auto body = nlohmann::json::to_cbor(j);
    std::string out(kCheckpointMagic, 4);
    put_u32(out, kCheckpointVersion);
    put_u32(out, static_cast<std::uint32_t>(body.size()));
    out.append(body.begin(), body.end());
    return out;
}

Checkpoint decode_checkpoint(const std::string& bytes) {
    if (bytes.size() < 12 || std::memcmp(bytes.data(), kCheckpointMagic, 4) != 0)
        throw IntegrityError("checkpoint: bad magic");
    if (const auto v = get_u32(bytes, 4); v != kCheckpointVersion)
        throw IntegrityError("checkpoint: unsupported version " + std::to_string(v));
    const auto len = get_u32(bytes, 8);
    if (bytes.size() != 12 + static_cast<std::size_t>(len)) throw IntegrityError("checkpoint: truncated payload");
    try {
        const auto j = nlohmann::json::from_cbor(std::vector<std::uint8_t>(bytes.begin() + 12, bytes.end()));
        Checkpoint cp;
        cp.run_id = j.at("run_id").get<std::string>();
        cp.event_lines = j.at("event_lines").get<std::uint64_t>();
        cp.probe_lines = j.at("probe_lines").get<std::uint64_t>();
        const auto& bin = j.at("snapshot").get_binary();
        cp.snapshot.assign(bin.begin(), bin.end());
        return cp;
    } catch (const nlohmann::json::exception& e) {
        throw IntegrityError(std::string("checkpoint: corrupt payload: ") + e.what());
    }
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& cp) {
    write_file_atomic(path, encode_checkpoint(cp));
}

Checkpoint read_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(read_file(path)); }

}  // namespace igsim::world
