#include "igsim/statespace/dump.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include "igsim/common/io.hpp"
#include "igsim/common/sha256.hpp"

namespace igsim::statespace {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(std::string_view in, std::size_t pos) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos + static_cast<std::size_t>(i)])) << (8 * i);
    return v;
}

const char* const kRequired[] = {"n_inputs", "n_layers", "dim", "dtype", "repeats", "labels", "input_sha256"};

}  // namespace

ActivationDump::ActivationDump(std::size_t n_inputs, std::size_t n_layers, std::size_t dim,
                               std::vector<std::string> labels, std::vector<std::string> input_sha256,
                               std::vector<float> data, int repeats)
    : n_inputs_(n_inputs),
      n_layers_(n_layers),
      dim_(dim),
      repeats_(repeats),
      labels_(std::move(labels)),
      input_sha256_(std::move(input_sha256)),
      data_(std::move(data)) {
    if (labels_.size() != n_inputs_) throw DumpFormatError("labels do not cover every input");
    if (input_sha256_.size() != n_inputs_) throw DumpFormatError("input_sha256 does not cover every input");
    if (data_.size() != n_inputs_ * n_layers_ * dim_) throw DumpFormatError("payload size does not match dims");
    if (repeats_ < 1) throw DumpFormatError("repeats must be >= 1");
    for (float v : data_)
        if (!std::isfinite(v)) throw DumpFormatError("non-finite activation value");
}

std::span<const float> ActivationDump::at(std::size_t input, std::size_t layer) const {
    if (input >= n_inputs_ || layer >= n_layers_) throw ValidationError("dump index out of range");
    return {data_.data() + (input * n_layers_ + layer) * dim_, dim_};
}

std::vector<std::size_t> ActivationDump::indices_of(const std::string& label) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < labels_.size(); ++i)
        if (labels_[i] == label) out.push_back(i);
    return out;
}

std::string serialize_dump(const ActivationDump& dump) {
    nlohmann::json header = dump.extra();
    header["n_inputs"] = dump.n_inputs();
    header["n_layers"] = dump.n_layers();
    header["dim"] = dump.dim();
    header["dtype"] = "f32";
    header["repeats"] = dump.repeats();
    header["labels"] = dump.labels();
    header["input_sha256"] = dump.input_sha256();
    const std::string text = header.dump();

    std::string out;
    out.reserve(12 + text.size() + dump.data().size() * 4);
    out.append(kDumpMagic, 4);
    put_u32(out, kDumpVersion);
    put_u32(out, static_cast<std::uint32_t>(text.size()));
    out += text;
    for (float f : dump.data()) put_u32(out, std::bit_cast<std::uint32_t>(f));
    return out;
}

ActivationDump parse_dump(std::string_view bytes) {
    if (bytes.size() < 12) throw DumpFormatError("dump truncated before header");
    if (std::memcmp(bytes.data(), kDumpMagic, 4) != 0) throw DumpFormatError("bad magic, expected ACTD");
    const auto version = get_u32(bytes, 4);
    if (version != kDumpVersion)
        throw DumpFormatError("unsupported dump version " + std::to_string(version));
    const auto hlen = get_u32(bytes, 8);
    if (bytes.size() < 12 + static_cast<std::size_t>(hlen)) throw DumpFormatError("dump truncated inside header");

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(bytes.substr(12, hlen));
    } catch (const nlohmann::json::exception& e) {
        throw DumpFormatError(std::string("header is not valid JSON: ") + e.what());
    }
    for (const char* key : kRequired)
        if (!header.contains(key)) throw DumpFormatError(std::string("header missing '") + key + "'");
    if (header["dtype"] != "f32") throw DumpFormatError("unsupported dtype " + header["dtype"].dump());

    std::size_t n = 0, layers = 0, dim = 0;
    int repeats = 0;
    std::vector<std::string> labels, hashes;
    try {
        n = header["n_inputs"].get<std::size_t>();
        layers = header["n_layers"].get<std::size_t>();
        dim = header["dim"].get<std::size_t>();
        repeats = header["repeats"].get<int>();
        labels = header["labels"].get<std::vector<std::string>>();
        hashes = header["input_sha256"].get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw DumpFormatError(std::string("header field has the wrong type: ") + e.what());
    }
    const std::size_t count = n * layers * dim;
    const std::size_t payload = bytes.size() - 12 - hlen;
    if (payload != count * 4)
        throw DumpFormatError("payload is " + std::to_string(payload) + " bytes, header implies " +
                              std::to_string(count * 4));

    std::vector<float> data(count);
    const std::size_t base = 12 + hlen;
    for (std::size_t i = 0; i < count; ++i) data[i] = std::bit_cast<float>(get_u32(bytes, base + 4 * i));

    ActivationDump dump(n, layers, dim, std::move(labels), std::move(hashes), std::move(data), repeats);
    for (const char* key : kRequired) header.erase(key);
    dump.extra() = std::move(header);
    return dump;
}

ActivationDump read_dump(const std::filesystem::path& path) { return parse_dump(read_file(path)); }

void write_dump(const std::filesystem::path& path, const ActivationDump& dump) {
    write_file_atomic(path, serialize_dump(dump));
}

std::string dump_id(const ActivationDump& dump) { return sha256_hex(serialize_dump(dump)).substr(0, 16); }

}  // namespace igsim::statespace
