#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "igsim/common/errors.hpp"

namespace igsim::statespace {

/// Malformed activation-dump bytes (magic, version, header, payload size).
class DumpFormatError : public Error {
public:
    using Error::Error;
};

inline constexpr char kDumpMagic[4] = {'A', 'C', 'T', 'D'};
inline constexpr std::uint32_t kDumpVersion = 1;

/// Last-token residual activations, one d-vector per (input, layer), already
/// averaged over repeats. Stored input-major, layer-major, component-minor.
class ActivationDump {
public:
    ActivationDump() = default;
    ActivationDump(std::size_t n_inputs, std::size_t n_layers, std::size_t dim, std::vector<std::string> labels,
                   std::vector<std::string> input_sha256, std::vector<float> data, int repeats = 1);

    std::size_t n_inputs() const noexcept { return n_inputs_; }
    std::size_t n_layers() const noexcept { return n_layers_; }
    std::size_t dim() const noexcept { return dim_; }
    int repeats() const noexcept { return repeats_; }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    const std::vector<std::string>& input_sha256() const noexcept { return input_sha256_; }
    const std::vector<float>& data() const noexcept { return data_; }

    /// Header keys beyond the required set (tap point, anchor token, ...).
    nlohmann::json& extra() noexcept { return extra_; }
    const nlohmann::json& extra() const noexcept { return extra_; }

    std::span<const float> at(std::size_t input, std::size_t layer) const;

    /// Inputs carrying a label, in input order.
    std::vector<std::size_t> indices_of(const std::string& label) const;

private:
    std::size_t n_inputs_ = 0, n_layers_ = 0, dim_ = 0;
    int repeats_ = 1;
    std::vector<std::string> labels_;
    std::vector<std::string> input_sha256_;
    std::vector<float> data_;
    nlohmann::json extra_ = nlohmann::json::object();
};

std::string serialize_dump(const ActivationDump& dump);
ActivationDump parse_dump(std::string_view bytes);

ActivationDump read_dump(const std::filesystem::path& path);
void write_dump(const std::filesystem::path& path, const ActivationDump& dump);

/// Short content hash used in vector provenance.
std::string dump_id(const ActivationDump& dump);

}  // namespace igsim::statespace
