#pragma once

#include <span>
#include <string>
#include <string_view>

namespace igsim {

/// Lower-case hex SHA-256 digest.
std::string sha256_hex(std::string_view bytes);
std::string sha256_hex(std::span<const unsigned char> bytes);

}  // namespace igsim
