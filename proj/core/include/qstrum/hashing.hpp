#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace qstrum {

/// Lowercase hex SHA-256 of the input bytes.
std::string sha256_hex(std::string_view data);

/// First eight bytes of the SHA-256 digest, big-endian. Used to seed generators.
std::uint64_t sha256_prefix64(std::string_view data);

}  // namespace qstrum
