#ifndef LORASIM_BYTES_HPP
#define LORASIM_BYTES_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lorasim {

using Bytes = std::vector<std::uint8_t>;

// Lowercase hex, no separators.
std::string to_hex(const std::uint8_t* data, std::size_t len);
std::string to_hex(const Bytes& b);
std::optional<Bytes> from_hex(std::string_view hex);

// RFC 4648 base64 with padding.
std::string base64_encode(const std::uint8_t* data, std::size_t len);
std::string base64_encode(const Bytes& b);
std::optional<Bytes> base64_decode(std::string_view text);

} // namespace lorasim

#endif
