#ifndef LORASIM_KEYED_MAC_HPP
#define LORASIM_KEYED_MAC_HPP

#include <array>
#include <cstdint>
#include <cstddef>

namespace lorasim::mac {

// Keyed MAC primitive behind which the frame integrity code is computed.
// SipHash-2-4 with a 128-bit key and 64-bit tag; the frame layer truncates.
// Everything above this call site is agnostic to the primitive, so swapping
// in AES-CMAC later is a one-function change.
std::uint64_t keyed_mac64(const std::array<std::uint8_t, 16>& key,
                          const std::uint8_t* data, std::size_t len);

} // namespace lorasim::mac

#endif
