#ifndef LORASIM_MAC_HPP
#define LORASIM_MAC_HPP

// LoRaWAN MAC-layer frame model: mhdr | dev_addr(4) | fctrl | fcnt(2) |
// payload | mic(4). Covers the pre-1.1 ACK flaw (the MIC does not bind which
// uplink an ACK acknowledges) and the 1.1 fix (it does).

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "lorasim/bytes.hpp"

namespace lorasim::mac {

struct DevAddr {
  std::array<std::uint8_t, 4> bytes{};

  std::string hex() const;
  static std::optional<DevAddr> from_hex(std::string_view s);
  auto operator<=>(const DevAddr&) const = default;
};

// 16-byte network session key. Never serialized into any datagram, trace, or
// metric output.
struct NwkSKey {
  std::array<std::uint8_t, 16> bytes{};
  auto operator<=>(const NwkSKey&) const = default;
};

enum class MicMode { V1_0, V1_1 };
enum class Direction : std::uint8_t { Up = 0, Down = 1 };

// MHDR values for the frame types the simulator uses.
inline constexpr std::uint8_t kMhdrUnconfirmedUp = 0x40;
inline constexpr std::uint8_t kMhdrConfirmedUp = 0x80;
inline constexpr std::uint8_t kMhdrUnconfirmedDown = 0x60;

// ACK flag: third most significant bit of the frame control byte.
inline constexpr std::uint8_t kFctrlAck = 0x20;

struct MacFrame {
  std::uint8_t mhdr = kMhdrUnconfirmedUp;
  DevAddr dev_addr;
  std::uint8_t fctrl = 0;
  std::uint16_t fcnt = 0;
  Bytes payload;
  std::array<std::uint8_t, 4> mic{};

  bool ack_flag() const { return (fctrl & kFctrlAck) != 0; }
  bool is_uplink() const { return mhdr == kMhdrUnconfirmedUp || mhdr == kMhdrConfirmedUp; }
  bool is_confirmed_uplink() const { return mhdr == kMhdrConfirmedUp; }
  bool is_downlink() const { return mhdr == kMhdrUnconfirmedDown; }

  bool operator==(const MacFrame&) const = default;
};

inline constexpr std::size_t kFrameOverhead = 12; // empty-payload frame size

// MIC over (direction | mhdr | dev_addr | fcnt | fctrl | payload), with the
// acknowledged uplink counter appended in V1_1 when the ACK flag is set.
// Throws std::invalid_argument when a V1_1 downlink ACK is computed without
// acked_fcnt.
std::array<std::uint8_t, 4> compute_mic(const NwkSKey& key, const MacFrame& frame,
                                        Direction dir, MicMode mode,
                                        std::optional<std::uint16_t> acked_fcnt);

MacFrame build_ack(const NwkSKey& key, const DevAddr& dev_addr,
                   std::uint16_t downlink_fcnt, MicMode mode,
                   std::uint16_t acked_fcnt);

MacFrame build_uplink(const NwkSKey& key, const DevAddr& dev_addr, bool confirmed,
                      std::uint16_t fcnt, Bytes payload, MicMode mode);

enum class VerifyResult { Accepted, RejectedCounter, RejectedMic };

const char* to_string(VerifyResult r);

// Counter rule first (fcnt must exceed the last downlink counter the device
// consumed), then MIC recomputation. expected_acked_fcnt is what the verifier
// believes is being acknowledged; it only enters the MIC in V1_1.
VerifyResult verify_ack(const NwkSKey& key, const MacFrame& frame,
                        std::uint16_t device_last_down_fcnt, MicMode mode,
                        std::uint16_t expected_acked_fcnt);

Bytes serialize_frame(const MacFrame& frame);
std::optional<MacFrame> parse_frame(const Bytes& raw); // nullopt when truncated

} // namespace lorasim::mac

#endif
