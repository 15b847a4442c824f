#include "lorasim/mac.hpp"

#include <algorithm>
#include <stdexcept>

#include "lorasim/keyed_mac.hpp"

namespace lorasim::mac {

std::string DevAddr::hex() const { return to_hex(bytes.data(), bytes.size()); }

std::optional<DevAddr> DevAddr::from_hex(std::string_view s) {
  auto raw = lorasim::from_hex(s);
  if (!raw || raw->size() != 4) return std::nullopt;
  DevAddr a;
  std::copy(raw->begin(), raw->end(), a.bytes.begin());
  return a;
}

const char* to_string(VerifyResult r) {
  switch (r) {
    case VerifyResult::Accepted: return "accepted";
    case VerifyResult::RejectedCounter: return "rejected_counter";
    case VerifyResult::RejectedMic: return "rejected_mic";
  }
  return "?";
}

std::array<std::uint8_t, 4> compute_mic(const NwkSKey& key, const MacFrame& frame,
                                        Direction dir, MicMode mode,
                                        std::optional<std::uint16_t> acked_fcnt) {
  bool needs_acked = mode == MicMode::V1_1 && dir == Direction::Down && frame.ack_flag();
  if (needs_acked && !acked_fcnt)
    throw std::invalid_argument("V1_1 ACK MIC requires the acknowledged uplink counter");

  Bytes input;
  input.reserve(11 + frame.payload.size());
  input.push_back(static_cast<std::uint8_t>(dir));
  input.push_back(frame.mhdr);
  input.insert(input.end(), frame.dev_addr.bytes.begin(), frame.dev_addr.bytes.end());
  input.push_back(static_cast<std::uint8_t>(frame.fcnt & 0xff));
  input.push_back(static_cast<std::uint8_t>(frame.fcnt >> 8));
  input.push_back(frame.fctrl);
  input.insert(input.end(), frame.payload.begin(), frame.payload.end());
  if (needs_acked) {
    input.push_back(static_cast<std::uint8_t>(*acked_fcnt & 0xff));
    input.push_back(static_cast<std::uint8_t>(*acked_fcnt >> 8));
  }

  std::uint64_t tag = keyed_mac64(key.bytes, input.data(), input.size());
  return {static_cast<std::uint8_t>(tag & 0xff),
          static_cast<std::uint8_t>(tag >> 8 & 0xff),
          static_cast<std::uint8_t>(tag >> 16 & 0xff),
          static_cast<std::uint8_t>(tag >> 24 & 0xff)};
}

MacFrame build_ack(const NwkSKey& key, const DevAddr& dev_addr,
                   std::uint16_t downlink_fcnt, MicMode mode, std::uint16_t acked_fcnt) {
  MacFrame f;
  f.mhdr = kMhdrUnconfirmedDown;
  f.dev_addr = dev_addr;
  f.fctrl = kFctrlAck;
  f.fcnt = downlink_fcnt;
  f.mic = compute_mic(key, f, Direction::Down, mode, acked_fcnt);
  return f;
}

MacFrame build_uplink(const NwkSKey& key, const DevAddr& dev_addr, bool confirmed,
                      std::uint16_t fcnt, Bytes payload, MicMode mode) {
  MacFrame f;
  f.mhdr = confirmed ? kMhdrConfirmedUp : kMhdrUnconfirmedUp;
  f.dev_addr = dev_addr;
  f.fctrl = 0;
  f.fcnt = fcnt;
  f.payload = std::move(payload);
  f.mic = compute_mic(key, f, Direction::Up, mode, std::nullopt);
  return f;
}

VerifyResult verify_ack(const NwkSKey& key, const MacFrame& frame,
                        std::uint16_t device_last_down_fcnt, MicMode mode,
                        std::uint16_t expected_acked_fcnt) {
  if (frame.fcnt <= device_last_down_fcnt) return VerifyResult::RejectedCounter;
  auto mic = compute_mic(key, frame, Direction::Down, mode,
                         frame.ack_flag() ? std::optional(expected_acked_fcnt) : std::nullopt);
  return mic == frame.mic ? VerifyResult::Accepted : VerifyResult::RejectedMic;
}

Bytes serialize_frame(const MacFrame& frame) {
  Bytes out;
  out.reserve(kFrameOverhead + frame.payload.size());
  out.push_back(frame.mhdr);
  out.insert(out.end(), frame.dev_addr.bytes.begin(), frame.dev_addr.bytes.end());
  out.push_back(frame.fctrl);
  out.push_back(static_cast<std::uint8_t>(frame.fcnt & 0xff));
  out.push_back(static_cast<std::uint8_t>(frame.fcnt >> 8));
  out.insert(out.end(), frame.payload.begin(), frame.payload.end());
  out.insert(out.end(), frame.mic.begin(), frame.mic.end());
  return out;
}

std::optional<MacFrame> parse_frame(const Bytes& raw) {
  if (raw.size() < kFrameOverhead) return std::nullopt;
  MacFrame f;
  f.mhdr = raw[0];
  std::copy(raw.begin() + 1, raw.begin() + 5, f.dev_addr.bytes.begin());
  f.fctrl = raw[5];
  f.fcnt = static_cast<std::uint16_t>(raw[6] | raw[7] << 8);
  f.payload.assign(raw.begin() + 8, raw.end() - 4);
  std::copy(raw.end() - 4, raw.end(), f.mic.begin());
  return f;
}

} // namespace lorasim::mac
