#ifndef LORASIM_CODEC_HPP
#define LORASIM_CODEC_HPP

// Encoder/decoder for the Semtech packet-forwarder UDP protocol and its JSON
// payload bodies (rxpk/txpk). This module is the single authority for bytes
// on the wire; nothing else in the library serializes protocol messages.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lorasim/bytes.hpp"

namespace lorasim::codec {

// 8-byte gateway identifier. Rendered as "eui-" + 16 lowercase hex digits.
struct GatewayEui {
  std::array<std::uint8_t, 8> bytes{};

  std::string to_string() const;                            // "eui-0102030405060708"
  std::string hex() const;                                  // "0102030405060708"
  static std::optional<GatewayEui> from_hex(std::string_view s); // accepts an optional "eui-" prefix

  auto operator<=>(const GatewayEui&) const = default;
};

struct Token {
  std::uint16_t value = 0;
  auto operator<=>(const Token&) const = default;
};

enum class DatagramKind : std::uint8_t {
  PushData = 0x00,
  PushAck = 0x01,
  PullData = 0x02,
  PullResp = 0x03,
  PullAck = 0x04,
  TxAck = 0x05,
};

const char* to_string(DatagramKind k);

// Which kinds carry the 8-byte gateway identifier / may carry a JSON body.
bool kind_has_eui(DatagramKind k);
bool kind_allows_body(DatagramKind k);
bool kind_requires_body(DatagramKind k);

inline constexpr std::uint8_t kProtocolVersion = 2; // versions 1 and 2 accepted on decode

struct Datagram {
  std::uint8_t version = kProtocolVersion;
  Token token;
  DatagramKind kind = DatagramKind::PushData;
  GatewayEui eui;    // meaningful only when kind_has_eui(kind)
  Bytes body;        // JSON text; empty when the kind has no body

  bool operator==(const Datagram&) const = default;
};

// Per-packet uplink metadata carried in a PUSH_DATA rxpk body.
struct RxPacketMeta {
  int stat = 1;              // 1 CRC ok, -1 CRC failed, 0 no CRC
  double freq_mhz = 868.1;
  int sf = 7;                // carried on the wire as "SF<n>BW125"
  std::string data;          // base64 of the MAC frame
  std::size_t size = 0;      // decoded byte count

  bool operator==(const RxPacketMeta&) const = default;
};

// Downlink payload metadata carried in a PULL_RESP txpk body.
struct TxPacketMeta {
  double freq_mhz = 868.1;
  int sf = 7;
  std::string data;
  std::size_t size = 0;

  bool operator==(const TxPacketMeta&) const = default;
};

enum class DecodeError {
  None,
  ShortDatagram,   // fewer than 4 bytes
  BadVersion,      // version byte outside {1, 2}
  UnknownKind,     // byte 3 outside the identifier set
  LengthMismatch,  // length inconsistent with the kind's layout
};

const char* to_string(DecodeError e);

struct DecodeResult {
  std::optional<Datagram> datagram;
  DecodeError error = DecodeError::None;
  bool ok() const { return datagram.has_value(); }
};

enum class BodyError {
  None,
  BadJson,
  MissingField,
  BadStat,       // stat outside {1, 0, -1}
  BadDatarate,   // datr not of the form SF<7..12>BW125
  BadBase64,
  SizeMismatch,  // base64 does not decode to exactly `size` bytes
};

const char* to_string(BodyError e);

struct RxParseResult {
  std::optional<std::vector<RxPacketMeta>> packets;
  BodyError error = BodyError::None;
  bool ok() const { return packets.has_value(); }
};

struct TxParseResult {
  std::optional<TxPacketMeta> packet;
  BodyError error = BodyError::None;
  bool ok() const { return packet.has_value(); }
};

// Header layout: byte 0 version, bytes 1-2 token (big-endian), byte 3 kind,
// bytes 4-11 EUI on the kinds that carry one, remainder body verbatim.
// Throws std::invalid_argument when the datagram violates the body rules.
Bytes encode_datagram(const Datagram& d);

DecodeResult decode_datagram(const Bytes& raw);
DecodeResult decode_datagram(const std::uint8_t* data, std::size_t len);

std::string datarate_text(int sf);                      // "SF7BW125"
std::optional<int> parse_datarate(std::string_view s);

Bytes encode_rxpk(const std::vector<RxPacketMeta>& pkts);
Bytes encode_txpk(const TxPacketMeta& pkt);
Bytes encode_tx_ack_status(std::string_view error); // {"txpk_ack":{"error":...}}

RxParseResult parse_rxpk(const Bytes& body);
TxParseResult parse_txpk(const Bytes& body);

} // namespace lorasim::codec

#endif
