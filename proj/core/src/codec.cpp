#include "lorasim/codec.hpp"

#include <stdexcept>

#include "json.hpp"

namespace lorasim::codec {

using nlohmann::json;

std::string GatewayEui::hex() const { return to_hex(bytes.data(), bytes.size()); }

std::string GatewayEui::to_string() const { return "eui-" + hex(); }

std::optional<GatewayEui> GatewayEui::from_hex(std::string_view s) {
  if (s.rfind("eui-", 0) == 0) s.remove_prefix(4);
  auto raw = lorasim::from_hex(s);
  if (!raw || raw->size() != 8) return std::nullopt;
  GatewayEui eui;
  std::copy(raw->begin(), raw->end(), eui.bytes.begin());
  return eui;
}

const char* to_string(DatagramKind k) {
  switch (k) {
    case DatagramKind::PushData: return "PUSH_DATA";
    case DatagramKind::PushAck: return "PUSH_ACK";
    case DatagramKind::PullData: return "PULL_DATA";
    case DatagramKind::PullResp: return "PULL_RESP";
    case DatagramKind::PullAck: return "PULL_ACK";
    case DatagramKind::TxAck: return "TX_ACK";
  }
  return "?";
}

bool kind_has_eui(DatagramKind k) {
  return k == DatagramKind::PushData || k == DatagramKind::PullData ||
         k == DatagramKind::TxAck;
}

bool kind_allows_body(DatagramKind k) {
  return k == DatagramKind::PushData || k == DatagramKind::PullResp ||
         k == DatagramKind::TxAck;
}

bool kind_requires_body(DatagramKind k) {
  return k == DatagramKind::PushData || k == DatagramKind::PullResp;
}

const char* to_string(DecodeError e) {
  switch (e) {
    case DecodeError::None: return "none";
    case DecodeError::ShortDatagram: return "short_datagram";
    case DecodeError::BadVersion: return "bad_version";
    case DecodeError::UnknownKind: return "unknown_kind";
    case DecodeError::LengthMismatch: return "length_mismatch";
  }
  return "?";
}

const char* to_string(BodyError e) {
  switch (e) {
    case BodyError::None: return "none";
    case BodyError::BadJson: return "bad_json";
    case BodyError::MissingField: return "missing_field";
    case BodyError::BadStat: return "bad_stat";
    case BodyError::BadDatarate: return "bad_datarate";
    case BodyError::BadBase64: return "bad_base64";
    case BodyError::SizeMismatch: return "size_mismatch";
  }
  return "?";
}

Bytes encode_datagram(const Datagram& d) {
  if (!d.body.empty() && !kind_allows_body(d.kind))
    throw std::invalid_argument(std::string("body not allowed on ") + to_string(d.kind));
  if (d.body.empty() && kind_requires_body(d.kind))
    throw std::invalid_argument(std::string("body required on ") + to_string(d.kind));

  Bytes out;
  out.reserve(4 + (kind_has_eui(d.kind) ? 8 : 0) + d.body.size());
  out.push_back(d.version);
  out.push_back(static_cast<std::uint8_t>(d.token.value >> 8));
  out.push_back(static_cast<std::uint8_t>(d.token.value & 0xff));
  out.push_back(static_cast<std::uint8_t>(d.kind));
  if (kind_has_eui(d.kind))
    out.insert(out.end(), d.eui.bytes.begin(), d.eui.bytes.end());
  out.insert(out.end(), d.body.begin(), d.body.end());
  return out;
}

DecodeResult decode_datagram(const std::uint8_t* data, std::size_t len) {
  DecodeResult res;
  if (len < 4) {
    res.error = DecodeError::ShortDatagram;
    return res;
  }
  std::uint8_t version = data[0];
  if (version != 1 && version != 2) {
    res.error = DecodeError::BadVersion;
    return res;
  }
  if (data[3] > 0x05) {
    res.error = DecodeError::UnknownKind;
    return res;
  }
  auto kind = static_cast<DatagramKind>(data[3]);

  std::size_t header = kind_has_eui(kind) ? 12 : 4;
  if (len < header) {
    res.error = DecodeError::LengthMismatch;
    return res;
  }
  std::size_t body_len = len - header;
  if (body_len > 0 && !kind_allows_body(kind)) {
    res.error = DecodeError::LengthMismatch;
    return res;
  }
  if (body_len == 0 && kind_requires_body(kind)) {
    res.error = DecodeError::LengthMismatch;
    return res;
  }

  Datagram d;
  d.version = version;
  d.token.value = static_cast<std::uint16_t>(data[1] << 8 | data[2]);
  d.kind = kind;
  if (kind_has_eui(kind)) std::copy(data + 4, data + 12, d.eui.bytes.begin());
  d.body.assign(data + header, data + len);
  res.datagram = std::move(d);
  return res;
}

DecodeResult decode_datagram(const Bytes& raw) {
  return decode_datagram(raw.data(), raw.size());
}

std::string datarate_text(int sf) { return "SF" + std::to_string(sf) + "BW125"; }

std::optional<int> parse_datarate(std::string_view s) {
  // Only SF varies in this artifact; bandwidth is pinned to 125 kHz.
  if (s.rfind("SF", 0) != 0) return std::nullopt;
  std::size_t bw = s.find("BW125");
  if (bw == std::string_view::npos || bw + 5 != s.size()) return std::nullopt;
  int sf = 0;
  for (std::size_t i = 2; i < bw; ++i) {
    if (s[i] < '0' || s[i] > '9') return std::nullopt;
    sf = sf * 10 + (s[i] - '0');
  }
  if (sf < 7 || sf > 12) return std::nullopt;
  return sf;
}

namespace {

json rx_to_json(const RxPacketMeta& p) {
  if (p.stat != 1 && p.stat != 0 && p.stat != -1)
    throw std::invalid_argument("stat must be 1, 0 or -1");
  json j;
  j["stat"] = p.stat;
  j["freq"] = p.freq_mhz;
  j["datr"] = datarate_text(p.sf);
  j["size"] = p.size;
  j["data"] = p.data;
  return j;
}

Bytes json_to_bytes(const json& j) {
  std::string s = j.dump();
  return Bytes(s.begin(), s.end());
}

// Unknown keys are ignored; real forwarders send many more.
BodyError rx_from_json(const json& j, RxPacketMeta& out) {
  if (!j.is_object()) return BodyError::BadJson;
  if (!j.contains("stat") || !j.contains("freq") || !j.contains("datr") ||
      !j.contains("size") || !j.contains("data"))
    return BodyError::MissingField;
  if (!j["stat"].is_number_integer()) return BodyError::BadStat;
  int stat = j["stat"].get<int>();
  if (stat != 1 && stat != 0 && stat != -1) return BodyError::BadStat;
  if (!j["datr"].is_string()) return BodyError::BadDatarate;
  auto sf = parse_datarate(j["datr"].get<std::string>());
  if (!sf) return BodyError::BadDatarate;
  if (!j["freq"].is_number() || !j["size"].is_number_unsigned() || !j["data"].is_string())
    return BodyError::MissingField;
  out.stat = stat;
  out.freq_mhz = j["freq"].get<double>();
  out.sf = *sf;
  out.size = j["size"].get<std::size_t>();
  out.data = j["data"].get<std::string>();
  auto decoded = base64_decode(out.data);
  if (!decoded) return BodyError::BadBase64;
  if (decoded->size() != out.size) return BodyError::SizeMismatch;
  return BodyError::None;
}

} // namespace

Bytes encode_rxpk(const std::vector<RxPacketMeta>& pkts) {
  json arr = json::array();
  for (const auto& p : pkts) arr.push_back(rx_to_json(p));
  json j;
  j["rxpk"] = std::move(arr);
  return json_to_bytes(j);
}

Bytes encode_txpk(const TxPacketMeta& pkt) {
  json t;
  t["freq"] = pkt.freq_mhz;
  t["datr"] = datarate_text(pkt.sf);
  t["size"] = pkt.size;
  t["data"] = pkt.data;
  json j;
  j["txpk"] = std::move(t);
  return json_to_bytes(j);
}

Bytes encode_tx_ack_status(std::string_view error) {
  json j;
  j["txpk_ack"]["error"] = std::string(error);
  return json_to_bytes(j);
}

RxParseResult parse_rxpk(const Bytes& body) {
  RxParseResult res;
  json j = json::parse(body.begin(), body.end(), nullptr, false);
  if (j.is_discarded()) {
    res.error = BodyError::BadJson;
    return res;
  }
  if (!j.is_object() || !j.contains("rxpk") || !j["rxpk"].is_array()) {
    res.error = BodyError::MissingField;
    return res;
  }
  std::vector<RxPacketMeta> pkts;
  for (const auto& e : j["rxpk"]) {
    RxPacketMeta p;
    if (auto err = rx_from_json(e, p); err != BodyError::None) {
      res.error = err;
      return res;
    }
    pkts.push_back(std::move(p));
  }
  res.packets = std::move(pkts);
  return res;
}

TxParseResult parse_txpk(const Bytes& body) {
  TxParseResult res;
  json j = json::parse(body.begin(), body.end(), nullptr, false);
  if (j.is_discarded()) {
    res.error = BodyError::BadJson;
    return res;
  }
  if (!j.is_object() || !j.contains("txpk") || !j["txpk"].is_object()) {
    res.error = BodyError::MissingField;
    return res;
  }
  const json& t = j["txpk"];
  if (!t.contains("freq") || !t.contains("datr") || !t.contains("size") || !t.contains("data")) {
    res.error = BodyError::MissingField;
    return res;
  }
  if (!t["datr"].is_string()) {
    res.error = BodyError::BadDatarate;
    return res;
  }
  auto sf = parse_datarate(t["datr"].get<std::string>());
  if (!sf) {
    res.error = BodyError::BadDatarate;
    return res;
  }
  if (!t["freq"].is_number() || !t["size"].is_number_unsigned() || !t["data"].is_string()) {
    res.error = BodyError::MissingField;
    return res;
  }
  TxPacketMeta p;
  p.freq_mhz = t["freq"].get<double>();
  p.sf = *sf;
  p.size = t["size"].get<std::size_t>();
  p.data = t["data"].get<std::string>();
  auto decoded = base64_decode(p.data);
  if (!decoded) {
    res.error = BodyError::BadBase64;
    return res;
  }
  if (decoded->size() != p.size) {
    res.error = BodyError::SizeMismatch;
    return res;
  }
  res.packet = std::move(p);
  return res;
}

} // namespace lorasim::codec
