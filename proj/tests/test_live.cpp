#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>
#include <thread>

#include "lorasim/live.hpp"

using namespace lorasim;
using namespace lorasim::live;

namespace {

struct Client {
  int fd;
  sockaddr_in server{};

  explicit Client(int server_port) {
    fd = ::socket(AF_INET, SOCK_DGRAM, 0);
    REQUIRE(fd >= 0);
    server.sin_family = AF_INET;
    server.sin_port = htons(static_cast<std::uint16_t>(server_port));
    inet_pton(AF_INET, "127.0.0.1", &server.sin_addr);
  }
  ~Client() { ::close(fd); }

  void send(const Bytes& b) {
    ::sendto(fd, b.data(), b.size(), 0, reinterpret_cast<sockaddr*>(&server),
             sizeof(server));
  }

  std::optional<Bytes> recv(int timeout_ms = 3000) {
    pollfd pfd{fd, POLLIN, 0};
    if (::poll(&pfd, 1, timeout_ms) <= 0) return std::nullopt;
    std::uint8_t buf[2048];
    ssize_t n = ::recv(fd, buf, sizeof(buf), 0);
    if (n <= 0) return std::nullopt;
    return Bytes(buf, buf + n);
  }
};

} // namespace

TEST_CASE("a real forwarder exchange over loopback UDP: PULL and PUSH are acked") {
  sim::Scenario scn = sim::make_canned("baseline");
  LiveWire wire(scn, "127.0.0.1:0");
  REQUIRE(wire.port() > 0);

  std::thread server([&] { wire.run_for(2500); });

  Client client(wire.port());

  // keepalive opens a route
  codec::Datagram pull;
  pull.token.value = 0x4711;
  pull.kind = codec::DatagramKind::PullData;
  pull.eui = scn.gateways[0].cfg.eui;
  client.send(codec::encode_datagram(pull));

  auto pull_ack_raw = client.recv();
  REQUIRE(pull_ack_raw.has_value());
  auto pull_ack = codec::decode_datagram(*pull_ack_raw);
  REQUIRE(pull_ack.ok());
  CHECK(pull_ack.datagram->kind == codec::DatagramKind::PullAck);
  CHECK(pull_ack.datagram->token.value == 0x4711);

  // uplink report: a confirmed frame from the scenario's device
  const auto& dev = scn.devices[0].cfg;
  mac::MacFrame up = mac::build_uplink(dev.key, dev.dev_addr, true, 0, Bytes(25, 0xaa),
                                       scn.mic_mode);
  Bytes frame = mac::serialize_frame(up);
  codec::RxPacketMeta meta;
  meta.stat = 1;
  meta.sf = dev.sf;
  meta.data = base64_encode(frame);
  meta.size = frame.size();
  codec::Datagram push;
  push.token.value = 0x2042;
  push.kind = codec::DatagramKind::PushData;
  push.eui = scn.gateways[0].cfg.eui;
  push.body = codec::encode_rxpk({meta});
  client.send(codec::encode_datagram(push));

  auto push_ack_raw = client.recv();
  REQUIRE(push_ack_raw.has_value());
  auto push_ack = codec::decode_datagram(*push_ack_raw);
  REQUIRE(push_ack.ok());
  CHECK(push_ack.datagram->kind == codec::DatagramKind::PushAck);
  CHECK(push_ack.datagram->token.value == 0x2042);

  // the confirmed uplink produces a routed PULL_RESP about a second later
  auto resp_raw = client.recv();
  REQUIRE(resp_raw.has_value());
  auto resp = codec::decode_datagram(*resp_raw);
  REQUIRE(resp.ok());
  CHECK(resp.datagram->kind == codec::DatagramKind::PullResp);
  auto txpk = codec::parse_txpk(resp.datagram->body);
  REQUIRE(txpk.ok());
  auto ack_frame = mac::parse_frame(*base64_decode(txpk.packet->data));
  REQUIRE(ack_frame.has_value());
  CHECK(ack_frame->ack_flag());
  CHECK(mac::verify_ack(dev.key, *ack_frame, 0, scn.mic_mode, 0) ==
        mac::VerifyResult::Accepted);

  server.join();
}
