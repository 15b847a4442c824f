#include "lorasim/live.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <cstring>
#include <stdexcept>

#include "lorasim/event_queue.hpp"
#include "lorasim/ids.hpp"
#include "lorasim/nodes.hpp"
#include "lorasim/trace.hpp"

namespace lorasim::live {

namespace {

std::pair<std::string, int> split_addr(const std::string& addr) {
  auto colon = addr.rfind(':');
  if (colon == std::string::npos)
    throw std::runtime_error("address must be ip:port, got '" + addr + "'");
  return {addr.substr(0, colon), std::stoi(addr.substr(colon + 1))};
}

} // namespace

struct LiveWire::Impl {
  int fd = -1;
  sim::Scenario scn;
  sim::NullTraceWriter trace;
  sim::MetricsReport metrics;
  nodes::Registry registry;
  sim::EventQueue queue;
  std::unique_ptr<nodes::Server> server;
  std::unique_ptr<ids::DetectionEngine> engine;

  ~Impl() {
    if (fd >= 0) ::close(fd);
  }

  void send_to(const std::string& to, const Bytes& bytes) {
    auto [ip, port] = split_addr(to);
    sockaddr_in dst{};
    dst.sin_family = AF_INET;
    dst.sin_port = htons(static_cast<std::uint16_t>(port));
    if (inet_pton(AF_INET, ip.c_str(), &dst.sin_addr) != 1) return;
    ::sendto(fd, bytes.data(), bytes.size(), 0, reinterpret_cast<sockaddr*>(&dst),
             sizeof(dst));
  }
};

LiveWire::LiveWire(const sim::Scenario& scenario, const std::string& bind_addr)
    : impl_(new Impl) {
  impl_->scn = scenario;

  auto [ip, port] = split_addr(bind_addr);
  impl_->fd = ::socket(AF_INET, SOCK_DGRAM, 0);
  if (impl_->fd < 0) throw std::runtime_error("socket() failed");
  sockaddr_in local{};
  local.sin_family = AF_INET;
  local.sin_port = htons(static_cast<std::uint16_t>(port));
  if (inet_pton(AF_INET, ip.c_str(), &local.sin_addr) != 1)
    throw std::runtime_error("bad bind address '" + bind_addr + "'");
  if (::bind(impl_->fd, reinterpret_cast<sockaddr*>(&local), sizeof(local)) != 0)
    throw std::runtime_error("cannot bind UDP socket on " + bind_addr);
  sockaddr_in bound{};
  socklen_t len = sizeof(bound);
  ::getsockname(impl_->fd, reinterpret_cast<sockaddr*>(&bound), &len);
  port_ = ntohs(bound.sin_port);

  for (const auto& g : impl_->scn.gateways) {
    if (!g.cfg.registered) continue;
    nodes::RegistryEntry e;
    e.eui = g.cfg.eui;
    e.location = g.location;
    impl_->registry.add(e);
  }

  nodes::NodeServices sv;
  sv.now = [im = impl_] { return im->queue.now(); };
  sv.schedule_at = [im = impl_](double at, std::function<void()> fn) {
    im->queue.at(at, std::move(fn));
  };
  sv.send_dgram = [im = impl_](const std::string&, const std::string& to, Bytes bytes) {
    im->send_to(to, bytes);
  };
  sv.transmit = [](Bytes, int, double, int) {}; // no radio on the wire side
  sv.trace = &impl_->trace;

  nodes::ServerConfig sc;
  sc.addr = bind_addr;
  sc.require_registration = impl_->scn.server.require_registration;
  sc.route_policy = impl_->scn.route_policy;
  sc.mic_mode = impl_->scn.mic_mode;
  sc.rx = impl_->scn.rx;
  sc.channel_mhz = impl_->scn.channel_mhz;
  sc.base_airtime_ms = impl_->scn.channel.base_airtime_ms;
  impl_->server = std::make_unique<nodes::Server>(sv, sc, &impl_->registry, Rng(impl_->scn.seed),
                                                  &impl_->metrics.server);
  for (const auto& d : impl_->scn.devices)
    impl_->server->add_device(d.cfg.dev_addr, d.cfg.key);

  if (impl_->scn.ids.enabled) {
    impl_->engine = std::make_unique<ids::DetectionEngine>(impl_->scn.ids.cfg);
    impl_->server->observe = [im = impl_](const ids::Observation& obs) {
      auto raised = im->engine->observe(obs);
      for (const auto& a : raised) {
        ++im->metrics.ids.total;
        ++im->metrics.ids.alerts_by_kind[ids::to_string(a.detector)];
      }
    };
  }

  impl_->metrics.scenario = impl_->scn.name + "+live";
  impl_->metrics.seed = impl_->scn.seed;
}

LiveWire::~LiveWire() { delete impl_; }

sim::MetricsReport LiveWire::run_for(double duration_ms) {
  using clock = std::chrono::steady_clock;
  auto start = clock::now();
  auto elapsed_ms = [&] {
    return std::chrono::duration<double, std::milli>(clock::now() - start).count();
  };

  std::uint8_t buf[4096];
  while (duration_ms <= 0 || elapsed_ms() < duration_ms) {
    double now = elapsed_ms();
    while (impl_->queue.step(now)) {
    }

    pollfd pfd{impl_->fd, POLLIN, 0};
    int rc = ::poll(&pfd, 1, 20);
    if (rc > 0 && (pfd.revents & POLLIN)) {
      sockaddr_in peer{};
      socklen_t plen = sizeof(peer);
      ssize_t n = ::recvfrom(impl_->fd, buf, sizeof(buf), 0,
                             reinterpret_cast<sockaddr*>(&peer), &plen);
      if (n > 0) {
        char ip[INET_ADDRSTRLEN] = {0};
        inet_ntop(AF_INET, &peer.sin_addr, ip, sizeof(ip));
        std::string from = std::string(ip) + ":" + std::to_string(ntohs(peer.sin_port));
        Bytes bytes(buf, buf + n);
        // Handled as a timestamped event so the server sees consistent time.
        impl_->queue.at(elapsed_ms(), [im = impl_, from, bytes] {
          // Live peers are plain UDP: unauthenticated, eavesdroppable.
          im->server->on_datagram(from, nodes::LinkAttrs{}, bytes);
        });
        while (impl_->queue.step(elapsed_ms())) {
        }
      }
    }
  }
  impl_->metrics.horizon_ms = duration_ms;
  return impl_->metrics;
}

} // namespace lorasim::live
