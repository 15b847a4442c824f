#include "lorasim/radio.hpp"

#include <algorithm>
#include <stdexcept>

namespace lorasim::radio {

namespace {
// Inflight entries are kept long past their end so that late resolutions can
// still see every overlapping frame; nothing can overlap once the gap exceeds
// the longest possible airtime by a wide margin.
constexpr SimTime kPruneGraceMs = 60000;

bool overlaps(SimTime a0, SimTime a1, SimTime b0, SimTime b1) {
  return a0 < b1 && b0 < a1;
}
} // namespace

double airtime_ms(int sf, std::size_t payload_len, double base_ms) {
  if (sf < 7 || sf > 12) throw std::invalid_argument("spreading factor out of range [7,12]");
  return base_ms * static_cast<double>(1 << (sf - 7)) *
         (static_cast<double>(payload_len) / static_cast<double>(kReferenceFrameBytes));
}

ChannelModel ChannelModel::with_defaults() {
  ChannelModel m;
  m.jam_success[7] = 0.0;
  m.jam_success[8] = 0.0;
  m.jam_success[9] = 0.5;
  m.jam_success[10] = 0.97;
  m.jam_success[11] = 0.97;
  m.jam_success[12] = 0.97;
  return m;
}

Ether::Ether(sim::EventQueue& queue, ChannelModel model, Rng rng)
    : queue_(queue), model_(model), rng_(std::move(rng)) {}

void Ether::set_node_count(int n) { adj_.assign(static_cast<std::size_t>(n), {}); }

void Ether::add_adjacency(int a, int b) {
  if (a == b) return;
  auto& va = adj_.at(static_cast<std::size_t>(a));
  auto& vb = adj_.at(static_cast<std::size_t>(b));
  if (std::find(va.begin(), va.end(), b) == va.end()) {
    va.push_back(b);
    vb.push_back(a);
    std::sort(va.begin(), va.end());
    std::sort(vb.begin(), vb.end());
  }
}

bool Ether::adjacent(int a, int b) const {
  if (a < 0 || static_cast<std::size_t>(a) >= adj_.size()) return false;
  const auto& va = adj_[static_cast<std::size_t>(a)];
  return std::binary_search(va.begin(), va.end(), b);
}

std::uint64_t Ether::transmit(Bytes payload, int sf, double channel_mhz, int source) {
  prune(queue_.now());

  RadioFrame f;
  f.seq = next_seq_++;
  f.sf = sf;
  f.channel_mhz = channel_mhz;
  f.source = source;
  f.start = queue_.now();
  f.airtime = airtime_ms(sf, payload.size(), model_.base_airtime_ms);
  f.payload = std::move(payload);
  inflight_.push_back(f);

  if (on_frame_start) on_frame_start(inflight_.back());

  std::uint64_t seq = f.seq;
  for (int node : adj_[static_cast<std::size_t>(source)]) {
    queue_.at(f.end(), [this, seq, node] {
      const RadioFrame* fr = find_frame(seq);
      if (!fr) return;
      Outcome out = resolve(seq, node);
      if (out.lost || !deliver) return;
      Reception r;
      r.frame = *fr;
      r.at = node;
      r.crc_ok = out.crc_ok;
      r.jam_overlap = out.jam_overlap;
      deliver(r);
    });
  }
  return seq;
}

bool Ether::carrier_busy(double channel_mhz, SimTime t) const {
  for (const auto& f : inflight_)
    if (f.channel_mhz == channel_mhz && t >= f.start && t < f.end()) return true;
  for (const auto& b : bursts_)
    if (b.channel == channel_mhz && t >= b.start && t < b.end) return true;
  return false;
}

void Ether::add_jam_burst(int jammer_node, double channel_mhz, SimTime start, SimTime end) {
  if (end <= start) return;
  bursts_.push_back(Burst{jammer_node, channel_mhz, start, end});
}

void Ether::end_bursts(int jammer_node, SimTime t) {
  for (auto& b : bursts_)
    if (b.jammer == jammer_node && b.end > t) b.end = t;
}

Ether::Outcome Ether::resolve(std::uint64_t frame_seq, int node) {
  auto key = std::make_pair(frame_seq, node);
  if (auto it = resolved_.find(key); it != resolved_.end()) return it->second;

  const RadioFrame* f = find_frame(frame_seq);
  Outcome out;
  if (!f) {
    resolved_[key] = out;
    return out;
  }

  // Same-SF overlap audible at this node corrupts the frame outright;
  // different SFs coexist.
  for (const auto& g : inflight_) {
    if (g.seq == f->seq || g.source == f->source) continue;
    if (g.sf != f->sf || g.channel_mhz != f->channel_mhz) continue;
    if (!adjacent(g.source, node)) continue;
    if (overlaps(f->start, f->end(), g.start, g.end())) {
      out.crc_ok = false;
      break;
    }
  }

  for (const auto& b : bursts_) {
    if (b.channel != f->channel_mhz) continue;
    if (!adjacent(b.jammer, node)) continue;
    if (overlaps(f->start, f->end(), b.start, b.end)) {
      out.jam_overlap = true;
      break;
    }
  }

  if (out.jam_overlap && rng_.bernoulli(model_.jam_success[static_cast<std::size_t>(f->sf)])) {
    if (model_.crc_policy_on_jam == CrcPolicyOnJam::Corrupt)
      out.crc_ok = false;
    else
      out.lost = true;
  }

  resolved_[key] = out;
  return out;
}

const RadioFrame* Ether::find_frame(std::uint64_t seq) const {
  for (const auto& f : inflight_)
    if (f.seq == seq) return &f;
  return nullptr;
}

void Ether::prune(SimTime now) {
  while (!inflight_.empty() && inflight_.front().end() + kPruneGraceMs < now) {
    for (auto it = resolved_.begin(); it != resolved_.end();) {
      if (it->first.first == inflight_.front().seq)
        it = resolved_.erase(it);
      else
        ++it;
    }
    inflight_.pop_front();
  }
  while (!bursts_.empty() && bursts_.front().end + kPruneGraceMs < now) bursts_.pop_front();
}

} // namespace lorasim::radio
