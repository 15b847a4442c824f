#ifndef LORASIM_RADIO_HPP
#define LORASIM_RADIO_HPP

// Virtual ether: schedules transmissions, models airtime by spreading factor,
// and resolves receptions under same-SF collisions and jamming. Coverage is
// an explicit adjacency relation ("who hears whom"), not geometry.

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <vector>

#include "lorasim/bytes.hpp"
#include "lorasim/event_queue.hpp"
#include "lorasim/rng.hpp"

namespace lorasim::radio {

using sim::SimTime;

inline constexpr double kDefaultBaseAirtimeMs = 40.0; // 37-byte frame at SF7
inline constexpr std::size_t kReferenceFrameBytes = 37;

// Airtime doubles per SF step and scales linearly with length:
//   base_ms * 2^(sf-7) * len/37.
// Throws std::invalid_argument when sf is outside [7, 12].
double airtime_ms(int sf, std::size_t payload_len, double base_ms = kDefaultBaseAirtimeMs);

enum class CrcPolicyOnJam { Corrupt, Lose };

struct ChannelModel {
  // Probability a jam overlap actually damages the frame, per SF.
  std::array<double, 13> jam_success{};
  CrcPolicyOnJam crc_policy_on_jam = CrcPolicyOnJam::Corrupt;
  double base_airtime_ms = kDefaultBaseAirtimeMs;

  static ChannelModel with_defaults(); // {7:0, 8:0, 9:0.5, 10:0.97, 11:0.97, 12:0.97}
};

struct RadioFrame {
  std::uint64_t seq = 0; // assigned by the ether
  Bytes payload;         // serialized MAC frame
  int sf = 7;
  double channel_mhz = 868.1;
  int source = -1;       // node index
  SimTime start = 0;
  SimTime airtime = 0;
  SimTime end() const { return start + airtime; }
};

struct Reception {
  RadioFrame frame;
  int at = -1;
  bool crc_ok = true;
  bool jam_overlap = false;
};

class Ether {
 public:
  Ether(sim::EventQueue& queue, ChannelModel model, Rng rng);

  void set_node_count(int n);
  void add_adjacency(int a, int b); // symmetric
  bool adjacent(int a, int b) const;

  // Called at frame start, before reception events are scheduled.
  std::function<void(const RadioFrame&)> on_frame_start;
  // Delivery of a resolved reception at end-of-airtime. Lost frames
  // (CrcPolicyOnJam::Lose) are not delivered.
  std::function<void(const Reception&)> deliver;

  // Computes airtime from the frame's sf and payload length, schedules one
  // reception per adjacent node at end-of-airtime, and returns the frame seq.
  std::uint64_t transmit(Bytes payload, int sf, double channel_mhz, int source);

  // True iff any transmission or jam burst overlaps `t` on the channel.
  // Airtime intervals are half-open [start, end).
  bool carrier_busy(double channel_mhz, SimTime t) const;

  void add_jam_burst(int jammer_node, double channel_mhz, SimTime start, SimTime end);
  // Truncates every burst from this jammer to end no later than t.
  void end_bursts(int jammer_node, SimTime t);

  struct Outcome {
    bool crc_ok = true;
    bool jam_overlap = false;
    bool lost = false;
  };

  // Resolution is memoized per (frame, node): the first caller fixes the
  // outcome, so an early wormhole capture and the reception event at
  // end-of-airtime observe the same bytes-level truth.
  Outcome resolve(std::uint64_t frame_seq, int node);

  const ChannelModel& model() const { return model_; }

 private:
  struct Burst {
    int jammer;
    double channel;
    SimTime start;
    SimTime end;
  };

  const RadioFrame* find_frame(std::uint64_t seq) const;
  void prune(SimTime now);

  sim::EventQueue& queue_;
  ChannelModel model_;
  Rng rng_;
  std::vector<std::vector<int>> adj_;
  std::deque<RadioFrame> inflight_;
  std::deque<Burst> bursts_;
  std::map<std::pair<std::uint64_t, int>, Outcome> resolved_;
  std::uint64_t next_seq_ = 1;
};

} // namespace lorasim::radio

#endif
