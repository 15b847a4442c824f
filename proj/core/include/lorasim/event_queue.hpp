#ifndef LORASIM_EVENT_QUEUE_HPP
#define LORASIM_EVENT_QUEUE_HPP

#include <cstdint>
#include <functional>
#include <vector>

namespace lorasim::sim {

using SimTime = double; // milliseconds

// Time-ordered pending events. Ties break by insertion sequence, giving a
// total order and therefore a deterministic firing schedule.
class EventQueue {
 public:
  void at(SimTime t, std::function<void()> fn);
  void after(SimTime delay, std::function<void()> fn);

  // Fires the next event if its time is strictly below the horizon.
  bool step(SimTime horizon);
  bool empty() const { return heap_.empty(); }
  SimTime now() const { return now_; }
  std::uint64_t fired() const { return fired_; }

 private:
  struct Item {
    SimTime t;
    std::uint64_t seq;
    std::function<void()> fn;
  };
  struct Later {
    bool operator()(const Item& a, const Item& b) const {
      if (a.t != b.t) return a.t > b.t;
      return a.seq > b.seq;
    }
  };

  std::vector<Item> heap_;
  SimTime now_ = 0;
  std::uint64_t next_seq_ = 0;
  std::uint64_t fired_ = 0;
};

} // namespace lorasim::sim

#endif
