#include "lorasim/event_queue.hpp"

#include <algorithm>

namespace lorasim::sim {

void EventQueue::at(SimTime t, std::function<void()> fn) {
  if (t < now_) t = now_; // scheduling in the past clamps to now
  heap_.push_back(Item{t, next_seq_++, std::move(fn)});
  std::push_heap(heap_.begin(), heap_.end(), Later{});
}

void EventQueue::after(SimTime delay, std::function<void()> fn) {
  at(now_ + delay, std::move(fn));
}

bool EventQueue::step(SimTime horizon) {
  if (heap_.empty()) return false;
  if (heap_.front().t >= horizon) return false;
  std::pop_heap(heap_.begin(), heap_.end(), Later{});
  Item item = std::move(heap_.back());
  heap_.pop_back();
  now_ = item.t;
  ++fired_;
  item.fn();
  return true;
}

} // namespace lorasim::sim
