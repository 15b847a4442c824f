#ifndef LORASIM_TRACE_HPP
#define LORASIM_TRACE_HPP

#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace lorasim::sim {

// Line-delimited JSON event sink. One record per event with a monotonic
// sequence number, so two runs of the same seed diff line-by-line.
class TraceWriter {
 public:
  virtual ~TraceWriter() = default;

  void event(double t, const char* ev, nlohmann::json fields = nlohmann::json::object()) {
    fields["seq"] = seq_++;
    fields["t"] = t;
    fields["ev"] = ev;
    write(fields);
  }

  std::uint64_t count() const { return seq_; }

 protected:
  virtual void write(const nlohmann::json& record) = 0;

 private:
  std::uint64_t seq_ = 0;
};

class NullTraceWriter final : public TraceWriter {
 protected:
  void write(const nlohmann::json&) override {}
};

class MemoryTraceWriter final : public TraceWriter {
 public:
  const std::vector<nlohmann::json>& records() const { return records_; }

 protected:
  void write(const nlohmann::json& record) override { records_.push_back(record); }

 private:
  std::vector<nlohmann::json> records_;
};

class FileTraceWriter final : public TraceWriter {
 public:
  explicit FileTraceWriter(const std::string& path) : out_(path, std::ios::binary) {}
  bool good() const { return out_.good(); }

 protected:
  void write(const nlohmann::json& record) override { out_ << record.dump() << '\n'; }

 private:
  std::ofstream out_;
};

} // namespace lorasim::sim

#endif
