#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <queue>
#include <string>
#include <vector>

namespace migbatchsim {

// Simulation time: integer microseconds since simulation start.
using SimTime = std::int64_t;

inline SimTime us_from_seconds(double seconds) {
  return static_cast<SimTime>(std::llround(seconds * 1e6));
}

inline double seconds_from_us(SimTime us) { return static_cast<double>(us) * 1e-6; }

enum class EventKind : int {
  Arrival = 0,
  PreprocDone,
  BatchTimerFired,
  ExecDone,
  Shutdown,
};

const char* to_string(EventKind kind);

struct Event {
  SimTime time = 0;
  std::uint64_t sequence = 0;  // FIFO tie-break among equal timestamps
  EventKind kind = EventKind::Shutdown;
  std::int64_t payload = 0;  // request id / bucket index / batch id, per kind
};

// Counting resource (vGPU slots, CPU workers, CU stage slots). Keeps a
// busy-server-time integral so utilization can be reported over a window
// without storing the full occupancy history.
class Resource {
 public:
  Resource() = default;
  Resource(std::string id, int capacity);

  void acquire(SimTime now, int n = 1);
  void release(SimTime now, int n = 1);

  const std::string& id() const { return id_; }
  int capacity() const { return capacity_; }
  int busy() const { return busy_; }

  // Capture the integral value when the clock first reaches `t`; must be set
  // before any acquire/release at or past `t`.
  void set_mark(SimTime t);

  // Busy-server microseconds over [0, end] / [mark, end].
  double busy_integral_us(SimTime end) const;
  double busy_integral_since_mark_us(SimTime end) const;

 private:
  void advance(SimTime now);

  std::string id_;
  int capacity_ = 0;
  int busy_ = 0;
  SimTime last_change_ = 0;
  double integral_us_ = 0.0;
  SimTime mark_time_ = -1;
  bool mark_captured_ = false;
  double integral_at_mark_us_ = 0.0;
};

// Deterministic discrete-event loop. Events with equal timestamps are
// processed in scheduling order (monotone sequence numbers).
class EventLoop {
 public:
  using Handler = std::function<void(const Event&)>;
  using TraceSink = std::function<void(const Event&)>;

  void set_handler(EventKind kind, Handler handler);
  void set_trace_sink(TraceSink sink) { trace_sink_ = std::move(sink); }

  // Returns the sequence number assigned to the event. Scheduling at a time
  // earlier than the current clock is a logic bug and throws.
  std::uint64_t schedule(SimTime time, EventKind kind, std::int64_t payload = 0);

  // Processes events with time <= t_end. Afterwards the clock sits at
  // min(t_end, time of the last processed event); if nothing was processed
  // and the queue holds only later events (or is empty) it advances to t_end.
  void run_until(SimTime t_end);

  void request_stop() { stop_requested_ = true; }

  SimTime now() const { return now_; }
  std::uint64_t processed_count() const { return processed_; }
  std::size_t pending_count() const { return queue_.size(); }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.time != b.time) return a.time > b.time;
      return a.sequence > b.sequence;
    }
  };

  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  Handler handlers_[5];
  TraceSink trace_sink_;
  SimTime now_ = 0;
  std::uint64_t next_sequence_ = 0;
  std::uint64_t processed_ = 0;
  bool stop_requested_ = false;
};

}  // namespace migbatchsim
