#include "migbatchsim/engine.hpp"

#include <stdexcept>
#include <utility>

namespace migbatchsim {

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::Arrival:
      return "Arrival";
    case EventKind::PreprocDone:
      return "PreprocDone";
    case EventKind::BatchTimerFired:
      return "BatchTimerFired";
    case EventKind::ExecDone:
      return "ExecDone";
    case EventKind::Shutdown:
      return "Shutdown";
  }
  return "Unknown";
}

Resource::Resource(std::string id, int capacity) : id_(std::move(id)), capacity_(capacity) {
  if (capacity <= 0) throw std::invalid_argument("resource " + id_ + ": capacity must be positive");
}

void Resource::advance(SimTime now) {
  if (now < last_change_) throw std::logic_error("resource " + id_ + ": time moved backwards");
  if (mark_time_ >= 0 && !mark_captured_ && now >= mark_time_) {
    integral_at_mark_us_ = integral_us_ + static_cast<double>(busy_) * static_cast<double>(mark_time_ - last_change_);
    mark_captured_ = true;
  }
  integral_us_ += static_cast<double>(busy_) * static_cast<double>(now - last_change_);
  last_change_ = now;
}

void Resource::acquire(SimTime now, int n) {
  advance(now);
  if (busy_ + n > capacity_) throw std::logic_error("resource " + id_ + ": acquire exceeds capacity");
  busy_ += n;
}

void Resource::release(SimTime now, int n) {
  advance(now);
  if (n > busy_) throw std::logic_error("resource " + id_ + ": release below zero");
  busy_ -= n;
}

void Resource::set_mark(SimTime t) {
  if (t < last_change_) throw std::logic_error("resource " + id_ + ": mark in the past");
  mark_time_ = t;
  mark_captured_ = false;
}

double Resource::busy_integral_us(SimTime end) const {
  if (end < last_change_) throw std::logic_error("resource " + id_ + ": integral endpoint in the past");
  return integral_us_ + static_cast<double>(busy_) * static_cast<double>(end - last_change_);
}

double Resource::busy_integral_since_mark_us(SimTime end) const {
  if (mark_time_ < 0) throw std::logic_error("resource " + id_ + ": no mark set");
  double at_mark = integral_at_mark_us_;
  if (!mark_captured_) {
    // No state change crossed the mark; current busy level extends through it.
    if (end < mark_time_) throw std::logic_error("resource " + id_ + ": integral endpoint before mark");
    at_mark = busy_integral_us(mark_time_);
  }
  return busy_integral_us(end) - at_mark;
}

void EventLoop::set_handler(EventKind kind, Handler handler) {
  handlers_[static_cast<int>(kind)] = std::move(handler);
}

std::uint64_t EventLoop::schedule(SimTime time, EventKind kind, std::int64_t payload) {
  if (time < now_) {
    throw std::logic_error(std::string("cannot schedule ") + to_string(kind) + " event in past: t=" +
                           std::to_string(time) + " now=" + std::to_string(now_));
  }
  Event ev;
  ev.time = time;
  ev.sequence = next_sequence_++;
  ev.kind = kind;
  ev.payload = payload;
  queue_.push(ev);
  return ev.sequence;
}

void EventLoop::run_until(SimTime t_end) {
  if (t_end < now_) throw std::logic_error("run_until target in past");
  bool processed_any = false;
  while (!queue_.empty() && !stop_requested_) {
    if (queue_.top().time > t_end) break;
    Event ev = queue_.top();
    queue_.pop();
    now_ = ev.time;
    ++processed_;
    processed_any = true;
    if (trace_sink_) trace_sink_(ev);
    Handler& handler = handlers_[static_cast<int>(ev.kind)];
    if (handler) {
      handler(ev);
    } else if (ev.kind == EventKind::Shutdown) {
      request_stop();
    } else {
      throw std::logic_error(std::string("no handler registered for ") + to_string(ev.kind));
    }
  }
  if (stop_requested_) return;  // clock rests at the stopping event
  if (!queue_.empty() || !processed_any) now_ = t_end;
}

}  // namespace migbatchsim
