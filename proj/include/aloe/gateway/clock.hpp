#pragma once

#include <atomic>
#include <chrono>

namespace aloe::gateway {

using Duration = std::chrono::nanoseconds;
using TimePoint = std::chrono::time_point<std::chrono::steady_clock, Duration>;

class Clock {
 public:
  virtual ~Clock() = default;
  virtual TimePoint now() const = 0;
  virtual void sleep_for(Duration d) = 0;
};

class SystemClock final : public Clock {
 public:
  TimePoint now() const override;
  void sleep_for(Duration d) override;
};

// Time only moves when someone sleeps. Used to test backoff and rate limits
// without waiting.
class SimulatedClock final : public Clock {
 public:
  TimePoint now() const override { return TimePoint(Duration(ticks_.load())); }
  void sleep_for(Duration d) override;
  void advance(Duration d) { sleep_for(d); }
  Duration total_slept() const { return Duration(slept_.load()); }

 private:
  std::atomic<Duration::rep> ticks_{0};
  std::atomic<Duration::rep> slept_{0};
};

}  // namespace aloe::gateway
