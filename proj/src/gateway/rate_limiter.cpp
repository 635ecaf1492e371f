#include "aloe/gateway/rate_limiter.hpp"

#include <algorithm>
#include <thread>

#include "aloe/common/error.hpp"

namespace aloe::gateway {

TimePoint SystemClock::now() const {
  return std::chrono::time_point_cast<Duration>(std::chrono::steady_clock::now());
}

void SystemClock::sleep_for(Duration d) {
  if (d > Duration::zero()) std::this_thread::sleep_for(d);
}

void SimulatedClock::sleep_for(Duration d) {
  if (d <= Duration::zero()) return;
  ticks_.fetch_add(d.count());
  slept_.fetch_add(d.count());
}

RateLimiter::RateLimiter(int requests_per_minute, Clock& clock) : limit_(requests_per_minute), clock_(clock) {
  if (limit_ <= 0) throw Error(ErrorCode::ConfigError, "requests_per_minute must be positive");
}

void RateLimiter::acquire() {
  for (;;) {
    Duration wait{};
    {
      std::lock_guard lock(mutex_);
      const TimePoint now = clock_.now();
      while (!issued_.empty() && issued_.front() + kWindow <= now) issued_.pop_front();
      if (static_cast<int>(issued_.size()) < limit_) {
        issued_.push_back(now);
        return;
      }
      wait = issued_.front() + kWindow - now;
    }
    clock_.sleep_for(wait);
  }
}

Duration BackoffPolicy::delay(int attempt, Rng& rng) const {
  Duration d = base;
  for (int i = 0; i < attempt && d < cap; ++i) d *= 2;
  d = std::min(d, cap);
  const double jitter = 0.5 + 0.5 * rng.uniform();
  return Duration(static_cast<Duration::rep>(static_cast<double>(d.count()) * jitter));
}

}  // namespace aloe::gateway
