#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <mutex>

#include "aloe/common/random.hpp"
#include "aloe/gateway/clock.hpp"

namespace aloe::gateway {

// Sliding 60 s window: at most `requests_per_minute` acquisitions fall inside
// any window. Shared by every caller of one provider.
class RateLimiter {
 public:
  RateLimiter(int requests_per_minute, Clock& clock);

  // Blocks (via the clock) until a slot is free, then records the request.
  void acquire();

  int requests_per_minute() const noexcept { return limit_; }

 private:
  static constexpr Duration kWindow = std::chrono::seconds(60);

  int limit_;
  Clock& clock_;
  std::mutex mutex_;
  std::deque<TimePoint> issued_;
};

struct BackoffPolicy {
  Duration base = std::chrono::milliseconds(500);
  Duration cap = std::chrono::seconds(30);

  // Delay before retry number `attempt` (0-based): min(cap, base * 2^attempt)
  // scaled by a jitter factor in [0.5, 1.0].
  Duration delay(int attempt, Rng& rng) const;
};

}  // namespace aloe::gateway
