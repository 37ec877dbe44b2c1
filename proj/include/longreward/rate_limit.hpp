#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace longreward {

// Pipeline-wide limiter: caps in-flight calls and, optionally, spaces call
// starts so that no more than `requests_per_minute` begin per minute.
class CallLimiter {
 public:
  using clock = std::chrono::steady_clock;

  explicit CallLimiter(std::size_t max_in_flight, double requests_per_minute = 0.0)
      : max_in_flight_(max_in_flight) {
    if (max_in_flight == 0) throw std::invalid_argument("max_in_flight must be >= 1");
    if (requests_per_minute < 0.0) throw std::invalid_argument("requests_per_minute must be >= 0");
    if (requests_per_minute > 0.0)
      interval_ = std::chrono::duration_cast<clock::duration>(
          std::chrono::duration<double>(60.0 / requests_per_minute));
  }

  CallLimiter(const CallLimiter&) = delete;
  CallLimiter& operator=(const CallLimiter&) = delete;

  class Permit {
   public:
    explicit Permit(CallLimiter* owner) : owner_(owner) {}
    Permit(Permit&& other) noexcept : owner_(other.owner_) { other.owner_ = nullptr; }
    Permit& operator=(Permit&&) = delete;
    ~Permit() {
      if (owner_) owner_->release();
    }

   private:
    CallLimiter* owner_;
  };

  [[nodiscard]] Permit acquire() {
    clock::time_point slot;
    {
      std::unique_lock lock(mutex_);
      cv_.wait(lock, [&] { return in_flight_ < max_in_flight_; });
      ++in_flight_;
      const auto now = clock::now();
      slot = next_start_ > now ? next_start_ : now;
      next_start_ = slot + interval_;
    }
    std::this_thread::sleep_until(slot);
    return Permit(this);
  }

  std::size_t in_flight() const {
    std::lock_guard lock(mutex_);
    return in_flight_;
  }

 private:
  void release() {
    {
      std::lock_guard lock(mutex_);
      --in_flight_;
    }
    cv_.notify_one();
  }

  const std::size_t max_in_flight_;
  clock::duration interval_{0};
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::size_t in_flight_ = 0;
  clock::time_point next_start_{};
};

}  // namespace longreward
