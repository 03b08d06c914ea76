#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <optional>

namespace pql::rt {

/// Bounded FIFO channel. push blocks while full (backpressure); after close,
/// already-queued items still drain, then pops return empty.
template <typename T>
class BoundedChannel {
 public:
  explicit BoundedChannel(std::size_t capacity) : capacity_(capacity) {}

  bool push(T v) {
    std::unique_lock lock(mu_);
    cv_push_.wait(lock, [&] { return closed_ || q_.size() < capacity_; });
    if (closed_) return false;
    q_.push_back(std::move(v));
    cv_pop_.notify_one();
    return true;
  }

  std::optional<T> try_pop() {
    std::lock_guard lock(mu_);
    return pop_locked();
  }

  std::optional<T> pop_wait(std::chrono::milliseconds timeout) {
    std::unique_lock lock(mu_);
    cv_pop_.wait_for(lock, timeout, [&] { return closed_ || !q_.empty(); });
    return pop_locked();
  }

  void close() {
    std::lock_guard lock(mu_);
    closed_ = true;
    cv_push_.notify_all();
    cv_pop_.notify_all();
  }

  std::size_t size() const {
    std::lock_guard lock(mu_);
    return q_.size();
  }

 private:
  std::optional<T> pop_locked() {
    if (q_.empty()) return std::nullopt;
    T v = std::move(q_.front());
    q_.pop_front();
    cv_push_.notify_one();
    return v;
  }

  std::size_t capacity_;
  mutable std::mutex mu_;
  std::condition_variable cv_push_, cv_pop_;
  std::deque<T> q_;
  bool closed_ = false;
};

/// Single-value slot with overwrite semantics: only the newest snapshot
/// matters to consumers.
template <typename T>
class LatestSlot {
 public:
  void put(T v) {
    std::lock_guard lock(mu_);
    value_ = std::move(v);
  }

  std::optional<T> peek() const {
    std::lock_guard lock(mu_);
    return value_;
  }

 private:
  mutable std::mutex mu_;
  std::optional<T> value_;
};

}  // namespace pql::rt
