#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <mutex>
#include <optional>
#include <utility>

namespace pql::sched {

enum class Proc { actor, vlearner, plearner };

/// Target speed ratios: beta_av = c_a/c_v, beta_pv = c_p/c_v, with per-process
/// slack in whole iterations to avoid lock-step convoying.
struct RatioConfig {
  double beta_av = 1.0 / 8.0;
  double beta_pv = 1.0 / 2.0;
  double slack_a = 4.0;  // one send horizon
  double slack_p = 1.0;
  double slack_v = 1.0;
  std::int64_t warm_up = 32;  // rollout steps before any gating applies
  bool free_running = false;
};

/// Monotone progress counters plus a wait/proceed contract. Replaces the
/// tuned sleeps of a wall-clock pacer with counter-gated blocking: identical
/// steady-state ratios, no per-machine calibration.
class RatioGate {
 public:
  explicit RatioGate(RatioConfig cfg = {}) : cfg_(cfg) {}

  const RatioConfig& config() const { return cfg_; }

  std::int64_t c_a() const { return ca_.load(std::memory_order_relaxed); }
  std::int64_t c_v() const { return cv_.load(std::memory_order_relaxed); }
  std::int64_t c_p() const { return cp_.load(std::memory_order_relaxed); }

  static bool may_proceed(Proc p, std::int64_t ca, std::int64_t cv, std::int64_t cp,
                          const RatioConfig& cfg) {
    if (cfg.free_running) return true;
    if (ca < cfg.warm_up) return true;
    switch (p) {
      case Proc::actor:
        return static_cast<double>(ca) + 1.0 <= cfg.beta_av * static_cast<double>(cv) + cfg.slack_a;
      case Proc::plearner:
        return static_cast<double>(cp) + 1.0 <= cfg.beta_pv * static_cast<double>(cv) + cfg.slack_p;
      case Proc::vlearner:
        // must not outrun available data
        return static_cast<double>(cv) + 1.0 <=
               static_cast<double>(ca) / cfg.beta_av + cfg.slack_v;
    }
    return true;
  }

  bool may_proceed(Proc p) const { return may_proceed(p, c_a(), c_v(), c_p(), cfg_); }

  /// Blocks until the process may take its next iteration. Returns false on
  /// shutdown.
  bool wait_turn(Proc p) {
    std::unique_lock lock(mu_);
    cv_wait_.wait(lock, [&] { return stop_ || may_proceed(p); });
    return !stop_;
  }

  /// Bounded wait so callers that also service a mailbox can interleave
  /// draining with gating. Returns proceed=true, timeout=false on success.
  std::pair<bool, bool> wait_turn_for(Proc p, std::chrono::milliseconds timeout) {
    std::unique_lock lock(mu_);
    const bool ok =
        cv_wait_.wait_for(lock, timeout, [&] { return stop_ || may_proceed(p); });
    if (stop_) return {false, false};
    return {ok, !ok};
  }

  void record(Proc p, std::int64_t amount = 1) {
    switch (p) {
      case Proc::actor: ca_.fetch_add(amount, std::memory_order_relaxed); break;
      case Proc::vlearner: cv_.fetch_add(amount, std::memory_order_relaxed); break;
      case Proc::plearner: cp_.fetch_add(amount, std::memory_order_relaxed); break;
    }
    std::lock_guard lock(mu_);
    cv_wait_.notify_all();
  }

  /// (c_a/c_v, c_p/c_v); empty until the first critic update.
  std::optional<std::pair<double, double>> observed_ratios() const {
    const auto cv = c_v();
    if (cv == 0) return std::nullopt;
    return std::make_pair(static_cast<double>(c_a()) / static_cast<double>(cv),
                          static_cast<double>(c_p()) / static_cast<double>(cv));
  }

  void shutdown() {
    std::lock_guard lock(mu_);
    stop_ = true;
    cv_wait_.notify_all();
  }

  bool stopped() const {
    std::lock_guard lock(mu_);
    return stop_;
  }

 private:
  RatioConfig cfg_;
  std::atomic<std::int64_t> ca_{0}, cv_{0}, cp_{0};
  mutable std::mutex mu_;
  std::condition_variable cv_wait_;
  bool stop_ = false;
};

}  // namespace pql::sched
