#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <string>

#include "pql/config.hpp"
#include "pql/runtime/learners.hpp"

namespace pql::rt {

struct RunReport {
  bool ok = true;
  std::string error;

  std::int64_t c_a = 0, c_v = 0, c_p = 0;
  std::int64_t env_steps = 0;
  double wall_s = 0.0;
  double ratio_av = std::nan(""), ratio_pv = std::nan("");

  double final_eval_mean = std::nan(""), final_eval_stderr = std::nan("");
  double best_eval_mean = std::nan("");
  double time_to_target_s = std::nan("");
  std::int64_t steps_to_target = -1;

  // data-loss audit (sequence-numbered batches, actor -> value learner)
  std::int64_t batches_sent = 0, batches_consumed = 0;
  std::int64_t seq_duplicates = 0, seq_gaps = 0;
  std::int64_t max_policy_staleness = 0;  // publish intervals

  std::string csv_path, checkpoint_path;
};

/// External stop request (signal handlers set this; the run loop polls it).
std::atomic<bool>& stop_flag();

RunReport run_parallel(const RunConfig& cfg);
RunReport run_synchronous(const RunConfig& cfg);

/// Dispatches on cfg.algo.
RunReport run(const RunConfig& cfg);

}  // namespace pql::rt
