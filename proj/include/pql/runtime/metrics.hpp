#pragma once

#include <cstdint>
#include <fstream>
#include <mutex>
#include <string>

namespace pql::rt {

struct MetricsRow {
  double wall_clock_s = 0.0;
  std::int64_t env_steps = 0;
  std::int64_t c_a = 0, c_v = 0, c_p = 0;
  double eval_return_mean = 0.0, eval_return_stderr = 0.0;
  double critic_loss_ema = 0.0, actor_loss_ema = 0.0;
};

/// Incremental CSV writer; one flushed line per row so a crash loses at most
/// the row in flight.
class MetricsWriter {
 public:
  static const char* header();

  explicit MetricsWriter(const std::string& path);
  void append(const MetricsRow& row);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ofstream out_;
  std::mutex mu_;
};

}  // namespace pql::rt
