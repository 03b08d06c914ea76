#include "pql/runtime/metrics.hpp"

#include <cstdio>
#include <stdexcept>

namespace pql::rt {

const char* MetricsWriter::header() {
  return "wall_clock_s,env_steps,c_a,c_v,c_p,eval_return_mean,eval_return_stderr,"
         "critic_loss_ema,actor_loss_ema";
}

MetricsWriter::MetricsWriter(const std::string& path) : path_(path), out_(path, std::ios::trunc) {
  if (!out_) throw std::runtime_error("metrics: cannot open " + path);
  out_ << header() << '\n';
  out_.flush();
}

void MetricsWriter::append(const MetricsRow& r) {
  char buf[320];
  std::snprintf(buf, sizeof(buf), "%.3f,%lld,%lld,%lld,%lld,%.6g,%.6g,%.6g,%.6g",
                r.wall_clock_s, static_cast<long long>(r.env_steps),
                static_cast<long long>(r.c_a), static_cast<long long>(r.c_v),
                static_cast<long long>(r.c_p), r.eval_return_mean, r.eval_return_stderr,
                r.critic_loss_ema, r.actor_loss_ema);
  std::lock_guard lock(mu_);
  out_ << buf << '\n';
  out_.flush();
}

}  // namespace pql::rt
