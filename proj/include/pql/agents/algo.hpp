#pragma once

#include <stdexcept>
#include <string>

namespace pql::agents {

enum class Algo { pql_ddpg, pql_d, pql_sac, sync_ddpg_n, sync_sac_n };

inline Algo parse_algo(const std::string& s) {
  if (s == "pql_ddpg") return Algo::pql_ddpg;
  if (s == "pql_d") return Algo::pql_d;
  if (s == "pql_sac") return Algo::pql_sac;
  if (s == "sync_ddpg_n") return Algo::sync_ddpg_n;
  if (s == "sync_sac_n") return Algo::sync_sac_n;
  throw std::invalid_argument("unknown algo: " + s);
}

inline std::string algo_name(Algo a) {
  switch (a) {
    case Algo::pql_ddpg: return "pql_ddpg";
    case Algo::pql_d: return "pql_d";
    case Algo::pql_sac: return "pql_sac";
    case Algo::sync_ddpg_n: return "sync_ddpg_n";
    case Algo::sync_sac_n: return "sync_sac_n";
  }
  return "?";
}

inline bool is_parallel(Algo a) {
  return a == Algo::pql_ddpg || a == Algo::pql_d || a == Algo::pql_sac;
}
inline bool is_sac(Algo a) { return a == Algo::pql_sac || a == Algo::sync_sac_n; }
inline bool is_distributional(Algo a) { return a == Algo::pql_d; }

}  // namespace pql::agents
