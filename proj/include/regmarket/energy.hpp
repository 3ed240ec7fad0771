#pragma once

// Energy-only clearing and the incremental lost-opportunity cost derived
// from its marginal price.

#include <map>
#include <string>
#include <vector>

#include "core_model.hpp"
#include "lp.hpp"

namespace regmarket {

class InfeasibleMarket : public Error {
 public:
  using Error::Error;
};

struct EnergyClear {
  std::vector<std::pair<std::string, double>> dispatch;  // resource order
  double lmp = 0.0;

  double at(const std::string& id) const {
    for (const auto& [rid, mw] : dispatch)
      if (rid == id) return mw;
    throw Error("no dispatch for resource '" + id + "'");
  }
};

namespace detail {

inline void expect_optimal(const lp::LpSolution& sol, const std::string& stage) {
  if (!sol.optimal())
    throw InfeasibleMarket(stage + ": program is " + lp::to_string(sol.status));
}

}  // namespace detail

// Least-cost dispatch meeting demand with energy offers only. lmp is the
// dual of the demand balance; zero demand clears at a price of zero.
inline EnergyClear clear_energy_only(const std::vector<Resource>& resources, double demand) {
  double cap = 0.0;
  for (const auto& r : resources) cap += r.p_max;
  if (cap < demand)
    throw InfeasibleMarket("energy-only clear: demand " + std::to_string(demand) +
                           " MW exceeds capacity " + std::to_string(cap) + " MW");

  lp::LinearProgram prog;
  std::vector<lp::Term> balance;
  for (const auto& r : resources) {
    auto v = prog.add_variable("P:" + r.id, r.p_min, r.p_max, r.offer_energy);
    balance.push_back({v, 1.0});
  }
  auto demand_row = prog.add_constraint("demand", std::move(balance), lp::Relation::equal, demand);
  auto sol = lp::solve(prog);
  detail::expect_optimal(sol, "energy-only clear");

  EnergyClear out;
  for (std::size_t i = 0; i < resources.size(); ++i)
    out.dispatch.emplace_back(resources[i].id, sol.primal[i]);
  out.lmp = demand == 0.0 ? 0.0 : sol.dual(demand_row);
  return out;
}

// loc_j = lmp - c_p,j, floored at zero when requested.
inline std::map<std::string, double> incremental_loc(const std::vector<Resource>& resources,
                                                     double lmp, bool floor = true) {
  std::map<std::string, double> out;
  for (const auto& r : resources) {
    double loc = lmp - r.offer_energy;
    if (floor && loc < 0.0) loc = 0.0;
    out[r.id] = loc;
  }
  return out;
}

}  // namespace regmarket
