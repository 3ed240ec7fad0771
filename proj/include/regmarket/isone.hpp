#pragma once

// ISO New England: hour-ahead regulation market (capacity + mileage) on
// estimated opportunity costs, then the real-time energy and contingency
// reserve market with regulation fixed, then Vickrey-based pricing.

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "core_model.hpp"
#include "energy.hpp"
#include "lp.hpp"

namespace regmarket::isone {

class ScarcityError : public Error {
 public:
  using Error::Error;
};

struct RegDispatch {
  std::map<std::string, double> reg_capacity;  // R_cap, MW
  std::map<std::string, double> reg_mileage;   // R_per, MW per dispatch interval
  std::map<std::string, double> loc_estimated;
  double lmp_forecast = 0.0;
  double objective = 0.0;  // f*
  double dual_capacity = 0.0;
  double dual_mileage = 0.0;
};

struct Prices {
  double total = 0.0;
  double capacity = 0.0;
  double performance = 0.0;
};

inline constexpr double kDispatchedTol = 1e-7;

// Upper limit on R_cap: half the operating range, ramp within one
// dispatch interval, and the regulation offer.
inline double capacity_limit(const Resource& r, const MarketParams& p) {
  if (!r.agc_qualified) return 0.0;
  return std::max(0.0, std::min({0.5 * (r.p_max - r.p_min),
                                 p.dispatch_interval_min * r.ramp, r.reg_offer_max}));
}

namespace detail {

struct RegSolve {
  lp::LpSolution sol;
  std::vector<std::size_t> members;  // indices into case resources
  lp::RowId capacity_row, mileage_row;
};

// Regulation market with the given LOC values, optionally without one resource.
inline RegSolve solve_regulation(const CaseInputs& c, const std::map<std::string, double>& loc,
                                 const std::string* excluded) {
  const auto& p = c.params;
  const double beta = p.beta();
  RegSolve out;
  for (std::size_t i = 0; i < c.resources.size(); ++i) {
    const auto& r = c.resources[i];
    if (!r.agc_qualified) continue;
    if (excluded && r.id == *excluded) continue;
    out.members.push_back(i);
  }

  lp::LinearProgram prog;
  std::vector<lp::VarId> cap, per;
  for (auto i : out.members) {
    const auto& r = c.resources[i];
    cap.push_back(prog.add_variable("Rcap:" + r.id, 0.0, capacity_limit(r, p),
                                    r.offer_reg_capacity + loc.at(r.id)));
  }
  for (auto i : out.members) {
    const auto& r = c.resources[i];
    per.push_back(prog.add_variable("Rper:" + r.id, 0.0, p.dispatch_interval_min * r.ramp,
                                    r.offer_reg_performance));
  }
  std::vector<lp::Term> cap_sum, per_sum;
  for (std::size_t k = 0; k < out.members.size(); ++k) {
    const auto& r = c.resources[out.members[k]];
    prog.add_constraint("deploy:" + r.id, {{per[k], 1.0}, {cap[k], -beta}},
                        lp::Relation::less_equal, 0.0);
    cap_sum.push_back({cap[k], 1.0});
    per_sum.push_back({per[k], 1.0});
  }
  out.capacity_row = prog.add_constraint("reg_capacity", std::move(cap_sum),
                                         lp::Relation::greater_equal,
                                         c.requirements.reg_capacity_req);
  out.mileage_row = prog.add_constraint(
      "reg_mileage", std::move(per_sum), lp::Relation::greater_equal,
      p.mileage_req_per_interval(c.requirements.reg_mileage_req_hourly));
  out.sol = lp::solve(prog);
  return out;
}

inline std::map<std::string, double> forecast_loc(const CaseInputs& c, double& lmp_forecast) {
  lmp_forecast = clear_energy_only(c.resources, c.forecast_demand).lmp;
  return incremental_loc(c.resources, lmp_forecast, c.params.loc_floor_at_zero);
}

}  // namespace detail

// Hour-ahead regulation clearing on LOC estimated at the forecast demand.
inline RegDispatch clear_regulation(const CaseInputs& c) {
  RegDispatch out;
  out.loc_estimated = detail::forecast_loc(c, out.lmp_forecast);
  auto rs = detail::solve_regulation(c, out.loc_estimated, nullptr);
  if (!rs.sol.optimal())
    throw InfeasibleMarket("ISO-NE regulation market: requirements cannot be met (" +
                           std::string(lp::to_string(rs.sol.status)) + ")");
  for (const auto& r : c.resources) {
    out.reg_capacity[r.id] = 0.0;
    out.reg_mileage[r.id] = 0.0;
  }
  const std::size_t n = rs.members.size();
  for (std::size_t k = 0; k < n; ++k) {
    const auto& id = c.resources[rs.members[k]].id;
    out.reg_capacity[id] = rs.sol.primal[k];
    out.reg_mileage[id] = rs.sol.primal[n + k];
  }
  out.objective = rs.sol.objective;
  out.dual_capacity = rs.sol.dual(rs.capacity_row);
  out.dual_mileage = rs.sol.dual(rs.mileage_row);
  return out;
}

// Real-time energy and contingency reserves with R_cap fixed from `reg`.
inline ClearingResult clear_energy(const CaseInputs& c, const RegDispatch& reg) {
  const auto& q = c.requirements;
  lp::LinearProgram prog;
  const std::size_t n = c.resources.size();
  std::vector<lp::VarId> P(n), syn(n), non(n), sup(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = c.resources[i];
    P[i] = prog.add_variable("P:" + r.id, r.p_min, r.p_max, r.offer_energy);
    syn[i] = prog.add_variable("Rsyn:" + r.id, 0.0, r.p_max - r.p_min, r.offer_syn);
    non[i] = prog.add_variable("Rnon:" + r.id, 0.0, r.p_max - r.p_min, r.offer_non);
    sup[i] = prog.add_variable("Rsup:" + r.id, 0.0, r.p_max - r.p_min, r.offer_sup);
  }
  std::vector<lp::Term> balance, r10, r30;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = c.resources[i];
    const double rcap = reg.reg_capacity.at(r.id);
    prog.add_constraint("headroom:" + r.id, {{P[i], 1.0}, {syn[i], 1.0}, {sup[i], 1.0}},
                        lp::Relation::less_equal, r.p_max - rcap);
    prog.add_constraint("floor:" + r.id, {{P[i], 1.0}}, lp::Relation::greater_equal,
                        r.p_min + rcap);
    balance.push_back({P[i], 1.0});
    r10.push_back({non[i], 1.0});
    r10.push_back({syn[i], 1.0});
    r30.push_back({sup[i], 1.0});
  }
  auto demand_row =
      prog.add_constraint("demand", std::move(balance), lp::Relation::equal, q.demand);
  auto r10_row = prog.add_constraint("r10", std::move(r10), lp::Relation::greater_equal, q.r10_req);
  auto r30_row = prog.add_constraint("r30", std::move(r30), lp::Relation::greater_equal, q.r30_req);
  auto sol = lp::solve(prog);
  regmarket::detail::expect_optimal(sol, "ISO-NE energy and reserve market");

  ClearingResult res;
  res.market = Market::isone;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = c.resources[i];
    ResourceDispatch d;
    d.id = r.id;
    d.energy = sol.value(P[i]);
    d.reg_capacity = reg.reg_capacity.at(r.id);
    d.reg_mileage = reg.reg_mileage.at(r.id);
    d.syn = sol.value(syn[i]);
    d.non = sol.value(non[i]);
    d.sup = sol.value(sup[i]);
    res.dispatch.push_back(d);
  }
  res.lmp = sol.dual(demand_row);
  res.lmp_forecast = reg.lmp_forecast;
  res.objective = sol.objective;
  res.duals["demand"] = res.lmp;
  res.duals["r10"] = sol.dual(r10_row);
  res.duals["r30"] = sol.dual(r30_row);
  res.duals["reg_capacity"] = reg.dual_capacity;
  res.duals["reg_mileage"] = reg.dual_mileage;
  res.loc_estimated = reg.loc_estimated;
  return res;
}

// pi_j: regulation-market cost without resource j minus cost with it,
// both evaluated with the same estimated LOC values.
inline double avoided_cost(const CaseInputs& c, const std::string& id) {
  const Resource& r = c.resource(id);
  if (!r.agc_qualified)
    throw Error("resource '" + id + "' does not participate in the regulation market");
  double lmp_forecast = 0.0;
  auto loc = detail::forecast_loc(c, lmp_forecast);
  auto with = detail::solve_regulation(c, loc, nullptr);
  if (!with.sol.optimal())
    throw InfeasibleMarket("ISO-NE regulation market: requirements cannot be met");
  auto without = detail::solve_regulation(c, loc, &id);
  if (!without.sol.optimal())
    throw ScarcityError("ISO-NE avoided cost undefined: regulation market is infeasible without '" +
                        id + "'");
  return without.sol.objective - with.sol.objective;
}

// Avoided cost of every participating resource. Resources with no
// regulation award are skipped: the full-market optimum stays feasible
// without them, so their avoided cost is exactly zero.
inline std::map<std::string, double> avoided_costs(const CaseInputs& c, const RegDispatch& reg) {
  std::map<std::string, double> out;
  for (const auto& r : c.resources) {
    if (!r.agc_qualified) continue;
    if (reg.reg_capacity.at(r.id) == 0.0 && reg.reg_mileage.at(r.id) == 0.0) {
      out[r.id] = 0.0;
      continue;
    }
    auto without = detail::solve_regulation(c, reg.loc_estimated, &r.id);
    if (!without.sol.optimal())
      throw ScarcityError(
          "ISO-NE avoided cost undefined: regulation market is infeasible without '" + r.id + "'");
    out[r.id] = std::max(0.0, without.sol.objective - reg.objective);
  }
  return out;
}

// V_j = (c_cap + c~_loc) R_cap + c_per R_per + pi_j.
inline std::map<std::string, double> vickrey(const CaseInputs& c, const RegDispatch& reg,
                                             const std::map<std::string, double>& pi) {
  std::map<std::string, double> out;
  for (const auto& r : c.resources) {
    if (!r.agc_qualified) continue;
    const double rcap = reg.reg_capacity.at(r.id);
    const double rper = reg.reg_mileage.at(r.id);
    auto it = pi.find(r.id);
    const double avoided = it == pi.end() ? 0.0 : it->second;
    out[r.id] = (r.offer_reg_capacity + reg.loc_estimated.at(r.id)) * rcap +
                r.offer_reg_performance * rper + avoided;
  }
  return out;
}

// mu_per is the highest accepted mileage offer; mu_cap is the Vickrey
// residual after mileage payments, spread over the cleared capacity.
inline Prices prices(const CaseInputs& c, const RegDispatch& reg,
                     const std::map<std::string, double>& V) {
  Prices out;
  double total_v = 0.0, total_cap = 0.0, total_per = 0.0;
  for (const auto& r : c.resources) {
    const double rper = reg.reg_mileage.at(r.id);
    if (rper > kDispatchedTol) out.performance = std::max(out.performance, r.offer_reg_performance);
    total_cap += reg.reg_capacity.at(r.id);
    total_per += rper;
  }
  for (const auto& [id, v] : V) total_v += v;
  if (total_cap <= kDispatchedTol) return Prices{};
  out.capacity = (total_v - total_per * out.performance) / total_cap;
  out.total = out.capacity + out.performance;
  return out;
}

// Full pipeline: regulation, energy and reserves, avoided costs, prices.
inline ClearingResult clear(const CaseInputs& c) {
  auto reg = clear_regulation(c);
  auto res = clear_energy(c, reg);
  res.avoided_costs = avoided_costs(c, reg);
  res.vickrey_payments = vickrey(c, reg, res.avoided_costs);
  auto pr = prices(c, reg, res.vickrey_payments);
  res.price_total = pr.total;
  res.price_capacity = pr.capacity;
  res.price_performance = pr.performance;
  return res;
}

}  // namespace regmarket::isone
