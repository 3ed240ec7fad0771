#pragma once

// PJM: the Ancillary Service Optimizer commits regulation on estimated
// opportunity costs, the real-time SCED dispatches energy around those
// commitments, and prices are formed from real-time opportunity costs.

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "core_model.hpp"
#include "energy.hpp"
#include "lp.hpp"

namespace regmarket::pjm {

struct AsoResult {
  std::map<std::string, double> reg_capacity;  // committed R_cap
  std::map<std::string, double> aso_energy;    // advisory
  std::map<std::string, double> loc_estimated;
  double lmp_forecast = 0.0;
  double aso_objective = 0.0;
};

struct Prices {
  double total = 0.0;
  double capacity = 0.0;
  double performance = 0.0;
  std::map<std::string, double> loc_realtime;
};

inline constexpr double kCommittedTol = 1e-7;

inline double commitment_limit(const Resource& r, const MarketParams& p) {
  if (!r.agc_qualified) return 0.0;
  return std::max(0.0, std::min(r.reg_offer_max, p.dispatch_interval_min * r.ramp));
}

// Adjusted regulation offer c_cap + alpha * c_per + loc.
inline double adjusted_offer(const Resource& r, const MarketParams& p, double loc) {
  return r.offer_reg_capacity + p.mileage_ratio * r.offer_reg_performance + loc;
}

namespace detail {

struct SharedRows {
  std::vector<lp::VarId> P, syn, non;
  lp::RowId demand, syn_row, r10_row;
};

// Energy, synchronized and 10-minute reserve part common to both steps.
// `reg` holds either decision variables (ASO) or nothing (RT SCED, where
// the fixed commitment enters through `fixed`).
inline SharedRows add_energy_and_reserves(lp::LinearProgram& prog, const CaseInputs& c,
                                          const std::vector<lp::VarId>* reg,
                                          const std::map<std::string, double>* fixed) {
  const auto& q = c.requirements;
  const std::size_t n = c.resources.size();
  SharedRows s;
  s.P.resize(n);
  s.syn.resize(n);
  s.non.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = c.resources[i];
    s.P[i] = prog.add_variable("P:" + r.id, r.p_min, r.p_max, r.offer_energy);
    s.syn[i] = prog.add_variable("Rsyn:" + r.id, 0.0, r.p_max - r.p_min, r.offer_syn);
    s.non[i] = prog.add_variable("Rnon:" + r.id, 0.0, r.p_max - r.p_min, r.offer_non);
  }
  std::vector<lp::Term> balance, syn_sum, r10_sum;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = c.resources[i];
    std::vector<lp::Term> head{{s.P[i], 1.0}, {s.syn[i], 1.0}};
    std::vector<lp::Term> floor{{s.P[i], 1.0}};
    double head_rhs = r.p_max, floor_rhs = r.p_min;
    if (reg) {
      head.push_back({(*reg)[i], 1.0});
      floor.push_back({(*reg)[i], -1.0});
    } else if (fixed) {
      head_rhs -= fixed->at(r.id);
      floor_rhs += fixed->at(r.id);
    }
    prog.add_constraint("headroom:" + r.id, std::move(head), lp::Relation::less_equal, head_rhs);
    prog.add_constraint("floor:" + r.id, std::move(floor), lp::Relation::greater_equal, floor_rhs);
    balance.push_back({s.P[i], 1.0});
    syn_sum.push_back({s.syn[i], 1.0});
    r10_sum.push_back({s.syn[i], 1.0});
    r10_sum.push_back({s.non[i], 1.0});
  }
  s.demand = prog.add_constraint("demand", std::move(balance), lp::Relation::equal, q.demand);
  s.syn_row = prog.add_constraint("syn", std::move(syn_sum), lp::Relation::greater_equal, q.syn_req);
  s.r10_row = prog.add_constraint("r10", std::move(r10_sum), lp::Relation::greater_equal, q.r10_req);
  return s;
}

}  // namespace detail

// Joint energy/reserve/regulation optimization at real-time demand with
// regulation priced at adjusted offers plus LOC estimated from the
// forecast energy clear. Only the regulation commitment is used downstream.
inline AsoResult aso(const CaseInputs& c) {
  AsoResult out;
  out.lmp_forecast = clear_energy_only(c.resources, c.forecast_demand).lmp;
  out.loc_estimated = incremental_loc(c.resources, out.lmp_forecast, c.params.loc_floor_at_zero);

  lp::LinearProgram prog;
  const std::size_t n = c.resources.size();
  std::vector<lp::VarId> reg(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = c.resources[i];
    reg[i] = prog.add_variable("Rcap:" + r.id, 0.0, commitment_limit(r, c.params),
                               adjusted_offer(r, c.params, out.loc_estimated.at(r.id)));
  }
  auto s = detail::add_energy_and_reserves(prog, c, &reg, nullptr);
  std::vector<lp::Term> reg_sum;
  for (auto v : reg) reg_sum.push_back({v, 1.0});
  prog.add_constraint("reg_capacity", std::move(reg_sum), lp::Relation::greater_equal,
                      c.requirements.reg_capacity_req);
  auto sol = lp::solve(prog);
  regmarket::detail::expect_optimal(sol, "PJM ancillary service optimizer");

  for (std::size_t i = 0; i < n; ++i) {
    const auto& id = c.resources[i].id;
    out.reg_capacity[id] = sol.value(reg[i]);
    out.aso_energy[id] = sol.value(s.P[i]);
  }
  out.aso_objective = sol.objective;
  return out;
}

// Real-time SCED with the ASO regulation commitment as a fixed input.
inline ClearingResult rtsced(const CaseInputs& c, const AsoResult& committed) {
  lp::LinearProgram prog;
  auto s = detail::add_energy_and_reserves(prog, c, nullptr, &committed.reg_capacity);
  auto sol = lp::solve(prog);
  regmarket::detail::expect_optimal(sol, "PJM real-time SCED");

  ClearingResult res;
  res.market = Market::pjm;
  const double per_interval = c.params.mileage_ratio / c.params.intervals_per_hour();
  for (std::size_t i = 0; i < c.resources.size(); ++i) {
    const auto& r = c.resources[i];
    ResourceDispatch d;
    d.id = r.id;
    d.energy = sol.value(s.P[i]);
    d.reg_capacity = committed.reg_capacity.at(r.id);
    d.reg_mileage = per_interval * d.reg_capacity;
    d.syn = sol.value(s.syn[i]);
    d.non = sol.value(s.non[i]);
    res.dispatch.push_back(d);
  }
  res.lmp = sol.dual(s.demand);
  res.lmp_forecast = committed.lmp_forecast;
  res.objective = sol.objective;
  res.duals["demand"] = res.lmp;
  res.duals["syn"] = sol.dual(s.syn_row);
  res.duals["r10"] = sol.dual(s.r10_row);
  res.loc_estimated = committed.loc_estimated;
  return res;
}

// mu is set by the most expensive committed resource at real-time LOC,
// mu_per by the highest committed performance offer; mu_cap is the rest.
inline Prices prices(const CaseInputs& c, const AsoResult& committed, const ClearingResult& rt) {
  Prices out;
  out.loc_realtime = incremental_loc(c.resources, rt.lmp, c.params.loc_floor_at_zero);
  bool any = false;
  for (const auto& r : c.resources) {
    if (committed.reg_capacity.at(r.id) <= kCommittedTol) continue;
    const double mu = adjusted_offer(r, c.params, out.loc_realtime.at(r.id));
    out.total = any ? std::max(out.total, mu) : mu;
    out.performance = any ? std::max(out.performance, r.offer_reg_performance)
                          : r.offer_reg_performance;
    any = true;
  }
  if (!any) {
    out.total = out.performance = 0.0;
    return out;
  }
  out.capacity = out.total - out.performance;
  return out;
}

inline ClearingResult clear(const CaseInputs& c) {
  auto committed = aso(c);
  auto res = rtsced(c, committed);
  auto pr = prices(c, committed, res);
  res.price_total = pr.total;
  res.price_capacity = pr.capacity;
  res.price_performance = pr.performance;
  res.loc_realtime = std::move(pr.loc_realtime);
  return res;
}

}  // namespace regmarket::pjm
