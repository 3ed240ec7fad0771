#pragma once

// MISO: one co-optimized real-time SCED over energy, regulation split into
// R1 (serving regulation) and R2 (serving operating reserve), spinning and
// supplemental reserves. The regulation price is the sum of the shadow
// prices of the three cascaded reserve requirements.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "core_model.hpp"
#include "energy.hpp"
#include "lp.hpp"

namespace regmarket::miso {

struct RegSplit {
  double r1 = 0.0;
  double r2 = 0.0;
};

struct ScedResult {
  ClearingResult clearing;
  std::map<std::string, RegSplit> reg_split;
};

struct Prices {
  double total = 0.0;        // mu
  double performance = 0.0;  // mu_per
  bool dual_warning = false;
};

inline constexpr double kDispatchedTol = 1e-7;

// Combined regulation offer used to select R1.
inline double combined_offer(const Resource& r, const MarketParams& p) {
  return r.offer_reg_capacity + p.mileage_ratio * r.offer_reg_performance;
}

inline double regulation_limit(const Resource& r, const MarketParams& p) {
  if (!r.agc_qualified) return 0.0;
  return std::max(0.0, std::min(r.reg_offer_max, p.dispatch_interval_min * r.ramp));
}

// Real-time SCED. The forecast demand is not an input.
inline ScedResult sced(const CaseInputs& c) {
  const auto& q = c.requirements;
  const auto& p = c.params;
  const std::size_t n = c.resources.size();
  lp::LinearProgram prog;
  std::vector<lp::VarId> P(n), r1(n), r2(n), syn(n), sup(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = c.resources[i];
    const double lim = regulation_limit(r, p);
    P[i] = prog.add_variable("P:" + r.id, r.p_min, r.p_max, r.offer_energy);
    r1[i] = prog.add_variable("R1:" + r.id, 0.0, lim, combined_offer(r, p));
    r2[i] = prog.add_variable("R2:" + r.id, 0.0, lim, r.offer_reg_capacity);
    syn[i] = prog.add_variable("Rsyn:" + r.id, 0.0, r.p_max - r.p_min, r.offer_syn);
    sup[i] = prog.add_variable("Rsup:" + r.id, 0.0, r.p_max - r.p_min, r.offer_sup);
  }
  std::vector<lp::Term> balance, reg, reg_spin, reg_spin_sup;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = c.resources[i];
    prog.add_constraint("headroom:" + r.id,
                        {{P[i], 1.0}, {r1[i], 1.0}, {r2[i], 1.0}, {syn[i], 1.0}, {sup[i], 1.0}},
                        lp::Relation::less_equal, r.p_max);
    prog.add_constraint("floor:" + r.id, {{P[i], 1.0}, {r1[i], -1.0}},
                        lp::Relation::greater_equal, r.p_min);
    prog.add_constraint("reg_offer:" + r.id, {{r1[i], 1.0}, {r2[i], 1.0}},
                        lp::Relation::less_equal, regulation_limit(r, p));
    balance.push_back({P[i], 1.0});
    reg.push_back({r1[i], 1.0});
    for (auto* v : {&r1[i], &r2[i], &syn[i]}) reg_spin.push_back({*v, 1.0});
    for (auto* v : {&r1[i], &r2[i], &syn[i], &sup[i]}) reg_spin_sup.push_back({*v, 1.0});
  }
  auto demand_row = prog.add_constraint("demand", std::move(balance), lp::Relation::equal, q.demand);
  auto reg_row =
      prog.add_constraint("reg", std::move(reg), lp::Relation::greater_equal, q.reg_capacity_req);
  auto spin_row = prog.add_constraint("reg+spin", std::move(reg_spin), lp::Relation::greater_equal,
                                      q.reg_capacity_req + q.syn_req);
  auto sup_row =
      prog.add_constraint("reg+spin+sup", std::move(reg_spin_sup), lp::Relation::greater_equal,
                          q.reg_capacity_req + q.syn_req + q.r30_req);
  auto sol = lp::solve(prog);
  regmarket::detail::expect_optimal(sol, "MISO SCED");

  ScedResult out;
  auto& res = out.clearing;
  res.market = Market::miso;
  const double per_interval = p.mileage_ratio / p.intervals_per_hour();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = c.resources[i];
    ResourceDispatch d;
    d.id = r.id;
    d.energy = sol.value(P[i]);
    d.reg_r1 = sol.value(r1[i]);
    d.reg_r2 = sol.value(r2[i]);
    d.reg_capacity = d.reg_r1 + d.reg_r2;
    d.reg_mileage = per_interval * d.reg_r1;
    d.syn = sol.value(syn[i]);
    d.sup = sol.value(sup[i]);
    out.reg_split[r.id] = {d.reg_r1, d.reg_r2};
    res.dispatch.push_back(d);
  }
  res.lmp = sol.dual(demand_row);
  res.objective = sol.objective;
  res.duals["demand"] = res.lmp;
  res.duals["reg"] = sol.dual(reg_row);
  res.duals["reg+spin"] = sol.dual(spin_row);
  res.duals["reg+spin+sup"] = sol.dual(sup_row);
  return out;
}

// Re-solves with the regulation requirement raised by eps and compares the
// finite-difference cost with mu. Returns true when they disagree by more
// than rel_tol, i.e. the basis picked a degenerate dual that does not
// price the next MW.
inline bool degenerate_duals(const CaseInputs& c, const ScedResult& s, double mu,
                             double eps = 1e-3, double rel_tol = 0.01) {
  CaseInputs bumped = c;
  bumped.requirements.reg_capacity_req += eps;
  double slope;
  try {
    slope = (sced(bumped).clearing.objective - s.clearing.objective) / eps;
  } catch (const InfeasibleMarket&) {
    return true;
  }
  return std::abs(slope - mu) > rel_tol * std::max(1.0, std::abs(mu));
}

// mu = eta_e + eta_f + eta_g; mu_per = highest performance offer among
// resources with R1 > 0. check_duals adds the perturbation check.
inline Prices prices(const ScedResult& s, const CaseInputs& c, bool check_duals = false) {
  Prices out;
  const auto& d = s.clearing.duals;
  out.total = d.at("reg") + d.at("reg+spin") + d.at("reg+spin+sup");
  for (const auto& r : c.resources)
    if (s.reg_split.at(r.id).r1 > kDispatchedTol)
      out.performance = std::max(out.performance, r.offer_reg_performance);
  if (check_duals) out.dual_warning = degenerate_duals(c, s, out.total);
  return out;
}

inline ClearingResult clear(const CaseInputs& c, bool check_duals = false) {
  auto s = sced(c);
  auto pr = prices(s, c, check_duals);
  auto res = std::move(s.clearing);
  res.price_total = pr.total;
  res.price_capacity = pr.total;
  res.price_performance = pr.performance;
  res.dual_warning = pr.dual_warning;
  return res;
}

}  // namespace regmarket::miso
