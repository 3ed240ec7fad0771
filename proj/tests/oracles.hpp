#pragma once

// Reference solvers used only by the tests. None of them calls the
// library's simplex: they enumerate vertices, stack merit orders, or
// maximize a Lagrangian dual over a small arrangement of lines.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "regmarket/core_model.hpp"
#include "regmarket/lp.hpp"

namespace oracle {

using regmarket::CaseInputs;
using regmarket::Resource;
namespace lp = regmarket::lp;

// ---------------------------------------------------------------------------
// Vertex enumeration for small boxed LPs.

struct VertexResult {
  bool feasible = false;
  double objective = std::numeric_limits<double>::infinity();
  std::vector<double> x;
};

namespace detail {

struct Halfspace {
  std::vector<double> a;
  double b = 0.0;
  lp::Relation rel = lp::Relation::less_equal;
};

// Solves the square system M x = r by Gaussian elimination with partial
// pivoting; returns false when M is (numerically) singular.
inline bool solve_square(std::vector<std::vector<double>> M, std::vector<double> r,
                         std::vector<double>& x) {
  const std::size_t n = r.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t i = col + 1; i < n; ++i)
      if (std::abs(M[i][col]) > std::abs(M[piv][col])) piv = i;
    if (std::abs(M[piv][col]) < 1e-10) return false;
    std::swap(M[piv], M[col]);
    std::swap(r[piv], r[col]);
    for (std::size_t i = col + 1; i < n; ++i) {
      const double f = M[i][col] / M[col][col];
      if (f == 0.0) continue;
      for (std::size_t k = col; k < n; ++k) M[i][k] -= f * M[col][k];
      r[i] -= f * r[col];
    }
  }
  x.assign(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double s = r[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= M[i][k] * x[k];
    x[i] = s / M[i][i];
  }
  return true;
}

inline bool satisfies(const Halfspace& h, const std::vector<double>& x, double tol) {
  double lhs = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) lhs += h.a[j] * x[j];
  const double t = tol * std::max(1.0, std::abs(h.b));
  switch (h.rel) {
    case lp::Relation::less_equal: return lhs <= h.b + t;
    case lp::Relation::greater_equal: return lhs >= h.b - t;
    case lp::Relation::equal: return std::abs(lhs - h.b) <= t;
  }
  return false;
}

}  // namespace detail

// Every variable must have finite bounds, so the feasible set is a
// polytope and the minimum (if any) sits at a vertex.
inline VertexResult enumerate_vertices(const lp::LinearProgram& prog) {
  const auto& vars = prog.variables();
  const std::size_t n = vars.size();
  std::vector<detail::Halfspace> hs;
  for (const auto& row : prog.constraints()) {
    detail::Halfspace h;
    h.a.assign(n, 0.0);
    for (const auto& t : row.terms) h.a[t.var.index] += t.coef;
    h.b = row.rhs;
    h.rel = row.relation;
    hs.push_back(h);
  }
  for (std::size_t j = 0; j < n; ++j) {
    detail::Halfspace lo, hi;
    lo.a.assign(n, 0.0);
    lo.a[j] = 1.0;
    lo.b = vars[j].lower;
    lo.rel = lp::Relation::greater_equal;
    hi = lo;
    hi.b = vars[j].upper;
    hi.rel = lp::Relation::less_equal;
    hs.push_back(lo);
    hs.push_back(hi);
  }

  VertexResult best;
  std::vector<std::size_t> pick(n);
  std::iota(pick.begin(), pick.end(), 0);
  const std::size_t m = hs.size();
  if (n == 0 || m < n) return best;
  for (;;) {
    std::vector<std::vector<double>> M(n);
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) {
      M[i] = hs[pick[i]].a;
      r[i] = hs[pick[i]].b;
    }
    std::vector<double> x;
    if (detail::solve_square(M, r, x)) {
      bool ok = true;
      for (const auto& h : hs) ok = ok && detail::satisfies(h, x, 1e-9);
      if (ok) {
        double obj = 0.0;
        for (std::size_t j = 0; j < n; ++j) obj += vars[j].cost * x[j];
        if (!best.feasible || obj < best.objective) {
          best.feasible = true;
          best.objective = obj;
          best.x = x;
        }
      }
    }
    // Next combination in lexicographic order.
    std::size_t i = n;
    while (i > 0 && pick[i - 1] == m - n + (i - 1)) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t k = i; k < n; ++k) pick[k] = pick[k - 1] + 1;
  }
  return best;
}

// ---------------------------------------------------------------------------
// LP optimality certificate and random test programs.

// Optimality certificate computed from the program data alone.
struct Certificate {
  double max_primal_violation = 0.0;
  double max_dual_sign_violation = 0.0;
  double max_reduced_cost_mismatch = 0.0;
  double max_complementarity = 0.0;
  double dual_objective = 0.0;
};

inline Certificate certify(const lp::LinearProgram& prog, const lp::LpSolution& sol) {
  Certificate c;
  const auto& vars = prog.variables();
  const auto& rows = prog.constraints();
  std::vector<double> d(vars.size());
  for (std::size_t j = 0; j < vars.size(); ++j) {
    d[j] = vars[j].cost;
    const double x = sol.primal[j];
    c.max_primal_violation = std::max({c.max_primal_violation, vars[j].lower - x, x - vars[j].upper});
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    double lhs = 0.0;
    for (const auto& t : r.terms) {
      lhs += t.coef * sol.primal[t.var.index];
      d[t.var.index] -= sol.duals[i] * t.coef;
    }
    const double slack = r.rhs - lhs;
    const double y = sol.duals[i];
    switch (r.relation) {
      case lp::Relation::less_equal:
        c.max_primal_violation = std::max(c.max_primal_violation, -slack);
        c.max_dual_sign_violation = std::max(c.max_dual_sign_violation, y);
        break;
      case lp::Relation::greater_equal:
        c.max_primal_violation = std::max(c.max_primal_violation, slack);
        c.max_dual_sign_violation = std::max(c.max_dual_sign_violation, -y);
        break;
      case lp::Relation::equal:
        c.max_primal_violation = std::max(c.max_primal_violation, std::abs(slack));
        break;
    }
    c.max_complementarity = std::max(c.max_complementarity,
                                     std::abs(y) * std::abs(slack) / std::max(1.0, std::abs(r.rhs)));
    c.dual_objective += y * r.rhs;
  }
  for (std::size_t j = 0; j < vars.size(); ++j) {
    c.max_reduced_cost_mismatch =
        std::max(c.max_reduced_cost_mismatch, std::abs(d[j] - sol.reduced_costs[j]));
    // A positive reduced cost needs the variable at its lower bound, a
    // negative one at its upper bound.
    if (d[j] > 0.0) {
      c.dual_objective += d[j] * vars[j].lower;
      if (!std::isfinite(vars[j].lower)) c.max_dual_sign_violation = std::max(c.max_dual_sign_violation, d[j]);
    } else if (d[j] < 0.0) {
      c.dual_objective += d[j] * vars[j].upper;
      if (!std::isfinite(vars[j].upper)) c.max_dual_sign_violation = std::max(c.max_dual_sign_violation, -d[j]);
    }
  }
  return c;
}

// Three boxed variables, four rows, integer data in [-5, 5].
struct RandomLp {
  lp::LinearProgram prog;
  std::vector<lp::RowId> rows;
};

inline RandomLp random_lp(std::mt19937_64& gen) {
  std::uniform_int_distribution<int> coef(-5, 5), lo(-5, 0), span(1, 5), rel(0, 5);
  RandomLp out;
  std::vector<lp::VarId> x;
  for (int j = 0; j < 3; ++j) {
    const double l = lo(gen);
    x.push_back(out.prog.add_variable("x" + std::to_string(j), l, l + span(gen), coef(gen)));
  }
  for (int i = 0; i < 4; ++i) {
    std::vector<lp::Term> terms;
    for (auto v : x) terms.push_back({v, static_cast<double>(coef(gen))});
    const int r = rel(gen);
    const lp::Relation relation = r < 3 ? lp::Relation::less_equal : r < 5 ? lp::Relation::greater_equal : lp::Relation::equal;
    out.rows.push_back(out.prog.add_constraint("r" + std::to_string(i), std::move(terms), relation, coef(gen)));
  }
  return out;
}


// ---------------------------------------------------------------------------
// Merit-order energy dispatch.

struct MeritOrder {
  std::vector<double> dispatch;  // resource order
  double marginal_offer = 0.0;   // offer of the last unit loaded
  double cost = 0.0;
};

// Loads units from their lower limits upward in order of offer (ties by
// position). lower/upper default to p_min/p_max.
inline std::optional<MeritOrder> merit_order(const std::vector<Resource>& rs, double demand,
                                             const std::vector<double>* lower = nullptr,
                                             const std::vector<double>* upper = nullptr) {
  const std::size_t n = rs.size();
  MeritOrder out;
  out.dispatch.resize(n);
  double remaining = demand;
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = lower ? (*lower)[i] : rs[i].p_min;
    const double hi = upper ? (*upper)[i] : rs[i].p_max;
    if (lo > hi + 1e-12) return std::nullopt;
    out.dispatch[i] = lo;
    remaining -= lo;
  }
  if (remaining < -1e-9) return std::nullopt;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return rs[a].offer_energy < rs[b].offer_energy;
  });
  for (auto i : order) {
    if (remaining <= 1e-12) break;
    const double hi = upper ? (*upper)[i] : rs[i].p_max;
    const double add = std::min(remaining, hi - out.dispatch[i]);
    if (add <= 0.0) continue;
    out.dispatch[i] += add;
    remaining -= add;
    out.marginal_offer = rs[i].offer_energy;
  }
  if (remaining > 1e-9) return std::nullopt;
  for (std::size_t i = 0; i < n; ++i) out.cost += rs[i].offer_energy * out.dispatch[i];
  return out;
}

inline std::map<std::string, double> loc(const std::vector<Resource>& rs, double price) {
  std::map<std::string, double> out;
  for (const auto& r : rs) out[r.id] = std::max(0.0, price - r.offer_energy);
  return out;
}

// ---------------------------------------------------------------------------
// Hour-ahead regulation market (capacity + mileage) solved through its
// two-multiplier Lagrangian dual.
//
// Each resource's feasible (C, M) set is a polygon with at most four
// vertices, so the dual function g(lambda, nu) is the pointwise minimum of
// finitely many affine pieces. Its maximum over the nonnegative quadrant is
// attained where two breaklines (or a breakline and an axis) cross; all
// such points are evaluated. By LP duality the maximum equals the primal
// optimum.

struct RegResource {
  double cap_cost = 0.0;  // c_cap + loc
  double per_cost = 0.0;  // c_per
  double cap_max = 0.0;   // u
  double per_max = 0.0;   // v
};

inline std::optional<double> regulation_cost(const std::vector<RegResource>& rs, double cap_req,
                                             double per_req, double beta) {
  struct Vertex {
    double c, m;
  };
  std::vector<std::vector<Vertex>> verts;
  double cap_total = 0.0, per_total = 0.0;
  for (const auto& r : rs) {
    std::vector<Vertex> v{{0.0, 0.0}};
    if (r.cap_max > 0.0) {
      v.push_back({r.cap_max, 0.0});
      const double top = std::min(r.per_max, beta * r.cap_max);
      if (top > 0.0) v.push_back({r.cap_max, top});
      if (beta * r.cap_max > r.per_max && r.per_max > 0.0) v.push_back({r.per_max / beta, r.per_max});
      per_total += top;
    }
    cap_total += r.cap_max;
    verts.push_back(v);
  }
  const double tol = 1e-9;
  if (cap_total < cap_req - tol || per_total < per_req - tol) return std::nullopt;

  auto g = [&](double lam, double nu) {
    double val = lam * cap_req + nu * per_req;
    for (std::size_t j = 0; j < rs.size(); ++j) {
      double best = 0.0;
      for (const auto& v : verts[j])
        best = std::min(best, (rs[j].cap_cost - lam) * v.c + (rs[j].per_cost - nu) * v.m);
      val += best;
    }
    return val;
  };

  // Lines p * lambda + q * nu = r.
  struct Line {
    double p, q, r;
  };
  std::vector<Line> lines{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}};
  for (std::size_t j = 0; j < rs.size(); ++j)
    for (std::size_t a = 0; a < verts[j].size(); ++a)
      for (std::size_t b = a + 1; b < verts[j].size(); ++b) {
        const double dc = verts[j][a].c - verts[j][b].c;
        const double dm = verts[j][a].m - verts[j][b].m;
        if (dc == 0.0 && dm == 0.0) continue;
        lines.push_back({dc, dm, dc * rs[j].cap_cost + dm * rs[j].per_cost});
      }

  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < lines.size(); ++a)
    for (std::size_t b = a + 1; b < lines.size(); ++b) {
      const auto& L1 = lines[a];
      const auto& L2 = lines[b];
      const double det = L1.p * L2.q - L1.q * L2.p;
      if (std::abs(det) < 1e-12) continue;
      const double lam = (L1.r * L2.q - L1.q * L2.r) / det;
      const double nu = (L1.p * L2.r - L1.r * L2.p) / det;
      if (lam < -1e-12 || nu < -1e-12) continue;
      best = std::max(best, g(std::max(0.0, lam), std::max(0.0, nu)));
    }
  return best;
}

// The regulation market of a case at the given LOC values, optionally
// without one resource. Non-qualified resources do not take part.
inline std::optional<double> regulation_cost(const CaseInputs& c,
                                             const std::map<std::string, double>& loc,
                                             const std::string& excluded = "") {
  const auto& p = c.params;
  const double t = p.dispatch_interval_min;
  std::vector<RegResource> rs;
  for (const auto& r : c.resources) {
    if (!r.agc_qualified || r.id == excluded) continue;
    RegResource x;
    x.cap_cost = r.offer_reg_capacity + loc.at(r.id);
    x.per_cost = r.offer_reg_performance;
    x.cap_max = std::min({0.5 * (r.p_max - r.p_min), t * r.ramp, r.reg_offer_max});
    x.per_max = t * r.ramp;
    rs.push_back(x);
  }
  const double beta = 2.0 * t * 60.0 / p.agc_period_sec;
  const double per_req = c.requirements.reg_mileage_req_hourly * t / 60.0;
  return regulation_cost(rs, c.requirements.reg_capacity_req, per_req, beta);
}

// Avoided cost of `id` recomputed from scratch: forecast price by merit
// order, LOC by subtraction, both regulation markets by the dual oracle.
inline std::optional<double> avoided_cost(const CaseInputs& c, const std::string& id) {
  auto fc = merit_order(c.resources, c.forecast_demand);
  if (!fc) return std::nullopt;
  const auto l = loc(c.resources, fc->marginal_offer);
  auto with = regulation_cost(c, l);
  auto without = regulation_cost(c, l, id);
  if (!with || !without) return std::nullopt;
  return *without - *with;
}

// ---------------------------------------------------------------------------
// PJM commitment by exhaustive search on a grid, for cases without
// contingency reserve requirements.
//
// Adding regulation beyond the requirement never lowers cost (adjusted
// offers are nonnegative and energy headroom only shrinks), so only
// commitments summing exactly to the requirement are enumerated.

struct Commitment {
  std::vector<double> reg;
  double cost = std::numeric_limits<double>::infinity();
};

inline Commitment pjm_best_commitment(const CaseInputs& c, double step) {
  const auto& p = c.params;
  const std::size_t n = c.resources.size();
  auto fc = merit_order(c.resources, c.forecast_demand);
  const auto l = loc(c.resources, fc ? fc->marginal_offer : 0.0);
  std::vector<int> cap(n);
  std::vector<double> adj(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = c.resources[i];
    const double lim =
        r.agc_qualified ? std::min(r.reg_offer_max, p.dispatch_interval_min * r.ramp) : 0.0;
    cap[i] = static_cast<int>(std::floor(lim / step + 1e-9));
    adj[i] = r.offer_reg_capacity + p.mileage_ratio * r.offer_reg_performance + l.at(r.id);
  }
  const int units = static_cast<int>(std::llround(c.requirements.reg_capacity_req / step));

  Commitment best;
  std::vector<int> k(n, 0);
  std::vector<double> lo(n), hi(n);
  // Depth-first over all k with sum(k) == units, 0 <= k[i] <= cap[i].
  auto visit = [&](auto&& self, std::size_t i, int left) -> void {
    if (i + 1 == n) {
      if (left > cap[i]) return;
      k[i] = left;
      double reg_cost = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double r = k[j] * step;
        lo[j] = c.resources[j].p_min + r;
        hi[j] = c.resources[j].p_max - r;
        reg_cost += adj[j] * r;
      }
      auto e = merit_order(c.resources, c.requirements.demand, &lo, &hi);
      if (!e) return;
      const double total = reg_cost + e->cost;
      if (total < best.cost - 1e-9) {
        best.cost = total;
        best.reg.resize(n);
        for (std::size_t j = 0; j < n; ++j) best.reg[j] = k[j] * step;
      }
      return;
    }
    for (int v = 0; v <= std::min(cap[i], left); ++v) {
      k[i] = v;
      self(self, i + 1, left - v);
    }
  };
  if (n > 0) visit(visit, 0, units);
  return best;
}

}  // namespace oracle
