#pragma once

// Dense bounded-variable primal simplex.
//
// Minimizes c'x subject to named linear rows (<=, >=, =) and per-variable
// bounds. Upper bounds are handled implicitly (nonbasic variables sit at
// either bound), so only genuine rows enter the tableau. Phase 1 minimizes
// the sum of artificials; in phase 2 artificials are fixed at zero.
//
// Pricing is most-negative reduced cost; after a degenerate step the
// solver switches to Bland's rule until the objective moves again.
// Every choice is broken by lowest column index, so a given program
// always produces the same basis and bit-identical output.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "core_model.hpp"

namespace regmarket::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

class MalformedProgram : public Error {
 public:
  using Error::Error;
};

class IterationLimit : public Error {
 public:
  using Error::Error;
};

enum class Relation { less_equal, greater_equal, equal };
enum class Status { optimal, infeasible, unbounded };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
  }
  return "?";
}

struct VarId {
  std::size_t index = 0;
};
struct RowId {
  std::size_t index = 0;
};

struct Term {
  VarId var;
  double coef = 0.0;
};

struct Variable {
  std::string name;
  double lower = 0.0;
  double upper = kInf;
  double cost = 0.0;
};

struct Constraint {
  std::string name;
  std::vector<Term> terms;
  Relation relation = Relation::less_equal;
  double rhs = 0.0;
};

class LinearProgram {
 public:
  VarId add_variable(std::string name, double lower, double upper, double cost) {
    vars_.push_back({std::move(name), lower, upper, cost});
    return {vars_.size() - 1};
  }

  RowId add_constraint(std::string name, std::vector<Term> terms, Relation rel, double rhs) {
    rows_.push_back({std::move(name), std::move(terms), rel, rhs});
    return {rows_.size() - 1};
  }

  void set_rhs(RowId row, double rhs) { rows_.at(row.index).rhs = rhs; }
  void set_cost(VarId var, double cost) { vars_.at(var.index).cost = cost; }

  const std::vector<Variable>& variables() const { return vars_; }
  const std::vector<Constraint>& constraints() const { return rows_; }
  const Variable& variable(VarId v) const { return vars_.at(v.index); }
  const Constraint& constraint(RowId r) const { return rows_.at(r.index); }

  // Throws MalformedProgram on non-finite data, inverted bounds, duplicate
  // names or out-of-range variable references.
  void check() const {
    std::unordered_set<std::string_view> names;
    names.reserve(std::max(vars_.size(), rows_.size()));
    for (const auto& v : vars_) {
      if (!names.insert(v.name).second)
        throw MalformedProgram("duplicate variable name '" + v.name + "'");
      if (std::isnan(v.lower) || std::isnan(v.upper) || v.lower == kInf || v.upper == -kInf)
        throw MalformedProgram("bad bounds on variable '" + v.name + "'");
      if (v.lower > v.upper)
        throw MalformedProgram("lower bound exceeds upper bound on '" + v.name + "'");
      if (!std::isfinite(v.cost)) throw MalformedProgram("non-finite cost on '" + v.name + "'");
    }
    names.clear();
    for (const auto& r : rows_) {
      if (!names.insert(r.name).second)
        throw MalformedProgram("duplicate constraint name '" + r.name + "'");
      if (!std::isfinite(r.rhs)) throw MalformedProgram("non-finite rhs on '" + r.name + "'");
      for (const auto& t : r.terms) {
        if (t.var.index >= vars_.size())
          throw MalformedProgram("constraint '" + r.name + "' references unknown variable");
        if (!std::isfinite(t.coef))
          throw MalformedProgram("non-finite coefficient in '" + r.name + "'");
      }
    }
  }

 private:
  std::vector<Variable> vars_;
  std::vector<Constraint> rows_;
};

// Duals follow the sensitivity convention: duals[i] is the change in the
// optimal objective per unit increase of row i's rhs (>= rows give values
// >= 0, <= rows values <= 0). reduced_costs[j] = c_j - duals' A_j.
struct LpSolution {
  Status status = Status::infeasible;
  std::vector<double> primal;
  std::vector<double> duals;
  std::vector<double> reduced_costs;
  double objective = 0.0;
  std::size_t iterations = 0;

  bool optimal() const { return status == Status::optimal; }
  double value(VarId v) const { return primal.at(v.index); }
  double dual(RowId r) const { return duals.at(r.index); }
};

struct SolverOptions {
  std::size_t max_iterations = 10000;
  double pivot_tol = 1e-9;
  double cost_tol = 1e-9;
  double feas_tol = 1e-9;
};

namespace detail {

// Column of the internal program and how it maps back to a user variable:
// x_user = offset + sign * x_col.
struct ColumnMap {
  std::size_t user = 0;
  double sign = 1.0;
};

class Tableau {
  static constexpr double kTie = 1e-12;

 public:
  Tableau(const LinearProgram& lp, const SolverOptions& opt) : opt_(opt) { build(lp); }

  LpSolution run(const LinearProgram& lp) {
    LpSolution sol;
    // Phase 1
    if (n_artificial_ > 0) {
      std::vector<double> phase1(ncols_, 0.0);
      for (std::size_t k = first_art_; k < ncols_; ++k) phase1[k] = 1.0;
      price(d_, phase1);
      price(d2_, cost_);
      tie_break_ = true;
      auto st = iterate(phase1, /*allow_art=*/true, sol.iterations);
      tie_break_ = false;
      if (st != Status::optimal) throw Error("phase 1 did not terminate optimally");
      double infeas = 0.0;
      for (std::size_t i = 0; i < m_; ++i)
        if (basis_[i] >= first_art_) infeas += beta_[i];
      if (infeas > opt_.feas_tol * std::max(1.0, rhs_scale_)) {
        sol.status = Status::infeasible;
        return sol;
      }
      for (std::size_t k = first_art_; k < ncols_; ++k) {
        upper_[k] = 0.0;
        at_upper_[k] = false;
      }
    }
    price(d_, cost_);
    auto st = iterate(cost_, /*allow_art=*/false, sol.iterations);
    if (st == Status::unbounded) {
      sol.status = Status::unbounded;
      return sol;
    }
    finish(lp, sol);
    sol.status = Status::optimal;
    return sol;
  }

 private:
  void build(const LinearProgram& lp) {
    const auto& vars = lp.variables();
    const auto& rows = lp.constraints();
    m_ = rows.size();

    // Structural columns.
    std::vector<std::vector<std::pair<std::size_t, double>>> user_cols(vars.size());
    for (auto& uc : user_cols) uc.reserve(4);
    for (std::size_t i = 0; i < m_; ++i)
      for (const auto& t : rows[i].terms) user_cols[t.var.index].push_back({i, t.coef});

    std::vector<double> shift(m_, 0.0);  // sum a_ij * offset_j per row
    struct Col {
      std::size_t user;
      double sign;
      double upper;
    };
    std::vector<Col> cols;
    offset_.assign(vars.size(), 0.0);
    for (std::size_t j = 0; j < vars.size(); ++j) {
      const auto& v = vars[j];
      if (std::isfinite(v.lower)) {
        offset_[j] = v.lower;
        cols.push_back({j, 1.0, v.upper - v.lower});
      } else if (std::isfinite(v.upper)) {
        offset_[j] = v.upper;
        cols.push_back({j, -1.0, kInf});
      } else {
        cols.push_back({j, 1.0, kInf});
        cols.push_back({j, -1.0, kInf});
      }
      for (auto [i, a] : user_cols[j]) shift[i] += a * offset_[j];
    }
    n_struct_ = cols.size();

    // Row orientation: every stored row is either "<=" with rhs >= 0 (its
    // slack starts basic) or needs an artificial.
    row_sign_.assign(m_, 1.0);
    std::vector<double> b(m_);
    std::vector<int> slack_coef(m_, 0);  // coefficient of the slack in the stored row
    std::vector<bool> needs_art(m_, false);
    rhs_scale_ = 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      const auto& r = rows[i];
      double rhs = r.rhs - shift[i];
      double s = 1.0;
      int slack = 0;
      if (r.relation == Relation::less_equal) {
        slack = 1;
      } else if (r.relation == Relation::greater_equal) {
        s = -1.0;
        slack = 1;
      }
      rhs *= s;
      if (rhs < 0.0) {
        s = -s;
        rhs = -rhs;
        slack = -slack;
      }
      row_sign_[i] = s;
      b[i] = rhs;
      slack_coef[i] = slack;
      needs_art[i] = slack != 1;
      rhs_scale_ = std::max(rhs_scale_, std::abs(rhs));
    }

    std::size_t n_slack = 0;
    for (std::size_t i = 0; i < m_; ++i)
      if (slack_coef[i] != 0) ++n_slack;
    n_artificial_ = 0;
    for (std::size_t i = 0; i < m_; ++i)
      if (needs_art[i]) ++n_artificial_;
    first_slack_ = n_struct_;
    first_art_ = n_struct_ + n_slack;
    ncols_ = first_art_ + n_artificial_;

    T_.assign(m_ * ncols_, 0.0);
    cost_.assign(ncols_, 0.0);
    upper_.assign(ncols_, kInf);
    at_upper_.assign(ncols_, false);
    colmap_.resize(n_struct_);
    scol_.assign(n_struct_, {});
    for (std::size_t k = 0; k < n_struct_; ++k) {
      colmap_[k] = {cols[k].user, cols[k].sign};
      upper_[k] = cols[k].upper;
      cost_[k] = cols[k].sign * vars[cols[k].user].cost;
      for (auto [i, a] : user_cols[cols[k].user]) at(i, k) += row_sign_[i] * cols[k].sign * a;
      for (std::size_t i = 0; i < m_; ++i)
        if (at(i, k) != 0.0) scol_[k].push_back({i, at(i, k)});
    }
    init_col_.assign(m_, 0);
    basis_.assign(m_, 0);
    beta_ = b;
    std::size_t sk = first_slack_, ak = first_art_;
    for (std::size_t i = 0; i < m_; ++i) {
      if (slack_coef[i] != 0) {
        at(i, sk) = slack_coef[i];
        if (!needs_art[i]) init_col_[i] = sk;
        ++sk;
      }
      if (needs_art[i]) {
        at(i, ak) = 1.0;
        init_col_[i] = ak;
        ++ak;
      }
      basis_[i] = init_col_[i];
    }
    is_basic_.assign(ncols_, false);
    for (auto k : basis_) is_basic_[k] = true;
    b_ = std::move(b);
  }

  double& at(std::size_t i, std::size_t k) { return T_[i * ncols_ + k]; }
  double at(std::size_t i, std::size_t k) const { return T_[i * ncols_ + k]; }

  // Reduced costs d = c - c_B B^-1 A for the current tableau.
  void price(std::vector<double>& d, const std::vector<double>& c) const {
    d = c;
    for (std::size_t i = 0; i < m_; ++i) {
      double cb = c[basis_[i]];
      if (cb == 0.0) continue;
      const double* row = &T_[i * ncols_];
      for (std::size_t k = 0; k < ncols_; ++k) d[k] -= cb * row[k];
    }
    for (auto k : basis_) d[k] = 0.0;
  }

  // Prices and pivots until no improving column remains. c is the active
  // cost vector (phase 1 or 2); it only scales the optimality tolerance.
  Status iterate(const std::vector<double>& c, bool allow_art, std::size_t& iterations) {
    bool bland = false;
    std::vector<std::size_t> nz;
    nz.reserve(ncols_);
    const double cscale = std::max(1.0, max_abs(c));
    const double dtol = opt_.cost_tol * cscale;
    for (;;) {
      // Entering column.
      std::size_t enter = ncols_;
      double best = 0.0;
      const std::size_t limit = allow_art ? ncols_ : first_art_;
      for (std::size_t k = 0; k < limit; ++k) {
        if (is_basic_[k] || upper_[k] == 0.0) continue;
        double score = at_upper_[k] ? d_[k] : -d_[k];
        if (score <= dtol) continue;
        if (bland) {
          enter = k;
          break;
        }
        if (score > best + dtol) {
          best = score;
          enter = k;
        } else if (tie_break_ && score >= best - dtol) {
          // Phase 1 ties: prefer the column that is cheaper in phase 2.
          const double mine = at_upper_[k] ? -d2_[k] : d2_[k];
          const double theirs = at_upper_[enter] ? -d2_[enter] : d2_[enter];
          if (mine < theirs - dtol) {
            best = std::max(best, score);
            enter = k;
          }
        }
      }
      if (enter == ncols_) return Status::optimal;
      if (++iterations > opt_.max_iterations)
        throw IterationLimit("simplex exceeded " + std::to_string(opt_.max_iterations) +
                             " iterations");

      const double dir = at_upper_[enter] ? -1.0 : 1.0;

      // Ratio test. leave == m_ means the entering column hits its own bound.
      double theta = upper_[enter];
      std::size_t leave = m_;
      double leave_alpha = 0.0;
      for (std::size_t i = 0; i < m_; ++i) {
        const double alpha = dir * at(i, enter);
        double lim;
        if (alpha > opt_.pivot_tol) {
          lim = std::max(0.0, beta_[i]) / alpha;
        } else if (alpha < -opt_.pivot_tol && std::isfinite(upper_[basis_[i]])) {
          lim = std::max(0.0, upper_[basis_[i]] - beta_[i]) / -alpha;
        } else {
          continue;
        }
        bool take = false;
        if (lim < theta - kTie) {
          take = true;
        } else if (leave != m_ && lim <= theta + kTie) {
          if (bland)
            take = basis_[i] < basis_[leave];
          else if (std::abs(alpha) > std::abs(leave_alpha) * (1.0 + 1e-9))
            take = true;
          else if (std::abs(alpha) >= std::abs(leave_alpha) * (1.0 - 1e-9))
            take = basis_[i] < basis_[leave];
        }
        if (take) {
          theta = lim;
          leave = i;
          leave_alpha = alpha;
        }
      }
      if (leave == m_ && !std::isfinite(theta)) return Status::unbounded;

      bland = theta <= 1e-12;

      // Move along the edge.
      if (theta > 0.0)
        for (std::size_t i = 0; i < m_; ++i) beta_[i] -= dir * theta * at(i, enter);

      if (leave == m_) {
        at_upper_[enter] = !at_upper_[enter];
        continue;
      }

      const std::size_t out = basis_[leave];
      at_upper_[out] = leave_alpha < 0.0;
      beta_[leave] = dir > 0 ? theta : upper_[enter] - theta;
      if (at_upper_[out] && !std::isfinite(upper_[out])) at_upper_[out] = false;
      pivot(leave, enter, nz);
      is_basic_[out] = false;
      is_basic_[enter] = true;
      at_upper_[enter] = false;
      basis_[leave] = enter;
    }
  }

  void pivot(std::size_t r, std::size_t k, std::vector<std::size_t>& nz) {
    double* prow = &T_[r * ncols_];
    const double inv = 1.0 / prow[k];
    nz.clear();
    for (std::size_t q = 0; q < ncols_; ++q) {
      if (prow[q] != 0.0) {
        prow[q] *= inv;
        nz.push_back(q);
      }
    }
    prow[k] = 1.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      double* row = &T_[i * ncols_];
      const double f = row[k];
      if (f == 0.0) continue;
      for (auto q : nz) row[q] -= f * prow[q];
      row[k] = 0.0;
    }
    for (auto* d : {&d_, &d2_}) {
      if (d != &d_ && !tie_break_) break;
      const double f = (*d)[k];
      if (f == 0.0) continue;
      for (auto q : nz) (*d)[q] -= f * prow[q];
      (*d)[k] = 0.0;
    }
  }

  static double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }

  // Recomputes basic values and duals from B^-1 (the columns that formed
  // the initial identity) to shed accumulated pivoting error.
  void finish(const LinearProgram& lp, LpSolution& sol) {
    std::vector<double> xcol(ncols_, 0.0);
    for (std::size_t k = 0; k < ncols_; ++k)
      if (!is_basic_[k] && at_upper_[k]) xcol[k] = upper_[k];

    // Residual rhs r = b - N x_N over the stored structural columns.
    std::vector<double> r = b_;
    const auto& vars = lp.variables();
    for (std::size_t k = 0; k < n_struct_; ++k) {
      if (xcol[k] == 0.0) continue;
      for (auto [i, a] : scol_[k]) r[i] -= a * xcol[k];
    }
    // Slacks never sit at a finite upper bound; artificials are fixed at 0.
    for (std::size_t i = 0; i < m_; ++i) {
      double v = 0.0;
      for (std::size_t q = 0; q < m_; ++q) v += at(i, init_col_[q]) * r[q];
      xcol[basis_[i]] = v;
    }
    for (std::size_t k = 0; k < ncols_; ++k) {
      double& v = xcol[k];
      double snap = 1e-11 * std::max(1.0, std::abs(v));
      if (std::abs(v) < snap) v = 0.0;
      if (std::isfinite(upper_[k]) && std::abs(v - upper_[k]) < snap) v = upper_[k];
    }

    sol.primal.assign(vars.size(), 0.0);
    for (std::size_t j = 0; j < vars.size(); ++j) sol.primal[j] = offset_[j];
    for (std::size_t k = 0; k < n_struct_; ++k)
      sol.primal[colmap_[k].user] += colmap_[k].sign * xcol[k];
    for (std::size_t j = 0; j < vars.size(); ++j) {
      double& v = sol.primal[j];
      if (v < vars[j].lower) v = vars[j].lower;
      if (v > vars[j].upper) v = vars[j].upper;
    }

    // y' = c_B B^-1 in stored orientation, then map to user orientation.
    sol.duals.assign(m_, 0.0);
    for (std::size_t q = 0; q < m_; ++q) {
      double y = 0.0;
      for (std::size_t i = 0; i < m_; ++i) y += cost_[basis_[i]] * at(i, init_col_[q]);
      double d = y * row_sign_[q];
      sol.duals[q] = d == 0.0 ? 0.0 : d;
    }

    const auto& rows = lp.constraints();
    sol.reduced_costs.assign(vars.size(), 0.0);
    for (std::size_t j = 0; j < vars.size(); ++j) sol.reduced_costs[j] = vars[j].cost;
    for (std::size_t i = 0; i < m_; ++i)
      for (const auto& t : rows[i].terms) sol.reduced_costs[t.var.index] -= sol.duals[i] * t.coef;

    sol.objective = 0.0;
    for (std::size_t j = 0; j < vars.size(); ++j) sol.objective += vars[j].cost * sol.primal[j];
  }

  SolverOptions opt_;
  std::size_t m_ = 0, ncols_ = 0, n_struct_ = 0, n_artificial_ = 0;
  std::size_t first_slack_ = 0, first_art_ = 0;
  std::vector<double> T_;
  std::vector<double> b_, beta_, d_, cost_, upper_;
  std::vector<double> d2_;  // phase-2 reduced costs, tracked during phase 1
  bool tie_break_ = false;
  std::vector<unsigned char> at_upper_, is_basic_;
  std::vector<std::size_t> basis_, init_col_;
  std::vector<double> row_sign_, offset_;
  std::vector<ColumnMap> colmap_;
  std::vector<std::vector<std::pair<std::size_t, double>>> scol_;  // stored structural columns
  double rhs_scale_ = 0.0;
};

}  // namespace detail

// Solves lp to optimality or reports infeasible/unbounded.
//
// Throws MalformedProgram for ill-formed input and IterationLimit when the
// pivot cap is reached (which indicates a solver defect, not a property of
// the program).
inline LpSolution solve(const LinearProgram& lp, const SolverOptions& opt = {}) {
  lp.check();
  detail::Tableau t(lp, opt);
  return t.run(lp);
}

}  // namespace regmarket::lp
