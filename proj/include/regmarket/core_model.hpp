#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace regmarket {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One generator: limits, ramp and every product offer.
struct Resource {
  std::string id;
  double p_min = 0.0;                  // MW
  double p_max = 0.0;                  // MW
  double ramp = 0.0;                   // MW/min
  double offer_energy = 0.0;           // $/MWh
  double offer_reg_capacity = 0.0;     // $/MWh
  double offer_reg_performance = 0.0;  // $/MW of mileage
  double offer_syn = 0.0;              // $/MWh
  double offer_non = 0.0;              // $/MWh
  double offer_sup = 0.0;              // $/MWh
  double reg_offer_max = 0.0;          // MW
  bool agc_qualified = true;

  friend bool operator==(const Resource&, const Resource&) = default;
};

struct SystemRequirements {
  double demand = 0.0;                  // MW
  double reg_capacity_req = 0.0;        // MW
  double reg_mileage_req_hourly = 0.0;  // MW/h
  double syn_req = 0.0;                 // MW
  double r10_req = 0.0;                 // MW
  double r30_req = 0.0;                 // MW, also the supplemental requirement

  friend bool operator==(const SystemRequirements&, const SystemRequirements&) = default;
};

struct MarketParams {
  double mileage_ratio = 3.2;         // 1/h
  double dispatch_interval_min = 5.0;  // minutes
  double agc_period_sec = 4.0;         // seconds
  bool loc_floor_at_zero = true;

  double intervals_per_hour() const { return 60.0 / dispatch_interval_min; }

  // Maximum deployment ratio: twice the number of AGC signals in one interval.
  double beta() const { return 2.0 * (dispatch_interval_min * 60.0 / agc_period_sec); }

  // Mileage requirement per dispatch interval.
  double mileage_req_per_interval(double hourly) const { return hourly / intervals_per_hour(); }

  friend bool operator==(const MarketParams&, const MarketParams&) = default;
};

struct CaseInputs {
  std::vector<Resource> resources;
  SystemRequirements requirements;
  MarketParams params;
  double forecast_demand = 0.0;  // MW

  const Resource& resource(const std::string& id) const {
    for (const auto& r : resources)
      if (r.id == id) return r;
    throw Error("unknown resource '" + id + "'");
  }

  friend bool operator==(const CaseInputs&, const CaseInputs&) = default;
};

// Per-resource quantities of every product in one clearing.
struct ResourceDispatch {
  std::string id;
  double energy = 0.0;        // P
  double reg_capacity = 0.0;  // R_cap (MISO: R1 + R2)
  double reg_r1 = 0.0;        // MISO regulation-as-regulation
  double reg_r2 = 0.0;        // MISO regulation-as-reserve
  double reg_mileage = 0.0;   // R_per per dispatch interval (PJM/MISO: reporting value R_per*)
  double syn = 0.0;
  double non = 0.0;
  double sup = 0.0;
};

enum class Market { isone, pjm, miso };

inline const char* market_name(Market m) {
  switch (m) {
    case Market::isone: return "isone";
    case Market::pjm: return "pjm";
    case Market::miso: return "miso";
  }
  return "?";
}

inline const char* market_title(Market m) {
  switch (m) {
    case Market::isone: return "ISO New England";
    case Market::pjm: return "PJM Interconnection";
    case Market::miso: return "Midcontinent ISO";
  }
  return "?";
}

// Complete outcome of one RTO's clearing pipeline.
//
// For MISO, price_capacity carries the total RMCP (MISO publishes no
// separate capacity price) and price_total == price_capacity.
struct ClearingResult {
  Market market = Market::isone;
  std::vector<ResourceDispatch> dispatch;
  double lmp = 0.0;
  double lmp_forecast = 0.0;
  double price_total = 0.0;
  double price_capacity = 0.0;
  double price_performance = 0.0;
  double objective = 0.0;
  std::map<std::string, double> duals;
  std::map<std::string, double> vickrey_payments;
  std::map<std::string, double> avoided_costs;
  std::map<std::string, double> loc_estimated;
  std::map<std::string, double> loc_realtime;
  bool dual_warning = false;

  const ResourceDispatch& at(const std::string& id) const {
    for (const auto& d : dispatch)
      if (d.id == id) return d;
    throw Error("no dispatch for resource '" + id + "'");
  }
};

struct SeriesStats {
  double min = 0.0;
  double mean = 0.0;
  double max = 0.0;
  double variance = 0.0;  // population
  std::size_t count = 0;
};

// Series name -> statistics, in insertion order.
using TrialStats = std::vector<std::pair<std::string, SeriesStats>>;

inline const SeriesStats& series(const TrialStats& stats, const std::string& name) {
  for (const auto& [n, s] : stats)
    if (n == name) return s;
  throw Error("no series '" + name + "'");
}

// Population statistics of a sample. A constant sample reports its value
// as the mean and exactly zero variance.
inline SeriesStats summarize(const std::vector<double>& values) {
  SeriesStats s;
  s.count = values.size();
  if (values.empty()) return s;
  s.min = s.max = values.front();
  double sum = 0.0;
  for (double v : values) {
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
    sum += v;
  }
  if (s.min == s.max) {
    s.mean = s.min;
    s.variance = 0.0;
    return s;
  }
  s.mean = std::clamp(sum / static_cast<double>(values.size()), s.min, s.max);
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.variance = ss / static_cast<double>(values.size());
  return s;
}

struct Violation {
  std::string resource_id;  // empty for system-level violations
  std::string field;
  std::string message;
};

class InvalidCase : public Error {
 public:
  explicit InvalidCase(std::vector<Violation> v)
      : Error(describe(v)), violations_(std::move(v)) {}
  const std::vector<Violation>& violations() const { return violations_; }

  static std::string describe(const std::vector<Violation>& v) {
    std::string out = "invalid case:";
    for (const auto& e : v) {
      out += "\n  ";
      if (!e.resource_id.empty()) out += e.resource_id + ".";
      out += e.field + ": " + e.message;
    }
    return out;
  }

 private:
  std::vector<Violation> violations_;
};

namespace detail {

inline bool divides(double divisor, double value) {
  if (!(divisor > 0.0)) return false;
  double q = value / divisor;
  return std::abs(q - std::round(q)) < 1e-9 && std::round(q) >= 1.0;
}

}  // namespace detail

// Checks every invariant of the case data; empty result means valid.
inline std::vector<Violation> validate_case(const CaseInputs& c) {
  std::vector<Violation> out;
  auto bad = [&](std::string id, std::string field, std::string msg) {
    out.push_back({std::move(id), std::move(field), std::move(msg)});
  };
  auto finite_nonneg = [&](const std::string& id, const char* field, double v) {
    if (!std::isfinite(v))
      bad(id, field, "must be finite");
    else if (v < 0.0)
      bad(id, field, "must be >= 0");
  };

  std::set<std::string> seen;
  double total_pmax = 0.0;
  for (const auto& r : c.resources) {
    if (r.id.empty()) bad("", "resources.id", "must be non-empty");
    if (!seen.insert(r.id).second) bad(r.id, "id", "duplicate resource id");
    if (!std::isfinite(r.p_min) || !std::isfinite(r.p_max)) {
      bad(r.id, "p_max", "limits must be finite");
    } else if (r.p_min > r.p_max) {
      bad(r.id, "p_min", "p_min exceeds p_max");
    }
    if (!std::isfinite(r.ramp) || !(r.ramp > 0.0)) bad(r.id, "ramp", "must be > 0");
    finite_nonneg(r.id, "offer_energy", r.offer_energy);
    finite_nonneg(r.id, "offer_reg_capacity", r.offer_reg_capacity);
    finite_nonneg(r.id, "offer_reg_performance", r.offer_reg_performance);
    finite_nonneg(r.id, "offer_syn", r.offer_syn);
    finite_nonneg(r.id, "offer_non", r.offer_non);
    finite_nonneg(r.id, "offer_sup", r.offer_sup);
    finite_nonneg(r.id, "reg_offer_max", r.reg_offer_max);
    if (std::isfinite(r.p_max)) total_pmax += r.p_max;
  }

  const auto& q = c.requirements;
  finite_nonneg("", "requirements.demand", q.demand);
  finite_nonneg("", "requirements.reg_capacity_req", q.reg_capacity_req);
  finite_nonneg("", "requirements.reg_mileage_req_hourly", q.reg_mileage_req_hourly);
  finite_nonneg("", "requirements.syn_req", q.syn_req);
  finite_nonneg("", "requirements.r10_req", q.r10_req);
  finite_nonneg("", "requirements.r30_req", q.r30_req);

  const auto& p = c.params;
  finite_nonneg("", "params.mileage_ratio", p.mileage_ratio);
  if (!detail::divides(p.dispatch_interval_min, 60.0))
    bad("", "params.dispatch_interval_min", "must divide 60");
  else if (!detail::divides(p.agc_period_sec, p.dispatch_interval_min * 60.0))
    bad("", "params.agc_period_sec", "must divide the dispatch interval");

  if (std::isfinite(q.demand) && total_pmax < q.demand)
    bad("", "requirements.demand", "exceeds total p_max of all resources");
  if (!std::isfinite(c.forecast_demand) || !(c.forecast_demand > 0.0))
    bad("", "forecast_demand", "must be > 0");
  return out;
}

inline void require_valid(const CaseInputs& c) {
  auto v = validate_case(c);
  if (!v.empty()) throw InvalidCase(std::move(v));
}

// The five reference generators A-E with the system conditions of the
// five-generator example.
inline CaseInputs five_generator_case(double forecast_demand = 420.0) {
  struct Row {
    const char* id;
    double ramp, cp, ccap, cper;
  };
  constexpr Row rows[] = {{"A", 5, 10.00, 2.50, 1.00},
                          {"B", 6, 20.00, 15.00, 1.50},
                          {"C", 1, 15.00, 6.50, 0.50},
                          {"D", 10, 18.00, 12.00, 2.00},
                          {"E", 5, 12.00, 7.00, 2.00}};
  CaseInputs c;
  for (const auto& r : rows) {
    Resource g;
    g.id = r.id;
    g.p_min = 0.0;
    g.p_max = 100.0;
    g.ramp = r.ramp;
    g.offer_energy = r.cp;
    g.offer_reg_capacity = r.ccap;
    g.offer_reg_performance = r.cper;
    g.reg_offer_max = 50.0;
    g.agc_qualified = true;
    c.resources.push_back(g);
  }
  c.requirements.demand = 420.0;
  c.requirements.reg_capacity_req = 25.0;
  c.requirements.reg_mileage_req_hourly = 80.0;
  c.params = MarketParams{};
  c.forecast_demand = forecast_demand;
  return c;
}

}  // namespace regmarket
