#pragma once

// Matched/mismatched and Monte Carlo forecast-error experiments over the
// three markets, plus the seeded synthetic fleet generator.

#include <array>
#include <cmath>
#include <cstdint>
#include <exception>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "core_model.hpp"
#include "energy.hpp"
#include "isone.hpp"
#include "miso.hpp"
#include "pjm.hpp"

namespace regmarket::scenario {

// Forecast demand fraction of the synthetic fleet's real-time demand is
// drawn from [scale_min, scale_max].
struct TrialSpec {
  CaseInputs base;
  double scale_min = 0.5;
  double scale_max = 1.25;
  std::uint64_t seed = 0;
  std::size_t n_trials = 1;
};

struct TrialResult {
  double scale = 1.0;
  double gamma_forecast = 0.0;
  double gamma_rt = 0.0;
  ClearingResult isone;
  ClearingResult pjm;
  ClearingResult miso;
};

// Scalar price series of one trial, in results-file column order.
inline constexpr std::array<const char*, 8> kSeries = {
    "gamma_forecast", "gamma_rt", "isone_mu_cap", "isone_mu_per",
    "pjm_mu_cap",     "pjm_mu_per", "miso_mu",    "miso_mu_per"};

struct TrialRow {
  std::size_t trial = 0;  // 1-based
  double scale = 1.0;
  bool feasible = true;
  std::array<double, kSeries.size()> values{};
  std::string error;
};

struct MonteCarloResult {
  std::vector<TrialRow> rows;
  TrialStats stats;
  std::size_t infeasible = 0;
};

class TrialFailure : public Error {
 public:
  TrialFailure(double scale, const std::string& what)
      : Error("trial at forecast scale " + std::to_string(scale) + ": " + what), scale_(scale) {}
  double scale() const { return scale_; }

 private:
  double scale_;
};

class TrialBudgetExceeded : public Error {
 public:
  TrialBudgetExceeded(std::string msg, std::vector<double> scales)
      : Error(std::move(msg)), scales_(std::move(scales)) {}
  const std::vector<double>& failing_scales() const { return scales_; }

 private:
  std::vector<double> scales_;
};

// Deterministic uniform draws on top of mt19937_64. The mapping to [0, 1)
// is spelled out because std::uniform_real_distribution is not portable.
class UnitRandom {
 public:
  explicit UnitRandom(std::uint64_t seed) : gen_(seed) {}
  double next() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * next(); }
  // Uniform on [lo, hi] rounded to `step`.
  double grid(double lo, double hi, double step) {
    return std::round(uniform(lo, hi) / step) * step;
  }
  std::int64_t integer(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(gen_() % static_cast<std::uint64_t>(hi - lo + 1));
  }

 private:
  std::mt19937_64 gen_;
};

// Trial quantities that depend only on the real-time case, not on the
// forecast: the real-time energy-only price and the MISO clearing.
struct RealTimeBase {
  double gamma_rt = 0.0;
  ClearingResult miso;
};

inline RealTimeBase real_time_base(const CaseInputs& c) {
  try {
    return {clear_energy_only(c.resources, c.requirements.demand).lmp, miso::clear(c)};
  } catch (const Error& e) {
    throw TrialFailure(1.0, e.what());
  }
}

inline TrialResult run_trial(const CaseInputs& c, double scale, const RealTimeBase& base) {
  CaseInputs t = c;
  t.forecast_demand = scale * c.requirements.demand;
  try {
    TrialResult out;
    out.scale = scale;
    out.gamma_forecast = clear_energy_only(t.resources, t.forecast_demand).lmp;
    out.gamma_rt = base.gamma_rt;
    out.isone = isone::clear(t);
    out.pjm = pjm::clear(t);
    out.miso = base.miso;
    return out;
  } catch (const Error& e) {
    throw TrialFailure(scale, e.what());
  }
}

inline TrialResult run_trial(const CaseInputs& c, double scale) {
  RealTimeBase base;
  try {
    base = real_time_base(c);
  } catch (const TrialFailure& e) {
    throw TrialFailure(scale, e.what());
  }
  return run_trial(c, scale, base);
}

inline std::array<double, kSeries.size()> series_values(const TrialResult& r) {
  return {r.gamma_forecast,          r.gamma_rt,
          r.isone.price_capacity,    r.isone.price_performance,
          r.pjm.price_capacity,      r.pjm.price_performance,
          r.miso.price_total,        r.miso.price_performance};
}

inline TrialStats compute_stats(const std::vector<TrialRow>& rows) {
  TrialStats stats;
  for (std::size_t k = 0; k < kSeries.size(); ++k) {
    std::vector<double> v;
    v.reserve(rows.size());
    for (const auto& r : rows)
      if (r.feasible) v.push_back(r.values[k]);
    stats.emplace_back(kSeries[k], summarize(v));
  }
  return stats;
}

// Runs spec.n_trials trials with scales drawn up front from the seeded
// generator, so the result does not depend on the thread count.
inline MonteCarloResult run_monte_carlo(const TrialSpec& spec, unsigned threads = 0) {
  if (spec.n_trials < 1) throw Error("n_trials must be >= 1");
  if (!(spec.scale_min > 0.0) || !(spec.scale_min <= spec.scale_max))
    throw Error("scale bounds must satisfy 0 < min <= max");

  MonteCarloResult out;
  out.rows.resize(spec.n_trials);
  UnitRandom rng(spec.seed);
  for (std::size_t i = 0; i < spec.n_trials; ++i) {
    out.rows[i].trial = i + 1;
    out.rows[i].scale = rng.uniform(spec.scale_min, spec.scale_max);
  }

  std::optional<RealTimeBase> base;
  std::string base_error;
  try {
    base = real_time_base(spec.base);
  } catch (const Error& e) {
    base_error = e.what();
  }

  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < spec.n_trials; i += stride) {
      auto& row = out.rows[i];
      try {
        if (!base) throw TrialFailure(row.scale, base_error);
        row.values = series_values(run_trial(spec.base, row.scale, *base));
      } catch (const Error& e) {
        row.feasible = false;
        row.error = e.what();
        row.values.fill(std::nan(""));
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, spec.n_trials));
  if (threads <= 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
  }

  std::vector<double> failing;
  for (const auto& r : out.rows)
    if (!r.feasible) failing.push_back(r.scale);
  out.infeasible = failing.size();
  if (static_cast<double>(failing.size()) > 0.01 * static_cast<double>(spec.n_trials)) {
    std::string msg = std::to_string(failing.size()) + " of " + std::to_string(spec.n_trials) +
                      " trials infeasible (seed " + std::to_string(spec.seed) + "); scales:";
    for (std::size_t k = 0; k < failing.size() && k < 20; ++k) msg += " " + std::to_string(failing[k]);
    if (failing.size() > 20) msg += " ...";
    for (const auto& r : out.rows)
      if (!r.feasible) {
        msg += "\nfirst failure: " + r.error;
        break;
      }
    throw TrialBudgetExceeded(msg, std::move(failing));
  }
  out.stats = compute_stats(out.rows);
  return out;
}

// Seeded synthetic fleet. Seed 0 with n = 5 is reserved for the reference
// generators A-E. Otherwise, per generator: p_min 0-20 % of p_max,
// p_max 20-100 MW, ramp 1-10 MW/min, c_p 10-20, c_cap 2.5-15, c_per 0.5-2,
// reserve offers 0.25-5 $/MWh (all on a 0.01 grid), R_o = p_max / 2, and
// AGC qualification with probability 0.85.
inline std::vector<Resource> gen_synthetic_fleet(std::size_t n, std::uint64_t seed) {
  if (n < 5) throw Error("a synthetic fleet needs at least 5 resources");
  if (seed == 0 && n == 5) return five_generator_case().resources;

  UnitRandom rng(seed);
  const int width = static_cast<int>(std::to_string(n).size());
  std::vector<Resource> out;
  for (std::size_t i = 0; i < n; ++i) {
    Resource r;
    std::string num = std::to_string(i + 1);
    r.id = "G" + std::string(static_cast<std::size_t>(width) - num.size(), '0') + num;
    r.p_max = static_cast<double>(rng.integer(20, 100));
    r.p_min = std::round(rng.uniform(0.0, 0.2) * r.p_max);
    r.ramp = static_cast<double>(rng.integer(1, 10));
    r.offer_energy = rng.grid(10.0, 20.0, 0.01);
    r.offer_reg_capacity = rng.grid(2.5, 15.0, 0.01);
    r.offer_reg_performance = rng.grid(0.5, 2.0, 0.01);
    r.offer_syn = rng.grid(1.0, 5.0, 0.01);
    r.offer_non = rng.grid(0.5, 3.0, 0.01);
    r.offer_sup = rng.grid(0.25, 2.0, 0.01);
    r.reg_offer_max = r.p_max / 2.0;
    r.agc_qualified = rng.next() < 0.85;
    out.push_back(r);
  }
  return out;
}

// Whole case around a synthetic fleet. The reference fleet gets the
// five-generator system conditions; other fleets serve 75 % of capacity,
// with regulation scaled like 25 MW per 420 MW, hourly mileage at 3.2x the
// capacity requirement, and 2 % / 4 % / 6 % synchronized / 10-min / 30-min
// reserves.
inline CaseInputs synthetic_case(std::size_t n, std::uint64_t seed) {
  if (seed == 0 && n == 5) return five_generator_case();
  CaseInputs c;
  c.resources = gen_synthetic_fleet(n, seed);
  double cap = 0.0;
  for (const auto& r : c.resources) cap += r.p_max;
  auto tenth = [](double v) { return std::round(v * 10.0) / 10.0; };
  auto& q = c.requirements;
  q.demand = tenth(0.75 * cap);
  q.reg_capacity_req = tenth(q.demand * 25.0 / 420.0);
  q.reg_mileage_req_hourly = tenth(3.2 * q.reg_capacity_req);
  q.syn_req = tenth(0.02 * q.demand);
  q.r10_req = tenth(0.04 * q.demand);
  q.r30_req = tenth(0.06 * q.demand);
  c.params = MarketParams{};
  c.forecast_demand = q.demand;
  return c;
}

}  // namespace regmarket::scenario
