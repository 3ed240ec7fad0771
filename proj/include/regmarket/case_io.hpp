#pragma once

// Case files (strict JSON), results CSV files and the plain-text reports
// printed by the command-line tool.

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "core_model.hpp"
#include "scenario.hpp"

namespace regmarket::io {

// Malformed case or results file. The message names the offending field.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Missing, unreadable or unwritable file.
class FileError : public Error {
 public:
  using Error::Error;
};

inline constexpr const char* kCaseVersion = "1";

namespace detail {

using json = nlohmann::ordered_json;

inline void reject_unknown(const json& obj, const std::string& where,
                           std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) throw FormatError(where + ": unknown field '" + key + "'");
  }
}

inline const json& member(const json& obj, const std::string& where, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw FormatError(where + ": missing field '" + key + "'");
  return *it;
}

inline const json& object(const json& obj, const std::string& where, const char* key) {
  const auto& v = member(obj, where, key);
  if (!v.is_object()) throw FormatError(where + "." + key + ": expected an object");
  return v;
}

inline double number(const json& obj, const std::string& where, const char* key) {
  const auto& v = member(obj, where, key);
  if (!v.is_number()) throw FormatError(where + "." + key + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw FormatError(where + "." + key + ": must be finite");
  return d;
}

inline bool boolean(const json& obj, const std::string& where, const char* key) {
  const auto& v = member(obj, where, key);
  if (!v.is_boolean()) throw FormatError(where + "." + key + ": expected true or false");
  return v.get<bool>();
}

inline std::string string(const json& obj, const std::string& where, const char* key) {
  const auto& v = member(obj, where, key);
  if (!v.is_string()) throw FormatError(where + "." + key + ": expected a string");
  return v.get<std::string>();
}

inline Resource parse_resource(const json& j, const std::string& where) {
  if (!j.is_object()) throw FormatError(where + ": expected an object");
  reject_unknown(j, where,
                 {"id", "p_min", "p_max", "ramp", "offer_energy", "offer_reg_capacity",
                  "offer_reg_performance", "offer_syn", "offer_non", "offer_sup",
                  "reg_offer_max", "agc_qualified"});
  Resource r;
  r.id = string(j, where, "id");
  r.p_min = number(j, where, "p_min");
  r.p_max = number(j, where, "p_max");
  r.ramp = number(j, where, "ramp");
  r.offer_energy = number(j, where, "offer_energy");
  r.offer_reg_capacity = number(j, where, "offer_reg_capacity");
  r.offer_reg_performance = number(j, where, "offer_reg_performance");
  r.offer_syn = number(j, where, "offer_syn");
  r.offer_non = number(j, where, "offer_non");
  r.offer_sup = number(j, where, "offer_sup");
  r.reg_offer_max = number(j, where, "reg_offer_max");
  r.agc_qualified = boolean(j, where, "agc_qualified");
  return r;
}

}  // namespace detail

// Parses a case document. Every object is closed: an unknown or misspelled
// key is an error naming that key. params.loc_floor_at_zero may be omitted
// and defaults to true; every other field is required.
inline CaseInputs parse_case(std::string_view text) {
  using detail::json;
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    throw FormatError(std::string("case file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw FormatError("case file: expected a JSON object");
  detail::reject_unknown(doc, "case",
                         {"version", "resources", "requirements", "params", "forecast_demand"});
  const auto version = detail::string(doc, "case", "version");
  if (version != kCaseVersion)
    throw FormatError("case.version: unsupported version '" + version + "' (expected \"1\")");

  CaseInputs c;
  const auto& res = detail::member(doc, "case", "resources");
  if (!res.is_array()) throw FormatError("case.resources: expected an array");
  for (std::size_t i = 0; i < res.size(); ++i)
    c.resources.push_back(
        detail::parse_resource(res[i], "resources[" + std::to_string(i) + "]"));

  const auto& rq = detail::object(doc, "case", "requirements");
  detail::reject_unknown(rq, "requirements",
                         {"demand", "reg_capacity_req", "reg_mileage_req_hourly", "syn_req",
                          "r10_req", "r30_req"});
  auto& q = c.requirements;
  q.demand = detail::number(rq, "requirements", "demand");
  q.reg_capacity_req = detail::number(rq, "requirements", "reg_capacity_req");
  q.reg_mileage_req_hourly = detail::number(rq, "requirements", "reg_mileage_req_hourly");
  q.syn_req = detail::number(rq, "requirements", "syn_req");
  q.r10_req = detail::number(rq, "requirements", "r10_req");
  q.r30_req = detail::number(rq, "requirements", "r30_req");

  const auto& pj = detail::object(doc, "case", "params");
  detail::reject_unknown(pj, "params",
                         {"mileage_ratio", "dispatch_interval_min", "agc_period_sec",
                          "loc_floor_at_zero"});
  auto& p = c.params;
  p.mileage_ratio = detail::number(pj, "params", "mileage_ratio");
  p.dispatch_interval_min = detail::number(pj, "params", "dispatch_interval_min");
  p.agc_period_sec = detail::number(pj, "params", "agc_period_sec");
  p.loc_floor_at_zero = pj.contains("loc_floor_at_zero")
                            ? detail::boolean(pj, "params", "loc_floor_at_zero")
                            : true;

  c.forecast_demand = detail::number(doc, "case", "forecast_demand");
  return c;
}

// Canonical text of a case: fixed key order, two-space indent, trailing
// newline. parse_case(case_to_json(c)) == c, and re-serializing a parsed
// canonical file reproduces it byte for byte.
inline std::string case_to_json(const CaseInputs& c) {
  using detail::json;
  json doc;
  doc["version"] = kCaseVersion;
  json res = json::array();
  for (const auto& r : c.resources) {
    json o;
    o["id"] = r.id;
    o["p_min"] = r.p_min;
    o["p_max"] = r.p_max;
    o["ramp"] = r.ramp;
    o["offer_energy"] = r.offer_energy;
    o["offer_reg_capacity"] = r.offer_reg_capacity;
    o["offer_reg_performance"] = r.offer_reg_performance;
    o["offer_syn"] = r.offer_syn;
    o["offer_non"] = r.offer_non;
    o["offer_sup"] = r.offer_sup;
    o["reg_offer_max"] = r.reg_offer_max;
    o["agc_qualified"] = r.agc_qualified;
    res.push_back(std::move(o));
  }
  doc["resources"] = std::move(res);
  const auto& q = c.requirements;
  doc["requirements"] = {{"demand", q.demand},
                         {"reg_capacity_req", q.reg_capacity_req},
                         {"reg_mileage_req_hourly", q.reg_mileage_req_hourly},
                         {"syn_req", q.syn_req},
                         {"r10_req", q.r10_req},
                         {"r30_req", q.r30_req}};
  const auto& p = c.params;
  doc["params"] = {{"mileage_ratio", p.mileage_ratio},
                   {"dispatch_interval_min", p.dispatch_interval_min},
                   {"agc_period_sec", p.agc_period_sec},
                   {"loc_floor_at_zero", p.loc_floor_at_zero}};
  doc["forecast_demand"] = c.forecast_demand;
  return doc.dump(2) + "\n";
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw FileError("cannot read '" + path + "'");
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FileError("cannot write '" + path + "'");
  out << text;
  out.flush();
  if (!out) throw FileError("cannot write '" + path + "'");
}

inline CaseInputs load_case(const std::string& path) {
  const auto text = read_file(path);
  try {
    return parse_case(text);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

inline void save_case(const std::string& path, const CaseInputs& c) {
  write_file(path, case_to_json(c));
}

// ---------------------------------------------------------------------------
// Results CSV

inline constexpr const char* kResultsHeader =
    "trial,scale,gamma_forecast,gamma_rt,isone_mu_cap,isone_mu_per,pjm_mu_cap,pjm_mu_per,"
    "miso_mu,miso_mu_per";

// Four-decimal fixed point; negative zero prints as 0.0000, NaN as nan.
inline std::string fixed4(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  std::string s = buf;
  if (s == "-0.0000") s = "0.0000";
  return s;
}

inline std::string results_csv(const std::vector<scenario::TrialRow>& rows) {
  std::string out = kResultsHeader;
  out += '\n';
  for (const auto& r : rows) {
    out += std::to_string(r.trial);
    out += ',';
    out += fixed4(r.scale);
    for (double v : r.values) {
      out += ',';
      out += fixed4(r.feasible ? v : std::nan(""));
    }
    out += '\n';
  }
  return out;
}

inline void write_results(const std::string& path, const std::vector<scenario::TrialRow>& rows) {
  write_file(path, results_csv(rows));
}

namespace detail {

inline double parse_cell(const std::string& cell, std::size_t line) {
  if (cell == "nan") return std::nan("");
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (cell.empty() || used != cell.size() || !std::isfinite(v))
    throw FormatError("results line " + std::to_string(line) + ": bad number '" + cell + "'");
  return v;
}

}  // namespace detail

// Reads rows back from a results file. A row is infeasible when any price
// column is nan.
inline std::vector<scenario::TrialRow> parse_results(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kResultsHeader)
    throw FormatError("results file: header must be exactly '" + std::string(kResultsHeader) + "'");
  std::vector<scenario::TrialRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (cells.size() != 2 + scenario::kSeries.size())
      throw FormatError("results line " + std::to_string(lineno) + ": expected " +
                        std::to_string(2 + scenario::kSeries.size()) + " columns, got " +
                        std::to_string(cells.size()));
    scenario::TrialRow r;
    const double trial = detail::parse_cell(cells[0], lineno);
    if (trial < 1.0 || trial != std::floor(trial))
      throw FormatError("results line " + std::to_string(lineno) + ": bad trial number");
    r.trial = static_cast<std::size_t>(trial);
    r.scale = detail::parse_cell(cells[1], lineno);
    for (std::size_t k = 0; k < r.values.size(); ++k) {
      r.values[k] = detail::parse_cell(cells[2 + k], lineno);
      if (std::isnan(r.values[k])) r.feasible = false;
    }
    rows.push_back(r);
  }
  return rows;
}

inline std::vector<scenario::TrialRow> load_results(const std::string& path) {
  return parse_results(read_file(path));
}

// ---------------------------------------------------------------------------
// Reports

namespace detail {

inline std::string cell2(double v) {
  if (std::abs(v) < 0.005) return "0";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string pad_left(const std::string& s, std::size_t w) {
  return s.size() >= w ? s : std::string(w - s.size(), ' ') + s;
}

inline std::string pad_right(const std::string& s, std::size_t w) {
  return s.size() >= w ? s : s + std::string(w - s.size(), ' ');
}

}  // namespace detail

// Dispatch block laid out as a small table: title,
// price line, then one column per resource.
inline std::string format_clearing(const ClearingResult& r) {
  using detail::cell2;
  std::string out = market_title(r.market);
  out += '\n';
  char buf[160];
  const bool miso = r.market == Market::miso;
  std::snprintf(buf, sizeof buf, "gamma = %.2f $/MWh   %s = %.2f $/MWh   mu_per = %.2f $/MWh\n",
                r.lmp, miso ? "mu" : "mu_cap", miso ? r.price_total : r.price_capacity,
                r.price_performance);
  out += buf;

  std::size_t w = 8;
  for (const auto& d : r.dispatch) w = std::max(w, d.id.size() + 2);
  for (const auto& d : r.dispatch) w = std::max(w, cell2(d.energy).size() + 2);
  const std::size_t label = 12;
  out += std::string(label, ' ');
  for (const auto& d : r.dispatch) out += detail::pad_left(d.id, w);
  out += '\n';
  auto row = [&](const char* name, auto get) {
    out += detail::pad_right(name, label);
    for (const auto& d : r.dispatch) out += detail::pad_left(cell2(get(d)), w);
    out += '\n';
  };
  row("P (MW)", [](const ResourceDispatch& d) { return d.energy; });
  row("R_cap (MW)", [](const ResourceDispatch& d) { return d.reg_capacity; });
  row(r.market == Market::isone ? "R_per (MW)" : "R_per* (MW)",
      [](const ResourceDispatch& d) { return d.reg_mileage; });
  return out;
}

// Min/mean/max/variance table, one line per series.
inline std::string format_stats(const TrialStats& stats, std::size_t infeasible = 0) {
  std::string out;
  char buf[200];
  std::snprintf(buf, sizeof buf, "%-16s %12s %12s %12s %12s\n", "series", "minimum", "mean",
                "maximum", "variance");
  out += buf;
  std::size_t count = 0;
  for (const auto& [name, s] : stats) {
    count = std::max(count, s.count);
    std::snprintf(buf, sizeof buf, "%-16s %12s %12s %12s %12s\n", name.c_str(),
                  fixed4(s.min).c_str(), fixed4(s.mean).c_str(), fixed4(s.max).c_str(),
                  fixed4(s.variance).c_str());
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "trials: %zu feasible, %zu infeasible\n", count, infeasible);
  out += buf;
  return out;
}

}  // namespace regmarket::io
