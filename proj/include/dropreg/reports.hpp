#pragma once

#include <algorithm>
#include <cstdio>
#include <string>

#include <json.hpp>

#include "dropreg/experiments.hpp"

namespace dropreg {

namespace detail {

inline std::string csv_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

inline nlohmann::json table3_json(const Table3Report& r) {
  nlohmann::json j;
  j["name"] = "table3";
  j["parameters"] = {{"runs", r.options.runs},     {"seed", r.options.seed},
                     {"train_n", r.options.train_n}, {"test_n", r.options.test_n},
                     {"delta", r.options.delta},   {"lambda", r.options.lambda},
                     {"intercept", true},          {"warm_start", "l2"}};
  nlohmann::json per_run = nlohmann::json::array();
  for (std::size_t i = 0; i < r.runs.size(); ++i)
    per_run.push_back({{"run", i},
                       {"dropout_active", r.runs[i].dropout_active},
                       {"dropout_all", r.runs[i].dropout_all},
                       {"l2_active", r.runs[i].l2_active},
                       {"l2_all", r.runs[i].l2_all}});
  j["per_run"] = std::move(per_run);
  j["aggregates"] = {
      {"dropout_active", {{"mean", r.dropout_active_mean}, {"std_error", r.dropout_active_se}}},
      {"dropout_all", {{"mean", r.dropout_all_mean}, {"std_error", r.dropout_all_se}}},
      {"l2_active", {{"mean", r.l2_active_mean}, {"std_error", r.l2_active_se}}},
      {"l2_all", {{"mean", r.l2_all_mean}, {"std_error", r.l2_all_se}}}};
  return j;
}

inline std::string table3_csv(const Table3Report& r) {
  std::string out = "run,dropout_active,dropout_all,l2_active,l2_all\n";
  for (std::size_t i = 0; i < r.runs.size(); ++i)
    out += std::to_string(i) + "," + detail::csv_num(r.runs[i].dropout_active) + "," +
           detail::csv_num(r.runs[i].dropout_all) + "," + detail::csv_num(r.runs[i].l2_active) +
           "," + detail::csv_num(r.runs[i].l2_all) + "\n";
  out += "mean," + detail::csv_num(r.dropout_active_mean) + "," +
         detail::csv_num(r.dropout_all_mean) + "," + detail::csv_num(r.l2_active_mean) + "," +
         detail::csv_num(r.l2_all_mean) + "\n";
  out += "std_error," + detail::csv_num(r.dropout_active_se) + "," +
         detail::csv_num(r.dropout_all_se) + "," + detail::csv_num(r.l2_active_se) + "," +
         detail::csv_num(r.l2_all_se) + "\n";
  return out;
}

inline nlohmann::json trace_json(const TraceReport& r) {
  nlohmann::json j;
  j["name"] = "trace";
  j["parameters"] = {{"n", r.options.n},
                     {"dim", r.options.dim},
                     {"delta", r.options.delta},
                     {"mc_samples", r.options.mc_samples},
                     {"seed", r.options.seed}};
  nlohmann::json series = nlohmann::json::array();
  for (std::size_t k = 0; k < r.mc_penalty.size(); ++k)
    series.push_back({{"step", k},
                      {"mc_penalty", r.mc_penalty[k]},
                      {"mc_std_error", r.mc_std_error[k]},
                      {"surrogate", r.surrogate[k]}});
  j["series"] = std::move(series);
  j["aggregates"] = {{"pearson_r", r.pearson_r},
                     {"iterations", r.iterations},
                     {"converged", r.converged}};
  return j;
}

inline std::string trace_csv(const TraceReport& r) {
  std::string out = "step,mc_penalty,mc_std_error,surrogate\n";
  for (std::size_t k = 0; k < r.mc_penalty.size(); ++k)
    out += std::to_string(k) + "," + detail::csv_num(r.mc_penalty[k]) + "," +
           detail::csv_num(r.mc_std_error[k]) + "," + detail::csv_num(r.surrogate[k]) + "\n";
  out += "pearson_r," + detail::csv_num(r.pearson_r) + ",,\n";
  return out;
}

inline nlohmann::json fisher_json(const FisherReport& r) {
  nlohmann::json j;
  j["name"] = "fisher";
  j["parameters"] = {{"n", r.options.n},           {"dim", r.options.dim},
                     {"active_dims", r.options.active_dims}, {"eta", r.options.eta},
                     {"epsilon", r.options.epsilon}, {"seed", r.options.seed}};
  nlohmann::json per_coord = nlohmann::json::array();
  std::size_t gap_idx = 0;
  for (std::size_t jj = 0; jj < r.g_over_n.size(); ++jj) {
    nlohmann::json row = {{"coordinate", jj},
                          {"g_over_n", r.g_over_n[jj]},
                          {"h_over_n", r.h_over_n[jj]}};
    if (std::max(r.g_over_n[jj], r.h_over_n[jj]) > 0.0)
      row["rel_gap"] = r.rel_gap[gap_idx++];
    else
      row["rel_gap"] = nullptr;
    per_coord.push_back(std::move(row));
  }
  j["per_coordinate"] = std::move(per_coord);
  j["aggregates"] = {{"median_rel_gap", r.median_rel_gap},
                     {"zero_info", r.zero_info},
                     {"inactive_coords_clean", r.inactive_coords_clean}};
  return j;
}

inline std::string fisher_csv(const FisherReport& r) {
  std::string out = "coordinate,g_over_n,h_over_n,rel_gap\n";
  std::size_t gap_idx = 0;
  for (std::size_t jj = 0; jj < r.g_over_n.size(); ++jj) {
    out += std::to_string(jj) + "," + detail::csv_num(r.g_over_n[jj]) + "," +
           detail::csv_num(r.h_over_n[jj]) + ",";
    if (std::max(r.g_over_n[jj], r.h_over_n[jj]) > 0.0)
      out += detail::csv_num(r.rel_gap[gap_idx++]);
    out += "\n";
  }
  out += "median_rel_gap," + detail::csv_num(r.median_rel_gap) + ",,\n";
  return out;
}

inline nlohmann::json fig1a_json(const Fig1aReport& r) {
  nlohmann::json j;
  j["name"] = "fig1a";
  j["parameters"] = {{"p_grid", r.options.p_grid}, {"sigma2_grid", r.options.sigma2_grid}};
  nlohmann::json cells = nlohmann::json::array();
  for (const Fig1aCell& c : r.cells)
    cells.push_back({{"p", c.p}, {"sigma2", c.sigma2}, {"exact", c.exact},
                     {"quadratic", c.quadratic}});
  j["cells"] = std::move(cells);
  return j;
}

inline std::string fig1a_csv(const Fig1aReport& r) {
  std::string out = "p,sigma2,exact,quadratic\n";
  for (const Fig1aCell& c : r.cells)
    out += detail::csv_num(c.p) + "," + detail::csv_num(c.sigma2) + "," +
           detail::csv_num(c.exact) + "," + detail::csv_num(c.quadratic) + "\n";
  return out;
}

}  // namespace dropreg
