#pragma once

#include <string>
#include <vector>

#include "ccs/exact_variance.hpp"
#include "ccs/montecarlo.hpp"
#include "ccs/variance_estimation.hpp"
#include "json.hpp"

namespace ccs {

using json = nlohmann::ordered_json;

// Flat variance-estimate report: v_ht, v_ht_1..3, v_yg, v_yg_1..3,
// v_simp1..3, negative_ht, negative_yg. Unavailable values are null.
json to_json(const VarianceEstimates& v);
json to_json(const ExactVarianceReport& r);
json spec_echo(const ExperimentSpec& spec);

// {spec_echo, rb_mc, rb_mc_se, neg_count, true_variance, true_variance_se,
//  coverage, skipped, elapsed_ms, ...}
json to_json(const SimulationSummary& s, const json& echo, bool include_timing = true);

std::vector<std::string> variance_csv_header();
std::vector<std::string> variance_csv_row(const VarianceEstimates& v);

// Table rows print RB_mc in percent with one decimal.
std::vector<std::string> table_csv_header();
std::vector<std::string> table_csv_row(const TableRow& row);

std::string csv_line(const std::vector<std::string>& cells);
std::string csv_number(const std::optional<double>& v);

}  // namespace ccs
