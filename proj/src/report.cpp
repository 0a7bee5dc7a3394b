#include "ccs/report.hpp"

#include <cstdio>

#include "ccs/io.hpp"

namespace ccs {

namespace {

json nullable(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// One decimal; a rounded negative zero prints as 0.0.
std::string percent_cell(const std::optional<double>& v) {
  if (!v) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f", *v);
  std::string out(buf);
  if (out == "-0.0") out = "0.0";
  return out;
}

}  // namespace

json to_json(const VarianceEstimates& v) {
  json j;
  j["v_ht"] = v.ht.total;
  j["v_ht_1"] = v.ht.c1;
  j["v_ht_2"] = v.ht.c2;
  j["v_ht_3"] = v.ht.c3;
  const auto& yg = v.yg;
  j["v_yg"] = yg ? json(yg->total) : json(nullptr);
  j["v_yg_1"] = yg ? json(yg->c1) : json(nullptr);
  j["v_yg_2"] = yg ? json(yg->c2) : json(nullptr);
  j["v_yg_3"] = yg ? json(yg->c3) : json(nullptr);
  const auto& sp = v.simplified;
  j["v_simp1"] = sp ? json(sp->simp1) : json(nullptr);
  j["v_simp2"] = sp ? json(sp->simp2) : json(nullptr);
  j["v_simp3"] = sp ? json(sp->simp3) : json(nullptr);
  j["negative_ht"] = v.negative_ht;
  j["negative_yg"] = v.negative_yg;
  return j;
}

json to_json(const ExactVarianceReport& r) {
  json j;
  j["v_ccs"] = r.v_ccs;
  j["v1"] = r.v1;
  j["v2"] = r.v2;
  j["v3"] = r.v3;
  j["v_md"] = r.v_md;
  j["v_md_psu"] = r.v_md_psu;
  j["v_md_ssu"] = r.v_md_ssu;
  j["v_dm"] = r.v_dm;
  j["v_dm_psu"] = r.v_dm_psu;
  j["v_dm_ssu"] = r.v_dm_ssu;
  return j;
}

json spec_echo(const ExperimentSpec& spec) {
  json j;
  j["label"] = spec.label;
  j["target"] = spec.target == Target::kTotal ? "total" : "ratio";
  j["dm"] = spec.dm.describe();
  j["dd"] = spec.dd.describe();
  j["reps"] = spec.reps;
  j["truth"] = spec.truth == TruthMode::kExact ? "exact" : "mc";
  j["truth_reps"] = spec.truth_reps;
  j["seed"] = spec.seed;
  j["ci_level"] = nullable(spec.ci_level);
  return j;
}

json to_json(const SimulationSummary& s, const json& echo, bool include_timing) {
  json j;
  j["spec_echo"] = echo;
  j["parameter"] = s.parameter;
  j["mean_estimate"] = s.mean_estimate;
  json rb, rb_se, means;
  for (std::size_t e = 0; e < kEstimatorCount; ++e) {
    rb[kEstimatorNames[e]] = nullable(s.rb_mc[e]);
    rb_se[kEstimatorNames[e]] = nullable(s.rb_mc_se[e]);
    means[kEstimatorNames[e]] = nullable(s.mean_variance[e]);
  }
  j["rb_mc"] = rb;
  j["rb_mc_se"] = rb_se;
  j["mean_variance"] = means;
  j["neg_count"] = {{"v_ht", s.neg_v_ht}, {"v_yg", s.neg_v_yg}};
  j["true_variance"] = s.true_variance;
  j["true_variance_se"] = s.true_variance_se;
  j["coverage"] = nullable(s.coverage);
  j["skipped"] = s.skipped;
  j["truth_skipped"] = s.truth_skipped;
  if (include_timing) j["elapsed_ms"] = s.elapsed_ms;
  return j;
}

std::string csv_number(const std::optional<double>& v) { return v ? format_real(*v) : "NA"; }

std::string csv_line(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    if (c) out += ',';
    const std::string& cell = cells[c];
    if (cell.find_first_of(",\"\n") != std::string::npos) {
      out += '"';
      for (char ch : cell) {
        if (ch == '"') out += '"';
        out += ch;
      }
      out += '"';
    } else {
      out += cell;
    }
  }
  return out;
}

std::vector<std::string> variance_csv_header() {
  return {"v_ht",    "v_ht_1",  "v_ht_2",  "v_ht_3",  "v_yg",        "v_yg_1",     "v_yg_2",
          "v_yg_3",  "v_simp1", "v_simp2", "v_simp3", "negative_ht", "negative_yg"};
}

std::vector<std::string> variance_csv_row(const VarianceEstimates& v) {
  auto opt = [](bool has, double value) { return has ? std::optional(value) : std::nullopt; };
  const bool yg = v.yg.has_value();
  const bool sp = v.simplified.has_value();
  return {format_real(v.ht.total),
          format_real(v.ht.c1),
          format_real(v.ht.c2),
          format_real(v.ht.c3),
          csv_number(opt(yg, yg ? v.yg->total : 0.0)),
          csv_number(opt(yg, yg ? v.yg->c1 : 0.0)),
          csv_number(opt(yg, yg ? v.yg->c2 : 0.0)),
          csv_number(opt(yg, yg ? v.yg->c3 : 0.0)),
          csv_number(opt(sp, sp ? v.simplified->simp1 : 0.0)),
          csv_number(opt(sp, sp ? v.simplified->simp2 : 0.0)),
          csv_number(opt(sp, sp ? v.simplified->simp3 : 0.0)),
          v.negative_ht ? "true" : "false",
          v.negative_yg ? "true" : "false"};
}

std::vector<std::string> table_csv_header() {
  std::vector<std::string> h{"label", "target", "dm", "dd", "reps", "seed"};
  for (const char* name : kEstimatorNames) h.push_back(std::string("rb_") + name);
  h.insert(h.end(), {"neg_v_ht", "neg_v_yg", "true_variance", "true_variance_se", "coverage",
                     "skipped", "status"});
  return h;
}

std::vector<std::string> table_csv_row(const TableRow& row) {
  const ExperimentSpec& spec = row.spec;
  std::vector<std::string> r{spec.label,
                             spec.target == Target::kTotal ? "total" : "ratio",
                             spec.dm.describe(),
                             spec.dd.describe(),
                             std::to_string(spec.reps),
                             std::to_string(spec.seed)};
  if (!row.summary) {
    for (std::size_t c = 0; c < kEstimatorCount + 6; ++c) r.push_back("NA");
    r.push_back("error: " + row.error);
    return r;
  }
  const SimulationSummary& s = *row.summary;
  for (std::size_t e = 0; e < kEstimatorCount; ++e) r.push_back(percent_cell(s.rb_mc[e]));
  r.push_back(std::to_string(s.neg_v_ht));
  r.push_back(std::to_string(s.neg_v_yg));
  r.push_back(format_real(s.true_variance));
  r.push_back(format_real(s.true_variance_se));
  r.push_back(csv_number(s.coverage));
  r.push_back(std::to_string(s.skipped));
  r.push_back("ok");
  return r;
}

}  // namespace ccs
