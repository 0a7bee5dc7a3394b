#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ccs/design.hpp"
#include "ccs/exact_variance.hpp"
#include "ccs/ht_estimation.hpp"
#include "ccs/io.hpp"
#include "ccs/model_bias.hpp"
#include "ccs/montecarlo.hpp"
#include "ccs/population_model.hpp"
#include "ccs/report.hpp"
#include "ccs/variance_estimation.hpp"

namespace fs = std::filesystem;
using ccs::json;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitValidation = 2;
constexpr int kExitSkipped = 3;

// Bad input from the user; reported with exit code 2.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GlobalOptions {
  std::uint64_t seed = 1;
  std::string format = "json";
  std::string out;
  unsigned threads = 0;
};

void emit(const GlobalOptions& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(g.out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + g.out + "' for writing");
  f << text;
  if (!f) throw std::runtime_error("write failed for '" + g.out + "'");
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// Variables used by a command: a single population file, or named entries of a
// manifest.
struct PopulationSource {
  std::string pop;
  std::string manifest;
  std::string y_name = "y";
  std::string x_name = "x";

  void add_options(CLI::App* cmd) {
    cmd->add_option("--pop", pop, "Population file");
    cmd->add_option("--manifest", manifest, "Manifest JSON grouping variable files");
    cmd->add_option("--y", y_name, "Manifest variable used as Y")->capture_default_str();
    cmd->add_option("--x", x_name, "Manifest variable used as X (ratio target)")
        ->capture_default_str();
  }

  std::shared_ptr<const ccs::PopulationGrid> load(const std::string& name, bool required) const {
    if (pop.empty() == manifest.empty()) {
      throw ValidationError("give exactly one of --pop or --manifest");
    }
    if (!pop.empty()) {
      if (name != y_name) {
        if (required) throw ValidationError("a ratio target needs --manifest with two variables");
        return nullptr;
      }
      return std::make_shared<const ccs::PopulationGrid>(ccs::read_population(fs::path(pop)));
    }
    for (const auto& e : ccs::read_manifest(manifest)) {
      if (e.name == name) return std::make_shared<const ccs::PopulationGrid>(ccs::read_population(e.path));
    }
    if (required) throw ValidationError("manifest '" + manifest + "' has no variable '" + name + "'");
    return nullptr;
  }

  json echo() const {
    json j;
    j["pop"] = pop.empty() ? json(nullptr) : json(fs::absolute(pop).string());
    j["manifest"] = manifest.empty() ? json(nullptr) : json(fs::absolute(manifest).string());
    j["y"] = y_name;
    j["x"] = x_name;
    return j;
  }

  void from_echo(const json& j) {
    pop = j.value("pop", json(nullptr)).is_null() ? "" : j["pop"].get<std::string>();
    manifest = j.value("manifest", json(nullptr)).is_null() ? "" : j["manifest"].get<std::string>();
    y_name = j.value("y", std::string("y"));
    x_name = j.value("x", std::string("x"));
  }
};

ccs::Design parse_dimension(const std::string& text, std::size_t n, const char* flag) {
  try {
    return ccs::parse_design(text, n);
  } catch (const ccs::DesignParseError& e) {
    throw ValidationError(std::string(flag) + " \"" + text + "\": " + e.what());
  }
}

std::vector<std::size_t> parse_index_list(const std::string& text, std::size_t n, const char* flag) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(cell, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != cell.size() || v == 0 || v > n) {
      throw ValidationError(std::string(flag) + ": '" + cell + "' is not an index in 1.." +
                            std::to_string(n));
    }
    out.push_back(static_cast<std::size_t>(v - 1));
  }
  std::sort(out.begin(), out.end());
  if (std::adjacent_find(out.begin(), out.end()) != out.end()) {
    throw ValidationError(std::string(flag) + ": duplicate index");
  }
  return out;
}

std::vector<std::size_t> one_based(const std::vector<std::size_t>& v) {
  std::vector<std::size_t> out(v);
  for (auto& i : out) ++i;
  return out;
}

// "5x5,10x100" lists pairs; "5,10,100" means every pair of the listed sizes.
std::vector<std::pair<std::size_t, std::size_t>> parse_sizes(const std::string& text) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<std::size_t> singles;
  std::stringstream ss(text);
  std::string cell;
  auto number = [&](const std::string& s) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(s, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != s.size() || v == 0) throw ValidationError("--sizes: bad size '" + s + "'");
    return static_cast<std::size_t>(v);
  };
  while (std::getline(ss, cell, ',')) {
    const auto x = cell.find('x');
    if (x == std::string::npos) {
      singles.push_back(number(cell));
    } else {
      pairs.emplace_back(number(cell.substr(0, x)), number(cell.substr(x + 1)));
    }
  }
  if (!pairs.empty() && !singles.empty()) throw ValidationError("--sizes: mix of pairs and sizes");
  for (std::size_t a : singles)
    for (std::size_t b : singles) pairs.emplace_back(a, b);
  if (pairs.empty()) throw ValidationError("--sizes: empty list");
  return pairs;
}

ccs::ModelParams model_params(double mu, double sm, double sd, double se, std::size_t nm,
                              std::size_t nd, std::uint64_t seed) {
  ccs::ModelParams p;
  p.mu = mu;
  p.sigma_m = sm;
  p.sigma_d = sd;
  p.sigma_e = se;
  p.n_rows = nm;
  p.n_cols = nd;
  p.seed = seed;
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
  return p;
}

json model_echo(const ccs::ModelParams& p) {
  return {{"mu", p.mu},           {"sigma_m", p.sigma_m}, {"sigma_d", p.sigma_d},
          {"sigma_e", p.sigma_e}, {"nm", p.n_rows},       {"nd", p.n_cols},
          {"seed", p.seed}};
}

// ---- gen-pop ---------------------------------------------------------------

struct GenPopOptions {
  std::size_t nm = 1000, nd = 1000;
  double mu = 200, sigma_m = 5, sigma_d = 5, sigma_e = 5;
  bool count_pair = false;
  std::optional<double> p;
  std::optional<double> logit_target;
};

int run_gen_pop(const GlobalOptions& g, const GenPopOptions& o) {
  if (g.out.empty()) throw ValidationError("gen-pop needs --out");
  const auto params = model_params(o.mu, o.sigma_m, o.sigma_d, o.sigma_e, o.nm, o.nd, g.seed);
  json report;
  report["command"] = "gen-pop";
  report["model"] = model_echo(params);
  if (!o.count_pair) {
    if (o.p || o.logit_target) throw ValidationError("--p and --logit-target need --count-pair");
    ccs::write_population(fs::path(g.out), ccs::generate_grid(params));
    report["files"] = {g.out};
  } else {
    if (o.p.has_value() == o.logit_target.has_value()) {
      throw ValidationError("--count-pair needs exactly one of --p or --logit-target");
    }
    ccs::ProbabilityMode mode;
    if (o.p) {
      if (!(*o.p > 0.0 && *o.p <= 1.0)) throw ValidationError("--p must lie in (0, 1]");
      mode = ccs::ConstantProbability{*o.p};
    } else {
      if (!(*o.logit_target > 0.0 && *o.logit_target < 1.0)) {
        throw ValidationError("--logit-target must lie in (0, 1)");
      }
      mode = ccs::LogitProbability{*o.logit_target};
    }
    const auto pair = ccs::generate_count_pair(params, mode);
    const fs::path x_path = g.out + ".x.csv", y_path = g.out + ".y.csv";
    const fs::path manifest = g.out + ".manifest.json";
    ccs::write_population(x_path, pair.x);
    ccs::write_population(y_path, pair.y);
    ccs::write_manifest(manifest, {{"x", x_path.filename()}, {"y", y_path.filename()}});
    report["files"] = {x_path.string(), y_path.string(), manifest.string()};
    report["probability"] = o.p ? json{{"mode", "constant"}, {"p", *o.p}}
                                : json{{"mode", "logit"},
                                       {"target", *o.logit_target},
                                       {"beta", pair.beta}};
    report["mean_probability"] = pair.mean_probability;
  }
  std::cout << dump(report);
  return 0;
}

// ---- estimate --------------------------------------------------------------

struct EstimateOptions {
  PopulationSource source;
  std::string target = "total";
  std::string dm, dd;
  std::string rows, cols;
};

int run_estimate(const GlobalOptions& g, const EstimateOptions& o) {
  const bool ratio = o.target == "ratio";
  const auto y = o.source.load(o.source.y_name, true);
  const auto x = ratio ? o.source.load(o.source.x_name, true) : nullptr;
  if (x && (x->n_rows() != y->n_rows() || x->n_cols() != y->n_cols())) {
    throw ValidationError("variables differ in shape");
  }
  const auto dm = parse_dimension(o.dm, y->n_rows(), "--dm");
  const auto dd = parse_dimension(o.dd, y->n_cols(), "--dd");

  ccs::CrossSample s;
  const bool drawn = o.rows.empty() && o.cols.empty();
  if (drawn) {
    ccs::RandomStream stream(g.seed, ccs::StreamFamily::kSingleSample, 0);
    s = ccs::draw_cross_sample(dm, dd, stream);
  } else {
    if (o.rows.empty() || o.cols.empty()) throw ValidationError("give both --rows and --cols");
    s = {parse_index_list(o.rows, y->n_rows(), "--rows"), parse_index_list(o.cols, y->n_cols(), "--cols")};
    try {
      s.validate(dm, dd);
    } catch (const std::exception& e) {
      throw ValidationError(e.what());
    }
  }

  json out;
  json config = o.source.echo();
  config["command"] = "estimate";
  config["target"] = o.target;
  config["dm"] = dm.describe();
  config["dd"] = dd.describe();
  config["seed"] = g.seed;
  config["sample_source"] = drawn ? "drawn" : "given";
  out["config"] = config;
  out["sample"] = {{"rows", one_based(s.rows)}, {"cols", one_based(s.cols)}};

  ccs::VarianceEstimates v;
  double estimate = 0.0;
  const ccs::Grid sampled = y->values.restricted(s.rows, s.cols);
  if (ratio) {
    const auto r = ccs::ht_ratio_sampled(sampled, x->values.restricted(s.rows, s.cols), dm, dd, s);
    estimate = r.ratio;
    v = ccs::estimate_variances(r.linearized, dm, dd, s);
    out["total_y"] = r.total_y;
    out["total_x"] = r.total_x;
  } else {
    const auto e = ccs::ht_total_sampled(sampled, dm, dd, s);
    estimate = e.total;
    out["degenerate"] = e.degenerate;
  }
  if (!ratio) v = ccs::estimate_variances(sampled, dm, dd, s);
  out["estimate"] = estimate;
  out["variance"] = ccs::to_json(v);

  if (g.format == "csv") {
    std::vector<std::string> header{"estimate"};
    const auto h = ccs::variance_csv_header();
    header.insert(header.end(), h.begin(), h.end());
    std::vector<std::string> row{ccs::format_real(estimate)};
    const auto r = ccs::variance_csv_row(v);
    row.insert(row.end(), r.begin(), r.end());
    emit(g, "# " + config.dump() + "\n" + ccs::csv_line(header) + "\n" + ccs::csv_line(row) + "\n");
  } else {
    emit(g, dump(out));
  }
  return 0;
}

// ---- exact-variance ---------------------------------------------------------

struct ExactOptions {
  PopulationSource source;
  std::string dm, dd;
};

int run_exact(const GlobalOptions& g, const ExactOptions& o) {
  const auto y = o.source.load(o.source.y_name, true);
  const auto dm = parse_dimension(o.dm, y->n_rows(), "--dm");
  const auto dd = parse_dimension(o.dd, y->n_cols(), "--dd");
  const auto report = ccs::decompose(*y, dm, dd);
  const auto diff = ccs::ccs_vs_dm_difference(*y, dm, dd);

  json config = o.source.echo();
  config["command"] = "exact-variance";
  config["dm"] = dm.describe();
  config["dd"] = dd.describe();
  json values = ccs::to_json(report);
  values["t_y"] = y->total();
  values["ccs_minus_dm"] = diff.ccs_minus_dm;
  values["ccs_minus_dm_pairwise"] =
      diff.fixed_size_form ? json(*diff.fixed_size_form) : json(nullptr);

  if (g.format == "csv") {
    std::string text = "# " + config.dump() + "\nquantity,value\n";
    for (const auto& [k, v] : values.items()) {
      text += k + "," + (v.is_null() ? std::string("NA") : ccs::format_real(v.get<double>())) + "\n";
    }
    emit(g, text);
  } else {
    emit(g, dump({{"config", config}, {"variances", values}}));
  }
  return 0;
}

// ---- compare-designs --------------------------------------------------------

struct CompareOptions {
  PopulationSource source;
  std::string sizes = "5,10,100,500";
};

int run_compare(const GlobalOptions& g, const CompareOptions& o) {
  const auto y = o.source.load(o.source.y_name, true);
  const auto pairs = parse_sizes(o.sizes);
  for (const auto& [a, b] : pairs) {
    if (a > y->n_rows() || b > y->n_cols()) {
      throw ValidationError("--sizes: " + std::to_string(a) + "x" + std::to_string(b) +
                            " exceeds the population " + std::to_string(y->n_rows()) + "x" +
                            std::to_string(y->n_cols()));
    }
  }
  const auto rows = ccs::variance_ratio_sweep(*y, pairs);
  json config = o.source.echo();
  config["command"] = "compare-designs";
  config["sizes"] = o.sizes;
  if (g.format == "csv") {
    std::string text = "# " + config.dump() + "\n" +
                       ccs::csv_line({"n_m", "n_d", "v_ccs", "v_md", "ratio_pct"}) + "\n";
    for (const auto& r : rows) {
      text += ccs::csv_line({std::to_string(r.n_m), std::to_string(r.n_d), ccs::format_real(r.v_ccs),
                             ccs::format_real(r.v_md), ccs::csv_number(r.ratio_pct)}) +
              "\n";
    }
    emit(g, text);
  } else {
    json arr = json::array();
    for (const auto& r : rows) {
      arr.push_back({{"n_m", r.n_m},
                     {"n_d", r.n_d},
                     {"v_ccs", r.v_ccs},
                     {"v_md", r.v_md},
                     {"ratio_pct", r.ratio_pct ? json(*r.ratio_pct) : json(nullptr)}});
    }
    emit(g, dump({{"config", config}, {"rows", arr}}));
  }
  return 0;
}

// ---- simulate ---------------------------------------------------------------

struct SimulateOptions {
  PopulationSource source;
  std::string target = "total";
  std::string dm, dd;
  std::string sizes;
  std::size_t reps = 10'000;
  std::size_t truth_reps = 50'000;
  std::string truth = "mc";
  std::optional<double> ci_level;
  std::size_t max_skipped = 0;
  bool no_timing = false;
  std::string config;
};

json simulate_echo(const SimulateOptions& o, std::uint64_t seed) {
  json j = o.source.echo();
  j["command"] = "simulate";
  j["target"] = o.target;
  j["dm"] = o.dm.empty() ? json(nullptr) : json(o.dm);
  j["dd"] = o.dd.empty() ? json(nullptr) : json(o.dd);
  j["sizes"] = o.sizes.empty() ? json(nullptr) : json(o.sizes);
  j["reps"] = o.reps;
  j["truth"] = o.truth;
  j["truth_reps"] = o.truth_reps;
  j["seed"] = seed;
  j["ci_level"] = o.ci_level ? json(*o.ci_level) : json(nullptr);
  j["max_skipped"] = o.max_skipped;
  return j;
}

// Restores the experiment flags from an earlier output. A summary embeds them
// under "spec_echo", a table under "config".
void load_config(SimulateOptions& o, GlobalOptions& g) {
  std::ifstream in(o.config);
  if (!in) throw ValidationError("cannot open --config '" + o.config + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError("--config: " + std::string(e.what()));
  }
  const json* c = nullptr;
  if (j.contains("spec_echo")) c = &j["spec_echo"];
  else if (j.contains("config")) c = &j["config"];
  if (!c || c->value("command", std::string()) != "simulate") {
    throw ValidationError("--config: no embedded simulate configuration");
  }
  o.source.from_echo(*c);
  o.target = c->at("target").get<std::string>();
  o.dm = c->at("dm").is_null() ? "" : c->at("dm").get<std::string>();
  o.dd = c->at("dd").is_null() ? "" : c->at("dd").get<std::string>();
  o.sizes = c->at("sizes").is_null() ? "" : c->at("sizes").get<std::string>();
  o.reps = c->at("reps").get<std::size_t>();
  o.truth = c->at("truth").get<std::string>();
  o.truth_reps = c->at("truth_reps").get<std::size_t>();
  g.seed = c->at("seed").get<std::uint64_t>();
  o.ci_level = c->at("ci_level").is_null() ? std::nullopt
                                           : std::optional(c->at("ci_level").get<double>());
  o.max_skipped = c->value("max_skipped", std::size_t{0});
}

int run_simulate(GlobalOptions g, SimulateOptions o) {
  if (!o.config.empty()) load_config(o, g);
  if (o.target != "total" && o.target != "ratio") throw ValidationError("--target must be total or ratio");
  if (o.truth != "mc" && o.truth != "exact") throw ValidationError("--truth must be mc or exact");
  const bool table = !o.sizes.empty();
  if (table == (!o.dm.empty() || !o.dd.empty())) {
    throw ValidationError("give either --dm and --dd, or --sizes");
  }
  if (!table && (o.dm.empty() || o.dd.empty())) throw ValidationError("give both --dm and --dd");

  const bool ratio = o.target == "ratio";
  ccs::ExperimentSpec base;
  base.y = o.source.load(o.source.y_name, true);
  if (ratio) base.x = o.source.load(o.source.x_name, true);
  base.target = ratio ? ccs::Target::kRatio : ccs::Target::kTotal;
  base.reps = o.reps;
  base.truth_reps = o.truth_reps;
  base.truth = o.truth == "exact" ? ccs::TruthMode::kExact : ccs::TruthMode::kMonteCarlo;
  base.seed = g.seed;
  base.ci_level = o.ci_level;

  std::vector<ccs::ExperimentSpec> specs;
  if (table) {
    for (const auto& [a, b] : parse_sizes(o.sizes)) {
      ccs::ExperimentSpec spec = base;
      const std::string dm = "si(n=" + std::to_string(a) + ")", dd = "si(n=" + std::to_string(b) + ")";
      spec.dm = parse_dimension(dm, base.y->n_rows(), "--sizes");
      spec.dd = parse_dimension(dd, base.y->n_cols(), "--sizes");
      spec.label = std::to_string(a) + "x" + std::to_string(b);
      specs.push_back(std::move(spec));
    }
  } else {
    base.dm = parse_dimension(o.dm, base.y->n_rows(), "--dm");
    base.dd = parse_dimension(o.dd, base.y->n_cols(), "--dd");
    base.label = o.dm + " x " + o.dd;
    try {
      base.validate();
    } catch (const std::invalid_argument& e) {
      throw ValidationError(e.what());
    }
    specs.push_back(base);
  }

  const json config = simulate_echo(o, g.seed);
  // A single run embeds the resolved flags together with the spec; table rows
  // only echo their cell, the flags sit once under "config".
  auto echo_for = [&](const ccs::ExperimentSpec& spec) {
    json e = config;
    const json cell = ccs::spec_echo(spec);
    for (const auto& [k, v] : cell.items()) e[k] = v;
    return e;
  };

  const ccs::RunOptions run{g.threads};
  const auto rows = ccs::run_table(specs, run);
  bool failed = false;
  std::size_t skipped = 0;
  for (const auto& r : rows) {
    if (!r.summary) {
      failed = true;
      std::cerr << "error: cell " << r.spec.label << ": " << r.error << "\n";
    } else {
      skipped += r.summary->skipped;
    }
  }

  if (g.format == "csv") {
    std::string text = "# " + config.dump() + "\n" + ccs::csv_line(ccs::table_csv_header()) + "\n";
    for (const auto& r : rows) text += ccs::csv_line(ccs::table_csv_row(r)) + "\n";
    emit(g, text);
  } else if (!table) {
    if (rows[0].summary) emit(g, dump(ccs::to_json(*rows[0].summary, echo_for(specs[0]), !o.no_timing)));
  } else {
    json arr = json::array();
    for (const auto& r : rows) {
      if (r.summary) {
        arr.push_back(ccs::to_json(*r.summary, ccs::spec_echo(r.spec), !o.no_timing));
      } else {
        arr.push_back({{"spec_echo", ccs::spec_echo(r.spec)}, {"error", r.error}});
      }
    }
    emit(g, dump({{"config", config}, {"rows", arr}}));
  }

  if (!table && failed) throw std::runtime_error(rows[0].error);
  if (failed) return kExitRuntime;
  if (skipped > o.max_skipped) {
    std::cerr << "error: " << skipped << " replications skipped (tolerance " << o.max_skipped << ")\n";
    return kExitSkipped;
  }
  return 0;
}

// ---- model-bias -------------------------------------------------------------

struct BiasOptions {
  std::optional<double> rm, rd, sigma_m, sigma_d, sigma_e;
  std::size_t nm = 5, big_nm = 1000, nd = 5, big_nd = 1000;
};

int run_model_bias(const GlobalOptions& g, const BiasOptions& o) {
  const bool ratios = o.rm || o.rd;
  const bool sigmas = o.sigma_m || o.sigma_d || o.sigma_e;
  if (ratios == sigmas) throw ValidationError("give --rm and --rd, or --sigma-m, --sigma-d and --sigma-e");
  ccs::BiasInputs in;
  try {
    if (ratios) {
      if (!o.rm || !o.rd) throw ValidationError("give both --rm and --rd");
      in = {*o.rm, *o.rd, o.nm, o.big_nm, o.nd, o.big_nd};
    } else {
      if (!o.sigma_m || !o.sigma_d || !o.sigma_e) throw ValidationError("give all three --sigma-* flags");
      in = ccs::BiasInputs::from_sigmas(*o.sigma_m, *o.sigma_d, *o.sigma_e, o.nm, o.big_nm, o.nd, o.big_nd);
    }
    in.validate();
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
  ccs::ClosedFormBias b;
  try {
    b = ccs::closed_form_rb(in);
  } catch (const std::domain_error& e) {
    throw ValidationError(e.what());
  }
  json j;
  j["config"] = {{"command", "model-bias"}, {"rm", in.r_m},     {"rd", in.r_d},
                 {"nm", in.n_m},             {"NM", in.big_n_m}, {"nd", in.n_d},
                 {"ND", in.big_n_d}};
  j["a1"] = b.a1;
  j["a2"] = b.a2;
  j["a3"] = b.a3;
  j["rb1"] = b.rb1;
  j["rb2"] = b.rb2;
  j["rb3"] = b.rb3;
  if (g.format == "csv") {
    std::string text = "# " + j["config"].dump() + "\n" +
                       ccs::csv_line({"a1", "a2", "a3", "rb1", "rb2", "rb3"}) + "\n" +
                       ccs::csv_line({ccs::format_real(b.a1), ccs::format_real(b.a2),
                                      ccs::format_real(b.a3), ccs::format_real(b.rb1),
                                      ccs::format_real(b.rb2), ccs::format_real(b.rb3)}) +
                       "\n";
    emit(g, text);
  } else {
    emit(g, dump(j));
  }
  return 0;
}

// ---- elfe-scenario ----------------------------------------------------------

constexpr const char* kMaternityStrata = "stsi(108:21,108:41,109:55,108:80,111:90)";
constexpr const char* kDayStrata = "stsi(91:4,91:6,91:7,92:8)";
constexpr std::size_t kMaternities = 544;
constexpr std::size_t kDays = 365;

struct ElfeOptions {
  double mu = 200, sigma_m = 5, sigma_d = 5, sigma_e = 5;
};

int run_elfe(const GlobalOptions& g, const ElfeOptions& o) {
  const auto params = model_params(o.mu, o.sigma_m, o.sigma_d, o.sigma_e, kMaternities, kDays, g.seed);
  const auto y = ccs::generate_grid(params);
  const auto dm = ccs::parse_design(kMaternityStrata, kMaternities);
  const auto dd = ccs::parse_design(kDayStrata, kDays);
  ccs::RandomStream stream(g.seed, ccs::StreamFamily::kSingleSample, 0);
  const auto s = ccs::draw_cross_sample(dm, dd, stream);
  const auto sampled = y.values.restricted(s.rows, s.cols);
  const double estimate = ccs::ht_total_sampled(sampled, dm, dd, s).total;
  const auto v = ccs::estimate_variances(sampled, dm, dd, s);

  auto rd = [&](double simp) {
    return v.ht.total != 0.0 ? std::optional((simp - v.ht.total) / v.ht.total) : std::nullopt;
  };
  const auto& sp = *v.simplified;
  const std::optional<double> rd1 = rd(sp.simp1), rd2 = rd(sp.simp2), rd3 = rd(sp.simp3);

  json config;
  config["command"] = "elfe-scenario";
  config["model"] = model_echo(params);
  config["dm"] = kMaternityStrata;
  config["dd"] = kDayStrata;
  config["sampled_maternities"] = s.rows.size();
  config["sampled_days"] = s.cols.size();
  auto nullable = [](const std::optional<double>& x) { return x ? json(*x) : json(nullptr); };
  if (g.format == "csv") {
    std::vector<std::string> header{"t_y", "estimate"};
    const auto h = ccs::variance_csv_header();
    header.insert(header.end(), h.begin(), h.end());
    header.insert(header.end(), {"rd_simp1", "rd_simp2", "rd_simp3"});
    std::vector<std::string> row{ccs::format_real(y.total()), ccs::format_real(estimate)};
    const auto r = ccs::variance_csv_row(v);
    row.insert(row.end(), r.begin(), r.end());
    row.insert(row.end(), {ccs::csv_number(rd1), ccs::csv_number(rd2), ccs::csv_number(rd3)});
    emit(g, "# " + config.dump() + "\n" + ccs::csv_line(header) + "\n" + ccs::csv_line(row) + "\n");
  } else {
    json j;
    j["config"] = config;
    j["t_y"] = y.total();
    j["estimate"] = estimate;
    j["variance"] = ccs::to_json(v);
    j["rd"] = {{"v_simp1", nullable(rd1)}, {"v_simp2", nullable(rd2)}, {"v_simp3", nullable(rd3)}};
    emit(g, dump(j));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Estimation under cross-classified sampling"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalOptions g;
  app.add_option("--seed", g.seed, "Master seed")->capture_default_str();
  app.add_option("--format", g.format, "Output format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  app.add_option("--out", g.out, "Output file (default: standard output)");
  app.add_option("--threads", g.threads, "Worker threads (0 = all cores)")->capture_default_str();

  GenPopOptions gen;
  auto* gen_cmd = app.add_subcommand("gen-pop", "Generate a population from the random-effects model");
  gen_cmd->add_option("--nm", gen.nm, "Rows (maternities)")->capture_default_str();
  gen_cmd->add_option("--nd", gen.nd, "Columns (days)")->capture_default_str();
  gen_cmd->add_option("--mu", gen.mu)->capture_default_str();
  gen_cmd->add_option("--sigma-m", gen.sigma_m)->capture_default_str();
  gen_cmd->add_option("--sigma-d", gen.sigma_d)->capture_default_str();
  gen_cmd->add_option("--sigma-e", gen.sigma_e)->capture_default_str();
  gen_cmd->add_flag("--count-pair", gen.count_pair, "Write X/Y count files and a manifest; --out is a prefix");
  gen_cmd->add_option("--p", gen.p, "Constant thinning probability");
  gen_cmd->add_option("--logit-target", gen.logit_target, "Mean probability for the logit model");

  EstimateOptions est;
  auto* est_cmd = app.add_subcommand("estimate", "Estimate from one cross sample");
  est.source.add_options(est_cmd);
  est_cmd->add_option("--target", est.target)->check(CLI::IsMember({"total", "ratio"}))->capture_default_str();
  est_cmd->add_option("--dm", est.dm, "Row design")->required();
  est_cmd->add_option("--dd", est.dd, "Column design")->required();
  est_cmd->add_option("--rows", est.rows, "Sampled rows, 1-based, comma-separated");
  est_cmd->add_option("--cols", est.cols, "Sampled columns, 1-based, comma-separated");

  ExactOptions ex;
  auto* ex_cmd = app.add_subcommand("exact-variance", "Exact variance components");
  ex.source.add_options(ex_cmd);
  ex_cmd->add_option("--dm", ex.dm, "Row design")->required();
  ex_cmd->add_option("--dd", ex.dd, "Column design")->required();

  CompareOptions cmp;
  auto* cmp_cmd = app.add_subcommand("compare-designs", "V_MD / V_CCS under SI x SI");
  cmp.source.add_options(cmp_cmd);
  cmp_cmd->add_option("--sizes", cmp.sizes, "Size pairs (5x10,...) or sizes crossed (5,10,...)")
      ->capture_default_str();

  SimulateOptions sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo relative biases");
  sim.source.add_options(sim_cmd);
  sim_cmd->add_option("--target", sim.target)->check(CLI::IsMember({"total", "ratio"}))->capture_default_str();
  sim_cmd->add_option("--dm", sim.dm, "Row design");
  sim_cmd->add_option("--dd", sim.dd, "Column design");
  sim_cmd->add_option("--sizes", sim.sizes, "SI x SI table: size pairs or sizes crossed");
  sim_cmd->add_option("--reps", sim.reps)->check(CLI::PositiveNumber)->capture_default_str();
  sim_cmd->add_option("--truth-reps", sim.truth_reps)->capture_default_str();
  sim_cmd->add_option("--truth", sim.truth)->check(CLI::IsMember({"mc", "exact"}))->capture_default_str();
  sim_cmd->add_option("--ci-level", sim.ci_level, "Normal interval level for coverage");
  sim_cmd->add_option("--max-skipped", sim.max_skipped, "Tolerated skipped replications")->capture_default_str();
  sim_cmd->add_flag("--no-timing", sim.no_timing, "Omit elapsed_ms");
  sim_cmd->add_option("--config", sim.config, "Re-run the configuration embedded in an earlier output");

  BiasOptions bias;
  auto* bias_cmd = app.add_subcommand("model-bias", "Closed-form model-design relative biases");
  bias_cmd->add_option("--rm", bias.rm, "sigma_M^2 / sigma_E^2");
  bias_cmd->add_option("--rd", bias.rd, "sigma_D^2 / sigma_E^2");
  bias_cmd->add_option("--sigma-m", bias.sigma_m);
  bias_cmd->add_option("--sigma-d", bias.sigma_d);
  bias_cmd->add_option("--sigma-e", bias.sigma_e);
  bias_cmd->add_option("--nm", bias.nm)->capture_default_str();
  bias_cmd->add_option("--NM", bias.big_nm)->capture_default_str();
  bias_cmd->add_option("--nd", bias.nd)->capture_default_str();
  bias_cmd->add_option("--ND", bias.big_nd)->capture_default_str();

  ElfeOptions elfe;
  auto* elfe_cmd = app.add_subcommand("elfe-scenario", "Stratified 544 x 365 scenario with RD report");
  elfe_cmd->add_option("--mu", elfe.mu)->capture_default_str();
  elfe_cmd->add_option("--sigma-m", elfe.sigma_m)->capture_default_str();
  elfe_cmd->add_option("--sigma-d", elfe.sigma_d)->capture_default_str();
  elfe_cmd->add_option("--sigma-e", elfe.sigma_e)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (gen_cmd->parsed()) return run_gen_pop(g, gen);
    if (est_cmd->parsed()) return run_estimate(g, est);
    if (ex_cmd->parsed()) return run_exact(g, ex);
    if (cmp_cmd->parsed()) return run_compare(g, cmp);
    if (sim_cmd->parsed()) return run_simulate(g, sim);
    if (bias_cmd->parsed()) return run_model_bias(g, bias);
    if (elfe_cmd->parsed()) return run_elfe(g, elfe);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitRuntime;
}
