#include "fcmer/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "fcmer/data.hpp"
#include "fcmer/engine.hpp"
#include "fcmer/eval.hpp"
#include "fcmer/io_format.hpp"
#include "fcmer/tuning.hpp"

namespace fcmer {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Raised for flag combinations CLI11 cannot express; maps to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const CLI::Validator kVariantName(
    [](std::string& s) { return parse_variant(s) ? std::string() : "unknown variant '" + s + "' (see --list-variants)"; },
    "VARIANT");

const std::vector<std::string> kExperiments = {"config1", "config2", "config3", "config4", "outliers"};

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string fixed4(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(4) << v;
  return s.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  f << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    if (cell.size() >= 2 && cell.front() == '"' && cell.back() == '"') cell = cell.substr(1, cell.size() - 2);
    cells.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

// One column of a CSV, encoded by first appearance. Defaults to the last column.
std::vector<int> read_label_column(const fs::path& path, const std::optional<std::string>& column) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::string line;
  if (!std::getline(f, line)) throw Error(ErrorCode::ParseError, path.string() + ": missing header");
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  const auto header = split_row(line);
  std::size_t col = header.size() - 1;
  if (column) {
    const auto it = std::find(header.begin(), header.end(), *column);
    if (it == header.end()) throw Error(ErrorCode::UnknownLabelColumn, "no column '" + *column + "' in " + path.string());
    col = static_cast<std::size_t>(it - header.begin());
  }
  std::vector<std::string> seen;
  std::vector<int> labels;
  while (std::getline(f, line)) {
    if (line.empty() || line == "\r") continue;
    const auto cells = split_row(line);
    if (cells.size() != header.size())
      throw Error(ErrorCode::ParseError, path.string() + ": row " + std::to_string(labels.size() + 1) + " has " +
                                             std::to_string(cells.size()) + " fields");
    const auto it = std::find(seen.begin(), seen.end(), cells[col]);
    labels.push_back(static_cast<int>(it - seen.begin()));
    if (it == seen.end()) seen.push_back(cells[col]);
  }
  return labels;
}

std::vector<std::string> numbered(const std::string& prefix, Index count) {
  std::vector<std::string> names;
  for (Index i = 0; i < count; ++i) names.push_back(prefix + std::to_string(i));
  return names;
}

std::vector<std::string> feature_header(const Dataset& data) {
  return data.feature_names().empty() ? numbered("x", data.p()) : data.feature_names();
}

// Rows are (block, row, values...): block is the cluster for local parameters, 0 otherwise.
void write_metric_csv(const fs::path& path, const MetricState& metric, const std::vector<std::string>& features) {
  std::ostringstream s;
  s << "block,row";
  for (const auto& f : features) s << ',' << f;
  s << '\n';
  auto emit = [&](Index block, Index row, const auto& values) {
    s << block << ',' << row;
    for (Index j = 0; j < values.size(); ++j) s << ',' << format_number(values(j));
    s << '\n';
  };
  if (const auto* g = metric.get_if<GlobalCov<double>>()) {
    for (Index r = 0; r < g->m.rows(); ++r) emit(0, r, g->m.row(r));
  } else if (const auto* l = metric.get_if<LocalCov<double>>()) {
    for (std::size_t k = 0; k < l->ms.size(); ++k)
      for (Index r = 0; r < l->ms[k].rows(); ++r) emit(static_cast<Index>(k), r, l->ms[k].row(r));
  } else if (const auto* gw = metric.get_if<GlobalWeights<double>>()) {
    emit(0, 0, gw->v);
  } else if (const auto* lw = metric.get_if<LocalWeights<double>>()) {
    for (Index k = 0; k < lw->v.rows(); ++k) emit(k, 0, lw->v.row(k));
  }
  write_text(path, s.str());
}

std::string l1_solver_name(L1Solver s) { return s == L1Solver::Irls ? "irls" : "median"; }

L1Solver parse_l1_solver(const std::string& s) { return s == "irls" ? L1Solver::Irls : L1Solver::WeightedMedian; }

json spec_json(const AlgorithmSpec& spec) {
  json j = {{"variant", variant_cli_name(spec.variant)},
            {"clusters", spec.clusters},
            {"t_u", spec.t_u},
            {"max_iter", spec.max_iter},
            {"epsilon", spec.epsilon},
            {"seed", spec.seed},
            {"l1_solver", l1_solver_name(spec.l1_solver)}};
  j["t_v"] = spec.t_v ? json(*spec.t_v) : json(nullptr);
  return j;
}

AlgorithmSpec spec_from_json(const json& j) {
  AlgorithmSpec spec;
  const auto v = parse_variant(j.at("variant").get<std::string>());
  if (!v) throw Error(ErrorCode::ParseError, "manifest names an unknown variant");
  spec.variant = *v;
  spec.clusters = j.at("clusters").get<int>();
  spec.t_u = j.at("t_u").get<double>();
  if (!j.at("t_v").is_null()) spec.t_v = j.at("t_v").get<double>();
  spec.max_iter = j.at("max_iter").get<int>();
  spec.epsilon = j.at("epsilon").get<double>();
  spec.seed = j.at("seed").get<std::uint64_t>();
  spec.l1_solver = parse_l1_solver(j.at("l1_solver").get<std::string>());
  return spec;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (used != item.size() || !(v > 0.0)) throw std::invalid_argument(item);
      grid.push_back(v);
    } catch (const std::exception&) {
      throw UsageError("--tv-grid: '" + item + "' is not a positive number");
    }
  }
  return grid;
}

std::vector<Variant> parse_variant_list(const std::string& text) {
  if (text == "all") return {kAllVariants.begin(), kAllVariants.end()};
  std::vector<Variant> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto v = parse_variant(item);
    if (!v) throw UsageError("unknown variant '" + item + "' (see --list-variants)");
    out.push_back(*v);
  }
  if (out.empty()) throw UsageError("--variants is empty");
  return out;
}

// Flags shared by the sweep-driven commands.
struct SweepFlags {
  double tu_min = 0.01;
  double tu_max = 100.0;
  double tu_step = 0.01;
  std::string tv_grid;
  double threshold = 0.1;
  int restarts_per_candidate = 1;
  std::string search = "exact";

  void attach(CLI::App* app) {
    app->add_option("--tu-min", tu_min, "Smallest T_u of the sweep")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--tu-max", tu_max, "Largest T_u of the sweep")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--tu-step", tu_step, "Sweep step")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--tv-grid", tv_grid, "Comma-separated T_v candidates for sum-constrained variants");
    app->add_option("--threshold", threshold, "Minimum centroid distance threshold")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_option("--restarts-per-candidate", restarts_per_candidate, "Fits per sweep candidate")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_option("--search", search, "Sweep strategy")->check(CLI::IsMember({"exact", "bisect"}))->capture_default_str();
  }

  SweepConfig config() const {
    SweepConfig cfg;
    cfg.tu_min = tu_min;
    cfg.tu_max = tu_max;
    cfg.tu_step = tu_step;
    if (!tv_grid.empty()) cfg.tv_grid = parse_grid(tv_grid);
    cfg.min_centroid_threshold = threshold;
    cfg.restarts_per_candidate = restarts_per_candidate;
    cfg.search = search == "bisect" ? SweepSearch::Bisect : SweepSearch::Exact;
    if (!(cfg.tu_min < cfg.tu_max)) throw UsageError("--tu-min must be below --tu-max");
    return cfg;
  }
};

struct Tuned {
  double t_u;
  std::optional<double> t_v;
  bool crossed;
  std::vector<SweepPoint> curve;
};

Tuned tune(AlgorithmSpec spec, const Dataset& data, SweepConfig cfg, std::optional<double> fixed_tv) {
  if (describe(spec.variant).uses_tv && !fixed_tv) {
    if (cfg.tv_grid.empty()) cfg.tv_grid = default_tv_grid();
    const TuTvSelection sel = select_tu_tv(spec, data, cfg);
    bool crossed = false;
    for (const auto& c : sel.candidates)
      if (c.t_v == sel.t_v && c.t_u == sel.t_u) crossed = c.crossed;
    spec.t_v = sel.t_v;
    return Tuned{sel.t_u, sel.t_v, crossed, select_tu(spec, data, cfg).curve};
  }
  spec.t_v = fixed_tv;
  const TuSelection sel = select_tu(spec, data, cfg);
  return Tuned{sel.t_u, fixed_tv, sel.crossed, sel.curve};
}

// ---- cluster -------------------------------------------------------------

struct ClusterArgs {
  std::string input;
  std::string label_column;
  std::string variant;
  int clusters = 0;
  double tu = 0.0;
  double tv = 0.0;
  int restarts = 1;
  std::uint64_t seed = 0;
  bool standardize = false;
  std::string out_dir;
  int max_iter = 100;
  double epsilon = 1e-5;
  std::string l1_solver = "median";
  std::string from_manifest;
  bool json_out = false;
  SweepFlags sweep;
  CLI::Option* tu_opt = nullptr;
  CLI::Option* tv_opt = nullptr;
  CLI::Option* label_opt = nullptr;
};

int cmd_cluster(ClusterArgs a, std::ostream& out, std::ostream& err) {
  AlgorithmSpec spec;
  std::optional<std::string> label_column;
  bool tuned = false;

  if (!a.from_manifest.empty()) {
    const json m = json::parse(read_text(a.from_manifest));
    spec = spec_from_json(m.at("spec"));
    a.input = m.at("input").get<std::string>();
    if (!m.at("label_column").is_null()) label_column = m.at("label_column").get<std::string>();
    a.standardize = m.at("standardize").get<bool>();
    a.restarts = m.at("restarts").get<int>();
    if (a.out_dir.empty()) a.out_dir = m.at("out_dir").get<std::string>();
  } else {
    if (a.input.empty()) throw UsageError("an input CSV is required");
    if (a.variant.empty()) throw UsageError("--variant is required");
    if (a.clusters < 1) throw UsageError("--clusters is required");
    if (a.out_dir.empty()) throw UsageError("--out-dir is required");
    spec.variant = *parse_variant(a.variant);
    spec.clusters = a.clusters;
    spec.seed = a.seed;
    spec.max_iter = a.max_iter;
    spec.epsilon = a.epsilon;
    spec.l1_solver = parse_l1_solver(a.l1_solver);
    if (a.label_opt->count() > 0) label_column = a.label_column;
    const bool uses_tv = describe(spec.variant).uses_tv;
    if (a.tv_opt->count() > 0 && !uses_tv) throw UsageError("--tv applies only to sum-constrained variants");
    if (uses_tv && a.tu_opt->count() > 0 && a.tv_opt->count() == 0) throw UsageError("--tu with this variant also needs --tv");
    if (a.tv_opt->count() > 0) spec.t_v = a.tv;
    if (a.tu_opt->count() > 0) {
      spec.t_u = a.tu;
    } else {
      tuned = true;
    }
  }
  if (a.out_dir.empty()) throw UsageError("--out-dir is required");

  const Dataset raw = load_csv(a.input, label_column);
  std::optional<Standardized> st;
  if (a.standardize) st = standardize(raw);
  const Dataset& data = st ? st->data : raw;

  if (tuned) {
    const Tuned t = tune(spec, data, a.sweep.config(), spec.t_v);
    if (!t.crossed) err << "warning: no T_u in the sweep brought the prototypes below the threshold\n";
    spec.t_u = t.t_u;
    spec.t_v = t.t_v;
  }

  const FitResult best = best_of_restarts(spec, data, a.restarts, spec.seed);

  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  const auto features = feature_header(data);
  write_matrix_csv(dir / "membership.csv", best.partition.matrix(), numbered("u", best.partition.c()));
  write_matrix_csv(dir / "prototypes.csv", best.prototypes.matrix(), features);
  write_metric_csv(dir / "metric.csv", best.metric, features);

  const HardPartition hard = hard_partition(best.partition);
  {
    std::ostringstream s;
    s << (data.has_labels() ? "cluster,label\n" : "cluster\n");
    for (std::size_t i = 0; i < hard.size(); ++i) {
      s << hard.assign()[i];
      if (data.has_labels()) s << ',' << data.labels()[i];
      s << '\n';
    }
    write_text(dir / "assignments.csv", s.str());
  }
  {
    std::ostringstream s;
    s << "iteration,objective\n";
    for (std::size_t t = 0; t < best.objective_trace.size(); ++t)
      s << t + 1 << ',' << format_number(best.objective_trace[t]) << '\n';
    write_text(dir / "objective.csv", s.str());
  }

  json manifest = {{"tool", "fcmer"},
                   {"version", kToolVersion},
                   {"timestamp", utc_timestamp()},
                   {"input", fs::absolute(a.input).string()},
                   {"standardize", a.standardize},
                   {"restarts", a.restarts},
                   {"out_dir", fs::absolute(dir).string()},
                   {"spec", spec_json(spec)},
                   {"outputs",
                    {{"membership", "membership.csv"},
                     {"prototypes", "prototypes.csv"},
                     {"metric", "metric.csv"},
                     {"assignments", "assignments.csv"},
                     {"objective", "objective.csv"}}}};
  manifest["label_column"] = label_column ? json(*label_column) : json(nullptr);
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");

  json summary = {{"variant", variant_name(spec.variant)},
                  {"t_u", spec.t_u},
                  {"objective", best.objective()},
                  {"iterations", best.iterations},
                  {"converged", best.termination == Termination::Converged}};
  summary["t_v"] = spec.t_v ? json(*spec.t_v) : json(nullptr);
  if (data.has_labels()) {
    summary["HUL"] = hullermeier_index(best.partition, data.labels());
    summary["ARI"] = adjusted_rand_index(hard, data.labels());
  }
  if (a.json_out) {
    out << summary.dump() << '\n';
  } else {
    out << "variant    " << variant_name(spec.variant) << '\n';
    out << "T_u        " << format_shortest(spec.t_u) << '\n';
    if (spec.t_v) out << "T_v        " << format_shortest(*spec.t_v) << '\n';
    out << "objective  " << fixed4(best.objective()) << '\n';
    out << "iterations " << best.iterations << '\n';
    if (data.has_labels()) {
      out << "HUL        " << fixed4(summary["HUL"].get<double>()) << '\n';
      out << "ARI        " << fixed4(summary["ARI"].get<double>()) << '\n';
    }
  }
  return 0;
}

// ---- generate ------------------------------------------------------------

struct GenerateArgs {
  std::string experiment;
  int pct = 0;
  std::uint64_t seed = 0;
  std::string out;
  std::string ideal_out;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
  if (a.experiment == "outliers") {
    const OutlierSet set = generate_outlier_set(a.pct, a.seed);
    write_csv(a.out, set.data);
    if (!a.ideal_out.empty()) write_matrix_csv(a.ideal_out, set.ideal_centers, {"x1", "x2"});
    out << "wrote " << set.data.n() << " rows to " << a.out << '\n';
  } else {
    const Dataset data = generate_config(a.experiment.back() - '0', a.seed);
    write_csv(a.out, data);
    out << "wrote " << data.n() << " rows to " << a.out << '\n';
  }
  return 0;
}

// ---- tune ----------------------------------------------------------------

struct TuneArgs {
  std::string input;
  std::string label_column;
  std::string variant;
  int clusters = 0;
  double tv = 0.0;
  std::uint64_t seed = 0;
  bool standardize = false;
  std::string curve;
  bool json_out = false;
  SweepFlags sweep;
  CLI::Option* tv_opt = nullptr;
  CLI::Option* label_opt = nullptr;
};

int cmd_tune(const TuneArgs& a, std::ostream& out, std::ostream& err) {
  AlgorithmSpec spec;
  spec.variant = *parse_variant(a.variant);
  spec.clusters = a.clusters;
  spec.seed = a.seed;
  const bool uses_tv = describe(spec.variant).uses_tv;
  if (a.tv_opt->count() > 0 && !uses_tv) throw UsageError("--tv applies only to sum-constrained variants");
  const SweepConfig cfg = a.sweep.config();

  std::optional<std::string> label_column;
  if (a.label_opt->count() > 0) label_column = a.label_column;
  const Dataset raw = load_csv(a.input, label_column);
  std::optional<Standardized> st;
  if (a.standardize) st = standardize(raw);
  const Dataset& data = st ? st->data : raw;

  const Tuned t = tune(spec, data, cfg, a.tv_opt->count() > 0 ? std::optional<double>(a.tv) : std::nullopt);
  if (!t.crossed) err << "warning: no T_u in the sweep brought the prototypes below the threshold\n";
  if (!a.curve.empty()) {
    std::ostringstream s;
    s << "t_u,min_distance\n";
    for (const auto& p : t.curve) s << format_number(p.t_u) << ',' << format_number(p.min_distance) << '\n';
    write_text(a.curve, s.str());
  }
  if (a.json_out) {
    json j = {{"variant", variant_name(spec.variant)}, {"t_u", t.t_u}, {"crossed", t.crossed}};
    j["t_v"] = t.t_v ? json(*t.t_v) : json(nullptr);
    out << j.dump() << '\n';
  } else {
    out << "t_u " << format_shortest(t.t_u) << '\n';
    if (t.t_v) out << "t_v " << format_shortest(*t.t_v) << '\n';
  }
  return 0;
}

// ---- evaluate ------------------------------------------------------------

struct EvaluateArgs {
  std::string membership;
  std::string labels;
  std::string label_column;
  std::string prototypes;
  std::string ideal;
  bool json_out = false;
  CLI::Option* label_opt = nullptr;
};

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  if (a.prototypes.empty() != a.ideal.empty()) throw UsageError("rd needs both --prototypes and --ideal");
  const FuzzyPartition u(read_matrix_csv(a.membership));
  const std::vector<int> labels =
      read_label_column(a.labels, a.label_opt->count() > 0 ? std::optional<std::string>(a.label_column) : std::nullopt);
  if (static_cast<Index>(labels.size()) != u.n())
    throw Error(ErrorCode::ShapeMismatch, "membership has " + std::to_string(u.n()) + " rows but labels have " +
                                              std::to_string(labels.size()));
  json j = {{"HUL", hullermeier_index(u, labels)}, {"ARI", adjusted_rand_index(hard_partition(u), labels)}};
  if (!a.prototypes.empty()) {
    const Matrix g = read_matrix_csv(a.prototypes);
    const Matrix ideal = read_matrix_csv(a.ideal);
    j["rd"] = robustness_detection(g, ideal);
  }
  if (a.json_out) {
    out << j.dump() << '\n';
  } else {
    out << "index  value\n";
    for (const char* key : {"HUL", "ARI", "rd"})
      if (j.contains(key)) out << std::left << std::setw(7) << key << fixed4(j[key].get<double>()) << '\n';
  }
  return 0;
}

// ---- experiment ----------------------------------------------------------

struct ExperimentArgs {
  std::string experiment;
  int pct = 0;
  std::string variants = "all";
  int replications = 10;
  int restarts = 50;
  std::uint64_t seed = 1;
  int threads = 1;
  bool keep_going = false;
  double tu = 0.0;
  double tv = 0.0;
  bool raw = false;
  bool include_outliers = false;
  std::string l1_solver = "median";
  std::string csv;
  std::string records;
  bool json_out = false;
  SweepFlags sweep;
  CLI::Option* tu_opt = nullptr;
  CLI::Option* tv_opt = nullptr;
};

int cmd_experiment(const ExperimentArgs& a, std::ostream& out) {
  MonteCarloConfig cfg;
  cfg.experiment = *Experiment::parse(a.experiment, a.pct);
  cfg.variants = parse_variant_list(a.variants);
  cfg.replications = a.replications;
  cfg.restarts = a.restarts;
  cfg.seed = a.seed;
  cfg.threads = a.threads;
  cfg.keep_going = a.keep_going;
  cfg.standardize = !a.raw;
  cfg.include_outliers = a.include_outliers;
  cfg.l1_solver = parse_l1_solver(a.l1_solver);
  cfg.sweep = a.sweep.config();
  if (a.tu_opt->count() > 0) cfg.fixed_tu = a.tu;
  if (a.tv_opt->count() > 0) cfg.fixed_tv = a.tv;
  if (cfg.fixed_tu && !cfg.fixed_tv)
    for (Variant v : cfg.variants)
      if (describe(v).uses_tv) throw UsageError("--tu with sum-constrained variants also needs --tv");

  const Report report = monte_carlo(cfg);
  const std::string csv = report_csv(report);
  if (!a.csv.empty()) write_text(a.csv, csv);
  if (!a.records.empty()) write_text(a.records, records_csv(report));
  if (a.json_out) {
    json rows = json::array();
    for (const auto& r : report.rows)
      rows.push_back({{"variant", variant_name(r.variant)}, {"index", r.index}, {"mean", r.mean}, {"std", r.std},
                      {"count", r.count}});
    out << json{{"experiment", report.experiment}, {"rows", rows}}.dump() << '\n';
  } else {
    out << report_table(report);
    if (a.csv.empty()) out << '\n' << csv;
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Entropy-regularized fuzzy clustering with adaptive distances", "fcmer"};
  app.set_version_flag("--version", kToolVersion);
  bool list_variants = false;
  app.add_flag("--list-variants", list_variants, "Print command-line and display names of every variant");

  ClusterArgs ca;
  auto* cluster = app.add_subcommand("cluster", "Fit one variant to a CSV dataset");
  cluster->add_option("input", ca.input, "CSV file with a header row")->check(CLI::ExistingFile);
  ca.label_opt = cluster->add_option("--label-column", ca.label_column, "Column holding a-priori classes");
  cluster->add_option("--variant", ca.variant, "Algorithm variant")->check(kVariantName);
  cluster->add_option("--clusters", ca.clusters, "Number of clusters")->check(CLI::PositiveNumber);
  ca.tu_opt = cluster->add_option("--tu", ca.tu, "Membership temperature; tuned by the sweep when omitted")
                  ->check(CLI::PositiveNumber);
  ca.tv_opt = cluster->add_option("--tv", ca.tv, "Weight temperature (GS/LS variants)")->check(CLI::PositiveNumber);
  cluster->add_option("--restarts", ca.restarts, "Random restarts; the lowest objective wins")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cluster->add_option("--seed", ca.seed, "Seed of the first restart")->capture_default_str();
  cluster->add_flag("--standardize", ca.standardize, "Z-score every feature before fitting");
  cluster->add_option("--out-dir", ca.out_dir, "Directory for the output files");
  cluster->add_option("--max-iter", ca.max_iter, "Iteration cap")->check(CLI::PositiveNumber)->capture_default_str();
  cluster->add_option("--epsilon", ca.epsilon, "Membership change tolerance")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cluster->add_option("--l1-solver", ca.l1_solver, "City-block prototype update")
      ->check(CLI::IsMember({"median", "irls"}))
      ->capture_default_str();
  cluster->add_option("--from-manifest", ca.from_manifest, "Replay the run recorded in a manifest.json")
      ->check(CLI::ExistingFile);
  cluster->add_flag("--json", ca.json_out, "Print the summary as JSON");
  ca.sweep.attach(cluster);

  GenerateArgs ga;
  auto* generate = app.add_subcommand("generate", "Write a synthetic labeled dataset");
  generate->add_option("--experiment", ga.experiment, "Dataset family")->required()->check(CLI::IsMember(kExperiments));
  generate->add_option("--pct", ga.pct, "Outlier percentage")->check(CLI::IsMember({0, 10, 20, 30}))->capture_default_str();
  generate->add_option("--seed", ga.seed, "Sampling seed")->capture_default_str();
  generate->add_option("--out", ga.out, "Output CSV")->required();
  generate->add_option("--ideal-out", ga.ideal_out, "Also write the ideal centers (outliers only)");

  TuneArgs ta;
  auto* tune_cmd = app.add_subcommand("tune", "Select T_u (and T_v) by the minimum-centroid-distance sweep");
  tune_cmd->add_option("input", ta.input, "CSV file with a header row")->required()->check(CLI::ExistingFile);
  ta.label_opt = tune_cmd->add_option("--label-column", ta.label_column, "Column to exclude from the features");
  tune_cmd->add_option("--variant", ta.variant, "Algorithm variant")->required()->check(kVariantName);
  tune_cmd->add_option("--clusters", ta.clusters, "Number of clusters")->required()->check(CLI::PositiveNumber);
  ta.tv_opt = tune_cmd->add_option("--tv", ta.tv, "Fix T_v instead of searching the grid")->check(CLI::PositiveNumber);
  tune_cmd->add_option("--seed", ta.seed, "Seed for the candidate fits")->capture_default_str();
  tune_cmd->add_flag("--standardize", ta.standardize, "Z-score every feature before tuning");
  tune_cmd->add_option("--curve", ta.curve, "Write the evaluated (t_u, min_distance) points to this CSV");
  tune_cmd->add_flag("--json", ta.json_out, "Print the selection as JSON");
  ta.sweep.attach(tune_cmd);

  EvaluateArgs ea;
  auto* evaluate = app.add_subcommand("evaluate", "Score a membership matrix against labels");
  evaluate->add_option("--membership", ea.membership, "Membership CSV (N x C)")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--labels", ea.labels, "CSV holding the a-priori classes")->required()->check(CLI::ExistingFile);
  ea.label_opt = evaluate->add_option("--label-column", ea.label_column, "Label column name (default: last column)");
  evaluate->add_option("--prototypes", ea.prototypes, "Prototype CSV (2 x P) for rd")->check(CLI::ExistingFile);
  evaluate->add_option("--ideal", ea.ideal, "Ideal-center CSV (2 x P) for rd")->check(CLI::ExistingFile);
  evaluate->add_flag("--json", ea.json_out, "Print the indices as JSON");

  ExperimentArgs xa;
  auto* experiment = app.add_subcommand("experiment", "Monte Carlo reproduction of the synthetic benchmarks");
  experiment->add_option("--experiment", xa.experiment, "Dataset family")->required()->check(CLI::IsMember(kExperiments));
  experiment->add_option("--pct", xa.pct, "Outlier percentage")->check(CLI::IsMember({0, 10, 20, 30}))->capture_default_str();
  experiment->add_option("--variants", xa.variants, "Comma-separated variants or 'all'")->capture_default_str();
  experiment->add_option("--replications", xa.replications, "Monte Carlo replications")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  experiment->add_option("--restarts", xa.restarts, "Restarts per fit")->check(CLI::PositiveNumber)->capture_default_str();
  experiment->add_option("--seed", xa.seed, "Base seed")->capture_default_str();
  experiment->add_option("--threads", xa.threads, "Worker threads over replications")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  experiment->add_flag("--keep-going", xa.keep_going, "Record failed replications instead of stopping");
  xa.tu_opt = experiment->add_option("--tu", xa.tu, "Fixed T_u (skips the sweep)")->check(CLI::PositiveNumber);
  xa.tv_opt = experiment->add_option("--tv", xa.tv, "Fixed T_v (skips the grid)")->check(CLI::PositiveNumber);
  experiment->add_flag("--raw", xa.raw, "Fit on unstandardized data");
  experiment->add_flag("--include-outliers", xa.include_outliers, "Score outliers as a third class");
  experiment->add_option("--l1-solver", xa.l1_solver, "City-block prototype update")
      ->check(CLI::IsMember({"median", "irls"}))
      ->capture_default_str();
  experiment->add_option("--csv", xa.csv, "Write the mean/std report here");
  experiment->add_option("--records", xa.records, "Write per-replication detail here");
  experiment->add_flag("--json", xa.json_out, "Print the report as JSON");
  xa.sweep.attach(experiment);

  auto usage_of = [&]() -> std::string {
    for (auto* sub : app.get_subcommands()) return sub->help();
    return app.help();
  };

  std::vector<const char*> argv{"fcmer"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << usage_of();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << usage_of();
    return 2;
  }

  try {
    if (list_variants) {
      for (Variant v : kAllVariants) out << std::left << std::setw(16) << variant_cli_name(v) << variant_name(v) << '\n';
      return 0;
    }
    if (cluster->parsed()) return cmd_cluster(ca, out, err);
    if (generate->parsed()) {
      if (ga.experiment != "outliers" && generate->count("--pct") > 0) throw UsageError("--pct applies only to outliers");
      if (ga.experiment != "outliers" && !ga.ideal_out.empty())
        throw UsageError("--ideal-out applies only to outliers");
      return cmd_generate(ga, out);
    }
    if (tune_cmd->parsed()) return cmd_tune(ta, out, err);
    if (evaluate->parsed()) return cmd_evaluate(ea, out);
    if (experiment->parsed()) return cmd_experiment(xa, out);
    err << app.help();
    return 2;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << usage_of();
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace fcmer
