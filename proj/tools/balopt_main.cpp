// balopt command-line interface.
//
// Subcommands:
//   loss eval   -- positive/entropy terms and combined loss of a batch file
//   metrics ap  -- average-precision variants over relevance rows
//   grid check  -- validate a performance-grid CSV
//   grid eval   -- interpolate a grid at one configuration
//   tune        -- one coordinate-descent trajectory, trial log as CSV
//   compare     -- multi-trajectory method comparison from a JSON spec

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "balopt/balopt.hpp"
#include "balopt/batch_io.hpp"

namespace {

using namespace balopt;

std::string fmt(double v) { return text::format_double(v); }

HyperConfig parse_config_csv(const std::string& text_value) {
  const auto parts = text::split(text_value, ',');
  if (parts.size() != 3)
    throw FormatError("expected lambda_p,lambda_e,batch_size, got '" +
                      text_value + "'");
  return {text::parse_double(parts[0]), text::parse_double(parts[1]),
          text::parse_double(parts[2])};
}

std::array<int, 3> parse_budgets(const std::string& text_value) {
  const auto parts = text::split(text_value, ',');
  if (parts.empty() || parts.size() > 3)
    throw FormatError("budgets need 1-3 comma-separated integers");
  std::array<int, 3> out{};
  for (size_t i = 0; i < 3; ++i)
    out[i] = static_cast<int>(
        text::parse_int(parts[std::min(i, parts.size() - 1)]));
  return out;
}

struct LossArgs {
  std::string input;
  std::string loss = "margin";
  double margin = 0.5;
  int exponent = 1;
  double tau = 0.1;
  std::optional<double> lambda_p;
  std::optional<double> lambda_e;
  std::string aggregation;
};

void run_loss_eval(const LossArgs& args) {
  const auto batch = load_batch(args.input);
  TermPair terms;
  if (args.loss == "margin")
    terms = margin_terms(batch, {args.margin, args.exponent});
  else if (args.loss == "infonce")
    terms = infonce_terms(batch, {args.tau});
  else
    throw FormatError("--loss must be margin or infonce");

  BalanceCoeffs coeffs = separate_average_coeffs();
  if (args.lambda_p || args.lambda_e) {
    if (!args.lambda_p || !args.lambda_e)
      throw FormatError("--lambda-p and --lambda-e must be given together");
    coeffs = {*args.lambda_p, *args.lambda_e};
  } else if (args.aggregation == "global") {
    const auto part = partition_pairs(batch.labels, batch.mask);
    coeffs = global_average_coeffs(part.positives.size(),
                                   part.negatives.size());
  } else if (!args.aggregation.empty() && args.aggregation != "separate") {
    throw FormatError("--agg must be global or separate");
  }
  std::cout << "pos_term=" << fmt(terms.pos_term) << "\n"
            << "ent_term=" << fmt(terms.ent_term) << "\n"
            << "lambda_p=" << fmt(coeffs.lambda_p)
            << " lambda_e=" << fmt(coeffs.lambda_e) << "\n"
            << "combined=" << fmt(combine(terms, coeffs)) << "\n";
}

void run_metrics_ap(const std::string& input, const std::string& metric) {
  const auto qs = load_relevance_csv(input);
  const auto variant = ap_variant_from_name(metric);
  for (size_t q = 0; q < qs.queries.size(); ++q) {
    const auto& rel = qs.queries[q];
    std::cout << "query " << (q + 1) << ": ";
    if (relevant_count(rel) == 0)
      std::cout << "skipped (no relevant items)\n";
    else
      std::cout << fmt(eval_ap_variant(rel, variant)) << "\n";
  }
  const auto mean = mean_metric(qs, variant);
  std::cout << "mean=" << fmt(mean.mean) << " skipped=" << mean.skipped
            << "\n";
}

void run_grid_check(const std::string& path) {
  const auto grid = grid_load(path);
  const auto space = grid.bounding_space();
  std::cout << "ok: " << grid.axes[0].size() << "x" << grid.axes[1].size()
            << "x" << grid.axes[2].size() << " nodes=" << grid.scores.size();
  for (int d = 0; d < 3; ++d)
    std::cout << " " << kDimNames[size_t(d)] << "=["
              << fmt(space.dims[size_t(d)].lo) << ", "
              << fmt(space.dims[size_t(d)].hi) << "]";
  if (!grid.metric_name.empty()) std::cout << " metric=" << grid.metric_name;
  std::cout << "\n";
}

void run_grid_eval(const std::string& path, double lambda_p, double lambda_e,
                   double batch_size) {
  const auto grid = grid_load(path);
  std::cout << fmt(grid_interpolate(grid, {lambda_p, lambda_e, batch_size}))
            << "\n";
}

struct TuneArgs {
  std::string objective;
  std::string matrix = "balance";
  std::string budgets = "3,3,3";
  int total_budget = 50;
  std::string space_file;
  std::string start = "random";
  std::uint64_t seed = 1;
  double slope_threshold = 0.02;
  double multiplier = 2.0;
  bool reverse = false;
  double cmd_timeout = 0.0;
  std::string out;
};

void run_tune(const TuneArgs& args) {
  const auto loaded = load_objective(args.objective, args.cmd_timeout);
  SearchSpace space;
  if (!args.space_file.empty())
    space = load_search_space(args.space_file);
  else if (loaded.natural_space)
    space = *loaded.natural_space;
  else if (args.objective.rfind("synthetic:", 0) == 0)
    space = default_space_3d();
  else
    throw InvalidConfig("--space is required for this objective");

  CdSettings settings;
  settings.directions = parse_matrix(args.matrix);
  settings.space = space;
  settings.budget.per_direction = parse_budgets(args.budgets);
  settings.budget.total = args.total_budget;
  settings.budget.slope_threshold = args.slope_threshold;
  settings.budget.multiplier = args.multiplier;
  settings.reverse_directions = args.reverse;
  if (args.start == "random") {
    std::mt19937_64 rng(args.seed);
    settings.start = sample_log_uniform(space, rng);
  } else {
    settings.start = parse_config_csv(args.start);
  }

  const auto history = coordinate_descent(*loaded.objective, settings);

  std::string csv = "index,lambda_p,lambda_e,batch_size,score,cached\n";
  for (const auto& t : history.trials) {
    csv += std::to_string(t.index) + "," + fmt(t.config.lambda_p_rate) + "," +
           fmt(t.config.lambda_e_rate) + "," + fmt(t.config.batch_size) + "," +
           fmt(t.score) + "," + (t.cached ? "1" : "0") + "\n";
  }
  const auto* best = history.best();
  const std::string best_line =
      "best: lambda_p=" + fmt(best->config.lambda_p_rate) +
      " lambda_e=" + fmt(best->config.lambda_e_rate) +
      " batch_size=" + fmt(best->config.batch_size) +
      " score=" + fmt(best->score) + "\n";
  if (args.out.empty()) {
    std::cout << csv;
    std::cerr << best_line;
  } else {
    text::write_file(args.out, csv);
    std::cout << best_line;
  }
}

void run_compare(const std::string& spec_path, const std::string& out_dir,
                 std::optional<int> threads) {
  auto spec = load_comparison_spec(spec_path);
  if (threads) spec.threads = *threads;
  const auto reports = run_comparison(spec);
  for (const auto& path : emit_report(reports, spec, out_dir))
    std::cout << path << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Balance-aware hyperparameter search toolkit"};
  app.require_subcommand(1);

  // loss eval
  auto* loss = app.add_subcommand("loss", "Contrastive loss computations");
  loss->require_subcommand(1);
  auto* loss_eval =
      loss->add_subcommand("eval", "Evaluate the loss terms of a batch file");
  LossArgs loss_args;
  loss_eval->add_option("--input", loss_args.input, "Batch CSV or JSON file")
      ->required();
  loss_eval->add_option("--loss", loss_args.loss, "margin or infonce");
  loss_eval->add_option("--m", loss_args.margin, "Margin (margin loss)");
  loss_eval->add_option("--q", loss_args.exponent, "Exponent, 1 or 2");
  loss_eval->add_option("--tau", loss_args.tau, "Temperature (infonce)");
  double lp_opt = 0.0, le_opt = 0.0;
  auto* lp_flag = loss_eval->add_option("--lambda-p", lp_opt,
                                        "Positive-term weight");
  auto* le_flag = loss_eval->add_option("--lambda-e", le_opt,
                                        "Entropy-term weight");
  loss_eval->add_option("--agg", loss_args.aggregation,
                        "global or separate average");
  loss_eval->callback([&] {
    if (lp_flag->count()) loss_args.lambda_p = lp_opt;
    if (le_flag->count()) loss_args.lambda_e = le_opt;
    run_loss_eval(loss_args);
  });

  // metrics ap
  auto* metrics = app.add_subcommand("metrics", "Retrieval metrics");
  metrics->require_subcommand(1);
  auto* metrics_ap =
      metrics->add_subcommand("ap", "Average-precision variants");
  std::string metrics_input, metrics_kind = "ap";
  metrics_ap->add_option("--input", metrics_input,
                         "CSV with one 0/1 relevance row per query")
      ->required();
  metrics_ap->add_option("--metric", metrics_kind, "ap, ap-top-r, or ap-at-r");
  metrics_ap->callback([&] { run_metrics_ap(metrics_input, metrics_kind); });

  // grid check / eval
  auto* grid = app.add_subcommand("grid", "Performance-grid utilities");
  grid->require_subcommand(1);
  auto* grid_check = grid->add_subcommand("check", "Validate a grid CSV");
  std::string grid_check_path;
  grid_check->add_option("file", grid_check_path, "Grid CSV")->required();
  grid_check->callback([&] { run_grid_check(grid_check_path); });

  auto* grid_eval =
      grid->add_subcommand("eval", "Interpolate a grid at a configuration");
  std::string grid_eval_path;
  double ge_lp = 0.0, ge_le = 0.0, ge_b = 64.0;
  grid_eval->add_option("file", grid_eval_path, "Grid CSV")->required();
  grid_eval->add_option("--lambda-p", ge_lp)->required();
  grid_eval->add_option("--lambda-e", ge_le)->required();
  grid_eval->add_option("--batch-size", ge_b)->required();
  grid_eval->callback([&] { run_grid_eval(grid_eval_path, ge_lp, ge_le, ge_b); });

  // tune
  auto* tune = app.add_subcommand(
      "tune", "Run one coordinate-descent trajectory");
  TuneArgs tune_args;
  tune->add_option("--objective", tune_args.objective,
                   "grid:<csv> | synthetic:<preset-or-json> | cmd:<template>")
      ->required();
  tune->add_option("--matrix", tune_args.matrix,
                   "balance|identity|theory or nine numbers");
  tune->add_option("--budgets", tune_args.budgets,
                   "Per-direction budgets c0,c1[,c2]");
  tune->add_option("--total-budget", tune_args.total_budget);
  tune->add_option("--space", tune_args.space_file,
                   "Search-space file (key=value or JSON)");
  tune->add_option("--start", tune_args.start,
                   "lambda_p,lambda_e,batch_size or 'random'");
  tune->add_option("--seed", tune_args.seed);
  tune->add_option("--slope-threshold", tune_args.slope_threshold);
  tune->add_option("--multiplier", tune_args.multiplier);
  tune->add_flag("--reverse", tune_args.reverse,
                 "Reverse the direction order");
  tune->add_option("--cmd-timeout", tune_args.cmd_timeout,
                   "Per-evaluation timeout for cmd objectives, seconds");
  tune->add_option("--out", tune_args.out, "Trial-log CSV path");
  tune->callback([&] { run_tune(tune_args); });

  // compare
  auto* compare = app.add_subcommand(
      "compare", "Compare methods over many trajectories");
  std::string compare_spec, compare_out = "comparison";
  int compare_threads = 0;
  compare->add_option("--spec", compare_spec,
                      "Comparison spec JSON (or an emitted report.json)")
      ->required();
  compare->add_option("--out", compare_out, "Output directory");
  auto* threads_flag =
      compare->add_option("--threads", compare_threads, "Worker threads");
  compare->callback([&] {
    run_compare(compare_spec, compare_out,
                threads_flag->count() ? std::optional<int>(compare_threads)
                                      : std::nullopt);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
