#include "expeval/cli.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <functional>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include "expeval/exposure.hpp"
#include "expeval/io.hpp"
#include "expeval/metrics.hpp"
#include "expeval/policies.hpp"

namespace expeval::cli {

namespace {

void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& fn) {
  int t = threads > 0 ? threads
                      : static_cast<int>(std::thread::hardware_concurrency());
  t = std::clamp<int>(t, 1, static_cast<int>(std::max<std::size_t>(n, 1)));
  if (t == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(t));
  for (int k = 0; k < t; ++k) {
    workers.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (error) std::rethrow_exception(error);
}

std::ifstream open_input(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigurationError(std::string("cannot open ") + what + " file '" +
                             path + "'");
  }
  return in;
}

std::ofstream open_output(const std::string& path, CommandReport& report) {
  std::ofstream out(path);
  if (!out) {
    throw ConfigurationError("cannot write output file '" + path + "'");
  }
  report.outputs.push_back(path);
  return out;
}

std::vector<std::string> run_doc_ids(const ScoredRun& run) {
  std::vector<std::string> docs;
  docs.reserve(run.entries.size());
  for (const auto& [doc, score] : run.entries) {
    (void)score;
    docs.push_back(doc);
  }
  return docs;
}

Policy make_policy(const std::string& name, const ScoredRun& run,
                   const RelevanceJudgments& judgments, double param,
                   int rerank_depth) {
  if (name == "det") return Policy::deterministic(run, judgments);
  if (name == "pl") return Policy::plackett_luce(run, judgments, param, rerank_depth);
  if (name == "rt") return Policy::rank_transposition(run, judgments, param, rerank_depth);
  if (name == "oracle") return Policy::oracle(judgments);
  throw ConfigurationError("unknown policy '" + name +
                           "' (expected det, pl, rt or oracle)");
}

GroupFairnessMode parse_mode(const std::string& name) {
  if (name == "demographic_parity") return GroupFairnessMode::DemographicParity;
  if (name == "disparate_treatment") return GroupFairnessMode::DisparateTreatment;
  return GroupFairnessMode::DisparateImpact;
}

// Joins runs with their judgments; runs without judgments are skipped and
// listed in the report.
struct QueryTask {
  const ScoredRun* run;
  const RelevanceJudgments* judgments;
};
std::vector<QueryTask> join_run_qrels(const io::RunData& runs,
                                      const io::QrelsData& qrels,
                                      CommandReport& report) {
  std::vector<QueryTask> tasks;
  for (const ScoredRun& run : runs.runs) {
    const RelevanceJudgments* found = nullptr;
    for (const RelevanceJudgments& j : qrels.queries) {
      if (j.query_id() == run.query_id) {
        found = &j;
        break;
      }
    }
    if (!found) {
      report.skipped_queries.push_back(run.query_id + ": no judgments");
    } else {
      tasks.push_back({&run, found});
    }
  }
  return tasks;
}

}  // namespace

BrowsingModel make_model(const ModelOptions& options) {
  if (options.kind == "rbp") {
    return BrowsingModel::rbp(options.gamma, options.depth);
  }
  if (options.kind == "err") {
    return BrowsingModel::err(options.gamma, options.phi, options.depth);
  }
  throw ConfigurationError("unknown browsing model '" + options.kind +
                           "' (expected rbp or err)");
}

CommandReport run_eval(const EvalOptions& options) {
  CommandReport report;
  const BrowsingModel model = make_model(options.model);

  auto run_in = open_input(options.run_path, "run");
  const io::RunData runs = io::parse_run(run_in);
  auto qrels_in = open_input(options.qrels_path, "qrels");
  const io::QrelsData qrels = io::parse_qrels(qrels_in);
  io::GroupRows group_rows;
  if (!options.groups_path.empty()) {
    auto groups_in = open_input(options.groups_path, "groups");
    group_rows = io::parse_groups(groups_in);
  }

  const std::vector<QueryTask> tasks = join_run_qrels(runs, qrels, report);
  double param = 0.0;
  if (options.policy == "pl") param = options.grid.empty() ? 1.0 : options.grid[0];
  if (options.policy == "rt") param = options.grid.empty() ? 0.5 : options.grid[0];

  struct Result {
    io::CurveRows row;
    std::vector<io::GroupLossRow> group_rows;
    bool empty_relevance = false;
    std::string error;
  };
  std::vector<Result> results(tasks.size());

  parallel_for(tasks.size(), options.threads, [&](std::size_t i) {
    Result& res = results[i];
    const ScoredRun& run = *tasks[i].run;
    try {
      const std::vector<std::string> docs = run_doc_ids(run);
      const RelevanceJudgments judgments =
          tasks[i].judgments->with_documents(docs);
      const Policy policy = make_policy(options.policy, run, judgments, param,
                                        options.rerank_depth);
      const McEvaluation mc =
          mc_evaluate(policy, model, judgments, options.samples,
                      derive_seed(options.seed, "query", fnv1a(run.query_id)));
      const ExposureVector target = target_exposure(model, judgments);

      CurvePoint point;
      point.param = param;
      point.ee = ee_breakdown(mc.exposure, target);
      std::tie(point.d_norm, point.r_norm) =
          normalize_curve_point(point.ee, judgments, model);
      point.expected_rbp = mc.expected_rbp;
      point.expected_err = mc.expected_err;

      res.row.query = run.query_id;
      res.row.policy = options.policy;
      res.row.curve.points.push_back(point);
      res.empty_relevance = judgments.relevant_count() == 0;

      auto rows_it = group_rows.find(run.query_id);
      if (rows_it != group_rows.end()) {
        const GroupAttribution groups =
            GroupAttribution::from_memberships(judgments, rows_it->second);
        for (const char* mode : {"demographic_parity", "disparate_treatment",
                                 "disparate_impact"}) {
          try {
            io::GroupLossRow row;
            row.query = run.query_id;
            row.policy = options.policy;
            row.mode = mode;
            row.ee = group_fairness_loss(mc.exposure, groups, judgments,
                                         parse_mode(mode), model);
            res.group_rows.push_back(std::move(row));
          } catch (const EmptyRelevanceError&) {
            // relevance-based targets are undefined for this query
          }
        }
      }
    } catch (const Error& e) {
      res.error = e.what();
    }
  });

  std::vector<io::CurveRows> point_rows;
  std::vector<io::GroupLossRow> group_loss_rows;
  for (Result& res : results) {
    if (!res.error.empty()) {
      report.skipped_queries.push_back(res.row.query.empty()
                                           ? res.error
                                           : res.row.query + ": " + res.error);
      continue;
    }
    ++report.queries;
    if (res.empty_relevance) ++report.empty_relevance;
    point_rows.push_back(std::move(res.row));
    for (auto& g : res.group_rows) group_loss_rows.push_back(std::move(g));
  }

  auto points_out = open_output(options.out + "_points.csv", report);
  io::write_points_csv(points_out, point_rows);
  if (!options.groups_path.empty()) {
    auto groups_out = open_output(options.out + "_groups.csv", report);
    io::write_group_csv(groups_out, group_loss_rows);
  }
  return report;
}

CommandReport run_sweep(const SweepOptions& options) {
  CommandReport report;
  const BrowsingModel model = make_model(options.model);
  if (options.grid.empty()) {
    throw ConfigurationError("sweep needs a nonempty parameter grid");
  }
  const PolicyFamily family = [&] {
    if (options.policy == "pl") return PolicyFamily::PlackettLuce;
    if (options.policy == "rt") return PolicyFamily::RankTransposition;
    throw ConfigurationError("sweep policy must be pl or rt");
  }();

  auto run_in = open_input(options.run_path, "run");
  const io::RunData runs = io::parse_run(run_in);
  auto qrels_in = open_input(options.qrels_path, "qrels");
  const io::QrelsData qrels = io::parse_qrels(qrels_in);
  const std::vector<QueryTask> tasks = join_run_qrels(runs, qrels, report);

  struct Result {
    io::CurveRows row;
    double auc = 0.0;
    bool empty_relevance = false;
    std::string error;
  };
  std::vector<Result> results(tasks.size());

  parallel_for(tasks.size(), options.threads, [&](std::size_t i) {
    Result& res = results[i];
    const ScoredRun& run = *tasks[i].run;
    try {
      const std::vector<std::string> docs = run_doc_ids(run);
      const RelevanceJudgments judgments =
          tasks[i].judgments->with_documents(docs);
      expeval::SweepOptions sweep_options;
      sweep_options.n_samples = options.samples;
      sweep_options.rerank_depth = options.rerank_depth;
      sweep_options.seed = derive_seed(options.seed, "query", fnv1a(run.query_id));
      SweepCurve curve =
          sweep(run, judgments, model, family, options.grid, sweep_options);
      res.auc = ee_auc(curve);
      res.row.query = run.query_id;
      res.row.policy = options.policy;
      res.row.curve = std::move(curve);
      res.empty_relevance = judgments.relevant_count() == 0;
    } catch (const Error& e) {
      res.error = e.what();
    }
  });

  std::vector<io::CurveRows> point_rows;
  std::vector<io::AucRow> auc_rows;
  for (Result& res : results) {
    if (!res.error.empty()) {
      report.skipped_queries.push_back(res.row.query.empty()
                                           ? res.error
                                           : res.row.query + ": " + res.error);
      continue;
    }
    ++report.queries;
    if (res.empty_relevance) ++report.empty_relevance;
    report.warnings += res.row.curve.warnings;
    auc_rows.push_back({res.row.query, res.row.policy, res.auc});
    point_rows.push_back(std::move(res.row));
  }

  auto points_out = open_output(options.out + "_points.csv", report);
  io::write_points_csv(points_out, point_rows);
  auto auc_out = open_output(options.out + "_auc.csv", report);
  io::write_auc_csv(auc_out, auc_rows, /*with_macro_average=*/true);
  if (options.statics) {
    auto static_out = open_output(options.out + "_static.csv", report);
    io::write_static_csv(static_out, point_rows);
  }
  return report;
}

CommandReport run_synth(const SynthOptions& options) {
  CommandReport report;
  const synth::SynthData data = synth::generate(options.spec);
  report.queries = options.spec.n_queries;

  auto run_out = open_output(options.out + ".run", report);
  io::write_run(run_out, data.runs);
  auto qrels_out = open_output(options.out + ".qrels", report);
  io::write_qrels(qrels_out, data.judgments);
  auto features_out = open_output(options.out + ".features", report);
  io::write_features(features_out, data.dataset);
  if (options.spec.n_groups > 0) {
    auto groups_out = open_output(options.out + ".groups", report);
    io::write_groups(groups_out, data.group_rows);
  }
  return report;
}

namespace {

void attach_groups(ltr::LtrDataset& dataset, const io::GroupRows& rows) {
  for (ltr::LtrQuery& q : dataset.queries) {
    auto it = rows.find(q.query_id);
    if (it == rows.end()) continue;
    q.groups = GroupAttribution::from_memberships(ltr::to_judgments(q),
                                                  it->second);
  }
}

struct Splits {
  ltr::LtrDataset train, valid, test;
};

Splits split_dataset(const ltr::LtrDataset& dataset, std::uint64_t seed) {
  std::vector<std::size_t> order(dataset.queries.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng = make_rng(seed, "split");
  fisher_yates(order.begin(), order.end(), rng);
  const std::size_t n = order.size();
  const std::size_t n_train = (n * 6) / 10;
  const std::size_t n_valid = (n * 2) / 10;
  Splits splits;
  splits.train.n_features = splits.valid.n_features = splits.test.n_features =
      dataset.n_features;
  for (std::size_t i = 0; i < n; ++i) {
    const ltr::LtrQuery& q = dataset.queries[order[i]];
    if (i < n_train) {
      splits.train.queries.push_back(q);
    } else if (i < n_train + n_valid) {
      splits.valid.queries.push_back(q);
    } else {
      splits.test.queries.push_back(q);
    }
  }
  return splits;
}

std::string join_ints(const std::vector<int>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(values[i]);
  }
  return out;
}

std::string join_doubles(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    out += io::format_g6(values[i]);
  }
  return out;
}

void write_eval_outputs(const std::string& out_prefix, const std::string& tag,
                        const std::string& policy_name,
                        const ltr::EvalCurves& curves,
                        const ltr::LtrDataset& test, CommandReport& report) {
  std::vector<io::CurveRows> point_rows;
  std::vector<io::AucRow> auc_rows;
  for (std::size_t qi = 0; qi < curves.per_query.size(); ++qi) {
    point_rows.push_back(
        {test.queries[qi].query_id, policy_name, curves.per_query[qi]});
    auc_rows.push_back(
        {test.queries[qi].query_id, policy_name, curves.auc[qi]});
  }
  auto points_out = open_output(out_prefix + tag + "_points.csv", report);
  io::write_points_csv(points_out, point_rows);
  auto auc_out = open_output(out_prefix + tag + "_auc.csv", report);
  io::write_auc_csv(auc_out, auc_rows, /*with_macro_average=*/true);
}

}  // namespace

CommandReport run_train(const TrainOptions& options) {
  CommandReport report;
  const BrowsingModel model = make_model(options.model);

  auto features_in = open_input(options.features_path, "features");
  io::FeatureData feature_data = io::parse_features(features_in);
  ltr::LtrDataset& dataset = feature_data.dataset;
  if (dataset.queries.empty()) {
    throw ConfigurationError("feature file contains no queries");
  }
  if (!options.groups_path.empty()) {
    auto groups_in = open_input(options.groups_path, "groups");
    attach_groups(dataset, io::parse_groups(groups_in));
  }

  Splits splits = split_dataset(dataset, options.seed);
  if (splits.train.queries.empty() || splits.test.queries.empty()) {
    throw ConfigurationError("dataset is too small for a 60/20/20 split");
  }
  const io::MinMaxScaler scaler = io::fit_minmax(splits.train);
  io::apply_minmax(splits.train, scaler);
  io::apply_minmax(splits.valid, scaler);
  io::apply_minmax(splits.test, scaler);

  ltr::TrainConfig config;
  config.lambda = options.lambda;
  config.tau = options.tau;
  config.n_train_samples = options.n_train_samples;
  config.n_eval_samples = options.n_eval_samples;
  config.learning_rate = options.learning_rate;
  config.dropout = options.dropout;
  config.epochs = options.epochs;
  config.patience = options.patience;
  config.hidden = options.hidden;
  config.seed = options.seed;

  const bool has_groups = !options.groups_path.empty();
  std::ostringstream manifest;
  manifest << "expeval train manifest\n"
           << "objective=" << options.objective << "\n"
           << "model=" << options.model.kind << " gamma=" << options.model.gamma
           << " depth=" << options.model.depth << "\n"
           << "tau=" << config.tau << "\n"
           << "n_train_samples=" << config.n_train_samples << "\n"
           << "n_test_samples=" << config.n_eval_samples << "\n"
           << "learning_rate=" << config.learning_rate << "\n"
           << "dropout=" << config.dropout << "\n"
           << "hidden=" << join_ints(config.hidden) << "\n"
           << "epochs=" << config.epochs << " patience=" << config.patience
           << "\n"
           << "seed=" << options.seed << "\n"
           << "split=" << splits.train.queries.size() << "/"
           << splits.valid.queries.size() << "/" << splits.test.queries.size()
           << " (train/valid/test queries)\n";

  if (options.objective == "pointwise" || options.objective == "pairwise") {
    const ltr::Objective objective = options.objective == "pointwise"
                                         ? ltr::Objective::Pointwise
                                         : ltr::Objective::Pairwise;
    manifest << "alpha_grid=" << join_doubles(options.alpha_grid) << "\n";
    const ltr::TrainResult trained =
        train(splits.train, splits.valid, objective, model, config);
    report.queries = static_cast<int>(splits.test.queries.size());
    {
      auto ckpt = open_output(options.out + ".ckpt", report);
      trained.scorer.save(ckpt);
    }
    const ltr::EvalCurves curves = ltr::evaluate_temperature_sweep(
        trained.scorer, splits.test, model, options.alpha_grid,
        config.n_eval_samples, derive_seed(options.seed, "test-eval"),
        ltr::DisparityAxis::Document);
    write_eval_outputs(options.out, "", options.objective, curves, splits.test,
                       report);
    manifest << "ee_auc=" << io::format_g6(curves.macro_auc) << "\n";
    if (has_groups) {
      const ltr::EvalCurves dp = ltr::evaluate_temperature_sweep(
          trained.scorer, splits.test, model, options.alpha_grid,
          config.n_eval_samples, derive_seed(options.seed, "test-eval-dp"),
          ltr::DisparityAxis::Group);
      write_eval_outputs(options.out, "_dp", options.objective + "-dp", dp,
                         splits.test, report);
      manifest << "dp_ee_auc=" << io::format_g6(dp.macro_auc) << "\n";
    }
  } else if (options.objective == "ee" || options.objective == "group") {
    const ltr::Objective objective = options.objective == "ee"
                                         ? ltr::Objective::ExpectedExposure
                                         : ltr::Objective::Group;
    if (objective == ltr::Objective::Group && !has_groups) {
      throw ConfigurationError("the group objective needs --groups");
    }
    if (options.lambda_grid.empty()) {
      throw ConfigurationError("lambda grid must not be empty");
    }
    manifest << "lambda_grid=" << join_doubles(options.lambda_grid) << "\n";
    std::vector<std::vector<ltr::EvalPoint>> points_per_lambda;
    std::vector<std::vector<ltr::EvalPoint>> dp_points_per_lambda;
    report.queries = static_cast<int>(splits.test.queries.size());
    for (std::size_t li = 0; li < options.lambda_grid.size(); ++li) {
      ltr::TrainConfig lambda_config = config;
      lambda_config.lambda = options.lambda_grid[li];
      const ltr::TrainResult trained =
          train(splits.train, splits.valid, objective, model, lambda_config);
      const std::string ckpt_path = options.out + "_lambda" +
                                    io::format_g6(options.lambda_grid[li]) +
                                    ".ckpt";
      {
        auto ckpt = open_output(ckpt_path, report);
        trained.scorer.save(ckpt);
      }
      if (options.lambda_grid[li] == options.lambda) {
        auto ckpt = open_output(options.out + ".ckpt", report);
        trained.scorer.save(ckpt);
      }
      points_per_lambda.push_back(ltr::evaluate_policy_points(
          trained.scorer, splits.test, model, /*alpha=*/1.0,
          config.n_eval_samples, derive_seed(options.seed, "test-eval", li),
          ltr::DisparityAxis::Document));
      if (has_groups) {
        dp_points_per_lambda.push_back(ltr::evaluate_policy_points(
            trained.scorer, splits.test, model, /*alpha=*/1.0,
            config.n_eval_samples, derive_seed(options.seed, "test-eval-dp", li),
            ltr::DisparityAxis::Group));
      }
    }
    const ltr::EvalCurves curves =
        ltr::curves_from_points(points_per_lambda, options.lambda_grid);
    write_eval_outputs(options.out, "", options.objective, curves, splits.test,
                       report);
    manifest << "ee_auc=" << io::format_g6(curves.macro_auc) << "\n";
    if (has_groups) {
      const ltr::EvalCurves dp =
          ltr::curves_from_points(dp_points_per_lambda, options.lambda_grid);
      write_eval_outputs(options.out, "_dp", options.objective + "-dp", dp,
                         splits.test, report);
      manifest << "dp_ee_auc=" << io::format_g6(dp.macro_auc) << "\n";
    }
  } else {
    throw ConfigurationError("unknown objective '" + options.objective +
                             "' (expected ee, group, pointwise or pairwise)");
  }

  auto manifest_out = open_output(options.out + "_manifest.txt", report);
  manifest_out << manifest.str();
  return report;
}

void print_report(std::ostream& out, const CommandReport& report) {
  out << "queries evaluated: " << report.queries << "\n";
  if (!report.skipped_queries.empty()) {
    out << "skipped " << report.skipped_queries.size() << " queries:\n";
    for (const std::string& s : report.skipped_queries) out << "  " << s << "\n";
  }
  if (report.warnings > 0) {
    out << "warnings: " << report.warnings << " sweep points skipped\n";
  }
  if (report.empty_relevance > 0) {
    out << "queries with no relevant documents: " << report.empty_relevance
        << "\n";
  }
  for (const std::string& path : report.outputs) {
    out << "wrote " << path << "\n";
  }
}

}  // namespace expeval::cli
