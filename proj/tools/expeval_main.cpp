#include <CLI11.hpp>
#include <iostream>

#include "expeval/cli.hpp"

namespace {

void add_model_options(CLI::App* cmd, expeval::cli::ModelOptions* model) {
  cmd->add_option("--model", model->kind, "Browsing model: rbp or err")
      ->check(CLI::IsMember({"rbp", "err"}))
      ->capture_default_str();
  cmd->add_option("--gamma", model->gamma, "Patience parameter in (0, 1)")
      ->capture_default_str();
  cmd->add_option("--depth", model->depth, "Evaluation depth (ranks beyond get no exposure)")
      ->capture_default_str();
  cmd->add_option("--phi", model->phi,
                  "ERR stop probabilities for grades 1, 2, ... "
                  "(default 1 - 2^-g)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Expected-exposure evaluation of stochastic rankings"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Key-value config file (flag names as keys)");

  expeval::cli::EvalOptions eval_options;
  CLI::App* eval_cmd = app.add_subcommand(
      "eval", "Score a run against judgments under one policy");
  eval_cmd->add_option("--run", eval_options.run_path, "TREC run file")->required();
  eval_cmd->add_option("--qrels", eval_options.qrels_path, "TREC qrels file")->required();
  eval_cmd->add_option("--groups", eval_options.groups_path,
                       "Group attribute file (adds group fairness breakdowns)");
  eval_cmd->add_option("--out", eval_options.out, "Output prefix")->capture_default_str();
  add_model_options(eval_cmd, &eval_options.model);
  eval_cmd->add_option("--policy", eval_options.policy, "det, pl, rt or oracle")
      ->check(CLI::IsMember({"det", "pl", "rt", "oracle"}))
      ->capture_default_str();
  eval_cmd->add_option("--grid", eval_options.grid,
                       "Policy parameter (first value used for pl/rt)");
  eval_cmd->add_option("--samples", eval_options.samples, "Rankings sampled per query")
      ->capture_default_str();
  eval_cmd->add_option("--rerank-depth", eval_options.rerank_depth,
                       "Documents rerandomized from the top of the run")
      ->capture_default_str();
  eval_cmd->add_option("--seed", eval_options.seed, "RNG seed")->capture_default_str();
  eval_cmd->add_option("--threads", eval_options.threads,
                       "Worker threads (0 = hardware)")
      ->capture_default_str();

  expeval::cli::SweepOptions sweep_options;
  CLI::App* sweep_cmd = app.add_subcommand(
      "sweep", "Trace a disparity-relevance curve over a parameter grid");
  sweep_cmd->add_option("--run", sweep_options.run_path, "TREC run file")->required();
  sweep_cmd->add_option("--qrels", sweep_options.qrels_path, "TREC qrels file")->required();
  sweep_cmd->add_option("--out", sweep_options.out, "Output prefix")->capture_default_str();
  add_model_options(sweep_cmd, &sweep_options.model);
  sweep_cmd->add_option("--policy", sweep_options.policy, "pl or rt")
      ->check(CLI::IsMember({"pl", "rt"}))
      ->capture_default_str();
  sweep_cmd->add_option("--grid", sweep_options.grid, "Parameter grid")->required();
  sweep_cmd->add_option("--samples", sweep_options.samples, "Rankings sampled per point")
      ->capture_default_str();
  sweep_cmd->add_option("--rerank-depth", sweep_options.rerank_depth,
                        "Documents rerandomized from the top of the run")
      ->capture_default_str();
  sweep_cmd->add_option("--seed", sweep_options.seed, "RNG seed")->capture_default_str();
  sweep_cmd->add_option("--threads", sweep_options.threads,
                        "Worker threads (0 = hardware)")
      ->capture_default_str();
  sweep_cmd->add_flag("--static-metrics", sweep_options.statics,
                      "Also write expected static RBP/ERR per point");

  expeval::cli::SynthOptions synth_options;
  CLI::App* synth_cmd = app.add_subcommand(
      "synth", "Generate a synthetic run, qrels, features and groups");
  synth_cmd->add_option("--queries", synth_options.spec.n_queries, "Number of queries")
      ->capture_default_str();
  synth_cmd->add_option("--pool", synth_options.spec.pool_size, "Documents per query")
      ->capture_default_str();
  synth_cmd->add_option("--grade-counts", synth_options.spec.grade_counts,
                        "Documents per grade, lowest grade first (sums to pool)")
      ->capture_default_str();
  synth_cmd->add_option("--noise", synth_options.spec.noise,
                        "Gaussian noise on scores and on the latent utility")
      ->capture_default_str();
  synth_cmd->add_option("--features", synth_options.spec.n_features,
                        "Feature dimensionality")
      ->capture_default_str();
  synth_cmd->add_option("--groups-count", synth_options.spec.n_groups,
                        "Number of synthetic groups (0 = none)")
      ->capture_default_str();
  synth_cmd->add_option("--seed", synth_options.spec.seed, "RNG seed")
      ->capture_default_str();
  synth_cmd->add_option("--run-tag", synth_options.spec.run_tag, "Run tag")
      ->capture_default_str();
  synth_cmd->add_option("--out", synth_options.out, "Output prefix")->capture_default_str();

  expeval::cli::TrainOptions train_options;
  CLI::App* train_cmd = app.add_subcommand(
      "train", "Train a scoring model and evaluate its stochastic rankings");
  train_cmd->add_option("--features", train_options.features_path,
                        "SVMlight-style feature file")
      ->required();
  train_cmd->add_option("--groups", train_options.groups_path,
                        "Group attribute file (needed for the group objective)");
  train_cmd->add_option("--out", train_options.out, "Output prefix")->capture_default_str();
  add_model_options(train_cmd, &train_options.model);
  train_cmd->add_option("--objective", train_options.objective,
                        "ee, group, pointwise or pairwise")
      ->check(CLI::IsMember({"ee", "group", "pointwise", "pairwise"}))
      ->capture_default_str();
  train_cmd->add_option("--lambda", train_options.lambda,
                        "Tradeoff of the checkpoint saved as <out>.ckpt")
      ->capture_default_str();
  train_cmd->add_option("--lambda-grid", train_options.lambda_grid,
                        "Tradeoff grid for ee/group objectives");
  train_cmd->add_option("--grid", train_options.alpha_grid,
                        "Softmax sharpness grid for baseline evaluation");
  train_cmd->add_option("--tau", train_options.tau, "Smooth-rank temperature")
      ->capture_default_str();
  train_cmd->add_option("--train-samples", train_options.n_train_samples,
                        "Rankings averaged per training step")
      ->capture_default_str();
  train_cmd->add_option("--samples", train_options.n_eval_samples,
                        "Rankings sampled per evaluation point")
      ->capture_default_str();
  train_cmd->add_option("--lr", train_options.learning_rate, "Learning rate")
      ->capture_default_str();
  train_cmd->add_option("--dropout", train_options.dropout, "Dropout rate")
      ->capture_default_str();
  train_cmd->add_option("--epochs", train_options.epochs, "Epoch budget")
      ->capture_default_str();
  train_cmd->add_option("--patience", train_options.patience,
                        "Early-stopping patience in epochs")
      ->capture_default_str();
  train_cmd->add_option("--hidden", train_options.hidden,
                        "Hidden layer sizes (empty = linear model)")
      ->capture_default_str();
  train_cmd->add_option("--seed", train_options.seed, "RNG seed")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    expeval::cli::CommandReport report;
    if (*eval_cmd) report = expeval::cli::run_eval(eval_options);
    if (*sweep_cmd) report = expeval::cli::run_sweep(sweep_options);
    if (*synth_cmd) report = expeval::cli::run_synth(synth_options);
    if (*train_cmd) report = expeval::cli::run_train(train_options);
    expeval::cli::print_report(std::cerr, report);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
