#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "expeval/browsing.hpp"
#include "expeval/synth.hpp"

namespace expeval::cli {

/// Browsing-model options shared by all commands. Defaults follow the
/// standard evaluation protocol: gamma 0.5, depth 20.
struct ModelOptions {
  std::string kind = "rbp";  // rbp | err
  double gamma = 0.5;
  int depth = 20;
  std::vector<double> phi;  // ERR stop probabilities for grades 1, 2, ...
};
BrowsingModel make_model(const ModelOptions& options);

struct EvalOptions {
  std::string run_path;
  std::string qrels_path;
  std::string groups_path;  // optional; adds group fairness breakdowns
  std::string out = "eval";
  ModelOptions model;
  std::string policy = "det";  // det | pl | rt | oracle
  std::vector<double> grid;    // pl/rt parameter (first value)
  int samples = 50;
  int rerank_depth = 100;
  std::uint64_t seed = 0;
  int threads = 0;  // 0 = hardware concurrency
};

struct SweepOptions {
  std::string run_path;
  std::string qrels_path;
  std::string out = "sweep";
  ModelOptions model;
  std::string policy = "pl";  // pl | rt
  std::vector<double> grid;
  int samples = 50;
  int rerank_depth = 100;
  std::uint64_t seed = 0;
  int threads = 0;
  bool statics = false;  // also write expected static metrics per point
};

struct SynthOptions {
  synth::SynthSpec spec;
  std::string out = "synth";
};

struct TrainOptions {
  std::string features_path;
  std::string groups_path;  // optional; enables the group objective and
                            // demographic-parity evaluation
  std::string out = "train";
  ModelOptions model;
  std::string objective = "ee";  // ee | group | pointwise | pairwise
  double lambda = 0.5;           // lambda of the checkpoint saved as <out>.ckpt
  std::vector<double> lambda_grid = {0.0, 0.25, 0.5, 0.75, 1.0};
  std::vector<double> alpha_grid = {0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 64.0};
  double tau = 0.1;
  int n_train_samples = 20;
  int n_eval_samples = 50;
  double learning_rate = 0.001;
  double dropout = 0.1;
  int epochs = 50;
  int patience = 5;
  std::vector<int> hidden = {256, 256};
  std::uint64_t seed = 0;
};

struct CommandReport {
  int queries = 0;                           // queries evaluated
  std::vector<std::string> skipped_queries;  // with reasons
  int warnings = 0;                          // skipped sweep grid points
  int empty_relevance = 0;                   // queries without relevant docs
  std::vector<std::string> outputs;          // files written
};

CommandReport run_eval(const EvalOptions& options);
CommandReport run_sweep(const SweepOptions& options);
CommandReport run_synth(const SynthOptions& options);
CommandReport run_train(const TrainOptions& options);

/// Human-readable summary on a stream (stderr in the CLI).
void print_report(std::ostream& out, const CommandReport& report);

}  // namespace expeval::cli
