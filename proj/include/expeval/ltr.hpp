#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "expeval/browsing.hpp"
#include "expeval/curve.hpp"
#include "expeval/judgments.hpp"
#include "expeval/metrics.hpp"
#include "expeval/rng.hpp"

namespace expeval::ltr {

/// One query of a learning-to-rank dataset.
struct LtrQuery {
  std::string query_id;
  Eigen::MatrixXd features;  // n_docs x n_features
  Eigen::VectorXi grades;    // n_docs
  std::vector<std::string> doc_ids;
  std::optional<GroupAttribution> groups;
};

struct LtrDataset {
  std::vector<LtrQuery> queries;
  int n_features = 0;
};

/// In-memory judgments for a dataset query (pool order = row order).
RelevanceJudgments to_judgments(const LtrQuery& query);

/// One affine layer; weights are out x in.
struct Layer {
  Eigen::MatrixXd weights;
  Eigen::VectorXd bias;
};

/// Fully-connected scoring network with rectified-linear hidden activations
/// and a single linear output. An empty hidden list gives a linear model.
/// score() runs in evaluation mode (no dropout) and is deterministic.
class Scorer {
 public:
  Scorer() = default;
  Scorer(int n_features, const std::vector<int>& hidden, std::uint64_t seed);

  Eigen::VectorXd score(const Eigen::MatrixXd& features) const;

  int n_features() const { return n_features_; }
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }

  /// Versioned plain-text checkpoint; see README for the format.
  void save(std::ostream& out) const;
  static Scorer load(std::istream& in);

 private:
  int n_features_ = 0;
  std::vector<Layer> layers_;
};

/// Numerically stable softmax (max subtraction).
Eigen::VectorXd softmax(const Eigen::VectorXd& scores);

/// softmax(scores + noise); the Gumbel-max construction makes sorting by the
/// perturbed values a Plackett-Luce draw over exp(scores).
Eigen::VectorXd perturbed_probs(const Eigen::VectorXd& scores,
                                const Eigen::VectorXd& noise);
Eigen::VectorXd gumbel_perturbed_probs(const Eigen::VectorXd& scores, Rng& rng);
std::vector<Eigen::VectorXd> draw_gumbel_noise(int n_docs, int n_samples,
                                               Rng& rng);

/// Differentiable rank surrogate:
///   rank(d) = sum_{d' != d} (1 + exp((p(d) - p(d')) / tau))^-1
/// Values lie in (0, n-1) and approach the true base-0 ranks as tau -> 0.
Eigen::VectorXd smooth_ranks(const Eigen::VectorXd& probs, double tau);

/// Base-0 ranks obtained by sorting keys descending (ties by index).
std::vector<int> ranks_by_descending(const Eigen::VectorXd& keys);

/// Exposure with a straight-through contract: `hard` is the forward value
/// from the true integer ranks (with depth truncation); `surrogate` is
/// gamma^smooth_rank times the same ERR stopping factor, the quantity whose
/// gradient trains the scorer.
struct StExposure {
  Eigen::VectorXd hard;
  Eigen::VectorXd surrogate;
};
StExposure exposure_from_ranks(const std::vector<int>& true_ranks,
                               const Eigen::VectorXd& smooth,
                               const Eigen::VectorXi& grades,
                               const BrowsingModel& model);

/// lambda * ||e||^2 - (1 - lambda) * e.target
double ee_objective(const Eigen::VectorXd& exposure,
                    const Eigen::VectorXd& target, double lambda);

/// lambda * ||xi||^2 - (1 - lambda) * e.target, with xi the group exposure.
double group_objective(const Eigen::VectorXd& exposure,
                       const Eigen::VectorXd& grp_exposure,
                       const Eigen::VectorXd& target, double lambda);

/// Which exposures feed the objective. StraightThrough uses the hard
/// exposures in the forward pass; Smooth uses the surrogate throughout and is
/// the function the finite-difference tests differentiate.
enum class GradPath { StraightThrough, Smooth };

/// Expected-exposure (or demographic-parity) loss for one query, with its
/// gradient with respect to the document scores. Gumbel noise is supplied by
/// the caller and treated as constant.
struct ExposureLossSpec {
  Eigen::VectorXd target;
  double lambda = 0.5;
  double tau = 0.1;
  Eigen::MatrixXd group_matrix;  // group objective when it has columns
  bool use_groups() const { return group_matrix.cols() > 0; }
};

struct ScoreObjective {
  double value = 0.0;
  Eigen::VectorXd dscores;
};
ScoreObjective exposure_loss_on_scores(const Eigen::VectorXd& scores,
                                       const ExposureLossSpec& spec,
                                       const Eigen::VectorXi& grades,
                                       const BrowsingModel& model,
                                       std::span<const Eigen::VectorXd> noise,
                                       GradPath path);

/// Same loss evaluated through the scorer, as value only or with gradients
/// for every parameter (no dropout). Used by training and by the
/// finite-difference gradient checks.
double exposure_loss_value(const Scorer& scorer,
                           const Eigen::MatrixXd& features,
                           const ExposureLossSpec& spec,
                           const Eigen::VectorXi& grades,
                           const BrowsingModel& model,
                           std::span<const Eigen::VectorXd> noise,
                           GradPath path);
struct ParameterGrads {
  double value = 0.0;
  std::vector<Layer> layers;
};
ParameterGrads exposure_loss_gradient(const Scorer& scorer,
                                      const Eigen::MatrixXd& features,
                                      const ExposureLossSpec& spec,
                                      const Eigen::VectorXi& grades,
                                      const BrowsingModel& model,
                                      std::span<const Eigen::VectorXd> noise,
                                      GradPath path);

enum class Objective { ExpectedExposure, Group, Pointwise, Pairwise };

struct TrainConfig {
  double lambda = 0.5;         // disparity-relevance tradeoff
  double tau = 0.1;            // smooth-rank temperature
  int n_train_samples = 20;    // rankings averaged per training step
  int n_eval_samples = 50;     // rankings per evaluation point
  double learning_rate = 0.001;
  double dropout = 0.1;
  int epochs = 50;
  int patience = 5;            // early-stopping patience, in epochs
  double momentum = 0.0;       // plain SGD by default
  std::vector<int> hidden = {256, 256};
  std::uint64_t seed = 0;
};

struct TrainResult {
  Scorer scorer;                    // best-validation parameters
  std::vector<double> step_losses;  // per-query training losses, in order
  int epochs_run = 0;
  int skipped_queries = 0;          // empty queries skipped with a warning
  double best_validation = std::numeric_limits<double>::infinity();
};

/// Stochastic gradient training. Expected-exposure and group objectives
/// average the exposure of n_train_samples Gumbel-perturbed rankings per
/// query and backpropagate through the smooth ranks; relevance grades enter
/// only through the target exposure. Early stopping watches the validation
/// objective.
TrainResult train(const LtrDataset& train_set, const LtrDataset& valid_set,
                  Objective objective, const BrowsingModel& model,
                  const TrainConfig& config);

/// Disparity axis for evaluation curves: per-document exposure, or group
/// exposure normalized between the equal split (0) and single-group
/// concentration (1).
enum class DisparityAxis { Document, Group };

struct EvalPoint {
  double d_norm = 0.0;
  double r_norm = 0.0;
  EEBreakdown ee;
};

/// Evaluates the stochastic policy "sort by alpha * score + Gumbel" (the
/// softmax-temperature policy with alpha = 1 / T) with n_samples rankings
/// per query; one point per query.
std::vector<EvalPoint> evaluate_policy_points(const Scorer& scorer,
                                              const LtrDataset& dataset,
                                              const BrowsingModel& model,
                                              double alpha, int n_samples,
                                              std::uint64_t seed,
                                              DisparityAxis axis);

struct EvalCurves {
  std::vector<SweepCurve> per_query;
  std::vector<double> auc;  // per query
  double macro_auc = 0.0;
};

/// Baseline evaluation: sweeps softmax sharpness over the scorer's outputs.
EvalCurves evaluate_temperature_sweep(const Scorer& scorer,
                                      const LtrDataset& dataset,
                                      const BrowsingModel& model,
                                      std::span<const double> alphas,
                                      int n_samples, std::uint64_t seed,
                                      DisparityAxis axis);

/// Assembles per-query curves from points gathered across a parameter grid
/// (one trained model per lambda, say).
EvalCurves curves_from_points(
    std::span<const std::vector<EvalPoint>> points_per_param,
    std::span<const double> params);

}  // namespace expeval::ltr
