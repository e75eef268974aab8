#pragma once

#include <Eigen/Core>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "expeval/curve.hpp"
#include "expeval/exposure.hpp"

namespace expeval {

/// Squared-error breakdown of a system exposure against a target exposure.
/// Both vectors must live over the same pool.
EEBreakdown ee_breakdown(const ExposureVector& exposure,
                         const ExposureVector& target);

/// Disparity bounds used to place a breakdown on the [0, 1] disparity axis:
/// hi is the squared norm of the deterministic position weights gamma^i
/// (the ERR bound uses phi = 0), lo the squared norm of the uniform policy's
/// expected exposure.
struct DisparityBounds {
  double lo = 0.0;
  double hi = 0.0;
};
DisparityBounds disparity_bounds(const RelevanceJudgments& judgments,
                                 const BrowsingModel& model);

/// Maps a breakdown to (d_norm, r_norm): d_norm = (ee_d - lo) / (hi - lo)
/// clipped to [0, 1]; r_norm = e.t / t.t, so the oracle policy sits at 1.
/// Pools of size <= 1 have no disparity range and raise
/// DegenerateNormalizationError.
std::pair<double, double> normalize_curve_point(
    const EEBreakdown& ee, const RelevanceJudgments& judgments,
    const BrowsingModel& model);

/// Same mapping with precomputed bounds, for sweeps over one query.
std::pair<double, double> normalize_with_bounds(const EEBreakdown& ee,
                                                const DisparityBounds& bounds);

/// Rank-biased precision of a single ranking with binarized grades:
/// (1 - gamma) * sum of gamma^i over relevant positions i < depth.
double static_rbp(const Ranking& ranking, const RelevanceJudgments& judgments,
                  double gamma, int depth = kUnboundedDepth);

/// Expected reciprocal rank of a single ranking under the model's stop
/// probabilities: sum over i < depth of phi(g_i) * prod_{j<i} gamma *
/// (1 - phi(g_j)).
double static_err(const Ranking& ranking, const RelevanceJudgments& judgments,
                  const BrowsingModel& model);

/// Generalized entropy of exposure over the relevant documents:
///   GE(a) = 1 / (n a (a-1)) * sum_i ((x_i / mean)^a - 1)
/// Zero iff all relevant exposures are equal. Requires at least one relevant
/// document and positive mean exposure on the relevant set.
double generalized_entropy(const ExposureVector& exposure,
                           const RelevanceJudgments& judgments,
                           double exponent = 2.0);

/// Document-to-group assignment matrix (n x G, binary). A document may belong
/// to several groups; every document belongs to at least one.
class GroupAttribution {
 public:
  GroupAttribution(std::vector<std::string> group_ids, Eigen::MatrixXd matrix);

  /// Builds from (doc id, group id) membership pairs; group column order is
  /// first appearance. Every pool document needs at least one row.
  static GroupAttribution from_memberships(
      const RelevanceJudgments& judgments,
      std::span<const std::pair<std::string, std::string>> memberships);

  const std::vector<std::string>& group_ids() const { return group_ids_; }
  const Eigen::MatrixXd& matrix() const { return matrix_; }
  int n_groups() const { return static_cast<int>(group_ids_.size()); }

 private:
  std::vector<std::string> group_ids_;
  Eigen::MatrixXd matrix_;
};

enum class GroupFairnessMode { DemographicParity, DisparateTreatment, DisparateImpact };

/// Total group exposure, A^T e.
Eigen::VectorXd group_exposure(const ExposureVector& exposure,
                               const GroupAttribution& groups);

/// Group target for a fairness mode, with s the model's total deterministic
/// exposure mass over the pool:
///   demographic parity:  equal split, s / G per group
///   disparate treatment: s * A^T y / |A^T y|_1 with binary relevance y
///   disparate impact:    s * Abar^T y / |Abar^T y|_1, Abar = diag(y) A
Eigen::VectorXd group_target(const GroupAttribution& groups,
                             const RelevanceJudgments& judgments,
                             GroupFairnessMode mode, const BrowsingModel& model);

/// Squared-error breakdown between group exposure and the group target. For
/// disparate impact the group exposure is Abar^T e (only relevant documents'
/// exposure counts).
EEBreakdown group_fairness_loss(const ExposureVector& exposure,
                                const GroupAttribution& groups,
                                const RelevanceJudgments& judgments,
                                GroupFairnessMode mode,
                                const BrowsingModel& model);

/// Intent-aware RBP averaged over sampled rankings: sum over intents of
/// prior(i) * static RBP computed with relevance restricted to documents
/// that carry intent i (and are relevant). The prior must sum to 1.
double intent_aware_rbp(std::span<const Ranking> samples,
                        const RelevanceJudgments& judgments,
                        const GroupAttribution& intents, double gamma,
                        int depth, std::span<const double> intent_prior);

}  // namespace expeval
