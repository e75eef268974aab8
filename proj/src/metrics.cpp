#include "expeval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

namespace expeval {

EEBreakdown ee_breakdown(const ExposureVector& exposure,
                         const ExposureVector& target) {
  if (exposure.size() != target.size()) {
    throw DimensionError("exposure and target are over different pools (" +
                         std::to_string(exposure.size()) + " vs " +
                         std::to_string(target.size()) + " documents)");
  }
  EEBreakdown ee;
  ee.ee_l = (exposure - target).squaredNorm();
  ee.ee_d = exposure.squaredNorm();
  ee.ee_r = 2.0 * exposure.dot(target);
  ee.target_norm_sq = target.squaredNorm();
  return ee;
}

DisparityBounds disparity_bounds(const RelevanceJudgments& judgments,
                                 const BrowsingModel& model) {
  DisparityBounds bounds;
  const int limit = model.effective_depth(judgments.size());
  const double g2 = model.gamma() * model.gamma();
  // Deterministic position weights with phi = 0: sum of gamma^(2i).
  bounds.hi = -std::expm1(limit * std::log(g2)) / (1.0 - g2);
  bounds.lo = uniform_expected_exposure(model, judgments).squaredNorm();
  return bounds;
}

std::pair<double, double> normalize_with_bounds(const EEBreakdown& ee,
                                                const DisparityBounds& bounds) {
  const double range = bounds.hi - bounds.lo;
  if (!(range > 1e-15)) {
    throw DegenerateNormalizationError(
        "disparity range is empty (pool of size <= 1)");
  }
  const double d = std::clamp((ee.ee_d - bounds.lo) / range, 0.0, 1.0);
  if (!(ee.target_norm_sq > 0.0)) {
    throw DegenerateNormalizationError("target exposure has zero norm");
  }
  const double r = ee.ee_r / (2.0 * ee.target_norm_sq);
  return {d, r};
}

std::pair<double, double> normalize_curve_point(
    const EEBreakdown& ee, const RelevanceJudgments& judgments,
    const BrowsingModel& model) {
  return normalize_with_bounds(ee, disparity_bounds(judgments, model));
}

double ee_auc(const SweepCurve& curve) {
  if (curve.points.size() < 2) {
    throw InsufficientPointsError(
        "EE-AUC needs at least 2 curve points, got " +
        std::to_string(curve.points.size()));
  }
  // Deduplicate d values keeping the best r, and anchor the curve at (0, 0).
  std::map<double, double> by_d;
  by_d[0.0] = 0.0;
  for (const CurvePoint& p : curve.points) {
    auto [it, inserted] = by_d.emplace(p.d_norm, p.r_norm);
    if (!inserted) it->second = std::max(it->second, p.r_norm);
  }
  std::vector<std::pair<double, double>> pts(by_d.begin(), by_d.end());
  if (pts.back().first < 1.0) pts.emplace_back(1.0, pts.back().second);
  double area = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    area += 0.5 * (pts[i].first - pts[i - 1].first) *
            (pts[i].second + pts[i - 1].second);
  }
  return area;
}

double static_rbp(const Ranking& ranking, const RelevanceJudgments& judgments,
                  double gamma, int depth) {
  const int limit =
      std::min<long long>(depth, static_cast<long long>(ranking.size()));
  double sum = 0.0;
  double discount = 1.0;
  for (int i = 0; i < limit; ++i) {
    if (judgments.grade(ranking.order()[i]) > 0) sum += discount;
    discount *= gamma;
  }
  return (1.0 - gamma) * sum;
}

double static_err(const Ranking& ranking, const RelevanceJudgments& judgments,
                  const BrowsingModel& model) {
  const int limit =
      std::min<long long>(model.depth(), static_cast<long long>(ranking.size()));
  double sum = 0.0;
  double mass = 1.0;  // prod_{j<i} gamma * (1 - phi(g_j))
  for (int i = 0; i < limit; ++i) {
    const int g = judgments.grade(ranking.order()[i]);
    sum += model.stop_probability(g) * mass;
    mass *= model.gamma() * model.continue_probability(g);
    if (mass == 0.0) break;
  }
  return sum;
}

double generalized_entropy(const ExposureVector& exposure,
                           const RelevanceJudgments& judgments,
                           double exponent) {
  if (exposure.size() != judgments.size()) {
    throw DimensionError("exposure vector does not match the pool");
  }
  if (exponent == 0.0 || exponent == 1.0) {
    throw ConfigurationError("generalized entropy exponent must not be 0 or 1");
  }
  std::vector<double> relevant;
  for (int i = 0; i < judgments.size(); ++i) {
    if (judgments.grade(i) > 0) relevant.push_back(exposure[i]);
  }
  if (relevant.empty()) {
    throw EmptyRelevanceError("no relevant documents for query '" +
                              judgments.query_id() + "'");
  }
  double mean = 0.0;
  for (double x : relevant) mean += x;
  mean /= static_cast<double>(relevant.size());
  if (!(mean > 0.0)) {
    throw UndefinedEntropyError(
        "no exposure mass on any relevant document of query '" +
        judgments.query_id() + "'");
  }
  double sum = 0.0;
  for (double x : relevant) sum += std::pow(x / mean, exponent) - 1.0;
  return sum / (static_cast<double>(relevant.size()) * exponent * (exponent - 1.0));
}

GroupAttribution::GroupAttribution(std::vector<std::string> group_ids,
                                   Eigen::MatrixXd matrix)
    : group_ids_(std::move(group_ids)), matrix_(std::move(matrix)) {
  if (group_ids_.empty()) {
    throw ConfigurationError("group attribution needs at least one group");
  }
  if (matrix_.cols() != static_cast<Eigen::Index>(group_ids_.size())) {
    throw DimensionError("group matrix has " + std::to_string(matrix_.cols()) +
                         " columns for " + std::to_string(group_ids_.size()) +
                         " group ids");
  }
  for (Eigen::Index i = 0; i < matrix_.rows(); ++i) {
    if (matrix_.row(i).sum() <= 0.0) {
      throw ConfigurationError("document at pool index " + std::to_string(i) +
                               " belongs to no group");
    }
  }
}

GroupAttribution GroupAttribution::from_memberships(
    const RelevanceJudgments& judgments,
    std::span<const std::pair<std::string, std::string>> memberships) {
  std::vector<std::string> group_ids;
  std::unordered_map<std::string, int> group_index;
  Eigen::MatrixXd matrix = Eigen::MatrixXd::Zero(judgments.size(), 0);
  for (const auto& [doc, group] : memberships) {
    auto doc_idx = judgments.index_of(doc);
    if (!doc_idx) continue;  // attribution rows for unpooled documents
    auto [it, inserted] = group_index.emplace(group, group_ids.size());
    if (inserted) {
      group_ids.push_back(group);
      matrix.conservativeResize(Eigen::NoChange, matrix.cols() + 1);
      matrix.col(matrix.cols() - 1).setZero();
    }
    matrix(*doc_idx, it->second) = 1.0;
  }
  return GroupAttribution(std::move(group_ids), std::move(matrix));
}

Eigen::VectorXd group_exposure(const ExposureVector& exposure,
                               const GroupAttribution& groups) {
  if (exposure.size() != groups.matrix().rows()) {
    throw DimensionError("exposure vector does not match the group matrix");
  }
  return groups.matrix().transpose() * exposure;
}

Eigen::VectorXd group_target(const GroupAttribution& groups,
                             const RelevanceJudgments& judgments,
                             GroupFairnessMode mode,
                             const BrowsingModel& model) {
  const double mass = total_exposure_mass(model, judgments.size());
  const int n_groups = groups.n_groups();
  if (mode == GroupFairnessMode::DemographicParity) {
    return Eigen::VectorXd::Constant(n_groups, mass / n_groups);
  }
  const Eigen::VectorXd y = judgments.binary_relevance();
  const Eigen::VectorXd group_rel = groups.matrix().transpose() * y;
  const double total = group_rel.lpNorm<1>();
  if (!(total > 0.0)) {
    throw EmptyRelevanceError(
        "relevance-proportional group target needs at least one relevant "
        "document in query '" +
        judgments.query_id() + "'");
  }
  return mass * group_rel / total;
}

EEBreakdown group_fairness_loss(const ExposureVector& exposure,
                                const GroupAttribution& groups,
                                const RelevanceJudgments& judgments,
                                GroupFairnessMode mode,
                                const BrowsingModel& model) {
  if (exposure.size() != judgments.size()) {
    throw DimensionError("exposure vector does not match the pool");
  }
  Eigen::VectorXd xi;
  if (mode == GroupFairnessMode::DisparateImpact) {
    // Only exposure on relevant documents counts: Abar = diag(y) A.
    const Eigen::VectorXd y = judgments.binary_relevance();
    xi = groups.matrix().transpose() * (y.array() * exposure.array()).matrix();
  } else {
    xi = group_exposure(exposure, groups);
  }
  const Eigen::VectorXd xi_star = group_target(groups, judgments, mode, model);
  return ee_breakdown(xi, xi_star);
}

double intent_aware_rbp(std::span<const Ranking> samples,
                        const RelevanceJudgments& judgments,
                        const GroupAttribution& intents, double gamma,
                        int depth, std::span<const double> intent_prior) {
  if (intents.n_groups() == 0 ||
      intent_prior.size() != static_cast<std::size_t>(intents.n_groups())) {
    throw ConfigurationError("intent prior does not match the intent set");
  }
  double prior_sum = 0.0;
  for (double p : intent_prior) prior_sum += p;
  if (std::abs(prior_sum - 1.0) > 1e-9) {
    throw ConfigurationError("intent prior must sum to 1");
  }
  if (samples.empty()) {
    throw ConfigurationError("intent-aware RBP needs at least one sample");
  }
  double total = 0.0;
  for (const Ranking& ranking : samples) {
    const int limit =
        std::min<long long>(depth, static_cast<long long>(ranking.size()));
    double value = 0.0;
    double discount = 1.0;
    for (int i = 0; i < limit; ++i) {
      const int doc = ranking.order()[i];
      if (judgments.grade(doc) > 0) {
        for (int a = 0; a < intents.n_groups(); ++a) {
          if (intents.matrix()(doc, a) > 0.0) {
            value += intent_prior[a] * discount;
          }
        }
      }
      discount *= gamma;
    }
    total += (1.0 - gamma) * value;
  }
  return total / static_cast<double>(samples.size());
}

}  // namespace expeval
