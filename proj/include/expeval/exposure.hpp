#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <utility>

#include "expeval/browsing.hpp"
#include "expeval/judgments.hpp"
#include "expeval/policies.hpp"
#include "expeval/ranking.hpp"

namespace expeval {

/// Attention mass per pool document. Entry i belongs to judgments.pool()[i].
using ExposureVector = Eigen::VectorXd;

/// Exposure each document receives from a single ranking.
/// RBP: gamma^rank. ERR: gamma^rank times the continue probabilities of the
/// documents ranked above. Ranks >= model.depth() and documents absent from
/// the ranking get 0.
ExposureVector ranking_exposure(const BrowsingModel& model,
                                const Ranking& ranking,
                                const RelevanceJudgments& judgments);

/// Monte Carlo estimate of expected exposure: the mean of ranking_exposure
/// over n_samples independent draws. Deterministic for a fixed seed.
ExposureVector expected_exposure_mc(const Policy& policy,
                                    const BrowsingModel& model,
                                    const RelevanceJudgments& judgments,
                                    int n_samples, std::uint64_t seed);

/// Monte Carlo evaluation that also tracks the expected static metrics of
/// the sampled rankings, reusing the same draws.
struct McEvaluation {
  ExposureVector exposure;
  double expected_rbp = 0.0;
  double expected_err = 0.0;
};
McEvaluation mc_evaluate(const Policy& policy, const BrowsingModel& model,
                         const RelevanceJudgments& judgments, int n_samples,
                         std::uint64_t seed);

/// Expected exposure under the oracle policy (uniform over grade-sorted
/// permutations), in closed form. Within a grade with m docs starting at
/// position p, with q = gamma * continue(grade):
///   target = prefix * (1 - q^t) / (m * (1 - q)),  t = clamp(depth - p, 0, m)
/// where prefix = gamma^p * prod over higher grades of continue^count.
/// Positions at or beyond the depth contribute zero to the within-grade
/// average. Validated against exact enumeration of the oracle support.
ExposureVector target_exposure(const BrowsingModel& model,
                               const RelevanceJudgments& judgments);

/// Expected exposure under the uniform policy over all pool permutations,
/// in closed form. Used as the disparity floor for curve normalization.
ExposureVector uniform_expected_exposure(const BrowsingModel& model,
                                         const RelevanceJudgments& judgments);

/// Exact expectation over an explicit support: sum of probability times
/// ranking_exposure. Probabilities must sum to 1 within 1e-9.
ExposureVector exposure_over_support(
    std::span<const std::pair<Ranking, double>> support,
    const BrowsingModel& model, const RelevanceJudgments& judgments);

/// Exact expected exposure by enumerating the policy's support. The pool must
/// not exceed enumeration_cap and the policy must expose exact probabilities.
ExposureVector exact_expected_exposure(const Policy& policy,
                                       const BrowsingModel& model,
                                       const RelevanceJudgments& judgments,
                                       int enumeration_cap = 8);

/// Total exposure mass of a deterministic ranking that fills the pool:
/// sum of gamma^i over i < min(depth, pool).
double total_exposure_mass(const BrowsingModel& model, int pool_size);

}  // namespace expeval
