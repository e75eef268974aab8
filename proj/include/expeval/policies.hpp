#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "expeval/browsing.hpp"
#include "expeval/curve.hpp"
#include "expeval/judgments.hpp"
#include "expeval/ranking.hpp"
#include "expeval/rng.hpp"

namespace expeval {

/// A retrieval run for one query: documents with scores, sorted by
/// descending score. Ties keep the order they were given in (the run parser
/// orders ties by ascending document id).
struct ScoredRun {
  std::string query_id;
  std::vector<std::pair<std::string, double>> entries;  // (doc id, score)
  std::string run_tag;
};

/// A sampler of rankings for one query.
///
/// Deterministic, Plackett-Luce and rank-transposition policies rerank (the
/// top of) a scored run; the oracle policy shuffles the judged pool within
/// grade blocks. Policies are immutable; sampling takes a caller-owned RNG so
/// concurrent use gets independent streams.
class Policy {
 public:
  enum class Kind { Deterministic, PlackettLuce, RankTransposition, Oracle };

  static Policy deterministic(const ScoredRun& run,
                              const RelevanceJudgments& judgments);

  /// Plackett-Luce: sequential sampling without replacement with
  /// p(d) proportional to s_d^alpha over the top rerank_depth documents.
  /// Scores are shifted positive when any is <= 0 (shift = -min + 1e-6 *
  /// range) and the weights are handled in log space.
  static Policy plackett_luce(const ScoredRun& run,
                              const RelevanceJudgments& judgments, double alpha,
                              int rerank_depth = 100);

  /// Rank transpositions: k ~ Geometric(beta), then k uniformly random
  /// position swaps within the top rerank_depth. Swap positions are drawn
  /// with replacement and may coincide (a no-op swap).
  static Policy rank_transposition(const ScoredRun& run,
                                   const RelevanceJudgments& judgments,
                                   double beta, int rerank_depth = 100);

  /// Documents sorted by descending grade, ties within a grade shuffled
  /// uniformly. Its expected exposure is the target exposure.
  static Policy oracle(const RelevanceJudgments& judgments);

  Kind kind() const { return kind_; }
  double parameter() const { return param_; }
  int rerank_depth() const { return rerank_k_; }
  int pool_size() const { return pool_size_; }

  Ranking sample(Rng& rng) const;

  /// True when exact per-permutation probabilities are available
  /// (deterministic, Plackett-Luce, oracle).
  bool enumerable() const { return kind_ != Kind::RankTransposition; }

  /// Visits every ranking in the support with its exact probability.
  void for_each_support(
      const std::function<void(const Ranking&, double)>& visit) const;

  /// Materialized support; intended for small pools and tests.
  std::vector<std::pair<Ranking, double>> enumerate_support() const;

 private:
  Policy() = default;

  Ranking sample_plackett_luce(Rng& rng) const;
  Ranking sample_rank_transposition(Rng& rng) const;
  Ranking sample_oracle(Rng& rng) const;

  Kind kind_ = Kind::Deterministic;
  double param_ = 0.0;
  int rerank_k_ = 0;    // effective rerank depth (clamped to run length)
  int pool_size_ = 0;
  std::vector<int> base_order_;        // pool indices, descending score
  std::vector<double> log_weights_;    // alpha * log(shifted score), PL only
  std::vector<std::vector<int>> grade_blocks_;  // oracle only, by desc grade
};

enum class PolicyFamily { PlackettLuce, RankTransposition };

struct SweepOptions {
  int n_samples = 50;
  int rerank_depth = 100;
  std::uint64_t seed = 0;
};

/// Sweeps a randomization parameter grid: for each value, estimates expected
/// exposure by Monte Carlo, scores it against the target exposure, and
/// normalizes onto the disparity-relevance plane. Failed grid points are
/// skipped and counted in SweepCurve::warnings.
SweepCurve sweep(const ScoredRun& run, const RelevanceJudgments& judgments,
                 const BrowsingModel& model, PolicyFamily family,
                 std::span<const double> grid, const SweepOptions& options);

}  // namespace expeval
