#include "expeval/policies.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "expeval/exposure.hpp"
#include "expeval/metrics.hpp"

namespace expeval {

namespace {

std::vector<int> map_run_to_pool(const ScoredRun& run,
                                 const RelevanceJudgments& judgments) {
  if (run.entries.empty()) {
    throw ConfigurationError("run for query '" + run.query_id + "' is empty");
  }
  std::vector<int> order;
  order.reserve(run.entries.size());
  for (const auto& [doc, score] : run.entries) {
    (void)score;
    auto idx = judgments.index_of(doc);
    if (!idx) {
      throw JudgmentMismatchError(
          "run document '" + doc + "' is not in the pool of query '" +
          judgments.query_id() +
          "' (merge retrieved documents into the pool first)");
    }
    order.push_back(*idx);
  }
  return order;
}

int clamp_rerank_depth(int rerank_depth, std::size_t run_length) {
  if (rerank_depth < 1) {
    throw ConfigurationError("rerank depth must be a positive integer");
  }
  return std::min<int>(rerank_depth, static_cast<int>(run_length));
}

}  // namespace

Policy Policy::deterministic(const ScoredRun& run,
                             const RelevanceJudgments& judgments) {
  Policy p;
  p.kind_ = Kind::Deterministic;
  p.base_order_ = map_run_to_pool(run, judgments);
  p.rerank_k_ = static_cast<int>(p.base_order_.size());
  p.pool_size_ = judgments.size();
  return p;
}

Policy Policy::plackett_luce(const ScoredRun& run,
                             const RelevanceJudgments& judgments, double alpha,
                             int rerank_depth) {
  if (alpha < 0.0) {
    throw ConfigurationError("Plackett-Luce alpha must be nonnegative");
  }
  Policy p;
  p.kind_ = Kind::PlackettLuce;
  p.param_ = alpha;
  p.base_order_ = map_run_to_pool(run, judgments);
  p.rerank_k_ = clamp_rerank_depth(rerank_depth, p.base_order_.size());
  p.pool_size_ = judgments.size();

  std::vector<double> scores;
  scores.reserve(run.entries.size());
  for (const auto& [doc, score] : run.entries) scores.push_back(score);
  const auto [min_it, max_it] = std::minmax_element(scores.begin(), scores.end());
  if (*min_it <= 0.0) {
    const double shift = -*min_it + 1e-6 * (*max_it - *min_it);
    for (double& s : scores) s += shift;
  }
  if (*std::max_element(scores.begin(), scores.end()) <= 0.0) {
    throw DegenerateScoresError("all scores are zero after preprocessing");
  }
  // s^alpha can underflow for large alpha, so the weights live in log space.
  p.log_weights_.resize(static_cast<std::size_t>(p.rerank_k_));
  for (int i = 0; i < p.rerank_k_; ++i) {
    p.log_weights_[i] = alpha == 0.0 ? 0.0 : alpha * std::log(scores[i]);
  }
  return p;
}

Policy Policy::rank_transposition(const ScoredRun& run,
                                  const RelevanceJudgments& judgments,
                                  double beta, int rerank_depth) {
  if (!(beta > 0.0 && beta <= 1.0)) {
    throw ConfigurationError("restart probability beta must lie in (0, 1]");
  }
  Policy p;
  p.kind_ = Kind::RankTransposition;
  p.param_ = beta;
  p.base_order_ = map_run_to_pool(run, judgments);
  p.rerank_k_ = clamp_rerank_depth(rerank_depth, p.base_order_.size());
  p.pool_size_ = judgments.size();
  return p;
}

Policy Policy::oracle(const RelevanceJudgments& judgments) {
  Policy p;
  p.kind_ = Kind::Oracle;
  p.pool_size_ = judgments.size();
  p.rerank_k_ = judgments.size();
  for (int g = judgments.max_grade(); g >= 0; --g) {
    if (judgments.count_at(g) == 0) continue;
    std::vector<int> block;
    for (int i = 0; i < judgments.size(); ++i) {
      if (judgments.grade(i) == g) block.push_back(i);
    }
    p.grade_blocks_.push_back(std::move(block));
  }
  for (const auto& block : p.grade_blocks_) {
    p.base_order_.insert(p.base_order_.end(), block.begin(), block.end());
  }
  return p;
}

Ranking Policy::sample(Rng& rng) const {
  switch (kind_) {
    case Kind::Deterministic:
      return Ranking::unchecked(base_order_);
    case Kind::PlackettLuce:
      return sample_plackett_luce(rng);
    case Kind::RankTransposition:
      return sample_rank_transposition(rng);
    case Kind::Oracle:
      return sample_oracle(rng);
  }
  throw ConfigurationError("unknown policy kind");
}

Ranking Policy::sample_plackett_luce(Rng& rng) const {
  // Sorting by Gumbel-perturbed log weights draws a permutation with exactly
  // the sequential-renormalization probabilities.
  const int k = rerank_k_;
  std::vector<std::pair<double, int>> keys(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    keys[i] = {log_weights_[i] + gumbel(rng), i};
  }
  std::sort(keys.begin(), keys.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<int> order;
  order.reserve(base_order_.size());
  for (const auto& [key, pos] : keys) {
    (void)key;
    order.push_back(base_order_[pos]);
  }
  for (std::size_t i = static_cast<std::size_t>(k); i < base_order_.size(); ++i) {
    order.push_back(base_order_[i]);
  }
  return Ranking::unchecked(std::move(order));
}

Ranking Policy::sample_rank_transposition(Rng& rng) const {
  std::vector<int> order = base_order_;
  const auto k = static_cast<std::size_t>(rerank_k_);
  const std::uint64_t swaps = geometric(rng, param_);
  for (std::uint64_t s = 0; s < swaps; ++s) {
    const std::size_t a = uniform_index(rng, k);
    const std::size_t b = uniform_index(rng, k);
    std::swap(order[a], order[b]);
  }
  return Ranking::unchecked(std::move(order));
}

Ranking Policy::sample_oracle(Rng& rng) const {
  std::vector<int> order;
  order.reserve(base_order_.size());
  for (const auto& block : grade_blocks_) {
    const std::size_t start = order.size();
    order.insert(order.end(), block.begin(), block.end());
    fisher_yates(order.begin() + start, order.end(), rng);
  }
  return Ranking::unchecked(std::move(order));
}

void Policy::for_each_support(
    const std::function<void(const Ranking&, double)>& visit) const {
  if (kind_ == Kind::Deterministic) {
    visit(Ranking::unchecked(base_order_), 1.0);
    return;
  }
  if (kind_ == Kind::PlackettLuce) {
    const int k = rerank_k_;
    const double max_logw =
        *std::max_element(log_weights_.begin(), log_weights_.end());
    std::vector<double> weights(static_cast<std::size_t>(k));
    double weight_sum = 0.0;
    for (int i = 0; i < k; ++i) {
      weights[i] = std::exp(log_weights_[i] - max_logw);
      weight_sum += weights[i];
    }
    std::vector<int> prefix;
    prefix.reserve(static_cast<std::size_t>(k));
    std::vector<char> used(static_cast<std::size_t>(k), 0);
    auto rec = [&](auto&& self, double prob, double remaining) -> void {
      if (static_cast<int>(prefix.size()) == k) {
        std::vector<int> order;
        order.reserve(base_order_.size());
        for (int pos : prefix) order.push_back(base_order_[pos]);
        for (std::size_t i = static_cast<std::size_t>(k);
             i < base_order_.size(); ++i) {
          order.push_back(base_order_[i]);
        }
        visit(Ranking::unchecked(std::move(order)), prob);
        return;
      }
      for (int i = 0; i < k; ++i) {
        if (used[i]) continue;
        const double p = weights[i] / remaining;
        if (p == 0.0) continue;  // unreachable branch, probability zero
        used[i] = 1;
        prefix.push_back(i);
        self(self, prob * p, remaining - weights[i]);
        prefix.pop_back();
        used[i] = 0;
      }
    };
    rec(rec, 1.0, weight_sum);
    return;
  }
  if (kind_ == Kind::Oracle) {
    double prob = 1.0;
    for (const auto& block : grade_blocks_) {
      for (std::size_t m = 2; m <= block.size(); ++m) {
        prob /= static_cast<double>(m);
      }
    }
    std::vector<std::vector<int>> perms = grade_blocks_;
    while (true) {
      std::vector<int> order;
      order.reserve(base_order_.size());
      for (const auto& block : perms) {
        order.insert(order.end(), block.begin(), block.end());
      }
      visit(Ranking::unchecked(std::move(order)), prob);
      // Odometer over per-block permutations.
      int b = static_cast<int>(perms.size()) - 1;
      while (b >= 0 && !std::next_permutation(perms[b].begin(), perms[b].end())) {
        --b;
      }
      if (b < 0) break;
    }
    return;
  }
  throw ConfigurationError(
      "rank-transposition policies have no exact enumeration");
}

std::vector<std::pair<Ranking, double>> Policy::enumerate_support() const {
  std::vector<std::pair<Ranking, double>> out;
  for_each_support([&](const Ranking& ranking, double prob) {
    out.emplace_back(ranking, prob);
  });
  return out;
}

SweepCurve sweep(const ScoredRun& run, const RelevanceJudgments& judgments,
                 const BrowsingModel& model, PolicyFamily family,
                 std::span<const double> grid, const SweepOptions& options) {
  SweepCurve curve;
  const ExposureVector target = target_exposure(model, judgments);
  const DisparityBounds bounds = disparity_bounds(judgments, model);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    try {
      const Policy policy =
          family == PolicyFamily::PlackettLuce
              ? Policy::plackett_luce(run, judgments, grid[i],
                                      options.rerank_depth)
              : Policy::rank_transposition(run, judgments, grid[i],
                                           options.rerank_depth);
      const McEvaluation mc = mc_evaluate(policy, model, judgments,
                                          options.n_samples,
                                          derive_seed(options.seed, "sweep", i));
      CurvePoint point;
      point.param = grid[i];
      point.ee = ee_breakdown(mc.exposure, target);
      std::tie(point.d_norm, point.r_norm) =
          normalize_with_bounds(point.ee, bounds);
      point.expected_rbp = mc.expected_rbp;
      point.expected_err = mc.expected_err;
      curve.points.push_back(point);
    } catch (const Error&) {
      ++curve.warnings;
    }
  }
  std::stable_sort(curve.points.begin(), curve.points.end(),
                   [](const CurvePoint& a, const CurvePoint& b) {
                     return a.d_norm < b.d_norm;
                   });
  return curve;
}

}  // namespace expeval
