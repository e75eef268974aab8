#pragma once

// Shared helpers and independent oracles for the test suites. The oracles
// recompute quantities from their definitions with different loop structures
// than the library, so agreement is meaningful.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "expeval/exposure.hpp"
#include "expeval/judgments.hpp"
#include "expeval/policies.hpp"

namespace testutil {

inline expeval::RelevanceJudgments make_judgments(
    const std::vector<int>& grades, const std::string& query_id = "q1") {
  std::vector<std::pair<std::string, int>> docs;
  for (std::size_t i = 0; i < grades.size(); ++i) {
    docs.emplace_back("d" + std::to_string(i), grades[i]);
  }
  return expeval::RelevanceJudgments(query_id, docs);
}

/// Run over the judgment pool; scores default to pool-index descending.
inline expeval::ScoredRun make_run(const expeval::RelevanceJudgments& judgments,
                                   std::vector<double> scores = {}) {
  if (scores.empty()) {
    for (int i = 0; i < judgments.size(); ++i) {
      scores.push_back(static_cast<double>(judgments.size() - i));
    }
  }
  expeval::ScoredRun run;
  run.query_id = judgments.query_id();
  run.run_tag = "test";
  for (int i = 0; i < judgments.size(); ++i) {
    run.entries.emplace_back(judgments.pool()[i], scores[i]);
  }
  std::sort(run.entries.begin(), run.entries.end(),
            [](const auto& a, const auto& b) {
              if (a.second != b.second) return a.second > b.second;
              return a.first < b.first;
            });
  return run;
}

/// Definition-level exposure: per document, find its rank by scanning and
/// multiply the predecessors' continue probabilities one by one.
inline Eigen::VectorXd naive_exposure(const expeval::BrowsingModel& model,
                                      const std::vector<int>& order,
                                      const expeval::RelevanceJudgments& j) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(j.size());
  for (int doc = 0; doc < j.size(); ++doc) {
    int rank = -1;
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      if (order[pos] == doc) {
        rank = static_cast<int>(pos);
        break;
      }
    }
    if (rank < 0 || rank >= model.depth()) continue;
    double value = std::pow(model.gamma(), rank);
    for (int pos = 0; pos < rank; ++pos) {
      value *= 1.0 - model.stop_probability(j.grade(order[pos]));
    }
    out[doc] = value;
  }
  return out;
}

inline std::vector<std::vector<int>> all_permutations(int n) {
  std::vector<int> base(n);
  std::iota(base.begin(), base.end(), 0);
  std::vector<std::vector<int>> out;
  do {
    out.push_back(base);
  } while (std::next_permutation(base.begin(), base.end()));
  return out;
}

/// Sequential-definition Plackett-Luce probability of drawing `order`, where
/// weights[i] is the sampling weight of the document placed at order[i]'s
/// pool index... weights are indexed by pool index.
inline double pl_probability(const std::vector<int>& order,
                             const std::vector<double>& weights) {
  double remaining = 0.0;
  for (double w : weights) remaining += w;
  double prob = 1.0;
  for (int doc : order) {
    prob *= weights[doc] / remaining;
    remaining -= weights[doc];
  }
  return prob;
}

inline double pearson(const std::vector<double>& xs,
                      const std::vector<double>& ys) {
  const auto n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

/// Upper critical value of chi-square at significance 0.01. Exact table for
/// small df, Wilson-Hilferty beyond it.
inline double chi2_critical_01(int df) {
  static const double table[] = {6.635, 9.210,  11.345, 13.277, 15.086,
                                 16.812, 18.475, 20.090, 21.666, 23.209};
  if (df >= 1 && df <= 10) return table[df - 1];
  const double z = 2.3263478740408408;  // 99th percentile of N(0, 1)
  const double t = 1.0 - 2.0 / (9.0 * df) + z * std::sqrt(2.0 / (9.0 * df));
  return df * t * t * t;
}

/// Chi-square goodness-of-fit statistic of observed counts vs probabilities.
inline double chi2_statistic(const std::vector<long>& observed,
                             const std::vector<double>& probs, long total) {
  double stat = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double expected = probs[i] * static_cast<double>(total);
    const double diff = static_cast<double>(observed[i]) - expected;
    stat += diff * diff / expected;
  }
  return stat;
}

}  // namespace testutil
