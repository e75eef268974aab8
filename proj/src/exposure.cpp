#include "expeval/exposure.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "expeval/metrics.hpp"

namespace expeval {

namespace {

// Adds weight times the exposure of `order` into acc. Indices must be valid.
template <typename Vec>
void accumulate_exposure(const BrowsingModel& model,
                         const std::vector<int>& order,
                         const RelevanceJudgments& judgments, double weight,
                         Vec& acc) {
  const int limit =
      std::min<long long>(model.depth(), static_cast<long long>(order.size()));
  const double gamma = model.gamma();
  double mass = weight;  // weight * gamma^i * prod of continue probabilities
  for (int i = 0; i < limit; ++i) {
    const int doc = order[i];
    acc[doc] += mass;
    mass *= gamma * model.continue_probability(judgments.grade(doc));
    if (mass == 0.0) break;
  }
}

void check_ranking(const Ranking& ranking, const RelevanceJudgments& judgments) {
  const int n = judgments.size();
  for (int doc : ranking.order()) {
    if (doc < 0 || doc >= n) {
      throw JudgmentMismatchError(
          "ranking refers to a document outside the pool of query '" +
          judgments.query_id() + "'");
    }
  }
}

}  // namespace

ExposureVector ranking_exposure(const BrowsingModel& model,
                                const Ranking& ranking,
                                const RelevanceJudgments& judgments) {
  check_ranking(ranking, judgments);
  ExposureVector out = ExposureVector::Zero(judgments.size());
  accumulate_exposure(model, ranking.order(), judgments, 1.0, out);
  return out;
}

McEvaluation mc_evaluate(const Policy& policy, const BrowsingModel& model,
                         const RelevanceJudgments& judgments, int n_samples,
                         std::uint64_t seed) {
  if (n_samples < 1) {
    throw ConfigurationError("n_samples must be at least 1");
  }
  Rng rng = make_rng(seed, "mc");
  McEvaluation result;
  result.exposure = ExposureVector::Zero(judgments.size());
  for (int k = 0; k < n_samples; ++k) {
    const Ranking ranking = policy.sample(rng);
    accumulate_exposure(model, ranking.order(), judgments, 1.0,
                        result.exposure);
    result.expected_rbp +=
        static_rbp(ranking, judgments, model.gamma(), model.depth());
    result.expected_err += static_err(ranking, judgments, model);
  }
  result.exposure /= static_cast<double>(n_samples);
  result.expected_rbp /= static_cast<double>(n_samples);
  result.expected_err /= static_cast<double>(n_samples);
  return result;
}

ExposureVector expected_exposure_mc(const Policy& policy,
                                    const BrowsingModel& model,
                                    const RelevanceJudgments& judgments,
                                    int n_samples, std::uint64_t seed) {
  return mc_evaluate(policy, model, judgments, n_samples, seed).exposure;
}

ExposureVector target_exposure(const BrowsingModel& model,
                               const RelevanceJudgments& judgments) {
  const int n = judgments.size();
  const double gamma = model.gamma();
  std::vector<double> per_grade(static_cast<std::size_t>(judgments.max_grade()) + 1,
                                0.0);
  double prefix = 1.0;  // gamma^start * prod over higher grades of c^count
  int start = 0;
  for (int g = judgments.max_grade(); g >= 0; --g) {
    const int m = judgments.count_at(g);
    if (m == 0) continue;
    const double q = gamma * model.continue_probability(g);
    const long long t_max = std::clamp<long long>(
        static_cast<long long>(model.depth()) - start, 0, m);
    // sum_{t < t_max} q^t = (1 - q^t_max) / (1 - q), q < 1 always
    const double block_sum =
        -std::expm1(static_cast<double>(t_max) * std::log(q)) / (1.0 - q);
    per_grade[g] = prefix * block_sum / static_cast<double>(m);
    prefix *= std::exp(static_cast<double>(m) * std::log(q));
    start += m;
  }
  ExposureVector out(n);
  for (int i = 0; i < n; ++i) out[i] = per_grade[judgments.grade(i)];
  return out;
}

ExposureVector uniform_expected_exposure(const BrowsingModel& model,
                                         const RelevanceJudgments& judgments) {
  const int n = judgments.size();
  const double gamma = model.gamma();
  const int limit = model.effective_depth(n);

  if (model.kind() == BrowsingModel::Kind::Rbp) {
    return ExposureVector::Constant(n, total_exposure_mass(model, n) / n);
  }

  // Under ERR the expected stopping of the documents ranked above matters.
  // With d fixed at position i, the i predecessors form a uniform i-subset of
  // the other n-1 documents, so
  //   e_u(d) = (1/n) sum_{i<limit} gamma^i E_i
  // with E_i the mean product of continue probabilities over i-subsets.
  // E_i is computed by the one-pass subset-average recurrence below; it only
  // depends on d through d's grade.
  std::vector<double> per_grade(static_cast<std::size_t>(judgments.max_grade()) + 1,
                                -1.0);
  ExposureVector out(n);
  for (int d = 0; d < n; ++d) {
    const int g = judgments.grade(d);
    if (per_grade[g] < 0.0) {
      std::vector<double> subset_mean(static_cast<std::size_t>(limit), 0.0);
      subset_mean[0] = 1.0;
      int processed = 0;
      bool skipped_one = false;
      for (int other = 0; other < n; ++other) {
        if (!skipped_one && judgments.grade(other) == g) {
          skipped_one = true;  // leave one document of grade g out
          continue;
        }
        const double c = model.continue_probability(judgments.grade(other));
        const int hi = std::min(processed + 1, limit - 1);
        for (int i = hi; i >= 1; --i) {
          subset_mean[i] = (i * c * subset_mean[i - 1] +
                            (processed + 1 - i) * subset_mean[i]) /
                           (processed + 1);
        }
        ++processed;
      }
      double value = 0.0;
      double discount = 1.0;
      for (int i = 0; i < limit; ++i) {
        value += discount * subset_mean[i];
        discount *= gamma;
      }
      per_grade[g] = value / n;
    }
    out[d] = per_grade[g];
  }
  return out;
}

ExposureVector exposure_over_support(
    std::span<const std::pair<Ranking, double>> support,
    const BrowsingModel& model, const RelevanceJudgments& judgments) {
  Eigen::Matrix<long double, Eigen::Dynamic, 1> acc =
      Eigen::Matrix<long double, Eigen::Dynamic, 1>::Zero(judgments.size());
  long double total = 0.0L;
  for (const auto& [ranking, prob] : support) {
    if (prob < -1e-15) {
      throw PolicyIntegrityError("negative permutation probability");
    }
    check_ranking(ranking, judgments);
    accumulate_exposure(model, ranking.order(), judgments, prob, acc);
    total += prob;
  }
  if (std::abs(static_cast<double>(total) - 1.0) > 1e-9) {
    throw PolicyIntegrityError(
        "permutation probabilities do not sum to 1 within 1e-9");
  }
  return acc.cast<double>();
}

ExposureVector exact_expected_exposure(const Policy& policy,
                                       const BrowsingModel& model,
                                       const RelevanceJudgments& judgments,
                                       int enumeration_cap) {
  if (judgments.size() > enumeration_cap) {
    throw EnumerationCapError("pool of " + std::to_string(judgments.size()) +
                              " documents exceeds the enumeration cap of " +
                              std::to_string(enumeration_cap));
  }
  if (!policy.enumerable()) {
    throw ConfigurationError(
        "policy does not expose exact permutation probabilities");
  }
  Eigen::Matrix<long double, Eigen::Dynamic, 1> acc =
      Eigen::Matrix<long double, Eigen::Dynamic, 1>::Zero(judgments.size());
  long double total = 0.0L;
  policy.for_each_support([&](const Ranking& ranking, double prob) {
    accumulate_exposure(model, ranking.order(), judgments, prob, acc);
    total += prob;
  });
  if (std::abs(static_cast<double>(total) - 1.0) > 1e-9) {
    throw PolicyIntegrityError(
        "permutation probabilities do not sum to 1 within 1e-9");
  }
  return acc.cast<double>();
}

double total_exposure_mass(const BrowsingModel& model, int pool_size) {
  const double gamma = model.gamma();
  const int limit = model.effective_depth(pool_size);
  return -std::expm1(limit * std::log(gamma)) / (1.0 - gamma);
}

}  // namespace expeval
