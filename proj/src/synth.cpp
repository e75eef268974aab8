#include "expeval/synth.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include "expeval/rng.hpp"

namespace expeval::synth {

namespace {

std::string padded(const char* prefix, int value, int width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%0*d", prefix, std::min(width, 9), value);
  return buf;
}

int digits(int n) {
  int d = 1;
  while (n >= 10) {
    n /= 10;
    ++d;
  }
  return d;
}

}  // namespace

SynthData generate(const SynthSpec& spec) {
  if (spec.n_queries < 1 || spec.pool_size < 1 || spec.n_features < 1) {
    throw ConfigurationError("synthetic spec needs positive sizes");
  }
  if (spec.grade_counts.empty()) {
    throw ConfigurationError("grade counts must not be empty");
  }
  int total = 0;
  for (int c : spec.grade_counts) {
    if (c < 0) throw ConfigurationError("grade counts must be nonnegative");
    total += c;
  }
  if (total != spec.pool_size) {
    throw ConfigurationError("grade counts sum to " + std::to_string(total) +
                             ", pool size is " + std::to_string(spec.pool_size));
  }
  if (spec.noise < 0.0) {
    throw ConfigurationError("noise scale must be nonnegative");
  }

  // Grade of each utility rank: best-ranked documents get the top grades.
  std::vector<int> grade_of_rank;
  grade_of_rank.reserve(static_cast<std::size_t>(spec.pool_size));
  for (int g = static_cast<int>(spec.grade_counts.size()) - 1; g >= 0; --g) {
    grade_of_rank.insert(grade_of_rank.end(),
                         static_cast<std::size_t>(spec.grade_counts[g]), g);
  }

  Rng weight_rng = make_rng(spec.seed, "synth-weights");
  Eigen::VectorXd w(spec.n_features);
  for (int f = 0; f < spec.n_features; ++f) w[f] = normal01(weight_rng);

  const int qwidth = digits(spec.n_queries);
  const int dwidth = digits(spec.pool_size - 1);

  SynthData data;
  data.dataset.n_features = spec.n_features;
  for (int qi = 0; qi < spec.n_queries; ++qi) {
    Rng rng = make_rng(spec.seed, "synth-query", static_cast<std::uint64_t>(qi));
    const std::string query_id = padded("q", qi + 1, qwidth);

    Eigen::MatrixXd features(spec.pool_size, spec.n_features);
    for (Eigen::Index i = 0; i < features.size(); ++i) {
      features.data()[i] = normal01(rng);
    }
    Eigen::VectorXd utility = features * w;
    for (int d = 0; d < spec.pool_size; ++d) {
      utility[d] += spec.noise * normal01(rng);
    }
    std::vector<int> by_utility(static_cast<std::size_t>(spec.pool_size));
    std::iota(by_utility.begin(), by_utility.end(), 0);
    std::sort(by_utility.begin(), by_utility.end(), [&](int a, int b) {
      if (utility[a] != utility[b]) return utility[a] > utility[b];
      return a < b;
    });
    Eigen::VectorXi grades(spec.pool_size);
    for (int r = 0; r < spec.pool_size; ++r) {
      grades[by_utility[r]] = grade_of_rank[r];
    }

    std::vector<std::string> doc_ids;
    std::vector<std::pair<std::string, int>> graded;
    doc_ids.reserve(static_cast<std::size_t>(spec.pool_size));
    graded.reserve(static_cast<std::size_t>(spec.pool_size));
    for (int d = 0; d < spec.pool_size; ++d) {
      doc_ids.push_back(padded("d", d, dwidth));
      graded.emplace_back(doc_ids.back(), grades[d]);
    }
    RelevanceJudgments judgments(query_id, graded);

    ScoredRun run;
    run.query_id = query_id;
    run.run_tag = spec.run_tag;
    for (int d = 0; d < spec.pool_size; ++d) {
      run.entries.emplace_back(doc_ids[d],
                               grades[d] + spec.noise * normal01(rng));
    }
    std::sort(run.entries.begin(), run.entries.end(),
              [](const auto& a, const auto& b) {
                if (a.second != b.second) return a.second > b.second;
                return a.first < b.first;
              });

    ltr::LtrQuery query;
    query.query_id = query_id;
    query.features = std::move(features);
    query.grades = grades;
    query.doc_ids = doc_ids;

    if (spec.n_groups > 0) {
      // First n_groups documents take one group each, so every group is
      // populated; the rest draw uniformly.
      Eigen::MatrixXd membership =
          Eigen::MatrixXd::Zero(spec.pool_size, spec.n_groups);
      std::vector<std::string> group_ids;
      for (int g = 0; g < spec.n_groups; ++g) {
        group_ids.push_back("g" + std::to_string(g));
      }
      auto& rows = data.group_rows[query_id];
      for (int d = 0; d < spec.pool_size; ++d) {
        const int g = d < spec.n_groups
                          ? d
                          : static_cast<int>(uniform_index(
                                rng, static_cast<std::size_t>(spec.n_groups)));
        membership(d, g) = 1.0;
        rows.emplace_back(doc_ids[d], group_ids[g]);
      }
      query.groups = GroupAttribution(std::move(group_ids), std::move(membership));
    }

    data.runs.push_back(std::move(run));
    data.judgments.push_back(std::move(judgments));
    data.dataset.queries.push_back(std::move(query));
  }
  return data;
}

}  // namespace expeval::synth
