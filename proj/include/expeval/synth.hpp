#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "expeval/io.hpp"
#include "expeval/judgments.hpp"
#include "expeval/ltr.hpp"
#include "expeval/policies.hpp"

namespace expeval::synth {

/// Synthetic test collection. Per query, documents draw standard-normal
/// features; a hidden linear utility (plus Gaussian noise) ranks them and
/// grade counts are assigned by utility rank, so relevance is linear in the
/// features up to the noise. Run scores are grade + noise * N(0, 1); with
/// noise 0 the run is a perfect (grade-sorted) ranking.
struct SynthSpec {
  int n_queries = 100;
  int pool_size = 100;
  std::vector<int> grade_counts = {90, 10};  // index = grade; must sum to pool
  double noise = 0.0;
  int n_features = 10;
  int n_groups = 0;  // 0 disables group attribution
  std::uint64_t seed = 0;
  std::string run_tag = "synth";
};

struct SynthData {
  std::vector<ScoredRun> runs;
  std::vector<RelevanceJudgments> judgments;
  ltr::LtrDataset dataset;  // groups attached when n_groups > 0
  io::GroupRows group_rows;
};

SynthData generate(const SynthSpec& spec);

}  // namespace expeval::synth
