#pragma once

#include <span>
#include <string>
#include <vector>

#include "expeval/judgments.hpp"

namespace expeval {

/// A ranking of documents, stored as pool indices in rank order. It may be a
/// prefix permutation: pool documents absent from the ranking have rank >=
/// size() and receive zero exposure.
class Ranking {
 public:
  Ranking() = default;

  /// Validates: entries nonnegative and free of duplicates.
  explicit Ranking(std::vector<int> order);

  /// Builds from document ids; unknown ids raise JudgmentMismatchError.
  static Ranking from_document_ids(const RelevanceJudgments& judgments,
                                   std::span<const std::string> doc_ids);

  /// No validation; for samplers that produce permutations by construction.
  static Ranking unchecked(std::vector<int> order);

  const std::vector<int>& order() const { return order_; }
  int size() const { return static_cast<int>(order_.size()); }

  /// Base-0 rank per pool index; -1 for documents not in the ranking.
  std::vector<int> ranks(int pool_size) const;

 private:
  std::vector<int> order_;
};

}  // namespace expeval
