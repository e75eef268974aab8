#pragma once

#include <Eigen/Core>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "expeval/error.hpp"

namespace expeval {

/// Per-query relevance judgments over an ordered candidate pool.
///
/// The pool fixes the coordinate system for every exposure vector of the
/// query: entry i of an exposure vector is the mass of pool()[i]. Grades are
/// nonnegative integers; grade 0 means not relevant.
class RelevanceJudgments {
 public:
  RelevanceJudgments(std::string query_id,
                     std::vector<std::pair<std::string, int>> graded_docs);

  const std::string& query_id() const { return query_id_; }
  int size() const { return static_cast<int>(pool_.size()); }
  const std::vector<std::string>& pool() const { return pool_; }
  const Eigen::VectorXi& grades() const { return grades_; }

  int grade(int pool_index) const { return grades_[pool_index]; }
  std::optional<int> index_of(std::string_view doc_id) const;

  int max_grade() const { return max_grade_; }
  /// Number of documents with grade exactly g (m_g).
  int count_at(int g) const;
  /// Number of documents with grade strictly above g (m_{>g}).
  int count_above(int g) const;
  /// Number of relevant documents, grade > 0 (R).
  int relevant_count() const { return count_above(0); }

  /// Binary relevance vector: 1 where grade > 0.
  Eigen::VectorXd binary_relevance() const;

  /// Extends the pool with documents not yet judged, at grade 0, preserving
  /// the existing pool order. Used to merge retrieved documents into the
  /// judged pool.
  RelevanceJudgments with_documents(std::span<const std::string> doc_ids) const;

 private:
  std::string query_id_;
  std::vector<std::string> pool_;
  Eigen::VectorXi grades_;
  std::unordered_map<std::string, int> index_;
  std::vector<int> count_at_;  // indexed by grade
  int max_grade_ = 0;
};

}  // namespace expeval
