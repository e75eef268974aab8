#include "expeval/judgments.hpp"

#include <algorithm>
#include <utility>

namespace expeval {

RelevanceJudgments::RelevanceJudgments(
    std::string query_id, std::vector<std::pair<std::string, int>> graded_docs)
    : query_id_(std::move(query_id)) {
  if (graded_docs.empty()) {
    throw ConfigurationError("judgments for query '" + query_id_ +
                             "' are empty");
  }
  pool_.reserve(graded_docs.size());
  grades_.resize(static_cast<Eigen::Index>(graded_docs.size()));
  index_.reserve(graded_docs.size());
  int i = 0;
  for (auto& [doc, grade] : graded_docs) {
    if (grade < 0) {
      throw ConfigurationError("negative grade for document '" + doc +
                               "' in query '" + query_id_ + "'");
    }
    if (!index_.emplace(doc, i).second) {
      throw JudgmentMismatchError("duplicate document '" + doc +
                                  "' in judgments for query '" + query_id_ +
                                  "'");
    }
    grades_[i] = grade;
    max_grade_ = std::max(max_grade_, grade);
    pool_.push_back(std::move(doc));
    ++i;
  }
  count_at_.assign(static_cast<std::size_t>(max_grade_) + 1, 0);
  for (Eigen::Index k = 0; k < grades_.size(); ++k) ++count_at_[grades_[k]];
}

std::optional<int> RelevanceJudgments::index_of(std::string_view doc_id) const {
  auto it = index_.find(std::string(doc_id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int RelevanceJudgments::count_at(int g) const {
  if (g < 0 || g > max_grade_) return 0;
  return count_at_[g];
}

int RelevanceJudgments::count_above(int g) const {
  int total = 0;
  for (int k = std::max(g + 1, 0); k <= max_grade_; ++k) total += count_at_[k];
  return total;
}

Eigen::VectorXd RelevanceJudgments::binary_relevance() const {
  return (grades_.array() > 0).cast<double>();
}

RelevanceJudgments RelevanceJudgments::with_documents(
    std::span<const std::string> doc_ids) const {
  std::vector<std::pair<std::string, int>> docs;
  docs.reserve(pool_.size() + doc_ids.size());
  for (int i = 0; i < size(); ++i) docs.emplace_back(pool_[i], grades_[i]);
  std::unordered_map<std::string, int> seen;
  for (const auto& doc : doc_ids) {
    if (!index_.count(doc) && seen.emplace(doc, 0).second) {
      docs.emplace_back(doc, 0);
    }
  }
  return RelevanceJudgments(query_id_, std::move(docs));
}

}  // namespace expeval
