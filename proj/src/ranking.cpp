#include "expeval/ranking.hpp"

#include <algorithm>
#include <utility>

namespace expeval {

Ranking::Ranking(std::vector<int> order) : order_(std::move(order)) {
  std::vector<int> sorted(order_);
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i] < 0) {
      throw JudgmentMismatchError("ranking contains a negative pool index");
    }
    if (i > 0 && sorted[i] == sorted[i - 1]) {
      throw JudgmentMismatchError("ranking contains a duplicate document");
    }
  }
}

Ranking Ranking::from_document_ids(const RelevanceJudgments& judgments,
                                   std::span<const std::string> doc_ids) {
  std::vector<int> order;
  order.reserve(doc_ids.size());
  for (const auto& doc : doc_ids) {
    auto idx = judgments.index_of(doc);
    if (!idx) {
      throw JudgmentMismatchError("document '" + doc +
                                  "' is not in the pool of query '" +
                                  judgments.query_id() + "'");
    }
    order.push_back(*idx);
  }
  return Ranking(std::move(order));
}

Ranking Ranking::unchecked(std::vector<int> order) {
  Ranking r;
  r.order_ = std::move(order);
  return r;
}

std::vector<int> Ranking::ranks(int pool_size) const {
  std::vector<int> out(static_cast<std::size_t>(pool_size), -1);
  for (int i = 0; i < size(); ++i) {
    const int doc = order_[static_cast<std::size_t>(i)];
    if (doc < pool_size) out[static_cast<std::size_t>(doc)] = i;
  }
  return out;
}

}  // namespace expeval
