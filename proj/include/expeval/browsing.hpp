#pragma once

#include <limits>
#include <vector>

#include "expeval/error.hpp"

namespace expeval {

/// Depth value meaning "no truncation".
inline constexpr int kUnboundedDepth = std::numeric_limits<int>::max();

/// A positional user browsing model.
///
/// RBP: the user visits rank i with probability gamma^i.
/// ERR: the user visits rank i with probability gamma^i times the product of
/// the continue probabilities (1 - phi(grade)) of everything ranked above.
/// Ranks at or beyond `depth` receive zero exposure under both models.
///
/// RBP is the phi == 0 special case of ERR, and the implementation exploits
/// that: all exposure formulas are written against continue_probability().
class BrowsingModel {
 public:
  enum class Kind { Rbp, Err };

  static BrowsingModel rbp(double gamma, int depth = kUnboundedDepth);

  /// ERR with an explicit stop table: stop_by_grade[k] is phi(k + 1).
  /// phi(0) is always 0; grades beyond the table clamp to its last entry.
  /// An empty table selects the default phi(g) = 1 - 2^-g.
  static BrowsingModel err(double gamma, std::vector<double> stop_by_grade = {},
                           int depth = kUnboundedDepth);

  Kind kind() const { return kind_; }
  double gamma() const { return gamma_; }
  int depth() const { return depth_; }

  /// phi(grade): probability of stopping at a document of this grade.
  double stop_probability(int grade) const;
  /// 1 - phi(grade).
  double continue_probability(int grade) const {
    return 1.0 - stop_probability(grade);
  }

  /// Positions actually reachable for a pool of n documents.
  int effective_depth(int pool_size) const {
    return depth_ < pool_size ? depth_ : pool_size;
  }

 private:
  BrowsingModel(Kind kind, double gamma, std::vector<double> stops, int depth);

  Kind kind_;
  double gamma_;
  int depth_;
  std::vector<double> stop_by_grade_;  // phi(1), phi(2), ...; empty => default
};

}  // namespace expeval
