#include "expeval/browsing.hpp"

#include <cmath>
#include <utility>

namespace expeval {

BrowsingModel::BrowsingModel(Kind kind, double gamma,
                             std::vector<double> stops, int depth)
    : kind_(kind), gamma_(gamma), depth_(depth), stop_by_grade_(std::move(stops)) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw ConfigurationError("patience gamma must lie in (0, 1)");
  }
  if (depth < 1) {
    throw ConfigurationError("browsing depth must be a positive integer");
  }
  double prev = 0.0;
  for (double phi : stop_by_grade_) {
    if (!(phi >= 0.0 && phi < 1.0)) {
      throw ConfigurationError("stop probabilities must lie in [0, 1)");
    }
    if (phi < prev) {
      throw ConfigurationError(
          "stop probabilities must be nondecreasing in grade");
    }
    prev = phi;
  }
}

BrowsingModel BrowsingModel::rbp(double gamma, int depth) {
  return BrowsingModel(Kind::Rbp, gamma, {}, depth);
}

BrowsingModel BrowsingModel::err(double gamma, std::vector<double> stop_by_grade,
                                 int depth) {
  return BrowsingModel(Kind::Err, gamma, std::move(stop_by_grade), depth);
}

double BrowsingModel::stop_probability(int grade) const {
  if (kind_ == Kind::Rbp || grade <= 0) return 0.0;
  if (stop_by_grade_.empty()) {
    // Default stop curve phi(g) = 1 - 2^-g.
    return 1.0 - std::pow(2.0, -static_cast<double>(grade));
  }
  const auto idx = static_cast<std::size_t>(grade - 1);
  return idx < stop_by_grade_.size() ? stop_by_grade_[idx]
                                     : stop_by_grade_.back();
}

}  // namespace expeval
