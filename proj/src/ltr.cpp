#include "expeval/ltr.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "expeval/exposure.hpp"
#include "expeval/ranking.hpp"

namespace expeval::ltr {

namespace {

double stable_sigmoid(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

}  // namespace

RelevanceJudgments to_judgments(const LtrQuery& query) {
  std::vector<std::pair<std::string, int>> docs;
  docs.reserve(static_cast<std::size_t>(query.grades.size()));
  for (Eigen::Index i = 0; i < query.grades.size(); ++i) {
    const std::string doc = query.doc_ids.empty()
                                ? "d" + std::to_string(i)
                                : query.doc_ids[static_cast<std::size_t>(i)];
    docs.emplace_back(doc, query.grades[i]);
  }
  return RelevanceJudgments(query.query_id, std::move(docs));
}

Scorer::Scorer(int n_features, const std::vector<int>& hidden,
               std::uint64_t seed)
    : n_features_(n_features) {
  if (n_features < 1) {
    throw ConfigurationError("scorer needs at least one feature");
  }
  Rng rng = make_rng(seed, "scorer-init");
  std::vector<int> sizes;
  sizes.push_back(n_features);
  for (int h : hidden) {
    if (h < 1) throw ConfigurationError("hidden layer sizes must be positive");
    sizes.push_back(h);
  }
  sizes.push_back(1);
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    Layer layer;
    const int fan_in = sizes[l];
    const int fan_out = sizes[l + 1];
    const double r = std::sqrt(6.0 / (fan_in + fan_out));
    layer.weights.resize(fan_out, fan_in);
    for (Eigen::Index i = 0; i < layer.weights.size(); ++i) {
      layer.weights.data()[i] = (2.0 * uniform01(rng) - 1.0) * r;
    }
    layer.bias = Eigen::VectorXd::Zero(fan_out);
    layers_.push_back(std::move(layer));
  }
}

Eigen::VectorXd Scorer::score(const Eigen::MatrixXd& features) const {
  if (features.cols() != n_features_) {
    throw DimensionError("feature matrix has " + std::to_string(features.cols()) +
                         " columns, scorer expects " +
                         std::to_string(n_features_));
  }
  Eigen::MatrixXd h = features;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Eigen::MatrixXd z =
        (h * layers_[l].weights.transpose()).rowwise() + layers_[l].bias.transpose();
    if (l + 1 < layers_.size()) z = z.cwiseMax(0.0);
    h = std::move(z);
  }
  return h.col(0);
}

void Scorer::save(std::ostream& out) const {
  out << "expeval-scorer v1\n";
  out << "features " << n_features_ << "\n";
  out << "layers " << layers_.size() << "\n";
  char buf[64];
  auto emit = [&](double x) {
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    out << buf;
  };
  for (const Layer& layer : layers_) {
    out << "layer " << layer.weights.rows() << " " << layer.weights.cols()
        << "\n";
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) {
      if (i) out << " ";
      emit(layer.bias[i]);
    }
    out << "\n";
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
        if (c) out << " ";
        emit(layer.weights(r, c));
      }
      out << "\n";
    }
  }
}

Scorer Scorer::load(std::istream& in) {
  std::string magic, version;
  in >> magic >> version;
  if (magic != "expeval-scorer" || version != "v1") {
    throw ParseError("not an expeval-scorer v1 checkpoint");
  }
  std::string key;
  int n_features = 0;
  std::size_t n_layers = 0;
  in >> key >> n_features;
  if (key != "features" || n_features < 1) {
    throw ParseError("checkpoint is missing the feature count");
  }
  in >> key >> n_layers;
  if (key != "layers") throw ParseError("checkpoint is missing the layer count");
  Scorer scorer;
  scorer.n_features_ = n_features;
  int expected_in = n_features;
  for (std::size_t l = 0; l < n_layers; ++l) {
    Eigen::Index rows = 0, cols = 0;
    in >> key >> rows >> cols;
    if (key != "layer" || rows < 1 || cols < 1 || cols != expected_in) {
      throw ParseError("checkpoint layer " + std::to_string(l) +
                       " has an inconsistent shape");
    }
    Layer layer;
    layer.bias.resize(rows);
    for (Eigen::Index i = 0; i < rows; ++i) in >> layer.bias[i];
    layer.weights.resize(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) in >> layer.weights(r, c);
    }
    if (!in) throw ParseError("checkpoint truncated inside layer values");
    expected_in = static_cast<int>(rows);
    scorer.layers_.push_back(std::move(layer));
  }
  if (expected_in != 1) {
    throw ParseError("checkpoint does not end in a single-output layer");
  }
  return scorer;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& scores) {
  const double m = scores.maxCoeff();
  Eigen::VectorXd e = (scores.array() - m).exp();
  return e / e.sum();
}

Eigen::VectorXd perturbed_probs(const Eigen::VectorXd& scores,
                                const Eigen::VectorXd& noise) {
  if (scores.size() != noise.size()) {
    throw DimensionError("noise vector does not match the score vector");
  }
  return softmax(scores + noise);
}

Eigen::VectorXd gumbel_perturbed_probs(const Eigen::VectorXd& scores, Rng& rng) {
  Eigen::VectorXd noise(scores.size());
  for (Eigen::Index i = 0; i < noise.size(); ++i) noise[i] = gumbel(rng);
  return perturbed_probs(scores, noise);
}

std::vector<Eigen::VectorXd> draw_gumbel_noise(int n_docs, int n_samples,
                                               Rng& rng) {
  std::vector<Eigen::VectorXd> out(static_cast<std::size_t>(n_samples));
  for (auto& v : out) {
    v.resize(n_docs);
    for (Eigen::Index i = 0; i < n_docs; ++i) v[i] = gumbel(rng);
  }
  return out;
}

Eigen::VectorXd smooth_ranks(const Eigen::VectorXd& probs, double tau) {
  if (!(tau > 0.0)) {
    throw ConfigurationError("smooth-rank temperature must be positive");
  }
  const Eigen::Index n = probs.size();
  Eigen::VectorXd ranks = Eigen::VectorXd::Zero(n);
  for (Eigen::Index d = 0; d < n; ++d) {
    for (Eigen::Index o = d + 1; o < n; ++o) {
      const double w = stable_sigmoid((probs[o] - probs[d]) / tau);
      ranks[d] += w;
      ranks[o] += 1.0 - w;
    }
  }
  return ranks;
}

std::vector<int> ranks_by_descending(const Eigen::VectorXd& keys) {
  const auto n = static_cast<int>(keys.size());
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (keys[a] != keys[b]) return keys[a] > keys[b];
    return a < b;
  });
  std::vector<int> ranks(static_cast<std::size_t>(n));
  for (int r = 0; r < n; ++r) ranks[static_cast<std::size_t>(idx[r])] = r;
  return ranks;
}

StExposure exposure_from_ranks(const std::vector<int>& true_ranks,
                               const Eigen::VectorXd& smooth,
                               const Eigen::VectorXi& grades,
                               const BrowsingModel& model) {
  const auto n = static_cast<Eigen::Index>(true_ranks.size());
  if (smooth.size() != n || grades.size() != n) {
    throw DimensionError("rank vectors are over different document sets");
  }
  std::vector<int> order(static_cast<std::size_t>(n));
  for (Eigen::Index d = 0; d < n; ++d) order[true_ranks[d]] = static_cast<int>(d);
  // Stopping factor from the discrete ranking; constant under the gradient.
  Eigen::VectorXd continue_prefix(n);
  double mass = 1.0;
  for (Eigen::Index r = 0; r < n; ++r) {
    continue_prefix[order[r]] = mass;
    mass *= model.continue_probability(grades[order[r]]);
  }
  const double log_gamma = std::log(model.gamma());
  StExposure out;
  out.hard.resize(n);
  out.surrogate.resize(n);
  for (Eigen::Index d = 0; d < n; ++d) {
    const int r = true_ranks[d];
    out.hard[d] = r < model.depth()
                      ? std::exp(r * log_gamma) * continue_prefix[d]
                      : 0.0;
    // The surrogate keeps gamma^rank differentiable; no depth cutoff.
    out.surrogate[d] = std::exp(smooth[d] * log_gamma) * continue_prefix[d];
  }
  return out;
}

double ee_objective(const Eigen::VectorXd& exposure,
                    const Eigen::VectorXd& target, double lambda) {
  if (exposure.size() != target.size()) {
    throw DimensionError("exposure and target are over different pools");
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw ConfigurationError("lambda must lie in [0, 1]");
  }
  return lambda * exposure.squaredNorm() - (1.0 - lambda) * exposure.dot(target);
}

double group_objective(const Eigen::VectorXd& exposure,
                       const Eigen::VectorXd& grp_exposure,
                       const Eigen::VectorXd& target, double lambda) {
  if (exposure.size() != target.size()) {
    throw DimensionError("exposure and target are over different pools");
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw ConfigurationError("lambda must lie in [0, 1]");
  }
  return lambda * grp_exposure.squaredNorm() -
         (1.0 - lambda) * exposure.dot(target);
}

namespace {

// Backpropagates through rank(d) = sum_{o != d} sigmoid((p_o - p_d) / tau).
Eigen::VectorXd smooth_rank_backward(const Eigen::VectorXd& probs,
                                     const Eigen::VectorXd& grad_ranks,
                                     double tau) {
  const Eigen::Index n = probs.size();
  Eigen::VectorXd grad_probs = Eigen::VectorXd::Zero(n);
  for (Eigen::Index d = 0; d < n; ++d) {
    for (Eigen::Index o = d + 1; o < n; ++o) {
      const double w = stable_sigmoid((probs[o] - probs[d]) / tau);
      const double deriv = w * (1.0 - w) / tau;
      const double delta = (grad_ranks[o] - grad_ranks[d]) * deriv;
      grad_probs[d] += delta;
      grad_probs[o] -= delta;
    }
  }
  return grad_probs;
}

}  // namespace

ScoreObjective exposure_loss_on_scores(const Eigen::VectorXd& scores,
                                       const ExposureLossSpec& spec,
                                       const Eigen::VectorXi& grades,
                                       const BrowsingModel& model,
                                       std::span<const Eigen::VectorXd> noise,
                                       GradPath path) {
  const Eigen::Index n = scores.size();
  if (spec.target.size() != n) {
    throw DimensionError("target exposure does not match the score vector");
  }
  if (spec.use_groups() && spec.group_matrix.rows() != n) {
    throw ConfigurationError(
        "group attribution is missing or does not match the query");
  }
  if (noise.empty()) {
    throw ConfigurationError("at least one noise sample is required");
  }
  const auto n_rankings = static_cast<double>(noise.size());

  std::vector<Eigen::VectorXd> probs_k, surrogate_k;
  probs_k.reserve(noise.size());
  surrogate_k.reserve(noise.size());
  Eigen::VectorXd exposure = Eigen::VectorXd::Zero(n);
  for (const Eigen::VectorXd& g : noise) {
    const Eigen::VectorXd logits = scores + g;
    const Eigen::VectorXd p = softmax(logits);
    const std::vector<int> hard_ranks = ranks_by_descending(logits);
    const Eigen::VectorXd smooth = smooth_ranks(p, spec.tau);
    StExposure st = exposure_from_ranks(hard_ranks, smooth, grades, model);
    exposure += (path == GradPath::Smooth ? st.surrogate : st.hard) / n_rankings;
    probs_k.push_back(p);
    surrogate_k.push_back(std::move(st.surrogate));
  }

  ScoreObjective out;
  Eigen::VectorXd grad_exposure;
  if (spec.use_groups()) {
    const Eigen::VectorXd xi = spec.group_matrix.transpose() * exposure;
    out.value = group_objective(exposure, xi, spec.target, spec.lambda);
    grad_exposure = 2.0 * spec.lambda * (spec.group_matrix * xi) -
                    (1.0 - spec.lambda) * spec.target;
  } else {
    out.value = ee_objective(exposure, spec.target, spec.lambda);
    grad_exposure =
        2.0 * spec.lambda * exposure - (1.0 - spec.lambda) * spec.target;
  }

  const double log_gamma = std::log(model.gamma());
  out.dscores = Eigen::VectorXd::Zero(n);
  for (std::size_t k = 0; k < noise.size(); ++k) {
    // d(gamma^smooth_rank * C) / d smooth_rank = log(gamma) * surrogate
    const Eigen::VectorXd grad_ranks =
        (grad_exposure.array() / n_rankings) * log_gamma *
        surrogate_k[k].array();
    const Eigen::VectorXd grad_probs =
        smooth_rank_backward(probs_k[k], grad_ranks, spec.tau);
    const double inner = grad_probs.dot(probs_k[k]);
    out.dscores += (probs_k[k].array() * (grad_probs.array() - inner)).matrix();
  }
  return out;
}

namespace {

struct ForwardCache {
  std::vector<Eigen::MatrixXd> inputs;    // input fed to each layer
  std::vector<Eigen::MatrixXd> preacts;   // pre-activation of hidden layers
  std::vector<Eigen::MatrixXd> dropmask;  // inverted-dropout masks (may be empty)
};

Eigen::VectorXd scorer_forward(const Scorer& scorer, const Eigen::MatrixXd& X,
                               double dropout, Rng* rng, ForwardCache* cache) {
  const auto& layers = scorer.layers();
  Eigen::MatrixXd h = X;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (cache) cache->inputs.push_back(h);
    Eigen::MatrixXd z =
        (h * layers[l].weights.transpose()).rowwise() + layers[l].bias.transpose();
    if (l + 1 < layers.size()) {
      if (cache) cache->preacts.push_back(z);
      Eigen::MatrixXd a = z.cwiseMax(0.0);
      if (dropout > 0.0 && rng) {
        Eigen::MatrixXd mask(a.rows(), a.cols());
        const double keep = 1.0 - dropout;
        for (Eigen::Index i = 0; i < mask.size(); ++i) {
          mask.data()[i] = uniform01(*rng) < dropout ? 0.0 : 1.0 / keep;
        }
        a = a.cwiseProduct(mask);
        if (cache) cache->dropmask.push_back(std::move(mask));
      } else if (cache) {
        cache->dropmask.emplace_back();
      }
      h = std::move(a);
    } else {
      h = std::move(z);
    }
  }
  return h.col(0);
}

std::vector<Layer> zero_like(const std::vector<Layer>& layers) {
  std::vector<Layer> out;
  out.reserve(layers.size());
  for (const Layer& l : layers) {
    out.push_back({Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()),
                   Eigen::VectorXd::Zero(l.bias.size())});
  }
  return out;
}

void scorer_backward(const Scorer& scorer, const ForwardCache& cache,
                     const Eigen::VectorXd& dscores, std::vector<Layer>& grads) {
  const auto& layers = scorer.layers();
  Eigen::MatrixXd g = dscores;
  for (int l = static_cast<int>(layers.size()) - 1; l >= 0; --l) {
    grads[l].weights = g.transpose() * cache.inputs[l];
    grads[l].bias = g.colwise().sum();
    if (l > 0) {
      Eigen::MatrixXd gprev = g * layers[l].weights;
      if (cache.dropmask[l - 1].size() > 0) {
        gprev = gprev.cwiseProduct(cache.dropmask[l - 1]);
      }
      gprev =
          gprev.cwiseProduct((cache.preacts[l - 1].array() > 0.0).cast<double>().matrix());
      g = std::move(gprev);
    }
  }
}

}  // namespace

double exposure_loss_value(const Scorer& scorer, const Eigen::MatrixXd& features,
                           const ExposureLossSpec& spec,
                           const Eigen::VectorXi& grades,
                           const BrowsingModel& model,
                           std::span<const Eigen::VectorXd> noise,
                           GradPath path) {
  const Eigen::VectorXd scores = scorer.score(features);
  return exposure_loss_on_scores(scores, spec, grades, model, noise, path).value;
}

ParameterGrads exposure_loss_gradient(const Scorer& scorer,
                                      const Eigen::MatrixXd& features,
                                      const ExposureLossSpec& spec,
                                      const Eigen::VectorXi& grades,
                                      const BrowsingModel& model,
                                      std::span<const Eigen::VectorXd> noise,
                                      GradPath path) {
  ForwardCache cache;
  const Eigen::VectorXd scores =
      scorer_forward(scorer, features, 0.0, nullptr, &cache);
  const ScoreObjective so =
      exposure_loss_on_scores(scores, spec, grades, model, noise, path);
  ParameterGrads out;
  out.value = so.value;
  out.layers = zero_like(scorer.layers());
  scorer_backward(scorer, cache, so.dscores, out.layers);
  return out;
}

namespace {

ScoreObjective pointwise_loss(const Eigen::VectorXd& scores,
                              const Eigen::VectorXi& grades) {
  const auto n = static_cast<double>(scores.size());
  const Eigen::VectorXd diff = scores - grades.cast<double>();
  ScoreObjective out;
  out.value = diff.squaredNorm() / n;
  out.dscores = 2.0 * diff / n;
  return out;
}

ScoreObjective pairwise_loss(const Eigen::VectorXd& scores,
                             const Eigen::VectorXi& grades) {
  ScoreObjective out;
  out.dscores = Eigen::VectorXd::Zero(scores.size());
  int pairs = 0;
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    for (Eigen::Index j = i + 1; j < scores.size(); ++j) {
      if (grades[i] == grades[j]) continue;
      const Eigen::Index hi = grades[i] > grades[j] ? i : j;
      const Eigen::Index lo = grades[i] > grades[j] ? j : i;
      const double z = scores[hi] - scores[lo];
      out.value += softplus(-z);
      const double dz = stable_sigmoid(z) - 1.0;
      out.dscores[hi] += dz;
      out.dscores[lo] -= dz;
      ++pairs;
    }
  }
  if (pairs > 0) {
    out.value /= pairs;
    out.dscores /= pairs;
  }
  return out;
}

struct QuerySpec {
  ExposureLossSpec loss;
  bool prepared = false;
};

QuerySpec prepare_query(const LtrQuery& query, Objective objective,
                        const BrowsingModel& model, double lambda, double tau) {
  QuerySpec spec;
  if (objective == Objective::ExpectedExposure || objective == Objective::Group) {
    const RelevanceJudgments judgments = to_judgments(query);
    spec.loss.target = target_exposure(model, judgments);
    spec.loss.lambda = lambda;
    spec.loss.tau = tau;
    if (objective == Objective::Group) {
      if (!query.groups) {
        throw ConfigurationError("group objective needs group attributions "
                                 "(query '" +
                                 query.query_id + "' has none)");
      }
      spec.loss.group_matrix = query.groups->matrix();
    }
  }
  spec.prepared = true;
  return spec;
}

double validation_loss(const Scorer& scorer, const LtrDataset& valid,
                       const std::vector<QuerySpec>& specs, Objective objective,
                       const BrowsingModel& model, const TrainConfig& config) {
  if (valid.queries.empty()) return 0.0;
  double total = 0.0;
  int counted = 0;
  for (std::size_t qi = 0; qi < valid.queries.size(); ++qi) {
    const LtrQuery& q = valid.queries[qi];
    const auto n = static_cast<int>(q.features.rows());
    if (n == 0) continue;
    const Eigen::VectorXd scores = scorer.score(q.features);
    switch (objective) {
      case Objective::Pointwise:
        total += pointwise_loss(scores, q.grades).value;
        break;
      case Objective::Pairwise:
        total += pairwise_loss(scores, q.grades).value;
        break;
      default: {
        // Fixed per-query noise keeps epochs comparable.
        Rng rng = make_rng(config.seed, "valid-noise", qi);
        const auto noise = draw_gumbel_noise(n, config.n_train_samples, rng);
        total += exposure_loss_on_scores(scores, specs[qi].loss, q.grades,
                                         model, noise,
                                         GradPath::StraightThrough)
                     .value;
        break;
      }
    }
    ++counted;
  }
  return counted > 0 ? total / counted : 0.0;
}

}  // namespace

TrainResult train(const LtrDataset& train_set, const LtrDataset& valid_set,
                  Objective objective, const BrowsingModel& model,
                  const TrainConfig& config) {
  if (train_set.queries.empty()) {
    throw ConfigurationError("training set is empty");
  }
  std::vector<QuerySpec> train_specs, valid_specs;
  train_specs.reserve(train_set.queries.size());
  for (const LtrQuery& q : train_set.queries) {
    train_specs.push_back(
        prepare_query(q, objective, model, config.lambda, config.tau));
  }
  valid_specs.reserve(valid_set.queries.size());
  for (const LtrQuery& q : valid_set.queries) {
    valid_specs.push_back(
        prepare_query(q, objective, model, config.lambda, config.tau));
  }

  TrainResult result;
  Scorer scorer(train_set.n_features, config.hidden,
                derive_seed(config.seed, "init"));
  std::vector<Layer> grads = zero_like(scorer.layers());
  std::vector<Layer> velocity = zero_like(scorer.layers());
  Rng rng = make_rng(config.seed, "train");

  const bool has_validation = !valid_set.queries.empty();
  Scorer best = scorer;
  double best_loss = std::numeric_limits<double>::infinity();
  int stale_epochs = 0;

  std::vector<std::size_t> order(train_set.queries.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    fisher_yates(order.begin(), order.end(), rng);
    for (std::size_t qi : order) {
      const LtrQuery& q = train_set.queries[qi];
      const auto n = static_cast<int>(q.features.rows());
      if (n == 0) {
        ++result.skipped_queries;
        continue;
      }
      ForwardCache cache;
      const Eigen::VectorXd scores =
          scorer_forward(scorer, q.features, config.dropout, &rng, &cache);
      ScoreObjective so;
      switch (objective) {
        case Objective::Pointwise:
          so = pointwise_loss(scores, q.grades);
          break;
        case Objective::Pairwise:
          so = pairwise_loss(scores, q.grades);
          break;
        default: {
          const auto noise = draw_gumbel_noise(n, config.n_train_samples, rng);
          so = exposure_loss_on_scores(scores, train_specs[qi].loss, q.grades,
                                       model, noise,
                                       GradPath::StraightThrough);
          break;
        }
      }
      if (!std::isfinite(so.value)) {
        std::ostringstream diag;
        diag << "training diverged: objective " << so.value << " at epoch "
             << epoch << ", query '" << q.query_id << "' (lr "
             << config.learning_rate << ", lambda " << config.lambda << ")";
        throw DivergenceError(diag.str());
      }
      result.step_losses.push_back(so.value);
      scorer_backward(scorer, cache, so.dscores, grads);
      for (std::size_t l = 0; l < grads.size(); ++l) {
        if (config.momentum > 0.0) {
          velocity[l].weights =
              config.momentum * velocity[l].weights - config.learning_rate * grads[l].weights;
          velocity[l].bias =
              config.momentum * velocity[l].bias - config.learning_rate * grads[l].bias;
          scorer.layers()[l].weights += velocity[l].weights;
          scorer.layers()[l].bias += velocity[l].bias;
        } else {
          scorer.layers()[l].weights -= config.learning_rate * grads[l].weights;
          scorer.layers()[l].bias -= config.learning_rate * grads[l].bias;
        }
      }
    }
    result.epochs_run = epoch + 1;
    if (has_validation) {
      const double vloss = validation_loss(scorer, valid_set, valid_specs,
                                           objective, model, config);
      if (!std::isfinite(vloss)) {
        throw DivergenceError("validation objective is not finite at epoch " +
                              std::to_string(epoch));
      }
      if (vloss < best_loss - 1e-12) {
        best_loss = vloss;
        best = scorer;
        stale_epochs = 0;
      } else if (++stale_epochs > config.patience) {
        break;
      }
    } else {
      best = scorer;
    }
  }
  result.scorer = has_validation ? best : scorer;
  result.best_validation = best_loss;
  return result;
}

std::vector<EvalPoint> evaluate_policy_points(const Scorer& scorer,
                                              const LtrDataset& dataset,
                                              const BrowsingModel& model,
                                              double alpha, int n_samples,
                                              std::uint64_t seed,
                                              DisparityAxis axis) {
  if (n_samples < 1) {
    throw ConfigurationError("n_samples must be at least 1");
  }
  std::vector<EvalPoint> points;
  points.reserve(dataset.queries.size());
  for (const LtrQuery& q : dataset.queries) {
    const auto n = static_cast<int>(q.features.rows());
    const RelevanceJudgments judgments = to_judgments(q);
    const ExposureVector target = target_exposure(model, judgments);
    const Eigen::VectorXd scores = scorer.score(q.features);
    Rng rng = make_rng(seed, "ltr-eval", fnv1a(q.query_id));
    Eigen::VectorXd exposure = Eigen::VectorXd::Zero(n);
    std::vector<std::pair<double, int>> keys(static_cast<std::size_t>(n));
    for (int k = 0; k < n_samples; ++k) {
      for (int d = 0; d < n; ++d) {
        keys[d] = {alpha * scores[d] + gumbel(rng), d};
      }
      std::sort(keys.begin(), keys.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
      });
      double mass = 1.0;
      const int limit = model.effective_depth(n);
      for (int r = 0; r < limit; ++r) {
        const int doc = keys[r].second;
        exposure[doc] += mass;
        mass *= model.gamma() * model.continue_probability(judgments.grade(doc));
      }
    }
    exposure /= static_cast<double>(n_samples);

    EvalPoint point;
    point.ee = ee_breakdown(exposure, target);
    if (axis == DisparityAxis::Document) {
      std::tie(point.d_norm, point.r_norm) =
          normalize_curve_point(point.ee, judgments, model);
    } else {
      if (!q.groups) {
        throw ConfigurationError("group disparity axis needs attributions "
                                 "(query '" +
                                 q.query_id + "' has none)");
      }
      const int n_groups = q.groups->n_groups();
      const double mass = total_exposure_mass(model, n);
      const double lo = mass * mass / n_groups;  // equal split
      const double hi = mass * mass;             // one group takes everything
      if (!(hi - lo > 1e-15)) {
        throw DegenerateNormalizationError(
            "group disparity axis needs at least two groups");
      }
      const Eigen::VectorXd xi = group_exposure(exposure, *q.groups);
      point.d_norm = std::clamp((xi.squaredNorm() - lo) / (hi - lo), 0.0, 1.0);
      point.r_norm = point.ee.ee_r / (2.0 * point.ee.target_norm_sq);
    }
    points.push_back(point);
  }
  return points;
}

EvalCurves curves_from_points(
    std::span<const std::vector<EvalPoint>> points_per_param,
    std::span<const double> params) {
  if (points_per_param.size() != params.size() || params.empty()) {
    throw ConfigurationError("parameter grid does not match the point sets");
  }
  const std::size_t n_queries = points_per_param[0].size();
  EvalCurves out;
  out.per_query.resize(n_queries);
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    if (points_per_param[pi].size() != n_queries) {
      throw DimensionError("point sets cover different query counts");
    }
    for (std::size_t qi = 0; qi < n_queries; ++qi) {
      const EvalPoint& p = points_per_param[pi][qi];
      CurvePoint cp;
      cp.param = params[pi];
      cp.d_norm = p.d_norm;
      cp.r_norm = p.r_norm;
      cp.ee = p.ee;
      out.per_query[qi].points.push_back(cp);
    }
  }
  out.auc.reserve(n_queries);
  for (SweepCurve& curve : out.per_query) {
    std::stable_sort(curve.points.begin(), curve.points.end(),
                     [](const CurvePoint& a, const CurvePoint& b) {
                       return a.d_norm < b.d_norm;
                     });
    out.auc.push_back(ee_auc(curve));
    out.macro_auc += out.auc.back();
  }
  if (n_queries > 0) out.macro_auc /= static_cast<double>(n_queries);
  return out;
}

EvalCurves evaluate_temperature_sweep(const Scorer& scorer,
                                      const LtrDataset& dataset,
                                      const BrowsingModel& model,
                                      std::span<const double> alphas,
                                      int n_samples, std::uint64_t seed,
                                      DisparityAxis axis) {
  std::vector<std::vector<EvalPoint>> per_param;
  per_param.reserve(alphas.size());
  for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
    per_param.push_back(evaluate_policy_points(scorer, dataset, model,
                                               alphas[ai], n_samples,
                                               derive_seed(seed, "temp", ai),
                                               axis));
  }
  return curves_from_points(per_param, alphas);
}

}  // namespace expeval::ltr
