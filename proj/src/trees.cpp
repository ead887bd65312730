#include "roshap/trees.hpp"

#include "roshap/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace roshap {

std::string to_string(Objective objective) {
  return objective == Objective::logistic ? "logistic" : "squared-error";
}

Objective parse_objective(const std::string& name) {
  if (name == "logistic") return Objective::logistic;
  if (name == "squared-error") return Objective::squared_error;
  throw UsageError("unknown objective '" + name + "'");
}

Objective default_objective(TaskKind task) {
  return task == TaskKind::binary_classification ? Objective::logistic : Objective::squared_error;
}

int Tree::depth() const {
  if (nodes.empty()) return 0;
  std::vector<int> level(nodes.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& node = nodes[i];
    if (node.is_leaf()) continue;
    level[static_cast<std::size_t>(node.left)] = level[i] + 1;
    level[static_cast<std::size_t>(node.right)] = level[i] + 1;
    deepest = std::max(deepest, level[i] + 1);
  }
  return deepest;
}

int Tree::leaf_count() const {
  return static_cast<int>(std::count_if(nodes.begin(), nodes.end(),
                                        [](const TreeNode& node) { return node.is_leaf(); }));
}

void GbdtParams::validate() const {
  if (num_rounds < 0) throw UsageError("num_rounds must be non-negative");
  if (max_depth < 1) throw UsageError("max_depth must be positive");
  if (!(learning_rate > 0.0 && learning_rate <= 1.0))
    throw UsageError("learning_rate must lie in (0, 1]");
  if (!(lambda_l2 >= 0.0) || !(min_child_weight >= 0.0) || !(min_gain >= 0.0))
    throw UsageError("lambda_l2, min_child_weight and min_gain must be non-negative");
}

namespace {

constexpr double kGainTieTolerance = 1e-10;

struct NodeStats {
  double grad = 0.0;
  double hess = 0.0;
};

struct SplitCandidate {
  double gain;
  int feature = -1;
  double threshold = 0.0;
  double left_grad = 0.0;
  double left_hess = 0.0;
};

// A frontier node owns positions [begin, end) of every feature's sorted list.
struct FrontierNode {
  int id;
  std::size_t begin;
  std::size_t end;
  NodeStats stats;
};

double logistic_loss(double y, double margin) {
  // log(1 + e^m) - y m, evaluated without overflow
  const double softplus = margin > 0.0 ? margin + std::log1p(std::exp(-margin))
                                       : std::log1p(std::exp(margin));
  return softplus - y * margin;
}

// Exact greedy trainer over a weighted set of unique rows. Each feature keeps
// its rows sorted by value and grouped contiguously by frontier node; a
// stable partition after every level preserves the order within children and
// drops rows that reached a leaf. Entries hold (row, rank of the row's value
// among the feature's distinct values); `Index` is uint16_t whenever both fit,
// which keeps the per-level working set cache-resident.
template <typename Index>
class Trainer {
  struct Entry {
    Index row;
    Index rank;
  };

 public:
  Trainer(const Dataset& ds, std::vector<int> rows, std::vector<double> weights,
          const GbdtParams& params, Objective objective)
      : ds_(ds),
        rows_(std::move(rows)),
        weights_(std::move(weights)),
        params_(params),
        objective_(objective),
        m_(rows_.size()),
        p_(static_cast<std::size_t>(ds.cols())) {
    presort();
  }

  TreeEnsemble run(FitTrace* trace) {
    TreeEnsemble ens;
    ens.objective = objective_;
    ens.learning_rate = params_.learning_rate;
    ens.num_features = static_cast<int>(p_);
    ens.base_score = initial_margin();

    margin_.assign(m_, ens.base_score);
    grad_.resize(m_);
    hess_.resize(m_);
    node_of_.resize(m_);
    goes_left_.resize(m_);
    for (auto& buffer : work_) buffer.resize(m_ * p_);
    if (trace) trace->training_loss.push_back(loss());

    for (int round = 0; round < params_.num_rounds; ++round) {
      compute_gradients();
      Tree tree = grow_tree(trace);
      for (std::size_t r = 0; r < m_; ++r)
        margin_[r] += tree.nodes[static_cast<std::size_t>(node_of_[r])].value;
      ens.trees.push_back(std::move(tree));
      if (trace) trace->training_loss.push_back(loss());
    }
    return ens;
  }

 private:
  double target(std::size_t r) const { return ds_.target()[rows_[r]]; }

  double initial_margin() const {
    double total_weight = 0.0, weighted = 0.0;
    for (std::size_t r = 0; r < m_; ++r) {
      total_weight += weights_[r];
      weighted += weights_[r] * target(r);
    }
    const double mean = weighted / total_weight;
    if (objective_ == Objective::squared_error) return mean;
    const double prior = std::clamp(mean, 1e-6, 1.0 - 1e-6);
    return std::log(prior / (1.0 - prior));
  }

  void presort() {
    sorted_.resize(m_ * p_);
    distinct_.resize(p_);
    std::vector<std::uint32_t> order(m_);
    for (std::size_t f = 0; f < p_; ++f) {
      auto column = ds_.features().col(static_cast<Eigen::Index>(f));
      std::iota(order.begin(), order.end(), 0u);
      std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        return column[rows_[a]] < column[rows_[b]];
      });
      auto& distinct = distinct_[f];
      for (std::size_t k = 0; k < m_; ++k) {
        const double v = column[rows_[order[k]]];
        if (distinct.empty() || distinct.back() != v) distinct.push_back(v);
        sorted_[f * m_ + k] = {static_cast<Index>(order[k]), static_cast<Index>(distinct.size() - 1)};
      }
    }
  }

  void compute_gradients() {
    for (std::size_t r = 0; r < m_; ++r) {
      const double y = target(r);
      double g, h;
      if (objective_ == Objective::logistic) {
        const double prob = sigmoid(margin_[r]);
        g = prob - y;
        h = prob * (1.0 - prob);
      } else {
        g = margin_[r] - y;
        h = 1.0;
      }
      grad_[r] = weights_[r] * g;
      hess_[r] = weights_[r] * h;
    }
  }

  double loss() const {
    double total = 0.0, total_weight = 0.0;
    for (std::size_t r = 0; r < m_; ++r) {
      const double y = target(r);
      const double l = objective_ == Objective::logistic
                           ? logistic_loss(y, margin_[r])
                           : 0.5 * (y - margin_[r]) * (y - margin_[r]);
      total += weights_[r] * l;
      total_weight += weights_[r];
    }
    return total / total_weight;
  }

  double score(double grad, double hess) const { return grad * grad / (hess + params_.lambda_l2); }

  double leaf_value(const NodeStats& stats) const {
    return -stats.grad / (stats.hess + params_.lambda_l2) * params_.learning_rate;
  }

  Tree grow_tree(FitTrace* trace) {
    Tree tree;
    NodeStats root;
    for (std::size_t r = 0; r < m_; ++r) {
      root.grad += grad_[r];
      root.hess += hess_[r];
    }
    tree.nodes.push_back({});
    tree.nodes[0].cover = root.hess;
    std::fill(node_of_.begin(), node_of_.end(), 0);

    std::vector<FrontierNode> frontier{{0, 0, m_, root}};
    const Entry* entries_in = sorted_.data();
    int buffer = 0;

    for (int depth = 0; depth < params_.max_depth && !frontier.empty(); ++depth) {
      const auto best = find_splits(frontier, entries_in);

      std::vector<FrontierNode> next;
      std::vector<std::size_t> split_slots;
      std::size_t cursor = 0;
      for (std::size_t s = 0; s < frontier.size(); ++s) {
        const auto& fn = frontier[s];
        const auto node_id = static_cast<std::size_t>(fn.id);
        if (best[s].feature < 0) {
          tree.nodes[node_id].value = leaf_value(fn.stats);
          continue;
        }
        const NodeStats left{best[s].left_grad, best[s].left_hess};
        const NodeStats right{fn.stats.grad - left.grad, fn.stats.hess - left.hess};
        const int left_id = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back({});
        tree.nodes.push_back({});
        auto& node = tree.nodes[node_id];
        node.feature = best[s].feature;
        node.threshold = best[s].threshold;
        node.gain = best[s].gain;
        node.left = left_id;
        node.right = left_id + 1;
        node.cover = left.hess + right.hess;
        tree.nodes[static_cast<std::size_t>(left_id)].cover = left.hess;
        tree.nodes[static_cast<std::size_t>(left_id) + 1].cover = right.hess;
        if (trace) trace->total_gain += best[s].gain;

        // Route the node's rows using the split feature's own sorted segment.
        const Entry* seg = entries_in + static_cast<std::size_t>(node.feature) * m_;
        std::size_t left_count = 0;
        for (std::size_t k = fn.begin; k < fn.end; ++k) {
          const std::size_t r = seg[k].row;
          const bool go_left = ds_.features()(rows_[r], node.feature) < node.threshold;
          goes_left_[r] = go_left;
          node_of_[r] = go_left ? left_id : left_id + 1;
          left_count += go_left;
        }
        const std::size_t size = fn.end - fn.begin;
        next.push_back({left_id, cursor, cursor + left_count, left});
        next.push_back({left_id + 1, cursor + left_count, cursor + size, right});
        cursor += size;
        split_slots.push_back(s);
      }
      if (next.empty()) {
        frontier.clear();
        break;
      }
      if (depth + 1 == params_.max_depth) {
        frontier = std::move(next);
        break;
      }

      Entry* entries_out = work_[buffer].data();
      const char* goes_left = goes_left_.data();
      for (std::size_t f = 0; f < p_; ++f) {
        const Entry* src = entries_in + f * m_;
        Entry* dst = entries_out + f * m_;
        for (std::size_t c = 0; c < split_slots.size(); ++c) {
          const auto& parent = frontier[split_slots[c]];
          std::size_t to_left = next[2 * c].begin;
          std::size_t to_right = next[2 * c + 1].begin;
          for (std::size_t k = parent.begin; k < parent.end; ++k) {
            const Entry e = src[k];
            const std::size_t go_left = static_cast<std::size_t>(goes_left[e.row]);
            dst[go_left ? to_left : to_right] = e;
            to_left += go_left;
            to_right += 1 - go_left;
          }
        }
      }
      entries_in = entries_out;
      buffer ^= 1;
      frontier = std::move(next);
    }
    for (const auto& fn : frontier)
      tree.nodes[static_cast<std::size_t>(fn.id)].value = leaf_value(fn.stats);
    return tree;
  }

  std::vector<SplitCandidate> find_splits(const std::vector<FrontierNode>& frontier,
                                          const Entry* entries_in) const {
    const double lambda = params_.lambda_l2;
    const double min_weight = params_.min_child_weight;
    std::vector<SplitCandidate> best(frontier.size(), SplitCandidate{params_.min_gain});

    for (std::size_t s = 0; s < frontier.size(); ++s) {
      const auto& fn = frontier[s];
      // Both children need at least min_child_weight of hessian.
      if (fn.end - fn.begin < 2 || fn.stats.hess < 2.0 * min_weight) continue;
      const double parent_grad = fn.stats.grad;
      const double parent_hess = fn.stats.hess;
      const double parent_score = score(parent_grad, parent_hess);
      const double* row_grad = grad_.data();
      const double* row_hess = hess_.data();
      // Best child score sum so far; candidates are screened by cross-multiplying
      // to avoid two divisions per position.
      double best_children = 2.0 * params_.min_gain + parent_score;
      SplitCandidate cand{params_.min_gain};
      for (std::size_t f = 0; f < p_; ++f) {
        const Entry* entries = entries_in + f * m_;
        double grad = 0.0, hess = 0.0;
        Index last = entries[fn.begin].rank;
        for (std::size_t k = fn.begin; k < fn.end; ++k) {
          const Entry e = entries[k];
          if (e.rank != last && hess >= min_weight) {
            const double right_hess = parent_hess - hess;
            if (right_hess >= min_weight) {
              const double right_grad = parent_grad - grad;
              const double lden = hess + lambda;
              const double rden = right_hess + lambda;
              if (grad * grad * rden + right_grad * right_grad * lden > best_children * lden * rden) {
                const double children = grad * grad / lden + right_grad * right_grad / rden;
                const double gain = 0.5 * (children - parent_score);
                // Gains equal up to rounding keep the earlier (lower feature,
                // lower threshold) candidate, whatever the summation order.
                if (gain > cand.gain + kGainTieTolerance * std::abs(cand.gain)) {
                  const double lo = distinct_[f][last];
                  const double hi = distinct_[f][e.rank];
                  double threshold = lo + 0.5 * (hi - lo);
                  if (!(threshold > lo)) threshold = hi;
                  cand = {gain, static_cast<int>(f), threshold, grad, hess};
                  best_children = children;
                }
              }
            }
          }
          grad += row_grad[e.row];
          hess += row_hess[e.row];
          last = e.rank;
        }
      }
      best[s] = cand;
    }
    return best;
  }

  const Dataset& ds_;
  std::vector<int> rows_;
  std::vector<double> weights_;
  GbdtParams params_;
  Objective objective_;
  std::size_t m_;
  std::size_t p_;

  std::vector<Entry> sorted_;
  std::vector<Entry> work_[2];
  std::vector<std::vector<double>> distinct_;
  std::vector<double> margin_, grad_, hess_;
  std::vector<int> node_of_;
  std::vector<char> goes_left_;
};

}  // namespace

TreeEnsemble fit_gbdt(const Dataset& ds, const GbdtParams& params, std::uint64_t seed) {
  return fit_gbdt(ds, params, seed, default_objective(ds.task()));
}

TreeEnsemble fit_gbdt(const Dataset& ds, const GbdtParams& params, std::uint64_t /*seed*/,
                      Objective objective, FitTrace* trace) {
  std::vector<int> rows(static_cast<std::size_t>(ds.rows()));
  std::iota(rows.begin(), rows.end(), 0);
  return fit_gbdt_rows(ds, rows, params, objective, trace);
}

TreeEnsemble fit_gbdt_rows(const Dataset& ds, std::span<const int> rows, const GbdtParams& params,
                           Objective objective, FitTrace* trace) {
  params.validate();
  if (rows.empty()) throw DataError("cannot fit a model on zero rows");
  std::vector<double> multiplicity(static_cast<std::size_t>(ds.rows()), 0.0);
  for (int r : rows) {
    if (r < 0 || r >= ds.rows()) throw DataError("training row index out of range");
    multiplicity[static_cast<std::size_t>(r)] += 1.0;
  }
  std::vector<int> unique_rows;
  std::vector<double> weights;
  for (std::size_t r = 0; r < multiplicity.size(); ++r) {
    if (multiplicity[r] == 0.0) continue;
    if (objective == Objective::logistic) {
      const double y = ds.target()[static_cast<Eigen::Index>(r)];
      if (y != 0.0 && y != 1.0)
        throw DataError("logistic objective requires a 0/1 target (row " + std::to_string(r + 1) + ")");
    }
    unique_rows.push_back(static_cast<int>(r));
    weights.push_back(multiplicity[r]);
  }
  if (unique_rows.size() <= std::numeric_limits<std::uint16_t>::max()) {
    Trainer<std::uint16_t> trainer(ds, std::move(unique_rows), std::move(weights), params, objective);
    return trainer.run(trace);
  }
  Trainer<std::uint32_t> trainer(ds, std::move(unique_rows), std::move(weights), params, objective);
  return trainer.run(trace);
}

double predict_margin(const TreeEnsemble& ens, std::span<const double> x) {
  if (static_cast<int>(x.size()) != ens.num_features)
    throw UsageError("instance has " + std::to_string(x.size()) + " features, model expects " +
                     std::to_string(ens.num_features));
  double margin = ens.base_score;
  for (const auto& tree : ens.trees) {
    if (tree.nodes.empty()) continue;
    std::size_t id = 0;
    while (!tree.nodes[id].is_leaf()) {
      const auto& node = tree.nodes[id];
      id = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature)] < node.threshold
                                        ? node.left
                                        : node.right);
    }
    margin += tree.nodes[id].value;
  }
  return margin;
}

double predict_margin(const TreeEnsemble& ens, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return predict_margin(ens, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
}

double predict_proba(const TreeEnsemble& ens, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (ens.objective != Objective::logistic)
    throw UsageError("predict_proba requires a logistic model");
  return sigmoid(predict_margin(ens, x));
}

Eigen::VectorXd predict_margins(const TreeEnsemble& ens, const Eigen::MatrixXd& x) {
  Eigen::VectorXd out(x.rows());
  Eigen::VectorXd row(x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    row = x.row(i).transpose();
    out[i] = predict_margin(ens, row);
  }
  return out;
}

Eigen::VectorXd predict_probas(const TreeEnsemble& ens, const Eigen::MatrixXd& x) {
  if (ens.objective != Objective::logistic)
    throw UsageError("predict_proba requires a logistic model");
  return predict_margins(ens, x).unaryExpr([](double m) { return sigmoid(m); });
}

Eigen::VectorXd gain_importance(const TreeEnsemble& ens) {
  Eigen::VectorXd importance = Eigen::VectorXd::Zero(ens.num_features);
  for (const auto& tree : ens.trees)
    for (const auto& node : tree.nodes)
      if (!node.is_leaf()) importance[node.feature] += node.gain;
  return importance;
}

std::string to_json(const TreeEnsemble& ens) {
  nlohmann::json doc;
  doc["objective"] = to_string(ens.objective);
  doc["base_score"] = ens.base_score;
  doc["learning_rate"] = ens.learning_rate;
  doc["num_features"] = ens.num_features;
  doc["leaf_values"] = "post-shrinkage";
  doc["margin_scale"] = ens.objective == Objective::logistic ? "log-odds" : "identity";
  auto& trees = doc["trees"] = nlohmann::json::array();
  for (const auto& tree : ens.trees) {
    auto nodes = nlohmann::json::array();
    for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
      const auto& node = tree.nodes[id];
      nodes.push_back({{"id", id},
                       {"kind", node.is_leaf() ? "leaf" : "split"},
                       {"feature", node.feature},
                       {"threshold", node.threshold},
                       {"left", node.left},
                       {"right", node.right},
                       {"value", node.value},
                       {"cover", node.cover},
                       {"gain", node.gain}});
    }
    trees.push_back({{"nodes", std::move(nodes)}});
  }
  return doc.dump(1);
}

TreeEnsemble ensemble_from_json(const std::string& text) {
  TreeEnsemble ens;
  try {
    const auto doc = nlohmann::json::parse(text);
    ens.objective = parse_objective(doc.at("objective").get<std::string>());
    ens.base_score = doc.at("base_score").get<double>();
    ens.learning_rate = doc.at("learning_rate").get<double>();
    ens.num_features = doc.at("num_features").get<int>();
    for (const auto& jt : doc.at("trees")) {
      Tree tree;
      for (const auto& jn : jt.at("nodes")) {
        TreeNode node;
        const bool leaf = jn.at("kind").get<std::string>() == "leaf";
        node.feature = leaf ? -1 : jn.at("feature").get<int>();
        node.threshold = jn.at("threshold").get<double>();
        node.left = jn.at("left").get<int>();
        node.right = jn.at("right").get<int>();
        node.value = jn.at("value").get<double>();
        node.cover = jn.at("cover").get<double>();
        node.gain = jn.value("gain", 0.0);
        if (jn.at("id").get<std::size_t>() != tree.nodes.size())
          throw DataError("model dump: node ids must be consecutive");
        tree.nodes.push_back(node);
      }
      ens.trees.push_back(std::move(tree));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed model dump: ") + e.what());
  }
  return ens;
}

}  // namespace roshap
