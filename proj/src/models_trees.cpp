#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include "eea/error.hpp"
#include "eea/rng.hpp"
#include "models_detail.hpp"

namespace eea::detail {

namespace {

constexpr int kMaxBins = 64;
constexpr double kMinGain = 1e-12;

double logit(double q) {
  const double c = std::clamp(q, 1e-12, 1.0 - 1e-12);
  return std::log(c / (1.0 - c));
}

std::vector<std::vector<double>> column_copy(const FeatureMatrix& X) {
  const std::size_t p = X.n_cols();
  std::vector<std::vector<double>> cols(p, std::vector<double>(X.n_rows));
  for (std::size_t r = 0; r < X.n_rows; ++r)
    for (std::size_t c = 0; c < p; ++c) cols[c][r] = X.at(r, c);
  return cols;
}

}  // namespace

// ---------------------------------------------------------------------------
// Quantile binning

BinnedFeatures build_bins(const FeatureMatrix& X, int max_bins) {
  BinnedFeatures bins;
  bins.n_rows = X.n_rows;
  bins.n_features = X.n_cols();
  bins.edges.resize(bins.n_features);
  const auto cols = column_copy(X);
  for (std::size_t f = 0; f < bins.n_features; ++f) {
    std::vector<double> sorted = cols[f];
    std::sort(sorted.begin(), sorted.end());
    const double max_value = sorted.back();
    auto& edges = bins.edges[f];
    std::vector<double> distinct;
    distinct.reserve(sorted.size());
    for (const double v : sorted)
      if (distinct.empty() || v != distinct.back()) distinct.push_back(v);
    if (static_cast<int>(distinct.size()) <= max_bins) {
      // one bin per distinct value; the last value needs no edge
      edges.assign(distinct.begin(), distinct.end() - 1);
    } else {
      for (int k = 1; k < max_bins; ++k) {
        const std::size_t pos = (static_cast<std::size_t>(k) * sorted.size()) /
                                static_cast<std::size_t>(max_bins);
        const double cut = sorted[pos];
        if (cut >= max_value) break;
        if (edges.empty() || cut > edges.back()) edges.push_back(cut);
      }
    }
  }
  bins.codes.resize(bins.n_rows * bins.n_features);
  for (std::size_t r = 0; r < bins.n_rows; ++r)
    for (std::size_t f = 0; f < bins.n_features; ++f)
      bins.codes[r * bins.n_features + f] = code_for(bins.edges[f], X.at(r, f));
  return bins;
}

std::uint8_t code_for(const std::vector<double>& edges, double v) {
  const auto it = std::lower_bound(edges.begin(), edges.end(), v);
  return static_cast<std::uint8_t>(it - edges.begin());
}

std::vector<std::uint8_t> codes_for(const std::vector<std::vector<double>>& edges,
                                    const FeatureMatrix& X) {
  const std::size_t p = edges.size();
  std::vector<std::uint8_t> codes(X.n_rows * p);
  for (std::size_t r = 0; r < X.n_rows; ++r)
    for (std::size_t f = 0; f < p; ++f)
      codes[r * p + f] = code_for(edges[f], X.at(r, f));
  return codes;
}

// ---------------------------------------------------------------------------
// Tree (de)serialization: parallel arrays keep model files compact.

json tree_to_json(const std::vector<TreeNode>& nodes) {
  json t;
  json features = json::array(), thresholds = json::array(), bins = json::array(),
       lefts = json::array(), rights = json::array(), values = json::array();
  for (const auto& n : nodes) {
    features.push_back(n.feature);
    thresholds.push_back(hex_double(n.threshold));
    bins.push_back(n.bin);
    lefts.push_back(n.left);
    rights.push_back(n.right);
    values.push_back(hex_double(n.value));
  }
  t["feature"] = features;
  t["threshold"] = thresholds;
  t["bin"] = bins;
  t["left"] = lefts;
  t["right"] = rights;
  t["value"] = values;
  return t;
}

std::vector<TreeNode> tree_from_json(const json& t) {
  const auto& features = t.at("feature");
  std::vector<TreeNode> nodes(features.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    nodes[i].feature = features[i].get<int>();
    nodes[i].threshold = unhex_double(t.at("threshold")[i].get<std::string>());
    nodes[i].bin = t.at("bin")[i].get<int>();
    nodes[i].left = t.at("left")[i].get<int>();
    nodes[i].right = t.at("right")[i].get<int>();
    nodes[i].value = unhex_double(t.at("value")[i].get<std::string>());
  }
  return nodes;
}

namespace {

double walk_binned_tree(const std::vector<TreeNode>& nodes,
                        const std::uint8_t* row_codes) {
  int u = 0;
  while (nodes[u].feature >= 0)
    u = row_codes[nodes[u].feature] <= nodes[u].bin ? nodes[u].left : nodes[u].right;
  return nodes[u].value;
}

}  // namespace

// ---------------------------------------------------------------------------
// Random forest: bagged gini trees on binned features, mtry features per node.

namespace {

struct ForestBuilder {
  const BinnedFeatures& bins;
  std::span<const double> y;
  std::size_t p;
  int max_depth;
  std::size_t min_leaf;
  std::size_t mtry;
  rng::Stream& stream;

  std::vector<std::uint32_t> rows;     // in-bag row ids, partitioned in place
  std::vector<std::uint32_t> scratch;
  std::vector<std::size_t> pool;       // feature pool for mtry sampling
  std::vector<TreeNode> nodes;

  int build(std::size_t begin, std::size_t end, int depth) {
    const int idx = static_cast<int>(nodes.size());
    nodes.push_back({});
    const std::size_t count = end - begin;
    std::size_t pos = 0;
    for (std::size_t k = begin; k < end; ++k) pos += y[rows[k]] > 0.5;
    nodes[static_cast<std::size_t>(idx)].value =
        static_cast<double>(pos) / static_cast<double>(count);
    if (depth >= max_depth || count < 2 * min_leaf || pos == 0 || pos == count)
      return idx;

    for (std::size_t i = 0; i < mtry; ++i) {
      const std::size_t j = i + stream.uniform_below(p - i);
      std::swap(pool[i], pool[j]);
    }

    double best_score = 0.0;
    int best_feature = -1, best_bin = -1;
    std::size_t best_left_count = 0;
    std::uint32_t cnt[kMaxBins], cnt_pos[kMaxBins];
    for (std::size_t m = 0; m < mtry; ++m) {
      const std::size_t f = pool[m];
      const int nb = bins.n_bins(f);
      if (nb < 2) continue;
      std::memset(cnt, 0, sizeof(std::uint32_t) * static_cast<std::size_t>(nb));
      std::memset(cnt_pos, 0, sizeof(std::uint32_t) * static_cast<std::size_t>(nb));
      for (std::size_t k = begin; k < end; ++k) {
        const std::uint32_t r = rows[k];
        const std::uint8_t b = bins.codes[r * p + f];
        ++cnt[b];
        cnt_pos[b] += y[r] > 0.5;
      }
      std::size_t cl = 0, pl = 0;
      for (int b = 0; b + 1 < nb; ++b) {
        cl += cnt[b];
        pl += cnt_pos[b];
        if (cl < min_leaf || cl == 0) continue;
        const std::size_t cr = count - cl;
        if (cr < min_leaf) break;
        const std::size_t pr = pos - pl;
        const double impurity =
            2.0 * (static_cast<double>(pl) * static_cast<double>(cl - pl) /
                       static_cast<double>(cl) +
                   static_cast<double>(pr) * static_cast<double>(cr - pr) /
                       static_cast<double>(cr));
        if (best_feature < 0 || impurity < best_score) {
          best_score = impurity;
          best_feature = static_cast<int>(f);
          best_bin = b;
          best_left_count = cl;
        }
      }
    }
    if (best_feature < 0) return idx;
    // no split improves on a pure-enough node
    const double parent_impurity =
        2.0 * static_cast<double>(pos) * static_cast<double>(count - pos) /
        static_cast<double>(count);
    if (parent_impurity - best_score <= kMinGain) return idx;

    // stable partition keeps row order deterministic
    std::size_t left_fill = begin, right_fill = 0;
    for (std::size_t k = begin; k < end; ++k) {
      const std::uint32_t r = rows[k];
      if (bins.codes[r * p + static_cast<std::size_t>(best_feature)] <=
          static_cast<std::uint8_t>(best_bin))
        rows[left_fill++] = r;
      else
        scratch[right_fill++] = r;
    }
    std::copy(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(right_fill),
              rows.begin() + static_cast<std::ptrdiff_t>(left_fill));
    const std::size_t mid = begin + best_left_count;

    nodes[static_cast<std::size_t>(idx)].feature = best_feature;
    nodes[static_cast<std::size_t>(idx)].bin = best_bin;
    const int left = build(begin, mid, depth + 1);
    const int right = build(mid, end, depth + 1);
    nodes[static_cast<std::size_t>(idx)].left = left;
    nodes[static_cast<std::size_t>(idx)].right = right;
    return idx;
  }
};

}  // namespace

std::unique_ptr<RandomForestModel> RandomForestModel::fit_forest(
    const ModelSpec& spec, const FeatureMatrix& X, std::span<const double> y) {
  const int n_trees = std::max(1, static_cast<int>(spec.hyper("n_trees", 300)));
  const int max_depth = std::max(0, static_cast<int>(spec.hyper("max_depth", 12)));
  const std::size_t min_leaf =
      static_cast<std::size_t>(std::max(1.0, spec.hyper("min_samples_leaf", 5)));
  const std::size_t p = X.n_cols();
  std::size_t mtry = static_cast<std::size_t>(spec.hyper("mtry", 0));
  if (mtry == 0) mtry = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(p))));
  mtry = std::min(mtry, p);

  const BinnedFeatures bins = build_bins(X, kMaxBins);
  auto model = std::make_unique<RandomForestModel>();
  model->spec_ = spec;
  model->schema_ = X.names;
  model->edges = bins.edges;
  model->trees.reserve(static_cast<std::size_t>(n_trees));

  const std::size_t n = X.n_rows;
  for (int t = 0; t < n_trees; ++t) {
    rng::Stream stream(rng::derive(spec.seed, "random_forest/tree",
                                   static_cast<std::uint64_t>(t)));
    ForestBuilder builder{bins,    y,   p, max_depth, min_leaf, mtry, stream, {}, {},
                          {},      {}};
    builder.rows.resize(n);
    if (max_depth == 0) {
      // a depth-0 tree is the base rate; bagging it would only add noise
      std::iota(builder.rows.begin(), builder.rows.end(), 0u);
    } else {
      for (std::size_t i = 0; i < n; ++i)
        builder.rows[i] = static_cast<std::uint32_t>(stream.uniform_below(n));
    }
    builder.scratch.resize(n);
    builder.pool.resize(p);
    std::iota(builder.pool.begin(), builder.pool.end(), 0u);
    builder.build(0, n, 0);
    model->trees.push_back(std::move(builder.nodes));
  }
  return model;
}

std::vector<double> RandomForestModel::predict_impl(const FeatureMatrix& X) const {
  const std::vector<std::uint8_t> codes = codes_for(edges, X);
  const std::size_t p = edges.size();
  std::vector<double> probs(X.n_rows, 0.0);
  for (std::size_t r = 0; r < X.n_rows; ++r) {
    const std::uint8_t* row_codes = codes.data() + r * p;
    double sum = 0.0;
    for (const auto& tree : trees) sum += walk_binned_tree(tree, row_codes);
    probs[r] = sum / static_cast<double>(trees.size());
  }
  return probs;
}

void RandomForestModel::serialize_parameters(void* json_object) const {
  json& params = *static_cast<json*>(json_object);
  json edges_json = json::array();
  for (const auto& e : edges) edges_json.push_back(vec_to_json(e));
  params["edges"] = edges_json;
  json trees_json = json::array();
  for (const auto& t : trees) trees_json.push_back(tree_to_json(t));
  params["trees"] = trees_json;
}

std::unique_ptr<TrainedModel> RandomForestModel::from_json(
    const ModelSpec& spec, std::vector<std::string> schema, const json& params) {
  auto model = std::make_unique<RandomForestModel>();
  model->spec_ = spec;
  model->schema_ = std::move(schema);
  for (const auto& e : params.at("edges")) model->edges.push_back(vec_from_json(e));
  for (const auto& t : params.at("trees")) model->trees.push_back(tree_from_json(t));
  return model;
}

// ---------------------------------------------------------------------------
// Level-wise gradient boosting with exact split search over presorted columns.

namespace {

struct LevelNode {
  int node = -1;
  double grad_total = 0.0;
  double hess_total = 0.0;
  std::size_t count = 0;
  // best split so far
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
};

double leaf_weight(double g, double h, double l2) { return -g / (h + l2); }

double split_gain(double gl, double hl, double g, double h, double l2) {
  const double gr = g - gl;
  const double hr = h - hl;
  return 0.5 * (gl * gl / (hl + l2) + gr * gr / (hr + l2) - g * g / (h + l2));
}

}  // namespace

std::unique_ptr<GbtLevelwiseModel> GbtLevelwiseModel::fit_boost(
    const ModelSpec& spec, const FeatureMatrix& X, std::span<const double> y) {
  const int n_trees = std::max(0, static_cast<int>(spec.hyper("n_trees", 100)));
  const double lr = spec.hyper("learning_rate", 0.1);
  const int max_depth = std::max(0, static_cast<int>(spec.hyper("max_depth", 3)));
  const std::size_t min_leaf =
      static_cast<std::size_t>(std::max(1.0, spec.hyper("min_samples_leaf", 5)));
  const double l2 = spec.hyper("l2", 1.0);

  const std::size_t n = X.n_rows;
  const std::size_t p = X.n_cols();
  const auto cols = column_copy(X);
  std::vector<std::vector<std::uint32_t>> order(p);
  for (std::size_t f = 0; f < p; ++f) {
    order[f].resize(n);
    std::iota(order[f].begin(), order[f].end(), 0u);
    std::stable_sort(order[f].begin(), order[f].end(),
                     [&](std::uint32_t a, std::uint32_t b) {
                       return cols[f][a] < cols[f][b];
                     });
  }

  double ybar = 0.0;
  for (const double v : y) ybar += v;
  ybar /= static_cast<double>(n);

  auto model = std::make_unique<GbtLevelwiseModel>();
  model->spec_ = spec;
  model->schema_ = X.names;
  model->base_score = logit(ybar);
  model->trees.reserve(static_cast<std::size_t>(n_trees));

  std::vector<double> score(n, model->base_score);
  std::vector<double> grad(n), hess(n);
  std::vector<int> node_of_row(n);
  std::vector<int> slot_of_node;

  for (int t = 0; t < n_trees; ++t) {
    for (std::size_t r = 0; r < n; ++r) {
      const double pr = sigmoid(score[r]);
      grad[r] = pr - y[r];
      hess[r] = pr * (1.0 - pr);
    }
    std::vector<TreeNode> nodes(1);
    std::fill(node_of_row.begin(), node_of_row.end(), 0);

    std::vector<LevelNode> level(1);
    level[0].node = 0;
    for (std::size_t r = 0; r < n; ++r) {
      level[0].grad_total += grad[r];
      level[0].hess_total += hess[r];
    }
    level[0].count = n;

    for (int depth = 0; depth < max_depth && !level.empty(); ++depth) {
      slot_of_node.assign(nodes.size(), -1);
      for (std::size_t s = 0; s < level.size(); ++s)
        slot_of_node[static_cast<std::size_t>(level[s].node)] = static_cast<int>(s);

      std::vector<double> gl(level.size()), hl(level.size()), last(level.size());
      std::vector<std::size_t> cl(level.size());
      for (std::size_t f = 0; f < p; ++f) {
        std::fill(gl.begin(), gl.end(), 0.0);
        std::fill(hl.begin(), hl.end(), 0.0);
        std::fill(cl.begin(), cl.end(), 0u);
        const std::vector<double>& col = cols[f];
        for (const std::uint32_t r : order[f]) {
          const int s = slot_of_node[static_cast<std::size_t>(node_of_row[r])];
          if (s < 0) continue;
          LevelNode& ln = level[static_cast<std::size_t>(s)];
          const double v = col[r];
          if (cl[static_cast<std::size_t>(s)] > 0 &&
              v > last[static_cast<std::size_t>(s)]) {
            const std::size_t count_left = cl[static_cast<std::size_t>(s)];
            const std::size_t count_right = ln.count - count_left;
            if (count_left >= min_leaf && count_right >= min_leaf) {
              const double gain =
                  split_gain(gl[static_cast<std::size_t>(s)],
                             hl[static_cast<std::size_t>(s)], ln.grad_total,
                             ln.hess_total, l2);
              if (gain > ln.gain) {
                ln.gain = gain;
                ln.feature = static_cast<int>(f);
                ln.threshold = 0.5 * (last[static_cast<std::size_t>(s)] + v);
              }
            }
          }
          gl[static_cast<std::size_t>(s)] += grad[r];
          hl[static_cast<std::size_t>(s)] += hess[r];
          cl[static_cast<std::size_t>(s)] += 1;
          last[static_cast<std::size_t>(s)] = v;
        }
      }

      std::vector<LevelNode> next;
      next.reserve(level.size() * 2);
      std::vector<int> split_left(nodes.size(), -1);
      for (auto& ln : level) {
        const auto u = static_cast<std::size_t>(ln.node);
        if (ln.gain > kMinGain) {
          nodes[u].feature = ln.feature;
          nodes[u].threshold = ln.threshold;
          nodes[u].left = static_cast<int>(nodes.size());
          nodes[u].right = static_cast<int>(nodes.size() + 1);
          nodes.emplace_back();
          nodes.emplace_back();
          split_left.resize(nodes.size(), -1);
          split_left[u] = nodes[u].left;
          LevelNode left_child, right_child;
          left_child.node = nodes[u].left;
          right_child.node = nodes[u].right;
          next.push_back(left_child);
          next.push_back(right_child);
        } else {
          nodes[u].value = lr * leaf_weight(ln.grad_total, ln.hess_total, l2);
        }
      }
      // route rows of freshly split nodes and accumulate child stats
      slot_of_node.assign(nodes.size(), -1);
      for (std::size_t s = 0; s < next.size(); ++s)
        slot_of_node[static_cast<std::size_t>(next[s].node)] = static_cast<int>(s);
      for (std::size_t r = 0; r < n; ++r) {
        const auto u = static_cast<std::size_t>(node_of_row[r]);
        if (u < split_left.size() && split_left[u] >= 0) {
          const TreeNode& parent = nodes[u];
          const int child = cols[static_cast<std::size_t>(parent.feature)][r] <=
                                    parent.threshold
                                ? parent.left
                                : parent.right;
          node_of_row[r] = child;
          LevelNode& ln =
              next[static_cast<std::size_t>(slot_of_node[static_cast<std::size_t>(child)])];
          ln.grad_total += grad[r];
          ln.hess_total += hess[r];
          ln.count += 1;
        }
      }
      level = std::move(next);
    }
    for (const auto& ln : level) {
      nodes[static_cast<std::size_t>(ln.node)].value =
          lr * leaf_weight(ln.grad_total, ln.hess_total, l2);
    }
    for (std::size_t r = 0; r < n; ++r)
      score[r] += nodes[static_cast<std::size_t>(node_of_row[r])].value;
    model->trees.push_back(std::move(nodes));
  }
  return model;
}

std::vector<double> GbtLevelwiseModel::predict_impl(const FeatureMatrix& X) const {
  std::vector<double> probs(X.n_rows);
  for (std::size_t r = 0; r < X.n_rows; ++r) {
    double s = base_score;
    for (const auto& tree : trees) {
      int u = 0;
      while (tree[static_cast<std::size_t>(u)].feature >= 0) {
        const auto& node = tree[static_cast<std::size_t>(u)];
        u = X.at(r, static_cast<std::size_t>(node.feature)) <= node.threshold
                ? node.left
                : node.right;
      }
      s += tree[static_cast<std::size_t>(u)].value;
    }
    probs[r] = sigmoid(s);
  }
  return probs;
}

void GbtLevelwiseModel::serialize_parameters(void* json_object) const {
  json& params = *static_cast<json*>(json_object);
  params["base_score"] = hex_double(base_score);
  json trees_json = json::array();
  for (const auto& t : trees) trees_json.push_back(tree_to_json(t));
  params["trees"] = trees_json;
}

std::unique_ptr<TrainedModel> GbtLevelwiseModel::from_json(
    const ModelSpec& spec, std::vector<std::string> schema, const json& params) {
  auto model = std::make_unique<GbtLevelwiseModel>();
  model->spec_ = spec;
  model->schema_ = std::move(schema);
  model->base_score = unhex_double(params.at("base_score").get<std::string>());
  for (const auto& t : params.at("trees")) model->trees.push_back(tree_from_json(t));
  return model;
}

// ---------------------------------------------------------------------------
// Leaf-wise (best-first) gradient boosting on 64-bin feature histograms.

namespace {

struct LeafHist {
  std::vector<double> grad;   // p * kMaxBins
  std::vector<double> hess;
  std::vector<double> count;  // integer-valued; doubles so subtraction matches

  void resize(std::size_t p) {
    grad.assign(p * kMaxBins, 0.0);
    hess.assign(p * kMaxBins, 0.0);
    count.assign(p * kMaxBins, 0.0);
  }
  void subtract(const LeafHist& other) {
    for (std::size_t i = 0; i < grad.size(); ++i) {
      grad[i] -= other.grad[i];
      hess[i] -= other.hess[i];
      count[i] -= other.count[i];
    }
  }
};

struct LiveLeaf {
  int node = -1;
  std::size_t begin = 0, end = 0;
  double grad_total = 0.0, hess_total = 0.0;
  LeafHist hist;
  // best candidate split
  double gain = 0.0;
  int feature = -1;
  int bin = -1;
};

}  // namespace

std::unique_ptr<GbtHistLeafwiseModel> GbtHistLeafwiseModel::fit_boost(
    const ModelSpec& spec, const FeatureMatrix& X, std::span<const double> y) {
  const int n_trees = std::max(0, static_cast<int>(spec.hyper("n_trees", 100)));
  const double lr = spec.hyper("learning_rate", 0.1);
  const int max_leaves = std::max(1, static_cast<int>(spec.hyper("max_leaves", 15)));
  const std::size_t min_leaf =
      static_cast<std::size_t>(std::max(1.0, spec.hyper("min_samples_leaf", 5)));
  const double l2 = spec.hyper("l2", 1.0);

  const std::size_t n = X.n_rows;
  const std::size_t p = X.n_cols();
  const BinnedFeatures bins = build_bins(X, kMaxBins);

  double ybar = 0.0;
  for (const double v : y) ybar += v;
  ybar /= static_cast<double>(n);

  auto model = std::make_unique<GbtHistLeafwiseModel>();
  model->spec_ = spec;
  model->schema_ = X.names;
  model->base_score = logit(ybar);
  model->edges = bins.edges;
  model->trees.reserve(static_cast<std::size_t>(n_trees));

  std::vector<double> score(n, model->base_score);
  std::vector<double> grad(n), hess(n);
  std::vector<std::uint32_t> rows(n), scratch(n);

  const auto accumulate_hist = [&](LiveLeaf& leaf) {
    leaf.hist.resize(p);
    for (std::size_t k = leaf.begin; k < leaf.end; ++k) {
      const std::uint32_t r = rows[k];
      const std::uint8_t* rc = bins.codes.data() + static_cast<std::size_t>(r) * p;
      for (std::size_t f = 0; f < p; ++f) {
        const std::size_t cell = f * kMaxBins + rc[f];
        leaf.hist.grad[cell] += grad[r];
        leaf.hist.hess[cell] += hess[r];
        leaf.hist.count[cell] += 1.0;
      }
    }
  };

  const auto eval_best = [&](LiveLeaf& leaf) {
    leaf.gain = 0.0;
    leaf.feature = -1;
    leaf.bin = -1;
    const std::size_t count = leaf.end - leaf.begin;
    for (std::size_t f = 0; f < p; ++f) {
      const int nb = bins.n_bins(f);
      if (nb < 2) continue;
      double gl = 0.0, hl = 0.0, cl = 0.0;
      for (int b = 0; b + 1 < nb; ++b) {
        const std::size_t cell = f * kMaxBins + static_cast<std::size_t>(b);
        gl += leaf.hist.grad[cell];
        hl += leaf.hist.hess[cell];
        cl += leaf.hist.count[cell];
        if (cl < static_cast<double>(min_leaf)) continue;
        if (static_cast<double>(count) - cl < static_cast<double>(min_leaf)) break;
        const double gain = split_gain(gl, hl, leaf.grad_total, leaf.hess_total, l2);
        if (gain > leaf.gain) {
          leaf.gain = gain;
          leaf.feature = static_cast<int>(f);
          leaf.bin = b;
        }
      }
    }
  };

  for (int t = 0; t < n_trees; ++t) {
    for (std::size_t r = 0; r < n; ++r) {
      const double pr = sigmoid(score[r]);
      grad[r] = pr - y[r];
      hess[r] = pr * (1.0 - pr);
    }
    std::iota(rows.begin(), rows.end(), 0u);
    std::vector<TreeNode> nodes(1);
    std::vector<LiveLeaf> live;
    live.reserve(static_cast<std::size_t>(max_leaves));
    {
      LiveLeaf root;
      root.node = 0;
      root.begin = 0;
      root.end = n;
      for (std::size_t r = 0; r < n; ++r) {
        root.grad_total += grad[r];
        root.hess_total += hess[r];
      }
      accumulate_hist(root);
      eval_best(root);
      live.push_back(std::move(root));
    }

    while (static_cast<int>(live.size()) < max_leaves) {
      std::size_t best = live.size();
      for (std::size_t s = 0; s < live.size(); ++s)
        if (live[s].gain > kMinGain && (best == live.size() || live[s].gain > live[best].gain))
          best = s;
      if (best == live.size()) break;

      LiveLeaf parent = std::move(live[best]);
      const auto u = static_cast<std::size_t>(parent.node);
      nodes[u].feature = parent.feature;
      nodes[u].bin = parent.bin;
      nodes[u].left = static_cast<int>(nodes.size());
      nodes[u].right = static_cast<int>(nodes.size() + 1);
      nodes.emplace_back();
      nodes.emplace_back();

      // stable partition of the parent's row range
      std::size_t left_fill = parent.begin, right_count = 0;
      for (std::size_t k = parent.begin; k < parent.end; ++k) {
        const std::uint32_t r = rows[k];
        if (bins.codes[static_cast<std::size_t>(r) * p +
                       static_cast<std::size_t>(parent.feature)] <=
            static_cast<std::uint8_t>(parent.bin))
          rows[left_fill++] = r;
        else
          scratch[right_count++] = r;
      }
      std::copy(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(right_count),
                rows.begin() + static_cast<std::ptrdiff_t>(left_fill));

      LiveLeaf left, right;
      left.node = nodes[u].left;
      left.begin = parent.begin;
      left.end = left_fill;
      right.node = nodes[u].right;
      right.begin = left_fill;
      right.end = parent.end;
      for (std::size_t k = left.begin; k < left.end; ++k) {
        left.grad_total += grad[rows[k]];
        left.hess_total += hess[rows[k]];
      }
      right.grad_total = parent.grad_total - left.grad_total;
      right.hess_total = parent.hess_total - left.hess_total;

      // build the smaller child's histogram; the larger is parent minus child
      if (left.end - left.begin <= right.end - right.begin) {
        accumulate_hist(left);
        parent.hist.subtract(left.hist);
        right.hist = std::move(parent.hist);
      } else {
        accumulate_hist(right);
        parent.hist.subtract(right.hist);
        left.hist = std::move(parent.hist);
      }
      eval_best(left);
      eval_best(right);
      live[best] = std::move(left);
      live.push_back(std::move(right));
    }

    for (const auto& leaf : live) {
      const double value = lr * leaf_weight(leaf.grad_total, leaf.hess_total, l2);
      nodes[static_cast<std::size_t>(leaf.node)].value = value;
      for (std::size_t k = leaf.begin; k < leaf.end; ++k) score[rows[k]] += value;
    }
    model->trees.push_back(std::move(nodes));
  }
  return model;
}

std::vector<double> GbtHistLeafwiseModel::predict_impl(const FeatureMatrix& X) const {
  const std::vector<std::uint8_t> codes = codes_for(edges, X);
  const std::size_t p = edges.size();
  std::vector<double> probs(X.n_rows);
  for (std::size_t r = 0; r < X.n_rows; ++r) {
    const std::uint8_t* rc = codes.data() + r * p;
    double s = base_score;
    for (const auto& tree : trees) s += walk_binned_tree(tree, rc);
    probs[r] = sigmoid(s);
  }
  return probs;
}

void GbtHistLeafwiseModel::serialize_parameters(void* json_object) const {
  json& params = *static_cast<json*>(json_object);
  params["base_score"] = hex_double(base_score);
  json edges_json = json::array();
  for (const auto& e : edges) edges_json.push_back(vec_to_json(e));
  params["edges"] = edges_json;
  json trees_json = json::array();
  for (const auto& t : trees) trees_json.push_back(tree_to_json(t));
  params["trees"] = trees_json;
}

std::unique_ptr<TrainedModel> GbtHistLeafwiseModel::from_json(
    const ModelSpec& spec, std::vector<std::string> schema, const json& params) {
  auto model = std::make_unique<GbtHistLeafwiseModel>();
  model->spec_ = spec;
  model->schema_ = std::move(schema);
  model->base_score = unhex_double(params.at("base_score").get<std::string>());
  for (const auto& e : params.at("edges")) model->edges.push_back(vec_from_json(e));
  for (const auto& t : params.at("trees")) model->trees.push_back(tree_from_json(t));
  return model;
}

}  // namespace eea::detail
