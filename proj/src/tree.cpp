#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "arc/models.hpp"

namespace arc {

namespace {

uint64_t splitmix64(uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

struct SplitChoice {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

// Classification tree on a bootstrap sample, Gini criterion, feature
// subsampling per node. Leaves hold the late fraction.
class GiniTreeBuilder {
public:
    GiniTreeBuilder(const Matrix& x, const std::vector<uint8_t>& y, const RfConfig& cfg,
                    std::mt19937_64& rng)
        : x_(x), y_(y), cfg_(cfg), rng_(rng) {
        mtry_ = cfg.mtry > 0 ? cfg.mtry : int(std::ceil(std::sqrt(double(x.cols))));
        mtry_ = std::min(mtry_, int(x.cols));
        feature_pool_.resize(x.cols);
        std::iota(feature_pool_.begin(), feature_pool_.end(), 0);
    }

    DecisionTree build(std::vector<size_t> sample) {
        DecisionTree tree;
        grow(tree, std::move(sample), 0);
        return tree;
    }

private:
    int grow(DecisionTree& tree, std::vector<size_t> idx, int depth) {
        size_t n = idx.size();
        size_t late = 0;
        for (size_t i : idx) late += y_[i];

        int node_id = int(tree.nodes.size());
        tree.nodes.emplace_back();

        bool pure = late == 0 || late == n;
        if (pure || depth >= cfg_.max_depth || n < 2 * size_t(cfg_.min_leaf)) {
            tree.nodes[size_t(node_id)].value = double(late) / double(n);
            return node_id;
        }

        SplitChoice best = find_split(idx, late);
        if (best.feature < 0) {
            tree.nodes[size_t(node_id)].value = double(late) / double(n);
            return node_id;
        }

        std::vector<size_t> left_idx, right_idx;
        left_idx.reserve(n);
        right_idx.reserve(n);
        for (size_t i : idx) {
            (x_.at(i, size_t(best.feature)) < best.threshold ? left_idx : right_idx).push_back(i);
        }
        idx.clear();
        idx.shrink_to_fit();

        tree.nodes[size_t(node_id)].feature = best.feature;
        tree.nodes[size_t(node_id)].threshold = best.threshold;
        int l = grow(tree, std::move(left_idx), depth + 1);
        int r = grow(tree, std::move(right_idx), depth + 1);
        tree.nodes[size_t(node_id)].left = l;
        tree.nodes[size_t(node_id)].right = r;
        return node_id;
    }

    SplitChoice find_split(const std::vector<size_t>& idx, size_t late_total) {
        size_t n = idx.size();
        double parent_gini = gini(double(late_total), double(n));

        // partial Fisher-Yates draw of mtry distinct features
        for (int j = 0; j < mtry_; ++j) {
            std::uniform_int_distribution<size_t> pick(size_t(j), feature_pool_.size() - 1);
            std::swap(feature_pool_[size_t(j)], feature_pool_[pick(rng_)]);
        }

        SplitChoice best;
        std::vector<std::pair<double, uint8_t>> vals(n);
        for (int j = 0; j < mtry_; ++j) {
            size_t f = feature_pool_[size_t(j)];
            for (size_t i = 0; i < n; ++i) vals[i] = {x_.at(idx[i], f), y_[idx[i]]};
            std::sort(vals.begin(), vals.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });

            double left_late = 0.0;
            for (size_t i = 1; i < n; ++i) {
                left_late += vals[i - 1].second;
                if (vals[i].first <= vals[i - 1].first) continue;
                size_t nl = i;
                size_t nr = n - i;
                if (nl < size_t(cfg_.min_leaf) || nr < size_t(cfg_.min_leaf)) continue;
                double right_late = double(late_total) - left_late;
                double child = (double(nl) * gini(left_late, double(nl)) +
                                double(nr) * gini(right_late, double(nr))) /
                               double(n);
                double gain = parent_gini - child;
                if (gain > best.gain) {
                    best.feature = int(f);
                    best.threshold = 0.5 * (vals[i - 1].first + vals[i].first);
                    best.gain = gain;
                }
            }
        }
        return best;
    }

    static double gini(double late, double n) {
        double p = late / n;
        return 1.0 - p * p - (1.0 - p) * (1.0 - p);
    }

    const Matrix& x_;
    const std::vector<uint8_t>& y_;
    const RfConfig& cfg_;
    std::mt19937_64& rng_;
    int mtry_ = 0;
    std::vector<size_t> feature_pool_;
};

// Least-squares regression tree on residuals with Newton leaf values
// sum(residual) / sum(hessian).
class ResidualTreeBuilder {
public:
    ResidualTreeBuilder(const Matrix& x, const std::vector<double>& residual,
                        const std::vector<double>& hessian, int max_depth, int min_leaf)
        : x_(x), residual_(residual), hessian_(hessian), max_depth_(max_depth),
          min_leaf_(min_leaf) {}

    DecisionTree build() {
        std::vector<size_t> idx(x_.rows);
        std::iota(idx.begin(), idx.end(), size_t(0));
        DecisionTree tree;
        grow(tree, std::move(idx), 0);
        return tree;
    }

private:
    int grow(DecisionTree& tree, std::vector<size_t> idx, int depth) {
        size_t n = idx.size();
        double sum_r = 0.0, sum_h = 0.0;
        for (size_t i : idx) {
            sum_r += residual_[i];
            sum_h += hessian_[i];
        }

        int node_id = int(tree.nodes.size());
        tree.nodes.emplace_back();

        SplitChoice best;
        if (depth < max_depth_ && n >= 2 * size_t(min_leaf_)) {
            best = find_split(idx, sum_r);
        }
        if (best.feature < 0) {
            tree.nodes[size_t(node_id)].value = sum_r / std::max(sum_h, 1e-12);
            return node_id;
        }

        std::vector<size_t> left_idx, right_idx;
        left_idx.reserve(n);
        right_idx.reserve(n);
        for (size_t i : idx) {
            (x_.at(i, size_t(best.feature)) < best.threshold ? left_idx : right_idx).push_back(i);
        }
        idx.clear();
        idx.shrink_to_fit();

        tree.nodes[size_t(node_id)].feature = best.feature;
        tree.nodes[size_t(node_id)].threshold = best.threshold;
        int l = grow(tree, std::move(left_idx), depth + 1);
        int r = grow(tree, std::move(right_idx), depth + 1);
        tree.nodes[size_t(node_id)].left = l;
        tree.nodes[size_t(node_id)].right = r;
        return node_id;
    }

    SplitChoice find_split(const std::vector<size_t>& idx, double sum_total) {
        size_t n = idx.size();
        double parent_score = sum_total * sum_total / double(n);

        SplitChoice best;
        std::vector<std::pair<double, double>> vals(n);  // (feature value, residual)
        for (size_t f = 0; f < x_.cols; ++f) {
            for (size_t i = 0; i < n; ++i) vals[i] = {x_.at(idx[i], f), residual_[idx[i]]};
            std::sort(vals.begin(), vals.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });

            double left_sum = 0.0;
            for (size_t i = 1; i < n; ++i) {
                left_sum += vals[i - 1].second;
                if (vals[i].first <= vals[i - 1].first) continue;
                size_t nl = i;
                size_t nr = n - i;
                if (nl < size_t(min_leaf_) || nr < size_t(min_leaf_)) continue;
                double right_sum = sum_total - left_sum;
                // SSE reduction up to constants
                double gain = left_sum * left_sum / double(nl) +
                              right_sum * right_sum / double(nr) - parent_score;
                if (gain > best.gain + 1e-12) {
                    best.feature = int(f);
                    best.threshold = 0.5 * (vals[i - 1].first + vals[i].first);
                    best.gain = gain;
                }
            }
        }
        return best;
    }

    const Matrix& x_;
    const std::vector<double>& residual_;
    const std::vector<double>& hessian_;
    int max_depth_;
    int min_leaf_;
};

}  // namespace

TrainedModel train_random_forest(const Matrix& x, const std::vector<uint8_t>& y,
                                 std::vector<std::string> feature_names, const RfConfig& cfg,
                                 bool parallel) {
    if (x.rows == 0) throw std::runtime_error("random forest: empty training set");
    if (cfg.n_trees < 1) throw ConfigError("random forest: n_trees must be >= 1");

    ForestParams fp;
    fp.trees.resize(size_t(cfg.n_trees));

    auto fit_tree = [&](int t) {
        // independent per-tree stream so parallel order cannot matter
        std::mt19937_64 rng(splitmix64(cfg.seed ^ (0xA5A5A5A5ULL + uint64_t(t))));
        std::vector<size_t> sample(x.rows);
        std::uniform_int_distribution<size_t> pick(0, x.rows - 1);
        for (size_t& s : sample) s = pick(rng);
        GiniTreeBuilder builder(x, y, cfg, rng);
        fp.trees[size_t(t)] = builder.build(std::move(sample));
    };

    if (parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int t = 0; t < cfg.n_trees; ++t) fit_tree(t);
    } else {
        for (int t = 0; t < cfg.n_trees; ++t) fit_tree(t);
    }

    TrainedModel m;
    m.kind = ModelKind::RandomForest;
    m.feature_names = std::move(feature_names);
    m.params = std::move(fp);
    m.meta.seed = cfg.seed;
    return m;
}

TrainedModel train_gbt(const Matrix& x, const std::vector<uint8_t>& y,
                       std::vector<std::string> feature_names, const GbtConfig& cfg,
                       std::vector<double>* loss_curve) {
    if (x.rows == 0) throw std::runtime_error("gbt: empty training set");
    size_t n = x.rows;
    size_t n_late = 0;
    for (uint8_t v : y) n_late += v;
    if (n_late == 0 || n_late == n) {
        throw std::runtime_error("gbt: training set contains a single class");
    }

    GbtParams gp;
    gp.shrinkage = cfg.shrinkage;
    gp.initial_score = std::log(double(n_late) / double(n - n_late));

    std::vector<double> score(n, gp.initial_score);
    std::vector<double> residual(n), hessian(n);
    if (loss_curve) loss_curve->clear();

    auto log_loss = [&]() {
        double loss = 0.0;
        for (size_t i = 0; i < n; ++i) {
            double z = score[i];
            double softplus = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
            loss += softplus - (y[i] ? z : 0.0);
        }
        return loss / double(n);
    };

    for (int round = 0; round < cfg.n_trees; ++round) {
        for (size_t i = 0; i < n; ++i) {
            double p = 1.0 / (1.0 + std::exp(-score[i]));
            residual[i] = (y[i] ? 1.0 : 0.0) - p;
            hessian[i] = p * (1.0 - p);
        }
        ResidualTreeBuilder builder(x, residual, hessian, cfg.max_depth, cfg.min_leaf);
        DecisionTree tree = builder.build();
        for (size_t i = 0; i < n; ++i) {
            score[i] += cfg.shrinkage * tree.predict(x.row(i));
        }
        gp.trees.push_back(std::move(tree));
        if (loss_curve) loss_curve->push_back(log_loss());
    }

    TrainedModel m;
    m.kind = ModelKind::Gbt;
    m.feature_names = std::move(feature_names);
    m.params = std::move(gp);
    m.meta.seed = cfg.seed;
    return m;
}

}  // namespace arc
