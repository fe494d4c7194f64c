#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "arc/features.hpp"
#include "arc/matrix.hpp"

namespace arc {

enum class ModelKind { NaiveBayes, LogisticRegression, Knn, RandomForest, Gbt, Ensemble };

std::string model_kind_name(ModelKind k);
ModelKind model_kind_from_name(const std::string& name);

// Per-feature mean/sd fitted on training rows; sd == 0 features pass
// through unscaled.
struct StandardizationStats {
    std::vector<double> mean;
    std::vector<double> sd;

    static StandardizationStats fit(const Matrix& x);
    std::vector<double> apply(std::span<const double> x) const;
    Matrix apply(const Matrix& x) const;
};

// Binary tree in array form; feature < 0 marks a leaf. For forest trees
// the leaf value is the late class fraction, for boosted trees the
// additive score contribution. Rows go left when x[feature] < threshold.
struct DecisionTree {
    struct Node {
        int feature = -1;
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        double value = 0.0;
    };
    std::vector<Node> nodes;

    double predict(std::span<const double> x) const;
};

struct NaiveBayesParams {
    double log_prior_late = 0.0;
    double log_prior_ontime = 0.0;
    std::vector<double> mean_late, var_late;
    std::vector<double> mean_ontime, var_ontime;
};

struct LogisticParams {
    std::vector<double> weights;
    double intercept = 0.0;
};

struct KnnParams {
    int k = 15;
    Matrix train_x;  // standardized
    std::vector<uint8_t> train_y;
};

struct ForestParams {
    std::vector<DecisionTree> trees;
};

struct GbtParams {
    double initial_score = 0.0;
    double shrinkage = 0.1;
    std::vector<DecisionTree> trees;
};

struct TrainedModel;

struct EnsembleParams {
    std::shared_ptr<const TrainedModel> first;
    std::shared_ptr<const TrainedModel> second;
};

struct ModelMeta {
    int window_months = 3;
    int grace_days = 5;
    bool include_ratio_features = false;
    std::uint64_t seed = 0;
    std::string split;  // free-text description of the training split
    ImputationStats imputation{};
};

struct TrainedModel {
    ModelKind kind = ModelKind::NaiveBayes;
    std::vector<std::string> feature_names;
    std::optional<StandardizationStats> standardization;
    std::variant<NaiveBayesParams, LogisticParams, KnnParams, ForestParams, GbtParams,
                 EnsembleParams>
        params;
    ModelMeta meta;

    double score(std::span<const double> x) const;  // p(late) in [0,1]
    PaymentLabel classify(std::span<const double> x, double threshold = 0.5) const;
};

// Batch scoring; the parallel path must match the serial one bit for bit.
std::vector<double> score_all(const TrainedModel& model, const Matrix& x, bool parallel = true);

struct LrConfig {
    double learning_rate = 0.1;
    int max_iters = 2000;
    double l2 = 1e-4;
    double tol = 1e-6;
};

struct RfConfig {
    int n_trees = 300;
    int max_depth = 16;
    int min_leaf = 5;
    int mtry = 0;  // 0 = ceil(sqrt(p))
    std::uint64_t seed = 0;
};

struct GbtConfig {
    int n_trees = 200;
    int max_depth = 3;
    double shrinkage = 0.1;
    int min_leaf = 1;
    std::uint64_t seed = 0;
};

TrainedModel train_naive_bayes(const Matrix& x, const std::vector<uint8_t>& y,
                               std::vector<std::string> feature_names);
TrainedModel train_logistic_regression(const Matrix& x, const std::vector<uint8_t>& y,
                                       std::vector<std::string> feature_names,
                                       const LrConfig& cfg = {});
TrainedModel train_knn(const Matrix& x, const std::vector<uint8_t>& y,
                       std::vector<std::string> feature_names, int k = 15);
TrainedModel train_random_forest(const Matrix& x, const std::vector<uint8_t>& y,
                                 std::vector<std::string> feature_names, const RfConfig& cfg = {},
                                 bool parallel = true);
// loss_curve, when given, receives the training log-loss after each round.
TrainedModel train_gbt(const Matrix& x, const std::vector<uint8_t>& y,
                       std::vector<std::string> feature_names, const GbtConfig& cfg = {},
                       std::vector<double>* loss_curve = nullptr);
TrainedModel train_ensemble(const Matrix& x, const std::vector<uint8_t>& y,
                            std::vector<std::string> feature_names, const RfConfig& rf_cfg = {},
                            const GbtConfig& gbt_cfg = {}, bool parallel = true);

// Model persistence: JSON with schema_version 1; load(save(m)) scores
// identically to m.
void save_model(const TrainedModel& model, const std::string& path);
TrainedModel load_model(const std::string& path);
std::string model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const std::string& text);

// Logistic-loss value and gradient used by train_logistic_regression;
// exposed for gradient checking. Parameter layout: [weights..., intercept].
double logistic_loss(const Matrix& x_std, const std::vector<uint8_t>& y,
                     std::span<const double> params, double l2);
std::vector<double> logistic_gradient(const Matrix& x_std, const std::vector<uint8_t>& y,
                                      std::span<const double> params, double l2);

}  // namespace arc
