#include "arc/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace arc {

namespace {

constexpr double kPi = 3.14159265358979323846;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void check_width(const TrainedModel& m, std::span<const double> x) {
    if (x.size() != m.feature_names.size()) {
        throw std::runtime_error("feature count mismatch: model expects " +
                                 std::to_string(m.feature_names.size()) + ", got " +
                                 std::to_string(x.size()));
    }
}

void check_two_classes(const std::vector<uint8_t>& y) {
    bool has_late = false, has_ontime = false;
    for (uint8_t v : y) (v ? has_late : has_ontime) = true;
    if (!has_late || !has_ontime) {
        throw std::runtime_error("training set contains a single class");
    }
}

}  // namespace

std::string model_kind_name(ModelKind k) {
    switch (k) {
        case ModelKind::NaiveBayes: return "naive_bayes";
        case ModelKind::LogisticRegression: return "logistic_regression";
        case ModelKind::Knn: return "knn";
        case ModelKind::RandomForest: return "random_forest";
        case ModelKind::Gbt: return "gbt";
        case ModelKind::Ensemble: return "ensemble";
    }
    throw std::runtime_error("unknown model kind");
}

ModelKind model_kind_from_name(const std::string& name) {
    if (name == "naive_bayes") return ModelKind::NaiveBayes;
    if (name == "logistic_regression") return ModelKind::LogisticRegression;
    if (name == "knn") return ModelKind::Knn;
    if (name == "random_forest") return ModelKind::RandomForest;
    if (name == "gbt") return ModelKind::Gbt;
    if (name == "ensemble") return ModelKind::Ensemble;
    throw ConfigError("unknown model kind: '" + name + "'");
}

StandardizationStats StandardizationStats::fit(const Matrix& x) {
    if (x.rows == 0) throw std::runtime_error("standardization: empty matrix");
    StandardizationStats s;
    s.mean.assign(x.cols, 0.0);
    s.sd.assign(x.cols, 0.0);
    for (size_t i = 0; i < x.rows; ++i) {
        for (size_t j = 0; j < x.cols; ++j) s.mean[j] += x.at(i, j);
    }
    for (double& m : s.mean) m /= double(x.rows);
    for (size_t i = 0; i < x.rows; ++i) {
        for (size_t j = 0; j < x.cols; ++j) {
            double d = x.at(i, j) - s.mean[j];
            s.sd[j] += d * d;
        }
    }
    for (double& v : s.sd) v = std::sqrt(v / double(x.rows));
    return s;
}

std::vector<double> StandardizationStats::apply(std::span<const double> x) const {
    std::vector<double> out(x.size());
    for (size_t j = 0; j < x.size(); ++j) {
        out[j] = sd[j] > 0.0 ? (x[j] - mean[j]) / sd[j] : x[j];
    }
    return out;
}

Matrix StandardizationStats::apply(const Matrix& x) const {
    Matrix out(x.rows, x.cols);
    for (size_t i = 0; i < x.rows; ++i) {
        for (size_t j = 0; j < x.cols; ++j) {
            out.at(i, j) = sd[j] > 0.0 ? (x.at(i, j) - mean[j]) / sd[j] : x.at(i, j);
        }
    }
    return out;
}

double DecisionTree::predict(std::span<const double> x) const {
    int i = 0;
    while (nodes[size_t(i)].feature >= 0) {
        const Node& n = nodes[size_t(i)];
        i = x[size_t(n.feature)] < n.threshold ? n.left : n.right;
    }
    return nodes[size_t(i)].value;
}

// ---------------------------------------------------------------------------
// Naive Bayes

TrainedModel train_naive_bayes(const Matrix& x, const std::vector<uint8_t>& y,
                               std::vector<std::string> feature_names) {
    check_two_classes(y);
    size_t p = x.cols;
    size_t n_late = 0;
    for (uint8_t v : y) n_late += v;
    size_t n_ontime = x.rows - n_late;

    NaiveBayesParams nb;
    nb.mean_late.assign(p, 0.0);
    nb.var_late.assign(p, 0.0);
    nb.mean_ontime.assign(p, 0.0);
    nb.var_ontime.assign(p, 0.0);
    for (size_t i = 0; i < x.rows; ++i) {
        auto& mean = y[i] ? nb.mean_late : nb.mean_ontime;
        for (size_t j = 0; j < p; ++j) mean[j] += x.at(i, j);
    }
    for (size_t j = 0; j < p; ++j) {
        nb.mean_late[j] /= double(n_late);
        nb.mean_ontime[j] /= double(n_ontime);
    }
    for (size_t i = 0; i < x.rows; ++i) {
        auto& mean = y[i] ? nb.mean_late : nb.mean_ontime;
        auto& var = y[i] ? nb.var_late : nb.var_ontime;
        for (size_t j = 0; j < p; ++j) {
            double d = x.at(i, j) - mean[j];
            var[j] += d * d;
        }
    }
    double max_var = 0.0;
    for (size_t j = 0; j < p; ++j) {
        nb.var_late[j] /= double(n_late);
        nb.var_ontime[j] /= double(n_ontime);
        max_var = std::max({max_var, nb.var_late[j], nb.var_ontime[j]});
    }
    double floor = std::max(1e-9 * max_var, 1e-12);
    for (size_t j = 0; j < p; ++j) {
        nb.var_late[j] = std::max(nb.var_late[j], floor);
        nb.var_ontime[j] = std::max(nb.var_ontime[j], floor);
    }
    nb.log_prior_late = std::log(double(n_late) / double(x.rows));
    nb.log_prior_ontime = std::log(double(n_ontime) / double(x.rows));

    TrainedModel m;
    m.kind = ModelKind::NaiveBayes;
    m.feature_names = std::move(feature_names);
    m.params = std::move(nb);
    return m;
}

namespace {

double nb_score(const NaiveBayesParams& nb, std::span<const double> x) {
    double ll = nb.log_prior_late;
    double lo = nb.log_prior_ontime;
    for (size_t j = 0; j < x.size(); ++j) {
        double dl = x[j] - nb.mean_late[j];
        ll += -0.5 * std::log(2.0 * kPi * nb.var_late[j]) - dl * dl / (2.0 * nb.var_late[j]);
        double dn = x[j] - nb.mean_ontime[j];
        lo += -0.5 * std::log(2.0 * kPi * nb.var_ontime[j]) - dn * dn / (2.0 * nb.var_ontime[j]);
    }
    // posterior via stable log-sum-exp
    double mx = std::max(ll, lo);
    return std::exp(ll - mx) / (std::exp(ll - mx) + std::exp(lo - mx));
}

}  // namespace

// ---------------------------------------------------------------------------
// Logistic regression

double logistic_loss(const Matrix& x_std, const std::vector<uint8_t>& y,
                     std::span<const double> params, double l2) {
    size_t p = x_std.cols;
    double loss = 0.0;
    for (size_t i = 0; i < x_std.rows; ++i) {
        double z = params[p];
        auto row = x_std.row(i);
        for (size_t j = 0; j < p; ++j) z += params[j] * row[j];
        // log(1+e^z) - y*z, computed without overflow
        double softplus = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
        loss += softplus - (y[i] ? z : 0.0);
    }
    loss /= double(x_std.rows);
    for (size_t j = 0; j < p; ++j) loss += 0.5 * l2 * params[j] * params[j];
    return loss;
}

std::vector<double> logistic_gradient(const Matrix& x_std, const std::vector<uint8_t>& y,
                                      std::span<const double> params, double l2) {
    size_t p = x_std.cols;
    std::vector<double> grad(p + 1, 0.0);
    for (size_t i = 0; i < x_std.rows; ++i) {
        double z = params[p];
        auto row = x_std.row(i);
        for (size_t j = 0; j < p; ++j) z += params[j] * row[j];
        double r = sigmoid(z) - (y[i] ? 1.0 : 0.0);
        for (size_t j = 0; j < p; ++j) grad[j] += r * row[j];
        grad[p] += r;
    }
    for (double& g : grad) g /= double(x_std.rows);
    for (size_t j = 0; j < p; ++j) grad[j] += l2 * params[j];
    return grad;
}

TrainedModel train_logistic_regression(const Matrix& x, const std::vector<uint8_t>& y,
                                       std::vector<std::string> feature_names,
                                       const LrConfig& cfg) {
    if (x.rows == 0) throw std::runtime_error("logistic regression: empty training set");
    StandardizationStats stats = StandardizationStats::fit(x);
    Matrix xs = stats.apply(x);

    std::vector<double> params(x.cols + 1, 0.0);
    for (int iter = 0; iter < cfg.max_iters; ++iter) {
        std::vector<double> grad = logistic_gradient(xs, y, params, cfg.l2);
        double norm = 0.0;
        for (double g : grad) norm += g * g;
        norm = std::sqrt(norm);
        if (norm < cfg.tol) break;
        for (size_t j = 0; j < params.size(); ++j) params[j] -= cfg.learning_rate * grad[j];
        if (!std::isfinite(logistic_loss(xs, y, params, cfg.l2))) {
            throw std::runtime_error(
                "logistic regression diverged; reduce the learning rate");
        }
    }

    LogisticParams lp;
    lp.weights.assign(params.begin(), params.end() - 1);
    lp.intercept = params.back();

    TrainedModel m;
    m.kind = ModelKind::LogisticRegression;
    m.feature_names = std::move(feature_names);
    m.standardization = std::move(stats);
    m.params = std::move(lp);
    return m;
}

// ---------------------------------------------------------------------------
// k nearest neighbors

TrainedModel train_knn(const Matrix& x, const std::vector<uint8_t>& y,
                       std::vector<std::string> feature_names, int k) {
    if (k < 1 || size_t(k) > x.rows) {
        throw std::runtime_error("knn: k must be in [1, n_train]");
    }
    StandardizationStats stats = StandardizationStats::fit(x);
    KnnParams kp;
    kp.k = k;
    kp.train_x = stats.apply(x);
    kp.train_y = y;

    TrainedModel m;
    m.kind = ModelKind::Knn;
    m.feature_names = std::move(feature_names);
    m.standardization = std::move(stats);
    m.params = std::move(kp);
    return m;
}

namespace {

double knn_score(const KnnParams& kp, std::span<const double> xs) {
    size_t n = kp.train_x.rows;
    size_t p = kp.train_x.cols;
    std::vector<std::pair<double, size_t>> dist(n);
    for (size_t i = 0; i < n; ++i) {
        const double* row = kp.train_x.data.data() + i * p;
        double d = 0.0;
        for (size_t j = 0; j < p; ++j) {
            double diff = xs[j] - row[j];
            d += diff * diff;
        }
        dist[i] = {d, i};  // index tiebreak
    }
    size_t k = size_t(kp.k);
    std::nth_element(dist.begin(), dist.begin() + long(k - 1), dist.end());
    int late = 0;
    for (size_t i = 0; i < k; ++i) late += kp.train_y[dist[i].second];
    return double(late) / double(k);
}

double ensemble_score(const EnsembleParams& ep, std::span<const double> x) {
    return 0.5 * (ep.first->score(x) + ep.second->score(x));
}

}  // namespace

// ---------------------------------------------------------------------------
// Scoring dispatch

double TrainedModel::score(std::span<const double> x) const {
    check_width(*this, x);
    switch (kind) {
        case ModelKind::NaiveBayes:
            return nb_score(std::get<NaiveBayesParams>(params), x);
        case ModelKind::LogisticRegression: {
            const auto& lp = std::get<LogisticParams>(params);
            std::vector<double> xs = standardization ? standardization->apply(x)
                                                     : std::vector<double>(x.begin(), x.end());
            double z = lp.intercept;
            for (size_t j = 0; j < xs.size(); ++j) z += lp.weights[j] * xs[j];
            return sigmoid(z);
        }
        case ModelKind::Knn:
            return knn_score(std::get<KnnParams>(params),
                             standardization ? standardization->apply(x)
                                             : std::vector<double>(x.begin(), x.end()));
        case ModelKind::RandomForest: {
            const auto& fp = std::get<ForestParams>(params);
            double sum = 0.0;
            for (const DecisionTree& t : fp.trees) sum += t.predict(x);
            return sum / double(fp.trees.size());
        }
        case ModelKind::Gbt: {
            const auto& gp = std::get<GbtParams>(params);
            double z = gp.initial_score;
            for (const DecisionTree& t : gp.trees) z += gp.shrinkage * t.predict(x);
            return sigmoid(z);
        }
        case ModelKind::Ensemble:
            return ensemble_score(std::get<EnsembleParams>(params), x);
    }
    throw std::runtime_error("unknown model kind");
}

PaymentLabel TrainedModel::classify(std::span<const double> x, double threshold) const {
    return score(x) >= threshold ? PaymentLabel::Late : PaymentLabel::OnTime;
}

std::vector<double> score_all(const TrainedModel& model, const Matrix& x, bool parallel) {
    std::vector<double> out(x.rows);
    if (parallel) {
#pragma omp parallel for schedule(dynamic, 64)
        for (long i = 0; i < long(x.rows); ++i) {
            out[size_t(i)] = model.score(x.row(size_t(i)));
        }
    } else {
        for (size_t i = 0; i < x.rows; ++i) out[i] = model.score(x.row(i));
    }
    return out;
}

TrainedModel train_ensemble(const Matrix& x, const std::vector<uint8_t>& y,
                            std::vector<std::string> feature_names, const RfConfig& rf_cfg,
                            const GbtConfig& gbt_cfg, bool parallel) {
    EnsembleParams ep;
    ep.first = std::make_shared<TrainedModel>(
        train_random_forest(x, y, feature_names, rf_cfg, parallel));
    ep.second = std::make_shared<TrainedModel>(train_gbt(x, y, feature_names, gbt_cfg));

    TrainedModel m;
    m.kind = ModelKind::Ensemble;
    m.feature_names = std::move(feature_names);
    m.params = std::move(ep);
    return m;
}

}  // namespace arc
