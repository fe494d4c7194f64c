#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "arc/models.hpp"

using namespace arc;

namespace {

struct Dataset {
    Matrix x;
    std::vector<uint8_t> y;
    std::vector<std::string> names;
};

// Two Gaussian blobs, linearly separable up to noise.
Dataset blobs(size_t n, std::uint64_t seed, double gap = 2.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    Dataset d;
    d.names = {"f0", "f1", "f2"};
    d.x = Matrix(n, 3);
    d.y.resize(n);
    for (size_t i = 0; i < n; ++i) {
        uint8_t label = i % 2;
        double center = label ? gap : -gap;
        d.x.at(i, 0) = center + noise(rng);
        d.x.at(i, 1) = -center + noise(rng);
        d.x.at(i, 2) = noise(rng);  // pure noise feature
        d.y[i] = label;
    }
    return d;
}

double accuracy_on(const TrainedModel& m, const Dataset& d) {
    size_t hits = 0;
    for (size_t i = 0; i < d.x.rows; ++i) {
        PaymentLabel pred = m.classify(d.x.row(i));
        if ((pred == PaymentLabel::Late) == (d.y[i] == 1)) ++hits;
    }
    return double(hits) / double(d.x.rows);
}

}  // namespace

TEST_CASE("standardization: zero mean, unit sd, constant columns pass through") {
    Matrix x(4, 2);
    double vals[4] = {1, 2, 3, 10};
    for (size_t i = 0; i < 4; ++i) {
        x.at(i, 0) = vals[i];
        x.at(i, 1) = 7.0;  // constant
    }
    auto stats = StandardizationStats::fit(x);
    Matrix z = stats.apply(x);
    double mean0 = 0, var0 = 0;
    for (size_t i = 0; i < 4; ++i) mean0 += z.at(i, 0);
    mean0 /= 4;
    for (size_t i = 0; i < 4; ++i) var0 += (z.at(i, 0) - mean0) * (z.at(i, 0) - mean0);
    var0 /= 4;
    CHECK(std::abs(mean0) < 1e-12);
    CHECK(std::abs(var0 - 1.0) < 1e-12);
    for (size_t i = 0; i < 4; ++i) CHECK(z.at(i, 1) == 7.0);
}

TEST_CASE("naive bayes separates the blobs and outputs probabilities") {
    Dataset d = blobs(400, 1);
    TrainedModel m = train_naive_bayes(d.x, d.y, d.names);
    CHECK(accuracy_on(m, d) > 0.95);
    for (size_t i = 0; i < d.x.rows; ++i) {
        double p = m.score(d.x.row(i));
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
    }
}

TEST_CASE("naive bayes survives constant features via the variance floor") {
    Matrix x(6, 2);
    std::vector<uint8_t> y = {0, 0, 0, 1, 1, 1};
    for (size_t i = 0; i < 6; ++i) {
        x.at(i, 0) = 3.0;              // constant in both classes
        x.at(i, 1) = i < 3 ? -1 : 1;   // perfectly separating
    }
    TrainedModel m = train_naive_bayes(x, y, {"a", "b"});
    double p1 = m.score(std::vector<double>{3.0, 1.0});
    double p0 = m.score(std::vector<double>{3.0, -1.0});
    CHECK(std::isfinite(p1));
    CHECK(p1 > 0.9);
    CHECK(p0 < 0.1);
}

TEST_CASE("logistic gradient matches finite differences") {
    Dataset d = blobs(120, 7);
    auto stats = StandardizationStats::fit(d.x);
    Matrix z = stats.apply(d.x);
    std::mt19937_64 rng(17);
    std::normal_distribution<double> init(0.0, 0.5);
    double l2 = 1e-3;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> params(d.x.cols + 1);
        for (double& p : params) p = init(rng);
        auto grad = logistic_gradient(z, d.y, params, l2);
        REQUIRE(grad.size() == params.size());
        const double h = 1e-6;
        for (size_t j = 0; j < params.size(); ++j) {
            std::vector<double> lo = params, hi = params;
            lo[j] -= h;
            hi[j] += h;
            double fd = (logistic_loss(z, d.y, hi, l2) - logistic_loss(z, d.y, lo, l2)) / (2 * h);
            double denom = std::max({std::abs(fd), std::abs(grad[j]), 1e-8});
            CHECK(std::abs(fd - grad[j]) / denom < 1e-5);
        }
    }
}

TEST_CASE("logistic regression fits separable data") {
    Dataset d = blobs(400, 2);
    TrainedModel m = train_logistic_regression(d.x, d.y, d.names);
    CHECK(accuracy_on(m, d) > 0.95);
    const auto& p = std::get<LogisticParams>(m.params);
    // the informative features dominate the noise feature
    CHECK(std::abs(p.weights[0]) > std::abs(p.weights[2]));
    CHECK(std::abs(p.weights[1]) > std::abs(p.weights[2]));
}

TEST_CASE("knn with k=1 memorizes distinct training points") {
    Dataset d = blobs(60, 3);
    TrainedModel m = train_knn(d.x, d.y, d.names, 1);
    for (size_t i = 0; i < d.x.rows; ++i) {
        double p = m.score(d.x.row(i));
        CHECK(p == (d.y[i] ? 1.0 : 0.0));
    }
}

TEST_CASE("knn distance ties resolve by training order, deterministically") {
    // four equidistant neighbors of the origin, k=2 must take the two
    // earliest training rows (labels 1 and 0 -> p = 0.5)
    Matrix x(4, 2);
    std::vector<uint8_t> y = {1, 0, 1, 1};
    double pts[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    for (size_t i = 0; i < 4; ++i) {
        x.at(i, 0) = pts[i][0];
        x.at(i, 1) = pts[i][1];
    }
    TrainedModel m = train_knn(x, y, {"a", "b"}, 2);
    double p = m.score(std::vector<double>{0.0, 0.0});
    double again = m.score(std::vector<double>{0.0, 0.0});
    CHECK(p == again);
    CHECK(p == 0.5);
}

TEST_CASE("random forest: parallel training is bit-identical to serial") {
    Dataset d = blobs(300, 4);
    RfConfig cfg;
    cfg.n_trees = 40;
    cfg.seed = 9;
    TrainedModel serial = train_random_forest(d.x, d.y, d.names, cfg, false);
    TrainedModel parallel = train_random_forest(d.x, d.y, d.names, cfg, true);
    CHECK(model_to_json(serial) == model_to_json(parallel));
    CHECK(accuracy_on(serial, d) > 0.95);
}

TEST_CASE("random forest is deterministic in its seed") {
    Dataset d = blobs(200, 5);
    RfConfig cfg;
    cfg.n_trees = 20;
    cfg.seed = 31;
    TrainedModel a = train_random_forest(d.x, d.y, d.names, cfg);
    TrainedModel b = train_random_forest(d.x, d.y, d.names, cfg);
    CHECK(model_to_json(a) == model_to_json(b));
    cfg.seed = 32;
    TrainedModel c = train_random_forest(d.x, d.y, d.names, cfg);
    CHECK(model_to_json(a) != model_to_json(c));
}

TEST_CASE("gbt training loss is non-increasing and fits the blobs") {
    Dataset d = blobs(300, 6);
    GbtConfig cfg;
    cfg.n_trees = 60;
    std::vector<double> curve;
    TrainedModel m = train_gbt(d.x, d.y, d.names, cfg, &curve);
    REQUIRE(curve.size() == size_t(cfg.n_trees));
    for (size_t i = 1; i < curve.size(); ++i) CHECK(curve[i] <= curve[i - 1] + 1e-12);
    CHECK(accuracy_on(m, d) > 0.95);
}

TEST_CASE("ensemble score is the mean of its components") {
    Dataset d = blobs(200, 8);
    RfConfig rf;
    rf.n_trees = 25;
    GbtConfig gbt;
    gbt.n_trees = 40;
    TrainedModel ens = train_ensemble(d.x, d.y, d.names, rf, gbt);
    const auto& parts = std::get<EnsembleParams>(ens.params);
    for (size_t i = 0; i < d.x.rows; i += 7) {
        double expected = 0.5 * (parts.first->score(d.x.row(i)) + parts.second->score(d.x.row(i)));
        CHECK(ens.score(d.x.row(i)) == doctest::Approx(expected).epsilon(1e-15));
    }
}

TEST_CASE("classification threshold: late wins exactly at the boundary") {
    Dataset d = blobs(100, 10);
    TrainedModel m = train_naive_bayes(d.x, d.y, d.names);
    for (size_t i = 0; i < d.x.rows; ++i) {
        double p = m.score(d.x.row(i));
        CHECK((m.classify(d.x.row(i), p) == PaymentLabel::Late));
        if (p < 1.0)
            CHECK((m.classify(d.x.row(i), std::nextafter(p, 2.0)) == PaymentLabel::OnTime));
    }
}

TEST_CASE("save/load round trip preserves scores for every model kind") {
    Dataset d = blobs(150, 11);
    RfConfig rf;
    rf.n_trees = 15;
    GbtConfig gbt;
    gbt.n_trees = 20;
    std::vector<TrainedModel> models;
    models.push_back(train_naive_bayes(d.x, d.y, d.names));
    models.push_back(train_logistic_regression(d.x, d.y, d.names));
    models.push_back(train_knn(d.x, d.y, d.names, 5));
    models.push_back(train_random_forest(d.x, d.y, d.names, rf));
    models.push_back(train_gbt(d.x, d.y, d.names, gbt));
    models.push_back(train_ensemble(d.x, d.y, d.names, rf, gbt));
    for (const TrainedModel& m : models) {
        std::string path = "model_roundtrip_test.json";
        save_model(m, path);
        TrainedModel back = load_model(path);
        CHECK(back.kind == m.kind);
        CHECK(back.feature_names == m.feature_names);
        for (size_t i = 0; i < d.x.rows; i += 5)
            CHECK(back.score(d.x.row(i)) == m.score(d.x.row(i)));
        // serialization itself is stable
        CHECK(model_to_json(back) == model_to_json(m));
        std::remove(path.c_str());
    }
}

TEST_CASE("model loading rejects bad payloads") {
    CHECK_THROWS(model_from_json("not json"));
    CHECK_THROWS(model_from_json("{\"schema_version\": 99, \"kind\": \"naive_bayes\"}"));
    CHECK_THROWS(model_from_json("{\"schema_version\": 1, \"kind\": \"flux_capacitor\"}"));
}

TEST_CASE("score_all parallel path matches serial") {
    Dataset d = blobs(500, 12);
    RfConfig rf;
    rf.n_trees = 30;
    TrainedModel m = train_random_forest(d.x, d.y, d.names, rf);
    auto a = score_all(m, d.x, false);
    auto b = score_all(m, d.x, true);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}
