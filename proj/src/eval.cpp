#include "arc/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace arc {

AccuracyStats confusion_and_accuracy(const std::vector<uint8_t>& labels,
                                     const std::vector<uint8_t>& predictions) {
    if (labels.size() != predictions.size()) {
        throw std::runtime_error("confusion_and_accuracy: length mismatch");
    }
    if (labels.empty()) throw std::runtime_error("confusion_and_accuracy: empty input");
    AccuracyStats s;
    for (size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] && predictions[i]) s.confusion.tp++;
        else if (!labels[i] && predictions[i]) s.confusion.fp++;
        else if (!labels[i] && !predictions[i]) s.confusion.tn++;
        else s.confusion.fn++;
    }
    s.accuracy = double(s.confusion.tp + s.confusion.tn) / double(labels.size());
    size_t denom = 2 * s.confusion.tp + s.confusion.fp + s.confusion.fn;
    s.f1_late = denom == 0 ? 0.0 : 2.0 * double(s.confusion.tp) / double(denom);
    return s;
}

std::pair<RocCurve, double> roc_and_auc(const std::vector<uint8_t>& labels,
                                        const std::vector<double>& scores) {
    if (labels.size() != scores.size()) throw std::runtime_error("roc_and_auc: length mismatch");
    size_t n = labels.size();
    size_t n_pos = 0;
    for (uint8_t v : labels) n_pos += v;
    size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) {
        throw std::runtime_error("roc_and_auc: AUC undefined with a single class");
    }

    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t(0));
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return scores[a] > scores[b]; });

    // descending sweep with ties grouped, plus Mann-Whitney with average ranks
    RocCurve curve;
    curve.points.emplace_back(0.0, 0.0);
    double rank_sum_pos = 0.0;  // average ranks over ascending-score ranking
    size_t tp = 0, fp = 0;
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        size_t tie_pos = 0, tie_neg = 0;
        while (j < n && scores[order[j]] == scores[order[i]]) {
            (labels[order[j]] ? tie_pos : tie_neg)++;
            j++;
        }
        // ascending ranks for this tie group: positions n-j+1 .. n-i
        double avg_rank = (double(n - j + 1) + double(n - i)) / 2.0;
        rank_sum_pos += avg_rank * double(tie_pos);
        tp += tie_pos;
        fp += tie_neg;
        curve.points.emplace_back(double(fp) / double(n_neg), double(tp) / double(n_pos));
        i = j;
    }
    double u = rank_sum_pos - double(n_pos) * double(n_pos + 1) / 2.0;
    double auc = u / (double(n_pos) * double(n_neg));
    return {std::move(curve), auc};
}

std::vector<MonthlyPoint> monthly_accuracy(const std::vector<uint8_t>& labels,
                                           const std::vector<uint8_t>& predictions,
                                           const std::vector<Date>& creation_dates) {
    if (labels.size() != predictions.size() || labels.size() != creation_dates.size()) {
        throw std::runtime_error("monthly_accuracy: length mismatch");
    }
    if (labels.empty()) throw std::runtime_error("monthly_accuracy: empty input");
    struct Acc {
        size_t n = 0, correct = 0, late = 0;
    };
    std::map<YearMonth, Acc> by_month;
    for (size_t i = 0; i < labels.size(); ++i) {
        Acc& a = by_month[YearMonth::of(creation_dates[i])];
        a.n++;
        a.correct += labels[i] == predictions[i];
        a.late += labels[i];
    }
    std::vector<MonthlyPoint> out;
    for (const auto& [month, a] : by_month) {
        MonthlyPoint p;
        p.month = month;
        p.n = a.n;
        p.accuracy = double(a.correct) / double(a.n);
        double late_share = double(a.late) / double(a.n);
        p.baseline = std::max(late_share, 1.0 - late_share);
        out.push_back(p);
    }
    return out;
}

double majority_share(const std::vector<uint8_t>& labels) {
    if (labels.empty()) throw std::runtime_error("majority_share: empty input");
    size_t late = 0;
    for (uint8_t v : labels) late += v;
    double share = double(late) / double(labels.size());
    return std::max(share, 1.0 - share);
}

Matrix rows_to_matrix(const std::vector<FeatureRow>& rows, bool include_ratios) {
    size_t p = feature_names(include_ratios).size();
    Matrix x(rows.size(), p);
    for (size_t i = 0; i < rows.size(); ++i) {
        std::vector<double> v = feature_vector(rows[i], include_ratios);
        std::copy(v.begin(), v.end(), x.row(i).begin());
    }
    return x;
}

std::vector<uint8_t> rows_to_labels(const std::vector<FeatureRow>& rows) {
    std::vector<uint8_t> y(rows.size());
    for (size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].label == RowLabel::Censored) {
            throw std::runtime_error("rows_to_labels: censored row '" + rows[i].invoice_id + "'");
        }
        y[i] = rows[i].label == RowLabel::Late ? 1 : 0;
    }
    return y;
}

MetricsReport evaluate_model(const TrainedModel& model, const std::vector<FeatureRow>& rows,
                             bool include_ratios, double threshold) {
    Matrix x = rows_to_matrix(rows, include_ratios);
    std::vector<uint8_t> y = rows_to_labels(rows);
    std::vector<double> scores = score_all(model, x);
    std::vector<uint8_t> preds(scores.size());
    for (size_t i = 0; i < scores.size(); ++i) preds[i] = scores[i] >= threshold;

    std::vector<Date> dates(rows.size());
    for (size_t i = 0; i < rows.size(); ++i) dates[i] = rows[i].creation_date;

    AccuracyStats acc = confusion_and_accuracy(y, preds);
    MetricsReport r;
    r.n = rows.size();
    r.accuracy = acc.accuracy;
    r.f1_late = acc.f1_late;
    r.confusion = acc.confusion;
    r.baseline = majority_share(y);
    r.auc = roc_and_auc(y, scores).second;
    r.monthly = monthly_accuracy(y, preds, dates);
    return r;
}

TrainedModel train_kind(ModelKind kind, const Matrix& x, const std::vector<uint8_t>& y,
                        std::vector<std::string> names, const PipelineConfig& cfg,
                        bool parallel) {
    switch (kind) {
        case ModelKind::NaiveBayes:
            return train_naive_bayes(x, y, std::move(names));
        case ModelKind::LogisticRegression:
            return train_logistic_regression(x, y, std::move(names), cfg.lr);
        case ModelKind::Knn:
            return train_knn(x, y, std::move(names), cfg.knn_k);
        case ModelKind::RandomForest: {
            RfConfig rf = cfg.rf;
            rf.seed = cfg.seed;
            return train_random_forest(x, y, std::move(names), rf, parallel);
        }
        case ModelKind::Gbt: {
            GbtConfig gbt = cfg.gbt;
            gbt.seed = cfg.seed;
            return train_gbt(x, y, std::move(names), gbt);
        }
        case ModelKind::Ensemble: {
            RfConfig rf = cfg.rf;
            rf.seed = cfg.seed;
            GbtConfig gbt = cfg.gbt;
            gbt.seed = cfg.seed;
            return train_ensemble(x, y, std::move(names), rf, gbt, parallel);
        }
    }
    throw std::runtime_error("unknown model kind");
}

PipelineRun run_pipeline(const InvoiceDataset& ds, const SplitSpec& spec, ModelKind kind,
                         const PipelineConfig& cfg, bool parallel) {
    std::vector<FeatureRow> rows = extract_all(ds, cfg.features, parallel);
    SplitResult parts = split_rows(rows, spec);
    ImputationStats stats = fit_imputation(parts.train);
    for (auto* part : {&parts.train, &parts.validation, &parts.test}) {
        for (FeatureRow& r : *part) r = impute(std::move(r), stats);
    }

    bool ratios = cfg.features.include_ratio_features;
    Matrix x = rows_to_matrix(parts.train, ratios);
    std::vector<uint8_t> y = rows_to_labels(parts.train);
    TrainedModel model = train_kind(kind, x, y, feature_names(ratios), cfg, parallel);
    model.meta.window_months = cfg.features.window_months;
    model.meta.grace_days = cfg.features.grace.grace_days;
    model.meta.include_ratio_features = ratios;
    model.meta.seed = cfg.seed;
    model.meta.split = spec.train_start.str() + "/" + spec.train_end.str() + " " +
                       spec.val_start.str() + "/" + spec.val_end.str() + " " +
                       spec.test_start.str() + "/" + spec.test_end.str();
    model.meta.imputation = stats;
    return PipelineRun{std::move(model), std::move(parts), stats};
}

std::vector<SweepCell> window_sweep(const InvoiceDataset& ds, const std::vector<int>& windows,
                                    const std::vector<ModelKind>& kinds, const SplitSpec& spec,
                                    const PipelineConfig& cfg, bool parallel) {
    if (windows.empty()) throw ConfigError("window_sweep: empty window range");
    std::vector<SweepCell> cells;
    for (int w : windows) {
        PipelineConfig wcfg = cfg;
        wcfg.features.window_months = w;
        // one extraction + split per window, shared across model kinds
        std::vector<FeatureRow> rows = extract_all(ds, wcfg.features, parallel);
        SplitResult parts = split_rows(rows, spec);
        ImputationStats stats = fit_imputation(parts.train);
        for (auto* part : {&parts.train, &parts.test}) {
            for (FeatureRow& r : *part) r = impute(std::move(r), stats);
        }
        bool ratios = wcfg.features.include_ratio_features;
        Matrix x = rows_to_matrix(parts.train, ratios);
        std::vector<uint8_t> y = rows_to_labels(parts.train);
        for (ModelKind kind : kinds) {
            TrainedModel model = train_kind(kind, x, y, feature_names(ratios), wcfg, parallel);
            MetricsReport r = evaluate_model(model, parts.test, ratios);
            cells.push_back({w, kind, r.accuracy, r.f1_late, r.auc});
        }
    }
    return cells;
}

std::vector<SnapshotReport> snapshot_sweep(const InvoiceDataset& ds,
                                           const std::vector<SplitSpec>& specs, ModelKind kind,
                                           const PipelineConfig& cfg, bool parallel) {
    std::vector<SnapshotReport> reports;
    for (size_t k = 0; k < specs.size(); ++k) {
        PipelineRun run = run_pipeline(ds, specs[k], kind, cfg, parallel);
        SnapshotReport rep;
        rep.label = "set_" + std::to_string(k + 1);
        rep.spec = specs[k];
        double total = double(run.parts.train.size() + run.parts.validation.size() +
                              run.parts.test.size());
        rep.train_ratio = double(run.parts.train.size()) / total;
        rep.val_ratio = double(run.parts.validation.size()) / total;
        rep.test_ratio = double(run.parts.test.size()) / total;
        std::vector<uint8_t> test_y = rows_to_labels(run.parts.test);
        size_t late = 0;
        for (uint8_t v : test_y) late += v;
        rep.baseline_late_share = double(late) / double(test_y.size());
        rep.test_metrics =
            evaluate_model(run.model, run.parts.test, cfg.features.include_ratio_features);
        reports.push_back(std::move(rep));
    }
    return reports;
}

}  // namespace arc
