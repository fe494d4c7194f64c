#pragma once

#include <string>
#include <utility>
#include <vector>

#include "arc/models.hpp"
#include "arc/split.hpp"

namespace arc {

struct ConfusionCounts {
    size_t tp = 0, fp = 0, tn = 0, fn = 0;  // Late = positive
    size_t n() const { return tp + fp + tn + fn; }
};

struct MonthlyPoint {
    YearMonth month;
    size_t n = 0;
    double accuracy = 0.0;
    double baseline = 0.0;  // that month's majority-class share
};

struct MetricsReport {
    size_t n = 0;
    double accuracy = 0.0;
    double f1_late = 0.0;
    double baseline = 0.0;  // majority-class share of the partition
    double auc = 0.0;
    ConfusionCounts confusion;
    std::vector<MonthlyPoint> monthly;
};

// Points (fpr, tpr) from (0,0) to (1,1), one vertex per distinct score.
struct RocCurve {
    std::vector<std::pair<double, double>> points;
};

struct AccuracyStats {
    ConfusionCounts confusion;
    double accuracy = 0.0;
    double f1_late = 0.0;
};

AccuracyStats confusion_and_accuracy(const std::vector<uint8_t>& labels,
                                     const std::vector<uint8_t>& predictions);

// Rank-based AUC (average ranks on ties); the curve is the tie-grouped
// descending-score sweep and its trapezoidal area equals the AUC.
std::pair<RocCurve, double> roc_and_auc(const std::vector<uint8_t>& labels,
                                        const std::vector<double>& scores);

std::vector<MonthlyPoint> monthly_accuracy(const std::vector<uint8_t>& labels,
                                           const std::vector<uint8_t>& predictions,
                                           const std::vector<Date>& creation_dates);

double majority_share(const std::vector<uint8_t>& labels);

// Scores a set of imputed rows and assembles the full report.
MetricsReport evaluate_model(const TrainedModel& model, const std::vector<FeatureRow>& rows,
                             bool include_ratios, double threshold = 0.5);

struct PipelineConfig {
    FeatureConfig features{};
    LrConfig lr{};
    RfConfig rf{};
    GbtConfig gbt{};
    int knn_k = 15;
    std::uint64_t seed = 0;
};

// Featurize + split + impute + train one model kind; shared by the CLI
// and the sweep drivers.
struct PipelineRun {
    TrainedModel model;
    SplitResult parts;  // imputed rows
    ImputationStats imputation;
};
PipelineRun run_pipeline(const InvoiceDataset& ds, const SplitSpec& spec, ModelKind kind,
                         const PipelineConfig& cfg, bool parallel = true);
TrainedModel train_kind(ModelKind kind, const Matrix& x, const std::vector<uint8_t>& y,
                        std::vector<std::string> names, const PipelineConfig& cfg,
                        bool parallel = true);

Matrix rows_to_matrix(const std::vector<FeatureRow>& rows, bool include_ratios);
std::vector<uint8_t> rows_to_labels(const std::vector<FeatureRow>& rows);

struct SweepCell {
    int window_months = 0;
    ModelKind kind;
    double accuracy = 0.0;
    double f1_late = 0.0;
    double auc = 0.0;
};

// Re-extracts features per window and reports test metrics per (w, kind).
std::vector<SweepCell> window_sweep(const InvoiceDataset& ds, const std::vector<int>& windows,
                                    const std::vector<ModelKind>& kinds, const SplitSpec& spec,
                                    const PipelineConfig& cfg, bool parallel = true);

struct SnapshotReport {
    std::string label;
    SplitSpec spec;
    double train_ratio = 0.0, val_ratio = 0.0, test_ratio = 0.0;
    double baseline_late_share = 0.0;  // Late share of the test partition
    MetricsReport test_metrics;
};

std::vector<SnapshotReport> snapshot_sweep(const InvoiceDataset& ds,
                                           const std::vector<SplitSpec>& specs, ModelKind kind,
                                           const PipelineConfig& cfg, bool parallel = true);

}  // namespace arc
