#pragma once

#include <optional>
#include <string>
#include <vector>

#include "arc/ingest.hpp"

namespace arc {

enum class RowLabel { OnTime, Late, Censored };

// Creation-time feature vector of one invoice over a w-month look-back
// window. Day-statistic fields stay missing until imputation.
struct FeatureRow {
    std::string invoice_id;
    Date creation_date{};
    double amount = 0.0;
    // last / second-last / third-last prior invoice: 1 paid on time,
    // 0 paid late or outstanding-late, -1 absent or not yet late
    int paid_invoice_1 = -1;
    int paid_invoice_2 = -1;
    int paid_invoice_3 = -1;
    int total_paid_invoices = 0;
    double sum_amount_paid_invoices = 0.0;
    int total_invoices_late = 0;
    double sum_amount_late_invoices = 0.0;
    int total_outstanding_invoices = 0;
    int total_outstanding_late = 0;
    double sum_total_outstanding = 0.0;
    double sum_late_outstanding = 0.0;
    std::optional<double> average_days_late;
    std::optional<double> average_days_outstanding_late;
    std::optional<double> std_dev_invoices_late;
    std::optional<double> std_dev_outstanding_late;
    int payment_frequency = 0;
    // only populated when FeatureConfig::include_ratio_features is set
    std::optional<double> ratio_paid_late;
    std::optional<double> ratio_outstanding_late;
    RowLabel label = RowLabel::Censored;
};

struct FeatureConfig {
    int window_months = 3;
    GracePolicy grace{};
    bool include_ratio_features = false;
};

// Training-set means used to fill missing day statistics (and ratios when
// enabled); 0 when a field is missing in every training row.
struct ImputationStats {
    double average_days_late = 0.0;
    double average_days_outstanding_late = 0.0;
    double std_dev_invoices_late = 0.0;
    double std_dev_outstanding_late = 0.0;
    double ratio_paid_late = 0.0;
    double ratio_outstanding_late = 0.0;
};

FeatureRow extract_features(const InvoiceDataset& ds, const Invoice& inv,
                            const FeatureConfig& cfg);

// One row per invoice in dataset order (creation_date, invoice_id). The
// serial path is the reference kernel; the parallel path must produce
// identical rows.
std::vector<FeatureRow> extract_all(const InvoiceDataset& ds, const FeatureConfig& cfg,
                                    bool parallel = true);

ImputationStats fit_imputation(const std::vector<FeatureRow>& training_rows);
FeatureRow impute(FeatureRow row, const ImputationStats& stats);

// Numeric feature columns in model order.
std::vector<std::string> feature_names(bool include_ratios);
std::vector<double> feature_vector(const FeatureRow& row, bool include_ratios);

void write_feature_csv(const std::vector<FeatureRow>& rows, bool include_ratios,
                       const std::string& path);
std::vector<FeatureRow> read_feature_csv(const std::string& path, bool include_ratios);

}  // namespace arc
