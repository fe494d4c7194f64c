#include "arc/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "arc/csv.hpp"

namespace arc {

namespace {

struct Moments {
    std::vector<double> values;

    void add(double v) { values.push_back(v); }
    std::optional<double> mean() const {
        if (values.empty()) return std::nullopt;
        double sum = 0.0;
        for (double v : values) sum += v;
        return sum / double(values.size());
    }
    std::optional<double> pop_std() const {
        if (values.size() < 2) return std::nullopt;
        double m = *mean();
        double ss = 0.0;
        for (double v : values) ss += (v - m) * (v - m);
        return std::sqrt(ss / double(values.size()));
    }
};

// 1 paid on time, 0 paid late or outstanding-late, -1 outstanding not yet late
int recency_indicator(const Invoice& h, const Date& cutoff, GracePolicy grace) {
    if (h.payment_date) {
        return days_between(h.due_date, *h.payment_date) <= grace.grace_days ? 1 : 0;
    }
    bool late_at_cutoff = days_between(h.due_date, cutoff) > grace.grace_days;
    return late_at_cutoff ? 0 : -1;
}

}  // namespace

FeatureRow extract_features(const InvoiceDataset& ds, const Invoice& inv,
                            const FeatureConfig& cfg) {
    if (cfg.window_months < 1) throw ConfigError("window_months must be >= 1");
    const Date cutoff = inv.creation_date;
    const Date window_start = subtract_months(cutoff, cfg.window_months);
    std::vector<Invoice> history = ds.history_before(inv.customer_id, cutoff, window_start);

    FeatureRow row;
    row.invoice_id = inv.invoice_id;
    row.creation_date = inv.creation_date;
    row.amount = inv.amount;

    Moments paid_late_days;
    Moments outstanding_late_days;

    for (const Invoice& h : history) {
        if (h.payment_date) {
            row.total_paid_invoices++;
            row.sum_amount_paid_invoices += h.amount;
            int late = days_between(h.due_date, *h.payment_date);
            if (late > cfg.grace.grace_days) {
                row.total_invoices_late++;
                row.sum_amount_late_invoices += h.amount;
                paid_late_days.add(double(late));
            }
        } else {
            row.total_outstanding_invoices++;
            row.sum_total_outstanding += h.amount;
            int late_so_far = days_between(h.due_date, cutoff);
            if (late_so_far > cfg.grace.grace_days) {
                row.total_outstanding_late++;
                row.sum_late_outstanding += h.amount;
                outstanding_late_days.add(double(late_so_far));
            }
        }
    }

    row.average_days_late = paid_late_days.mean();
    row.std_dev_invoices_late = paid_late_days.pop_std();
    row.average_days_outstanding_late = outstanding_late_days.mean();
    row.std_dev_outstanding_late = outstanding_late_days.pop_std();
    row.payment_frequency = row.total_paid_invoices;

    int* indicators[3] = {&row.paid_invoice_1, &row.paid_invoice_2, &row.paid_invoice_3};
    for (int k = 0; k < 3; ++k) {
        if (size_t(k) < history.size()) {
            const Invoice& h = history[history.size() - 1 - size_t(k)];
            *indicators[k] = recency_indicator(h, cutoff, cfg.grace);
        }
    }

    if (cfg.include_ratio_features) {
        if (row.total_paid_invoices > 0) {
            row.ratio_paid_late = double(row.total_invoices_late) / row.total_paid_invoices;
        }
        if (row.total_outstanding_invoices > 0) {
            row.ratio_outstanding_late =
                double(row.total_outstanding_late) / row.total_outstanding_invoices;
        }
    }

    if (inv.payment_date) {
        row.label = label_invoice(inv, cfg.grace) == PaymentLabel::Late ? RowLabel::Late
                                                                        : RowLabel::OnTime;
    } else {
        row.label = RowLabel::Censored;
    }
    return row;
}

std::vector<FeatureRow> extract_all(const InvoiceDataset& ds, const FeatureConfig& cfg,
                                    bool parallel) {
    const auto& invoices = ds.invoices();
    std::vector<FeatureRow> rows(invoices.size());
    if (parallel) {
#pragma omp parallel for schedule(dynamic, 64)
        for (long i = 0; i < long(invoices.size()); ++i) {
            rows[size_t(i)] = extract_features(ds, invoices[size_t(i)], cfg);
        }
    } else {
        for (size_t i = 0; i < invoices.size(); ++i) {
            rows[i] = extract_features(ds, invoices[i], cfg);
        }
    }
    return rows;
}

ImputationStats fit_imputation(const std::vector<FeatureRow>& training_rows) {
    if (training_rows.empty()) throw std::runtime_error("fit_imputation: no training rows");
    auto mean_of = [&](auto field) {
        double sum = 0.0;
        int n = 0;
        for (const FeatureRow& r : training_rows) {
            const std::optional<double>& v = r.*field;
            if (v) {
                sum += *v;
                n++;
            }
        }
        return n > 0 ? sum / n : 0.0;
    };
    ImputationStats s;
    s.average_days_late = mean_of(&FeatureRow::average_days_late);
    s.average_days_outstanding_late = mean_of(&FeatureRow::average_days_outstanding_late);
    s.std_dev_invoices_late = mean_of(&FeatureRow::std_dev_invoices_late);
    s.std_dev_outstanding_late = mean_of(&FeatureRow::std_dev_outstanding_late);
    s.ratio_paid_late = mean_of(&FeatureRow::ratio_paid_late);
    s.ratio_outstanding_late = mean_of(&FeatureRow::ratio_outstanding_late);
    return s;
}

FeatureRow impute(FeatureRow row, const ImputationStats& stats) {
    if (!row.average_days_late) row.average_days_late = stats.average_days_late;
    if (!row.average_days_outstanding_late) {
        row.average_days_outstanding_late = stats.average_days_outstanding_late;
    }
    if (!row.std_dev_invoices_late) row.std_dev_invoices_late = stats.std_dev_invoices_late;
    if (!row.std_dev_outstanding_late) row.std_dev_outstanding_late = stats.std_dev_outstanding_late;
    if (!row.ratio_paid_late) row.ratio_paid_late = stats.ratio_paid_late;
    if (!row.ratio_outstanding_late) row.ratio_outstanding_late = stats.ratio_outstanding_late;
    return row;
}

std::vector<std::string> feature_names(bool include_ratios) {
    std::vector<std::string> names = {
        "amount",
        "paid_invoice_1",
        "paid_invoice_2",
        "paid_invoice_3",
        "total_paid_invoices",
        "sum_amount_paid_invoices",
        "total_invoices_late",
        "sum_amount_late_invoices",
        "total_outstanding_invoices",
        "total_outstanding_late",
        "sum_total_outstanding",
        "sum_late_outstanding",
        "average_days_late",
        "average_days_outstanding_late",
        "std_dev_invoices_late",
        "std_dev_outstanding_late",
        "payment_frequency",
    };
    if (include_ratios) {
        names.push_back("ratio_paid_late");
        names.push_back("ratio_outstanding_late");
    }
    return names;
}

std::vector<double> feature_vector(const FeatureRow& row, bool include_ratios) {
    auto req = [](const std::optional<double>& v) {
        if (!v) throw std::runtime_error("feature_vector: row not imputed");
        return *v;
    };
    std::vector<double> x = {
        row.amount,
        double(row.paid_invoice_1),
        double(row.paid_invoice_2),
        double(row.paid_invoice_3),
        double(row.total_paid_invoices),
        row.sum_amount_paid_invoices,
        double(row.total_invoices_late),
        row.sum_amount_late_invoices,
        double(row.total_outstanding_invoices),
        double(row.total_outstanding_late),
        row.sum_total_outstanding,
        row.sum_late_outstanding,
        req(row.average_days_late),
        req(row.average_days_outstanding_late),
        req(row.std_dev_invoices_late),
        req(row.std_dev_outstanding_late),
        double(row.payment_frequency),
    };
    if (include_ratios) {
        x.push_back(req(row.ratio_paid_late));
        x.push_back(req(row.ratio_outstanding_late));
    }
    return x;
}

namespace {

std::string opt_str(const std::optional<double>& v) {
    return v ? csv::format_double(*v) : std::string{};
}

std::optional<double> opt_parse(const std::string& s) {
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw std::runtime_error("bad numeric field: '" + s + "'");
    }
    return v;
}

std::string label_str(RowLabel l) {
    switch (l) {
        case RowLabel::OnTime: return "ontime";
        case RowLabel::Late: return "late";
        default: return "censored";
    }
}

RowLabel label_parse(const std::string& s) {
    if (s == "ontime") return RowLabel::OnTime;
    if (s == "late") return RowLabel::Late;
    if (s == "censored") return RowLabel::Censored;
    throw std::runtime_error("bad label: '" + s + "'");
}

}  // namespace

void write_feature_csv(const std::vector<FeatureRow>& rows, bool include_ratios,
                       const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    std::vector<std::string> header = {"invoice_id", "creation_date"};
    for (const auto& n : feature_names(include_ratios)) header.push_back(n);
    header.push_back("label");
    csv::write_record(out, header);
    for (const FeatureRow& r : rows) {
        std::vector<std::string> rec = {
            r.invoice_id,
            format_date(r.creation_date),
            csv::format_double(r.amount),
            std::to_string(r.paid_invoice_1),
            std::to_string(r.paid_invoice_2),
            std::to_string(r.paid_invoice_3),
            std::to_string(r.total_paid_invoices),
            csv::format_double(r.sum_amount_paid_invoices),
            std::to_string(r.total_invoices_late),
            csv::format_double(r.sum_amount_late_invoices),
            std::to_string(r.total_outstanding_invoices),
            std::to_string(r.total_outstanding_late),
            csv::format_double(r.sum_total_outstanding),
            csv::format_double(r.sum_late_outstanding),
            opt_str(r.average_days_late),
            opt_str(r.average_days_outstanding_late),
            opt_str(r.std_dev_invoices_late),
            opt_str(r.std_dev_outstanding_late),
            std::to_string(r.payment_frequency),
        };
        if (include_ratios) {
            rec.push_back(opt_str(r.ratio_paid_late));
            rec.push_back(opt_str(r.ratio_outstanding_late));
        }
        rec.push_back(label_str(r.label));
        csv::write_record(out, rec);
    }
}

std::vector<FeatureRow> read_feature_csv(const std::string& path, bool include_ratios) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    auto header = csv::read_record(in);
    size_t expected_fields = 2 + feature_names(include_ratios).size() + 1;
    if (!header || header->size() != expected_fields) {
        throw std::runtime_error("wrong feature CSV header in '" + path + "'");
    }
    std::vector<FeatureRow> rows;
    while (auto rec = csv::read_record(in)) {
        if (rec->size() == 1 && (*rec)[0].empty()) continue;
        if (rec->size() != expected_fields) {
            throw std::runtime_error("bad feature CSV row in '" + path + "'");
        }
        const auto& f = *rec;
        FeatureRow r;
        size_t i = 0;
        r.invoice_id = f[i++];
        r.creation_date = parse_date(f[i++]);
        r.amount = *opt_parse(f[i++]);
        r.paid_invoice_1 = int(*opt_parse(f[i++]));
        r.paid_invoice_2 = int(*opt_parse(f[i++]));
        r.paid_invoice_3 = int(*opt_parse(f[i++]));
        r.total_paid_invoices = int(*opt_parse(f[i++]));
        r.sum_amount_paid_invoices = *opt_parse(f[i++]);
        r.total_invoices_late = int(*opt_parse(f[i++]));
        r.sum_amount_late_invoices = *opt_parse(f[i++]);
        r.total_outstanding_invoices = int(*opt_parse(f[i++]));
        r.total_outstanding_late = int(*opt_parse(f[i++]));
        r.sum_total_outstanding = *opt_parse(f[i++]);
        r.sum_late_outstanding = *opt_parse(f[i++]);
        r.average_days_late = opt_parse(f[i++]);
        r.average_days_outstanding_late = opt_parse(f[i++]);
        r.std_dev_invoices_late = opt_parse(f[i++]);
        r.std_dev_outstanding_late = opt_parse(f[i++]);
        r.payment_frequency = int(*opt_parse(f[i++]));
        if (include_ratios) {
            r.ratio_paid_late = opt_parse(f[i++]);
            r.ratio_outstanding_late = opt_parse(f[i++]);
        }
        r.label = label_parse(f[i++]);
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace arc
