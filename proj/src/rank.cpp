#include "arc/rank.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "arc/csv.hpp"

namespace arc {

double invoice_risk(double amount, double p_late) {
    if (p_late < 0.0 || p_late > 1.0) {
        throw std::runtime_error("invoice_risk: probability out of [0,1]");
    }
    if (amount <= 0.0) throw std::runtime_error("invoice_risk: non-positive amount");
    return amount * p_late;
}

double customer_risk(const std::vector<double>& invoice_risks) {
    if (invoice_risks.empty()) throw std::runtime_error("customer_risk: no open invoices");
    double sum = 0.0;
    for (double r : invoice_risks) sum += r;
    return sum / double(invoice_risks.size());
}

namespace {

// pairs (i<j) with b[i] > b[j], by merge sort
size_t count_inversions(std::vector<double>& v, std::vector<double>& tmp, size_t lo, size_t hi) {
    if (hi - lo < 2) return 0;
    size_t mid = lo + (hi - lo) / 2;
    size_t inv = count_inversions(v, tmp, lo, mid) + count_inversions(v, tmp, mid, hi);
    size_t a = lo, b = mid, out = lo;
    while (a < mid && b < hi) {
        if (v[b] < v[a]) {
            inv += mid - a;
            tmp[out++] = v[b++];
        } else {
            tmp[out++] = v[a++];
        }
    }
    while (a < mid) tmp[out++] = v[a++];
    while (b < hi) tmp[out++] = v[b++];
    std::copy(tmp.begin() + long(lo), tmp.begin() + long(hi), v.begin() + long(lo));
    return inv;
}

double tie_pairs(std::vector<double> vals) {
    std::sort(vals.begin(), vals.end());
    double pairs = 0.0;
    size_t i = 0;
    while (i < vals.size()) {
        size_t j = i;
        while (j < vals.size() && vals[j] == vals[i]) j++;
        double t = double(j - i);
        pairs += t * (t - 1.0) / 2.0;
        i = j;
    }
    return pairs;
}

}  // namespace

double kendall_tau(const std::vector<double>& scores_a, const std::vector<double>& scores_b) {
    if (scores_a.size() != scores_b.size()) {
        throw std::runtime_error("kendall_tau: mismatched item sets");
    }
    size_t n = scores_a.size();
    if (n < 2) throw std::runtime_error("kendall_tau: need at least 2 items");

    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t i, size_t j) {
        if (scores_a[i] != scores_a[j]) return scores_a[i] < scores_a[j];
        return scores_b[i] < scores_b[j];
    });

    double n0 = double(n) * double(n - 1) / 2.0;
    double n1 = tie_pairs(scores_a);
    double n2 = tie_pairs(scores_b);

    // joint ties
    double n3 = 0.0;
    {
        size_t i = 0;
        while (i < n) {
            size_t j = i;
            while (j < n && scores_a[order[j]] == scores_a[order[i]] &&
                   scores_b[order[j]] == scores_b[order[i]]) {
                j++;
            }
            double t = double(j - i);
            n3 += t * (t - 1.0) / 2.0;
            i = std::max(j, i + 1);
        }
    }

    std::vector<double> b_seq(n);
    for (size_t i = 0; i < n; ++i) b_seq[i] = scores_b[order[i]];
    std::vector<double> tmp(n);
    double discordant = double(count_inversions(b_seq, tmp, 0, n));

    double concordant = n0 - n1 - n2 + n3 - discordant;
    double denom = std::sqrt((n0 - n1) * (n0 - n2));
    if (denom == 0.0) return 0.0;  // all tied on one side
    return (concordant - discordant) / denom;
}

RankedList build_ranked_list(const InvoiceDataset& ds, const TrainedModel& model,
                             const Date& as_of) {
    FeatureConfig fcfg;
    fcfg.window_months = model.meta.window_months;
    fcfg.grace.grace_days = model.meta.grace_days;
    fcfg.include_ratio_features = model.meta.include_ratio_features;
    bool ratios = fcfg.include_ratio_features;

    struct Agg {
        double risk_sum = 0.0;
        double amount_sum = 0.0;
        int n = 0;
    };
    std::map<std::string, Agg> by_customer;

    for (const Invoice& inv : ds.invoices()) {
        if (days_between(inv.creation_date, as_of) < 0) continue;  // created after as_of
        // a payment dated on as_of itself is not knowable yet; only strictly
        // earlier payments close the invoice
        if (inv.payment_date && days_between(*inv.payment_date, as_of) > 0) continue;
        FeatureRow row = extract_features(ds, inv, fcfg);
        row = impute(std::move(row), model.meta.imputation);
        double p = model.score(feature_vector(row, ratios));
        Agg& a = by_customer[inv.customer_id];
        a.risk_sum += invoice_risk(inv.amount, p);
        a.amount_sum += inv.amount;
        a.n++;
    }

    RankedList list;
    list.as_of = as_of;
    for (const auto& [customer, a] : by_customer) {
        RankEntry e;
        e.customer_id = customer;
        e.risk_score = a.risk_sum / double(a.n);
        e.total_open_amount = a.amount_sum;
        e.n_open_invoices = a.n;
        list.entries.push_back(std::move(e));
    }

    auto by_risk = [](const RankEntry& a, const RankEntry& b) {
        if (a.risk_score != b.risk_score) return a.risk_score > b.risk_score;
        return a.customer_id < b.customer_id;
    };
    auto by_amount = [](const RankEntry& a, const RankEntry& b) {
        if (a.total_open_amount != b.total_open_amount) {
            return a.total_open_amount > b.total_open_amount;
        }
        return a.customer_id < b.customer_id;
    };

    std::vector<RankEntry*> greedy(list.entries.size());
    for (size_t i = 0; i < list.entries.size(); ++i) greedy[i] = &list.entries[i];
    std::sort(greedy.begin(), greedy.end(),
              [&](RankEntry* a, RankEntry* b) { return by_amount(*a, *b); });
    for (size_t i = 0; i < greedy.size(); ++i) greedy[i]->greedy_rank = int(i + 1);

    std::sort(list.entries.begin(), list.entries.end(), by_risk);
    for (size_t i = 0; i < list.entries.size(); ++i) list.entries[i].risk_rank = int(i + 1);

    if (list.entries.size() >= 2) {
        std::vector<double> risk, amount;
        for (const RankEntry& e : list.entries) {
            risk.push_back(e.risk_score);
            amount.push_back(e.total_open_amount);
        }
        list.tau = kendall_tau(risk, amount);
    } else {
        list.tau = 1.0;
    }
    return list;
}

void write_ranking_csv(const RankedList& list, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << "customer_id,risk_score,total_open_amount,n_open_invoices,risk_rank,greedy_rank\n";
    for (const RankEntry& e : list.entries) {
        csv::write_record(out, {e.customer_id, csv::format_double(e.risk_score),
                                csv::format_double(e.total_open_amount),
                                std::to_string(e.n_open_invoices), std::to_string(e.risk_rank),
                                std::to_string(e.greedy_rank)});
    }
}

}  // namespace arc
