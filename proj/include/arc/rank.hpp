#pragma once

#include <string>
#include <vector>

#include "arc/models.hpp"

namespace arc {

// amount * p(late)
double invoice_risk(double amount, double p_late);

// Mean of the customer's open-invoice risks.
double customer_risk(const std::vector<double>& invoice_risks);

struct RankEntry {
    std::string customer_id;
    double risk_score = 0.0;
    double total_open_amount = 0.0;
    int n_open_invoices = 0;
    int risk_rank = 0;    // 1 = highest risk score
    int greedy_rank = 0;  // 1 = largest total open amount
};

struct RankedList {
    Date as_of{};
    std::vector<RankEntry> entries;  // ordered by risk_rank
    double tau = 0.0;                // agreement between the two orderings
};

// Open invoices = created on or before as_of with no payment known by
// as_of. Each is scored with its creation-time features; both orderings
// cover the same customers, ties broken by ascending customer_id.
RankedList build_ranked_list(const InvoiceDataset& ds, const TrainedModel& model,
                             const Date& as_of);

// Kendall tau-b over two score vectors aligned by item index. With no
// ties this is (concordant - discordant) / (n(n-1)/2).
double kendall_tau(const std::vector<double>& scores_a, const std::vector<double>& scores_b);

void write_ranking_csv(const RankedList& list, const std::string& path);

}  // namespace arc
