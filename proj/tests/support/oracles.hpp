#pragma once

// Independent brute-force oracles used by the unit and acceptance suites.
// These deliberately avoid the library's indexed/fast code paths.

#include <cstdint>
#include <random>
#include <vector>

#include "arc/features.hpp"
#include "arc/ingest.hpp"

namespace oracles {

// Full-scan feature extraction over the raw invoice list; no dataset
// index, no shared helpers beyond plain date arithmetic.
arc::FeatureRow extract_features_oracle(const std::vector<arc::Invoice>& invoices,
                                        const arc::Invoice& target, const arc::FeatureConfig& cfg);

// Month subtraction with a hand-rolled calendar (no std::chrono).
arc::Date subtract_months_oracle(const arc::Date& d, int w);

// AUC as (concordant + 0.5 * tied) / (n_pos * n_neg) over all pairs.
double auc_pair_count(const std::vector<uint8_t>& labels, const std::vector<double>& scores);

// Kendall tau-b by direct O(n^2) pair counting.
double tau_pair_count(const std::vector<double>& a, const std::vector<double>& b);

// Small random invoice dataset for fuzzing (independent of arc::generate).
std::vector<arc::Invoice> random_invoices(std::mt19937_64& rng, size_t max_invoices);

}  // namespace oracles
