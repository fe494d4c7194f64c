#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "arc/domain.hpp"
#include "arc/date.hpp"

namespace arc {

// Seeded invoice-stream generator: customers carry a latent late
// propensity drawn from a Beta prior, a per-month drift shifts the late
// log-odds (negative = improving behavior), December gets its own bump.
struct GeneratorConfig {
    std::uint64_t seed = 42;
    int n_customers = 300;
    YearMonth start_month{2017, 6};
    YearMonth end_month{2019, 5};
    double mean_invoices_per_customer_month = 3.5;
    double amount_log_mean = 9.0;
    double amount_log_sd = 1.0;
    double reliability_alpha = 0.6;
    double reliability_beta = 0.6;
    double drift_per_month = -0.05;
    double december_bump = 0.7;
    double mean_late_delay_days = 10.0;
    int grace_days = 5;
    int due_days = 30;
    std::vector<std::pair<std::string, double>> country_weights = {
        {"AR", 0.3}, {"BR", 46.3}, {"CL", 21.6}, {"CO", 28.0},
        {"EC", 0.1}, {"MX", 53.0}, {"PE", 25.9}, {"UY", 0.5},
    };

    void validate() const;  // throws ConfigError
};

// Deterministic for a given config; one RNG stream.
std::vector<Invoice> generate(const GeneratorConfig& cfg);

}  // namespace arc
