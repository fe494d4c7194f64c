#include "arc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace arc {

namespace {

int days_in_month(int year, int month) {
    using namespace std::chrono;
    year_month_day_last last{std::chrono::year{year} / std::chrono::month{unsigned(month)} /
                             std::chrono::last};
    return int(unsigned(last.day()));
}

double logit(double p) { return std::log(p / (1.0 - p)); }
double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

void GeneratorConfig::validate() const {
    if (n_customers < 1) throw ConfigError("generator: n_customers must be >= 1");
    if (end_month < start_month) throw ConfigError("generator: empty month range");
    if (mean_invoices_per_customer_month <= 0.0) {
        throw ConfigError("generator: mean_invoices_per_customer_month must be > 0");
    }
    if (amount_log_sd < 0.0) throw ConfigError("generator: amount_log_sd must be >= 0");
    if (reliability_alpha <= 0.0 || reliability_beta <= 0.0) {
        throw ConfigError("generator: reliability prior must be positive");
    }
    if (mean_late_delay_days <= 0.0) {
        throw ConfigError("generator: mean_late_delay_days must be > 0");
    }
    if (grace_days < 0) throw ConfigError("generator: grace_days must be >= 0");
    if (due_days < 0) throw ConfigError("generator: due_days must be >= 0");
    double total = 0.0;
    for (const auto& [country, weight] : country_weights) {
        if (weight < 0.0) throw ConfigError("generator: negative country weight");
        total += weight;
    }
    if (country_weights.empty() || total <= 0.0) {
        throw ConfigError("generator: country weights must sum to a positive value");
    }
}

std::vector<Invoice> generate(const GeneratorConfig& cfg) {
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);

    std::vector<double> weights;
    for (const auto& [country, weight] : cfg.country_weights) weights.push_back(weight);
    std::discrete_distribution<size_t> country_dist(weights.begin(), weights.end());

    std::gamma_distribution<double> gamma_a(cfg.reliability_alpha, 1.0);
    std::gamma_distribution<double> gamma_b(cfg.reliability_beta, 1.0);
    std::poisson_distribution<int> invoices_per_month(cfg.mean_invoices_per_customer_month);
    std::normal_distribution<double> log_amount(cfg.amount_log_mean, cfg.amount_log_sd);
    std::geometric_distribution<int> late_delay(1.0 / (cfg.mean_late_delay_days + 1.0));
    std::uniform_int_distribution<int> ontime_offset(-3, cfg.grace_days);

    int n_months = cfg.end_month.index() - cfg.start_month.index() + 1;
    std::vector<Invoice> out;
    size_t counter = 0;

    for (int c = 0; c < cfg.n_customers; ++c) {
        char cust_id[16];
        std::snprintf(cust_id, sizeof(cust_id), "C%05d", c + 1);
        std::string country = cfg.country_weights[country_dist(rng)].first;
        double ga = gamma_a(rng);
        double gb = gamma_b(rng);
        double reliability = ga / (ga + gb);
        reliability = std::clamp(reliability, 1e-6, 1.0 - 1e-6);
        double base_logodds = logit(reliability);

        for (int t = 0; t < n_months; ++t) {
            YearMonth ym = cfg.start_month.plus_months(t);
            int n_inv = invoices_per_month(rng);
            std::uniform_int_distribution<int> day(1, days_in_month(ym.year, ym.month));
            for (int i = 0; i < n_inv; ++i) {
                Invoice inv;
                char inv_id[16];
                std::snprintf(inv_id, sizeof(inv_id), "I%08zu", ++counter);
                inv.invoice_id = inv_id;
                inv.customer_id = cust_id;
                inv.country = country;
                inv.amount = std::max(0.01, std::round(std::exp(log_amount(rng)) * 100.0) / 100.0);
                inv.creation_date =
                    Date{std::chrono::year{ym.year} / ym.month / day(rng)};
                inv.due_date = add_days(inv.creation_date, cfg.due_days);

                double z = base_logodds + cfg.drift_per_month * t +
                           (ym.month == 12 ? cfg.december_bump : 0.0);
                std::bernoulli_distribution is_late(sigmoid(z));
                if (is_late(rng)) {
                    inv.payment_date =
                        add_days(inv.due_date, cfg.grace_days + 1 + late_delay(rng));
                } else {
                    Date pay = add_days(inv.due_date, ontime_offset(rng));
                    if (days_between(inv.creation_date, pay) < 0) pay = inv.creation_date;
                    inv.payment_date = pay;
                }
                out.push_back(std::move(inv));
            }
        }
    }
    return out;
}

}  // namespace arc
