#include <doctest.h>

#include <array>
#include <cmath>
#include <map>
#include <sstream>

#include "arc/ingest.hpp"
#include "arc/synth.hpp"

using namespace arc;

namespace {

GeneratorConfig small_config(std::uint64_t seed = 7) {
    GeneratorConfig cfg;
    cfg.seed = seed;
    cfg.n_customers = 60;
    cfg.start_month = {2018, 1};
    cfg.end_month = {2018, 12};
    return cfg;
}

bool same_invoice(const Invoice& a, const Invoice& b) {
    return a.invoice_id == b.invoice_id && a.customer_id == b.customer_id &&
           a.country == b.country && a.amount == b.amount && a.creation_date == b.creation_date &&
           a.due_date == b.due_date && a.payment_date == b.payment_date;
}

}  // namespace

TEST_CASE("generation is deterministic in the seed") {
    auto a = generate(small_config(7));
    auto b = generate(small_config(7));
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) CHECK(same_invoice(a[i], b[i]));
    auto c = generate(small_config(8));
    bool identical = a.size() == c.size();
    if (identical)
        for (size_t i = 0; i < a.size(); ++i) identical = identical && same_invoice(a[i], c[i]);
    CHECK_FALSE(identical);
}

TEST_CASE("generated invoices pass strict csv validation end to end") {
    InvoiceDataset ds(generate(small_config()));
    std::ostringstream out;
    write_csv_stream(ds, out);
    std::istringstream in(out.str());
    auto [ds2, report] = parse_csv_stream(in, /*strict=*/true);
    CHECK(report.rejected == 0);
    CHECK(ds2.size() == ds.size());
}

TEST_CASE("volume and date range follow the config") {
    GeneratorConfig cfg = small_config();
    auto invoices = generate(cfg);
    // 60 customers * 12 months * Poisson(3.5) => about 2520
    CHECK(invoices.size() > 1800);
    CHECK(invoices.size() < 3300);
    for (const Invoice& inv : invoices) {
        YearMonth m = YearMonth::of(inv.creation_date);
        CHECK(cfg.start_month <= m);
        CHECK(m <= cfg.end_month);
        CHECK(days_between(inv.creation_date, inv.due_date) == cfg.due_days);
        CHECK(inv.amount > 0.0);
        if (inv.payment_date) CHECK(days_between(inv.creation_date, *inv.payment_date) >= 0);
    }
}

TEST_CASE("country codes come from the weight table, heavy codes dominate") {
    auto invoices = generate(small_config());
    std::map<std::string, size_t> counts;
    for (const Invoice& inv : invoices) counts[inv.country]++;
    size_t known = 0;
    for (const auto& [code, weight] : GeneratorConfig{}.country_weights) {
        known += counts[code];
        (void)weight;
    }
    CHECK(known == invoices.size());
    CHECK(counts["MX"] + counts["BR"] > counts["EC"] + counts["AR"] + counts["UY"]);
}

TEST_CASE("both payment classes are present and labels match the payment rule") {
    GeneratorConfig cfg = small_config();
    auto invoices = generate(cfg);
    size_t late = 0, ontime = 0;
    GracePolicy grace{cfg.grace_days};
    for (const Invoice& inv : invoices) {
        // every generated invoice carries an eventual payment date; rows only
        // look outstanding through a knowledge cutoff earlier than that date
        REQUIRE(inv.payment_date.has_value());
        if (label_invoice(inv, grace) == PaymentLabel::Late) late++;
        else ontime++;
    }
    CHECK(late > 100);
    CHECK(ontime > 100);
}

TEST_CASE("flat config with a uniform prior lands near a 50% late rate") {
    GeneratorConfig cfg;
    cfg.seed = 99;
    cfg.n_customers = 300;
    cfg.start_month = {2017, 6};
    cfg.end_month = {2019, 5};
    cfg.drift_per_month = 0.0;
    cfg.december_bump = 0.0;
    cfg.reliability_alpha = 1.0;
    cfg.reliability_beta = 1.0;
    auto invoices = generate(cfg);
    REQUIRE(invoices.size() >= 20000);
    size_t late = 0;
    for (const Invoice& inv : invoices)
        late += label_invoice(inv, GracePolicy{cfg.grace_days}) == PaymentLabel::Late;
    double share = double(late) / double(invoices.size());
    CHECK(share > 0.48);
    CHECK(share < 0.52);
}

TEST_CASE("customer behavior persists across the two halves of the horizon") {
    GeneratorConfig cfg;  // defaults
    auto invoices = generate(cfg);
    int mid = (cfg.start_month.index() + cfg.end_month.index()) / 2;
    std::map<std::string, std::array<std::pair<int, int>, 2>> halves;  // (late, total)
    for (const Invoice& inv : invoices) {
        int h = YearMonth::of(inv.creation_date).index() <= mid ? 0 : 1;
        auto& cell = halves[inv.customer_id][size_t(h)];
        cell.second++;
        cell.first += label_invoice(inv, GracePolicy{cfg.grace_days}) == PaymentLabel::Late;
    }
    std::vector<double> a, b;
    for (const auto& [customer, cells] : halves) {
        if (cells[0].second < 5 || cells[1].second < 5) continue;
        a.push_back(double(cells[0].first) / cells[0].second);
        b.push_back(double(cells[1].first) / cells[1].second);
    }
    REQUIRE(a.size() > 100);
    double ma = 0, mb = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= double(a.size());
    mb /= double(b.size());
    double cov = 0, va = 0, vb = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        cov += (a[i] - ma) * (b[i] - mb);
        va += (a[i] - ma) * (a[i] - ma);
        vb += (b[i] - mb) * (b[i] - mb);
    }
    CHECK(cov / std::sqrt(va * vb) > 0.3);
}

TEST_CASE("negative drift lowers the late share over time") {
    GeneratorConfig cfg;
    cfg.seed = 11;
    cfg.n_customers = 150;
    cfg.start_month = {2017, 1};
    cfg.end_month = {2018, 12};
    cfg.drift_per_month = -0.15;
    cfg.december_bump = 0.0;
    auto invoices = generate(cfg);

    auto late_share = [&](YearMonth from, YearMonth to) {
        size_t late = 0, paid = 0;
        for (const Invoice& inv : invoices) {
            YearMonth m = YearMonth::of(inv.creation_date);
            if (m < from || to < m || !inv.payment_date) continue;
            paid++;
            if (label_invoice(inv, GracePolicy{cfg.grace_days}) == PaymentLabel::Late) late++;
        }
        REQUIRE(paid > 200);
        return double(late) / double(paid);
    };
    CHECK(late_share({2017, 1}, {2017, 6}) > late_share({2018, 7}, {2018, 12}) + 0.1);
}

TEST_CASE("december bump raises december's late share") {
    GeneratorConfig cfg;
    cfg.seed = 13;
    cfg.n_customers = 200;
    cfg.start_month = {2018, 10};
    cfg.end_month = {2019, 2};
    cfg.drift_per_month = 0.0;
    cfg.december_bump = 2.0;
    auto invoices = generate(cfg);
    size_t dec_late = 0, dec_paid = 0, other_late = 0, other_paid = 0;
    for (const Invoice& inv : invoices) {
        if (!inv.payment_date) continue;
        bool late = label_invoice(inv, GracePolicy{cfg.grace_days}) == PaymentLabel::Late;
        if (YearMonth::of(inv.creation_date).month == 12) {
            dec_paid++;
            dec_late += late;
        } else {
            other_paid++;
            other_late += late;
        }
    }
    REQUIRE(dec_paid > 200);
    REQUIRE(other_paid > 200);
    CHECK(double(dec_late) / dec_paid > double(other_late) / other_paid + 0.1);
}

TEST_CASE("invalid configs are rejected") {
    GeneratorConfig cfg = small_config();
    cfg.n_customers = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small_config();
    cfg.end_month = {2017, 1};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small_config();
    cfg.reliability_alpha = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small_config();
    cfg.country_weights.clear();
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small_config();
    cfg.mean_late_delay_days = -1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
