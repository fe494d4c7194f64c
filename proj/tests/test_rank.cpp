#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "arc/eval.hpp"
#include "arc/rank.hpp"
#include "support/oracles.hpp"

using namespace arc;

namespace {

// A model that scores every row the same, regardless of features.
TrainedModel constant_model(double p) {
    TrainedModel m;
    m.kind = ModelKind::LogisticRegression;
    m.feature_names = feature_names(false);
    LogisticParams params;
    params.weights.assign(m.feature_names.size(), 0.0);
    params.intercept = std::log(p / (1.0 - p));
    m.params = params;
    return m;
}

Invoice open_invoice(const std::string& id, const std::string& customer, double amount,
                     const char* created) {
    Invoice inv;
    inv.invoice_id = id;
    inv.customer_id = customer;
    inv.amount = amount;
    inv.creation_date = parse_date(created);
    inv.due_date = add_days(inv.creation_date, 30);
    return inv;
}

}  // namespace

TEST_CASE("invoice risk is amount times late probability") {
    CHECK(invoice_risk(1000000.0, 0.3506) == doctest::Approx(350600.0));
    CHECK(invoice_risk(300000.0, 0.9358) == doctest::Approx(280740.0));
    // large amounts can out-rank higher late probabilities
    CHECK(invoice_risk(1000000.0, 0.3506) > invoice_risk(300000.0, 0.9358));
    CHECK_THROWS(invoice_risk(-1.0, 0.5));
    CHECK_THROWS(invoice_risk(10.0, 1.5));
    CHECK_THROWS(invoice_risk(10.0, -0.1));
}

TEST_CASE("customer risk is the mean of open-invoice risks") {
    CHECK(customer_risk({10.0, 20.0, 60.0}) == doctest::Approx(30.0));
    CHECK(customer_risk({5.0}) == 5.0);
    CHECK_THROWS(customer_risk({}));
}

TEST_CASE("kendall tau on simple orderings") {
    CHECK(kendall_tau({1, 2, 3, 4}, {10, 20, 30, 40}) == doctest::Approx(1.0));
    CHECK(kendall_tau({1, 2, 3, 4}, {40, 30, 20, 10}) == doctest::Approx(-1.0));
    CHECK(kendall_tau({1, 2, 3, 4}, {7, 7, 7, 7}) == 0.0);
    CHECK(kendall_tau({1, 2}, {1, 2}) == doctest::Approx(1.0));
}

TEST_CASE("kendall tau matches the pair-counting oracle within 1e-12") {
    std::mt19937_64 rng(88);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> quantize(0, 6);
    for (int round = 0; round < 60; ++round) {
        size_t n = 2 + rng() % 200;
        std::vector<double> a(n), b(n);
        for (size_t i = 0; i < n; ++i) {
            a[i] = round % 2 ? double(quantize(rng)) : u(rng);
            b[i] = round % 3 ? double(quantize(rng)) : u(rng);
        }
        CHECK(std::abs(kendall_tau(a, b) - oracles::tau_pair_count(a, b)) <= 1e-12);
    }
}

TEST_CASE("ranked list covers exactly the customers with open invoices") {
    std::vector<Invoice> raw = {
        open_invoice("I1", "C1", 100, "2019-01-05"),
        open_invoice("I2", "C1", 300, "2019-02-01"),
        open_invoice("I3", "C2", 900, "2019-02-10"),
        open_invoice("I4", "C3", 50, "2019-03-20"),  // created after as_of
    };
    raw.push_back(open_invoice("I5", "C4", 70, "2019-01-10"));
    raw.back().payment_date = parse_date("2019-02-01");  // paid before as_of -> closed

    InvoiceDataset ds(std::move(raw));
    TrainedModel m = constant_model(0.5);
    RankedList list = build_ranked_list(ds, m, parse_date("2019-03-01"));
    REQUIRE(list.entries.size() == 2);
    CHECK(list.entries[0].customer_id == "C2");  // 900*0.5 > mean(100,300)*0.5
    CHECK(list.entries[0].risk_score == doctest::Approx(450.0));
    CHECK(list.entries[0].n_open_invoices == 1);
    CHECK(list.entries[1].customer_id == "C1");
    CHECK(list.entries[1].risk_score == doctest::Approx(100.0));  // mean(100,300) * 0.5
    CHECK(list.entries[1].total_open_amount == doctest::Approx(400.0));
    CHECK(list.entries[1].n_open_invoices == 2);
    CHECK(list.entries[0].risk_rank == 1);
    CHECK(list.entries[1].risk_rank == 2);
    CHECK(list.entries[0].greedy_rank == 1);  // C2 total 900 > C1 total 400
    CHECK(list.entries[1].greedy_rank == 2);
}

TEST_CASE("a payment dated on as_of is not yet known, the invoice stays open") {
    std::vector<Invoice> raw = {open_invoice("I1", "C1", 100, "2019-01-05")};
    raw[0].payment_date = parse_date("2019-03-01");
    InvoiceDataset ds(std::move(raw));
    RankedList list = build_ranked_list(ds, constant_model(0.5), parse_date("2019-03-01"));
    REQUIRE(list.entries.size() == 1);
    CHECK(list.entries[0].n_open_invoices == 1);
}

TEST_CASE("constant scorer with one invoice per customer makes both orderings agree") {
    std::vector<Invoice> raw;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> amount(1.0, 10000.0);
    for (int c = 1; c <= 40; ++c) {
        raw.push_back(open_invoice("I" + std::to_string(c), "C" + std::to_string(c),
                                   amount(rng), "2019-01-10"));
    }
    InvoiceDataset ds(std::move(raw));
    RankedList list = build_ranked_list(ds, constant_model(0.3), parse_date("2019-02-01"));
    REQUIRE(list.entries.size() == 40);
    for (const RankEntry& e : list.entries) CHECK(e.risk_rank == e.greedy_rank);
    CHECK(list.tau == doctest::Approx(1.0));
}

TEST_CASE("ranked-list invariants on fuzzed data with a trained model") {
    std::mt19937_64 rng(91);
    std::vector<Invoice> raw;
    do raw = oracles::random_invoices(rng, 800);
    while (raw.size() < 400);
    InvoiceDataset ds(raw);

    auto rows = extract_all(ds, FeatureConfig{});
    std::vector<FeatureRow> labeled;
    for (auto& r : rows)
        if (r.label != RowLabel::Censored) labeled.push_back(r);
    ImputationStats stats = fit_imputation(labeled);
    for (auto& r : labeled) r = impute(r, stats);
    TrainedModel m = train_naive_bayes(rows_to_matrix(labeled, false), rows_to_labels(labeled),
                                       feature_names(false));
    m.meta.imputation = stats;

    Date as_of = parse_date("2018-06-01");
    RankedList list = build_ranked_list(ds, m, as_of);
    CHECK(list.as_of == as_of);
    CHECK(list.tau >= -1.0);
    CHECK(list.tau <= 1.0);

    std::vector<int> greedy_seen;
    for (size_t i = 0; i < list.entries.size(); ++i) {
        const RankEntry& e = list.entries[i];
        CHECK(e.risk_rank == int(i) + 1);
        CHECK(e.risk_score >= 0.0);
        CHECK(e.total_open_amount > 0.0);
        CHECK(e.n_open_invoices > 0);
        if (i > 0) CHECK(list.entries[i - 1].risk_score >= e.risk_score);
        greedy_seen.push_back(e.greedy_rank);
    }
    std::sort(greedy_seen.begin(), greedy_seen.end());
    for (size_t i = 0; i < greedy_seen.size(); ++i) CHECK(greedy_seen[i] == int(i) + 1);

    // cross-check open-invoice totals against a direct scan
    for (const RankEntry& e : list.entries) {
        double total = 0.0;
        int count = 0;
        for (const Invoice& inv : ds.invoices()) {
            if (inv.customer_id != e.customer_id) continue;
            bool created = days_between(inv.creation_date, as_of) >= 0;
            bool paid_known = inv.payment_date && days_between(*inv.payment_date, as_of) > 0;
            if (created && !paid_known) {
                total += inv.amount;
                count++;
            }
        }
        CHECK(e.total_open_amount == doctest::Approx(total).epsilon(1e-12));
        CHECK(e.n_open_invoices == count);
    }
}

TEST_CASE("scaling every amount by a positive constant preserves the risk ordering") {
    std::mt19937_64 rng(17);
    std::vector<Invoice> raw;
    std::uniform_real_distribution<double> amount(1.0, 500.0);
    for (int c = 1; c <= 15; ++c)
        for (int i = 0; i < 3; ++i)
            raw.push_back(open_invoice("I" + std::to_string(c * 10 + i), "C" + std::to_string(c),
                                       amount(rng), i == 0 ? "2019-01-05" : "2019-02-01"));
    std::vector<Invoice> scaled = raw;
    for (Invoice& inv : scaled) inv.amount *= 1000.0;

    InvoiceDataset ds_a(std::move(raw)), ds_b(std::move(scaled));
    TrainedModel m = constant_model(0.25);  // amount-blind scorer
    RankedList la = build_ranked_list(ds_a, m, parse_date("2019-03-01"));
    RankedList lb = build_ranked_list(ds_b, m, parse_date("2019-03-01"));
    REQUIRE(la.entries.size() == lb.entries.size());
    for (size_t i = 0; i < la.entries.size(); ++i) {
        CHECK(la.entries[i].customer_id == lb.entries[i].customer_id);
        CHECK(lb.entries[i].risk_score == doctest::Approx(1000.0 * la.entries[i].risk_score));
        CHECK(la.entries[i].greedy_rank == lb.entries[i].greedy_rank);
    }
    CHECK(la.tau == doctest::Approx(lb.tau));
}

TEST_CASE("ranking csv has the documented header and one row per customer") {
    std::vector<Invoice> raw = {open_invoice("I1", "C1", 100, "2019-01-05"),
                                open_invoice("I2", "C2", 900, "2019-02-10")};
    InvoiceDataset ds(std::move(raw));
    RankedList list = build_ranked_list(ds, constant_model(0.5), parse_date("2019-03-01"));
    std::string path = "ranking_csv_test.csv";
    write_ranking_csv(list, path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "customer_id,risk_score,total_open_amount,n_open_invoices,risk_rank,greedy_rank");
    size_t rows = 0;
    for (std::string line; std::getline(in, line);)
        if (!line.empty()) ++rows;
    CHECK(rows == list.entries.size());
    in.close();
    std::remove(path.c_str());
}
