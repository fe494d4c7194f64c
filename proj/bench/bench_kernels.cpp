// Compares the serial reference kernels against their OpenMP
// counterparts and verifies they agree bit for bit.

#include <chrono>
#include <cstdio>
#include <cstring>

#include "arc/eval.hpp"
#include "arc/synth.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

template <typename F>
double timed(F&& f) {
    auto start = Clock::now();
    f();
    return seconds_since(start);
}

bool rows_equal(const std::vector<arc::FeatureRow>& a, const std::vector<arc::FeatureRow>& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i].invoice_id != b[i].invoice_id) return false;
        if (arc::feature_vector(arc::impute(a[i], {}), false) !=
            arc::feature_vector(arc::impute(b[i], {}), false)) {
            return false;
        }
    }
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    arc::GeneratorConfig gcfg;
    if (argc > 1 && std::strcmp(argv[1], "--small") == 0) {
        gcfg.n_customers = 60;
    }
    std::printf("generating synthetic invoices...\n");
    arc::InvoiceDataset ds(arc::generate(gcfg));
    std::printf("  %zu invoices\n", ds.size());

    arc::FeatureConfig fcfg;
    std::vector<arc::FeatureRow> rows_serial, rows_parallel;
    double t_feat_serial = timed([&] { rows_serial = arc::extract_all(ds, fcfg, false); });
    double t_feat_parallel = timed([&] { rows_parallel = arc::extract_all(ds, fcfg, true); });
    bool feat_ok = rows_equal(rows_serial, rows_parallel);
    std::printf("feature extraction: serial %.3fs  omp %.3fs  speedup %.2fx  match=%s\n",
                t_feat_serial, t_feat_parallel, t_feat_serial / t_feat_parallel,
                feat_ok ? "yes" : "NO");

    arc::SplitSpec spec;
    spec.train_start = gcfg.start_month;
    spec.train_end = gcfg.start_month.plus_months(11);
    spec.val_start = gcfg.start_month.plus_months(12);
    spec.val_end = gcfg.start_month.plus_months(15);
    spec.test_start = gcfg.start_month.plus_months(16);
    spec.test_end = gcfg.end_month;
    arc::SplitResult parts = arc::split_rows(rows_serial, spec);
    arc::ImputationStats stats = arc::fit_imputation(parts.train);
    for (auto* part : {&parts.train, &parts.test}) {
        for (auto& r : *part) r = arc::impute(std::move(r), stats);
    }
    arc::Matrix train_x = arc::rows_to_matrix(parts.train, false);
    std::vector<uint8_t> train_y = arc::rows_to_labels(parts.train);
    arc::Matrix test_x = arc::rows_to_matrix(parts.test, false);

    arc::RfConfig rf;
    rf.n_trees = 60;
    rf.seed = 7;
    arc::TrainedModel forest_serial, forest_parallel;
    double t_rf_serial = timed([&] {
        forest_serial = arc::train_random_forest(train_x, train_y, arc::feature_names(false), rf,
                                                 false);
    });
    double t_rf_parallel = timed([&] {
        forest_parallel = arc::train_random_forest(train_x, train_y, arc::feature_names(false), rf,
                                                   true);
    });
    bool rf_ok = arc::model_to_json(forest_serial) == arc::model_to_json(forest_parallel);
    std::printf("random forest (%d trees): serial %.3fs  omp %.3fs  speedup %.2fx  match=%s\n",
                rf.n_trees, t_rf_serial, t_rf_parallel, t_rf_serial / t_rf_parallel,
                rf_ok ? "yes" : "NO");

    arc::TrainedModel knn = arc::train_knn(train_x, train_y, arc::feature_names(false), 15);
    std::vector<double> scores_serial, scores_parallel;
    double t_knn_serial = timed([&] { scores_serial = arc::score_all(knn, test_x, false); });
    double t_knn_parallel = timed([&] { scores_parallel = arc::score_all(knn, test_x, true); });
    bool knn_ok = scores_serial == scores_parallel;
    std::printf("knn scoring (%zu queries): serial %.3fs  omp %.3fs  speedup %.2fx  match=%s\n",
                test_x.rows, t_knn_serial, t_knn_parallel, t_knn_serial / t_knn_parallel,
                knn_ok ? "yes" : "NO");

    return feat_ok && rf_ok && knn_ok ? 0 : 1;
}
