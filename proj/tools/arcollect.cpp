// arcollect: invoice late-payment prediction pipeline driver.
//
// Subcommands: generate | featurize | train | evaluate | rank | sweep |
// snapshots | plotdata. Configuration comes from a JSON file; a few flags
// (--out, --seed, --input, --model-path) override it. All outputs are
// deterministic for a fixed config and seed.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include <CLI11.hpp>
#include <json.hpp>

#include "arc/csv.hpp"
#include "arc/eval.hpp"
#include "arc/rank.hpp"
#include "arc/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunConfig {
    std::uint64_t seed = 42;
    std::string out_dir = "out";
    std::string input_csv;
    std::string model_path;
    bool strict_csv = false;
    double threshold = 0.5;

    arc::PipelineConfig pipeline{};
    arc::ModelKind model_kind = arc::ModelKind::Ensemble;

    std::optional<arc::SplitSpec> split;

    struct {
        int train_months = 6;
        int val_months = 4;
        int step_months = 3;
        int count = 5;
    } snapshots;

    struct {
        int w_min = 2;
        int w_max = 12;
        std::vector<arc::ModelKind> kinds = {arc::ModelKind::Ensemble};
    } sweep;

    arc::GeneratorConfig generator{};
    std::optional<arc::Date> rank_as_of;
    std::optional<arc::Date> plot_from, plot_to;
};

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        if (!allowed.count(key)) {
            throw arc::ConfigError("unknown config key '" + key + "' in " + where);
        }
    }
}

arc::SplitSpec parse_split(const json& j) {
    check_keys(j, {"train", "validation", "test"}, "split");
    auto range = [&](const char* name, arc::YearMonth& start, arc::YearMonth& end) {
        const json& r = j.at(name);
        if (!r.is_array() || r.size() != 2) {
            throw arc::ConfigError(std::string("split.") + name + " must be [start, end]");
        }
        start = arc::YearMonth::parse(r[0].get<std::string>());
        end = arc::YearMonth::parse(r[1].get<std::string>());
    };
    arc::SplitSpec spec;
    range("train", spec.train_start, spec.train_end);
    range("validation", spec.val_start, spec.val_end);
    range("test", spec.test_start, spec.test_end);
    spec.validate();
    return spec;
}

void parse_generator(const json& j, arc::GeneratorConfig& g) {
    check_keys(j,
               {"seed", "n_customers", "start_month", "end_month",
                "mean_invoices_per_customer_month", "amount_log_mean", "amount_log_sd",
                "reliability_alpha", "reliability_beta", "drift_per_month", "december_bump",
                "mean_late_delay_days", "grace_days", "due_days", "country_weights"},
               "generator");
    if (j.contains("seed")) g.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("n_customers")) g.n_customers = j["n_customers"].get<int>();
    if (j.contains("start_month")) g.start_month = arc::YearMonth::parse(j["start_month"].get<std::string>());
    if (j.contains("end_month")) g.end_month = arc::YearMonth::parse(j["end_month"].get<std::string>());
    if (j.contains("mean_invoices_per_customer_month")) {
        g.mean_invoices_per_customer_month = j["mean_invoices_per_customer_month"].get<double>();
    }
    if (j.contains("amount_log_mean")) g.amount_log_mean = j["amount_log_mean"].get<double>();
    if (j.contains("amount_log_sd")) g.amount_log_sd = j["amount_log_sd"].get<double>();
    if (j.contains("reliability_alpha")) g.reliability_alpha = j["reliability_alpha"].get<double>();
    if (j.contains("reliability_beta")) g.reliability_beta = j["reliability_beta"].get<double>();
    if (j.contains("drift_per_month")) g.drift_per_month = j["drift_per_month"].get<double>();
    if (j.contains("december_bump")) g.december_bump = j["december_bump"].get<double>();
    if (j.contains("mean_late_delay_days")) g.mean_late_delay_days = j["mean_late_delay_days"].get<double>();
    if (j.contains("grace_days")) g.grace_days = j["grace_days"].get<int>();
    if (j.contains("due_days")) g.due_days = j["due_days"].get<int>();
    if (j.contains("country_weights")) {
        g.country_weights.clear();
        for (const auto& [country, weight] : j["country_weights"].items()) {
            g.country_weights.emplace_back(country, weight.get<double>());
        }
    }
}

void parse_model(const json& j, RunConfig& cfg) {
    check_keys(j, {"kind", "knn_k", "lr", "rf", "gbt"}, "model");
    if (j.contains("kind")) cfg.model_kind = arc::model_kind_from_name(j["kind"].get<std::string>());
    if (j.contains("knn_k")) cfg.pipeline.knn_k = j["knn_k"].get<int>();
    if (j.contains("lr")) {
        const json& l = j["lr"];
        check_keys(l, {"learning_rate", "max_iters", "l2", "tol"}, "model.lr");
        if (l.contains("learning_rate")) cfg.pipeline.lr.learning_rate = l["learning_rate"].get<double>();
        if (l.contains("max_iters")) cfg.pipeline.lr.max_iters = l["max_iters"].get<int>();
        if (l.contains("l2")) cfg.pipeline.lr.l2 = l["l2"].get<double>();
        if (l.contains("tol")) cfg.pipeline.lr.tol = l["tol"].get<double>();
    }
    if (j.contains("rf")) {
        const json& r = j["rf"];
        check_keys(r, {"n_trees", "max_depth", "min_leaf", "mtry"}, "model.rf");
        if (r.contains("n_trees")) cfg.pipeline.rf.n_trees = r["n_trees"].get<int>();
        if (r.contains("max_depth")) cfg.pipeline.rf.max_depth = r["max_depth"].get<int>();
        if (r.contains("min_leaf")) cfg.pipeline.rf.min_leaf = r["min_leaf"].get<int>();
        if (r.contains("mtry")) cfg.pipeline.rf.mtry = r["mtry"].get<int>();
    }
    if (j.contains("gbt")) {
        const json& g = j["gbt"];
        check_keys(g, {"n_trees", "max_depth", "shrinkage", "min_leaf"}, "model.gbt");
        if (g.contains("n_trees")) cfg.pipeline.gbt.n_trees = g["n_trees"].get<int>();
        if (g.contains("max_depth")) cfg.pipeline.gbt.max_depth = g["max_depth"].get<int>();
        if (g.contains("shrinkage")) cfg.pipeline.gbt.shrinkage = g["shrinkage"].get<double>();
        if (g.contains("min_leaf")) cfg.pipeline.gbt.min_leaf = g["min_leaf"].get<int>();
    }
}

RunConfig load_config(const std::string& path) {
    RunConfig cfg;
    if (path.empty()) return cfg;
    std::ifstream in(path);
    if (!in) throw arc::ConfigError("cannot open config '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw arc::ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    check_keys(j,
               {"seed", "out_dir", "input_csv", "model_path", "strict_csv", "threshold",
                "window_months", "grace_days", "include_ratio_features", "model", "split",
                "snapshots", "sweep", "generator", "rank", "plotdata"},
               "config");
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("out_dir")) cfg.out_dir = j["out_dir"].get<std::string>();
    if (j.contains("input_csv")) cfg.input_csv = j["input_csv"].get<std::string>();
    if (j.contains("model_path")) cfg.model_path = j["model_path"].get<std::string>();
    if (j.contains("strict_csv")) cfg.strict_csv = j["strict_csv"].get<bool>();
    if (j.contains("threshold")) cfg.threshold = j["threshold"].get<double>();
    if (j.contains("window_months")) cfg.pipeline.features.window_months = j["window_months"].get<int>();
    if (j.contains("grace_days")) cfg.pipeline.features.grace.grace_days = j["grace_days"].get<int>();
    if (j.contains("include_ratio_features")) {
        cfg.pipeline.features.include_ratio_features = j["include_ratio_features"].get<bool>();
    }
    if (j.contains("model")) parse_model(j["model"], cfg);
    if (j.contains("split")) cfg.split = parse_split(j["split"]);
    if (j.contains("snapshots")) {
        const json& s = j["snapshots"];
        check_keys(s, {"train_months", "val_months", "step_months", "count"}, "snapshots");
        if (s.contains("train_months")) cfg.snapshots.train_months = s["train_months"].get<int>();
        if (s.contains("val_months")) cfg.snapshots.val_months = s["val_months"].get<int>();
        if (s.contains("step_months")) cfg.snapshots.step_months = s["step_months"].get<int>();
        if (s.contains("count")) cfg.snapshots.count = s["count"].get<int>();
    }
    if (j.contains("sweep")) {
        const json& s = j["sweep"];
        check_keys(s, {"w_min", "w_max", "kinds"}, "sweep");
        if (s.contains("w_min")) cfg.sweep.w_min = s["w_min"].get<int>();
        if (s.contains("w_max")) cfg.sweep.w_max = s["w_max"].get<int>();
        if (s.contains("kinds")) {
            cfg.sweep.kinds.clear();
            for (const auto& k : s["kinds"]) {
                cfg.sweep.kinds.push_back(arc::model_kind_from_name(k.get<std::string>()));
            }
        }
    }
    if (j.contains("generator")) parse_generator(j["generator"], cfg.generator);
    if (j.contains("rank")) {
        check_keys(j["rank"], {"as_of"}, "rank");
        if (j["rank"].contains("as_of")) {
            cfg.rank_as_of = arc::parse_date(j["rank"]["as_of"].get<std::string>());
        }
    }
    if (j.contains("plotdata")) {
        check_keys(j["plotdata"], {"from", "to"}, "plotdata");
        if (j["plotdata"].contains("from")) {
            cfg.plot_from = arc::parse_date(j["plotdata"]["from"].get<std::string>());
        }
        if (j["plotdata"].contains("to")) {
            cfg.plot_to = arc::parse_date(j["plotdata"]["to"].get<std::string>());
        }
    }
    return cfg;
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
    fs::create_directories(cfg.out_dir);
    return (fs::path(cfg.out_dir) / name).string();
}

arc::InvoiceDataset load_input(const RunConfig& cfg) {
    if (cfg.input_csv.empty()) throw arc::ConfigError("no input_csv configured");
    auto [ds, report] = arc::parse_csv(cfg.input_csv, cfg.strict_csv);
    if (report.rejected > 0) {
        std::cerr << "warning: rejected " << report.rejected << " of " << report.row_count
                  << " rows\n";
        for (const auto& issue : report.rejections) {
            std::cerr << "  row " << issue.row << ": " << issue.reason << "\n";
        }
    }
    if (ds.empty()) throw std::runtime_error("input contains no valid invoices");
    return std::move(ds);
}

arc::SplitSpec require_split(const RunConfig& cfg) {
    if (!cfg.split) throw arc::ConfigError("this command needs a 'split' config section");
    return *cfg.split;
}

json metrics_to_json(const arc::MetricsReport& r) {
    return {{"n", r.n},
            {"accuracy", r.accuracy},
            {"f1_late", r.f1_late},
            {"baseline", r.baseline},
            {"auc", r.auc},
            {"confusion",
             {{"tp", r.confusion.tp},
              {"fp", r.confusion.fp},
              {"tn", r.confusion.tn},
              {"fn", r.confusion.fn}}}};
}

void write_json(const json& j, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << j.dump(2) << '\n';
}

void write_monthly_csv(const std::vector<arc::MonthlyPoint>& monthly, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << "month,n,accuracy,baseline\n";
    for (const auto& p : monthly) {
        out << p.month.str() << ',' << p.n << ',' << arc::csv::format_double(p.accuracy) << ','
            << arc::csv::format_double(p.baseline) << '\n';
    }
}

// --- subcommands ---

int cmd_generate(const RunConfig& cfg) {
    arc::GeneratorConfig gcfg = cfg.generator;
    gcfg.seed = cfg.seed;
    arc::InvoiceDataset ds(arc::generate(gcfg));
    std::string path = out_path(cfg, "invoices.csv");
    arc::write_csv(ds, path);
    std::cout << "wrote " << ds.size() << " invoices to " << path << "\n";
    return 0;
}

int cmd_featurize(const RunConfig& cfg) {
    arc::InvoiceDataset ds = load_input(cfg);
    auto rows = arc::extract_all(ds, cfg.pipeline.features);
    std::string path = out_path(cfg, "features.csv");
    arc::write_feature_csv(rows, cfg.pipeline.features.include_ratio_features, path);
    std::cout << "wrote " << rows.size() << " feature rows to " << path << "\n";
    return 0;
}

int cmd_train(const RunConfig& cfg) {
    arc::InvoiceDataset ds = load_input(cfg);
    arc::PipelineConfig pcfg = cfg.pipeline;
    pcfg.seed = cfg.seed;
    arc::PipelineRun run = arc::run_pipeline(ds, require_split(cfg), cfg.model_kind, pcfg);
    std::string model_path = out_path(cfg, "model.json");
    arc::save_model(run.model, model_path);

    bool ratios = pcfg.features.include_ratio_features;
    json metrics = {
        {"train", metrics_to_json(arc::evaluate_model(run.model, run.parts.train, ratios,
                                                      cfg.threshold))},
        {"validation", metrics_to_json(arc::evaluate_model(run.model, run.parts.validation,
                                                           ratios, cfg.threshold))},
    };
    write_json(metrics, out_path(cfg, "train_metrics.json"));
    std::cout << "wrote " << model_path << "\n";
    return 0;
}

int cmd_evaluate(const RunConfig& cfg) {
    arc::InvoiceDataset ds = load_input(cfg);
    if (cfg.model_path.empty()) throw arc::ConfigError("evaluate needs model_path");
    arc::TrainedModel model = arc::load_model(cfg.model_path);

    arc::FeatureConfig fcfg;
    fcfg.window_months = model.meta.window_months;
    fcfg.grace.grace_days = model.meta.grace_days;
    fcfg.include_ratio_features = model.meta.include_ratio_features;
    auto rows = arc::extract_all(ds, fcfg);

    std::vector<arc::FeatureRow> eval_rows;
    if (cfg.split) {
        eval_rows = arc::split_rows(rows, *cfg.split).test;
    } else {
        for (const auto& r : rows) {
            if (r.label != arc::RowLabel::Censored) eval_rows.push_back(r);
        }
        if (eval_rows.empty()) throw std::runtime_error("no labeled rows to evaluate");
    }
    for (auto& r : eval_rows) r = arc::impute(std::move(r), model.meta.imputation);

    arc::MetricsReport report =
        arc::evaluate_model(model, eval_rows, fcfg.include_ratio_features, cfg.threshold);
    write_json(metrics_to_json(report), out_path(cfg, "metrics.json"));
    write_monthly_csv(report.monthly, out_path(cfg, "monthly.csv"));

    arc::Matrix x = arc::rows_to_matrix(eval_rows, fcfg.include_ratio_features);
    auto [curve, auc] = arc::roc_and_auc(arc::rows_to_labels(eval_rows), arc::score_all(model, x));
    std::ofstream roc(out_path(cfg, "roc.csv"), std::ios::binary);
    roc << "fpr,tpr\n";
    for (const auto& [fpr, tpr] : curve.points) {
        roc << arc::csv::format_double(fpr) << ',' << arc::csv::format_double(tpr) << '\n';
    }
    std::cout << "accuracy " << report.accuracy << " baseline " << report.baseline << " auc "
              << auc << "\n";
    return 0;
}

int cmd_rank(const RunConfig& cfg) {
    arc::InvoiceDataset ds = load_input(cfg);
    if (cfg.model_path.empty()) throw arc::ConfigError("rank needs model_path");
    if (!cfg.rank_as_of) throw arc::ConfigError("rank needs rank.as_of");
    arc::TrainedModel model = arc::load_model(cfg.model_path);
    arc::RankedList list = arc::build_ranked_list(ds, model, *cfg.rank_as_of);
    arc::write_ranking_csv(list, out_path(cfg, "ranking.csv"));
    write_json(json{{"as_of", arc::format_date(list.as_of)},
                    {"n_customers", list.entries.size()},
                    {"kendall_tau", list.tau}},
               out_path(cfg, "rank_summary.json"));
    std::cout << "ranked " << list.entries.size() << " customers, tau " << list.tau << "\n";
    return 0;
}

int cmd_sweep(const RunConfig& cfg) {
    arc::InvoiceDataset ds = load_input(cfg);
    arc::PipelineConfig pcfg = cfg.pipeline;
    pcfg.seed = cfg.seed;
    if (cfg.sweep.w_min < 1 || cfg.sweep.w_max < cfg.sweep.w_min) {
        throw arc::ConfigError("sweep: bad window range");
    }
    std::vector<int> windows;
    for (int w = cfg.sweep.w_min; w <= cfg.sweep.w_max; ++w) windows.push_back(w);
    auto cells = arc::window_sweep(ds, windows, cfg.sweep.kinds, require_split(cfg), pcfg);
    std::string path = out_path(cfg, "sweep.csv");
    std::ofstream out(path, std::ios::binary);
    out << "window_months,model,accuracy,f1,auc\n";
    for (const auto& c : cells) {
        out << c.window_months << ',' << arc::model_kind_name(c.kind) << ','
            << arc::csv::format_double(c.accuracy) << ',' << arc::csv::format_double(c.f1_late)
            << ',' << arc::csv::format_double(c.auc) << '\n';
    }
    std::cout << "wrote " << cells.size() << " cells to " << path << "\n";
    return 0;
}

int cmd_snapshots(const RunConfig& cfg) {
    arc::InvoiceDataset ds = load_input(cfg);
    arc::PipelineConfig pcfg = cfg.pipeline;
    pcfg.seed = cfg.seed;

    arc::YearMonth lo = arc::YearMonth::of(ds.invoices().front().creation_date);
    arc::YearMonth hi = lo;
    for (const auto& inv : ds.invoices()) {
        arc::YearMonth m = arc::YearMonth::of(inv.creation_date);
        if (m < lo) lo = m;
        if (hi < m) hi = m;
    }
    auto specs = arc::make_snapshots(lo, hi, cfg.snapshots.train_months, cfg.snapshots.val_months,
                                     cfg.snapshots.step_months, cfg.snapshots.count);
    auto reports = arc::snapshot_sweep(ds, specs, cfg.model_kind, pcfg);

    std::string path = out_path(cfg, "snapshots.csv");
    std::ofstream out(path, std::ios::binary);
    out << "set,train_start,train_end,val_start,val_end,test_start,test_end,"
           "train_ratio,val_ratio,test_ratio,baseline,accuracy,f1\n";
    for (const auto& r : reports) {
        out << r.label << ',' << r.spec.train_start.str() << ',' << r.spec.train_end.str() << ','
            << r.spec.val_start.str() << ',' << r.spec.val_end.str() << ','
            << r.spec.test_start.str() << ',' << r.spec.test_end.str() << ','
            << arc::csv::format_double(r.train_ratio) << ',' << arc::csv::format_double(r.val_ratio)
            << ',' << arc::csv::format_double(r.test_ratio) << ','
            << arc::csv::format_double(r.baseline_late_share) << ','
            << arc::csv::format_double(r.test_metrics.accuracy) << ','
            << arc::csv::format_double(r.test_metrics.f1_late) << '\n';
        write_monthly_csv(r.test_metrics.monthly, out_path(cfg, "monthly_" + r.label + ".csv"));
    }
    std::cout << "wrote " << reports.size() << " snapshots to " << path << "\n";
    return 0;
}

int cmd_plotdata(const RunConfig& cfg) {
    arc::InvoiceDataset ds = load_input(cfg);
    if (cfg.model_path.empty()) throw arc::ConfigError("plotdata needs model_path");
    if (!cfg.plot_from || !cfg.plot_to) throw arc::ConfigError("plotdata needs plotdata.from/to");
    arc::TrainedModel model = arc::load_model(cfg.model_path);

    arc::FeatureConfig fcfg;
    fcfg.window_months = model.meta.window_months;
    fcfg.grace.grace_days = model.meta.grace_days;
    fcfg.include_ratio_features = model.meta.include_ratio_features;

    struct Agg {
        size_t count = 0;
        double amount = 0.0;
    };
    std::map<std::pair<std::string, std::string>, Agg> by_day_label;
    for (const auto& inv : ds.invoices()) {
        if (arc::days_between(*cfg.plot_from, inv.due_date) < 0) continue;
        if (arc::days_between(inv.due_date, *cfg.plot_to) < 0) continue;
        arc::FeatureRow row = arc::extract_features(ds, inv, fcfg);
        row = arc::impute(std::move(row), model.meta.imputation);
        auto x = arc::feature_vector(row, fcfg.include_ratio_features);
        const char* label =
            model.classify(x, cfg.threshold) == arc::PaymentLabel::Late ? "late" : "ontime";
        Agg& a = by_day_label[{arc::format_date(inv.due_date), label}];
        a.count++;
        a.amount += inv.amount;
    }

    std::string path = out_path(cfg, "plotdata.csv");
    std::ofstream out(path, std::ios::binary);
    out << "date,invoice_count,total_amount,predicted_label\n";
    for (const auto& [key, a] : by_day_label) {
        out << key.first << ',' << a.count << ',' << arc::csv::format_double(a.amount) << ','
            << key.second << '\n';
    }
    std::cout << "wrote " << path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"invoice late-payment prediction pipeline"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, out_dir, input_csv, model_path, model_kind;
    std::uint64_t seed = 0;
    bool seed_set = false;
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--out", out_dir, "output directory (overrides config)");
    auto* seed_opt = app.add_option("--seed", seed, "master seed (overrides config)");
    app.add_option("--input", input_csv, "invoice CSV (overrides config)");
    app.add_option("--model-path", model_path, "model file (overrides config)");
    app.add_option("--model", model_kind, "model kind (overrides config)");

    std::map<std::string, int (*)(const RunConfig&)> commands = {
        {"generate", cmd_generate}, {"featurize", cmd_featurize}, {"train", cmd_train},
        {"evaluate", cmd_evaluate}, {"rank", cmd_rank},           {"sweep", cmd_sweep},
        {"snapshots", cmd_snapshots}, {"plotdata", cmd_plotdata},
    };
    for (const auto& [name, fn] : commands) app.add_subcommand(name);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    seed_set = seed_opt->count() > 0;
    try {
        RunConfig cfg = load_config(config_path);
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (!input_csv.empty()) cfg.input_csv = input_csv;
        if (!model_path.empty()) cfg.model_path = model_path;
        if (!model_kind.empty()) cfg.model_kind = arc::model_kind_from_name(model_kind);
        if (seed_set) cfg.seed = seed;
        for (const auto& [name, fn] : commands) {
            if (app.got_subcommand(name)) return fn(cfg);
        }
        return 2;
    } catch (const arc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
