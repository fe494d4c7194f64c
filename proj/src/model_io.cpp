#include <fstream>
#include <sstream>

#include <json.hpp>

#include "arc/models.hpp"

namespace arc {

namespace {

using nlohmann::json;

constexpr int kSchemaVersion = 1;

json tree_to_json(const DecisionTree& t) {
    json nodes = json::array();
    for (const auto& n : t.nodes) {
        nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
    }
    return nodes;
}

DecisionTree tree_from_json(const json& j) {
    DecisionTree t;
    for (const auto& n : j) {
        DecisionTree::Node node;
        node.feature = n.at(0).get<int>();
        node.threshold = n.at(1).get<double>();
        node.left = n.at(2).get<int>();
        node.right = n.at(3).get<int>();
        node.value = n.at(4).get<double>();
        t.nodes.push_back(node);
    }
    if (t.nodes.empty()) throw std::runtime_error("model file: empty tree");
    return t;
}

json params_to_json(const TrainedModel& m);

json model_to_json_obj(const TrainedModel& m) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = model_kind_name(m.kind);
    j["feature_names"] = m.feature_names;
    if (m.standardization) {
        j["standardization"] = {{"mean", m.standardization->mean},
                                {"sd", m.standardization->sd}};
    } else {
        j["standardization"] = nullptr;
    }
    j["params"] = params_to_json(m);
    j["meta"] = {{"window_months", m.meta.window_months},
                 {"grace_days", m.meta.grace_days},
                 {"include_ratio_features", m.meta.include_ratio_features},
                 {"seed", m.meta.seed},
                 {"split", m.meta.split},
                 {"imputation",
                  {{"average_days_late", m.meta.imputation.average_days_late},
                   {"average_days_outstanding_late", m.meta.imputation.average_days_outstanding_late},
                   {"std_dev_invoices_late", m.meta.imputation.std_dev_invoices_late},
                   {"std_dev_outstanding_late", m.meta.imputation.std_dev_outstanding_late},
                   {"ratio_paid_late", m.meta.imputation.ratio_paid_late},
                   {"ratio_outstanding_late", m.meta.imputation.ratio_outstanding_late}}}};
    return j;
}

json params_to_json(const TrainedModel& m) {
    json p;
    switch (m.kind) {
        case ModelKind::NaiveBayes: {
            const auto& nb = std::get<NaiveBayesParams>(m.params);
            p = {{"log_prior_late", nb.log_prior_late},
                 {"log_prior_ontime", nb.log_prior_ontime},
                 {"mean_late", nb.mean_late},
                 {"var_late", nb.var_late},
                 {"mean_ontime", nb.mean_ontime},
                 {"var_ontime", nb.var_ontime}};
            break;
        }
        case ModelKind::LogisticRegression: {
            const auto& lp = std::get<LogisticParams>(m.params);
            p = {{"weights", lp.weights}, {"intercept", lp.intercept}};
            break;
        }
        case ModelKind::Knn: {
            const auto& kp = std::get<KnnParams>(m.params);
            p = {{"k", kp.k},
                 {"rows", kp.train_x.rows},
                 {"cols", kp.train_x.cols},
                 {"train_x", kp.train_x.data},
                 {"train_y", kp.train_y}};
            break;
        }
        case ModelKind::RandomForest: {
            const auto& fp = std::get<ForestParams>(m.params);
            json trees = json::array();
            for (const auto& t : fp.trees) trees.push_back(tree_to_json(t));
            p = {{"trees", trees}};
            break;
        }
        case ModelKind::Gbt: {
            const auto& gp = std::get<GbtParams>(m.params);
            json trees = json::array();
            for (const auto& t : gp.trees) trees.push_back(tree_to_json(t));
            p = {{"initial_score", gp.initial_score},
                 {"shrinkage", gp.shrinkage},
                 {"trees", trees}};
            break;
        }
        case ModelKind::Ensemble: {
            const auto& ep = std::get<EnsembleParams>(m.params);
            p = {{"components",
                  json::array({model_to_json_obj(*ep.first), model_to_json_obj(*ep.second)})}};
            break;
        }
    }
    return p;
}

TrainedModel model_from_json_obj(const json& j) {
    int version = j.at("schema_version").get<int>();
    if (version != kSchemaVersion) {
        throw std::runtime_error("unsupported model schema_version " + std::to_string(version));
    }
    TrainedModel m;
    m.kind = model_kind_from_name(j.at("kind").get<std::string>());
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    if (!j.at("standardization").is_null()) {
        StandardizationStats s;
        s.mean = j["standardization"].at("mean").get<std::vector<double>>();
        s.sd = j["standardization"].at("sd").get<std::vector<double>>();
        m.standardization = std::move(s);
    }
    const json& meta = j.at("meta");
    m.meta.window_months = meta.at("window_months").get<int>();
    m.meta.grace_days = meta.at("grace_days").get<int>();
    m.meta.include_ratio_features = meta.at("include_ratio_features").get<bool>();
    m.meta.seed = meta.at("seed").get<std::uint64_t>();
    m.meta.split = meta.at("split").get<std::string>();
    const json& imp = meta.at("imputation");
    m.meta.imputation.average_days_late = imp.at("average_days_late").get<double>();
    m.meta.imputation.average_days_outstanding_late =
        imp.at("average_days_outstanding_late").get<double>();
    m.meta.imputation.std_dev_invoices_late = imp.at("std_dev_invoices_late").get<double>();
    m.meta.imputation.std_dev_outstanding_late = imp.at("std_dev_outstanding_late").get<double>();
    m.meta.imputation.ratio_paid_late = imp.at("ratio_paid_late").get<double>();
    m.meta.imputation.ratio_outstanding_late = imp.at("ratio_outstanding_late").get<double>();

    const json& p = j.at("params");
    switch (m.kind) {
        case ModelKind::NaiveBayes: {
            NaiveBayesParams nb;
            nb.log_prior_late = p.at("log_prior_late").get<double>();
            nb.log_prior_ontime = p.at("log_prior_ontime").get<double>();
            nb.mean_late = p.at("mean_late").get<std::vector<double>>();
            nb.var_late = p.at("var_late").get<std::vector<double>>();
            nb.mean_ontime = p.at("mean_ontime").get<std::vector<double>>();
            nb.var_ontime = p.at("var_ontime").get<std::vector<double>>();
            m.params = std::move(nb);
            break;
        }
        case ModelKind::LogisticRegression: {
            LogisticParams lp;
            lp.weights = p.at("weights").get<std::vector<double>>();
            lp.intercept = p.at("intercept").get<double>();
            m.params = std::move(lp);
            break;
        }
        case ModelKind::Knn: {
            KnnParams kp;
            kp.k = p.at("k").get<int>();
            kp.train_x.rows = p.at("rows").get<size_t>();
            kp.train_x.cols = p.at("cols").get<size_t>();
            kp.train_x.data = p.at("train_x").get<std::vector<double>>();
            kp.train_y = p.at("train_y").get<std::vector<uint8_t>>();
            if (kp.train_x.data.size() != kp.train_x.rows * kp.train_x.cols ||
                kp.train_y.size() != kp.train_x.rows) {
                throw std::runtime_error("model file: inconsistent knn matrix shape");
            }
            m.params = std::move(kp);
            break;
        }
        case ModelKind::RandomForest: {
            ForestParams fp;
            for (const auto& t : p.at("trees")) fp.trees.push_back(tree_from_json(t));
            if (fp.trees.empty()) throw std::runtime_error("model file: forest has no trees");
            m.params = std::move(fp);
            break;
        }
        case ModelKind::Gbt: {
            GbtParams gp;
            gp.initial_score = p.at("initial_score").get<double>();
            gp.shrinkage = p.at("shrinkage").get<double>();
            for (const auto& t : p.at("trees")) gp.trees.push_back(tree_from_json(t));
            m.params = std::move(gp);
            break;
        }
        case ModelKind::Ensemble: {
            const json& comps = p.at("components");
            if (comps.size() != 2) throw std::runtime_error("model file: ensemble needs 2 components");
            EnsembleParams ep;
            ep.first = std::make_shared<TrainedModel>(model_from_json_obj(comps[0]));
            ep.second = std::make_shared<TrainedModel>(model_from_json_obj(comps[1]));
            m.params = std::move(ep);
            break;
        }
    }
    return m;
}

}  // namespace

std::string model_to_json(const TrainedModel& model) {
    return model_to_json_obj(model).dump();
}

TrainedModel model_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("model file is not valid JSON: ") + e.what());
    }
    return model_from_json_obj(j);
}

void save_model(const TrainedModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << model_to_json(model) << '\n';
}

TrainedModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return model_from_json(ss.str());
}

}  // namespace arc
