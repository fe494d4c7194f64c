#include "arc/split.hpp"

namespace arc {

void SplitSpec::validate() const {
    auto range_ok = [](YearMonth a, YearMonth b) { return a <= b; };
    if (!range_ok(train_start, train_end) || !range_ok(val_start, val_end) ||
        !range_ok(test_start, test_end)) {
        throw ConfigError("split spec: empty month range");
    }
    if (!(train_end < val_start)) {
        throw ConfigError("split spec: training overlaps validation");
    }
    if (!(val_end < test_start)) {
        throw ConfigError("split spec: validation overlaps test");
    }
}

SplitResult split_rows(const std::vector<FeatureRow>& rows, const SplitSpec& spec) {
    spec.validate();
    SplitResult out;
    for (const FeatureRow& r : rows) {
        if (r.label == RowLabel::Censored) continue;
        YearMonth m = YearMonth::of(r.creation_date);
        if (spec.train_start <= m && m <= spec.train_end) {
            out.train.push_back(r);
        } else if (spec.val_start <= m && m <= spec.val_end) {
            out.validation.push_back(r);
        } else if (spec.test_start <= m && m <= spec.test_end) {
            out.test.push_back(r);
        }
    }
    if (out.train.empty()) throw std::runtime_error("split: empty train partition");
    if (out.validation.empty()) throw std::runtime_error("split: empty validation partition");
    if (out.test.empty()) throw std::runtime_error("split: empty test partition");
    return out;
}

std::vector<SplitSpec> make_snapshots(YearMonth data_start, YearMonth data_end, int train_months,
                                      const std::vector<int>& val_months_per_snapshot,
                                      int step_months) {
    if (train_months < 1 || step_months < 1 || val_months_per_snapshot.empty()) {
        throw ConfigError("make_snapshots: non-positive span");
    }
    std::vector<SplitSpec> specs;
    for (size_t k = 0; k < val_months_per_snapshot.size(); ++k) {
        int vm = val_months_per_snapshot[k];
        if (vm < 1) throw ConfigError("make_snapshots: non-positive validation span");
        SplitSpec s;
        s.train_start = data_start.plus_months(int(k) * step_months);
        s.train_end = s.train_start.plus_months(train_months - 1);
        s.val_start = s.train_end.plus_months(1);
        s.val_end = s.val_start.plus_months(vm - 1);
        s.test_start = s.val_end.plus_months(1);
        s.test_end = data_end;
        if (data_end < s.test_start) {
            throw ConfigError("make_snapshots: horizon too short for snapshot " +
                              std::to_string(k + 1));
        }
        s.validate();
        specs.push_back(s);
    }
    return specs;
}

std::vector<SplitSpec> make_snapshots(YearMonth data_start, YearMonth data_end, int train_months,
                                      int val_months, int step_months, int count) {
    if (count < 1) throw ConfigError("make_snapshots: count must be >= 1");
    return make_snapshots(data_start, data_end, train_months,
                          std::vector<int>(size_t(count), val_months), step_months);
}

}  // namespace arc
