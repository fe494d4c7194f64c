#pragma once

#include <string>
#include <vector>

#include "arc/features.hpp"

namespace arc {

// Inclusive month ranges; train < validation < test with no overlap.
struct SplitSpec {
    YearMonth train_start, train_end;
    YearMonth val_start, val_end;
    YearMonth test_start, test_end;

    void validate() const;  // throws ConfigError on overlap or empty range
};

struct SplitResult {
    std::vector<FeatureRow> train;
    std::vector<FeatureRow> validation;
    std::vector<FeatureRow> test;
};

// Assigns labeled rows by creation month; censored rows and rows outside
// all ranges are dropped. Throws if any partition ends up empty.
SplitResult split_rows(const std::vector<FeatureRow>& rows, const SplitSpec& spec);

// Rolling snapshots: snapshot k trains on [data_start + k*step, +train_months),
// validates on the following months, tests on everything left through
// data_end. Validation spans may be given per snapshot.
std::vector<SplitSpec> make_snapshots(YearMonth data_start, YearMonth data_end, int train_months,
                                      const std::vector<int>& val_months_per_snapshot,
                                      int step_months);
std::vector<SplitSpec> make_snapshots(YearMonth data_start, YearMonth data_end,
                                      int train_months = 6, int val_months = 4,
                                      int step_months = 3, int count = 5);

}  // namespace arc
