#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "arc/domain.hpp"

namespace arc {

struct ValidationIssue {
    size_t row = 0;  // 1-based data row number (header excluded)
    std::string reason;
};

struct ValidationReport {
    size_t row_count = 0;
    size_t accepted = 0;
    size_t rejected = 0;
    std::vector<ValidationIssue> rejections;
};

// Invoices sorted by (creation_date, invoice_id) with a per-customer
// chronological index. Immutable after construction.
class InvoiceDataset {
public:
    InvoiceDataset() = default;
    explicit InvoiceDataset(std::vector<Invoice> invoices);

    const std::vector<Invoice>& invoices() const { return invoices_; }
    size_t size() const { return invoices_.size(); }
    bool empty() const { return invoices_.empty(); }

    // The customer's invoices with window_start <= creation_date < cutoff,
    // truncated to what was knowable at the cutoff: a payment dated at or
    // after the cutoff is reported as absent. Unknown customers yield an
    // empty collection.
    std::vector<Invoice> history_before(const std::string& customer_id, const Date& cutoff,
                                        const Date& window_start) const;

private:
    std::vector<Invoice> invoices_;
    std::unordered_map<std::string, std::vector<size_t>> by_customer_;
};

inline constexpr const char* kInvoiceCsvHeader =
    "invoice_id,customer_id,country,amount,creation_date,due_date,payment_date";

// Rejects rows violating Invoice invariants and reports them. In strict
// mode the first invalid row throws instead.
std::pair<InvoiceDataset, ValidationReport> parse_csv(const std::string& path, bool strict);
std::pair<InvoiceDataset, ValidationReport> parse_csv_stream(std::istream& in, bool strict);

void write_csv(const InvoiceDataset& ds, const std::string& path);
void write_csv_stream(const InvoiceDataset& ds, std::ostream& out);

}  // namespace arc
