#include "arc/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "arc/csv.hpp"

namespace arc {

namespace {

bool invoice_order(const Invoice& a, const Invoice& b) {
    if (a.creation_date != b.creation_date) return a.creation_date < b.creation_date;
    return a.invoice_id < b.invoice_id;
}

std::optional<double> parse_amount(const std::string& s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

}  // namespace

InvoiceDataset::InvoiceDataset(std::vector<Invoice> invoices) : invoices_(std::move(invoices)) {
    std::sort(invoices_.begin(), invoices_.end(), invoice_order);
    for (size_t i = 0; i < invoices_.size(); ++i) {
        by_customer_[invoices_[i].customer_id].push_back(i);
    }
}

std::vector<Invoice> InvoiceDataset::history_before(const std::string& customer_id,
                                                    const Date& cutoff,
                                                    const Date& window_start) const {
    std::vector<Invoice> out;
    auto it = by_customer_.find(customer_id);
    if (it == by_customer_.end()) return out;
    using std::chrono::sys_days;
    for (size_t idx : it->second) {
        const Invoice& inv = invoices_[idx];
        if (sys_days(inv.creation_date) >= sys_days(cutoff)) break;  // chronological index
        if (sys_days(inv.creation_date) < sys_days(window_start)) continue;
        Invoice view = inv;
        if (view.payment_date && sys_days(*view.payment_date) >= sys_days(cutoff)) {
            view.payment_date.reset();  // not knowable at cutoff
        }
        out.push_back(std::move(view));
    }
    return out;
}

std::pair<InvoiceDataset, ValidationReport> parse_csv(const std::string& path, bool strict) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    return parse_csv_stream(in, strict);
}

std::pair<InvoiceDataset, ValidationReport> parse_csv_stream(std::istream& in, bool strict) {
    auto header = csv::read_record(in);
    const std::vector<std::string> expected = {"invoice_id",    "customer_id", "country",
                                               "amount",        "creation_date", "due_date",
                                               "payment_date"};
    if (!header || *header != expected) {
        throw std::runtime_error("missing or wrong invoice CSV header (want '" +
                                 std::string(kInvoiceCsvHeader) + "')");
    }

    ValidationReport report;
    std::vector<Invoice> accepted;
    std::unordered_set<std::string> seen_ids;

    auto reject = [&](size_t row, const std::string& reason) {
        if (strict) {
            throw std::runtime_error("row " + std::to_string(row) + ": " + reason);
        }
        report.rejected++;
        report.rejections.push_back({row, reason});
    };

    while (auto rec = csv::read_record(in)) {
        // a trailing bare newline yields one empty field
        if (rec->size() == 1 && (*rec)[0].empty()) continue;
        size_t row = ++report.row_count;
        if (rec->size() != expected.size()) {
            reject(row, "BAD_FIELD_COUNT");
            continue;
        }
        Invoice inv;
        inv.invoice_id = (*rec)[0];
        inv.customer_id = (*rec)[1];
        inv.country = (*rec)[2];
        if (inv.invoice_id.empty() || inv.customer_id.empty()) {
            reject(row, "MISSING_ID");
            continue;
        }
        auto amount = parse_amount((*rec)[3]);
        if (!amount) {
            reject(row, "BAD_AMOUNT");
            continue;
        }
        if (*amount <= 0.0) {
            reject(row, "NON_POSITIVE_AMOUNT");
            continue;
        }
        inv.amount = *amount;
        try {
            inv.creation_date = parse_date((*rec)[4]);
            inv.due_date = parse_date((*rec)[5]);
            if (!(*rec)[6].empty()) inv.payment_date = parse_date((*rec)[6]);
        } catch (const std::runtime_error&) {
            reject(row, "BAD_DATE");
            continue;
        }
        if (days_between(inv.creation_date, inv.due_date) < 0) {
            reject(row, "DUE_BEFORE_CREATION");
            continue;
        }
        if (inv.payment_date && days_between(inv.creation_date, *inv.payment_date) < 0) {
            reject(row, "PAYMENT_BEFORE_CREATION");
            continue;
        }
        if (!seen_ids.insert(inv.invoice_id).second) {
            reject(row, "DUPLICATE_ID");
            continue;
        }
        report.accepted++;
        accepted.push_back(std::move(inv));
    }
    return {InvoiceDataset(std::move(accepted)), std::move(report)};
}

void write_csv(const InvoiceDataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    write_csv_stream(ds, out);
}

void write_csv_stream(const InvoiceDataset& ds, std::ostream& out) {
    out << kInvoiceCsvHeader << '\n';
    for (const Invoice& inv : ds.invoices()) {
        csv::write_record(out, {inv.invoice_id, inv.customer_id, inv.country,
                                csv::format_double(inv.amount), format_date(inv.creation_date),
                                format_date(inv.due_date),
                                inv.payment_date ? format_date(*inv.payment_date) : ""});
    }
}

}  // namespace arc
