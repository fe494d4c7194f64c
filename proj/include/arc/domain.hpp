#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "arc/date.hpp"

namespace arc {

// Configuration / usage problems. The CLI maps these to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Labeling requested for an invoice whose outcome is not observable yet.
struct CensoredError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Invoice {
    std::string invoice_id;
    std::string customer_id;
    std::string country;  // may be empty
    double amount = 0.0;  // base amount, > 0
    Date creation_date{};
    Date due_date{};
    std::optional<Date> payment_date;  // absent = outstanding

    bool paid() const { return payment_date.has_value(); }
};

enum class PaymentLabel { OnTime, Late };

struct GracePolicy {
    int grace_days = 5;
};

// OnTime iff payment_date <= due_date + grace_days. Throws CensoredError
// when the invoice has no payment date.
PaymentLabel label_invoice(const Invoice& inv, GracePolicy policy);

// payment_date - due_date for paid invoices (negative = early), otherwise
// as_of - due_date.
int days_late(const Invoice& inv, const Date& as_of);

}  // namespace arc
