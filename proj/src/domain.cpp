#include "arc/domain.hpp"

namespace arc {

PaymentLabel label_invoice(const Invoice& inv, GracePolicy policy) {
    if (!inv.payment_date) {
        throw CensoredError("invoice '" + inv.invoice_id + "' has no payment date");
    }
    int late = days_between(inv.due_date, *inv.payment_date);
    return late <= policy.grace_days ? PaymentLabel::OnTime : PaymentLabel::Late;
}

int days_late(const Invoice& inv, const Date& as_of) {
    const Date& ref = inv.payment_date ? *inv.payment_date : as_of;
    return days_between(inv.due_date, ref);
}

}  // namespace arc
