#include "arc/csv.hpp"

#include <charconv>

namespace arc::csv {

std::optional<std::vector<std::string>> read_record(std::istream& in) {
    std::vector<std::string> fields;
    std::string field;
    bool in_quotes = false;
    bool saw_any = false;

    int c;
    while ((c = in.get()) != std::istream::traits_type::eof()) {
        saw_any = true;
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get();
                    field += '"';
                } else {
                    in_quotes = false;
                }
            } else {
                field += char(c);
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c == '\r') {
            // swallow; the following '\n' ends the record
        } else if (c == '\n') {
            fields.push_back(std::move(field));
            return fields;
        } else {
            field += char(c);
        }
    }
    if (!saw_any) return std::nullopt;
    fields.push_back(std::move(field));
    return fields;
}

std::string quote(const std::string& field) {
    bool needs = field.find_first_of(",\"\r\n") != std::string::npos;
    if (!needs) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void write_record(std::ostream& out, const std::vector<std::string>& fields) {
    for (size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        out << quote(fields[i]);
    }
    out << '\n';
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

}  // namespace arc::csv
