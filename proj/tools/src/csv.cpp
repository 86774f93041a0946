// SPDX-License-Identifier: Apache-2.0
#include "sfde/harness/csv.hpp"

#include <stdexcept>

#include "sfde/harness/config.hpp"

namespace sfde::harness {

std::string csv_escape(std::string_view v) {
    if (v.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(v);
    std::string out = "\"";
    for (char c : v) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

void CsvWriter::header(const std::vector<std::string>& columns) {
    if (columns_ != 0) throw std::logic_error("csv header written twice");
    columns_ = columns.size();
    for (const auto& c : columns) cell(c);
    end_row();
}

void CsvWriter::separator() {
    if (in_row_++ > 0) out_ << ',';
}

CsvWriter& CsvWriter::cell(std::string_view v) {
    separator();
    out_ << csv_escape(v);
    return *this;
}

CsvWriter& CsvWriter::cell(double v) {
    separator();
    out_ << format_double(v);
    return *this;
}

CsvWriter& CsvWriter::cell(std::uint64_t v) {
    separator();
    out_ << v;
    return *this;
}

void CsvWriter::end_row() {
    if (columns_ != 0 && in_row_ != columns_) throw std::logic_error("csv row has the wrong number of cells");
    out_ << '\n';
    in_row_ = 0;
}

}  // namespace sfde::harness
