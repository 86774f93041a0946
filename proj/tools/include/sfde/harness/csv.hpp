// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace sfde::harness {

/// RFC 4180 style writer: comma separated, fields quoted when needed,
/// doubles in shortest round-trip form with '.' as decimal point.
class CsvWriter {
public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}

    void header(const std::vector<std::string>& columns);

    CsvWriter& cell(std::string_view v);
    CsvWriter& cell(double v);
    CsvWriter& cell(std::uint64_t v);
    void end_row();

    std::size_t columns() const noexcept { return columns_; }

private:
    void separator();

    std::ostream& out_;
    std::size_t columns_ = 0;
    std::size_t in_row_ = 0;
};

std::string csv_escape(std::string_view v);

}  // namespace sfde::harness
