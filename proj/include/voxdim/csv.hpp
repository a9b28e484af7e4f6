#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace voxdim::csv {

/// A parsed CSV file: the header row plus data rows, all fields as text.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of a header column, or nullopt.
    std::optional<std::size_t> column(std::string_view name) const;
};

/// Splits one CSV record. Double-quoted fields may contain commas and
/// doubled quotes; embedded newlines are not supported.
std::vector<std::string> split_line(std::string_view line);

/// Reads a CSV file. Blank lines are skipped; every row must have as many
/// fields as the header (parse_error otherwise, with the line number).
Table read_file(const std::filesystem::path& path);

/// Like read_file, but also requires the header to equal `expected` exactly.
Table read_file(const std::filesystem::path& path, const std::vector<std::string>& expected);

std::string escape(std::string_view field);
void write_row(std::ostream& out, const std::vector<std::string>& fields);

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);
std::string format_optional(const std::optional<double>& value);

/// Strict numeric parse ('.' decimal separator, no trailing junk).
std::optional<double> parse_double(std::string_view text);

}  // namespace voxdim::csv
