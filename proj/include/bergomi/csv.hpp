#pragma once

// Minimal CSV support: shortest round-trip double formatting and a reader for
// the numeric files the tools exchange (header row, comma separated, no quoting).

#include <filesystem>
#include <string>
#include <vector>

namespace bergomi {

/// Shortest decimal text that parses back to exactly x.
std::string format_double(double x);
double parse_double(const std::string& text);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column index by name; throws UsageError when absent.
    std::size_t column(const std::string& name) const;
    bool has_column(const std::string& name) const;
};

CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::filesystem::path& path);
std::string to_csv(const CsvTable& table);

} // namespace bergomi
