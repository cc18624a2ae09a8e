#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace jqf::csv {

/// Minimal RFC-4180 reader: comma-separated, double-quote quoting, quoted
/// fields may contain commas, quotes ("") and newlines.
class Reader {
public:
    explicit Reader(std::string content);

    /// Next record, or nullopt at end of input. Empty lines are skipped.
    std::optional<std::vector<std::string>> next();

    /// 1-based line number where the last returned record started.
    std::size_t record_line() const { return record_line_; }

private:
    std::string content_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t record_line_ = 0;
};

std::string escape(std::string_view field);
std::string join(const std::vector<std::string>& fields);

/// Shortest round-trip decimal form (std::to_chars); keeps CSV output
/// byte-stable across runs.
std::string format_double(double value);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

} // namespace jqf::csv
