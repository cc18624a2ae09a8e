#include "jqf/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <utility>

#include "jqf/errors.hpp"

namespace jqf::csv {

Reader::Reader(std::string content) : content_(std::move(content)) {}

std::optional<std::vector<std::string>> Reader::next() {
    // skip blank lines
    while (pos_ < content_.size() && (content_[pos_] == '\n' || content_[pos_] == '\r')) {
        if (content_[pos_] == '\n') ++line_;
        ++pos_;
    }
    if (pos_ >= content_.size()) return std::nullopt;

    record_line_ = line_;
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    while (pos_ < content_.size()) {
        char c = content_[pos_];
        if (quoted) {
            if (c == '"') {
                if (pos_ + 1 < content_.size() && content_[pos_ + 1] == '"') {
                    field.push_back('"');
                    pos_ += 2;
                } else {
                    quoted = false;
                    ++pos_;
                }
            } else {
                if (c == '\n') ++line_;
                field.push_back(c);
                ++pos_;
            }
            continue;
        }
        if (c == '"' && field.empty()) {
            quoted = true;
            ++pos_;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
            ++pos_;
        } else if (c == '\r' || c == '\n') {
            if (c == '\r' && pos_ + 1 < content_.size() && content_[pos_ + 1] == '\n') ++pos_;
            ++pos_;
            ++line_;
            break;
        } else {
            field.push_back(c);
            ++pos_;
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

std::string escape(std::string_view field) {
    bool needs_quotes = field.find_first_of(",\"\r\n") != std::string_view::npos;
    if (!needs_quotes) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string join(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out.push_back(',');
        out += escape(fields[i]);
    }
    return out;
}

std::string format_double(double value) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc{}) throw std::runtime_error("format_double failed");
    return std::string(buf, end);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write file: " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw InputError("write failed: " + path.string());
}

} // namespace jqf::csv
