#include "jqf/text.hpp"

#include <cctype>

namespace jqf {

namespace {

bool is_continuation_byte(unsigned char b) { return (b & 0xC0) == 0x80; }

} // namespace

std::size_t utf8_length(std::string_view s) {
    std::size_t n = 0;
    for (unsigned char b : s) {
        if (!is_continuation_byte(b)) ++n;
    }
    return n;
}

std::size_t utf8_byte_offset(std::string_view s, std::size_t cp_index) {
    std::size_t seen = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!is_continuation_byte(static_cast<unsigned char>(s[i]))) {
            if (seen == cp_index) return i;
            ++seen;
        }
    }
    return s.size();
}

std::string collapse_newlines(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\r') {
            out.push_back(' ');
            if (i + 1 < s.size() && s[i + 1] == '\n') ++i;
        } else if (s[i] == '\n') {
            out.push_back(' ');
        } else {
            out.push_back(s[i]);
        }
    }
    return out;
}

std::string_view trim(std::string_view s) {
    std::size_t b = 0;
    while (b < s.size() && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    std::size_t e = s.size();
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string_view rtrim(std::string_view s) {
    std::size_t e = s.size();
    while (e > 0 && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(0, e);
}

std::string to_lower_ascii(std::string_view s) {
    std::string out(s);
    for (char& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

std::string normalize_journal_name(std::string_view name) {
    std::string out;
    out.reserve(name.size());
    bool pending_space = false;
    for (char raw : name) {
        unsigned char b = static_cast<unsigned char>(raw);
        char c = raw;
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        if (b < 0x80 && std::ispunct(b)) continue;
        if (b < 0x80 && std::isspace(b)) {
            pending_space = true;
            continue;
        }
        if (pending_space && !out.empty()) out.push_back(' ');
        pending_space = false;
        out.push_back(c);
    }
    if (out.rfind("the ", 0) == 0) out.erase(0, 4);
    return out;
}

} // namespace jqf
