#include "jqf/prep.hpp"

#include <algorithm>
#include <sstream>

#include "jqf/csv.hpp"
#include "jqf/errors.hpp"
#include "jqf/text.hpp"

namespace jqf {

char to_char(Guideline g) {
    return static_cast<char>('A' + static_cast<int>(g));
}

Guideline guideline_for_field(int field_code) {
    switch (field_code) {
    case 11: case 13: case 24: case 27: case 28: case 29:
    case 30: case 32: case 34: case 35: case 36:
        return Guideline::A;
    case 15: case 16: case 17: case 18: case 19: case 21:
    case 22: case 23: case 25: case 26: case 31:
        return Guideline::B;
    case 14: case 20: case 33:
        return Guideline::C;
    case 12:
        return Guideline::D;
    default:
        throw InputError("guideline_for_field: field code " + std::to_string(field_code) +
                         " outside 11..36");
    }
}

const std::vector<std::string>& default_boilerplate_markers() {
    static const std::vector<std::string> markers = {
        "\xC2\xA9", // ©
        "Copyright ",
        "All rights reserved",
        "Published by ",
        "This article is protected by",
    };
    return markers;
}

std::vector<std::string> load_marker_list(const std::filesystem::path& path) {
    std::istringstream in(csv::read_file(path));
    std::vector<std::string> markers;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        markers.push_back(line);
    }
    if (markers.empty()) throw InputError("marker list " + path.string() + " is empty");
    return markers;
}

std::string clean_abstract(std::string_view raw) {
    return clean_abstract(raw, default_boilerplate_markers());
}

std::string clean_abstract(std::string_view raw, const std::vector<std::string>& markers) {
    std::string text(raw);
    for (;;) {
        if (text.empty()) break;

        std::size_t cut = std::string::npos;
        // a marker at the very start: the whole text is boilerplate
        for (const auto& marker : markers) {
            if (!marker.empty() && text.compare(0, marker.size(), marker) == 0) {
                cut = 0;
                break;
            }
        }
        if (cut == std::string::npos) {
            // otherwise only occurrences in the final 40% count
            std::size_t cp_len = utf8_length(text);
            std::size_t window_cp = (3 * cp_len + 4) / 5; // ceil(0.6 * len)
            std::size_t window_byte = utf8_byte_offset(text, window_cp);
            for (const auto& marker : markers) {
                if (marker.empty()) continue;
                std::size_t pos = text.find(marker, window_byte);
                if (pos != std::string::npos) cut = std::min(cut, pos);
            }
        }
        if (cut == std::string::npos) break;

        text.erase(cut);
        text.assign(rtrim(text));
    }
    return text;
}

bool qualifies(std::string_view clean_abstract) {
    return utf8_length(clean_abstract) > kQualifyingAbstractChars;
}

std::string build_prompt(std::string_view title, std::string_view clean_abstract) {
    std::string flat_title = collapse_newlines(title);
    if (trim(flat_title).empty()) {
        throw InputError("build_prompt: empty title (malformed record)");
    }
    std::string flat_abstract = collapse_newlines(clean_abstract);
    std::string prompt = std::move(flat_title);
    prompt += kPromptSeparator;
    prompt += flat_abstract;
    return prompt;
}

PreparedArticle prepare_article(const ArticleRecord& article, int field_code,
                                const PrepOptions& options) {
    PreparedArticle prepared;
    prepared.article_id = article.article_id;
    std::string cleaned = clean_abstract(article.raw_abstract, options.markers);
    prepared.clean_abstract_chars = utf8_length(cleaned);
    prepared.qualifies =
        options.qualify_on_raw ? qualifies(article.raw_abstract) : qualifies(cleaned);
    prepared.prompt_text = build_prompt(article.title, cleaned);
    prepared.guideline = guideline_for_field(field_code);
    return prepared;
}

GuidelineSet load_guidelines(const std::filesystem::path& dir) {
    GuidelineSet set;
    for (int i = 0; i < 4; ++i) {
        auto g = static_cast<Guideline>(i);
        std::filesystem::path file = dir / (std::string(1, to_char(g)) + ".txt");
        set.texts[static_cast<std::size_t>(i)] = csv::read_file(file);
        if (trim(set.texts[static_cast<std::size_t>(i)]).empty()) {
            throw InputError("guideline file " + file.string() + " is empty");
        }
    }
    return set;
}

} // namespace jqf
