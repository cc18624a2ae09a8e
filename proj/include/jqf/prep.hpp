#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "jqf/corpus.hpp"

namespace jqf {

/// REF panel criteria variants used as system prompts.
enum class Guideline { A, B, C, D };

char to_char(Guideline g);

/// Routes a Scopus broad-field code to its guideline variant:
///   A: 11, 13, 24, 27, 28, 29, 30, 32, 34, 35, 36
///   B: 15, 16, 17, 18, 19, 21, 22, 23, 25, 26, 31
///   C: 14, 20, 33
///   D: 12
/// Throws InputError for codes outside 11..36.
Guideline guideline_for_field(int field_code);

/// An article qualifies when its abstract is strictly longer than this many
/// characters (Unicode scalar values, whitespace included).
inline constexpr std::size_t kQualifyingAbstractChars = 785;

inline constexpr std::string_view kPromptSeparator = "\nAbstract\n";

const std::vector<std::string>& default_boilerplate_markers();

/// Loads a marker list (plain text, one marker per line, blank lines ignored).
std::vector<std::string> load_marker_list(const std::filesystem::path& path);

/// Strips trailing publisher boilerplate: the suffix starting at the first
/// marker occurrence in the final 40% of the text (repeatedly, to a fixed
/// point). A marker at position 0 marks the whole text as boilerplate. A
/// mid-text marker outside that window never truncates.
std::string clean_abstract(std::string_view raw);
std::string clean_abstract(std::string_view raw, const std::vector<std::string>& markers);

/// True iff the (cleaned) abstract is strictly longer than 785 characters.
bool qualifies(std::string_view clean_abstract);

/// title + "\nAbstract\n" + abstract, with internal newlines collapsed to
/// single spaces first. Throws InputError for an empty title.
std::string build_prompt(std::string_view title, std::string_view clean_abstract);

struct PreparedArticle {
    std::string article_id;
    std::string prompt_text;
    std::size_t clean_abstract_chars = 0;
    bool qualifies = false;
    Guideline guideline = Guideline::A;
};

struct PrepOptions {
    std::vector<std::string> markers = default_boilerplate_markers();
    bool qualify_on_raw = false; // measure the length threshold on the raw abstract
};

PreparedArticle prepare_article(const ArticleRecord& article, int field_code,
                                const PrepOptions& options = {});

/// The four operator-supplied guideline prompt texts, loaded from
/// <dir>/A.txt .. <dir>/D.txt.
struct GuidelineSet {
    std::array<std::string, 4> texts;
    const std::string& text_for(Guideline g) const {
        return texts[static_cast<std::size_t>(g)];
    }
};

GuidelineSet load_guidelines(const std::filesystem::path& dir);

} // namespace jqf
