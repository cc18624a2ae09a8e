#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace jqf {

/// Scopus broad-field codes. 10 is Multidisciplinary; journals carrying it
/// are excluded during matching, so downstream modules only ever see 11..36.
inline constexpr int kMultidisciplinaryField = 10;
inline constexpr int kMinFieldCode = 11;
inline constexpr int kMaxFieldCode = 36;

/// Human-readable label for a broad-field code ("Field <n>" when unknown).
std::string scopus_field_label(int code);

/// One publication from the article dump.
struct ArticleRecord {
    std::string article_id;
    std::string journal_name;
    std::vector<std::string> issns; // canonical 8-char form
    int year = 0;
    std::vector<int> field_codes; // 10 (multidisciplinary) or 11..36
    std::string title;
    std::string raw_abstract;
    long long citation_count = 0;
};

enum class RankScheme { FI, NO, PL };

std::string_view to_string(RankScheme scheme);
std::optional<RankScheme> rank_scheme_from(std::string_view token);
bool rank_value_valid(RankScheme scheme, int value);

/// One row of a national ranking list.
struct RankEntry {
    RankScheme scheme = RankScheme::FI;
    std::vector<std::string> names;
    std::vector<std::string> issns; // canonical
    int value = 0;
};

/// A merged journal entity: monodisciplinary, with up to one rank per scheme.
/// An absent rank means "not listed", which is distinct from rank value 0.
struct JournalRecord {
    std::string canonical_name;
    std::vector<std::string> issns; // sorted, unique, canonical
    int field_code = 0;             // 11..36
    std::vector<ArticleRecord> articles;
    std::optional<int> rank_fi;
    std::optional<int> rank_no;
    std::optional<int> rank_pl;

    /// Stable identity string (normalized name + sorted ISSNs); keys the
    /// per-journal sampling substream and all report rows.
    std::string identity_key() const;

    std::optional<int> rank(RankScheme scheme) const;
};

/// Parses the line-delimited article dump (one JSON object per line, keys:
/// id, journal, issns, year, fields, title, abstract, citations).
/// Throws InputError naming the line and field for malformed records.
std::vector<ArticleRecord> parse_articles(const std::filesystem::path& path);

/// Canonical ISSN: hyphens/spaces stripped, check character upper-cased.
/// Returns nullopt for anything that is not 8 alphanumerics after stripping.
std::optional<std::string> normalize_issn(std::string_view text);

/// Parses a ranking CSV (header scheme,name,issns,value; issns separated by
/// semicolons). Every row must carry the requested scheme and a value from
/// that scheme's set. Malformed ISSNs are dropped from the row, not fatal.
std::vector<RankEntry> parse_ranking_list(const std::filesystem::path& path, RankScheme scheme);

struct MatchOutcome {
    std::vector<JournalRecord> journals; // sorted by canonical name, then ISSNs
    std::vector<std::string> log;        // match methods, conflicts, exclusions
};

/// Groups `year` articles into journals, drops multi-field and
/// multidisciplinary journals, and attaches national ranks (ISSN match first,
/// then normalized-name match). Conflicting rank values for one scheme void
/// that scheme's rank for the journal.
MatchOutcome match_journals(const std::vector<ArticleRecord>& articles,
                            const std::vector<RankEntry>& ranks, int year);

} // namespace jqf
