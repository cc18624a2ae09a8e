#include "jqf/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

#include "jqf/csv.hpp"
#include "jqf/errors.hpp"
#include "jqf/text.hpp"

namespace jqf {

namespace {

using nlohmann::json;

constexpr std::string_view kFieldLabels[] = {
    "Multidisciplinary",                          // 10
    "Agricultural and Biological Sciences",       // 11
    "Arts and Humanities",                        // 12
    "Biochemistry, Genetics and Molecular Biology", // 13
    "Business, Management and Accounting",        // 14
    "Chemical Engineering",                       // 15
    "Chemistry",                                  // 16
    "Computer Science",                           // 17
    "Decision Sciences",                          // 18
    "Earth and Planetary Sciences",               // 19
    "Economics, Econometrics and Finance",        // 20
    "Energy",                                     // 21
    "Engineering",                                // 22
    "Environmental Science",                      // 23
    "Immunology and Microbiology",                // 24
    "Materials Science",                          // 25
    "Mathematics",                                // 26
    "Medicine",                                   // 27
    "Neuroscience",                               // 28
    "Nursing",                                    // 29
    "Pharmacology, Toxicology and Pharmaceutics", // 30
    "Physics and Astronomy",                      // 31
    "Psychology",                                 // 32
    "Social Sciences",                            // 33
    "Veterinary",                                 // 34
    "Dentistry",                                  // 35
    "Health Professions",                         // 36
};

[[noreturn]] void line_error(std::size_t line, const std::string& detail) {
    throw InputError("articles: line " + std::to_string(line) + ": " + detail);
}

std::string require_string(const json& obj, const char* key, std::size_t line) {
    auto it = obj.find(key);
    if (it == obj.end()) line_error(line, std::string(key) + ": missing");
    if (!it->is_string()) line_error(line, std::string(key) + ": not a string");
    return it->get<std::string>();
}

long long require_int(const json& obj, const char* key, std::size_t line) {
    auto it = obj.find(key);
    if (it == obj.end()) line_error(line, std::string(key) + ": missing");
    if (!it->is_number_integer()) line_error(line, std::string(key) + ": not an integer");
    return it->get<long long>();
}

} // namespace

std::string scopus_field_label(int code) {
    if (code >= kMultidisciplinaryField && code <= kMaxFieldCode) {
        return std::string(kFieldLabels[code - kMultidisciplinaryField]);
    }
    return "Field " + std::to_string(code);
}

std::string_view to_string(RankScheme scheme) {
    switch (scheme) {
    case RankScheme::FI: return "FI";
    case RankScheme::NO: return "NO";
    case RankScheme::PL: return "PL";
    }
    return "?";
}

std::optional<RankScheme> rank_scheme_from(std::string_view token) {
    std::string t = to_lower_ascii(token);
    if (t == "fi") return RankScheme::FI;
    if (t == "no") return RankScheme::NO;
    if (t == "pl") return RankScheme::PL;
    return std::nullopt;
}

bool rank_value_valid(RankScheme scheme, int value) {
    switch (scheme) {
    case RankScheme::FI: return value >= 0 && value <= 3;
    case RankScheme::NO: return value >= 0 && value <= 2;
    case RankScheme::PL:
        return value == 20 || value == 40 || value == 70 || value == 100 || value == 140 ||
               value == 200;
    }
    return false;
}

std::string JournalRecord::identity_key() const {
    // '#' cannot survive name normalization, so the separator is unambiguous
    std::string key = normalize_journal_name(canonical_name);
    key.push_back('#');
    for (std::size_t i = 0; i < issns.size(); ++i) {
        if (i) key.push_back(';');
        key += issns[i];
    }
    return key;
}

std::optional<int> JournalRecord::rank(RankScheme scheme) const {
    switch (scheme) {
    case RankScheme::FI: return rank_fi;
    case RankScheme::NO: return rank_no;
    case RankScheme::PL: return rank_pl;
    }
    return std::nullopt;
}

std::optional<std::string> normalize_issn(std::string_view text) {
    std::string out;
    out.reserve(8);
    for (char c : text) {
        if (c == '-' || c == ' ') continue;
        out.push_back(c);
    }
    if (out.size() != 8) return std::nullopt;
    for (char& c : out) {
        if (!std::isalnum(static_cast<unsigned char>(c))) return std::nullopt;
    }
    char& check = out.back();
    if (check >= 'a' && check <= 'z') check = static_cast<char>(check - 'a' + 'A');
    return out;
}

std::vector<ArticleRecord> parse_articles(const std::filesystem::path& path) {
    std::string content = csv::read_file(path);
    std::vector<ArticleRecord> records;
    std::unordered_set<std::string> seen_ids;

    std::istringstream in(content);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;

        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            line_error(line_no, std::string("invalid JSON (") + e.what() + ")");
        }
        if (!obj.is_object()) line_error(line_no, "record is not an object");

        ArticleRecord rec;
        rec.article_id = require_string(obj, "id", line_no);
        if (rec.article_id.empty()) line_error(line_no, "id: empty");
        if (!seen_ids.insert(rec.article_id).second) {
            line_error(line_no, "id: duplicate article id \"" + rec.article_id + "\"");
        }
        rec.journal_name = require_string(obj, "journal", line_no);
        if (trim(rec.journal_name).empty()) line_error(line_no, "journal: empty");

        auto issns_it = obj.find("issns");
        if (issns_it == obj.end() || !issns_it->is_array()) {
            line_error(line_no, "issns: missing or not an array");
        }
        for (const auto& raw : *issns_it) {
            if (!raw.is_string()) line_error(line_no, "issns: element not a string");
            if (auto canon = normalize_issn(raw.get<std::string>())) {
                rec.issns.push_back(*canon);
            }
            // malformed ISSNs are dropped; rejection is a value, not a failure
        }
        std::sort(rec.issns.begin(), rec.issns.end());
        rec.issns.erase(std::unique(rec.issns.begin(), rec.issns.end()), rec.issns.end());

        rec.year = static_cast<int>(require_int(obj, "year", line_no));

        auto fields_it = obj.find("fields");
        if (fields_it == obj.end() || !fields_it->is_array()) {
            line_error(line_no, "fields: missing or not an array");
        }
        if (fields_it->empty()) line_error(line_no, "fields: empty");
        for (const auto& f : *fields_it) {
            if (!f.is_number_integer()) line_error(line_no, "fields: element not an integer");
            int code = f.get<int>();
            if (code < kMultidisciplinaryField || code > kMaxFieldCode) {
                line_error(line_no, "fields: code " + std::to_string(code) + " out of range");
            }
            rec.field_codes.push_back(code);
        }
        std::sort(rec.field_codes.begin(), rec.field_codes.end());
        rec.field_codes.erase(std::unique(rec.field_codes.begin(), rec.field_codes.end()),
                              rec.field_codes.end());

        rec.title = require_string(obj, "title", line_no);
        rec.raw_abstract = require_string(obj, "abstract", line_no);
        rec.citation_count = require_int(obj, "citations", line_no);
        if (rec.citation_count < 0) line_error(line_no, "citations: negative citation count");

        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<RankEntry> parse_ranking_list(const std::filesystem::path& path, RankScheme scheme) {
    csv::Reader reader(csv::read_file(path));

    auto header = reader.next();
    if (!header) return {};
    std::vector<std::string> expected = {"scheme", "name", "issns", "value"};
    std::vector<std::string> lowered;
    for (const auto& h : *header) lowered.push_back(to_lower_ascii(trim(h)));
    if (lowered != expected) {
        throw InputError("ranking list " + path.string() +
                         ": expected header scheme,name,issns,value");
    }

    std::vector<RankEntry> entries;
    std::unordered_map<std::string, int> value_by_issn;
    while (auto row = reader.next()) {
        std::size_t line = reader.record_line();
        auto row_error = [&](const std::string& detail) -> void {
            throw InputError("ranking list " + path.string() + ": row at line " +
                             std::to_string(line) + ": " + detail);
        };
        if (row->size() != 4) row_error("expected 4 fields, got " + std::to_string(row->size()));

        auto row_scheme = rank_scheme_from(trim((*row)[0]));
        if (!row_scheme) row_error("unknown scheme \"" + (*row)[0] + "\"");
        if (*row_scheme != scheme) {
            row_error("scheme " + std::string(to_string(*row_scheme)) + " does not match requested " +
                      std::string(to_string(scheme)));
        }

        RankEntry entry;
        entry.scheme = scheme;
        std::string name(trim((*row)[1]));
        if (name.empty()) row_error("name: empty");
        entry.names.push_back(name);

        std::string issns_field = (*row)[2];
        std::size_t start = 0;
        while (start <= issns_field.size()) {
            std::size_t end = issns_field.find(';', start);
            std::string_view piece(issns_field.data() + start,
                                   (end == std::string::npos ? issns_field.size() : end) - start);
            piece = trim(piece);
            if (!piece.empty()) {
                if (auto canon = normalize_issn(piece)) entry.issns.push_back(*canon);
            }
            if (end == std::string::npos) break;
            start = end + 1;
        }
        std::sort(entry.issns.begin(), entry.issns.end());
        entry.issns.erase(std::unique(entry.issns.begin(), entry.issns.end()), entry.issns.end());

        std::string value_str(trim((*row)[3]));
        int value = 0;
        try {
            std::size_t used = 0;
            value = std::stoi(value_str, &used);
            if (used != value_str.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            row_error("value \"" + value_str + "\" is not an integer");
        }
        if (!rank_value_valid(scheme, value)) {
            row_error("value " + std::to_string(value) + " not in the " +
                      std::string(to_string(scheme)) + " scheme's set");
        }
        entry.value = value;

        for (const auto& issn : entry.issns) {
            auto [it, inserted] = value_by_issn.emplace(issn, value);
            if (!inserted && it->second != value) {
                row_error("ISSN " + issn + " already listed with value " +
                          std::to_string(it->second));
            }
        }
        entries.push_back(std::move(entry));
    }
    return entries;
}

namespace {

// union-find over article groups
struct DisjointSet {
    std::vector<std::size_t> parent;
    explicit DisjointSet(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), std::size_t{0});
    }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

struct RankIndex {
    std::unordered_map<std::string, std::vector<const RankEntry*>> by_issn;
    std::unordered_map<std::string, std::vector<const RankEntry*>> by_name;
};

std::optional<int> match_rank(const RankIndex& index, const JournalRecord& journal,
                              const std::set<std::string>& normalized_names, RankScheme scheme,
                              std::vector<std::string>& log) {
    std::set<const RankEntry*> candidates;
    for (const auto& issn : journal.issns) {
        auto it = index.by_issn.find(issn);
        if (it == index.by_issn.end()) continue;
        candidates.insert(it->second.begin(), it->second.end());
    }
    const char* method = "issn";
    if (candidates.empty()) {
        method = "name";
        for (const auto& name : normalized_names) {
            auto it = index.by_name.find(name);
            if (it == index.by_name.end()) continue;
            candidates.insert(it->second.begin(), it->second.end());
        }
    }
    if (candidates.empty()) return std::nullopt;

    std::set<int> values;
    for (const auto* entry : candidates) values.insert(entry->value);
    if (values.size() > 1) {
        std::string vals;
        for (int v : values) vals += (vals.empty() ? "" : "/") + std::to_string(v);
        log.push_back("conflict: journal \"" + journal.canonical_name + "\" matches " +
                      std::string(to_string(scheme)) + " entries with values " + vals +
                      "; rank voided");
        return std::nullopt;
    }
    log.push_back("match: journal \"" + journal.canonical_name + "\" " +
                  std::string(to_string(scheme)) + "=" + std::to_string(*values.begin()) +
                  " by " + method);
    return *values.begin();
}

} // namespace

MatchOutcome match_journals(const std::vector<ArticleRecord>& articles,
                            const std::vector<RankEntry>& ranks, int year) {
    MatchOutcome outcome;

    // group key = normalized name + sorted ISSN set
    struct Group {
        std::vector<const ArticleRecord*> articles;
        std::vector<std::string> issns;
    };
    std::map<std::string, Group> groups;
    for (const auto& article : articles) {
        if (article.year != year) continue;
        std::string key = normalize_journal_name(article.journal_name);
        key.push_back('#');
        for (std::size_t i = 0; i < article.issns.size(); ++i) {
            if (i) key.push_back(';');
            key += article.issns[i];
        }
        auto& group = groups[key];
        group.articles.push_back(&article);
        group.issns = article.issns;
    }

    std::vector<Group*> group_list;
    for (auto& [key, group] : groups) group_list.push_back(&group);

    // unify groups sharing any ISSN; names alone never unify
    DisjointSet ds(group_list.size());
    std::unordered_map<std::string, std::size_t> first_seen;
    for (std::size_t i = 0; i < group_list.size(); ++i) {
        for (const auto& issn : group_list[i]->issns) {
            auto [it, inserted] = first_seen.emplace(issn, i);
            if (!inserted) ds.unite(i, it->second);
        }
    }
    std::map<std::size_t, std::vector<const ArticleRecord*>> merged;
    for (std::size_t i = 0; i < group_list.size(); ++i) {
        auto& bucket = merged[ds.find(i)];
        bucket.insert(bucket.end(), group_list[i]->articles.begin(), group_list[i]->articles.end());
    }

    RankIndex index;
    for (const auto& entry : ranks) {
        for (const auto& issn : entry.issns) index.by_issn[issn].push_back(&entry);
        for (const auto& name : entry.names) {
            index.by_name[normalize_journal_name(name)].push_back(&entry);
        }
    }

    std::vector<JournalRecord> journals;
    std::vector<std::set<std::string>> journal_name_sets;
    for (auto& [root, members] : merged) {
        JournalRecord journal;

        // canonical name: most frequent raw name, ties to the lexicographically smallest
        std::map<std::string, int> name_counts;
        std::set<std::string> issn_set;
        std::set<int> field_codes;
        std::set<std::string> normalized_names;
        for (const auto* article : members) {
            ++name_counts[article->journal_name];
            issn_set.insert(article->issns.begin(), article->issns.end());
            field_codes.insert(article->field_codes.begin(), article->field_codes.end());
            normalized_names.insert(normalize_journal_name(article->journal_name));
        }
        int best = 0;
        for (const auto& [name, count] : name_counts) {
            if (count > best) {
                best = count;
                journal.canonical_name = name;
            }
        }
        journal.issns.assign(issn_set.begin(), issn_set.end());

        if (field_codes.count(kMultidisciplinaryField)) {
            outcome.log.push_back("excluded: journal \"" + journal.canonical_name +
                                  "\" classified as Multidisciplinary");
            continue;
        }
        if (field_codes.size() > 1) {
            std::string codes;
            for (int c : field_codes) codes += (codes.empty() ? "" : ",") + std::to_string(c);
            outcome.log.push_back("excluded: journal \"" + journal.canonical_name +
                                  "\" spans fields {" + codes + "}");
            continue;
        }
        journal.field_code = *field_codes.begin();

        for (const auto* article : members) journal.articles.push_back(*article);
        std::sort(journal.articles.begin(), journal.articles.end(),
                  [](const ArticleRecord& a, const ArticleRecord& b) {
                      return a.article_id < b.article_id;
                  });

        journal.rank_fi = match_rank(index, journal, normalized_names, RankScheme::FI, outcome.log);
        journal.rank_no = match_rank(index, journal, normalized_names, RankScheme::NO, outcome.log);
        journal.rank_pl = match_rank(index, journal, normalized_names, RankScheme::PL, outcome.log);

        journals.push_back(std::move(journal));
        journal_name_sets.push_back(std::move(normalized_names));
    }

    // report name collisions across distinct journals (kept separate)
    std::map<std::string, int> collision_counts;
    for (const auto& names : journal_name_sets) {
        for (const auto& name : names) ++collision_counts[name];
    }
    for (const auto& [name, count] : collision_counts) {
        if (count > 1) {
            outcome.log.push_back("name collision: \"" + name + "\" shared by " +
                                  std::to_string(count) + " distinct journals; kept separate");
        }
    }

    std::sort(journals.begin(), journals.end(), [](const JournalRecord& a, const JournalRecord& b) {
        if (a.canonical_name != b.canonical_name) return a.canonical_name < b.canonical_name;
        return a.issns < b.issns;
    });
    outcome.journals = std::move(journals);
    return outcome;
}

} // namespace jqf
