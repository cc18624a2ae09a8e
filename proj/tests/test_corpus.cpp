#include "jqf/corpus.hpp"

#include <algorithm>
#include <set>

#include "doctest.h"

#include "jqf/csv.hpp"
#include "jqf/errors.hpp"
#include "jqf/rng.hpp"
#include "support/tempdir.hpp"

using namespace jqf;

namespace {

std::string article_line(const std::string& id, const std::string& journal,
                         const std::vector<std::string>& issns, int year,
                         const std::vector<int>& fields, long long citations,
                         const std::string& title = "Some title",
                         const std::string& abstract = "Some abstract") {
    std::string issn_json, field_json;
    for (const auto& i : issns) issn_json += (issn_json.empty() ? "" : ",") + ("\"" + i + "\"");
    for (int f : fields) field_json += (field_json.empty() ? "" : ",") + std::to_string(f);
    return "{\"id\":\"" + id + "\",\"journal\":\"" + journal + "\",\"issns\":[" + issn_json +
           "],\"year\":" + std::to_string(year) + ",\"fields\":[" + field_json +
           "],\"title\":\"" + title + "\",\"abstract\":\"" + abstract +
           "\",\"citations\":" + std::to_string(citations) + "}";
}

ArticleRecord make_article(const std::string& id, const std::string& journal,
                           std::vector<std::string> issns, std::vector<int> fields,
                           int year = 2021, long long citations = 5) {
    ArticleRecord a;
    a.article_id = id;
    a.journal_name = journal;
    a.issns = std::move(issns);
    a.year = year;
    a.field_codes = std::move(fields);
    a.title = "Title " + id;
    a.raw_abstract = "Abstract " + id;
    a.citation_count = citations;
    return a;
}

RankEntry make_rank(RankScheme scheme, std::vector<std::string> names,
                    std::vector<std::string> issns, int value) {
    RankEntry e;
    e.scheme = scheme;
    e.names = std::move(names);
    e.issns = std::move(issns);
    e.value = value;
    return e;
}

} // namespace

TEST_SUITE("normalize_issn") {
    TEST_CASE("strips separators") { CHECK(normalize_issn("1234-5679") == "12345679"); }
    TEST_CASE("uppercases the check character") {
        CHECK(normalize_issn("0028-083x") == "0028083X");
    }
    TEST_CASE("accepts spaces") { CHECK(normalize_issn("0028 083X") == "0028083X"); }
    TEST_CASE("rejects wrong lengths") {
        CHECK_FALSE(normalize_issn("12-34").has_value());
        CHECK_FALSE(normalize_issn("123456789").has_value());
        CHECK_FALSE(normalize_issn("").has_value());
    }
    TEST_CASE("rejects non-alphanumerics") {
        CHECK_FALSE(normalize_issn("1234_5678").has_value());
        CHECK_FALSE(normalize_issn("1234.5678").has_value());
    }
}

TEST_SUITE("parse_articles") {
    TEST_CASE("empty file gives an empty list") {
        test::TempDir tmp;
        csv::write_file(tmp.file("articles.jsonl"), "");
        CHECK(parse_articles(tmp.file("articles.jsonl")).empty());
    }

    TEST_CASE("three-line fixture round-trips field by field") {
        test::TempDir tmp;
        std::string dump = article_line("a1", "Acta One", {"1234-5679"}, 2021, {27}, 3,
                                        "First title", "First abstract") + "\n" +
                           article_line("a2", "Acta Two", {"0028-083x", "1111-2229"}, 2020, {11, 12},
                                        0, "Second title", "Second abstract") + "\n" +
                           article_line("a3", "Acta Three", {}, 2021, {36}, 250) + "\n";
        csv::write_file(tmp.file("articles.jsonl"), dump);
        auto records = parse_articles(tmp.file("articles.jsonl"));
        REQUIRE(records.size() == 3);

        CHECK(records[0].article_id == "a1");
        CHECK(records[0].journal_name == "Acta One");
        CHECK(records[0].issns == std::vector<std::string>{"12345679"});
        CHECK(records[0].year == 2021);
        CHECK(records[0].field_codes == std::vector<int>{27});
        CHECK(records[0].title == "First title");
        CHECK(records[0].raw_abstract == "First abstract");
        CHECK(records[0].citation_count == 3);

        CHECK(records[1].issns == std::vector<std::string>{"0028083X", "11112229"});
        CHECK(records[1].field_codes == std::vector<int>{11, 12});
        CHECK(records[1].citation_count == 0);

        CHECK(records[2].issns.empty());
        CHECK(records[2].citation_count == 250);
    }

    TEST_CASE("negative citation count names the line") {
        test::TempDir tmp;
        std::string dump = article_line("a1", "J", {}, 2021, {27}, 1) + "\n" +
                           article_line("a2", "J", {}, 2021, {27}, -1) + "\n";
        csv::write_file(tmp.file("articles.jsonl"), dump);
        CHECK_THROWS_WITH_AS(parse_articles(tmp.file("articles.jsonl")),
                             "articles: line 2: citations: negative citation count", InputError);
    }

    TEST_CASE("duplicate ids are rejected") {
        test::TempDir tmp;
        std::string dump = article_line("dup", "J", {}, 2021, {27}, 1) + "\n" +
                           article_line("dup", "J", {}, 2021, {27}, 2) + "\n";
        csv::write_file(tmp.file("articles.jsonl"), dump);
        CHECK_THROWS_AS(parse_articles(tmp.file("articles.jsonl")), InputError);
    }

    TEST_CASE("malformed JSON and bad fields name the line") {
        test::TempDir tmp;
        csv::write_file(tmp.file("bad.jsonl"), "{not json\n");
        CHECK_THROWS_AS(parse_articles(tmp.file("bad.jsonl")), InputError);

        csv::write_file(tmp.file("badfield.jsonl"),
                        article_line("a", "J", {}, 2021, {42}, 1) + "\n");
        CHECK_THROWS_AS(parse_articles(tmp.file("badfield.jsonl")), InputError);

        csv::write_file(tmp.file("nofields.jsonl"),
                        "{\"id\":\"a\",\"journal\":\"J\",\"issns\":[],\"year\":2021,"
                        "\"fields\":[],\"title\":\"t\",\"abstract\":\"x\",\"citations\":1}\n");
        CHECK_THROWS_AS(parse_articles(tmp.file("nofields.jsonl")), InputError);
    }

    TEST_CASE("multidisciplinary code 10 is accepted at parse time") {
        test::TempDir tmp;
        csv::write_file(tmp.file("articles.jsonl"),
                        article_line("a", "J", {}, 2021, {10}, 1) + "\n");
        auto records = parse_articles(tmp.file("articles.jsonl"));
        REQUIRE(records.size() == 1);
        CHECK(records[0].field_codes == std::vector<int>{10});
    }

    TEST_CASE("unreadable file is an IO error") {
        CHECK_THROWS_AS(parse_articles("/nonexistent/path/articles.jsonl"), InputError);
    }
}

TEST_SUITE("parse_ranking_list") {
    TEST_CASE("FI row with value 3") {
        test::TempDir tmp;
        csv::write_file(tmp.file("fi.csv"),
                        "scheme,name,issns,value\nFI,Acta Metallurgica,1234-5679,3\n");
        auto entries = parse_ranking_list(tmp.file("fi.csv"), RankScheme::FI);
        REQUIRE(entries.size() == 1);
        CHECK(entries[0].scheme == RankScheme::FI);
        CHECK(entries[0].value == 3);
        CHECK(entries[0].names == std::vector<std::string>{"Acta Metallurgica"});
        CHECK(entries[0].issns == std::vector<std::string>{"12345679"});
    }

    TEST_CASE("PL value outside the point set is an error") {
        test::TempDir tmp;
        csv::write_file(tmp.file("pl.csv"), "scheme,name,issns,value\nPL,Some Journal,,150\n");
        CHECK_THROWS_AS(parse_ranking_list(tmp.file("pl.csv"), RankScheme::PL), InputError);
    }

    TEST_CASE("scheme value sets") {
        test::TempDir tmp;
        csv::write_file(tmp.file("pl.csv"), "scheme,name,issns,value\nPL,J,,200\nPL,K,,20\n");
        CHECK(parse_ranking_list(tmp.file("pl.csv"), RankScheme::PL).size() == 2);
        csv::write_file(tmp.file("fi4.csv"), "scheme,name,issns,value\nFI,J,,4\n");
        CHECK_THROWS_AS(parse_ranking_list(tmp.file("fi4.csv"), RankScheme::FI), InputError);
        csv::write_file(tmp.file("no3.csv"), "scheme,name,issns,value\nNO,J,,3\n");
        CHECK_THROWS_AS(parse_ranking_list(tmp.file("no3.csv"), RankScheme::NO), InputError);
    }

    TEST_CASE("empty file gives an empty list") {
        test::TempDir tmp;
        csv::write_file(tmp.file("empty.csv"), "");
        CHECK(parse_ranking_list(tmp.file("empty.csv"), RankScheme::FI).empty());
        csv::write_file(tmp.file("header.csv"), "scheme,name,issns,value\n");
        CHECK(parse_ranking_list(tmp.file("header.csv"), RankScheme::FI).empty());
    }

    TEST_CASE("scheme mismatch is an error") {
        test::TempDir tmp;
        csv::write_file(tmp.file("mixed.csv"), "scheme,name,issns,value\nNO,J,,2\n");
        CHECK_THROWS_AS(parse_ranking_list(tmp.file("mixed.csv"), RankScheme::FI), InputError);
    }

    TEST_CASE("conflicting duplicate ISSN is an error, exact duplicate is not") {
        test::TempDir tmp;
        csv::write_file(tmp.file("dup.csv"),
                        "scheme,name,issns,value\nFI,J,1234-5679,2\nFI,J variant,1234-5679,3\n");
        CHECK_THROWS_AS(parse_ranking_list(tmp.file("dup.csv"), RankScheme::FI), InputError);

        csv::write_file(tmp.file("same.csv"),
                        "scheme,name,issns,value\nFI,J,1234-5679,2\nFI,J variant,1234-5679,2\n");
        CHECK(parse_ranking_list(tmp.file("same.csv"), RankScheme::FI).size() == 2);
    }

    TEST_CASE("quoted names may contain commas; issn lists use semicolons") {
        test::TempDir tmp;
        csv::write_file(tmp.file("q.csv"),
                        "scheme,name,issns,value\nPL,\"Ecology, Evolution and Systematics\","
                        "1234-5679;0028-083x,140\n");
        auto entries = parse_ranking_list(tmp.file("q.csv"), RankScheme::PL);
        REQUIRE(entries.size() == 1);
        CHECK(entries[0].names[0] == "Ecology, Evolution and Systematics");
        CHECK(entries[0].issns == std::vector<std::string>{"0028083X", "12345679"});
    }

    TEST_CASE("malformed ISSNs are dropped, not fatal") {
        test::TempDir tmp;
        csv::write_file(tmp.file("bad_issn.csv"),
                        "scheme,name,issns,value\nFI,J,12-34;1234-5679,1\n");
        auto entries = parse_ranking_list(tmp.file("bad_issn.csv"), RankScheme::FI);
        REQUIRE(entries.size() == 1);
        CHECK(entries[0].issns == std::vector<std::string>{"12345679"});
    }
}

TEST_SUITE("match_journals") {
    TEST_CASE("single-field journal matched by ISSN keeps its rank") {
        std::vector<ArticleRecord> articles = {
            make_article("a1", "Acta One", {"12345679"}, {27}),
            make_article("a2", "Acta One", {"12345679"}, {27}),
        };
        std::vector<RankEntry> ranks = {
            make_rank(RankScheme::FI, {"Acta One"}, {"12345679"}, 2),
        };
        auto outcome = match_journals(articles, ranks, 2021);
        REQUIRE(outcome.journals.size() == 1);
        const auto& journal = outcome.journals[0];
        CHECK(journal.field_code == 27);
        CHECK(journal.rank_fi == 2);
        CHECK_FALSE(journal.rank_no.has_value());
        CHECK_FALSE(journal.rank_pl.has_value());
        CHECK(journal.articles.size() == 2);
    }

    TEST_CASE("journal spanning two fields is excluded") {
        std::vector<ArticleRecord> articles = {
            make_article("a1", "Span", {"11112229"}, {27}),
            make_article("a2", "Span", {"11112229"}, {19}),
        };
        auto outcome = match_journals(articles, {}, 2021);
        CHECK(outcome.journals.empty());
        REQUIRE(!outcome.log.empty());
        CHECK(outcome.log[0].find("spans fields") != std::string::npos);
    }

    TEST_CASE("any multidisciplinary article excludes the journal") {
        std::vector<ArticleRecord> articles = {
            make_article("a1", "Multi", {}, {27}),
            make_article("a2", "Multi", {}, {10}),
        };
        auto outcome = match_journals(articles, {}, 2021);
        CHECK(outcome.journals.empty());
    }

    TEST_CASE("unlisted journal is kept with all ranks absent") {
        std::vector<ArticleRecord> articles = {make_article("a1", "Quiet", {"99990009"}, {27})};
        auto outcome = match_journals(articles, {}, 2021);
        REQUIRE(outcome.journals.size() == 1);
        CHECK_FALSE(outcome.journals[0].rank_fi.has_value());
        CHECK_FALSE(outcome.journals[0].rank_no.has_value());
        CHECK_FALSE(outcome.journals[0].rank_pl.has_value());
    }

    TEST_CASE("conflicting rank values void that scheme only") {
        std::vector<ArticleRecord> articles = {make_article("a1", "Torn", {"12345679"}, {27})};
        std::vector<RankEntry> ranks = {
            make_rank(RankScheme::FI, {"Torn"}, {"12345679"}, 1),
            make_rank(RankScheme::FI, {"Torn alias"}, {"12345679"}, 3),
            make_rank(RankScheme::PL, {"Torn"}, {"12345679"}, 140),
        };
        auto outcome = match_journals(articles, ranks, 2021);
        REQUIRE(outcome.journals.size() == 1);
        CHECK_FALSE(outcome.journals[0].rank_fi.has_value());
        CHECK(outcome.journals[0].rank_pl == 140);
        bool conflict_logged = false;
        for (const auto& line : outcome.log) {
            if (line.find("conflict") != std::string::npos) conflict_logged = true;
        }
        CHECK(conflict_logged);
    }

    TEST_CASE("ISSN match wins over name match") {
        std::vector<ArticleRecord> articles = {make_article("a1", "Shared Name", {"12345679"}, {27})};
        std::vector<RankEntry> ranks = {
            make_rank(RankScheme::NO, {"Other Journal"}, {"12345679"}, 2),
            make_rank(RankScheme::NO, {"Shared Name"}, {"55554449"}, 0),
        };
        auto outcome = match_journals(articles, ranks, 2021);
        REQUIRE(outcome.journals.size() == 1);
        CHECK(outcome.journals[0].rank_no == 2);
    }

    TEST_CASE("name match applies only when no ISSN matches") {
        std::vector<ArticleRecord> articles = {make_article("a1", "The Nameless Review", {}, {27})};
        std::vector<RankEntry> ranks = {
            make_rank(RankScheme::PL, {"Nameless Review"}, {"77778887"}, 70),
        };
        auto outcome = match_journals(articles, ranks, 2021);
        REQUIRE(outcome.journals.size() == 1);
        CHECK(outcome.journals[0].rank_pl == 70); // leading "the" dropped by normalization
    }

    TEST_CASE("groups sharing an ISSN are unified") {
        std::vector<ArticleRecord> articles = {
            make_article("a1", "Acta Alpha", {"12345679"}, {27}),
            make_article("a2", "Acta Alpha (Online)", {"12345679", "88887771"}, {27}),
            make_article("a3", "Acta Alpha", {"12345679"}, {27}),
        };
        auto outcome = match_journals(articles, {}, 2021);
        REQUIRE(outcome.journals.size() == 1);
        CHECK(outcome.journals[0].articles.size() == 3);
        CHECK(outcome.journals[0].canonical_name == "Acta Alpha"); // most frequent raw name
        CHECK(outcome.journals[0].issns == std::vector<std::string>{"12345679", "88887771"});
    }

    TEST_CASE("same name without ISSNs stays one group; with disjoint ISSNs stays separate") {
        std::vector<ArticleRecord> articles = {
            make_article("a1", "Homonym", {"11112229"}, {27}),
            make_article("a2", "Homonym", {"33334449"}, {27}),
        };
        auto outcome = match_journals(articles, {}, 2021);
        CHECK(outcome.journals.size() == 2); // kept separate, collision logged
        bool collision_logged = false;
        for (const auto& line : outcome.log) {
            if (line.find("name collision") != std::string::npos) collision_logged = true;
        }
        CHECK(collision_logged);
    }

    TEST_CASE("articles from other years are ignored") {
        std::vector<ArticleRecord> articles = {
            make_article("a1", "J", {}, {27}, 2021),
            make_article("a2", "J", {}, {27}, 2019),
        };
        auto outcome = match_journals(articles, {}, 2021);
        REQUIRE(outcome.journals.size() == 1);
        CHECK(outcome.journals[0].articles.size() == 1);
        CHECK(outcome.journals[0].articles[0].article_id == "a1");
    }

    TEST_CASE("merging is idempotent") {
        std::vector<ArticleRecord> articles;
        Rng rng(7);
        for (int j = 0; j < 12; ++j) {
            std::string name = "Journal " + std::to_string(j % 5);
            std::vector<std::string> issns;
            if (j % 3 != 0) issns.push_back("0000000" + std::to_string(j % 5));
            for (int a = 0; a < 3; ++a) {
                articles.push_back(make_article("id" + std::to_string(j) + "_" + std::to_string(a),
                                                name, issns, {11 + (j % 5)}));
            }
        }
        std::vector<RankEntry> ranks = {
            make_rank(RankScheme::FI, {"Journal 1"}, {"00000001"}, 2),
        };
        auto first = match_journals(articles, ranks, 2021);

        std::vector<ArticleRecord> flattened;
        for (const auto& journal : first.journals) {
            flattened.insert(flattened.end(), journal.articles.begin(), journal.articles.end());
        }
        auto second = match_journals(flattened, ranks, 2021);

        REQUIRE(first.journals.size() == second.journals.size());
        for (std::size_t i = 0; i < first.journals.size(); ++i) {
            CHECK(first.journals[i].canonical_name == second.journals[i].canonical_name);
            CHECK(first.journals[i].issns == second.journals[i].issns);
            CHECK(first.journals[i].field_code == second.journals[i].field_code);
            CHECK(first.journals[i].rank_fi == second.journals[i].rank_fi);
            CHECK(first.journals[i].articles.size() == second.journals[i].articles.size());
        }
    }

    TEST_CASE("rank assignment is invariant under rank-entry permutation") {
        std::vector<ArticleRecord> articles = {
            make_article("a1", "Perm One", {"12345679"}, {27}),
            make_article("a2", "Perm Two", {"22223339"}, {27}),
            make_article("a3", "Perm Three", {}, {27}),
        };
        std::vector<RankEntry> ranks = {
            make_rank(RankScheme::FI, {"Perm One"}, {"12345679"}, 3),
            make_rank(RankScheme::FI, {"Perm Two"}, {"22223339"}, 1),
            make_rank(RankScheme::FI, {"Perm Two alias"}, {"22223339"}, 2), // conflict
            make_rank(RankScheme::PL, {"Perm Three"}, {}, 100),
            make_rank(RankScheme::NO, {"Perm One"}, {}, 2),
        };
        auto baseline = match_journals(articles, ranks, 2021);
        std::sort(ranks.begin(), ranks.end(),
                  [](const RankEntry& a, const RankEntry& b) { return a.value > b.value; });
        auto permuted = match_journals(articles, ranks, 2021);

        REQUIRE(baseline.journals.size() == permuted.journals.size());
        for (std::size_t i = 0; i < baseline.journals.size(); ++i) {
            CHECK(baseline.journals[i].rank_fi == permuted.journals[i].rank_fi);
            CHECK(baseline.journals[i].rank_no == permuted.journals[i].rank_no);
            CHECK(baseline.journals[i].rank_pl == permuted.journals[i].rank_pl);
        }
    }

    TEST_CASE("no output journal carries two field codes and rank counts are consistent") {
        std::vector<ArticleRecord> articles;
        Rng rng(99);
        for (int j = 0; j < 30; ++j) {
            std::string name = "Prop Journal " + std::to_string(j);
            std::vector<std::string> issns = {"0000" + std::to_string(1000 + j)};
            int base_field = 11 + static_cast<int>(rng.below(26));
            for (int a = 0; a < 4; ++a) {
                int field = base_field;
                if (rng.below(10) == 0) field = 11 + static_cast<int>(rng.below(26));
                articles.push_back(make_article("p" + std::to_string(j) + "_" + std::to_string(a),
                                                name, issns, {field}));
            }
        }
        std::vector<RankEntry> ranks;
        for (int j = 0; j < 30; j += 2) {
            ranks.push_back(make_rank(RankScheme::FI, {"Prop Journal " + std::to_string(j)},
                                      {"0000" + std::to_string(1000 + j)}, j % 4));
        }
        auto outcome = match_journals(articles, ranks, 2021);
        std::size_t with_any_rank = 0;
        for (const auto& journal : outcome.journals) {
            std::set<int> fields;
            for (const auto& article : journal.articles) {
                fields.insert(article.field_codes.begin(), article.field_codes.end());
            }
            CHECK(fields == std::set<int>{journal.field_code});
            if (journal.rank_fi || journal.rank_no || journal.rank_pl) ++with_any_rank;
        }
        CHECK(with_any_rank <= outcome.journals.size());
    }
}

TEST_SUITE("scopus_field_label") {
    TEST_CASE("known codes and fallback") {
        CHECK(scopus_field_label(26) == "Mathematics");
        CHECK(scopus_field_label(10) == "Multidisciplinary");
        CHECK(scopus_field_label(99) == "Field 99");
    }
}
