#include "jqf/sampling.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "doctest.h"

#include "jqf/errors.hpp"
#include "jqf/rng.hpp"

using namespace jqf;

namespace {

JournalRecord make_journal(const std::string& name, int field_code, int article_count,
                           int non_qualifying = 0) {
    JournalRecord journal;
    journal.canonical_name = name;
    journal.field_code = field_code;
    journal.issns = {"00000000"};
    for (int i = 0; i < article_count + non_qualifying; ++i) {
        ArticleRecord article;
        article.article_id = name + "-a" + std::to_string(i);
        article.journal_name = name;
        article.year = 2021;
        article.field_codes = {field_code};
        article.title = "T";
        // the first `article_count` articles qualify (long abstract)
        article.raw_abstract = std::string(i < article_count ? 800 : 10, 'x');
        article.citation_count = i;
        journal.articles.push_back(std::move(article));
    }
    return journal;
}

bool long_abstract(const ArticleRecord& article) { return article.raw_abstract.size() > 785; }

std::vector<std::string> ids_of(const std::vector<ArticleRecord>& articles) {
    std::vector<std::string> ids;
    for (const auto& a : articles) ids.push_back(a.article_id);
    return ids;
}

std::vector<std::string> names_of(const std::vector<JournalRecord>& journals) {
    std::vector<std::string> names;
    for (const auto& j : journals) names.push_back(j.canonical_name);
    return names;
}

} // namespace

TEST_SUITE("SamplePlan") {
    TEST_CASE("validation") {
        SamplePlan plan;
        CHECK_NOTHROW(plan.validate());
        plan.articles_per_journal = 120;
        plan.min_qualifying_articles = 100;
        CHECK_THROWS_AS(plan.validate(), InputError);
        plan = SamplePlan{};
        plan.max_journals_per_field = 0;
        CHECK_THROWS_AS(plan.validate(), InputError);
    }
}

TEST_SUITE("select_field_journals") {
    TEST_CASE("at or under the cap returns everything, sorted") {
        SamplePlan plan;
        plan.master_seed = 1;
        std::vector<JournalRecord> journals;
        for (int i = 5; i >= 0; --i) journals.push_back(make_journal("J" + std::to_string(i), 27, 0));
        auto selected = select_field_journals(journals, 27, plan);
        REQUIRE(selected.size() == 6);
        CHECK(std::is_sorted(selected.begin(), selected.end(),
                             [](const JournalRecord& a, const JournalRecord& b) {
                                 return a.canonical_name < b.canonical_name;
                             }));
    }

    TEST_CASE("over the cap draws a deterministic uniform sample") {
        SamplePlan plan;
        plan.master_seed = 42;
        plan.max_journals_per_field = 100;
        std::vector<JournalRecord> journals;
        for (int i = 0; i < 120; ++i) {
            journals.push_back(make_journal("J" + std::to_string(1000 + i), 19, 0));
        }
        auto first = select_field_journals(journals, 19, plan);
        REQUIRE(first.size() == 100);

        auto again = select_field_journals(journals, 19, plan);
        CHECK(names_of(first) == names_of(again));

        // input order must not matter
        std::reverse(journals.begin(), journals.end());
        auto reversed = select_field_journals(journals, 19, plan);
        CHECK(names_of(first) == names_of(reversed));

        SamplePlan other = plan;
        other.master_seed = 43;
        auto different = select_field_journals(journals, 19, other);
        CHECK(names_of(first) != names_of(different));
    }

    TEST_CASE("a single journal is returned, exclusion happens downstream") {
        SamplePlan plan;
        auto selected = select_field_journals({make_journal("Solo", 18, 0)}, 18, plan);
        CHECK(selected.size() == 1);
    }

    TEST_CASE("journal with the wrong field code is rejected") {
        SamplePlan plan;
        CHECK_THROWS_AS(select_field_journals({make_journal("Wrong", 19, 0)}, 27, plan),
                        InputError);
    }
}

TEST_SUITE("sample_articles") {
    TEST_CASE("exactly the minimum returns every qualifying article") {
        SamplePlan plan;
        plan.master_seed = 7;
        auto journal = make_journal("Exact", 27, 100, /*non_qualifying=*/20);
        auto sample = sample_articles(journal, plan, long_abstract);
        REQUIRE(sample.size() == 100);
        std::set<std::string> ids;
        for (const auto& a : sample) {
            CHECK(a.raw_abstract.size() > 785);
            ids.insert(a.article_id);
        }
        CHECK(ids.size() == 100); // distinct
    }

    TEST_CASE("250 qualifying gives 100 distinct, deterministic, seed-sensitive") {
        SamplePlan plan;
        plan.master_seed = 11;
        auto journal = make_journal("Big", 27, 250);
        auto first = sample_articles(journal, plan, long_abstract);
        REQUIRE(first.size() == 100);
        std::set<std::string> distinct(ids_of(first).begin(), ids_of(first).end());
        CHECK(distinct.size() == 100);

        CHECK(ids_of(sample_articles(journal, plan, long_abstract)) == ids_of(first));

        SamplePlan other = plan;
        other.master_seed = 12;
        CHECK(ids_of(sample_articles(journal, other, long_abstract)) != ids_of(first));
    }

    TEST_CASE("99 qualifying articles is an upstream filter violation") {
        SamplePlan plan;
        auto journal = make_journal("Short", 27, 99, 300);
        CHECK_THROWS_AS(sample_articles(journal, plan, long_abstract), InputError);
    }

    TEST_CASE("non-qualifying articles are never selected") {
        SamplePlan plan;
        plan.master_seed = 3;
        plan.articles_per_journal = 10;
        plan.min_qualifying_articles = 10;
        auto journal = make_journal("Mixed", 27, 12, 200);
        auto sample = sample_articles(journal, plan, long_abstract);
        REQUIRE(sample.size() == 10);
        for (const auto& a : sample) CHECK(a.raw_abstract.size() > 785);
    }

    TEST_CASE("selection ignores article order inside the journal") {
        SamplePlan plan;
        plan.master_seed = 5;
        auto journal = make_journal("Shuffled", 27, 180);
        auto baseline = ids_of(sample_articles(journal, plan, long_abstract));
        std::reverse(journal.articles.begin(), journal.articles.end());
        CHECK(ids_of(sample_articles(journal, plan, long_abstract)) == baseline);
    }

    TEST_CASE("a journal's sample does not depend on sibling journals") {
        // per-journal substreams are keyed by identity, so the draw for one
        // journal is the same whether or not others exist in the corpus
        SamplePlan plan;
        plan.master_seed = 17;
        auto journal = make_journal("Keyed", 27, 150);
        auto alone = ids_of(sample_articles(journal, plan, long_abstract));

        auto other = make_journal("Other", 27, 130);
        (void)sample_articles(other, plan, long_abstract);
        CHECK(ids_of(sample_articles(journal, plan, long_abstract)) == alone);
    }
}

TEST_SUITE("sampling uniformity") {
    TEST_CASE("choosing 1 of 10 over 10,000 seeds is close to uniform") {
        SamplePlan plan;
        plan.articles_per_journal = 1;
        plan.min_qualifying_articles = 1;
        auto journal = make_journal("Uniform", 27, 10);

        std::map<std::string, int> counts;
        for (int seed = 0; seed < 10000; ++seed) {
            plan.master_seed = static_cast<std::uint64_t>(seed);
            auto sample = sample_articles(journal, plan, long_abstract);
            REQUIRE(sample.size() == 1);
            ++counts[sample[0].article_id];
        }
        REQUIRE(counts.size() == 10);
        for (const auto& [id, count] : counts) {
            CHECK(count >= 700);  // 10% - 3pp
            CHECK(count <= 1300); // 10% + 3pp
        }
    }
}
