#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "jqf/corpus.hpp"

namespace jqf {

/// Controls journal and article selection. The whole selection is a pure
/// function of (corpus, plan); per-journal substreams are keyed by journal
/// identity so one journal's sample never depends on its neighbours.
struct SamplePlan {
    std::uint64_t master_seed = 0;
    int max_journals_per_field = 100;
    int articles_per_journal = 100;
    int min_qualifying_articles = 100;

    void validate() const; // throws InputError on nonsense
};

/// All journals of the field when at or under the cap, otherwise a uniform
/// sample of exactly max_journals_per_field, deterministic in
/// (master_seed, field_code). Output sorted by canonical name.
std::vector<JournalRecord> select_field_journals(std::vector<JournalRecord> journals,
                                                 int field_code, const SamplePlan& plan);

/// Exactly articles_per_journal distinct qualifying articles, uniform without
/// replacement, deterministic in (master_seed, journal identity). Throws
/// InputError when the journal has fewer than min_qualifying_articles
/// qualifying articles (the upstream filter was violated).
std::vector<ArticleRecord>
sample_articles(const JournalRecord& journal, const SamplePlan& plan,
                const std::function<bool(const ArticleRecord&)>& article_qualifies);

} // namespace jqf
