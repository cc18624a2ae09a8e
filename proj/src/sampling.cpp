#include "jqf/sampling.hpp"

#include <algorithm>

#include "jqf/errors.hpp"
#include "jqf/rng.hpp"

namespace jqf {

void SamplePlan::validate() const {
    if (max_journals_per_field < 1) throw InputError("plan: max_journals_per_field must be >= 1");
    if (articles_per_journal < 1) throw InputError("plan: articles_per_journal must be >= 1");
    if (articles_per_journal > min_qualifying_articles) {
        throw InputError("plan: articles_per_journal exceeds min_qualifying_articles");
    }
}

namespace {

void sort_by_identity(std::vector<JournalRecord>& journals) {
    std::sort(journals.begin(), journals.end(),
              [](const JournalRecord& a, const JournalRecord& b) {
                  if (a.canonical_name != b.canonical_name) {
                      return a.canonical_name < b.canonical_name;
                  }
                  return a.issns < b.issns;
              });
}

} // namespace

std::vector<JournalRecord> select_field_journals(std::vector<JournalRecord> journals,
                                                 int field_code, const SamplePlan& plan) {
    plan.validate();
    for (const auto& journal : journals) {
        if (journal.field_code != field_code) {
            throw InputError("select_field_journals: journal \"" + journal.canonical_name +
                             "\" carries field " + std::to_string(journal.field_code) +
                             ", expected " + std::to_string(field_code));
        }
    }
    sort_by_identity(journals); // input order must not influence the draw

    auto cap = static_cast<std::size_t>(plan.max_journals_per_field);
    if (journals.size() <= cap) return journals;

    Rng rng(substream_seed(plan.master_seed, "field:" + std::to_string(field_code)));
    std::vector<std::size_t> picked = sample_indices(rng, journals.size(), cap);
    std::sort(picked.begin(), picked.end());

    std::vector<JournalRecord> selected;
    selected.reserve(cap);
    for (std::size_t idx : picked) selected.push_back(std::move(journals[idx]));
    sort_by_identity(selected);
    return selected;
}

std::vector<ArticleRecord>
sample_articles(const JournalRecord& journal, const SamplePlan& plan,
                const std::function<bool(const ArticleRecord&)>& article_qualifies) {
    plan.validate();

    std::vector<const ArticleRecord*> qualifying;
    for (const auto& article : journal.articles) {
        if (article_qualifies(article)) qualifying.push_back(&article);
    }
    if (qualifying.size() < static_cast<std::size_t>(plan.min_qualifying_articles)) {
        throw InputError("journal \"" + journal.canonical_name + "\" has only " +
                         std::to_string(qualifying.size()) +
                         " qualifying articles (minimum " +
                         std::to_string(plan.min_qualifying_articles) + ")");
    }
    std::sort(qualifying.begin(), qualifying.end(),
              [](const ArticleRecord* a, const ArticleRecord* b) {
                  return a->article_id < b->article_id;
              });

    Rng rng(substream_seed(plan.master_seed, "journal:" + journal.identity_key()));
    auto want = static_cast<std::size_t>(plan.articles_per_journal);
    std::vector<std::size_t> picked = sample_indices(rng, qualifying.size(), want);
    std::sort(picked.begin(), picked.end());

    std::vector<ArticleRecord> selected;
    selected.reserve(want);
    for (std::size_t idx : picked) selected.push_back(*qualifying[idx]);
    return selected;
}

} // namespace jqf
