#include "jqf/pipeline.hpp"

#include <algorithm>
#include <map>
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

json article_to_json(const ArticleRecord& article) {
    return json{
        {"id", article.article_id},       {"journal", article.journal_name},
        {"issns", article.issns},         {"year", article.year},
        {"fields", article.field_codes},  {"title", article.title},
        {"abstract", article.raw_abstract}, {"citations", article.citation_count},
    };
}

ArticleRecord article_from_json(const json& obj) {
    ArticleRecord article;
    article.article_id = obj.at("id").get<std::string>();
    article.journal_name = obj.at("journal").get<std::string>();
    article.issns = obj.at("issns").get<std::vector<std::string>>();
    article.year = obj.at("year").get<int>();
    article.field_codes = obj.at("fields").get<std::vector<int>>();
    article.title = obj.at("title").get<std::string>();
    article.raw_abstract = obj.at("abstract").get<std::string>();
    article.citation_count = obj.at("citations").get<long long>();
    return article;
}

json optional_rank_json(const std::optional<int>& rank) {
    return rank ? json(*rank) : json(nullptr);
}

std::optional<int> optional_rank_from(const json& value) {
    if (value.is_null()) return std::nullopt;
    return value.get<int>();
}

struct PreparedRow {
    std::string article_id;
    std::string journal_key;
    int field_code = 0;
    std::size_t chars = 0;
    bool qualifies = false;
    Guideline guideline = Guideline::A;
    std::string prompt; // empty for non-qualifying articles
};

void write_prepared(const std::filesystem::path& path, const std::vector<PreparedRow>& rows) {
    std::string out;
    for (const auto& row : rows) {
        json obj = {
            {"id", row.article_id},
            {"journal", row.journal_key},
            {"field", row.field_code},
            {"chars", row.chars},
            {"qualifies", row.qualifies},
            {"guideline", std::string(1, to_char(row.guideline))},
        };
        if (row.qualifies) obj["prompt"] = row.prompt;
        out += obj.dump();
        out.push_back('\n');
    }
    csv::write_file(path, out);
}

std::vector<PreparedRow> read_prepared(const std::filesystem::path& path) {
    std::istringstream in(csv::read_file(path));
    std::vector<PreparedRow> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        json obj = json::parse(line);
        PreparedRow row;
        row.article_id = obj.at("id").get<std::string>();
        row.journal_key = obj.at("journal").get<std::string>();
        row.field_code = obj.at("field").get<int>();
        row.chars = obj.at("chars").get<std::size_t>();
        row.qualifies = obj.at("qualifies").get<bool>();
        std::string g = obj.at("guideline").get<std::string>();
        row.guideline = static_cast<Guideline>(g.at(0) - 'A');
        if (obj.contains("prompt")) row.prompt = obj.at("prompt").get<std::string>();
        rows.push_back(std::move(row));
    }
    return rows;
}

struct ManifestRow {
    int field_code = 0;
    std::string journal_key;
    std::string article_id;
};

std::vector<ManifestRow> read_manifest(const std::filesystem::path& path) {
    csv::Reader reader(csv::read_file(path));
    auto header = reader.next();
    if (!header || *header != std::vector<std::string>{"field", "journal", "article_id"}) {
        throw InputError("manifest " + path.string() + ": expected header field,journal,article_id");
    }
    std::vector<ManifestRow> rows;
    while (auto row = reader.next()) {
        if (row->size() != 3) {
            throw InputError("manifest " + path.string() + ": row at line " +
                             std::to_string(reader.record_line()) + ": expected 3 fields");
        }
        rows.push_back({std::stoi((*row)[0]), (*row)[1], (*row)[2]});
    }
    return rows;
}

std::string scores_path_content(const std::vector<ScoreReport>& reports) {
    std::string out = "article_id,status,final_score,overall,originality,significance,rigour\n";
    auto cell = [](const std::optional<double>& v) {
        return v ? csv::format_double(*v) : std::string();
    };
    for (const auto& report : reports) {
        out += csv::join({report.article_id, std::string(to_string(report.status)),
                          cell(report.final_score), cell(report.overall),
                          cell(report.originality), cell(report.significance),
                          cell(report.rigour)}) +
               "\n";
    }
    return out;
}

struct ScoreRow {
    ScoreStatus status = ScoreStatus::NeedsAdjudication;
    std::optional<double> final_score;
};

std::map<std::string, ScoreRow> read_scores(const std::filesystem::path& path) {
    csv::Reader reader(csv::read_file(path));
    auto header = reader.next();
    if (!header || header->size() != 7 || (*header)[0] != "article_id") {
        throw InputError("scores " + path.string() + ": unexpected header");
    }
    std::map<std::string, ScoreRow> rows;
    while (auto row = reader.next()) {
        ScoreRow score;
        auto status = score_status_from((*row)[1]);
        if (!status) {
            throw InputError("scores " + path.string() + ": unknown status \"" + (*row)[1] + "\"");
        }
        score.status = *status;
        if (!(*row)[2].empty()) score.final_score = std::stod((*row)[2]);
        rows[(*row)[0]] = score;
    }
    return rows;
}

} // namespace

void write_journals(const std::filesystem::path& path, const std::vector<JournalRecord>& journals) {
    std::string out;
    for (const auto& journal : journals) {
        json articles = json::array();
        for (const auto& article : journal.articles) articles.push_back(article_to_json(article));
        json obj = {
            {"name", journal.canonical_name},
            {"issns", journal.issns},
            {"field", journal.field_code},
            {"rank_fi", optional_rank_json(journal.rank_fi)},
            {"rank_no", optional_rank_json(journal.rank_no)},
            {"rank_pl", optional_rank_json(journal.rank_pl)},
            {"articles", std::move(articles)},
        };
        out += obj.dump();
        out.push_back('\n');
    }
    csv::write_file(path, out);
}

std::vector<JournalRecord> read_journals(const std::filesystem::path& path) {
    std::istringstream in(csv::read_file(path));
    std::vector<JournalRecord> journals;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        json obj = json::parse(line);
        JournalRecord journal;
        journal.canonical_name = obj.at("name").get<std::string>();
        journal.issns = obj.at("issns").get<std::vector<std::string>>();
        journal.field_code = obj.at("field").get<int>();
        journal.rank_fi = optional_rank_from(obj.at("rank_fi"));
        journal.rank_no = optional_rank_from(obj.at("rank_no"));
        journal.rank_pl = optional_rank_from(obj.at("rank_pl"));
        for (const auto& a : obj.at("articles")) journal.articles.push_back(article_from_json(a));
        journals.push_back(std::move(journal));
    }
    return journals;
}

std::string sha256_file(const std::filesystem::path& path) {
    return sha256_hex(csv::read_file(path));
}

std::size_t stage_ingest(const IngestInputs& inputs, int year,
                         const std::filesystem::path& run_dir) {
    std::filesystem::create_directories(run_dir);

    std::vector<ArticleRecord> articles = parse_articles(inputs.articles);
    std::vector<RankEntry> ranks;
    auto load_ranks = [&](const std::optional<std::filesystem::path>& path, RankScheme scheme) {
        if (!path) return;
        auto entries = parse_ranking_list(*path, scheme);
        ranks.insert(ranks.end(), entries.begin(), entries.end());
    };
    load_ranks(inputs.rank_fi, RankScheme::FI);
    load_ranks(inputs.rank_no, RankScheme::NO);
    load_ranks(inputs.rank_pl, RankScheme::PL);

    MatchOutcome outcome = match_journals(articles, ranks, year);

    write_journals(run_dir / "journals.jsonl", outcome.journals);
    std::string log;
    for (const auto& entry : outcome.log) log += entry + "\n";
    csv::write_file(run_dir / "match_log.txt", log);

    json digests = json::object();
    digests["articles"] = {{"path", inputs.articles.string()},
                           {"sha256", sha256_file(inputs.articles)}};
    auto digest = [&](const char* key, const std::optional<std::filesystem::path>& path) {
        if (path) digests[key] = {{"path", path->string()}, {"sha256", sha256_file(*path)}};
    };
    digest("rank_fi", inputs.rank_fi);
    digest("rank_no", inputs.rank_no);
    digest("rank_pl", inputs.rank_pl);
    csv::write_file(run_dir / "inputs.json", digests.dump(2) + "\n");

    return outcome.journals.size();
}

void stage_prepare(const std::filesystem::path& run_dir, const PrepOptions& options) {
    std::vector<JournalRecord> journals = read_journals(run_dir / "journals.jsonl");
    std::vector<PreparedRow> rows;
    for (const auto& journal : journals) {
        std::string key = journal.identity_key();
        for (const auto& article : journal.articles) {
            PreparedRow row;
            row.article_id = article.article_id;
            row.journal_key = key;
            row.field_code = journal.field_code;
            std::string cleaned = clean_abstract(article.raw_abstract, options.markers);
            row.chars = utf8_length(cleaned);
            row.qualifies =
                options.qualify_on_raw ? qualifies(article.raw_abstract) : qualifies(cleaned);
            row.guideline = guideline_for_field(journal.field_code);
            if (row.qualifies) {
                try {
                    row.prompt = build_prompt(article.title, cleaned);
                } catch (const InputError& e) {
                    throw InputError("article " + article.article_id + ": " + e.what());
                }
            }
            rows.push_back(std::move(row));
        }
    }
    write_prepared(run_dir / "prepared.jsonl", rows);
}

void stage_sample(const std::filesystem::path& run_dir, const SamplePlan& plan) {
    plan.validate();
    std::vector<JournalRecord> journals = read_journals(run_dir / "journals.jsonl");
    std::vector<PreparedRow> prepared = read_prepared(run_dir / "prepared.jsonl");

    std::unordered_set<std::string> qualifying_ids;
    for (const auto& row : prepared) {
        if (row.qualifies) qualifying_ids.insert(row.article_id);
    }
    auto article_qualifies = [&](const ArticleRecord& article) {
        return qualifying_ids.count(article.article_id) > 0;
    };

    // journal filter: enough qualifying articles
    std::map<int, std::vector<JournalRecord>> by_field;
    for (auto& journal : journals) {
        std::size_t count = 0;
        for (const auto& article : journal.articles) {
            if (article_qualifies(article)) ++count;
        }
        if (count < static_cast<std::size_t>(plan.min_qualifying_articles)) continue;
        by_field[journal.field_code].push_back(std::move(journal));
    }

    std::string manifest = "field,journal,article_id\n";
    std::string sampled = "field,journal,n_qualifying_sampled,rank_fi,rank_no,rank_pl\n";
    auto rank_cell = [](const std::optional<int>& r) {
        return r ? std::to_string(*r) : std::string();
    };
    for (auto& [field_code, field_journals] : by_field) {
        std::vector<JournalRecord> selected =
            select_field_journals(std::move(field_journals), field_code, plan);
        for (const auto& journal : selected) {
            std::vector<ArticleRecord> chosen = sample_articles(journal, plan, article_qualifies);
            std::string key = journal.identity_key();
            for (const auto& article : chosen) {
                manifest +=
                    csv::join({std::to_string(field_code), key, article.article_id}) + "\n";
            }
            sampled += csv::join({std::to_string(field_code), key,
                                  std::to_string(chosen.size()), rank_cell(journal.rank_fi),
                                  rank_cell(journal.rank_no), rank_cell(journal.rank_pl)}) +
                       "\n";
        }
    }
    csv::write_file(run_dir / "manifest.csv", manifest);
    csv::write_file(run_dir / "sampled_journals.csv", sampled);
}

ScoringRunResult stage_score(const std::filesystem::path& run_dir,
                             const std::filesystem::path& guideline_dir,
                             const BackendConfig& backend_config,
                             const std::optional<std::filesystem::path>& adjudications_csv) {
    GuidelineSet guidelines = load_guidelines(guideline_dir);
    std::vector<ManifestRow> manifest = read_manifest(run_dir / "manifest.csv");
    std::vector<PreparedRow> prepared = read_prepared(run_dir / "prepared.jsonl");

    std::unordered_map<std::string, const PreparedRow*> by_id;
    for (const auto& row : prepared) by_id[row.article_id] = &row;

    std::vector<ScoringItem> items;
    items.reserve(manifest.size());
    for (const auto& row : manifest) {
        auto it = by_id.find(row.article_id);
        if (it == by_id.end() || !it->second->qualifies) {
            throw InputError("manifest article " + row.article_id +
                             " is not a prepared qualifying article");
        }
        items.push_back({row.article_id, it->second->guideline, it->second->prompt});
    }

    AdjudicationBook adjudications;
    if (adjudications_csv) adjudications = load_adjudications(*adjudications_csv);

    std::unique_ptr<Backend> backend = make_backend(backend_config);
    ScoringRunResult result =
        run_scoring(items, guidelines, *backend, backend_config, adjudications);

    csv::write_file(run_dir / "scores.csv", scores_path_content(result.reports));
    write_adjudication_queue(run_dir / "adjudication_queue.csv", result.reports,
                             run_dir / "adjudication_reports");
    return result;
}

void stage_indicators(const std::filesystem::path& run_dir) {
    std::vector<JournalRecord> journals = read_journals(run_dir / "journals.jsonl");
    std::vector<ManifestRow> manifest = read_manifest(run_dir / "manifest.csv");
    std::map<std::string, ScoreRow> scores = read_scores(run_dir / "scores.csv");

    std::unordered_map<std::string, const JournalRecord*> journal_by_key;
    for (const auto& journal : journals) journal_by_key[journal.identity_key()] = &journal;

    struct Bucket {
        int field_code = 0;
        std::vector<std::string> article_ids;
    };
    std::map<std::string, Bucket> buckets; // keyed by journal key; map keeps output sorted
    for (const auto& row : manifest) {
        auto& bucket = buckets[row.journal_key];
        bucket.field_code = row.field_code;
        bucket.article_ids.push_back(row.article_id);
    }

    std::string out = "journal,field,jqf,jcr,n_scored,rank_fi,rank_no,rank_pl\n";
    std::string log;
    auto rank_cell = [](const std::optional<int>& r) {
        return r ? std::to_string(*r) : std::string();
    };
    for (const auto& [key, bucket] : buckets) {
        auto journal_it = journal_by_key.find(key);
        if (journal_it == journal_by_key.end()) {
            throw InputError("manifest journal \"" + key + "\" not found in journals.jsonl");
        }
        const JournalRecord& journal = *journal_it->second;

        std::unordered_map<std::string, const ArticleRecord*> article_by_id;
        for (const auto& article : journal.articles) article_by_id[article.article_id] = &article;

        std::vector<double> score_values;
        std::vector<long long> citations;
        for (const auto& article_id : bucket.article_ids) {
            auto article_it = article_by_id.find(article_id);
            if (article_it == article_by_id.end()) {
                throw InputError("manifest article " + article_id + " not found in journal \"" +
                                 key + "\"");
            }
            citations.push_back(article_it->second->citation_count);
            auto score_it = scores.find(article_id);
            if (score_it != scores.end() && score_it->second.final_score) {
                score_values.push_back(*score_it->second.final_score);
            }
        }
        if (score_values.empty()) {
            log += "skipped journal \"" + key + "\": no scored articles\n";
            continue;
        }
        double jqf_value = journal_quality_factor(score_values);
        double jcr_value = journal_citation_rate(citations);
        out += csv::join({key, std::to_string(bucket.field_code),
                          csv::format_double(jqf_value), csv::format_double(jcr_value),
                          std::to_string(score_values.size()), rank_cell(journal.rank_fi),
                          rank_cell(journal.rank_no), rank_cell(journal.rank_pl)}) +
               "\n";
    }
    csv::write_file(run_dir / "indicators.csv", out);
    csv::write_file(run_dir / "indicators_log.txt", log);
}

namespace {

std::optional<int> parse_rank_cell(const std::string& cell) {
    if (cell.empty()) return std::nullopt;
    return std::stoi(cell);
}

std::vector<JournalStats> read_indicators(const std::filesystem::path& path) {
    csv::Reader reader(csv::read_file(path));
    auto header = reader.next();
    if (!header || header->size() != 8 || (*header)[0] != "journal") {
        throw InputError("indicators " + path.string() + ": unexpected header");
    }
    std::vector<JournalStats> rows;
    while (auto row = reader.next()) {
        JournalStats stats;
        stats.journal_key = (*row)[0];
        stats.field_code = std::stoi((*row)[1]);
        stats.jqf = std::stod((*row)[2]);
        stats.jcr = std::stod((*row)[3]);
        stats.n_scored = std::stoi((*row)[4]);
        stats.rank_fi = parse_rank_cell((*row)[5]);
        stats.rank_no = parse_rank_cell((*row)[6]);
        stats.rank_pl = parse_rank_cell((*row)[7]);
        rows.push_back(std::move(stats));
    }
    return rows;
}

} // namespace

std::vector<FieldAnalysis> analyze_fields(const std::filesystem::path& run_dir,
                                          const PipelineConfig& config) {
    std::vector<JournalStats> rows = read_indicators(run_dir / "indicators.csv");

    std::unordered_map<std::string, int> manifest_counts;
    auto manifest_path = run_dir / "manifest.csv";
    if (std::filesystem::exists(manifest_path)) {
        for (const auto& row : read_manifest(manifest_path)) ++manifest_counts[row.journal_key];
    }
    for (auto& row : rows) {
        auto it = manifest_counts.find(row.journal_key);
        row.n_articles = it != manifest_counts.end() ? it->second : row.n_scored;
    }

    std::map<int, std::vector<JournalStats>> by_field;
    for (auto& row : rows) by_field[row.field_code].push_back(std::move(row));

    std::vector<FieldAnalysis> fields;
    for (auto& [field_code, field_rows] : by_field) {
        FieldAnalysis analysis;
        analysis.report = field_report(field_rows, field_code);
        analysis.journals = std::move(field_rows);
        fields.push_back(std::move(analysis));
    }

    // outlier pass: the lowest-correlation fields, excluding small ones
    std::vector<FieldAnalysis*> eligible;
    for (auto& field : fields) {
        if (field.report.excluded) continue;
        if (field.report.n_journals < config.outlier_min_journals) continue;
        if (!field.report.median_jqf) continue;
        eligible.push_back(&field);
    }
    std::sort(eligible.begin(), eligible.end(), [](const FieldAnalysis* a, const FieldAnalysis* b) {
        if (*a->report.median_jqf != *b->report.median_jqf) {
            return *a->report.median_jqf < *b->report.median_jqf;
        }
        return a->report.field_code < b->report.field_code;
    });
    if (eligible.size() > static_cast<std::size_t>(std::max(0, config.outlier_lowest_fields))) {
        eligible.resize(static_cast<std::size_t>(std::max(0, config.outlier_lowest_fields)));
    }
    for (FieldAnalysis* field : eligible) {
        std::vector<OutlierPoint> points;
        for (const auto& row : field->journals) {
            if (row.rank_pl) points.push_back({row.journal_key, row.jqf, *row.rank_pl});
        }
        try {
            field->outliers = detect_outliers(points, config.outlier_threshold_z);
        } catch (const InputError&) {
            // not enough PL-ranked journals or a degenerate spread: no flags
        }
    }
    return fields;
}

namespace {

std::vector<FieldAnalysis> run_report_stage(const std::filesystem::path& run_dir,
                                            const PipelineConfig& config, EmitOptions options) {
    std::vector<FieldAnalysis> fields = analyze_fields(run_dir, config);

    RunManifest manifest;
    manifest.master_seed = config.plan.master_seed;
    manifest.year = config.year;
    manifest.backend = std::string(to_string(config.backend.kind));
    manifest.model_id = config.backend.model_id;
    manifest.plan = config.plan;
    manifest.qualify_on_raw = config.prep.qualify_on_raw;
    manifest.bootstrap_resamples = config.bootstrap_resamples;
    manifest.outlier_threshold_z = config.outlier_threshold_z;
    manifest.outlier_min_journals = config.outlier_min_journals;
    manifest.outlier_lowest_fields = config.outlier_lowest_fields;

    auto inputs_path = run_dir / "inputs.json";
    if (std::filesystem::exists(inputs_path)) {
        json digests = json::parse(csv::read_file(inputs_path));
        for (const auto& [name, entry] : digests.items()) {
            manifest.input_digests[name] = entry.at("sha256").get<std::string>();
        }
    }

    options.dir = run_dir;
    emit_report(fields, manifest, options);
    return fields;
}

} // namespace

std::vector<FieldAnalysis> stage_correlate(const std::filesystem::path& run_dir,
                                           const PipelineConfig& config) {
    EmitOptions options;
    options.scatter = false;
    options.outliers = false;
    options.manifest = false;
    return run_report_stage(run_dir, config, options);
}

std::vector<FieldAnalysis> stage_outliers(const std::filesystem::path& run_dir,
                                          const PipelineConfig& config) {
    EmitOptions options;
    options.summary = false;
    options.scatter = false;
    options.manifest = false;
    return run_report_stage(run_dir, config, options);
}

std::vector<FieldAnalysis> stage_report(const std::filesystem::path& run_dir,
                                        const PipelineConfig& config) {
    EmitOptions options;
    options.svg = config.write_svg;
    return run_report_stage(run_dir, config, options);
}

} // namespace jqf
