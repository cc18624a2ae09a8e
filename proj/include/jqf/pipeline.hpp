#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "jqf/analysis.hpp"
#include "jqf/corpus.hpp"
#include "jqf/prep.hpp"
#include "jqf/sampling.hpp"
#include "jqf/scoring.hpp"

namespace jqf {

/// Everything a full run needs; the CLI builds this from flags and the
/// optional JSON config file.
struct PipelineConfig {
    int year = 2021;
    SamplePlan plan;
    PrepOptions prep;
    BackendConfig backend;
    int bootstrap_resamples = 10000;
    double outlier_threshold_z = 2.0;
    int outlier_min_journals = 10;
    int outlier_lowest_fields = 5;
    bool write_svg = false;
};

struct IngestInputs {
    std::filesystem::path articles;
    std::optional<std::filesystem::path> rank_fi;
    std::optional<std::filesystem::path> rank_no;
    std::optional<std::filesystem::path> rank_pl;
};

/// Parses the dump and ranking lists, links journals, and writes
/// journals.jsonl, match_log.txt and inputs.json (input digests) under
/// run_dir. Returns the journal count.
std::size_t stage_ingest(const IngestInputs& inputs, int year,
                         const std::filesystem::path& run_dir);

/// Cleans and qualifies every article of every ingested journal; writes
/// prepared.jsonl (prompts included for qualifying articles).
void stage_prepare(const std::filesystem::path& run_dir, const PrepOptions& options);

/// Drops journals under the qualifying-article minimum, caps each field,
/// samples articles per journal, and writes manifest.csv (field,journal,
/// article_id) plus sampled_journals.csv.
void stage_sample(const std::filesystem::path& run_dir, const SamplePlan& plan);

/// Scores every manifest row through the configured backend; writes
/// scores.csv and adjudication_queue.csv (raw reports for queued articles go
/// to adjudication_reports/).
ScoringRunResult stage_score(const std::filesystem::path& run_dir,
                             const std::filesystem::path& guideline_dir,
                             const BackendConfig& backend_config,
                             const std::optional<std::filesystem::path>& adjudications_csv);

/// Computes per-journal JQF/JCR and writes indicators.csv
/// (journal,field,jqf,jcr,n_scored,rank_fi,rank_no,rank_pl).
void stage_indicators(const std::filesystem::path& run_dir);

/// Loads indicators.csv and assembles per-field analyses (correlations plus
/// outlier flags for the lowest-correlation fields).
std::vector<FieldAnalysis> analyze_fields(const std::filesystem::path& run_dir,
                                          const PipelineConfig& config);

/// Writes field_summary.csv and correlations.csv.
std::vector<FieldAnalysis> stage_correlate(const std::filesystem::path& run_dir,
                                           const PipelineConfig& config);

/// Writes outliers.csv.
std::vector<FieldAnalysis> stage_outliers(const std::filesystem::path& run_dir,
                                          const PipelineConfig& config);

/// Full report: summary, correlations, scatter CSVs (and SVGs on request),
/// outliers and manifest.json.
std::vector<FieldAnalysis> stage_report(const std::filesystem::path& run_dir,
                                        const PipelineConfig& config);

/// Round-trip helpers for the run-directory files.
void write_journals(const std::filesystem::path& path, const std::vector<JournalRecord>& journals);
std::vector<JournalRecord> read_journals(const std::filesystem::path& path);

std::string sha256_file(const std::filesystem::path& path);

} // namespace jqf
