#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jqf/indicators.hpp"
#include "jqf/sampling.hpp"

namespace jqf {

/// One journal's indicators joined with its national ranks; the row format of
/// indicators.csv.
struct JournalStats {
    std::string journal_key;
    int field_code = 0;
    double jqf = 0.0;
    double jcr = 0.0;
    int n_scored = 0;
    int n_articles = 0;
    std::optional<int> rank_fi;
    std::optional<int> rank_no;
    std::optional<int> rank_pl;
};

/// Per-field correlation table: JQF and JCR against the three rank schemes
/// (pairwise deletion per scheme), their medians, and the JQF-JCR Pearson.
struct FieldReport {
    int field_code = 0;
    int n_journals = 0;
    std::array<std::optional<Correlation>, 3> spearman_jqf; // FI, NO, PL
    std::array<std::optional<Correlation>, 3> spearman_jcr;
    std::optional<double> median_jqf;
    std::optional<double> median_jcr;
    std::optional<Correlation> pearson_jqf_jcr;
    bool excluded = false;
    std::string exclusion_reason;
};

/// Fields with fewer than 6 journals are marked excluded (all slots absent);
/// a scheme's slot is also absent when fewer than 6 journals carry that rank
/// or the correlation is undefined on them.
FieldReport field_report(const std::vector<JournalStats>& rows, int field_code);

struct CorrelationDelta {
    double delta = 0.0; // r_a - r_b on the original sample
    double ci_lo = 0.0; // percentile 95% bootstrap interval
    double ci_hi = 0.0;
    int resamples = 0; // valid resamples used
};

/// Paired bootstrap over journals for two correlations against the same ys:
/// resamples journals with replacement, recomputes both, and reports
/// delta = r_a - r_b with a percentile CI. Deterministic given the seed;
/// identical columns give delta 0 with CI [0,0] for every seed.
CorrelationDelta compare_correlations(std::span<const double> xs_a, std::span<const double> xs_b,
                                      std::span<const double> ys, CorrMethod method,
                                      int resamples, std::uint64_t seed);

enum class OutlierDirection { AnomalouslyHigh, AnomalouslyLow };

std::string_view to_string(OutlierDirection direction);

struct OutlierPoint {
    std::string journal_key;
    double jqf = 0.0;
    int pl_points = 0;
};

struct OutlierFlag {
    std::string journal_key;
    OutlierDirection direction = OutlierDirection::AnomalouslyHigh;
    double residual_z = 0.0;
    double jqf = 0.0;
    int pl_points = 0;
};

/// Trend-breaking journals: regresses jqf on rank_with_ties(pl_points) and
/// flags |internally studentized residual| >= threshold_z. Rank-based, so any
/// strictly increasing relabeling of the points that preserves ties gives the
/// same flags. Throws for n < 10 or constant points.
std::vector<OutlierFlag> detect_outliers(const std::vector<OutlierPoint>& points,
                                         double threshold_z = 2.0);

struct FieldAnalysis {
    FieldReport report;
    std::vector<JournalStats> journals;
    std::vector<OutlierFlag> outliers;
};

/// Everything needed to reproduce a run; serialized as manifest.json.
/// Deliberately carries no timestamps so reruns are byte-identical.
struct RunManifest {
    std::uint64_t master_seed = 0;
    int year = 0;
    std::string backend;
    std::string model_id;
    SamplePlan plan;
    bool qualify_on_raw = false;
    int bootstrap_resamples = 10000;
    double outlier_threshold_z = 2.0;
    int outlier_min_journals = 10;
    int outlier_lowest_fields = 5;
    std::map<std::string, std::string> input_digests; // input name -> sha256
};

struct EmitOptions {
    std::filesystem::path dir;
    bool svg = false;
    bool summary = true;  // field_summary.csv + correlations.csv
    bool scatter = true;  // per-field scatter CSVs (+ SVGs when svg is set)
    bool outliers = true; // outliers.csv
    bool manifest = true; // manifest.json
};

/// Writes field_summary.csv (per-field rows plus an all-fields median row),
/// correlations.csv (long format), one scatter CSV per analyzed field,
/// outliers.csv, manifest.json and optional SVG scatter plots. Returns the
/// paths written. Reruns on identical inputs produce byte-identical files.
std::vector<std::filesystem::path> emit_report(const std::vector<FieldAnalysis>& fields,
                                               const RunManifest& manifest,
                                               const EmitOptions& options);

} // namespace jqf
