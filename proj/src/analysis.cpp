#include "jqf/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"

#include "jqf/csv.hpp"
#include "jqf/errors.hpp"
#include "jqf/rng.hpp"

namespace jqf {

namespace {

using nlohmann::json;

constexpr std::array<RankScheme, 3> kSchemes = {RankScheme::FI, RankScheme::NO, RankScheme::PL};

std::optional<int> rank_of(const JournalStats& row, RankScheme scheme) {
    switch (scheme) {
    case RankScheme::FI: return row.rank_fi;
    case RankScheme::NO: return row.rank_no;
    case RankScheme::PL: return row.rank_pl;
    }
    return std::nullopt;
}

std::optional<Correlation> spearman_against_rank(const std::vector<JournalStats>& rows,
                                                 RankScheme scheme, bool use_jcr) {
    std::vector<double> xs, ys;
    for (const auto& row : rows) {
        auto rank = rank_of(row, scheme);
        if (!rank) continue; // pairwise deletion: unlisted journals are missing data
        xs.push_back(use_jcr ? row.jcr : row.jqf);
        ys.push_back(static_cast<double>(*rank));
    }
    if (xs.size() < 6) return std::nullopt;
    try {
        return spearman(xs, ys);
    } catch (const InputError&) {
        return std::nullopt; // constant column: correlation undefined for this scheme
    }
}

std::array<std::optional<double>, 3> r_values(const std::array<std::optional<Correlation>, 3>& slots) {
    std::array<std::optional<double>, 3> out;
    for (std::size_t i = 0; i < 3; ++i) {
        if (slots[i]) out[i] = slots[i]->r;
    }
    return out;
}

} // namespace

std::string_view to_string(OutlierDirection direction) {
    switch (direction) {
    case OutlierDirection::AnomalouslyHigh: return "high";
    case OutlierDirection::AnomalouslyLow: return "low";
    }
    return "?";
}

FieldReport field_report(const std::vector<JournalStats>& rows, int field_code) {
    FieldReport report;
    report.field_code = field_code;
    report.n_journals = static_cast<int>(rows.size());
    for (const auto& row : rows) {
        if (row.field_code != field_code) {
            throw InputError("field_report: journal \"" + row.journal_key + "\" carries field " +
                             std::to_string(row.field_code) + ", expected " +
                             std::to_string(field_code));
        }
    }
    if (rows.size() < 6) {
        report.excluded = true;
        report.exclusion_reason = "excluded from correlation analysis: " +
                                  std::to_string(rows.size()) + " journal(s), need at least 6";
        return report;
    }

    for (std::size_t i = 0; i < kSchemes.size(); ++i) {
        report.spearman_jqf[i] = spearman_against_rank(rows, kSchemes[i], /*use_jcr=*/false);
        report.spearman_jcr[i] = spearman_against_rank(rows, kSchemes[i], /*use_jcr=*/true);
    }
    report.median_jqf = median_correlation(r_values(report.spearman_jqf));
    report.median_jcr = median_correlation(r_values(report.spearman_jcr));

    std::vector<double> jqfs, jcrs;
    for (const auto& row : rows) {
        jqfs.push_back(row.jqf);
        jcrs.push_back(row.jcr);
    }
    try {
        report.pearson_jqf_jcr = pearson(jqfs, jcrs);
    } catch (const InputError&) {
        report.pearson_jqf_jcr = std::nullopt;
    }
    return report;
}

namespace {

double percentile(const std::vector<double>& sorted, double q) {
    double pos = q * static_cast<double>(sorted.size() - 1);
    auto lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= sorted.size()) return sorted.back();
    double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

} // namespace

CorrelationDelta compare_correlations(std::span<const double> xs_a, std::span<const double> xs_b,
                                      std::span<const double> ys, CorrMethod method,
                                      int resamples, std::uint64_t seed) {
    if (xs_a.size() != ys.size() || xs_b.size() != ys.size()) {
        throw InputError("compare_correlations: length mismatch");
    }
    const std::size_t n = ys.size();
    if (n < 10) throw InputError("compare_correlations: need at least 10 paired journals");
    if (resamples < 1000) throw InputError("compare_correlations: need at least 1000 resamples");

    auto corr = [method](std::span<const double> x, std::span<const double> y) {
        return (method == CorrMethod::Spearman ? spearman(x, y) : pearson(x, y)).r;
    };

    CorrelationDelta result;
    result.delta = corr(xs_a, ys) - corr(xs_b, ys);

    std::vector<double> deltas;
    deltas.reserve(static_cast<std::size_t>(resamples));
    std::vector<double> ra(n), rb(n), ry(n);
    for (int t = 0; t < resamples; ++t) {
        Rng rng(substream_seed(seed, "resample:" + std::to_string(t)));
        for (std::size_t i = 0; i < n; ++i) {
            auto k = static_cast<std::size_t>(rng.below(n));
            ra[i] = xs_a[k];
            rb[i] = xs_b[k];
            ry[i] = ys[k];
        }
        try {
            deltas.push_back(corr(ra, ry) - corr(rb, ry));
        } catch (const InputError&) {
            // degenerate resample (constant column after the draw): skip it
        }
    }
    if (deltas.empty()) throw InputError("compare_correlations: every resample was degenerate");

    std::sort(deltas.begin(), deltas.end());
    result.ci_lo = percentile(deltas, 0.025);
    result.ci_hi = percentile(deltas, 0.975);
    result.resamples = static_cast<int>(deltas.size());
    return result;
}

std::vector<OutlierFlag> detect_outliers(const std::vector<OutlierPoint>& points,
                                         double threshold_z) {
    const std::size_t n = points.size();
    if (n < 10) throw InputError("detect_outliers: need at least 10 journals");

    bool constant = true;
    for (const auto& p : points) {
        if (p.pl_points != points.front().pl_points) constant = false;
    }
    if (constant) throw InputError("detect_outliers: constant rank points");

    std::vector<double> raw(n);
    for (std::size_t i = 0; i < n; ++i) raw[i] = static_cast<double>(points[i].pl_points);
    std::vector<double> xs = rank_with_ties(raw);

    double mean_x = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_x += xs[i];
        mean_y += points[i].jqf;
    }
    mean_x /= static_cast<double>(n);
    mean_y /= static_cast<double>(n);

    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = xs[i] - mean_x;
        double dy = points[i].jqf - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    double slope = sxy / sxx;
    double intercept = mean_y - slope * mean_x;

    std::vector<double> residuals(n);
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        residuals[i] = points[i].jqf - (intercept + slope * xs[i]);
        rss += residuals[i] * residuals[i];
    }
    // residual variance at rounding-noise level counts as a perfect fit
    if (syy == 0.0 || rss <= 1e-12 * syy) return {};
    double s2 = rss / static_cast<double>(n - 2);

    std::vector<OutlierFlag> flags;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = xs[i] - mean_x;
        double leverage = 1.0 / static_cast<double>(n) + dx * dx / sxx;
        double denom = s2 * (1.0 - leverage);
        if (denom <= 0.0) continue; // the point determines the fit; residual is 0 anyway
        double t = residuals[i] / std::sqrt(denom);
        if (std::abs(t) < threshold_z) continue;
        flags.push_back({points[i].journal_key,
                         residuals[i] > 0 ? OutlierDirection::AnomalouslyHigh
                                          : OutlierDirection::AnomalouslyLow,
                         t, points[i].jqf, points[i].pl_points});
    }
    std::sort(flags.begin(), flags.end(), [](const OutlierFlag& a, const OutlierFlag& b) {
        if (std::abs(a.residual_z) != std::abs(b.residual_z)) {
            return std::abs(a.residual_z) > std::abs(b.residual_z);
        }
        return a.journal_key < b.journal_key;
    });
    return flags;
}

// ---------------------------------------------------------------------------
// Report emission
// ---------------------------------------------------------------------------

namespace {

std::string opt_cell(const std::optional<double>& v) {
    return v ? csv::format_double(*v) : std::string();
}

std::string opt_rank_cell(const std::optional<int>& v) {
    return v ? std::to_string(*v) : std::string();
}

void append_slot_cells(std::vector<std::string>& cells,
                       const std::optional<Correlation>& slot) {
    if (slot) {
        cells.push_back(csv::format_double(slot->r));
        cells.push_back(std::to_string(slot->n));
    } else {
        cells.emplace_back();
        cells.emplace_back();
    }
}

std::optional<double> column_median(std::vector<double> values) {
    if (values.empty()) return std::nullopt;
    std::sort(values.begin(), values.end());
    std::size_t mid = values.size() / 2;
    if (values.size() % 2 == 1) return values[mid];
    return (values[mid - 1] + values[mid]) / 2.0;
}

std::string field_summary_csv(const std::vector<FieldAnalysis>& fields) {
    std::string out =
        "field_code,field_label,n_journals,"
        "jqf_fi_r,jqf_fi_n,jqf_no_r,jqf_no_n,jqf_pl_r,jqf_pl_n,median_jqf,"
        "jcr_fi_r,jcr_fi_n,jcr_no_r,jcr_no_n,jcr_pl_r,jcr_pl_n,median_jcr,"
        "jqf_jcr_r,jqf_jcr_n,jqf_jcr_p,excluded,reason\n";

    std::array<std::vector<double>, 3> all_jqf, all_jcr;
    std::vector<double> all_median_jqf, all_median_jcr, all_pearson;

    for (const auto& field : fields) {
        const FieldReport& rep = field.report;
        std::vector<std::string> cells;
        cells.push_back(std::to_string(rep.field_code));
        cells.push_back(scopus_field_label(rep.field_code));
        cells.push_back(std::to_string(rep.n_journals));
        for (std::size_t i = 0; i < 3; ++i) {
            append_slot_cells(cells, rep.spearman_jqf[i]);
            if (rep.spearman_jqf[i]) all_jqf[i].push_back(rep.spearman_jqf[i]->r);
        }
        cells.push_back(opt_cell(rep.median_jqf));
        if (rep.median_jqf) all_median_jqf.push_back(*rep.median_jqf);
        for (std::size_t i = 0; i < 3; ++i) {
            append_slot_cells(cells, rep.spearman_jcr[i]);
            if (rep.spearman_jcr[i]) all_jcr[i].push_back(rep.spearman_jcr[i]->r);
        }
        cells.push_back(opt_cell(rep.median_jcr));
        if (rep.median_jcr) all_median_jcr.push_back(*rep.median_jcr);
        if (rep.pearson_jqf_jcr) {
            cells.push_back(csv::format_double(rep.pearson_jqf_jcr->r));
            cells.push_back(std::to_string(rep.pearson_jqf_jcr->n));
            cells.push_back(rep.pearson_jqf_jcr->p ? csv::format_double(*rep.pearson_jqf_jcr->p)
                                                   : std::string());
            all_pearson.push_back(rep.pearson_jqf_jcr->r);
        } else {
            cells.emplace_back();
            cells.emplace_back();
            cells.emplace_back();
        }
        cells.push_back(rep.excluded ? "yes" : "no");
        cells.push_back(rep.exclusion_reason);
        out += csv::join(cells) + "\n";
    }

    // closing row: median of each correlation column across fields
    std::vector<std::string> cells;
    cells.emplace_back();
    cells.emplace_back("All (median across fields)");
    cells.emplace_back();
    for (std::size_t i = 0; i < 3; ++i) {
        cells.push_back(opt_cell(column_median(all_jqf[i])));
        cells.emplace_back();
    }
    cells.push_back(opt_cell(column_median(all_median_jqf)));
    for (std::size_t i = 0; i < 3; ++i) {
        cells.push_back(opt_cell(column_median(all_jcr[i])));
        cells.emplace_back();
    }
    cells.push_back(opt_cell(column_median(all_median_jcr)));
    cells.push_back(opt_cell(column_median(all_pearson)));
    cells.emplace_back();
    cells.emplace_back();
    cells.emplace_back();
    cells.emplace_back();
    out += csv::join(cells) + "\n";
    return out;
}

void append_correlation_row(std::string& out, int field_code, std::string_view indicator,
                            std::string_view scheme, const Correlation& corr) {
    std::vector<std::string> cells = {
        std::to_string(field_code), scopus_field_label(field_code),
        std::string(indicator),     std::string(scheme),
        corr.method == CorrMethod::Spearman ? "spearman" : "pearson",
        csv::format_double(corr.r), std::to_string(corr.n),
    };
    if (corr.ci95) {
        cells.push_back(csv::format_double(corr.ci95->first));
        cells.push_back(csv::format_double(corr.ci95->second));
    } else {
        cells.emplace_back();
        cells.emplace_back();
    }
    cells.push_back(corr.p ? csv::format_double(*corr.p) : std::string());
    out += csv::join(cells) + "\n";
}

std::string correlations_csv(const std::vector<FieldAnalysis>& fields) {
    std::string out = "field_code,field_label,indicator,scheme,method,r,n,ci_lo,ci_hi,p\n";
    constexpr std::array<std::string_view, 3> scheme_names = {"fi", "no", "pl"};
    for (const auto& field : fields) {
        const FieldReport& rep = field.report;
        for (std::size_t i = 0; i < 3; ++i) {
            if (rep.spearman_jqf[i]) {
                append_correlation_row(out, rep.field_code, "jqf", scheme_names[i],
                                       *rep.spearman_jqf[i]);
            }
        }
        for (std::size_t i = 0; i < 3; ++i) {
            if (rep.spearman_jcr[i]) {
                append_correlation_row(out, rep.field_code, "jcr", scheme_names[i],
                                       *rep.spearman_jcr[i]);
            }
        }
        if (rep.pearson_jqf_jcr) {
            append_correlation_row(out, rep.field_code, "jqf_vs_jcr", "", *rep.pearson_jqf_jcr);
        }
    }
    return out;
}

std::string scatter_csv(const FieldAnalysis& field) {
    std::string out = "journal,jqf,jcr,rank_fi,rank_no,rank_pl,outlier,residual_z\n";
    for (const auto& row : field.journals) {
        std::string flag, z;
        for (const auto& outlier : field.outliers) {
            if (outlier.journal_key == row.journal_key) {
                flag = std::string(to_string(outlier.direction));
                z = csv::format_double(outlier.residual_z);
                break;
            }
        }
        out += csv::join({row.journal_key, csv::format_double(row.jqf),
                          csv::format_double(row.jcr), opt_rank_cell(row.rank_fi),
                          opt_rank_cell(row.rank_no), opt_rank_cell(row.rank_pl), flag, z}) +
               "\n";
    }
    return out;
}

std::string outliers_csv(const std::vector<FieldAnalysis>& fields) {
    std::string out = "field_code,journal,direction,residual_z,jqf,pl_points\n";
    for (const auto& field : fields) {
        for (const auto& outlier : field.outliers) {
            out += csv::join({std::to_string(field.report.field_code), outlier.journal_key,
                              std::string(to_string(outlier.direction)),
                              csv::format_double(outlier.residual_z),
                              csv::format_double(outlier.jqf),
                              std::to_string(outlier.pl_points)}) +
                   "\n";
        }
    }
    return out;
}

std::string scatter_svg(const FieldAnalysis& field) {
    constexpr double width = 640, height = 480, margin = 56;
    std::vector<const JournalStats*> rows;
    for (const auto& row : field.journals) {
        if (row.rank_pl) rows.push_back(&row);
    }

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
        << scopus_field_label(field.report.field_code) << ": JQF vs Polish points</text>\n";
    if (!rows.empty()) {
        int min_pl = rows.front()->rank_pl.value(), max_pl = min_pl;
        for (const auto* row : rows) {
            min_pl = std::min(min_pl, row->rank_pl.value());
            max_pl = std::max(max_pl, row->rank_pl.value());
        }
        double span_pl = std::max(1, max_pl - min_pl);
        auto x_of = [&](int pl) {
            return margin + (width - 2 * margin) * (pl - min_pl) / span_pl;
        };
        auto y_of = [&](double jqf) {
            return height - margin - (height - 2 * margin) * (jqf - 1.0) / 3.0;
        };
        svg << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\""
            << width - margin << "\" y2=\"" << height - margin
            << "\" stroke=\"black\"/>\n";
        svg << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin
            << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << width / 2 << "\" y=\"" << height - 16
            << "\" text-anchor=\"middle\" font-size=\"12\">Polish points</text>\n";
        svg << "<text x=\"16\" y=\"" << height / 2 << "\" font-size=\"12\" text-anchor=\"middle\""
            << " transform=\"rotate(-90 16 " << height / 2 << ")\">JQF</text>\n";
        for (const auto* row : rows) {
            bool flagged = false;
            for (const auto& outlier : field.outliers) {
                if (outlier.journal_key == row->journal_key) flagged = true;
            }
            svg << "<circle cx=\"" << x_of(row->rank_pl.value()) << "\" cy=\""
                << y_of(row->jqf) << "\" r=\"4\" fill=\""
                << (flagged ? "crimson" : "steelblue") << "\" fill-opacity=\"0.8\"/>\n";
        }
    }
    svg << "</svg>\n";
    return svg.str();
}

json manifest_json(const RunManifest& manifest) {
    return json{
        {"master_seed", manifest.master_seed},
        {"year", manifest.year},
        {"backend", manifest.backend},
        {"model_id", manifest.model_id},
        {"plan",
         {{"max_journals_per_field", manifest.plan.max_journals_per_field},
          {"articles_per_journal", manifest.plan.articles_per_journal},
          {"min_qualifying_articles", manifest.plan.min_qualifying_articles}}},
        {"qualify_on_raw", manifest.qualify_on_raw},
        {"bootstrap_resamples", manifest.bootstrap_resamples},
        {"outliers",
         {{"threshold_z", manifest.outlier_threshold_z},
          {"min_journals", manifest.outlier_min_journals},
          {"lowest_fields", manifest.outlier_lowest_fields}}},
        {"input_digests", manifest.input_digests},
    };
}

} // namespace

std::vector<std::filesystem::path> emit_report(const std::vector<FieldAnalysis>& fields,
                                               const RunManifest& manifest,
                                               const EmitOptions& options) {
    std::vector<FieldAnalysis> ordered = fields;
    std::sort(ordered.begin(), ordered.end(), [](const FieldAnalysis& a, const FieldAnalysis& b) {
        return a.report.field_code < b.report.field_code;
    });
    for (auto& field : ordered) {
        std::sort(field.journals.begin(), field.journals.end(),
                  [](const JournalStats& a, const JournalStats& b) {
                      return a.journal_key < b.journal_key;
                  });
    }

    std::filesystem::create_directories(options.dir);
    std::vector<std::filesystem::path> written;
    auto emit = [&](const std::filesystem::path& name, const std::string& content) {
        auto path = options.dir / name;
        csv::write_file(path, content);
        written.push_back(path);
    };

    if (options.summary) {
        emit("field_summary.csv", field_summary_csv(ordered));
        emit("correlations.csv", correlations_csv(ordered));
    }
    if (options.scatter) {
        for (const auto& field : ordered) {
            if (field.report.excluded) continue;
            std::string stem = "scatter_field_" + std::to_string(field.report.field_code);
            emit(stem + ".csv", scatter_csv(field));
            if (options.svg) emit(stem + ".svg", scatter_svg(field));
        }
    }
    if (options.outliers) emit("outliers.csv", outliers_csv(ordered));
    if (options.manifest) emit("manifest.json", manifest_json(manifest).dump(2) + "\n");
    return written;
}

} // namespace jqf
