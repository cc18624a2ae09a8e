#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "jqf/csv.hpp"
#include "jqf/errors.hpp"
#include "jqf/pipeline.hpp"

namespace {

using nlohmann::json;

struct CliOptions {
    std::filesystem::path run_dir = "run";
    std::uint64_t seed = 0;
    int year = 2021;
    std::optional<std::filesystem::path> config_file;
    std::optional<std::filesystem::path> markers_file;
    jqf::PipelineConfig pipeline;
};

// config file values fill the gaps; explicit flags already sit in `options`
// and always win because the file is applied only to non-passed fields
void apply_config_file(CliOptions& options, const CLI::App& app) {
    if (!options.config_file) return;
    json config = json::parse(jqf::csv::read_file(*options.config_file));

    auto passed = [&](const std::string& flag) {
        const CLI::Option* opt = app.get_option_no_throw(flag);
        return opt && opt->count() > 0;
    };

    if (config.contains("markers_file") && !options.markers_file) {
        options.markers_file = config.at("markers_file").get<std::string>();
    }
    if (config.contains("qualify_on_raw") && !passed("--qualify-on-raw")) {
        options.pipeline.prep.qualify_on_raw = config.at("qualify_on_raw").get<bool>();
    }
    if (config.contains("plan")) {
        const json& plan = config.at("plan");
        auto& p = options.pipeline.plan;
        if (plan.contains("max_journals_per_field") && !passed("--max-journals-per-field")) {
            p.max_journals_per_field = plan.at("max_journals_per_field").get<int>();
        }
        if (plan.contains("articles_per_journal") && !passed("--sample-size")) {
            p.articles_per_journal = plan.at("articles_per_journal").get<int>();
        }
        if (plan.contains("min_qualifying_articles") && !passed("--min-articles")) {
            p.min_qualifying_articles = plan.at("min_qualifying_articles").get<int>();
        }
    }
    if (config.contains("backend")) {
        const json& backend = config.at("backend");
        auto& b = options.pipeline.backend;
        if (backend.contains("kind") && !passed("--backend")) {
            auto kind = jqf::backend_kind_from(backend.at("kind").get<std::string>());
            if (!kind) throw jqf::InputError("config: unknown backend kind");
            b.kind = *kind;
        }
        if (backend.contains("model_id") && !passed("--model")) {
            b.model_id = backend.at("model_id").get<std::string>();
        }
        if (backend.contains("cache_path") && !passed("--cache")) {
            b.cache_path = backend.at("cache_path").get<std::string>();
        }
        if (backend.contains("api_base") && !passed("--api-base")) {
            b.api_base = backend.at("api_base").get<std::string>();
        }
        if (backend.contains("max_concurrent_requests") && !passed("--max-concurrent")) {
            b.max_concurrent_requests = backend.at("max_concurrent_requests").get<int>();
        }
        if (backend.contains("requests_per_minute") && !passed("--rpm")) {
            b.requests_per_minute = backend.at("requests_per_minute").get<int>();
        }
        if (backend.contains("max_retries") && !passed("--max-retries")) {
            b.max_retries = backend.at("max_retries").get<int>();
        }
    }
    if (config.contains("bootstrap_resamples") && !passed("--resamples")) {
        options.pipeline.bootstrap_resamples = config.at("bootstrap_resamples").get<int>();
    }
    if (config.contains("outliers")) {
        const json& outliers = config.at("outliers");
        if (outliers.contains("threshold_z") && !passed("--threshold-z")) {
            options.pipeline.outlier_threshold_z = outliers.at("threshold_z").get<double>();
        }
        if (outliers.contains("min_journals") && !passed("--min-journals")) {
            options.pipeline.outlier_min_journals = outliers.at("min_journals").get<int>();
        }
        if (outliers.contains("lowest_fields") && !passed("--lowest-fields")) {
            options.pipeline.outlier_lowest_fields = outliers.at("lowest_fields").get<int>();
        }
    }
    if (config.contains("svg") && !passed("--svg")) {
        options.pipeline.write_svg = config.at("svg").get<bool>();
    }
}

void print_field_table(const std::vector<jqf::FieldAnalysis>& fields) {
    for (const auto& field : fields) {
        const auto& rep = field.report;
        if (rep.excluded) {
            std::printf("field %2d %-45s n=%-3d %s\n", rep.field_code,
                        jqf::scopus_field_label(rep.field_code).c_str(), rep.n_journals,
                        rep.exclusion_reason.c_str());
            continue;
        }
        auto fmt = [](const std::optional<double>& v) {
            return v ? jqf::csv::format_double(*v) : std::string("-");
        };
        std::printf("field %2d %-45s n=%-3d median_jqf=%s median_jcr=%s outliers=%zu\n",
                    rep.field_code, jqf::scopus_field_label(rep.field_code).c_str(),
                    rep.n_journals, fmt(rep.median_jqf).c_str(), fmt(rep.median_jcr).c_str(),
                    field.outliers.size());
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Journal quality factor pipeline: LLM-scored journal indicators, "
                 "citation rates and national-rank correlations"};
    app.require_subcommand(1);

    CliOptions options;
    app.add_option("--run", options.run_dir, "Run directory for pipeline files")
        ->capture_default_str();
    app.add_option("--seed", options.seed, "Master seed for sampling, bootstrap and mock scoring")
        ->capture_default_str();
    app.add_option("--year", options.year, "Publication year to analyze")->capture_default_str();
    app.add_option("--config", options.config_file, "JSON config file (flags take precedence)");

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Parse the article dump and ranking lists");
    jqf::IngestInputs inputs;
    ingest->add_option("--articles", inputs.articles, "Article dump (JSON lines)")->required();
    ingest->add_option("--rank-fi", [&inputs](const std::vector<std::string>& v) {
        inputs.rank_fi = v.front();
        return true;
    }, "Finnish ranking CSV");
    ingest->add_option("--rank-no", [&inputs](const std::vector<std::string>& v) {
        inputs.rank_no = v.front();
        return true;
    }, "Norwegian ranking CSV");
    ingest->add_option("--rank-pl", [&inputs](const std::vector<std::string>& v) {
        inputs.rank_pl = v.front();
        return true;
    }, "Polish ranking CSV");

    // prepare
    auto* prepare = app.add_subcommand("prepare", "Clean abstracts, qualify articles, build prompts");
    prepare->add_option("--markers", [&options](const std::vector<std::string>& v) {
        options.markers_file = v.front();
        return true;
    }, "Boilerplate marker list (one per line)");
    prepare->add_flag("--qualify-on-raw", options.pipeline.prep.qualify_on_raw,
                      "Measure the length threshold on raw instead of cleaned abstracts");

    // sample
    auto* sample = app.add_subcommand("sample", "Select journals per field and articles per journal");
    sample->add_option("--max-journals-per-field", options.pipeline.plan.max_journals_per_field,
                       "Field cap")->capture_default_str();
    sample->add_option("--sample-size", options.pipeline.plan.articles_per_journal,
                       "Articles per journal")->capture_default_str();
    sample->add_option("--min-articles", options.pipeline.plan.min_qualifying_articles,
                       "Minimum qualifying articles per journal")->capture_default_str();

    // score
    auto* score = app.add_subcommand("score", "Send prompts to the scoring backend");
    std::filesystem::path guideline_dir;
    std::optional<std::filesystem::path> adjudications;
    std::string backend_name = "mock";
    score->add_option("--guidelines", guideline_dir, "Directory with A.txt..D.txt system prompts")
        ->required();
    score->add_option("--backend", backend_name, "live|replay|mock")->capture_default_str();
    score->add_option("--model", options.pipeline.backend.model_id, "Model id")
        ->capture_default_str();
    score->add_option("--cache", [&options](const std::vector<std::string>& v) {
        options.pipeline.backend.cache_path = v.front();
        return true;
    }, "Response cache directory");
    score->add_option("--adjudications", [&adjudications](const std::vector<std::string>& v) {
        adjudications = v.front();
        return true;
    }, "Adjudication decision CSV (article_id,raw_report_path,score)");
    score->add_option("--max-concurrent", options.pipeline.backend.max_concurrent_requests,
                      "Concurrent requests")->capture_default_str();
    score->add_option("--rpm", options.pipeline.backend.requests_per_minute,
                      "Requests per minute (0 = unlimited)")->capture_default_str();
    score->add_option("--max-retries", options.pipeline.backend.max_retries,
                      "Retries for transient failures")->capture_default_str();
    score->add_option("--api-base", options.pipeline.backend.api_base, "Chat-completions base URL")
        ->capture_default_str();

    // indicators / correlate / outliers / report
    auto* indicators = app.add_subcommand("indicators", "Compute per-journal JQF and JCR");
    auto* correlate = app.add_subcommand("correlate", "Per-field correlations and medians");
    correlate->add_option("--resamples", options.pipeline.bootstrap_resamples,
                          "Bootstrap resamples")->capture_default_str();
    auto* outliers = app.add_subcommand("outliers", "Flag trend-breaking journals");
    auto* report = app.add_subcommand("report", "Full report: summary, scatter data, manifest");
    for (CLI::App* sub : {outliers, report}) {
        sub->add_option("--threshold-z", options.pipeline.outlier_threshold_z,
                        "Studentized-residual flag threshold")->capture_default_str();
        sub->add_option("--lowest-fields", options.pipeline.outlier_lowest_fields,
                        "How many low-correlation fields to scan")->capture_default_str();
        sub->add_option("--min-journals", options.pipeline.outlier_min_journals,
                        "Minimum journals for outlier analysis")->capture_default_str();
    }
    report->add_option("--resamples", options.pipeline.bootstrap_resamples, "Bootstrap resamples");
    report->add_flag("--svg", options.pipeline.write_svg, "Also write SVG scatter plots");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        apply_config_file(options, app);
        options.pipeline.year = options.year;
        options.pipeline.plan.master_seed = options.seed;
        options.pipeline.backend.mock_seed = options.seed;
        if (options.markers_file) {
            options.pipeline.prep.markers = jqf::load_marker_list(*options.markers_file);
        }
        if (auto kind = jqf::backend_kind_from(backend_name)) {
            options.pipeline.backend.kind = *kind;
        } else {
            throw jqf::InputError("unknown backend \"" + backend_name + "\"");
        }

        if (ingest->parsed()) {
            std::size_t count = jqf::stage_ingest(inputs, options.year, options.run_dir);
            std::printf("ingested %zu journals into %s\n", count, options.run_dir.string().c_str());
        } else if (prepare->parsed()) {
            jqf::stage_prepare(options.run_dir, options.pipeline.prep);
            std::printf("prepared articles written to %s\n",
                        (options.run_dir / "prepared.jsonl").string().c_str());
        } else if (sample->parsed()) {
            jqf::stage_sample(options.run_dir, options.pipeline.plan);
            std::printf("sample manifest written to %s\n",
                        (options.run_dir / "manifest.csv").string().c_str());
        } else if (score->parsed()) {
            auto result = jqf::stage_score(options.run_dir, guideline_dir,
                                           options.pipeline.backend, adjudications);
            std::printf("scored %zu articles; %zu queued for adjudication\n",
                        result.reports.size(), result.adjudication_queue.size());
        } else if (indicators->parsed()) {
            jqf::stage_indicators(options.run_dir);
            std::printf("indicators written to %s\n",
                        (options.run_dir / "indicators.csv").string().c_str());
        } else if (correlate->parsed()) {
            auto fields = jqf::stage_correlate(options.run_dir, options.pipeline);
            print_field_table(fields);
        } else if (outliers->parsed()) {
            auto fields = jqf::stage_outliers(options.run_dir, options.pipeline);
            for (const auto& field : fields) {
                for (const auto& flag : field.outliers) {
                    std::printf("field %d: %s %s z=%s jqf=%s pl=%d\n", field.report.field_code,
                                flag.journal_key.c_str(),
                                std::string(jqf::to_string(flag.direction)).c_str(),
                                jqf::csv::format_double(flag.residual_z).c_str(),
                                jqf::csv::format_double(flag.jqf).c_str(), flag.pl_points);
                }
            }
        } else if (report->parsed()) {
            auto fields = jqf::stage_report(options.run_dir, options.pipeline);
            print_field_table(fields);
            std::printf("report written to %s\n", options.run_dir.string().c_str());
        }
    } catch (const jqf::BackendError& e) {
        std::cerr << "backend error: " << e.what() << "\n";
        return 2;
    } catch (const jqf::InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
