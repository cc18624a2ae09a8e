#pragma once

// Synthetic three-field corpus with latent journal quality: article scores,
// national ranks and citation counts are all noisy functions of the journal's
// latent quality, so pipeline wiring can be checked against known structure
// without any real data.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

#include "jqf/csv.hpp"
#include "jqf/prep.hpp"
#include "jqf/rng.hpp"
#include "jqf/scoring.hpp"
#include "jqf/text.hpp"

namespace jqf::test {

struct SyntheticSpec {
    std::vector<int> field_codes = {11, 16, 33};
    int journals_per_field = 30;
    int articles_per_journal = 150;
    int year = 2021;
    std::uint64_t seed = 99991;
    double score_noise_sd = 0.6; // per-article score noise around latent quality
    double rank_noise_sd = 0.5;  // noise before quantizing national ranks
};

struct SyntheticCorpus {
    std::filesystem::path articles_path;
    std::filesystem::path rank_fi_path;
    std::filesystem::path rank_no_path;
    std::filesystem::path rank_pl_path;
    std::filesystem::path guidelines_dir;
    std::shared_ptr<std::map<std::string, double>> score_by_title;

    /// Mock responder that looks the article up by prompt title and emits a
    /// parseable report carrying its programmed score.
    MockBackend::Responder responder() const {
        auto scores = score_by_title;
        return [scores](const std::string&, const std::string& user) -> std::string {
            std::size_t sep = user.find(kPromptSeparator);
            std::string title = user.substr(0, sep);
            auto it = scores->find(title);
            if (it == scores->end()) {
                throw std::runtime_error("synthetic responder: unknown title \"" + title + "\"");
            }
            double score = it->second;
            int twice = static_cast<int>(std::lround(score * 2.0));
            std::string text = twice % 2 == 0 ? std::to_string(twice / 2)
                                              : std::to_string(twice / 2) + ".5";
            // a slice of reports carries sub-scores only, to exercise averaging
            if (fnv1a64(title) % 20 == 0) {
                return "Originality: " + text + "*. Significance: " + text +
                       "*. Rigour: " + text + "*.";
            }
            return "This study was assessed against the panel criteria. Overall research "
                   "quality score: " +
                   text + "*.";
        };
    }
};

inline double clamp_half_star(double v) {
    double snapped = std::round(v * 2.0) / 2.0;
    return std::clamp(snapped, 1.0, 4.0);
}

inline SyntheticCorpus make_synthetic_corpus(const std::filesystem::path& dir,
                                             const SyntheticSpec& spec) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);

    SyntheticCorpus corpus;
    corpus.articles_path = dir / "articles.jsonl";
    corpus.rank_fi_path = dir / "rank_fi.csv";
    corpus.rank_no_path = dir / "rank_no.csv";
    corpus.rank_pl_path = dir / "rank_pl.csv";
    corpus.guidelines_dir = dir / "guidelines";
    corpus.score_by_title = std::make_shared<std::map<std::string, double>>();

    fs::create_directories(corpus.guidelines_dir);
    for (char g : {'A', 'B', 'C', 'D'}) {
        csv::write_file(corpus.guidelines_dir / (std::string(1, g) + ".txt"),
                        std::string("You are an expert assessor for panel ") + g +
                            ". Rate the article's originality, significance and rigour, and "
                            "give an overall quality score of 1*, 2*, 3* or 4*.\n");
    }

    std::string articles;
    std::string fi = "scheme,name,issns,value\n";
    std::string no = "scheme,name,issns,value\n";
    std::string pl = "scheme,name,issns,value\n";

    const std::string filler =
        "The experimental protocol was applied to a stratified cohort and the resulting "
        "measurements were compared against the pre-registered baseline, with sensitivity "
        "analyses over every plausible confounder and a replication arm confirming the main "
        "effect. ";

    for (int field : spec.field_codes) {
        for (int j = 0; j < spec.journals_per_field; ++j) {
            Rng rng(substream_seed(spec.seed, "journal:" + std::to_string(field) + ":" +
                                                  std::to_string(j)));
            double quality = 1.0 +
                             3.0 * (static_cast<double>(j) + 0.5) /
                                 static_cast<double>(spec.journals_per_field) +
                             0.1 * rng.normal();
            quality = std::clamp(quality, 1.0, 4.0);

            std::string name = "Journal of Synthetic Topics " + std::to_string(field) + "-" +
                               std::to_string(j);
            char issn[16];
            std::snprintf(issn, sizeof(issn), "%04d-%03d%d", 1000 + field, j, (field + j) % 10);

            // national ranks: quantized noisy quality, with ~1 in 8 unlisted
            auto noisy = [&] { return quality + spec.rank_noise_sd * rng.normal(); };
            if (rng.below(8) != 0) {
                double v = noisy();
                int rank = v < 1.75 ? 0 : v < 2.5 ? 1 : v < 3.25 ? 2 : 3;
                fi += csv::join({"FI", name, issn, std::to_string(rank)}) + "\n";
            }
            if (rng.below(8) != 0) {
                double v = noisy();
                int rank = v < 2.0 ? 0 : v < 3.0 ? 1 : 2;
                no += csv::join({"NO", name, issn, std::to_string(rank)}) + "\n";
            }
            if (rng.below(8) != 0) {
                double v = noisy();
                int points = v < 1.5 ? 20 : v < 2.0 ? 40 : v < 2.5 ? 70 : v < 3.0 ? 100
                             : v < 3.5 ? 140 : 200;
                pl += csv::join({"PL", name, issn, std::to_string(points)}) + "\n";
            }

            double log_mean = 0.2 + 0.9 * (quality - 1.0);
            for (int a = 0; a < spec.articles_per_journal; ++a) {
                std::string title = "Synthetic study " + std::to_string(field) + "-" +
                                    std::to_string(j) + "-" + std::to_string(a);
                double score = clamp_half_star(quality + spec.score_noise_sd * rng.normal());
                (*corpus.score_by_title)[title] = score;

                long long citations = static_cast<long long>(
                    std::floor(std::exp(log_mean + 1.1 * rng.normal())));
                if (citations < 0) citations = 0;

                // roughly one abstract in eight is short-form and will not qualify
                std::string abstract;
                if (rng.below(8) == 0) {
                    abstract = filler.substr(0, 300);
                } else {
                    while (utf8_length(abstract) < 900) abstract += filler;
                }
                abstract += "\xC2\xA9 " + std::to_string(spec.year) +
                            " Synthetic Press. All rights reserved.";

                nlohmann::json record = {
                    {"id", title},
                    {"journal", name},
                    {"issns", nlohmann::json::array({issn})},
                    {"year", spec.year},
                    {"fields", nlohmann::json::array({field})},
                    {"title", title},
                    {"abstract", abstract},
                    {"citations", citations},
                };
                articles += record.dump();
                articles.push_back('\n');
            }
        }
    }

    csv::write_file(corpus.articles_path, articles);
    csv::write_file(corpus.rank_fi_path, fi);
    csv::write_file(corpus.rank_no_path, no);
    csv::write_file(corpus.rank_pl_path, pl);
    return corpus;
}

} // namespace jqf::test
