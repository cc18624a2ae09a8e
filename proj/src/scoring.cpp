#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "jqf/scoring.hpp"

#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <iomanip>
#include <sstream>
#include <thread>

#include <openssl/evp.h>

#include "httplib.h"
#include "json.hpp"

#include "jqf/csv.hpp"
#include "jqf/errors.hpp"
#include "jqf/rng.hpp"
#include "jqf/text.hpp"

namespace jqf {

namespace {

using nlohmann::json;

} // namespace

std::string_view to_string(BackendKind kind) {
    switch (kind) {
    case BackendKind::Live: return "live";
    case BackendKind::Replay: return "replay";
    case BackendKind::Mock: return "mock";
    }
    return "?";
}

std::optional<BackendKind> backend_kind_from(std::string_view token) {
    std::string t = to_lower_ascii(token);
    if (t == "live") return BackendKind::Live;
    if (t == "replay") return BackendKind::Replay;
    if (t == "mock") return BackendKind::Mock;
    return std::nullopt;
}

std::string_view to_string(ScoreStatus status) {
    switch (status) {
    case ScoreStatus::ParsedOverall: return "parsed_overall";
    case ScoreStatus::AveragedSubscores: return "averaged_subscores";
    case ScoreStatus::NeedsAdjudication: return "needs_adjudication";
    case ScoreStatus::Adjudicated: return "adjudicated";
    }
    return "?";
}

std::optional<ScoreStatus> score_status_from(std::string_view token) {
    std::string t = to_lower_ascii(token);
    if (t == "parsed_overall") return ScoreStatus::ParsedOverall;
    if (t == "averaged_subscores") return ScoreStatus::AveragedSubscores;
    if (t == "needs_adjudication") return ScoreStatus::NeedsAdjudication;
    if (t == "adjudicated") return ScoreStatus::Adjudicated;
    return std::nullopt;
}

void BackendConfig::validate() const {
    if (max_concurrent_requests < 1) throw InputError("backend: max_concurrent_requests must be >= 1");
    if (max_retries < 0) throw InputError("backend: max_retries must be >= 0");
    if (requests_per_minute < 0) throw InputError("backend: requests_per_minute must be >= 0");
    if (retry_backoff_ms < 0) throw InputError("backend: retry_backoff_ms must be >= 0");
    if (model_id.empty()) throw InputError("backend: model_id must not be empty");
    if (kind == BackendKind::Replay && cache_path.empty()) {
        throw InputError("backend: replay requires a cache path");
    }
}

// ---------------------------------------------------------------------------
// REF score extraction
// ---------------------------------------------------------------------------

namespace {

struct NumToken {
    std::size_t begin = 0;         // first digit
    std::size_t end = 0;           // one past the number itself
    std::size_t decorated_end = 0; // past any trailing '*' / "star(s)"
    double value = 0.0;
    int int_digits = 0;
    bool starred = false;
    bool masked = false; // sub-score label or range construction
    bool keyword_adjacent = false;
};

bool is_digit_at(const std::string& s, std::size_t i) {
    return i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]));
}

bool word_at(const std::string& s, std::size_t pos, std::string_view word) {
    if (pos + word.size() > s.size()) return false;
    if (s.compare(pos, word.size(), word) != 0) return false;
    if (pos > 0 && std::isalnum(static_cast<unsigned char>(s[pos - 1]))) return false;
    std::size_t after = pos + word.size();
    if (after < s.size() && std::isalpha(static_cast<unsigned char>(s[after]))) return false;
    return true;
}

bool clause_break(std::string_view between) {
    return between.find('.') != std::string_view::npos ||
           between.find('\n') != std::string_view::npos ||
           between.find("overall") != std::string_view::npos;
}

std::vector<NumToken> scan_tokens(const std::string& low) {
    std::vector<NumToken> tokens;
    std::size_t i = 0;
    while (i < low.size()) {
        if (!is_digit_at(low, i)) {
            ++i;
            continue;
        }
        char prev = i ? low[i - 1] : '\0';
        bool bad_prev =
            i > 0 && (std::isalnum(static_cast<unsigned char>(prev)) || prev == '.' || prev == '*');
        std::size_t j = i;
        while (is_digit_at(low, j)) ++j;
        int int_digits = static_cast<int>(j - i);
        if (j < low.size() && low[j] == '.' && is_digit_at(low, j + 1)) {
            ++j;
            while (is_digit_at(low, j)) ++j;
        }
        bool bad_next = j < low.size() && std::isalpha(static_cast<unsigned char>(low[j]));
        if (bad_prev || bad_next) { // "v2", "4o", "3rd", ".5" tails are not scores
            i = j;
            continue;
        }

        NumToken token;
        token.begin = i;
        token.end = j;
        token.int_digits = int_digits;
        token.value = std::stod(low.substr(i, j - i));

        std::size_t k = j;
        if (k < low.size() && low[k] == '*') {
            token.starred = true;
            while (k < low.size() && low[k] == '*') ++k;
        } else {
            std::size_t s = k;
            while (s < low.size() && (low[s] == ' ' || low[s] == '-')) ++s;
            if (word_at(low, s, "stars")) {
                token.starred = true;
                k = s + 5;
            } else if (word_at(low, s, "star")) {
                token.starred = true;
                k = s + 4;
            }
        }
        token.decorated_end = k;
        tokens.push_back(token);
        i = j;
    }
    return tokens;
}

NumToken* token_starting_at(std::vector<NumToken>& tokens, std::size_t pos) {
    for (auto& t : tokens) {
        if (t.begin == pos) return &t;
    }
    return nullptr;
}

// "between X and Y", "X to Y", "X - Y", "out of X": never overall scores
void mask_ranges(const std::string& low, std::vector<NumToken>& tokens) {
    for (std::size_t pos = low.find("between"); pos != std::string::npos;
         pos = low.find("between", pos + 1)) {
        if (!word_at(low, pos, "between")) continue;
        std::size_t s = pos + 7;
        while (s < low.size() && low[s] == ' ') ++s;
        NumToken* first = token_starting_at(tokens, s);
        if (!first) continue;
        std::size_t a = first->decorated_end;
        while (a < low.size() && low[a] == ' ') ++a;
        if (!word_at(low, a, "and")) continue;
        std::size_t b = a + 3;
        while (b < low.size() && low[b] == ' ') ++b;
        NumToken* second = token_starting_at(tokens, b);
        if (!second) continue;
        first->masked = second->masked = true;
    }

    for (std::size_t t = 0; t + 1 < tokens.size(); ++t) {
        std::string_view gap(low.data() + tokens[t].decorated_end,
                             tokens[t + 1].begin - tokens[t].decorated_end);
        std::string g(trim(gap));
        if (g == "to" || g == "-" || g == "\xE2\x80\x93" || g == "\xE2\x80\x94") {
            tokens[t].masked = tokens[t + 1].masked = true;
        }
    }

    for (auto& token : tokens) {
        std::string_view before(low.data(), token.begin);
        before = rtrim(before);
        if (before.size() < 6 || before.compare(before.size() - 2, 2, "of") != 0) continue;
        std::string_view rest = rtrim(before.substr(0, before.size() - 2));
        if (rest.size() < 3 || rest.compare(rest.size() - 3, 3, "out") != 0) continue;
        if (rest.size() > 3 && std::isalnum(static_cast<unsigned char>(rest[rest.size() - 4]))) {
            continue;
        }
        token.masked = true;
    }
}

// Value of the last "<dim>: N" style statement; its tokens never count as
// overall. Association stops at clause breaks so "rigour, but overall 3*"
// does not bind the 3 to rigour.
std::optional<double> associate_dimension(const std::string& low, std::string_view dim,
                                          std::vector<NumToken>& tokens) {
    std::optional<double> value;
    for (std::size_t pos = low.find(dim); pos != std::string::npos;
         pos = low.find(dim, pos + 1)) {
        if (!word_at(low, pos, dim)) continue;
        std::size_t key_end = pos + dim.size();
        for (auto& token : tokens) {
            if (token.begin < key_end) continue;
            if (token.begin > key_end + 40) break;
            std::string_view between(low.data() + key_end, token.begin - key_end);
            if (clause_break(between)) break;
            token.masked = true;
            value = token.value;
            break;
        }
    }
    return value;
}

constexpr std::string_view kScoreKeywords[] = {
    "overall", "score", "scores", "scored", "scoring", "rating",
    "rated",   "rate",  "grade",  "graded", "assessment",
};

void mark_keyword_adjacency(const std::string& low, std::vector<NumToken>& tokens) {
    for (std::string_view keyword : kScoreKeywords) {
        for (std::size_t pos = low.find(keyword); pos != std::string::npos;
             pos = low.find(keyword, pos + 1)) {
            if (!word_at(low, pos, keyword)) continue;
            std::size_t key_end = pos + keyword.size();
            for (auto& token : tokens) {
                if (token.begin >= key_end && token.begin - key_end <= 60) {
                    std::string_view gap(low.data() + key_end, token.begin - key_end);
                    if (!clause_break(gap)) token.keyword_adjacent = true;
                } else if (pos >= token.decorated_end && pos - token.decorated_end <= 12) {
                    std::string_view gap(low.data() + token.decorated_end,
                                         pos - token.decorated_end);
                    if (!clause_break(gap)) token.keyword_adjacent = true;
                }
            }
        }
    }
}

bool score_in_range(double v) { return v >= 1.0 && v <= 4.0; }

} // namespace

ScoreReport extract_ref_score(std::string_view raw_report) {
    ScoreReport report;
    report.raw_report = std::string(raw_report);

    std::string low = to_lower_ascii(raw_report);
    std::vector<NumToken> tokens = scan_tokens(low);
    mask_ranges(low, tokens);

    std::optional<double> originality = associate_dimension(low, "originality", tokens);
    std::optional<double> significance = associate_dimension(low, "significance", tokens);
    std::optional<double> rigour = associate_dimension(low, "rigour", tokens);
    if (!rigour) rigour = associate_dimension(low, "rigor", tokens);

    mark_keyword_adjacency(low, tokens);

    const NumToken* chosen = nullptr;
    for (const auto& token : tokens) {
        if (token.masked) continue;
        // bare numbers only count with a single-digit integer part next to a
        // score keyword; starred forms stand on their own
        bool eligible = token.starred || (token.keyword_adjacent && token.int_digits == 1);
        if (eligible) chosen = &token; // the last overall statement governs
    }

    if (originality && score_in_range(*originality)) report.originality = originality;
    if (significance && score_in_range(*significance)) report.significance = significance;
    if (rigour && score_in_range(*rigour)) report.rigour = rigour;

    if (chosen) {
        if (score_in_range(chosen->value)) {
            report.overall = chosen->value;
            report.final_score = chosen->value;
            report.status = ScoreStatus::ParsedOverall;
        } else {
            report.status = ScoreStatus::NeedsAdjudication;
        }
    } else if (report.originality && report.significance && report.rigour) {
        report.final_score = (*report.originality + *report.significance + *report.rigour) / 3.0;
        report.status = ScoreStatus::AveragedSubscores;
    } else {
        report.status = ScoreStatus::NeedsAdjudication;
    }
    return report;
}

// ---------------------------------------------------------------------------
// Cache
// ---------------------------------------------------------------------------

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256: EVP_Digest failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

std::string cache_key(std::string_view model_id, std::string_view system, std::string_view user) {
    json canonical = {{"model", model_id}, {"system", system}, {"user", user}};
    return sha256_hex(canonical.dump());
}

namespace {

std::mutex g_cache_write_mutex;

std::filesystem::path cache_entry_path(const std::filesystem::path& dir, const std::string& key) {
    return dir / (key + ".json");
}

std::string iso_utc_now() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream out;
    out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return out.str();
}

std::optional<std::string> cache_lookup(const std::filesystem::path& dir, const std::string& key) {
    auto path = cache_entry_path(dir, key);
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) return std::nullopt;
    json entry;
    try {
        entry = json::parse(csv::read_file(path));
        return entry.at("response").at("content").get<std::string>();
    } catch (const std::exception& e) {
        throw BackendError("corrupt cache entry " + path.string() + ": " + e.what());
    }
}

void cache_store(const std::filesystem::path& dir, const std::string& key,
                 const BackendConfig& config, const std::string& system, const std::string& user,
                 const std::string& content) {
    json entry = {
        {"key", key},
        {"request",
         {{"model", config.model_id},
          {"messages", json::array({{{"role", "system"}, {"content", system}},
                                    {{"role", "user"}, {"content", user}}})},
          {"params", json::object()}}}, // generation params left at backend defaults
        {"response", {{"content", content}, {"backend", std::string(to_string(config.kind))}}},
        {"created_at", iso_utc_now()},
        {"completed_at", iso_utc_now()},
    };
    std::lock_guard<std::mutex> lock(g_cache_write_mutex);
    std::filesystem::create_directories(dir);
    auto path = cache_entry_path(dir, key);
    auto tmp = path;
    tmp += ".tmp";
    csv::write_file(tmp, entry.dump(2));
    std::filesystem::rename(tmp, path);
}

} // namespace

// ---------------------------------------------------------------------------
// Backends
// ---------------------------------------------------------------------------

namespace {

std::string format_half_star(double score) {
    int twice = static_cast<int>(std::lround(score * 2.0));
    if (twice % 2 == 0) return std::to_string(twice / 2);
    return std::to_string(twice / 2) + ".5";
}

} // namespace

MockBackend MockBackend::deterministic(std::uint64_t seed) {
    return MockBackend([seed](const std::string& system, const std::string& user) {
        std::string blob = system;
        blob.push_back('\x1f');
        blob += user;
        std::uint64_t h = mix64(seed ^ fnv1a64(blob));
        double score = 1.0 + 0.5 * static_cast<double>(h % 7);
        return "Overall research quality score: " + format_half_star(score) + "*.";
    });
}

std::string ReplayBackend::complete(const std::string&, const std::string&) {
    throw BackendError("replay backend performs no requests");
}

LiveBackend::LiveBackend(const BackendConfig& config) : config_(config) {
    const char* key = std::getenv(config.api_key_env.c_str());
    if (!key || !*key) {
        throw BackendError("environment variable " + config.api_key_env + " is not set");
    }
    api_key_ = key;
}

std::string LiveBackend::complete(const std::string& system, const std::string& user) {
    httplib::Client client(config_.api_base);
    client.set_connection_timeout(30, 0);
    client.set_read_timeout(180, 0);

    json body = {
        {"model", config_.model_id},
        {"messages", json::array({{{"role", "system"}, {"content", system}},
                                  {{"role", "user"}, {"content", user}}})},
    };
    httplib::Headers headers = {{"Authorization", "Bearer " + api_key_}};
    auto res = client.Post("/v1/chat/completions", headers, body.dump(), "application/json");
    if (!res) {
        throw TransientBackendError("transport failure: " + httplib::to_string(res.error()));
    }
    if (res->status == 429 || res->status >= 500) {
        throw TransientBackendError("HTTP " + std::to_string(res->status) + " from " +
                                    config_.api_base);
    }
    if (res->status != 200) {
        throw BackendError("HTTP " + std::to_string(res->status) + ": " + res->body);
    }
    try {
        json parsed = json::parse(res->body);
        return parsed.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const std::exception& e) {
        throw BackendError(std::string("malformed completion response: ") + e.what());
    }
}

std::unique_ptr<Backend> make_backend(const BackendConfig& config) {
    config.validate();
    switch (config.kind) {
    case BackendKind::Live: return std::make_unique<LiveBackend>(config);
    case BackendKind::Replay: return std::make_unique<ReplayBackend>();
    case BackendKind::Mock:
        return std::make_unique<MockBackend>(MockBackend::deterministic(config.mock_seed));
    }
    throw InputError("unknown backend kind");
}

// ---------------------------------------------------------------------------
// Rate limiting and orchestration
// ---------------------------------------------------------------------------

RateLimiter::RateLimiter(int per_minute, ClockFn clock, SleepFn sleep)
    : per_minute_(per_minute),
      clock_(clock ? std::move(clock) : [] { return std::chrono::steady_clock::now(); }),
      sleep_(sleep ? std::move(sleep)
                   : [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {}

void RateLimiter::acquire() {
    using namespace std::chrono;
    if (per_minute_ <= 0) return;
    for (;;) {
        milliseconds wait{0};
        {
            std::lock_guard<std::mutex> lock(mutex_);
            auto now = clock_();
            while (!recent_.empty() && now - recent_.front() >= minutes(1)) recent_.pop_front();
            if (recent_.size() < static_cast<std::size_t>(per_minute_)) {
                recent_.push_back(now);
                return;
            }
            wait = ceil<milliseconds>(recent_.front() + minutes(1) - now);
            if (wait < milliseconds(1)) wait = milliseconds(1);
        }
        sleep_(wait);
    }
}

namespace {

std::string complete_with_retry(Backend& backend, const BackendConfig& config,
                                const std::string& system, const std::string& user) {
    int attempt = 0;
    for (;;) {
        try {
            return backend.complete(system, user);
        } catch (const TransientBackendError& e) {
            if (attempt >= config.max_retries) {
                throw BackendError(std::string(e.what()) + " (after " +
                                   std::to_string(attempt) + " retries)");
            }
            auto delay = std::chrono::milliseconds(config.retry_backoff_ms) * (1LL << attempt);
            if (delay.count() > 0) std::this_thread::sleep_for(delay);
            ++attempt;
        }
    }
}

} // namespace

ScoreReport score_article(Backend& backend, const BackendConfig& config,
                          const std::string& guideline_text, const std::string& article_id,
                          const std::string& prompt) {
    std::string raw;
    bool from_cache = false;
    std::string key;

    if (!config.cache_path.empty()) {
        key = cache_key(config.model_id, guideline_text, prompt);
        if (auto hit = cache_lookup(config.cache_path, key)) {
            raw = *hit;
            from_cache = true;
        }
    } else if (backend.kind() == BackendKind::Replay) {
        throw BackendError("replay backend requires a cache path");
    }

    if (!from_cache) {
        if (backend.kind() == BackendKind::Replay) {
            throw BackendError("replay miss: no cache entry " + key + " for article " +
                               article_id);
        }
        raw = complete_with_retry(backend, config, guideline_text, prompt);
        if (!config.cache_path.empty()) {
            cache_store(config.cache_path, key, config, guideline_text, prompt, raw);
        }
    }

    ScoreReport report = extract_ref_score(raw);
    report.article_id = article_id;
    return report;
}

ScoringRunResult run_scoring(const std::vector<ScoringItem>& items, const GuidelineSet& guidelines,
                             Backend& backend, const BackendConfig& config,
                             const AdjudicationBook& adjudications) {
    config.validate();
    const std::size_t total = items.size();
    std::vector<ScoreReport> reports(total);

    RateLimiter limiter(config.requests_per_minute);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::mutex error_mutex;
    std::exception_ptr first_error;

    auto worker = [&] {
        for (;;) {
            if (stop.load(std::memory_order_relaxed)) break;
            std::size_t i = next.fetch_add(1);
            if (i >= total) break;
            try {
                limiter.acquire();
                const ScoringItem& item = items[i];
                reports[i] = score_article(backend, config, guidelines.text_for(item.guideline),
                                           item.article_id, item.prompt);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                stop.store(true);
                break;
            }
        }
    };

    std::size_t threads =
        std::min<std::size_t>(static_cast<std::size_t>(config.max_concurrent_requests), total);
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    ScoringRunResult result;
    for (auto& report : reports) {
        if (report.status == ScoreStatus::NeedsAdjudication) {
            auto it = adjudications.find(report.article_id);
            if (it != adjudications.end()) {
                if (!(it->second >= 1.0 && it->second <= 4.0)) {
                    throw InputError("adjudicated score " + std::to_string(it->second) +
                                     " outside [1,4] for article " + report.article_id);
                }
                report.final_score = it->second;
                report.status = ScoreStatus::Adjudicated;
            } else {
                result.adjudication_queue.push_back(report.article_id);
            }
        }
    }
    result.reports = std::move(reports);
    return result;
}

// ---------------------------------------------------------------------------
// Adjudication files
// ---------------------------------------------------------------------------

namespace {

const std::vector<std::string> kAdjudicationHeader = {"article_id", "raw_report_path", "score"};

std::string safe_file_stem(const std::string& article_id) {
    std::string stem;
    bool altered = false;
    for (char c : article_id) {
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-') {
            stem.push_back(c);
        } else {
            stem.push_back('_');
            altered = true;
        }
    }
    if (altered || stem.empty()) stem += "-" + sha256_hex(article_id).substr(0, 8);
    return stem;
}

} // namespace

AdjudicationBook load_adjudications(const std::filesystem::path& csv_path) {
    csv::Reader reader(csv::read_file(csv_path));
    auto header = reader.next();
    if (!header || *header != kAdjudicationHeader) {
        throw InputError("adjudication file " + csv_path.string() +
                         ": expected header article_id,raw_report_path,score");
    }
    AdjudicationBook book;
    while (auto row = reader.next()) {
        if (row->size() != 3) {
            throw InputError("adjudication file " + csv_path.string() + ": row at line " +
                             std::to_string(reader.record_line()) + ": expected 3 fields");
        }
        const std::string& article_id = (*row)[0];
        std::string score_text(trim((*row)[2]));
        if (score_text.empty()) continue; // still pending
        double score = 0.0;
        try {
            std::size_t used = 0;
            score = std::stod(score_text, &used);
            if (used != score_text.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw InputError("adjudication file " + csv_path.string() + ": score \"" +
                             score_text + "\" is not a number (article " + article_id + ")");
        }
        if (!(score >= 1.0 && score <= 4.0)) {
            throw InputError("adjudication file " + csv_path.string() + ": score " + score_text +
                             " outside [1,4] (article " + article_id + ")");
        }
        book[article_id] = score;
    }
    return book;
}

void write_adjudication_queue(const std::filesystem::path& csv_path,
                              const std::vector<ScoreReport>& reports,
                              const std::filesystem::path& raw_report_dir) {
    std::string out = csv::join(kAdjudicationHeader) + "\n";
    for (const auto& report : reports) {
        if (report.status != ScoreStatus::NeedsAdjudication) continue;
        std::filesystem::create_directories(raw_report_dir);
        auto raw_path = raw_report_dir / (safe_file_stem(report.article_id) + ".txt");
        csv::write_file(raw_path, report.raw_report);
        out += csv::join({report.article_id, raw_path.string(), ""}) + "\n";
    }
    csv::write_file(csv_path, out);
}

} // namespace jqf
