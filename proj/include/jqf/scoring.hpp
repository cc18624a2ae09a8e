#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "jqf/errors.hpp"
#include "jqf/prep.hpp"

namespace jqf {

enum class BackendKind { Live, Replay, Mock };

std::string_view to_string(BackendKind kind);
std::optional<BackendKind> backend_kind_from(std::string_view token);

struct BackendConfig {
    BackendKind kind = BackendKind::Mock;
    std::string model_id = "gpt-4o-mini";
    int max_concurrent_requests = 1;
    int requests_per_minute = 0; // 0 = unlimited
    int max_retries = 3;
    std::filesystem::path cache_path; // empty = no response persistence
    std::string api_base = "https://api.openai.com";
    std::string api_key_env = "OPENAI_API_KEY";
    int retry_backoff_ms = 500; // doubles per attempt
    std::uint64_t mock_seed = 0;

    void validate() const;
};

enum class ScoreStatus { ParsedOverall, AveragedSubscores, NeedsAdjudication, Adjudicated };

std::string_view to_string(ScoreStatus status);
std::optional<ScoreStatus> score_status_from(std::string_view token);

struct ScoreReport {
    std::string article_id;
    std::string raw_report;
    std::optional<double> overall;
    std::optional<double> originality;
    std::optional<double> significance;
    std::optional<double> rigour;
    std::optional<double> final_score;
    ScoreStatus status = ScoreStatus::NeedsAdjudication;
};

/// Extracts a REF-style quality score from a free-text report. Deterministic
/// and total: extraction failure is status NeedsAdjudication, never an error.
///
/// Accepted overall forms: "3*", "2.5*", "3 stars", and bare single-digit
/// numbers adjacent to a score/rating keyword; the last overall statement in
/// the report wins. Tokens inside ranges ("between 2* and 3*", "1* to 4*",
/// "out of 4") and tokens labelled originality/significance/rigour never count
/// as overall. With no overall but all three sub-scores present, the final
/// score is their arithmetic mean. Any parsed value outside [1,4] routes the
/// report to adjudication.
ScoreReport extract_ref_score(std::string_view raw_report);

std::string sha256_hex(std::string_view bytes);

/// Content hash of the canonical request; names the cache entry file.
std::string cache_key(std::string_view model_id, std::string_view system, std::string_view user);

/// Transport abstraction: one request, raw report text back.
class Backend {
public:
    virtual ~Backend() = default;
    virtual std::string complete(const std::string& system, const std::string& user) = 0;
    virtual BackendKind kind() const = 0;
};

/// Retryable transport failure (connection error, timeout, 429, 5xx).
class TransientBackendError : public BackendError {
public:
    using BackendError::BackendError;
};

class MockBackend : public Backend {
public:
    using Responder = std::function<std::string(const std::string& system, const std::string& user)>;

    explicit MockBackend(Responder responder) : responder_(std::move(responder)) {}

    /// Emits a parseable report with a half-star score derived from a hash of
    /// (seed, system, user); reruns with one seed are byte-identical.
    static MockBackend deterministic(std::uint64_t seed);

    std::string complete(const std::string& system, const std::string& user) override {
        return responder_(system, user);
    }
    BackendKind kind() const override { return BackendKind::Mock; }

private:
    Responder responder_;
};

/// Serves cached responses only; performs no requests. Misses surface as
/// BackendError from score_article, naming the missing key.
class ReplayBackend : public Backend {
public:
    std::string complete(const std::string& system, const std::string& user) override;
    BackendKind kind() const override { return BackendKind::Replay; }
};

/// OpenAI-style chat-completions client. One attempt per complete() call;
/// retry policy lives in score_article.
class LiveBackend : public Backend {
public:
    explicit LiveBackend(const BackendConfig& config);
    std::string complete(const std::string& system, const std::string& user) override;
    BackendKind kind() const override { return BackendKind::Live; }

private:
    BackendConfig config_;
    std::string api_key_;
};

std::unique_ptr<Backend> make_backend(const BackendConfig& config);

/// Sliding-window requests-per-minute gate. Clock and sleep are injectable
/// for tests; pass nullptr for the real steady clock.
class RateLimiter {
public:
    using ClockFn = std::function<std::chrono::steady_clock::time_point()>;
    using SleepFn = std::function<void(std::chrono::milliseconds)>;

    explicit RateLimiter(int per_minute, ClockFn clock = nullptr, SleepFn sleep = nullptr);
    void acquire();

private:
    int per_minute_;
    ClockFn clock_;
    SleepFn sleep_;
    std::mutex mutex_;
    std::deque<std::chrono::steady_clock::time_point> recent_;
};

/// Scores one prompt: cache lookup first (when a cache path is configured),
/// then the backend with retry/backoff on transient failures; live and mock
/// responses are persisted to the cache keyed by content hash. The raw
/// response is stored verbatim and extraction applied.
ScoreReport score_article(Backend& backend, const BackendConfig& config,
                          const std::string& guideline_text, const std::string& article_id,
                          const std::string& prompt);

struct ScoringItem {
    std::string article_id;
    Guideline guideline = Guideline::A;
    std::string prompt;
};

/// article_id -> adjudicated score in [1,4]
using AdjudicationBook = std::map<std::string, double>;

struct ScoringRunResult {
    std::vector<ScoreReport> reports;             // manifest order
    std::vector<std::string> adjudication_queue;  // ids still needing a human score
};

/// Scores every item (concurrently up to max_concurrent_requests, gated by
/// the rate limiter), merges adjudicated decisions, and reports the ids that
/// still need human scores. Result order matches the input regardless of
/// completion order.
ScoringRunResult run_scoring(const std::vector<ScoringItem>& items,
                             const GuidelineSet& guidelines, Backend& backend,
                             const BackendConfig& config,
                             const AdjudicationBook& adjudications = {});

/// Queue/decision CSV: article_id,raw_report_path,score. Rows with an empty
/// score column are pending and skipped by the loader; scores outside [1,4]
/// are an error.
AdjudicationBook load_adjudications(const std::filesystem::path& csv_path);

void write_adjudication_queue(const std::filesystem::path& csv_path,
                              const std::vector<ScoreReport>& reports,
                              const std::filesystem::path& raw_report_dir);

} // namespace jqf
