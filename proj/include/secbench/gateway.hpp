#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "secbench/common.hpp"

namespace secbench {

struct GenerationConfig {
    std::string model_name;
    double temperature = 0.9;
    int max_tokens = 4096;
    double top_p = 0.9;

    void validate() const;  // throws ConfigError on out-of-range values
};

struct GenerationResult {
    std::string provider;
    std::string prompt_hash;     // SHA-256 of the prompt text
    std::string raw_response;
    std::string extracted_source;
    std::int64_t latency_ms = 0;
    int attempt_count = 1;
};

struct RetryPolicy {
    int max_attempts = 3;
    int initial_backoff_ms = 250;
    double multiplier = 2.0;
    int max_backoff_ms = 5000;
};

struct RateLimit {
    int max_in_flight = 1;
    int requests_per_minute = 0;  // 0 = unlimited
};

class Provider {
public:
    virtual ~Provider() = default;
    virtual std::string name() const = 0;
    virtual std::string complete(const std::string& prompt,
                                 const GenerationConfig& config) = 0;
};

// Deterministic offline provider: a canned response from fixture_dir keyed by
// prompt hash if present, otherwise an echo template that embeds the hash in
// one fenced block per supported language (so extraction always succeeds) and
// one JSON tag array (so classification always parses).
class MockProvider : public Provider {
public:
    explicit MockProvider(std::string name = "mock",
                          std::string fixture_dir = "");
    std::string name() const override { return name_; }
    std::string complete(const std::string& prompt,
                         const GenerationConfig& config) override;

private:
    std::string name_;
    std::string fixture_dir_;
};

// Provider speaking the OpenAI-style chat-completions JSON protocol.  The API
// key is read from the named environment variable at call time and never
// stored in any config or report.
struct HttpProviderOptions {
    std::string endpoint;                    // e.g. "https://api.example.com"
    std::string path = "/v1/chat/completions";
    std::string api_key_env;
    int connect_timeout_s = 10;
    int read_timeout_s = 120;
};

class HttpProvider : public Provider {
public:
    HttpProvider(std::string name, HttpProviderOptions options);
    std::string name() const override { return name_; }
    std::string complete(const std::string& prompt,
                         const GenerationConfig& config) override;

private:
    std::string name_;
    HttpProviderOptions options_;
};

// Adapter for tests: wraps a callable as a Provider.
class CallableProvider : public Provider {
public:
    using Fn = std::function<std::string(const std::string&,
                                         const GenerationConfig&)>;
    CallableProvider(std::string name, Fn fn)
        : name_(std::move(name)), fn_(std::move(fn)) {}
    std::string name() const override { return name_; }
    std::string complete(const std::string& prompt,
                         const GenerationConfig& config) override {
        return fn_(prompt, config);
    }

private:
    std::string name_;
    Fn fn_;
};

// First fenced block labelled with the target language (case-insensitive,
// c++ == cpp, py == python); otherwise the longest fenced block; otherwise
// the whole response trimmed.  Empty result -> ExtractionError.
std::string extract_code(const std::string& raw_response, Language language);

class Gateway {
public:
    void register_provider(std::unique_ptr<Provider> provider,
                           GenerationConfig config,
                           RetryPolicy retry = {},
                           RateLimit limit = {});
    bool has_provider(const std::string& name) const;
    const GenerationConfig& config_for(const std::string& name) const;

    // Runs the retry loop around Provider::complete.  Deterministic for
    // deterministic providers: identical prompt + config => identical result
    // (modulo latency).
    GenerationResult generate(const std::string& provider_name,
                              const std::string& prompt);

private:
    struct Entry {
        std::unique_ptr<Provider> provider;
        GenerationConfig config;
        RetryPolicy retry;
        RateLimit limit;
        std::unique_ptr<std::mutex> in_flight;  // serialises when max_in_flight == 1
        std::int64_t last_request_ms = 0;
    };
    Entry& entry_for(const std::string& name);
    std::map<std::string, Entry> providers_;
};

}  // namespace secbench
