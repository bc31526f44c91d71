#include "secbench/gateway.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <thread>

namespace secbench {

using nlohmann::json;
namespace fs = std::filesystem;

void GenerationConfig::validate() const {
    if (model_name.empty())
        throw ConfigError("generation config: model_name must be set");
    if (temperature < 0.0 || temperature > 2.0)
        throw ConfigError("generation config: temperature must be in [0, 2]");
    if (max_tokens <= 0)
        throw ConfigError("generation config: max_tokens must be positive");
    if (top_p <= 0.0 || top_p > 1.0)
        throw ConfigError("generation config: top_p must be in (0, 1]");
}

// ---------------------------------------------------------------------------
// Mock provider
// ---------------------------------------------------------------------------

MockProvider::MockProvider(std::string name, std::string fixture_dir)
    : name_(std::move(name)), fixture_dir_(std::move(fixture_dir)) {}

std::string MockProvider::complete(const std::string& prompt,
                                   const GenerationConfig& config) {
    const std::string hash = sha256_hex(prompt);
    const std::string h16 = hash.substr(0, 16);
    if (!fixture_dir_.empty()) {
        const fs::path canned = fs::path(fixture_dir_) / (h16 + ".txt");
        if (fs::exists(canned)) return read_file(canned.string());
    }
    // Echo template: a pure function of (prompt, config).  Carries a JSON tag
    // array (so classification parses), one fenced block per language (so
    // extraction succeeds for any target), and a deliberately weak crypto
    // call per block so the built-in analyzer has something to find in demo
    // runs.  Prompts whose hash starts with an odd hex digit also get a
    // hard-coded password line, giving demo profiles a second CWE family.
    const bool odd = std::string("13579bdf").find(hash[0]) != std::string::npos;
    const std::string cred = odd
        ? "password = \"hunter2-" + hash.substr(0, 4) + "\"\n"
        : "";
    std::string out;
    out += "Mock completion " + h16 + " from model " + config.model_name + ".\n";
    out += "Tags: [\"Cryptography\"]\n";
    out += "\n```c\n";
    out += "/* mock artifact " + h16 + " */\n";
    out += "EVP_EncryptInit_ex(ctx, EVP_aes_128_cbc(), NULL, key, iv);\n";
    if (odd) out += "const char *" + cred;
    out += "```\n";
    out += "\n```cpp\n";
    out += "// mock artifact " + h16 + "\n";
    out += "EVP_EncryptInit_ex(ctx, EVP_aes_256_ecb(), NULL, key, NULL);\n";
    if (odd) out += "const char *" + cred;
    out += "```\n";
    out += "\n```java\n";
    out += "// mock artifact " + h16 + "\n";
    out += "Cipher cipher = Cipher.getInstance(\"AES\");\n";
    if (odd) out += "String " + cred;
    out += "```\n";
    out += "\n```python\n";
    out += "# mock artifact " + h16 + "\n";
    out += "cipher = AES.new(key, AES.MODE_ECB)\n";
    if (odd) out += cred;
    out += "```\n";
    return out;
}

// ---------------------------------------------------------------------------
// HTTP provider (OpenAI-style chat completions)
// ---------------------------------------------------------------------------

HttpProvider::HttpProvider(std::string name, HttpProviderOptions options)
    : name_(std::move(name)), options_(std::move(options)) {
    if (options_.endpoint.empty())
        throw ConfigError("http provider \"" + name_ + "\": endpoint must be set");
}

std::string HttpProvider::complete(const std::string& prompt,
                                   const GenerationConfig& config) {
    httplib::Client client(options_.endpoint);
    client.set_connection_timeout(options_.connect_timeout_s);
    client.set_read_timeout(options_.read_timeout_s);

    httplib::Headers headers;
    if (!options_.api_key_env.empty()) {
        const char* key = std::getenv(options_.api_key_env.c_str());
        if (!key || !*key)
            throw ProviderError("environment variable " + options_.api_key_env +
                                    " is not set for provider \"" + name_ + "\"",
                                /*retryable=*/false);
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    json body = {
        {"model", config.model_name},
        {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
        {"temperature", config.temperature},
        {"max_tokens", config.max_tokens},
        {"top_p", config.top_p},
    };

    auto res = client.Post(options_.path, headers, body.dump(), "application/json");
    if (!res)
        throw ProviderError("provider \"" + name_ + "\": " +
                                httplib::to_string(res.error()),
                            /*retryable=*/true);
    const int status = res->status;
    if (status == 200) {
        json reply = json::parse(res->body, nullptr, /*allow_exceptions=*/false);
        if (reply.is_discarded() || !reply.contains("choices") ||
            reply["choices"].empty() ||
            !reply["choices"][0].contains("message") ||
            !reply["choices"][0]["message"].contains("content"))
            throw ProviderError("provider \"" + name_ +
                                    "\": malformed completion payload",
                                /*retryable=*/false, status);
        return reply["choices"][0]["message"]["content"].get<std::string>();
    }
    const bool retryable = status == 408 || status == 429 || status >= 500;
    throw ProviderError("provider \"" + name_ + "\": HTTP " +
                            std::to_string(status),
                        retryable, status);
}

// ---------------------------------------------------------------------------
// Code extraction
// ---------------------------------------------------------------------------

namespace {

bool label_matches(const std::string& label, Language language) {
    const std::string l = to_lower(trim(label));
    switch (language) {
        case Language::C: return l == "c";
        case Language::Cpp: return l == "cpp" || l == "c++" || l == "cxx" || l == "cc";
        case Language::Java: return l == "java";
        case Language::Python: return l == "python" || l == "py" || l == "python3";
    }
    return false;
}

struct FencedBlock {
    std::string label;
    std::string interior;  // exact bytes between the fence lines
};

std::vector<FencedBlock> find_fenced_blocks(const std::string& raw) {
    std::vector<FencedBlock> blocks;
    bool in_block = false;
    std::string label;
    std::size_t interior_start = 0;
    std::size_t line_start = 0;
    while (line_start <= raw.size()) {
        std::size_t line_end = raw.find('\n', line_start);
        const bool last = line_end == std::string::npos;
        if (last) line_end = raw.size();
        const std::string line =
            trim(std::string_view(raw).substr(line_start, line_end - line_start));
        if (!in_block && line.rfind("```", 0) == 0) {
            in_block = true;
            label = trim(line.substr(3));
            interior_start = last ? raw.size() : line_end + 1;
        } else if (in_block && line == "```") {
            blocks.push_back(
                {label, raw.substr(interior_start, line_start - interior_start)});
            in_block = false;
        }
        if (last) break;
        line_start = line_end + 1;
    }
    if (in_block)  // unterminated fence runs to the end of the response
        blocks.push_back({label, raw.substr(interior_start)});
    return blocks;
}

}  // namespace

std::string extract_code(const std::string& raw_response, Language language) {
    if (trim(raw_response).empty())
        throw ExtractionError("empty completion: nothing to extract");
    const auto blocks = find_fenced_blocks(raw_response);
    for (const auto& block : blocks)  // first block labelled with the language
        if (label_matches(block.label, language) && !trim(block.interior).empty())
            return block.interior;
    const FencedBlock* longest = nullptr;  // otherwise the longest block
    for (const auto& block : blocks)
        if (!trim(block.interior).empty() &&
            (!longest || block.interior.size() > longest->interior.size()))
            longest = &block;
    if (longest) return longest->interior;
    return trim(raw_response);  // otherwise the whole response
}

// ---------------------------------------------------------------------------
// Gateway
// ---------------------------------------------------------------------------

void Gateway::register_provider(std::unique_ptr<Provider> provider,
                                GenerationConfig config, RetryPolicy retry,
                                RateLimit limit) {
    config.validate();
    if (retry.max_attempts < 1)
        throw ConfigError("retry policy: max_attempts must be >= 1");
    const std::string name = provider->name();
    if (providers_.count(name))
        throw ConfigError("provider \"" + name + "\" registered twice");
    Entry entry;
    entry.provider = std::move(provider);
    entry.config = std::move(config);
    entry.retry = retry;
    entry.limit = limit;
    entry.in_flight = std::make_unique<std::mutex>();
    providers_.emplace(name, std::move(entry));
}

bool Gateway::has_provider(const std::string& name) const {
    return providers_.count(name) != 0;
}

const GenerationConfig& Gateway::config_for(const std::string& name) const {
    const auto it = providers_.find(name);
    if (it == providers_.end())
        throw ConfigError("unknown provider \"" + name + "\"");
    return it->second.config;
}

Gateway::Entry& Gateway::entry_for(const std::string& name) {
    const auto it = providers_.find(name);
    if (it == providers_.end())
        throw ConfigError("unknown provider \"" + name + "\"");
    return it->second;
}

GenerationResult Gateway::generate(const std::string& provider_name,
                                   const std::string& prompt) {
    Entry& entry = entry_for(provider_name);
    // max_in_flight == 1 (the default) serialises calls per provider; the
    // requests_per_minute spacing also needs the lock.
    std::unique_lock<std::mutex> guard(*entry.in_flight, std::defer_lock);
    if (entry.limit.max_in_flight <= 1 || entry.limit.requests_per_minute > 0)
        guard.lock();
    if (entry.limit.requests_per_minute > 0) {
        const std::int64_t min_interval_ms =
            60000 / entry.limit.requests_per_minute;
        const auto now_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                std::chrono::steady_clock::now().time_since_epoch())
                                .count();
        const std::int64_t wait = entry.last_request_ms + min_interval_ms - now_ms;
        if (wait > 0)
            std::this_thread::sleep_for(std::chrono::milliseconds(wait));
        entry.last_request_ms = std::max(now_ms, entry.last_request_ms) +
                                std::max<std::int64_t>(wait, 0);
    }

    GenerationResult result;
    result.provider = provider_name;
    result.prompt_hash = sha256_hex(prompt);
    const auto started = std::chrono::steady_clock::now();
    int backoff_ms = entry.retry.initial_backoff_ms;
    for (int attempt = 1;; ++attempt) {
        result.attempt_count = attempt;
        try {
            result.raw_response = entry.provider->complete(prompt, entry.config);
            break;
        } catch (const ProviderError& e) {
            if (!e.retryable() || attempt >= entry.retry.max_attempts)
                throw ProviderError(std::string(e.what()) + " (after " +
                                        std::to_string(attempt) + " attempt" +
                                        (attempt == 1 ? "" : "s") + ")",
                                    e.retryable(), e.http_status());
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
            backoff_ms = std::min(
                static_cast<int>(backoff_ms * entry.retry.multiplier),
                entry.retry.max_backoff_ms);
        }
    }
    result.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - started)
                            .count();
    return result;
}

}  // namespace secbench
