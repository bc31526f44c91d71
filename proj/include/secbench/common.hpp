#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace secbench {

inline constexpr const char* kToolVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Error taxonomy.  Everything thrown by this library derives from Error so
// the CLI can catch one type at the top level and turn it into exit code 1.
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    explicit ParseError(const std::string& what, long line = -1)
        : Error(line >= 0 ? what + " (line " + std::to_string(line) + ")" : what),
          line_(line) {}
    long line() const { return line_; }

private:
    long line_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class ExtractionError : public Error {
public:
    using Error::Error;
};

// Raised when a provider call fails.  retryable() drives the retry loop.
class ProviderError : public Error {
public:
    ProviderError(const std::string& what, bool retryable, int http_status = 0)
        : Error(what), retryable_(retryable), http_status_(http_status) {}
    bool retryable() const { return retryable_; }
    int http_status() const { return http_status_; }

private:
    bool retryable_;
    int http_status_;
};

// Classification reply that contains no JSON string array.  Keeps the raw
// model output so a failed cell can be audited later.
class TagParseError : public ParseError {
public:
    explicit TagParseError(const std::string& what, std::string raw)
        : ParseError(what), raw_(std::move(raw)) {}
    const std::string& raw() const { return raw_; }

private:
    std::string raw_;
};

// ---------------------------------------------------------------------------
// Core enums shared by every module.
// ---------------------------------------------------------------------------

enum class Language { C, Cpp, Java, Python };

inline constexpr Language kAllLanguages[] = {Language::C, Language::Cpp,
                                             Language::Java, Language::Python};

std::string language_name(Language lang);       // "C", "C++", "Java", "Python"
std::string language_token(Language lang);      // "c", "cpp", "java", "python"
std::string language_extension(Language lang);  // "c", "cpp", "java", "py"
Language parse_language(std::string_view text);

enum class PromptMethod { Vanilla, ZeroShot, ZeroShotCoT, WaZeroCoT };

inline constexpr PromptMethod kAllMethods[] = {
    PromptMethod::Vanilla, PromptMethod::ZeroShot, PromptMethod::ZeroShotCoT,
    PromptMethod::WaZeroCoT};

// Report/directory label: "Vanilla", "ZeroShot", "CoT", "WA-0CoT".
std::string method_label(PromptMethod method);
PromptMethod parse_method(std::string_view text);

// ---------------------------------------------------------------------------
// Small string/file helpers used across modules.
// ---------------------------------------------------------------------------

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
std::vector<std::string> split(std::string_view s, char sep);
std::vector<std::string> split_lines(std::string_view text);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

std::string sha256_hex(std::string_view data);

// Current UTC time as e.g. "2024-05-01T12:00:00Z".
std::string iso8601_utc_now();

std::string read_file(const std::string& path);
// Writes via a temp file in the same directory plus rename, so a crash can
// never leave a half-written artifact behind.
void write_file_atomic(const std::string& path, std::string_view content);

}  // namespace secbench
