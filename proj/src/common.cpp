#include "secbench/common.hpp"

#include <openssl/evp.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace secbench {

namespace fs = std::filesystem;

std::string language_name(Language lang) {
    switch (lang) {
        case Language::C: return "C";
        case Language::Cpp: return "C++";
        case Language::Java: return "Java";
        case Language::Python: return "Python";
    }
    throw Error("unreachable language value");
}

std::string language_token(Language lang) {
    switch (lang) {
        case Language::C: return "c";
        case Language::Cpp: return "cpp";
        case Language::Java: return "java";
        case Language::Python: return "python";
    }
    throw Error("unreachable language value");
}

std::string language_extension(Language lang) {
    switch (lang) {
        case Language::C: return "c";
        case Language::Cpp: return "cpp";
        case Language::Java: return "java";
        case Language::Python: return "py";
    }
    throw Error("unreachable language value");
}

Language parse_language(std::string_view text) {
    const std::string t = to_lower(trim(text));
    if (t == "c") return Language::C;
    if (t == "c++" || t == "cpp" || t == "cxx") return Language::Cpp;
    if (t == "java") return Language::Java;
    if (t == "python" || t == "py") return Language::Python;
    throw ConfigError("unsupported language: \"" + std::string(trim(text)) +
                      "\" (expected C, C++, Java, or Python)");
}

std::string method_label(PromptMethod method) {
    switch (method) {
        case PromptMethod::Vanilla: return "Vanilla";
        case PromptMethod::ZeroShot: return "ZeroShot";
        case PromptMethod::ZeroShotCoT: return "CoT";
        case PromptMethod::WaZeroCoT: return "WA-0CoT";
    }
    throw Error("unreachable method value");
}

PromptMethod parse_method(std::string_view text) {
    std::string t = to_lower(trim(text));
    t.erase(std::remove_if(t.begin(), t.end(),
                           [](unsigned char c) { return c == '-' || c == '_' || c == ' '; }),
            t.end());
    if (t == "vanilla") return PromptMethod::Vanilla;
    if (t == "zeroshot" || t == "0shot") return PromptMethod::ZeroShot;
    if (t == "cot" || t == "zeroshotcot" || t == "0cot")
        return PromptMethod::ZeroShotCoT;
    if (t == "wa0cot" || t == "wazerocot" || t == "wacot")
        return PromptMethod::WaZeroCoT;
    throw ConfigError("unsupported prompt method: \"" + std::string(trim(text)) +
                      "\" (expected Vanilla, ZeroShot, CoT, or WA-0CoT)");
}

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) ==
                      std::tolower(static_cast<unsigned char>(y));
           });
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            out.emplace_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '\n') {
            std::size_t end = i;
            if (end > start && text[end - 1] == '\r') --end;
            lines.emplace_back(text.substr(start, end - start));
            start = i + 1;
        }
    }
    if (start < text.size()) {
        std::size_t end = text.size();
        if (end > start && text[end - 1] == '\r') --end;
        lines.emplace_back(text.substr(start, end - start));
    }
    return lines;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx, data.data(), data.size()) != 1 ||
        EVP_DigestFinal_ex(ctx, digest, &len) != 1) {
        EVP_MD_CTX_free(ctx);
        throw Error("SHA-256 digest failed");
    }
    EVP_MD_CTX_free(ctx);
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

std::string iso8601_utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file: " + path);
    std::ostringstream out;
    out << in.rdbuf();
    if (in.bad()) throw Error("read failed: " + path);
    return out.str();
}

void write_file_atomic(const std::string& path, std::string_view content) {
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.parent_path() /
                         (target.filename().string() + ".tmp." +
                          std::to_string(::getpid()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot create file: " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw Error("write failed: " + tmp.string());
    }
    fs::rename(tmp, target);
}

}  // namespace secbench
