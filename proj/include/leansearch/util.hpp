#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace leansearch {

using json = nlohmann::json;

// Base for every error the library raises on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A line-delimited input file could not be parsed.
class ParseError : public Error {
public:
    ParseError(std::string what, std::size_t line)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// A caller violated an operation's precondition.
class PreconditionError : public Error {
public:
    using Error::Error;
};

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
bool starts_with_ci(std::string_view s, std::string_view prefix);

// First `max_chars` Unicode code points of a UTF-8 string. Never splits a
// multi-byte sequence.
std::string utf8_prefix(std::string_view s, std::size_t max_chars);
std::size_t utf8_length(std::string_view s);

// Stable 64-bit FNV-1a, used for prompt/text fingerprints and seeds.
std::uint64_t fnv1a64(std::string_view s, std::uint64_t basis = 0xcbf29ce484222325ULL);
std::string fingerprint(std::string_view s);

std::uint64_t splitmix64(std::uint64_t& state);

// Removes a surrounding ``` fence (with optional language tag) if present.
std::string strip_code_fences(std::string_view text);

// Returns the first balanced {...} object found in `text`, parsed, or throws
// ParseError. Code fences are stripped first.
json extract_json_object(std::string_view text);

std::vector<std::string> read_lines(const std::string& path);
void write_file_atomic(const std::string& path, std::string_view contents);
std::string read_file(const std::string& path);

std::string format_fixed(double value, int decimals);

// Runs fn(i) for i in [0, n) with at most `max_in_flight` concurrent workers.
// Exceptions from fn propagate (the first one wins) after all workers join.
void parallel_for(std::size_t n, std::size_t max_in_flight,
                  const std::function<void(std::size_t)>& fn);

}  // namespace leansearch
