#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace twinworld {

// Decodes UTF-8 into code points. Invalid bytes decode as U+FFFD.
std::u32string utf8_decode(std::string_view s);

// Word characters are ASCII alphanumerics, '_' and any non-ASCII byte, so
// boundaries never split a multi-byte sequence.
bool is_word_byte(char c) noexcept;

// Position of the first occurrence of `needle` at or after `from` that is
// delimited by non-word bytes (or the string ends) on both sides.
std::size_t find_whole_word(std::string_view haystack, std::string_view needle, std::size_t from = 0);
bool contains_whole_word(std::string_view haystack, std::string_view needle);

// Single left-to-right pass; at each position the longest matching key wins.
// Replaced text is never rescanned, so chained mappings (a->b, b->c) are safe.
std::string replace_whole_words(std::string_view text, const std::map<std::string, std::string>& mapping);

// A markdown reference of the form [display](<ref:ID>).
struct LinkSpan {
  std::string display;
  std::string id;
  std::size_t begin = 0;  // byte offset of '['
  std::size_t end = 0;    // one past ')'
};

std::vector<LinkSpan> parse_links(std::string_view text);
// Replaces every reference by its display text.
std::string strip_links(std::string_view text);
std::string make_link(std::string_view display, std::string_view id);

std::string trim(std::string_view s);
std::vector<std::string> split_lines(std::string_view s);
bool starts_with(std::string_view s, std::string_view prefix) noexcept;

// Deterministic generator with an unbiased bounded draw; std distributions
// are not specified bit-exactly across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t next() { return engine_(); }
  // Uniform integer in [0, n). n must be > 0.
  std::size_t index(std::size_t n);
  // Uniform real in [0, 1).
  double uniform01();

 private:
  std::mt19937_64 engine_;
};

}  // namespace twinworld
