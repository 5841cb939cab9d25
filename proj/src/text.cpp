#include "twinworld/text.hpp"

#include <algorithm>
#include <cctype>
#include <limits>

namespace twinworld {

std::u32string utf8_decode(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    auto b0 = static_cast<unsigned char>(s[i]);
    int len = 0;
    char32_t cp = 0;
    if (b0 < 0x80) {
      len = 1;
      cp = b0;
    } else if ((b0 & 0xe0) == 0xc0) {
      len = 2;
      cp = b0 & 0x1f;
    } else if ((b0 & 0xf0) == 0xe0) {
      len = 3;
      cp = b0 & 0x0f;
    } else if ((b0 & 0xf8) == 0xf0) {
      len = 4;
      cp = b0 & 0x07;
    }
    bool ok = len > 0 && i + len <= s.size();
    for (int k = 1; ok && k < len; ++k) {
      auto b = static_cast<unsigned char>(s[i + k]);
      if ((b & 0xc0) != 0x80) ok = false;
      cp = (cp << 6) | (b & 0x3f);
    }
    if (!ok) {
      out.push_back(U'�');
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

bool is_word_byte(char c) noexcept {
  auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || (u >= '0' && u <= '9') || (u >= 'a' && u <= 'z') || (u >= 'A' && u <= 'Z') || u == '_';
}

namespace {

bool bounded_at(std::string_view hay, std::size_t pos, std::size_t len) {
  if (pos > 0 && is_word_byte(hay[pos - 1]) && is_word_byte(hay[pos])) return false;
  std::size_t end = pos + len;
  if (end < hay.size() && is_word_byte(hay[end]) && is_word_byte(hay[end - 1])) return false;
  return true;
}

}  // namespace

std::size_t find_whole_word(std::string_view haystack, std::string_view needle, std::size_t from) {
  if (needle.empty()) return std::string_view::npos;
  std::size_t pos = haystack.find(needle, from);
  while (pos != std::string_view::npos) {
    if (bounded_at(haystack, pos, needle.size())) return pos;
    pos = haystack.find(needle, pos + 1);
  }
  return std::string_view::npos;
}

bool contains_whole_word(std::string_view haystack, std::string_view needle) {
  return find_whole_word(haystack, needle) != std::string_view::npos;
}

std::string replace_whole_words(std::string_view text, const std::map<std::string, std::string>& mapping) {
  // Bucket keys by first byte, longest first.
  std::vector<std::vector<const std::pair<const std::string, std::string>*>> buckets(256);
  for (const auto& kv : mapping) {
    if (kv.first.empty()) continue;
    buckets[static_cast<unsigned char>(kv.first[0])].push_back(&kv);
  }
  for (auto& b : buckets) {
    std::stable_sort(b.begin(), b.end(), [](auto* a, auto* c) { return a->first.size() > c->first.size(); });
  }
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const auto& bucket = buckets[static_cast<unsigned char>(text[i])];
    bool replaced = false;
    for (const auto* kv : bucket) {
      const std::string& key = kv->first;
      if (text.compare(i, key.size(), key) == 0 && bounded_at(text, i, key.size())) {
        out += kv->second;
        i += key.size();
        replaced = true;
        break;
      }
    }
    if (!replaced) out.push_back(text[i++]);
  }
  return out;
}

std::vector<LinkSpan> parse_links(std::string_view text) {
  static constexpr std::string_view open_ref = "](<ref:";
  std::vector<LinkSpan> links;
  std::size_t pos = 0;
  while ((pos = text.find('[', pos)) != std::string_view::npos) {
    std::size_t close = text.find(open_ref, pos + 1);
    if (close == std::string_view::npos) break;
    std::size_t nested = text.find_first_of("[]\n", pos + 1);
    if (nested < close) {
      pos = nested;
      continue;
    }
    std::size_t id_begin = close + open_ref.size();
    std::size_t id_end = text.find(">)", id_begin);
    if (id_end == std::string_view::npos) break;
    std::string_view id = text.substr(id_begin, id_end - id_begin);
    if (id.empty() || id.find_first_of(" \n<>()[]") != std::string_view::npos) {
      pos = pos + 1;
      continue;
    }
    LinkSpan span;
    span.display = std::string(text.substr(pos + 1, close - pos - 1));
    span.id = std::string(id);
    span.begin = pos;
    span.end = id_end + 2;
    links.push_back(std::move(span));
    pos = id_end + 2;
  }
  return links;
}

std::string strip_links(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t cursor = 0;
  for (const auto& link : parse_links(text)) {
    out.append(text.substr(cursor, link.begin - cursor));
    out += link.display;
    cursor = link.end;
  }
  out.append(text.substr(cursor));
  return out;
}

std::string make_link(std::string_view display, std::string_view id) {
  std::string s;
  s.reserve(display.size() + id.size() + 10);
  s += '[';
  s += display;
  s += "](<ref:";
  s += id;
  s += ">)";
  return s;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_lines(std::string_view s) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t nl = s.find('\n', start);
    if (nl == std::string_view::npos) {
      if (start < s.size()) lines.emplace_back(s.substr(start));
      break;
    }
    lines.emplace_back(s.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

bool starts_with(std::string_view s, std::string_view prefix) noexcept {
  return s.substr(0, prefix.size()) == prefix;
}

std::size_t Rng::index(std::size_t n) {
  // Rejection sampling on the top of the range removes modulo bias.
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return static_cast<std::size_t>(x % bound);
}

double Rng::uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

}  // namespace twinworld
