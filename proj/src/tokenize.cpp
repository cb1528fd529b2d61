#include "foveate/tokenize.hpp"

#include <cctype>
#include <cstdint>

namespace foveate {

namespace {

bool is_space_codepoint(std::uint32_t cp) {
  switch (cp) {
    case 0x09: case 0x0a: case 0x0b: case 0x0c: case 0x0d: case 0x20:
    case 0x85: case 0xa0: case 0x1680:
    case 0x2028: case 0x2029: case 0x202f: case 0x205f: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200a;
  }
}

// Decodes one UTF-8 codepoint starting at position i; advances i past it.
// Malformed bytes are returned as-is (single byte) so they stay inside tokens.
std::uint32_t decode_utf8(std::string_view s, std::size_t& i) {
  unsigned char b0 = static_cast<unsigned char>(s[i]);
  std::size_t len = 1;
  std::uint32_t cp = b0;
  if ((b0 & 0x80) == 0x00) {
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
  } else {
    ++i;
    return b0;
  }
  if (i + len > s.size()) {
    ++i;
    return b0;
  }
  for (std::size_t k = 1; k < len; ++k) {
    unsigned char bk = static_cast<unsigned char>(s[i + k]);
    if ((bk & 0xc0) != 0x80) {
      ++i;
      return b0;
    }
    cp = (cp << 6) | (bk & 0x3f);
  }
  i += len;
  return cp;
}

bool is_ascii_punct(char c) {
  unsigned char u = static_cast<unsigned char>(c);
  return u < 0x80 && std::ispunct(u) != 0;
}

void strip_and_emit(std::string token, std::vector<std::string>& out) {
  std::size_t begin = 0;
  std::size_t end = token.size();
  while (begin < end && is_ascii_punct(token[begin])) ++begin;
  while (end > begin && is_ascii_punct(token[end - 1])) --end;
  if (end > begin) out.emplace_back(token.substr(begin, end - begin));
}

}  // namespace

std::vector<std::string> tokenize(std::string_view raw) {
  std::vector<std::string> tokens;
  std::string current;
  std::size_t i = 0;
  while (i < raw.size()) {
    std::size_t start = i;
    std::uint32_t cp = decode_utf8(raw, i);
    if (is_space_codepoint(cp)) {
      if (!current.empty()) {
        strip_and_emit(std::move(current), tokens);
        current.clear();
      }
      continue;
    }
    for (std::size_t k = start; k < i; ++k) {
      char c = raw[k];
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
      current.push_back(c);
    }
  }
  if (!current.empty()) strip_and_emit(std::move(current), tokens);
  return tokens;
}

}  // namespace foveate
