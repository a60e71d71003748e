#include "minipide/utf8.hpp"

#include "minipide/types.hpp"

namespace minipide
{

std::string_view to_string(Severity severity)
{
  switch (severity) {
    case Severity::writeln:
      return "writeln";
    case Severity::warning:
      return "warning";
    case Severity::error:
      return "error";
  }
  return "error";
}

std::optional<Severity> severity_from_string(std::string_view name)
{
  if (name == "writeln") return Severity::writeln;
  if (name == "warning") return Severity::warning;
  if (name == "error") return Severity::error;
  return std::nullopt;
}

}  // namespace minipide

namespace minipide::utf8
{

Decoded decode_at(std::string_view s, std::size_t pos)
{
  const auto byte = [&](std::size_t i) { return static_cast<unsigned char>(s[i]); };
  const unsigned char lead = byte(pos);
  if (lead < 0x80) {
    return {lead, 1, true};
  }

  std::size_t need = 0;
  char32_t cp = 0;
  char32_t min = 0;
  if ((lead & 0xE0) == 0xC0) {
    need = 1;
    cp = lead & 0x1F;
    min = 0x80;
  } else if ((lead & 0xF0) == 0xE0) {
    need = 2;
    cp = lead & 0x0F;
    min = 0x800;
  } else if ((lead & 0xF8) == 0xF0) {
    need = 3;
    cp = lead & 0x07;
    min = 0x10000;
  } else {
    return {0xFFFD, 1, false};
  }
  if (pos + need >= s.size()) {
    return {0xFFFD, 1, false};
  }
  for (std::size_t i = 1; i <= need; ++i) {
    const unsigned char c = byte(pos + i);
    if ((c & 0xC0) != 0x80) {
      return {0xFFFD, 1, false};
    }
    cp = (cp << 6) | (c & 0x3F);
  }
  if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    return {0xFFFD, 1, false};
  }
  return {cp, need + 1, true};
}

void append(std::string & out, char32_t cp)
{
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string encode(char32_t codepoint)
{
  std::string out;
  append(out, codepoint);
  return out;
}

std::size_t length(std::string_view s)
{
  std::size_t n = 0;
  for (std::size_t pos = 0; pos < s.size(); pos += decode_at(s, pos).length) {
    ++n;
  }
  return n;
}

bool is_valid(std::string_view s)
{
  for (std::size_t pos = 0; pos < s.size();) {
    const auto d = decode_at(s, pos);
    if (!d.valid) return false;
    pos += d.length;
  }
  return true;
}

std::vector<std::size_t> boundaries(std::string_view s)
{
  std::vector<std::size_t> out;
  out.reserve(s.size() + 1);
  for (std::size_t pos = 0; pos < s.size(); pos += decode_at(s, pos).length) {
    out.push_back(pos);
  }
  out.push_back(s.size());
  return out;
}

std::size_t byte_offset(std::string_view s, std::size_t char_offset)
{
  std::size_t pos = 0;
  for (std::size_t i = 0; i < char_offset; ++i) {
    if (pos >= s.size()) return std::string_view::npos;
    pos += decode_at(s, pos).length;
  }
  return pos;
}

std::string_view slice(std::string_view s, std::size_t char_begin, std::size_t char_end)
{
  const auto b = byte_offset(s, char_begin);
  const auto e = byte_offset(s, char_end);
  if (b == std::string_view::npos || e == std::string_view::npos || e < b) {
    return {};
  }
  return s.substr(b, e - b);
}

std::u32string to_u32(std::string_view s)
{
  std::u32string out;
  for (std::size_t pos = 0; pos < s.size();) {
    const auto d = decode_at(s, pos);
    out.push_back(d.codepoint);
    pos += d.length;
  }
  return out;
}

}  // namespace minipide::utf8
