#ifndef MINIPIDE_UTF8_HPP
#define MINIPIDE_UTF8_HPP

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

// All offsets in the document model count Unicode scalar values. Bytes that do
// not form valid UTF-8 count as one character each, so every string has a
// well-defined length and any slice of it round-trips byte for byte.
namespace minipide::utf8
{

struct Decoded
{
  char32_t codepoint = 0;
  std::size_t length = 1;  // bytes consumed, always >= 1
  bool valid = true;
};

Decoded decode_at(std::string_view s, std::size_t byte_pos);
void append(std::string & out, char32_t codepoint);
std::string encode(char32_t codepoint);

std::size_t length(std::string_view s);
bool is_valid(std::string_view s);

/// Byte offset of every character boundary: result[i] is where character i
/// starts, result.back() == s.size().
std::vector<std::size_t> boundaries(std::string_view s);

/// Byte offset of the character at `char_offset`, or npos when it lies past
/// the end. `char_offset == length(s)` maps to s.size().
std::size_t byte_offset(std::string_view s, std::size_t char_offset);

std::string_view slice(std::string_view s, std::size_t char_begin, std::size_t char_end);

std::u32string to_u32(std::string_view s);

}  // namespace minipide::utf8

#endif
