#ifndef MINIPIDE_OUTER_SYNTAX_HPP
#define MINIPIDE_OUTER_SYNTAX_HPP

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "minipide/types.hpp"

namespace minipide
{

enum class TokenKind {
  keyword,
  ident,
  number,
  symbol_escape,
  delimiter,
  string_error,  // unterminated comment
  whitespace,
  comment,
  junk,
};

std::string_view to_string(TokenKind kind);

struct Token
{
  TokenKind kind = TokenKind::junk;
  Range range;
  std::string text;

  bool is_trivia() const { return kind == TokenKind::whitespace || kind == TokenKind::comment; }
  bool operator==(const Token &) const = default;
};

inline constexpr std::string_view kMalformedKeyword = "<malformed>";
inline constexpr std::string_view kIgnoredKeyword = "<ignored>";

struct CommandSpan
{
  SpanId id = 0;
  std::string keyword;
  Range range;
  std::string text;
  std::vector<Token> tokens;  // ranges are node offsets
};

struct Partition
{
  std::vector<CommandSpan> spans;
  std::vector<Message> messages;
};

std::span<const std::string_view> command_keywords();
bool is_command_keyword(std::string_view word);

/// Total lexer: the returned tokens always partition `text`.
std::vector<Token> tokenize(std::string_view text);

/// Length in characters of the well-formed symbol escape (`\<name>` or
/// `\<^name>`) starting at `pos`, or 0 when there is none.
std::size_t escape_length(std::u32string_view text, std::size_t pos);

/// Splits `text` into command spans. Span ids are the span ordinals; message
/// span references use the same ordinals. The document model replaces both
/// with session-scoped ids.
Partition partition(std::string_view text);

}  // namespace minipide

#endif
