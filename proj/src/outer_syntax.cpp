#include "minipide/outer_syntax.hpp"

#include <algorithm>
#include <array>

#include "minipide/utf8.hpp"

namespace minipide
{
namespace
{

constexpr std::array<std::string_view, 8> kKeywords = {
  "theory", "imports", "begin", "def", "eval", "lemma", "sleep", "end"};

bool is_ident_start(char32_t c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; }

bool is_ident_part(char32_t c) { return is_ident_start(c) || (c >= '0' && c <= '9') || c == '\''; }

bool is_digit(char32_t c) { return c >= '0' && c <= '9'; }

bool is_space(char32_t c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

bool is_delimiter(char32_t c)
{
  switch (c) {
    case '=':
    case '+':
    case '-':
    case '*':
    case '<':
    case '(':
    case ')':
    case ':':
    case ',':
      return true;
    default:
      return false;
  }
}

std::size_t scan_while(std::u32string_view s, std::size_t pos, bool (*pred)(char32_t))
{
  while (pos < s.size() && pred(s[pos])) ++pos;
  return pos;
}

}  // namespace

std::string_view to_string(TokenKind kind)
{
  switch (kind) {
    case TokenKind::keyword:
      return "keyword";
    case TokenKind::ident:
      return "ident";
    case TokenKind::number:
      return "number";
    case TokenKind::symbol_escape:
      return "symbol_escape";
    case TokenKind::delimiter:
      return "delimiter";
    case TokenKind::string_error:
      return "string_error";
    case TokenKind::whitespace:
      return "whitespace";
    case TokenKind::comment:
      return "comment";
    case TokenKind::junk:
      return "junk";
  }
  return "junk";
}

std::span<const std::string_view> command_keywords() { return kKeywords; }

bool is_command_keyword(std::string_view word)
{
  return std::find(kKeywords.begin(), kKeywords.end(), word) != kKeywords.end();
}

std::size_t escape_length(std::u32string_view s, std::size_t pos)
{
  // \<name> or \<^name>, name = [A-Za-z][A-Za-z0-9_']*
  if (pos + 1 >= s.size() || s[pos] != '\\' || s[pos + 1] != '<') return 0;
  std::size_t i = pos + 2;
  if (i < s.size() && s[i] == '^') ++i;
  if (i >= s.size() || !((s[i] >= 'A' && s[i] <= 'Z') || (s[i] >= 'a' && s[i] <= 'z'))) return 0;
  i = scan_while(s, i, is_ident_part);
  if (i >= s.size() || s[i] != '>') return 0;
  return i + 1 - pos;
}

std::vector<Token> tokenize(std::string_view text)
{
  const std::u32string chars = utf8::to_u32(text);
  const std::vector<std::size_t> bytes = utf8::boundaries(text);
  const std::u32string_view s = chars;

  std::vector<Token> tokens;
  const auto emit = [&](TokenKind kind, std::size_t begin, std::size_t end) {
    tokens.push_back(
      {kind, {begin, end}, std::string(text.substr(bytes[begin], bytes[end] - bytes[begin]))});
  };

  std::size_t pos = 0;
  while (pos < s.size()) {
    const char32_t c = s[pos];
    if (is_space(c)) {
      emit(TokenKind::whitespace, pos, scan_while(s, pos, is_space));
    } else if (c == '(' && pos + 1 < s.size() && s[pos + 1] == '*') {
      const auto close = s.find(U"*)", pos + 2);
      if (close == std::u32string_view::npos) {
        emit(TokenKind::string_error, pos, s.size());
      } else {
        emit(TokenKind::comment, pos, close + 2);
      }
    } else if (const auto esc = escape_length(s, pos); esc > 0) {
      emit(TokenKind::symbol_escape, pos, pos + esc);
    } else if (is_ident_start(c)) {
      std::size_t end = scan_while(s, pos, is_ident_part);
      const std::u32string_view base = s.substr(pos, end - pos);
      const bool keyword = std::any_of(kKeywords.begin(), kKeywords.end(), [&](std::string_view k) {
        return std::equal(k.begin(), k.end(), base.begin(), base.end());
      });
      if (keyword) {
        emit(TokenKind::keyword, pos, end);
      } else {
        // identifiers continue through control escapes such as \<^sub>
        while (end + 2 < s.size() && s[end] == '\\' && s[end + 1] == '<' && s[end + 2] == '^') {
          const auto len = escape_length(s, end);
          if (len == 0) break;
          end = scan_while(s, end + len, is_ident_part);
        }
        emit(TokenKind::ident, pos, end);
      }
    } else if (is_digit(c)) {
      emit(TokenKind::number, pos, scan_while(s, pos, is_digit));
    } else if (is_delimiter(c)) {
      emit(TokenKind::delimiter, pos, pos + 1);
    } else {
      emit(TokenKind::junk, pos, pos + 1);
    }
    pos = tokens.back().range.end;
  }
  return tokens;
}

Partition partition(std::string_view text)
{
  Partition result;
  std::vector<Token> tokens = tokenize(text);
  if (tokens.empty()) return result;

  std::vector<std::size_t> starts;  // token indices of command keywords
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].kind == TokenKind::keyword) starts.push_back(i);
  }

  const auto make_span = [&](std::string keyword, std::size_t first, std::size_t last) {
    CommandSpan span;
    span.id = result.spans.size();
    span.keyword = std::move(keyword);
    span.range = {tokens[first].range.begin, tokens[last - 1].range.end};
    for (std::size_t i = first; i < last; ++i) {
      span.text += tokens[i].text;
      span.tokens.push_back(tokens[i]);
    }
    result.spans.push_back(std::move(span));
  };

  const std::size_t lead_end = starts.empty() ? tokens.size() : starts.front();
  const auto lead_solid = std::find_if(tokens.begin(), tokens.begin() + lead_end,
                                       [](const Token & t) { return !t.is_trivia(); });
  std::size_t first_command_token = 0;
  if (lead_solid != tokens.begin() + lead_end) {
    // Junk before the first command: one malformed span that also owns the
    // trivia up to the first keyword.
    auto last_solid = std::find_if(std::make_reverse_iterator(tokens.begin() + lead_end),
                                   std::make_reverse_iterator(tokens.begin()),
                                   [](const Token & t) { return !t.is_trivia(); });
    const Range bad{lead_solid->range.begin, last_solid->range.end};
    make_span(std::string(kMalformedKeyword), 0, lead_end);
    result.messages.push_back({Severity::error, "unexpected text before the first command",
                               result.spans.back().id, bad});
    first_command_token = lead_end;
  } else if (starts.empty()) {
    make_span(std::string(kIgnoredKeyword), 0, tokens.size());
    return result;
  }

  for (std::size_t k = 0; k < starts.size(); ++k) {
    const std::size_t first = k == 0 ? first_command_token : starts[k];
    const std::size_t last = k + 1 < starts.size() ? starts[k + 1] : tokens.size();
    make_span(tokens[starts[k]].text, first, last);
  }
  return result;
}

}  // namespace minipide
