#include "minipide/symbols.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>
#include <tuple>

#include "minipide/outer_syntax.hpp"
#include "minipide/utf8.hpp"

namespace minipide
{
namespace
{

bool valid_symbol_name(std::string_view name)
{
  if (!name.empty() && name.front() == '^') name.remove_prefix(1);
  if (name.empty() || !std::isalpha(static_cast<unsigned char>(name.front()))) return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
  });
}

std::vector<std::string_view> split(std::string_view s, char sep)
{
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto at = s.find(sep, start);
    out.push_back(s.substr(start, at == std::string_view::npos ? std::string_view::npos : at - start));
    if (at == std::string_view::npos) break;
    start = at + 1;
  }
  return out;
}

std::optional<SymbolStyle> parse_style(std::string_view s)
{
  if (s == "glyph") return SymbolStyle::glyph;
  if (s == "control_sub") return SymbolStyle::control_sub;
  if (s == "control_sup") return SymbolStyle::control_sup;
  return std::nullopt;
}

std::optional<char32_t> parse_codepoint(std::string_view s)
{
  if (s.size() < 3 || s.size() > 8 || s.substr(0, 2) != "U+") return std::nullopt;
  std::uint32_t value = 0;
  const auto digits = s.substr(2);
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value, 16);
  if (ec != std::errc{} || ptr != digits.data() + digits.size()) return std::nullopt;
  if (value > 0x10FFFF || (value >= 0xD800 && value <= 0xDFFF)) return std::nullopt;
  return static_cast<char32_t>(value);
}

TextStyle text_style(SymbolStyle style)
{
  switch (style) {
    case SymbolStyle::control_sub:
      return TextStyle::sub;
    case SymbolStyle::control_sup:
      return TextStyle::sup;
    case SymbolStyle::glyph:
      break;
  }
  return TextStyle::plain;
}

std::string control_escape(const SymbolTable & table, TextStyle style)
{
  const auto wanted = style == TextStyle::sub ? SymbolStyle::control_sub : SymbolStyle::control_sup;
  for (const auto & e : table.entries()) {
    if (e.style == wanted) return e.escape();
  }
  return style == TextStyle::sub ? "\\<^sub>" : "\\<^sup>";
}

std::string glyph_or_char(const SymbolTable & table, char32_t c)
{
  if (const auto * e = table.find_glyph(c)) return e->escape();
  return utf8::encode(c);
}

}  // namespace

std::string_view to_string(SymbolStyle style)
{
  switch (style) {
    case SymbolStyle::glyph:
      return "glyph";
    case SymbolStyle::control_sub:
      return "control_sub";
    case SymbolStyle::control_sup:
      return "control_sup";
  }
  return "glyph";
}

std::string_view to_string(TextStyle style)
{
  switch (style) {
    case TextStyle::plain:
      return "plain";
    case TextStyle::sub:
      return "sub";
    case TextStyle::sup:
      return "sup";
  }
  return "plain";
}

TableFormatError::TableFormatError(std::size_t line, const std::string & what)
    : Error("symbol table line " + std::to_string(line) + ": " + what), line_(line)
{
}

SymbolTable::SymbolTable(std::vector<SymbolEntry> entries) : entries_(std::move(entries))
{
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto & e = entries_[i];
    if (!by_name_.emplace(e.name, i).second) {
      throw Error("duplicate symbol name: " + e.name);
    }
    if (e.style == SymbolStyle::glyph) {
      if (!e.codepoint) throw Error("glyph symbol without codepoint: " + e.name);
      if (!by_glyph_.emplace(*e.codepoint, i).second) {
        throw Error("duplicate glyph codepoint for symbol: " + e.name);
      }
    } else if (e.codepoint) {
      throw Error("control symbol with codepoint: " + e.name);
    }
  }
}

std::vector<SymbolEntry> load_table(std::string_view source)
{
  std::vector<SymbolEntry> entries;
  std::set<std::string, std::less<>> names;
  std::set<char32_t> glyphs;

  std::size_t line_no = 0;
  for (auto line : split(source, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos || line.front() == '#') continue;

    const auto fields = split(line, '\t');
    if (fields.size() != 4) {
      throw TableFormatError(line_no, "expected 4 tab-separated fields, got " + std::to_string(fields.size()));
    }
    SymbolEntry entry;
    entry.name = std::string(fields[0]);
    if (!valid_symbol_name(entry.name)) throw TableFormatError(line_no, "invalid symbol name '" + entry.name + "'");
    if (!names.insert(entry.name).second) throw TableFormatError(line_no, "duplicate symbol name '" + entry.name + "'");

    const auto style = parse_style(fields[3]);
    if (!style) throw TableFormatError(line_no, "unknown style '" + std::string(fields[3]) + "'");
    entry.style = *style;

    const bool control = entry.style != SymbolStyle::glyph;
    if (control != (entry.name.front() == '^')) {
      throw TableFormatError(line_no, "control symbols, and only those, have names starting with '^'");
    }
    if (control) {
      if (fields[1] != "-") throw TableFormatError(line_no, "control symbols take codepoint '-'");
    } else {
      entry.codepoint = parse_codepoint(fields[1]);
      if (!entry.codepoint) throw TableFormatError(line_no, "invalid codepoint '" + std::string(fields[1]) + "'");
      if (!glyphs.insert(*entry.codepoint).second) throw TableFormatError(line_no, "duplicate codepoint");
    }

    for (auto abbrev : split(fields[2], ';')) {
      if (abbrev.empty()) continue;
      const bool ascii = std::all_of(abbrev.begin(), abbrev.end(), [](char c) { return c > ' ' && c < 0x7F; });
      if (!ascii) throw TableFormatError(line_no, "abbreviations must be printable ASCII");
      entry.abbrevs.emplace_back(abbrev);
    }
    entries.push_back(std::move(entry));
  }
  return entries;
}

SymbolTable SymbolTable::parse(std::string_view source) { return SymbolTable(load_table(source)); }

const SymbolTable & SymbolTable::bundled()
{
  static const SymbolTable table = parse(bundled_source());
  return table;
}

const SymbolEntry * SymbolTable::find_name(std::string_view name) const
{
  const auto it = by_name_.find(name);
  return it == by_name_.end() ? nullptr : &entries_[it->second];
}

const SymbolEntry * SymbolTable::find_glyph(char32_t codepoint) const
{
  const auto it = by_glyph_.find(codepoint);
  return it == by_glyph_.end() ? nullptr : &entries_[it->second];
}

StyledText StyledText::from_glyphs(std::string text)
{
  StyledText out;
  const auto n = utf8::length(text);
  out.text = std::move(text);
  if (n > 0) out.styles.push_back({{0, n}, TextStyle::plain});
  return out;
}

std::size_t StyledText::to_presentation(std::size_t raw_offset) const
{
  if (offset_map.empty()) return raw_offset;
  if (raw_offset >= offset_map.back().raw.end) return offset_map.back().presentation.end;
  const auto it = std::upper_bound(offset_map.begin(), offset_map.end(), raw_offset,
                                   [](std::size_t off, const OffsetSegment & seg) { return off < seg.raw.end; });
  if (it->kind == OffsetSegment::Kind::literal) return it->presentation.begin + (raw_offset - it->raw.begin);
  return it->presentation.begin;
}

std::size_t StyledText::to_raw(std::size_t presentation_offset) const
{
  if (offset_map.empty()) return presentation_offset;
  if (presentation_offset >= offset_map.back().presentation.end) return offset_map.back().raw.end;
  const auto it = std::upper_bound(
    offset_map.begin(), offset_map.end(), presentation_offset,
    [](std::size_t off, const OffsetSegment & seg) { return off < seg.presentation.end; });
  if (it->kind == OffsetSegment::Kind::literal) return it->raw.begin + (presentation_offset - it->presentation.begin);
  return it->raw.begin;
}

TextStyle StyledText::style_at(std::size_t presentation_offset) const
{
  for (const auto & run : styles) {
    if (run.range.begin <= presentation_offset && presentation_offset < run.range.end) return run.style;
  }
  return TextStyle::plain;
}

StyledText decode(std::string_view raw, const SymbolTable & table)
{
  const std::u32string s = utf8::to_u32(raw);
  StyledText out;
  std::vector<TextStyle> char_styles;

  const auto push = [&](OffsetSegment::Kind kind, Range raw_range, char32_t c, TextStyle style) {
    const std::size_t p = char_styles.size();
    utf8::append(out.text, c);
    char_styles.push_back(style);
    if (kind == OffsetSegment::Kind::literal && !out.offset_map.empty() &&
        out.offset_map.back().kind == OffsetSegment::Kind::literal) {
      out.offset_map.back().raw.end = raw_range.end;
      out.offset_map.back().presentation.end = p + 1;
    } else {
      out.offset_map.push_back({raw_range, {p, p + 1}, kind});
    }
  };
  const auto push_literal = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) push(OffsetSegment::Kind::literal, {i, i + 1}, s[i], TextStyle::plain);
  };
  const auto lookup = [&](std::size_t pos, std::size_t len) {
    const std::u32string_view name(s.data() + pos + 2, len - 3);
    std::string ascii;
    for (char32_t c : name) ascii.push_back(static_cast<char>(c));  // names are ASCII by grammar
    return table.find_name(ascii);
  };

  std::size_t pos = 0;
  while (pos < s.size()) {
    const std::size_t len = escape_length(s, pos);
    if (len == 0) {
      push_literal(pos, pos + 1);
      ++pos;
      continue;
    }
    const SymbolEntry * entry = lookup(pos, len);
    if (entry && entry->style == SymbolStyle::glyph) {
      push(OffsetSegment::Kind::glyph, {pos, pos + len}, *entry->codepoint, TextStyle::plain);
      pos += len;
      continue;
    }
    if (entry) {
      // A control symbol styles exactly the next glyph or character.
      const std::size_t next = pos + len;
      const TextStyle style = text_style(entry->style);
      if (next < s.size()) {
        if (const std::size_t len2 = escape_length(s, next); len2 > 0) {
          const SymbolEntry * target = lookup(next, len2);
          if (target && target->style == SymbolStyle::glyph) {
            push(OffsetSegment::Kind::control_glyph, {pos, next + len2}, *target->codepoint, style);
            pos = next + len2;
            continue;
          }
        } else {
          push(OffsetSegment::Kind::control_char, {pos, next + 1}, s[next], style);
          pos = next + 1;
          continue;
        }
      }
    }
    // unknown escape, or a control symbol with nothing it can style
    push_literal(pos, pos + len);
    pos += len;
  }

  for (std::size_t i = 0; i < char_styles.size(); ++i) {
    if (!out.styles.empty() && out.styles.back().style == char_styles[i]) {
      out.styles.back().range.end = i + 1;
    } else {
      out.styles.push_back({{i, i + 1}, char_styles[i]});
    }
  }
  return out;
}

std::string encode(const StyledText & styled, const SymbolTable & table)
{
  const std::u32string chars = utf8::to_u32(styled.text);
  std::string out;

  if (styled.offset_map.empty()) {
    for (std::size_t i = 0; i < chars.size(); ++i) {
      const TextStyle style = styled.style_at(i);
      if (style != TextStyle::plain) out += control_escape(table, style);
      out += glyph_or_char(table, chars[i]);
    }
    return out;
  }

  for (const auto & seg : styled.offset_map) {
    const std::size_t p = seg.presentation.begin;
    switch (seg.kind) {
      case OffsetSegment::Kind::literal:
        for (std::size_t i = p; i < seg.presentation.end; ++i) utf8::append(out, chars[i]);
        break;
      case OffsetSegment::Kind::glyph:
        out += glyph_or_char(table, chars[p]);
        break;
      case OffsetSegment::Kind::control_char:
        out += control_escape(table, styled.style_at(p));
        utf8::append(out, chars[p]);
        break;
      case OffsetSegment::Kind::control_glyph:
        out += control_escape(table, styled.style_at(p));
        out += glyph_or_char(table, chars[p]);
        break;
    }
  }
  return out;
}

CompletionTables CompletionTables::bundled()
{
  CompletionTables tables;
  for (auto k : command_keywords()) tables.keywords.emplace_back(k);
  tables.keywords.emplace_back("true");
  tables.keywords.emplace_back("false");
  tables.symbols = &SymbolTable::bundled();
  return tables;
}

std::vector<CompletionItem> complete(std::string_view prefix, const CompletionTables & tables)
{
  std::vector<CompletionItem> out;
  if (prefix.empty()) return out;

  const auto starts_with = [](std::string_view s, std::string_view p) { return s.substr(0, p.size()) == p; };
  const auto describe = [](const SymbolEntry & e) {
    if (e.codepoint) return e.escape() + " " + utf8::encode(*e.codepoint);
    return e.escape() + (e.style == SymbolStyle::control_sub ? " (subscript)" : " (superscript)");
  };

  std::vector<std::string> keywords;
  for (const auto & k : tables.keywords) {
    if (starts_with(k, prefix)) keywords.push_back(k);
  }
  std::sort(keywords.begin(), keywords.end());
  for (auto & k : keywords) out.push_back({k, k + " (keyword)"});

  if (tables.symbols != nullptr) {
    if (prefix == "\\" || starts_with(prefix, "\\<")) {
      const auto name_prefix = prefix.size() >= 2 ? prefix.substr(2) : std::string_view{};
      std::vector<CompletionItem> names;
      for (const auto & e : tables.symbols->entries()) {
        if (starts_with(e.name, name_prefix)) names.push_back({e.escape(), describe(e)});
      }
      std::sort(names.begin(), names.end(),
                [](const auto & a, const auto & b) { return a.replacement < b.replacement; });
      out.insert(out.end(), names.begin(), names.end());
    }

    std::vector<std::pair<std::string, CompletionItem>> abbrevs;
    for (const auto & e : tables.symbols->entries()) {
      for (const auto & a : e.abbrevs) {
        if (starts_with(a, prefix)) abbrevs.push_back({a, {e.escape(), a + " → " + describe(e)}});
      }
    }
    std::sort(abbrevs.begin(), abbrevs.end(), [](const auto & a, const auto & b) {
      return std::tie(a.first, a.second.replacement) < std::tie(b.first, b.second.replacement);
    });
    for (auto & [abbrev, item] : abbrevs) out.push_back(std::move(item));
  }

  std::set<std::string> seen;
  std::erase_if(out, [&](const CompletionItem & item) { return !seen.insert(item.replacement).second; });
  if (out.size() > kMaxCompletions) out.resize(kMaxCompletions);
  return out;
}

}  // namespace minipide
