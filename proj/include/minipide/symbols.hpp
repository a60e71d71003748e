#ifndef MINIPIDE_SYMBOLS_HPP
#define MINIPIDE_SYMBOLS_HPP

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "minipide/types.hpp"

namespace minipide
{

enum class SymbolStyle { glyph, control_sub, control_sup };

std::string_view to_string(SymbolStyle style);

struct SymbolEntry
{
  std::string name;  // without the surrounding \< >; control names start with '^'
  std::optional<char32_t> codepoint;
  std::vector<std::string> abbrevs;
  SymbolStyle style = SymbolStyle::glyph;

  std::string escape() const { return "\\<" + name + ">"; }
  bool operator==(const SymbolEntry &) const = default;
};

class TableFormatError : public Error
{
public:
  TableFormatError(std::size_t line, const std::string & what);
  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

class SymbolTable
{
public:
  SymbolTable() = default;
  explicit SymbolTable(std::vector<SymbolEntry> entries);

  /// Parses the tab-separated table format; throws TableFormatError.
  static SymbolTable parse(std::string_view source);

  /// The table shipped in data/symbols.tsv, compiled into the library.
  static const SymbolTable & bundled();
  static std::string_view bundled_source();

  std::span<const SymbolEntry> entries() const { return entries_; }
  const SymbolEntry * find_name(std::string_view name) const;
  const SymbolEntry * find_glyph(char32_t codepoint) const;

private:
  std::vector<SymbolEntry> entries_;
  std::map<std::string, std::size_t, std::less<>> by_name_;
  std::map<char32_t, std::size_t> by_glyph_;
};

std::vector<SymbolEntry> load_table(std::string_view source);

enum class TextStyle { plain, sub, sup };

std::string_view to_string(TextStyle style);

struct StyleRun
{
  Range range;  // presentation offsets
  TextStyle style = TextStyle::plain;

  bool operator==(const StyleRun &) const = default;
};

/// One correspondence between a raw slice and the presentation slice it
/// renders as.
struct OffsetSegment
{
  enum class Kind {
    literal,         // copied verbatim; raw and presentation lengths agree
    glyph,           // \<name> rendered as one glyph
    control_char,    // \<^sub>c: one styled literal character
    control_glyph,   // \<^sub>\<name>: one styled glyph
  };

  Range raw;
  Range presentation;
  Kind kind = Kind::literal;

  bool operator==(const OffsetSegment &) const = default;
};

struct StyledText
{
  std::string text;
  std::vector<StyleRun> styles;
  std::vector<OffsetSegment> offset_map;  // empty for text that did not come from decode

  /// Wraps a presentation string that has no raw provenance.
  static StyledText from_glyphs(std::string text);

  std::size_t to_presentation(std::size_t raw_offset) const;
  std::size_t to_raw(std::size_t presentation_offset) const;
  TextStyle style_at(std::size_t presentation_offset) const;

  bool operator==(const StyledText &) const = default;
};

StyledText decode(std::string_view raw, const SymbolTable & table = SymbolTable::bundled());
std::string encode(const StyledText & styled, const SymbolTable & table = SymbolTable::bundled());

struct CompletionItem
{
  std::string replacement;
  std::string display;

  bool operator==(const CompletionItem &) const = default;
};

struct CompletionTables
{
  std::vector<std::string> keywords;
  const SymbolTable * symbols = nullptr;

  static CompletionTables bundled();
};

inline constexpr std::size_t kMaxCompletions = 20;

std::vector<CompletionItem> complete(std::string_view prefix, const CompletionTables & tables);

}  // namespace minipide

#endif
