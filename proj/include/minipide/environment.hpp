#ifndef MINIPIDE_ENVIRONMENT_HPP
#define MINIPIDE_ENVIRONMENT_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "minipide/document.hpp"
#include "minipide/types.hpp"

namespace minipide
{

enum class Type { integer, boolean };

std::string_view to_string(Type type);

using Value = std::variant<std::int64_t, bool>;

std::string format_value(const Value & value);

/// Where a definition was made. A site without a span refers to the command
/// currently being checked; the scheduler resolves it once the command's
/// span is known.
struct DefSite
{
  NodeName node;
  std::optional<SpanId> span;
  std::size_t offset = 0;  // within the span text

  bool resolved() const { return span.has_value(); }
  bool operator==(const DefSite &) const = default;
};

struct Definition
{
  std::string name;
  Type type = Type::integer;
  Value value;
  DefSite site;

  bool operator==(const Definition &) const = default;
};

/// Ordered identifier -> definition map. Redefinition moves the identifier to
/// the end, so iteration order is definition order.
class Environment
{
public:
  const Definition * find(std::string_view name) const;
  std::span<const Definition> definitions() const { return defs_; }
  bool empty() const { return defs_.empty(); }

  void define(Definition def);

  /// Copy in which unresolved sites point at (node, span).
  Environment resolved(const NodeName & node, SpanId span) const;

  /// Copy with `other`'s definitions appended in their order.
  Environment merged(const Environment & other) const;

  /// "ident:type:value@node#span+offset;" per definition, in order.
  std::string canonical() const;

  /// FNV-1a over canonical().
  std::uint64_t hash() const;

  bool operator==(const Environment &) const = default;

private:
  std::vector<Definition> defs_;
};

std::uint64_t fnv1a64(std::string_view data);

}  // namespace minipide

#endif
