#ifndef MINIPIDE_MARKUP_HPP
#define MINIPIDE_MARKUP_HPP

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "minipide/environment.hpp"
#include "minipide/types.hpp"

namespace minipide
{

struct MarkupLabel
{
  enum class Kind { keyword, def_site, use_site, inferred_type, value, error, warning };

  Kind kind = Kind::keyword;
  std::string text;               // identifier, type name or value, depending on kind
  std::optional<DefSite> target;  // use_site only

  bool operator==(const MarkupLabel &) const = default;
};

std::string_view to_string(MarkupLabel::Kind kind);
std::optional<MarkupLabel::Kind> markup_kind_from_string(std::string_view name);

struct MarkupNode
{
  Range range;
  std::vector<MarkupLabel> labels;
  std::vector<MarkupNode> children;

  bool operator==(const MarkupNode &) const = default;
};

/// Nested decorations over one command's text. Children lie strictly inside
/// their parent; siblings are sorted and disjoint. Labels sharing a range
/// share a node.
class MarkupTree
{
public:
  void add(Range range, MarkupLabel label);

  const std::vector<MarkupNode> & roots() const { return roots_; }
  std::vector<MarkupNode> & roots() { return roots_; }
  bool empty() const { return roots_.empty(); }

  /// Pre-order walk.
  void for_each(const std::function<void(const MarkupNode &, std::size_t depth)> & fn) const;

  bool operator==(const MarkupTree &) const = default;

private:
  std::vector<MarkupNode> roots_;
};

/// Describes the first violation of the nesting/bounds invariants, if any.
std::optional<std::string> markup_violation(const MarkupTree & tree, std::size_t text_length);

}  // namespace minipide

#endif
