#include "minipide/markup.hpp"

#include <algorithm>

namespace minipide
{
namespace
{

bool overlaps(const Range & a, const Range & b) { return a.begin < b.end && b.begin < a.end; }

// Returns false when `range` crosses a sibling boundary at this level.
bool insert(std::vector<MarkupNode> & level, Range range, MarkupLabel & label)
{
  for (auto & node : level) {
    if (node.range == range) {
      node.labels.push_back(std::move(label));
      return true;
    }
    if (node.range.contains(range)) {
      if (!insert(node.children, range, label)) node.labels.push_back(std::move(label));
      return true;
    }
  }
  const bool crossing = std::any_of(level.begin(), level.end(), [&](const MarkupNode & n) {
    return overlaps(n.range, range) && !range.contains(n.range);
  });
  if (crossing) return false;

  MarkupNode fresh{range, {std::move(label)}, {}};
  auto inner = std::stable_partition(level.begin(), level.end(),
                                     [&](const MarkupNode & n) { return !range.contains(n.range); });
  std::move(inner, level.end(), std::back_inserter(fresh.children));
  level.erase(inner, level.end());
  const auto at = std::lower_bound(level.begin(), level.end(), range,
                                   [](const MarkupNode & n, const Range & r) { return n.range < r; });
  level.insert(at, std::move(fresh));
  return true;
}

void walk(const std::vector<MarkupNode> & level, std::size_t depth,
          const std::function<void(const MarkupNode &, std::size_t)> & fn)
{
  for (const auto & node : level) {
    fn(node, depth);
    walk(node.children, depth + 1, fn);
  }
}

std::optional<std::string> check_level(const std::vector<MarkupNode> & level, const Range & parent, bool strict)
{
  for (std::size_t i = 0; i < level.size(); ++i) {
    const auto & node = level[i];
    const auto where = "[" + std::to_string(node.range.begin) + "," + std::to_string(node.range.end) + ")";
    if (node.range.empty()) return "empty range " + where;
    if (!parent.contains(node.range) || (strict && node.range == parent)) return "range " + where + " escapes its parent";
    if (node.labels.empty()) return "node without labels at " + where;
    if (i > 0 && level[i - 1].range.end > node.range.begin) return "siblings overlap or are unsorted at " + where;
    if (auto inner = check_level(node.children, node.range, true)) return inner;
  }
  return std::nullopt;
}

}  // namespace

std::string_view to_string(MarkupLabel::Kind kind)
{
  switch (kind) {
    case MarkupLabel::Kind::keyword:
      return "keyword";
    case MarkupLabel::Kind::def_site:
      return "def_site";
    case MarkupLabel::Kind::use_site:
      return "use_site";
    case MarkupLabel::Kind::inferred_type:
      return "inferred_type";
    case MarkupLabel::Kind::value:
      return "value";
    case MarkupLabel::Kind::error:
      return "error";
    case MarkupLabel::Kind::warning:
      return "warning";
  }
  return "error";
}

std::optional<MarkupLabel::Kind> markup_kind_from_string(std::string_view name)
{
  using K = MarkupLabel::Kind;
  for (K k : {K::keyword, K::def_site, K::use_site, K::inferred_type, K::value, K::error, K::warning}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

void MarkupTree::add(Range range, MarkupLabel label)
{
  if (range.empty()) return;
  if (!insert(roots_, range, label)) {
    // crossing at top level: attach to the first root it overlaps
    for (auto & node : roots_) {
      if (overlaps(node.range, range)) {
        node.labels.push_back(std::move(label));
        return;
      }
    }
  }
}

void MarkupTree::for_each(const std::function<void(const MarkupNode &, std::size_t)> & fn) const
{
  walk(roots_, 0, fn);
}

std::optional<std::string> markup_violation(const MarkupTree & tree, std::size_t text_length)
{
  return check_level(tree.roots(), Range{0, text_length}, false);
}

}  // namespace minipide
