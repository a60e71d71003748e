#ifndef MINIPIDE_DOCUMENT_HPP
#define MINIPIDE_DOCUMENT_HPP

#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "minipide/outer_syntax.hpp"
#include "minipide/types.hpp"

namespace minipide
{

/// Canonical relative path of a theory file, e.g. "lib/Base.mthy".
class NodeName
{
public:
  NodeName() = default;

  /// Normalizes `path` (drops "." and empty components); throws Error when
  /// the result is empty, absolute, contains "..", or lacks the .mthy suffix.
  static NodeName make(std::string_view path);

  const std::string & path() const { return path_; }
  std::string directory() const;  // "" or "lib/" style prefix
  bool empty() const { return path_.empty(); }

  auto operator<=>(const NodeName &) const = default;

private:
  explicit NodeName(std::string path) : path_(std::move(path)) {}
  std::string path_;
};

inline constexpr std::string_view kTheoryExtension = ".mthy";

struct Edit
{
  enum class Kind { insert, remove };

  NodeName node;
  Kind kind = Kind::insert;
  std::size_t offset = 0;  // characters into the raw text
  std::string text;

  static Edit insert(NodeName node, std::size_t offset, std::string text)
  {
    return {std::move(node), Kind::insert, offset, std::move(text)};
  }
  static Edit remove(NodeName node, std::size_t offset, std::string text)
  {
    return {std::move(node), Kind::remove, offset, std::move(text)};
  }

  bool operator==(const Edit &) const = default;
};

std::string_view to_string(Edit::Kind kind);

class InvalidEdit : public Error
{
public:
  using Error::Error;
};

class UnknownVersion : public Error
{
public:
  using Error::Error;
};

struct NodeState
{
  std::string text;
  std::size_t length = 0;  // in characters
  std::vector<CommandSpan> spans;
  std::vector<Message> parse_issues;

  const CommandSpan * find_span(SpanId id) const;
};

struct DocumentVersion
{
  VersionId version_id = 0;
  std::map<NodeName, std::shared_ptr<const NodeState>> nodes;

  const NodeState * node(const NodeName & name) const;
};

using VersionPtr = std::shared_ptr<const DocumentVersion>;

/// Applies `edits` in order to `texts`; throws InvalidEdit without touching
/// `texts` when any edit does not fit.
void apply_to_texts(std::map<NodeName, std::string> & texts, std::span<const Edit> edits);

/// Versioned multi-node document. Single writer; versions are immutable and
/// may be shared freely with readers on other threads.
class Document
{
public:
  Document();

  /// Applies one atomic edit batch and returns the new version.
  VersionPtr apply_edits(std::span<const Edit> edits);

  /// Throws UnknownVersion for ids never produced or already pruned.
  VersionPtr snapshot(VersionId id) const;
  VersionPtr latest() const;

private:
  void prune_locked();

  mutable std::mutex mutex_;
  SpanId next_span_id_ = 0;
  VersionPtr latest_;
  std::deque<VersionPtr> retained_;  // the newest versions, kept alive here
  std::map<VersionId, std::weak_ptr<const DocumentVersion>> versions_;
};

inline constexpr std::size_t kRetainedVersions = 2;

/// Gives `fresh` spans ids: spans matching (keyword, text) in the common
/// prefix or suffix of `previous` keep their ids, the rest draw new ids.
/// Message span references are remapped from ordinals to the new ids.
void align_spans(std::span<const CommandSpan> previous, Partition & fresh, const std::function<SpanId()> & next_id);

}  // namespace minipide

template <>
struct std::hash<minipide::NodeName>
{
  std::size_t operator()(const minipide::NodeName & n) const noexcept { return std::hash<std::string>{}(n.path()); }
};

#endif
