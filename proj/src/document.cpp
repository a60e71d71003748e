#include "minipide/document.hpp"

#include <algorithm>

#include "minipide/utf8.hpp"

namespace minipide
{

NodeName NodeName::make(std::string_view path)
{
  if (path.empty()) throw Error("empty node name");
  if (path.front() == '/') throw Error("node name must be relative: " + std::string(path));

  std::string normalized;
  std::size_t start = 0;
  while (start <= path.size()) {
    auto end = path.find('/', start);
    if (end == std::string_view::npos) end = path.size();
    const auto part = path.substr(start, end - start);
    if (part == "..") throw Error("node name must not contain '..': " + std::string(path));
    if (!part.empty() && part != ".") {
      if (!normalized.empty()) normalized.push_back('/');
      normalized += part;
    }
    start = end + 1;
  }
  if (normalized.size() <= kTheoryExtension.size() ||
      normalized.compare(normalized.size() - kTheoryExtension.size(), kTheoryExtension.size(), kTheoryExtension) != 0 ||
      normalized[normalized.size() - kTheoryExtension.size() - 1] == '/') {
    throw Error("node name must name a " + std::string(kTheoryExtension) + " file: " + std::string(path));
  }
  return NodeName(std::move(normalized));
}

std::string NodeName::directory() const
{
  const auto slash = path_.rfind('/');
  return slash == std::string::npos ? std::string{} : path_.substr(0, slash + 1);
}

std::string_view to_string(Edit::Kind kind) { return kind == Edit::Kind::insert ? "insert" : "remove"; }

const CommandSpan * NodeState::find_span(SpanId id) const
{
  const auto it = std::find_if(spans.begin(), spans.end(), [&](const CommandSpan & s) { return s.id == id; });
  return it == spans.end() ? nullptr : &*it;
}

const NodeState * DocumentVersion::node(const NodeName & name) const
{
  const auto it = nodes.find(name);
  return it == nodes.end() ? nullptr : it->second.get();
}

void apply_to_texts(std::map<NodeName, std::string> & texts, std::span<const Edit> edits)
{
  std::map<NodeName, std::string> work;
  const auto text_of = [&](const NodeName & node) -> std::string * {
    if (auto it = work.find(node); it != work.end()) return &it->second;
    if (auto it = texts.find(node); it != texts.end()) return &work.emplace(node, it->second).first->second;
    return nullptr;
  };

  std::size_t index = 0;
  for (const auto & edit : edits) {
    const std::string where = "edit " + std::to_string(index++) + " on " + edit.node.path() + ": ";
    if (edit.node.empty()) throw InvalidEdit(where + "missing node name");
    std::string * text = text_of(edit.node);
    if (edit.kind == Edit::Kind::insert) {
      if (text == nullptr) {
        if (edit.offset != 0) throw InvalidEdit(where + "insert into a new node must be at offset 0");
        work.emplace(edit.node, edit.text);
        continue;
      }
      const auto pos = utf8::byte_offset(*text, edit.offset);
      if (pos == std::string::npos) throw InvalidEdit(where + "insert offset out of bounds");
      text->insert(pos, edit.text);
    } else {
      if (text == nullptr) throw InvalidEdit(where + "remove from unknown node");
      const auto begin = utf8::byte_offset(*text, edit.offset);
      if (begin == std::string::npos) throw InvalidEdit(where + "remove offset out of bounds");
      const auto end = utf8::byte_offset(std::string_view(*text).substr(begin), utf8::length(edit.text));
      if (end == std::string::npos) throw InvalidEdit(where + "remove range out of bounds");
      if (std::string_view(*text).substr(begin, end) != edit.text) {
        throw InvalidEdit(where + "removed text does not match the document");
      }
      text->erase(begin, end);
    }
  }
  for (auto & [node, text] : work) texts[node] = std::move(text);
}

void align_spans(std::span<const CommandSpan> previous, Partition & fresh, const std::function<SpanId()> & next_id)
{
  auto & spans = fresh.spans;
  const auto same = [](const CommandSpan & a, const CommandSpan & b) {
    return a.keyword == b.keyword && a.text == b.text;
  };

  std::size_t prefix = 0;
  while (prefix < previous.size() && prefix < spans.size() && same(previous[prefix], spans[prefix])) ++prefix;
  std::size_t suffix = 0;
  while (suffix < previous.size() - prefix && suffix < spans.size() - prefix &&
         same(previous[previous.size() - 1 - suffix], spans[spans.size() - 1 - suffix])) {
    ++suffix;
  }

  std::vector<SpanId> ids(spans.size());
  for (std::size_t i = 0; i < spans.size(); ++i) {
    if (i < prefix) {
      ids[i] = previous[i].id;
    } else if (i >= spans.size() - suffix) {
      ids[i] = previous[previous.size() - (spans.size() - i)].id;
    } else {
      ids[i] = next_id();
    }
  }
  for (auto & m : fresh.messages) {
    if (m.span) m.span = ids.at(static_cast<std::size_t>(*m.span));
  }
  for (std::size_t i = 0; i < spans.size(); ++i) spans[i].id = ids[i];
}

Document::Document()
{
  auto initial = std::make_shared<DocumentVersion>();
  latest_ = initial;
  retained_.push_back(initial);
  versions_.emplace(0, initial);
}

VersionPtr Document::apply_edits(std::span<const Edit> edits)
{
  std::lock_guard lock(mutex_);

  std::map<NodeName, std::string> texts;
  for (const auto & edit : edits) {
    if (const auto * node = latest_->node(edit.node)) texts.emplace(edit.node, node->text);
  }
  apply_to_texts(texts, edits);  // throws before anything changes

  auto next = std::make_shared<DocumentVersion>();
  next->version_id = latest_->version_id + 1;
  next->nodes = latest_->nodes;
  for (auto & [name, text] : texts) {
    const NodeState * previous = latest_->node(name);
    if (previous != nullptr && previous->text == text) continue;

    auto state = std::make_shared<NodeState>();
    Partition parts = partition(text);
    static const std::vector<CommandSpan> none;
    align_spans(previous ? previous->spans : none, parts, [this] { return next_span_id_++; });
    state->length = utf8::length(text);
    state->text = std::move(text);
    state->spans = std::move(parts.spans);
    state->parse_issues = std::move(parts.messages);
    next->nodes[name] = std::move(state);
  }

  latest_ = next;
  versions_.emplace(next->version_id, next);
  retained_.push_back(next);
  prune_locked();
  return next;
}

void Document::prune_locked()
{
  while (retained_.size() > kRetainedVersions) retained_.pop_front();
  std::erase_if(versions_, [](const auto & entry) { return entry.second.expired(); });
}

VersionPtr Document::snapshot(VersionId id) const
{
  std::lock_guard lock(mutex_);
  const auto it = versions_.find(id);
  if (it != versions_.end()) {
    if (auto version = it->second.lock()) return version;
  }
  throw UnknownVersion("unknown or pruned document version " + std::to_string(id));
}

VersionPtr Document::latest() const
{
  std::lock_guard lock(mutex_);
  return latest_;
}

}  // namespace minipide
