#include "minipide/protocol.hpp"

#include <array>

#include "minipide/utf8.hpp"

namespace minipide
{
namespace
{

enum class Shape { string, integer, boolean, array, object, integer_or_null };

struct Field
{
  std::string_view name;
  Shape shape;
};

struct TypeInfo
{
  MessageType type;
  std::string_view name;
  bool from_client;
  std::vector<Field> required;
};

const std::vector<TypeInfo> & type_table()
{
  using enum Shape;
  static const std::vector<TypeInfo> table = {
      {MessageType::hello, "hello", true, {}},
      {MessageType::node_edits, "node_edits", true, {{"edits", array}, {"client_version_tag", string}}},
      {MessageType::completion_request, "completion_request", true, {{"prefix", string}}},
      {MessageType::shutdown, "shutdown", true, {}},
      {MessageType::welcome, "welcome", false,
       {{"reply_to", integer}, {"protocol_version", integer}, {"symbol_table", string}}},
      {MessageType::assignment, "assignment", false,
       {{"reply_to", integer}, {"client_version_tag", string}, {"version_id", integer}, {"nodes", array}}},
      {MessageType::status, "status", false,
       {{"version_id", integer}, {"exec_id", integer}, {"node", string}, {"span_id", integer}, {"status", string}}},
      {MessageType::result, "result", false,
       {{"version_id", integer},
        {"exec_id", integer},
        {"node", string},
        {"span_id", integer},
        {"status", string},
        {"messages", array},
        {"markup", array}}},
      {MessageType::import_request_resolved, "import_request_resolved", false, {{"node", string}, {"ok", boolean}}},
      {MessageType::completion_reply, "completion_reply", false, {{"reply_to", integer}, {"items", array}}},
      {MessageType::error, "error", false,
       {{"reply_to", integer_or_null}, {"code", string}, {"message", string}}},
  };
  return table;
}

const TypeInfo & info(MessageType type)
{
  for (const auto & t : type_table()) {
    if (t.type == type) return t;
  }
  throw Error("unknown message type");
}

bool fits(const Json & j, Shape shape)
{
  switch (shape) {
    case Shape::string: return j.is_string();
    case Shape::integer: return j.is_number_integer();
    case Shape::boolean: return j.is_boolean();
    case Shape::array: return j.is_array();
    case Shape::object: return j.is_object();
    case Shape::integer_or_null: return j.is_null() || j.is_number_integer();
  }
  return false;
}

std::string_view shape_name(Shape shape)
{
  switch (shape) {
    case Shape::string: return "a string";
    case Shape::integer: return "an integer";
    case Shape::boolean: return "a boolean";
    case Shape::array: return "an array";
    case Shape::object: return "an object";
    case Shape::integer_or_null: return "an integer or null";
  }
  return "?";
}

Json range_json(Range r) { return Json::array({r.begin, r.end}); }

}  // namespace

std::string_view to_string(MessageType type) { return info(type).name; }

std::optional<MessageType> message_type_from_string(std::string_view name)
{
  for (const auto & t : type_table()) {
    if (t.name == name) return t.type;
  }
  return std::nullopt;
}

const std::vector<MessageType> & all_message_types()
{
  static const std::vector<MessageType> types = [] {
    std::vector<MessageType> out;
    for (const auto & t : type_table()) out.push_back(t.type);
    return out;
  }();
  return types;
}

bool is_client_message(MessageType type) { return info(type).from_client; }

void validate_payload(MessageType type, const Json & payload)
{
  if (!payload.is_object()) throw SchemaError("payload must be an object");
  for (const auto & field : info(type).required) {
    auto it = payload.find(field.name);
    if (it == payload.end()) {
      throw SchemaError(std::string(to_string(type)) + ": missing field '" + std::string(field.name) + "'");
    }
    if (!fits(*it, field.shape)) {
      throw SchemaError(std::string(to_string(type)) + ": field '" + std::string(field.name) + "' must be " +
                        std::string(shape_name(field.shape)));
    }
  }
  if (type == MessageType::node_edits) {
    try {
      edits_from_json(payload["edits"]);
    } catch (const Error & e) {
      throw SchemaError(std::string("node_edits: ") + e.what());
    }
  }
}

std::string serialize(const ProtocolMessage & message)
{
  Json j = {{"type", std::string(to_string(message.type))}, {"seq", message.seq}, {"payload", message.payload}};
  return j.dump();
}

ProtocolMessage deserialize(std::string_view body)
{
  Json j;
  try {
    j = Json::parse(body);
  } catch (const Json::parse_error &) {
    throw SchemaError("body is not valid JSON");
  }
  if (!j.is_object()) throw SchemaError("message must be a JSON object");

  std::optional<std::int64_t> seq;
  if (auto it = j.find("seq"); it != j.end() && it->is_number_integer() && it->get<std::int64_t>() >= 0) {
    seq = it->get<std::int64_t>();
  }
  auto fail = [&](std::string message) { throw SchemaError(std::move(message), seq); };

  auto type_it = j.find("type");
  if (type_it == j.end() || !type_it->is_string()) fail("missing field 'type'");
  const auto type = message_type_from_string(type_it->get<std::string>());
  if (!type) fail("unknown message type '" + type_it->get<std::string>() + "'");
  if (!seq) fail("missing or invalid field 'seq'");
  auto payload_it = j.find("payload");
  if (payload_it == j.end()) fail("missing field 'payload'");
  for (const auto & [key, value] : j.items()) {
    if (key != "type" && key != "seq" && key != "payload") fail("unexpected field '" + key + "'");
  }
  try {
    validate_payload(*type, *payload_it);
  } catch (const SchemaError & e) {
    fail(e.what());
  }
  return {*type, *seq, *payload_it};
}

std::string encode_frame(std::string_view body)
{
  if (body.empty()) throw FrameError("empty frame");
  if (body.size() > kMaxFrameBytes) throw FrameError("frame too large");
  const auto n = static_cast<std::uint32_t>(body.size());
  std::string out;
  out.reserve(4 + body.size());
  out.push_back(static_cast<char>(n >> 24));
  out.push_back(static_cast<char>(n >> 16));
  out.push_back(static_cast<char>(n >> 8));
  out.push_back(static_cast<char>(n));
  out.append(body);
  return out;
}

std::optional<std::string> FrameDecoder::next()
{
  if (buffer_.size() < 4) return std::nullopt;
  std::uint32_t n = 0;
  for (int i = 0; i < 4; ++i) n = (n << 8) | static_cast<unsigned char>(buffer_[i]);
  if (n == 0) throw FrameError("frame length 0");
  if (n > kMaxFrameBytes) throw FrameError("frame length " + std::to_string(n) + " exceeds the limit");
  if (buffer_.size() < 4 + std::size_t{n}) return std::nullopt;
  std::string body = buffer_.substr(4, n);
  buffer_.erase(0, 4 + std::size_t{n});
  if (!utf8::is_valid(body)) throw FrameError("frame body is not valid UTF-8");
  return body;
}

Json to_json(const Edit & edit)
{
  return {{"node", edit.node.path()},
          {"kind", edit.kind == Edit::Kind::insert ? "insert" : "remove"},
          {"offset", edit.offset},
          {"text", edit.text}};
}

Edit edit_from_json(const Json & j)
{
  if (!j.is_object()) throw Error("edit must be an object");
  auto node = j.find("node");
  auto kind = j.find("kind");
  auto offset = j.find("offset");
  auto text = j.find("text");
  if (node == j.end() || !node->is_string()) throw Error("edit needs a string 'node'");
  if (kind == j.end() || !kind->is_string()) throw Error("edit needs a string 'kind'");
  if (offset == j.end() || !offset->is_number_unsigned()) throw Error("edit needs a non-negative integer 'offset'");
  if (text == j.end() || !text->is_string()) throw Error("edit needs a string 'text'");
  const auto k = kind->get<std::string>();
  if (k != "insert" && k != "remove") throw Error("edit kind must be insert or remove");
  Edit e{NodeName::make(node->get<std::string>()), k == "insert" ? Edit::Kind::insert : Edit::Kind::remove,
         offset->get<std::size_t>(), text->get<std::string>()};
  return e;
}

std::vector<Edit> edits_from_json(const Json & j)
{
  if (!j.is_array()) throw Error("edits must be an array");
  std::vector<Edit> out;
  for (const auto & e : j) out.push_back(edit_from_json(e));
  return out;
}

Json to_json(const Message & message)
{
  return {{"severity", std::string(to_string(message.severity))},
          {"text", message.text},
          {"range", message.range ? range_json(*message.range) : Json(nullptr)}};
}

Json to_json(const DefSite & site)
{
  return {{"node", site.node.path()},
          {"span_id", site.span ? Json(*site.span) : Json(nullptr)},
          {"offset", site.offset}};
}

Json to_json(const MarkupNode & node)
{
  Json labels = Json::array();
  for (const auto & label : node.labels) {
    Json l = {{"kind", std::string(to_string(label.kind))}, {"text", label.text}};
    if (label.target) l["target"] = to_json(*label.target);
    labels.push_back(std::move(l));
  }
  Json children = Json::array();
  for (const auto & child : node.children) children.push_back(to_json(child));
  return {{"range", range_json(node.range)}, {"labels", std::move(labels)}, {"children", std::move(children)}};
}

Json to_json(const MarkupTree & tree)
{
  Json out = Json::array();
  for (const auto & root : tree.roots()) out.push_back(to_json(root));
  return out;
}

Json to_json(const CompletionItem & item) { return {{"replacement", item.replacement}, {"display", item.display}}; }

Json assignment_payload(const SchedulerSnapshot & snapshot, std::int64_t reply_to, const Json & client_version_tag)
{
  Json nodes = Json::array();
  const auto & version = *snapshot.assignment.version;
  for (const auto & na : snapshot.assignment.nodes) {
    const NodeState * state = version.node(na.node);
    Json execs = Json::array();
    for (std::size_t i = 0; i < na.execs.size(); ++i) {
      const CommandSpan & span = state->spans[i];
      const auto it = snapshot.entries.find(na.execs[i]);
      const auto status = it == snapshot.entries.end() ? ExecStatus::unprocessed : it->second.status;
      execs.push_back({{"exec_id", na.execs[i]},
                       {"span_id", span.id},
                       {"keyword", span.keyword},
                       {"start", span.range.begin},
                       {"end", span.range.end},
                       {"status", std::string(to_string(status))}});
    }
    nodes.push_back({{"node", na.node.path()}, {"execs", std::move(execs)}, {"import_errors", na.import_errors}});
  }
  return {{"reply_to", reply_to},
          {"client_version_tag", client_version_tag},
          {"version_id", snapshot.assignment.version_id},
          {"nodes", std::move(nodes)}};
}

Json status_payload(const ExecUpdate & update)
{
  return {{"version_id", update.version_id},
          {"exec_id", update.exec_id},
          {"node", update.node.path()},
          {"span_id", update.span_id},
          {"status", std::string(to_string(update.status))}};
}

Json result_payload(const ExecUpdate & update)
{
  Json j = status_payload(update);
  Json messages = Json::array();
  Json markup = Json::array();
  if (update.result) {
    for (const auto & m : update.result->messages) messages.push_back(to_json(m));
    markup = to_json(update.result->markup);
  }
  j["messages"] = std::move(messages);
  j["markup"] = std::move(markup);
  return j;
}

Json import_payload(const ImportEvent & event)
{
  Json j = {{"node", event.node.path()}, {"ok", event.ok}};
  if (event.ok) {
    j["text"] = event.text;
  } else {
    j["error"] = event.error;
  }
  return j;
}

Json error_payload(std::optional<std::int64_t> reply_to, std::string_view code, std::string_view message)
{
  return {{"reply_to", reply_to ? Json(*reply_to) : Json(nullptr)}, {"code", code}, {"message", message}};
}

}  // namespace minipide
