#ifndef MINIPIDE_PROTOCOL_HPP
#define MINIPIDE_PROTOCOL_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "minipide/engine.hpp"
#include "minipide/symbols.hpp"

namespace minipide
{

using Json = nlohmann::json;

inline constexpr int kProtocolVersion = 1;
inline constexpr std::size_t kMaxFrameBytes = 16u << 20;

enum class MessageType {
  hello,
  node_edits,
  completion_request,
  shutdown,
  welcome,
  assignment,
  status,
  result,
  import_request_resolved,
  completion_reply,
  error,
};

std::string_view to_string(MessageType type);
std::optional<MessageType> message_type_from_string(std::string_view name);
const std::vector<MessageType> & all_message_types();
bool is_client_message(MessageType type);

/// Broken framing; the connection cannot continue.
class FrameError : public Error
{
public:
  using Error::Error;
};

/// A well-framed body that is not a valid message; answered with an error.
class SchemaError : public Error
{
public:
  SchemaError(std::string message, std::optional<std::int64_t> seq = std::nullopt)
      : Error(std::move(message)), seq_(seq)
  {
  }
  std::optional<std::int64_t> seq() const { return seq_; }

private:
  std::optional<std::int64_t> seq_;
};

struct ProtocolMessage
{
  MessageType type = MessageType::hello;
  std::int64_t seq = 0;
  Json payload = Json::object();

  bool operator==(const ProtocolMessage &) const = default;
};

/// Canonical JSON text: compact, keys sorted.
std::string serialize(const ProtocolMessage & message);
ProtocolMessage deserialize(std::string_view body);

/// Throws SchemaError when `payload` lacks a field or has a field of the wrong type.
void validate_payload(MessageType type, const Json & payload);

std::string encode_frame(std::string_view body);
inline std::string encode_frame(const ProtocolMessage & m) { return encode_frame(serialize(m)); }

/// Incremental splitter for a byte stream of frames.
class FrameDecoder
{
public:
  void feed(std::string_view bytes) { buffer_.append(bytes); }
  /// Next complete body, or nullopt when more bytes are needed. Throws FrameError.
  std::optional<std::string> next();
  bool idle() const { return buffer_.empty(); }

private:
  std::string buffer_;
};

// Payload pieces shared by the server, the CLI and the tests.
Json to_json(const Edit & edit);
Edit edit_from_json(const Json & j);
std::vector<Edit> edits_from_json(const Json & j);
Json to_json(const Message & message);
Json to_json(const MarkupNode & node);
Json to_json(const MarkupTree & tree);
Json to_json(const DefSite & site);
Json to_json(const CompletionItem & item);

Json assignment_payload(const SchedulerSnapshot & snapshot, std::int64_t reply_to, const Json & client_version_tag);
Json status_payload(const ExecUpdate & update);
Json result_payload(const ExecUpdate & update);
Json import_payload(const ImportEvent & event);
Json error_payload(std::optional<std::int64_t> reply_to, std::string_view code, std::string_view message);

}  // namespace minipide

#endif
