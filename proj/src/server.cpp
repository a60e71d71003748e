#include "minipide/server.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <condition_variable>
#include <csignal>
#include <cstring>
#include <deque>
#include <thread>

namespace minipide
{

std::size_t FdTransport::read(char * buffer, std::size_t size)
{
  for (;;) {
    const auto n = ::read(in_, buffer, size);
    if (n >= 0) return static_cast<std::size_t>(n);
    if (errno != EINTR) return 0;
  }
}

bool FdTransport::write(std::string_view bytes)
{
  while (!bytes.empty()) {
    auto n = ::send(out_, bytes.data(), bytes.size(), MSG_NOSIGNAL);
    if (n < 0 && errno == ENOTSOCK) n = ::write(out_, bytes.data(), bytes.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    bytes.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

class Server::Session
{
public:
  explicit Session(Transport & transport) : transport_(transport), writer_([this] { write_loop(); }) {}

  ~Session()
  {
    {
      std::lock_guard lock(mutex_);
      closing_ = true;
    }
    cv_.notify_all();
    writer_.join();
  }

  void send(MessageType type, Json payload)
  {
    std::lock_guard lock(mutex_);
    enqueue_locked(type, std::move(payload));
  }

  /// Sends the assignment and from then on drops updates of older versions.
  void send_assignment(VersionId version, Json payload)
  {
    std::lock_guard lock(mutex_);
    floor_ = version;
    enqueue_locked(MessageType::assignment, std::move(payload));
  }

  void send_update(const ExecUpdate & update)
  {
    std::lock_guard lock(mutex_);
    if (!floor_ || update.version_id < *floor_) return;
    enqueue_locked(MessageType::status, status_payload(update));
    if (update.status == ExecStatus::finished || update.status == ExecStatus::failed) {
      enqueue_locked(MessageType::result, result_payload(update));
    }
  }

  bool broken() const
  {
    std::lock_guard lock(mutex_);
    return broken_;
  }

private:
  void enqueue_locked(MessageType type, Json payload)
  {
    queue_.push_back(encode_frame(ProtocolMessage{type, next_seq_++, std::move(payload)}));
    cv_.notify_all();
  }

  void write_loop()
  {
    std::unique_lock lock(mutex_);
    for (;;) {
      cv_.wait(lock, [&] { return closing_ || !queue_.empty(); });
      if (queue_.empty()) return;
      std::string frame = std::move(queue_.front());
      queue_.pop_front();
      if (broken_) continue;
      lock.unlock();
      const bool ok = transport_.write(frame);
      lock.lock();
      if (!ok) broken_ = true;
    }
  }

  Transport & transport_;
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<std::string> queue_;
  std::int64_t next_seq_ = 1;
  std::optional<VersionId> floor_;
  bool closing_ = false;
  bool broken_ = false;
  std::thread writer_;
};

Server::Server(Options options) : engine_({options.workers, std::move(options.root)})
{
  engine_.scheduler().set_listener([this](const ExecUpdate & update) { forward(update); });
}

Server::~Server() { engine_.scheduler().set_listener({}); }

void Server::forward(const ExecUpdate & update)
{
  std::lock_guard lock(session_mutex_);
  if (session_) session_->send_update(update);
}

SessionEnd Server::serve(Transport & transport)
{
  static const CompletionTables tables = CompletionTables::bundled();

  Session session(transport);
  {
    std::lock_guard lock(session_mutex_);
    session_ = &session;
  }
  struct Detach
  {
    Server & server;
    ~Detach()
    {
      std::lock_guard lock(server.session_mutex_);
      server.session_ = nullptr;
    }
  } detach{*this};

  FrameDecoder decoder;
  std::optional<std::int64_t> last_seq;
  char buffer[1 << 16];

  for (;;) {
    const std::size_t n = transport.read(buffer, sizeof buffer);
    if (n == 0) return SessionEnd::disconnected;
    decoder.feed({buffer, n});

    for (;;) {
      std::optional<std::string> body;
      try {
        body = decoder.next();
      } catch (const FrameError & e) {
        session.send(MessageType::error, error_payload(std::nullopt, "bad_frame", e.what()));
        return SessionEnd::broken;
      }
      if (!body) break;

      ProtocolMessage message;
      try {
        message = deserialize(*body);
      } catch (const SchemaError & e) {
        session.send(MessageType::error, error_payload(e.seq(), "bad_message", e.what()));
        continue;
      }
      if (last_seq && message.seq <= *last_seq) {
        session.send(MessageType::error, error_payload(message.seq, "bad_sequence",
                                                       "seq " + std::to_string(message.seq) +
                                                           " does not follow " + std::to_string(*last_seq)));
        continue;
      }
      last_seq = message.seq;

      switch (message.type) {
        case MessageType::hello:
          session.send(MessageType::welcome, {{"reply_to", message.seq},
                                              {"protocol_version", kProtocolVersion},
                                              {"symbol_table", SymbolTable::bundled_source()}});
          break;

        case MessageType::node_edits: {
          const auto edits = edits_from_json(message.payload["edits"]);
          const Json tag = message.payload["client_version_tag"];
          try {
            engine_.submit(edits, [&](const SchedulerSnapshot & snap, const std::vector<ImportEvent> & imports) {
              for (const auto & event : imports) session.send(MessageType::import_request_resolved, import_payload(event));
              session.send_assignment(snap.assignment.version_id, assignment_payload(snap, message.seq, tag));
            });
          } catch (const InvalidEdit & e) {
            session.send(MessageType::error, error_payload(message.seq, "invalid_edit", e.what()));
          }
          break;
        }

        case MessageType::completion_request: {
          Json items = Json::array();
          for (const auto & item : complete(message.payload["prefix"].get<std::string>(), tables)) {
            items.push_back(to_json(item));
          }
          session.send(MessageType::completion_reply, {{"reply_to", message.seq}, {"items", std::move(items)}});
          break;
        }

        case MessageType::shutdown: return SessionEnd::shutdown;

        default:
          session.send(MessageType::error, error_payload(message.seq, "unexpected_type",
                                                         std::string(to_string(message.type)) +
                                                             " is sent by the server, not the client"));
          break;
      }
      if (session.broken()) return SessionEnd::broken;
    }
  }
}

int listen_tcp(std::uint16_t port, std::uint16_t & bound)
{
  const int fd = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd < 0) throw Error(std::string("socket: ") + std::strerror(errno));

  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(port);
  if (::bind(fd, reinterpret_cast<sockaddr *>(&addr), sizeof addr) != 0 || ::listen(fd, 4) != 0) {
    const std::string reason = std::strerror(errno);
    ::close(fd);
    throw Error("cannot listen on port " + std::to_string(port) + ": " + reason);
  }
  socklen_t len = sizeof addr;
  ::getsockname(fd, reinterpret_cast<sockaddr *>(&addr), &len);
  bound = ntohs(addr.sin_port);
  return fd;
}

void serve_tcp(Server & server, int listen_fd)
{
  std::signal(SIGPIPE, SIG_IGN);
  for (;;) {
    const int conn = ::accept4(listen_fd, nullptr, nullptr, SOCK_CLOEXEC);
    if (conn < 0) {
      if (errno == EINTR || errno == ECONNABORTED) continue;
      throw Error(std::string("accept: ") + std::strerror(errno));
    }
    const int one = 1;
    ::setsockopt(conn, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    FdTransport transport(conn, conn);
    const SessionEnd end = server.serve(transport);
    ::shutdown(conn, SHUT_RDWR);
    ::close(conn);
    if (end == SessionEnd::shutdown) return;
  }
}

SessionEnd serve_stdio(Server & server)
{
  std::signal(SIGPIPE, SIG_IGN);
  FdTransport transport(STDIN_FILENO, STDOUT_FILENO);
  return server.serve(transport);
}

}  // namespace minipide
