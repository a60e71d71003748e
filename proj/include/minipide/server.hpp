#ifndef MINIPIDE_SERVER_HPP
#define MINIPIDE_SERVER_HPP

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <string_view>

#include "minipide/engine.hpp"
#include "minipide/protocol.hpp"

namespace minipide
{

class Transport
{
public:
  virtual ~Transport() = default;
  /// Blocks; returns 0 once the peer is gone.
  virtual std::size_t read(char * buffer, std::size_t size) = 0;
  virtual bool write(std::string_view bytes) = 0;
};

/// Reads from one descriptor and writes to another (the same one for sockets).
class FdTransport : public Transport
{
public:
  FdTransport(int in, int out) : in_(in), out_(out) {}
  std::size_t read(char * buffer, std::size_t size) override;
  bool write(std::string_view bytes) override;

private:
  int in_;
  int out_;
};

enum class SessionEnd { disconnected, shutdown, broken };

/// Core state shared by consecutive connections of one process.
class Server
{
public:
  struct Options
  {
    unsigned workers = 2;
    std::filesystem::path root = ".";
  };

  explicit Server(Options options);
  ~Server();

  /// Runs one connection to its end. Only one session at a time.
  SessionEnd serve(Transport & transport);

  Engine & engine() { return engine_; }

private:
  class Session;

  void forward(const ExecUpdate & update);

  Engine engine_;
  std::mutex session_mutex_;
  Session * session_ = nullptr;
};

/// Binds 127.0.0.1:`port` (0 picks a free port). Returns the listening
/// descriptor and stores the bound port. Throws Error when the port is taken.
int listen_tcp(std::uint16_t port, std::uint16_t & bound);

/// Accepts connections until a client sends shutdown.
void serve_tcp(Server & server, int listen_fd);

/// Serves one session on stdin/stdout.
SessionEnd serve_stdio(Server & server);

}  // namespace minipide

#endif
