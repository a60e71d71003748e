#ifndef MINIPIDE_TESTS_HARNESS_HPP
#define MINIPIDE_TESTS_HARNESS_HPP

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "minipide/protocol.hpp"

namespace minipide::testing
{

struct RunResult
{
  int exit_code = -1;
  std::string out;
  std::string err;
};

/// Runs a program to completion, capturing both streams.
RunResult run_program(const std::vector<std::string> & argv);

/// A child process with its stdout readable line by line.
class Child
{
public:
  explicit Child(const std::vector<std::string> & argv);
  ~Child();
  Child(const Child &) = delete;
  Child & operator=(const Child &) = delete;

  std::optional<std::string> read_line(std::chrono::milliseconds timeout);
  /// Exit code, or nullopt if it is still running after `timeout`.
  std::optional<int> wait(std::chrono::milliseconds timeout);
  void kill();

private:
  int pid_ = -1;
  int out_ = -1;
  std::string pending_;
  std::optional<int> status_;
};

/// Frames over a TCP connection to 127.0.0.1 or over a pair of descriptors.
class Client
{
public:
  static Client connect(std::uint16_t port);
  Client(int in, int out) : in_(in), out_(out) {}
  Client(Client && other) noexcept;
  Client & operator=(Client && other) noexcept;
  ~Client();

  std::int64_t send(MessageType type, Json payload);
  void send_raw(std::string_view bytes);
  std::optional<ProtocolMessage> receive(std::chrono::milliseconds timeout);
  /// Receives until `pred` holds, collecting everything seen on the way.
  std::optional<ProtocolMessage> receive_until(const std::function<bool(const ProtocolMessage &)> & pred,
                                               std::chrono::milliseconds timeout,
                                               std::vector<ProtocolMessage> * seen = nullptr);
  bool closed_by_peer(std::chrono::milliseconds timeout);
  void close();

private:
  int in_ = -1;
  int out_ = -1;
  std::int64_t seq_ = 0;
  FrameDecoder decoder_;
};

class TempDir
{
public:
  TempDir();
  ~TempDir();
  const std::filesystem::path & path() const { return path_; }
  void write(const std::string & name, const std::string & text) const;

private:
  std::filesystem::path path_;
};

}  // namespace minipide::testing

#endif
