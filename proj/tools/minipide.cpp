#include <unistd.h>

#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "minipide/edit_script.hpp"
#include "minipide/engine.hpp"
#include "minipide/protocol.hpp"
#include "minipide/server.hpp"
#include "minipide/utf8.hpp"

namespace fs = std::filesystem;
using namespace minipide;

namespace
{

struct Position
{
  std::size_t line = 1;
  std::size_t column = 1;
};

Position position_of(std::u32string_view text, std::size_t offset)
{
  Position p;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == U'\n') {
      ++p.line;
      p.column = 1;
    } else {
      ++p.column;
    }
  }
  return p;
}

int run_check(const fs::path & path, unsigned workers, bool json)
{
  if (!fs::is_regular_file(path)) {
    std::cerr << "minipide: no such file: " << path.string() << '\n';
    return 2;
  }
  Engine engine({workers, path.parent_path().empty() ? fs::path(".") : path.parent_path()});
  try {
    load_theory_file(engine, path);
  } catch (const Error & e) {
    std::cerr << "minipide: " << e.what() << '\n';
    return 2;
  }
  engine.wait_quiescent(std::chrono::hours(24));
  const SchedulerSnapshot snap = engine.scheduler().snapshot();
  const StatusSummary summary = summarize(snap.assignment, snap.entries);

  auto report = [&](const NodeName & node, std::u32string_view text, const Message & m, std::size_t base,
                    std::string_view keyword) {
    const std::size_t begin = m.range ? m.range->begin + base : base;
    const std::size_t end = m.range ? m.range->end + base : base;
    const Position p = position_of(text, begin);
    if (json) {
      Json line = {{"kind", "message"},     {"node", node.path()}, {"line", p.line},
                   {"column", p.column},    {"start", begin},      {"end", end},
                   {"severity", std::string(to_string(m.severity))}, {"text", m.text},
                   {"command", keyword}};
      std::cout << line.dump() << '\n';
    } else {
      std::cout << node.path() << ':' << p.line << ':' << p.column << ": " << to_string(m.severity) << ": " << m.text
                << '\n';
    }
  };

  for (const auto & [name, state] : snap.assignment.version->nodes) {
    const std::u32string text = utf8::to_u32(state->text);
    for (const auto & m : state->parse_issues) report(name, text, m, 0, "");
    const NodeAssignment * na = snap.assignment.find(name);
    if (!na) continue;
    for (std::size_t i = 0; i < na->execs.size(); ++i) {
      const auto & entry = snap.entries.at(na->execs[i]);
      if (!entry.result) continue;
      for (const auto & m : entry.result->messages) {
        report(name, text, m, state->spans[i].range.begin, state->spans[i].keyword);
      }
    }
  }

  const auto & s = summary.session;
  if (json) {
    std::cout << Json{{"kind", "summary"}, {"commands", s.total()}, {"finished", s.finished}, {"failed", s.failed}}.dump()
              << '\n';
  } else {
    std::cout << s.total() << " commands: " << s.finished << " finished, " << s.failed << " failed\n";
  }
  return s.failed == 0 && s.total() == s.finished ? 0 : 1;
}

int run_serve(std::optional<int> port, bool stdio, unsigned workers, const fs::path & root)
{
  Server server({workers, root});
  if (stdio) {
    std::cerr << "LISTENING stdio" << std::endl;
    serve_stdio(server);
    return 0;
  }
  std::uint16_t bound = 0;
  int fd = -1;
  try {
    fd = listen_tcp(static_cast<std::uint16_t>(*port), bound);
  } catch (const Error & e) {
    std::cerr << "minipide: " << e.what() << '\n';
    return 2;
  }
  std::cout << "LISTENING " << bound << std::endl;
  serve_tcp(server, fd);
  ::close(fd);
  return 0;
}

int run_replay(const fs::path & script_path, const std::string & mode, unsigned workers)
{
  EditScript script;
  try {
    script = load_edit_script(script_path);
  } catch (const Error & e) {
    std::cerr << "minipide: " << e.what() << '\n';
    return 2;
  }
  try {
    std::cout << (mode == "batch" ? replay_batch(script, workers) : replay_incremental(script, workers));
  } catch (const InvalidEdit & e) {
    std::cerr << "minipide: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"Continuous checker for Mini-Theory files"};
  app.require_subcommand(1);

  unsigned workers = 2;
  auto workers_check = CLI::Range(1u, 256u);

  auto * check = app.add_subcommand("check", "check a theory and the theories it imports");
  std::string check_path;
  bool json = false;
  check->add_option("path", check_path, "theory file")->required();
  check->add_option("--workers", workers, "worker threads")->check(workers_check);
  check->add_flag("--json", json, "print JSON lines");

  auto * serve = app.add_subcommand("serve", "serve the editing protocol");
  std::optional<int> port;
  bool stdio = false;
  std::string root = ".";
  auto * port_opt = serve->add_option("--port", port, "TCP port on 127.0.0.1, 0 for any")->check(CLI::Range(0, 65535));
  auto * stdio_opt = serve->add_flag("--stdio", stdio, "use stdin/stdout");
  port_opt->excludes(stdio_opt);
  serve->add_option("--workers", workers, "worker threads")->check(workers_check);
  serve->add_option("--root", root, "directory imports are read from");

  auto * replay = app.add_subcommand("replay", "replay an edit script and print the final trace");
  std::string script;
  std::string mode = "incremental";
  replay->add_option("script", script, "edit script (JSON)")->required();
  replay->add_option("--mode", mode, "incremental or batch")->check(CLI::IsMember({"incremental", "batch"}));
  replay->add_option("--workers", workers, "worker threads")->check(workers_check);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp & e) {
    return app.exit(e);
  } catch (const CLI::ParseError & e) {
    app.exit(e);
    return 2;
  }

  if (*check) return run_check(check_path, workers, json);
  if (*serve) {
    if (!port && !stdio) {
      std::cerr << "minipide serve: give --port or --stdio\n";
      return 2;
    }
    return run_serve(port, stdio, workers, root);
  }
  return run_replay(script, mode, workers);
}
