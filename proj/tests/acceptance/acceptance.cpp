#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "harness.hpp"
#include "minipide/edit_script.hpp"
#include "minipide/engine.hpp"
#include "minipide/outer_syntax.hpp"
#include "minipide/protocol.hpp"
#include "minipide/symbols.hpp"
#include "minipide/trace.hpp"
#include "minipide/utf8.hpp"

using namespace minipide;
using namespace minipide::testing;
using namespace std::chrono_literals;
namespace fs = std::filesystem;

namespace
{

using Clock = std::chrono::steady_clock;

struct Outcome
{
  bool pass = false;
  std::string detail;
};

struct Paths
{
  std::string bin;
  fs::path fixtures;
  fs::path golden;
  std::uint32_t seed = 7001;
};

double ms_since(Clock::time_point start)
{
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string read_all(const fs::path & path)
{
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// ---------------------------------------------------------------- scripts

// Random edit scripts over at most three edited nodes plus two theories on disk.
class ScriptGenerator
{
public:
  explicit ScriptGenerator(std::uint32_t seed) : rng_(seed) {}

  Json make(const fs::path & root)
  {
    texts_.clear();
    Json steps = Json::array();
    std::int64_t at = 0;
    const int batches = pick(1, 20);
    for (int b = 0; b < batches; ++b) {
      Json edits = Json::array();
      const int n = pick(1, 3);
      for (int i = 0; i < n; ++i) edit(edits);
      steps.push_back({{"at_ms", at}, {"edits", edits}});
      at += pick(0, 8);
    }
    return {{"root", root.string()}, {"steps", steps}};
  }

private:
  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool chance(int percent) { return pick(1, 100) <= percent; }
  template <typename T> const T & any(const std::vector<T> & v)
  {
    return v[static_cast<std::size_t>(pick(0, static_cast<int>(v.size()) - 1))];
  }

  std::string ident()
  {
    static const std::vector<std::string> names{"v0", "v1", "v2", "v3", "base", "flag", "a", "x", "nope"};
    return any(names);
  }

  std::string expr(int depth)
  {
    if (depth <= 1 || chance(30)) {
      switch (pick(0, 3)) {
        case 0: return std::to_string(pick(0, 20));
        case 1: return chance(50) ? "true" : "false";
        default: return ident();
      }
    }
    static const std::vector<std::string> ops{" + ", " - ", " * ", " < ", " = "};
    std::string e = expr(depth - 1);
    e += any(ops);
    e += expr(depth - 1);
    return chance(40) ? "(" + e + ")" : e;
  }

  std::string command()
  {
    const int kind = pick(0, 9);
    const int n = pick(0, 9);
    const std::string e = expr(pick(1, 4));
    switch (kind) {
      case 0: case 1: case 2: return "def v" + std::to_string(n % 4) + " = " + e + "\n";
      case 3: return "def v" + std::to_string(n % 4) + ": int = " + e + "\n";
      case 4: case 5: return "eval " + e + "\n";
      case 6: case 7: return "lemma l" + std::to_string(n) + ": " + e + "\n";
      case 8: return chance(50) ? "sleep " + std::to_string(pick(1, 15)) + "\n" : "(* note \\<forall> ∀ *)\n";
      default: return any(std::vector<std::string>{"x", " ", "1", "+", "(*", "*)", "\n", "def ", "∀", "\\<alpha>", "end\n"});
    }
  }

  std::string header(const std::string & name)
  {
    std::string imports;
    static const std::vector<std::string> candidates{"D0", "D1", "N0", "N1", "N2", "Gone"};
    for (int i = pick(0, 2); i > 0; --i) {
      const auto & dep = any(candidates);
      if (dep + ".mthy" != name) imports += " " + dep;
    }
    return "theory " + name.substr(0, name.size() - 5) + "\n" + (imports.empty() ? "" : "imports" + imports + "\n") +
           "begin\n";
  }

  std::vector<std::size_t> line_starts(const std::string & text)
  {
    std::vector<std::size_t> out{0};
    std::size_t chars = 0;
    const auto u = utf8::to_u32(text);
    for (std::size_t i = 0; i < u.size(); ++i) {
      ++chars;
      if (u[i] == U'\n') out.push_back(chars);
    }
    return out;
  }

  void push(Json & edits, const std::string & node, const char * kind, std::size_t offset, const std::string & text)
  {
    edits.push_back({{"node", node}, {"kind", kind}, {"offset", offset}, {"text", text}});
    std::string & t = texts_[node];
    const auto at = utf8::byte_offset(t, offset);
    if (std::string_view(kind) == "insert") {
      t.insert(at, text);
    } else {
      t.erase(at, text.size());
    }
  }

  void edit(Json & edits)
  {
    if (texts_.empty() || (texts_.size() < 3 && chance(15))) {
      const std::string node = "N" + std::to_string(texts_.size()) + ".mthy";
      std::string body = header(node);
      for (int i = pick(0, 3); i > 0; --i) body += command();
      if (chance(70)) body += "end\n";
      push(edits, node, "insert", 0, body);
      return;
    }
    std::vector<std::string> nodes;
    for (const auto & [name, text] : texts_) nodes.push_back(name);
    const std::string node = any(nodes);
    const std::string & text = texts_[node];
    const auto length = utf8::length(text);
    const auto lines = line_starts(text);

    switch (pick(0, 5)) {
      case 0: case 1: case 2: {
        const auto at = any(lines);
        push(edits, node, "insert", at, command());
        return;
      }
      case 3: {
        if (lines.size() < 2) break;
        const auto i = static_cast<std::size_t>(pick(0, static_cast<int>(lines.size()) - 2));
        push(edits, node, "remove", lines[i], std::string(utf8::slice(text, lines[i], lines[i + 1])));
        return;
      }
      case 4: {
        if (length == 0) break;
        const auto begin = static_cast<std::size_t>(pick(0, static_cast<int>(length) - 1));
        const auto end = std::min(length, begin + static_cast<std::size_t>(pick(1, 6)));
        push(edits, node, "remove", begin, std::string(utf8::slice(text, begin, end)));
        return;
      }
      default:
        break;
    }
    const auto at = static_cast<std::size_t>(pick(0, static_cast<int>(length)));
    push(edits, node, "insert", at, command());
  }

  std::mt19937 rng_;
  std::map<std::string, std::string> texts_;
};

Outcome differential(const Paths & paths)
{
  TempDir dir;
  dir.write("root/D0.mthy", "theory D0\nbegin\ndef base = 3\ndef flag = true\nend\n");
  dir.write("root/D1.mthy", "theory D1\nimports D0\nbegin\ndef a = base * 2\nlemma pos: 0 < a\nend\n");

  ScriptGenerator gen(paths.seed);
  const auto start = Clock::now();
  int mismatches = 0;
  std::string first;
  std::map<std::string, std::size_t> seen;
  const auto tally = [&](const std::string & trace) {
    for (const char * word : {" finished\n", " failed\n", "use_site", "node "}) {
      for (auto at = trace.find(word); at != std::string::npos; at = trace.find(word, at + 1)) ++seen[word];
    }
  };
  for (int i = 0; i < 100; ++i) {
    const auto name = "script" + std::to_string(i) + ".json";
    dir.write(name, gen.make(dir.path() / "root").dump(2));
    const auto script = (dir.path() / name).string();
    const auto inc = run_program({paths.bin, "replay", script, "--mode", "incremental"});
    const auto batch = run_program({paths.bin, "replay", script, "--mode", "batch"});
    tally(inc.out);
    if (inc.exit_code != 0 || batch.exit_code != 0 || inc.out != batch.out || inc.out.empty()) {
      ++mismatches;
      if (first.empty()) {
        first = "script " + std::to_string(i) + " exit " + std::to_string(inc.exit_code) + "/" +
                std::to_string(batch.exit_code) + " " + inc.err + batch.err;
        fs::copy_file(script, fs::temp_directory_path() / ("minipide-mismatch-" + name),
                      fs::copy_options::overwrite_existing);
      }
    }
  }
  const double elapsed = ms_since(start);
  std::ostringstream d;
  d << "100 scripts, " << mismatches << " mismatches, " << static_cast<int>(elapsed) << " ms (" << seen["node "]
    << " nodes, " << seen[" finished\n"] << " finished and " << seen[" failed\n"] << " failed spans, "
    << seen["use_site"] << " use sites)";
  if (!first.empty()) d << "; first: " << first;
  return {mismatches == 0 && elapsed < 60000, d.str()};
}

// ---------------------------------------------------------------- timing

Json insert_edit(const std::string & node, std::size_t offset, const std::string & text)
{
  return {{"node", node}, {"kind", "insert"}, {"offset", offset}, {"text", text}};
}

Json remove_edit(const std::string & node, std::size_t offset, const std::string & text)
{
  return {{"node", node}, {"kind", "remove"}, {"offset", offset}, {"text", text}};
}

Outcome non_blocking(const Paths & paths)
{
  Child server({paths.bin, "serve", "--port", "0", "--workers", "2"});
  const auto line = server.read_line(10s);
  if (!line || line->rfind("LISTENING ", 0) != 0) return {false, "server did not report a port"};
  auto client = Client::connect(static_cast<std::uint16_t>(std::stoi(line->substr(10))));

  client.send(MessageType::node_edits,
              {{"edits", Json::array({insert_edit("A.mthy", 0, "sleep 5000\n")})}, {"client_version_tag", "a"}});
  const auto running = client.receive_until(
      [](const ProtocolMessage & m) {
        return m.type == MessageType::status && m.payload["node"] == "A.mthy" && m.payload["status"] == "running";
      },
      5s);
  if (!running) return {false, "the sleep never started"};

  const std::string line_b = "def q = 1\n";
  int passed = 0;
  double worst = 0;
  bool stale = false;
  for (int i = 0; i < 20; ++i) {
    const Json edit = i == 0 ? insert_edit("B.mthy", 0, line_b)
                      : i % 2 ? insert_edit("B.mthy", 0, line_b)
                              : remove_edit("B.mthy", 0, line_b);
    const auto t0 = Clock::now();
    const auto seq = client.send(MessageType::node_edits,
                                 {{"edits", Json::array({edit})}, {"client_version_tag", "b" + std::to_string(i)}});
    std::vector<ProtocolMessage> seen;
    const auto reply = client.receive_until(
        [&](const ProtocolMessage & m) {
          return (m.type == MessageType::assignment || m.type == MessageType::error) && m.payload["reply_to"] == seq;
        },
        5s, &seen);
    const double took = ms_since(t0);
    worst = std::max(worst, took);
    if (reply && reply->type == MessageType::assignment && took < 100) ++passed;
    for (const auto & m : seen) {
      if (m.payload.value("node", "") == "A.mthy" && m.payload.value("status", "") == "finished") stale = true;
    }
  }
  client.send(MessageType::shutdown, Json::object());
  const auto code = server.wait(5s);
  if (!code) server.kill();

  std::ostringstream d;
  d.precision(1);
  d << std::fixed << passed << "/20 round trips under 100 ms, worst " << worst << " ms";
  if (stale) d << "; the sleep finished early";
  return {passed == 20 && !stale, d.str()};
}

double quiescence_ms(unsigned workers)
{
  Engine engine({workers, std::nullopt});
  const std::vector<Edit> edits{Edit::insert(NodeName::make("A.mthy"), 0, "sleep 500\n"),
                                Edit::insert(NodeName::make("B.mthy"), 0, "sleep 500\n")};
  const auto start = Clock::now();
  engine.submit(edits);
  if (!engine.wait_quiescent(10s)) return 1e9;
  return ms_since(start);
}

Outcome parallelism(const Paths &)
{
  const double two = quiescence_ms(2);
  const double one = quiescence_ms(1);
  std::ostringstream d;
  d.precision(1);
  d << std::fixed << "budget 2: " << two << " ms, budget 1: " << one << " ms";
  return {two < 900 && one > 1000, d.str()};
}

Outcome cancellation(const Paths &)
{
  Engine engine({2, std::nullopt});
  const auto node = NodeName::make("A.mthy");
  const std::string sleeper = "sleep 10000\n";
  const std::vector<Edit> first{Edit::insert(node, 0, "def x = 1\n" + sleeper + "eval x\n")};
  const auto sub = engine.submit(first);
  const ExecId sleep_exec = sub.assignment.find(node)->execs.at(1);

  const auto deadline = Clock::now() + 5s;
  while (Clock::now() < deadline) {
    const auto e = engine.scheduler().entry(sleep_exec);
    if (e && e->status == ExecStatus::running) break;
    std::this_thread::sleep_for(1ms);
  }
  const auto e = engine.scheduler().entry(sleep_exec);
  if (!e || e->status != ExecStatus::running) return {false, "the sleep never started"};

  const std::vector<Edit> removal{Edit::remove(node, 10, sleeper)};
  const auto start = Clock::now();
  engine.submit(removal);
  const bool quiet = engine.wait_quiescent(500ms);
  const double took = ms_since(start);
  std::ostringstream d;
  d.precision(1);
  d << std::fixed << "quiescent after " << took << " ms";
  return {quiet && took < 500, d.str()};
}

// ---------------------------------------------------------------- corpus

std::vector<fs::path> corpus_files(const Paths & paths)
{
  std::vector<fs::path> files;
  for (const auto & entry : fs::directory_iterator(paths.fixtures / "corpus")) {
    if (entry.path().extension() == ".mthy") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

SchedulerSnapshot check_file(const fs::path & file, unsigned workers)
{
  Engine engine({workers, file.parent_path()});
  load_theory_file(engine, file);
  if (!engine.wait_quiescent(60s)) throw Error("no quiescence for " + file.string());
  return engine.scheduler().snapshot();
}

Outcome budget_independence(const Paths & paths)
{
  std::size_t compared = 0;
  for (const auto & file : corpus_files(paths)) {
    const auto reference = canonical_trace(check_file(file, 1));
    for (unsigned workers : {2u, 8u}) {
      if (canonical_trace(check_file(file, workers)) != reference) {
        return {false, file.filename().string() + " differs at budget " + std::to_string(workers)};
      }
    }
    ++compared;
  }
  return {compared > 0, std::to_string(compared) + " corpus files identical at budgets 1, 2, 8"};
}

std::set<NodeName> imported_closure(const Assignment & assignment, const NodeName & node)
{
  std::set<NodeName> out;
  std::vector<NodeName> todo{node};
  while (!todo.empty()) {
    const auto current = todo.back();
    todo.pop_back();
    if (const auto * na = assignment.find(current)) {
      for (const auto & dep : na->imports) {
        if (out.insert(dep).second) todo.push_back(dep);
      }
    }
  }
  return out;
}

Outcome markup(const Paths & paths)
{
  std::size_t trees = 0;
  std::size_t uses = 0;
  for (const auto & file : corpus_files(paths)) {
    const auto snap = check_file(file, 2);
    const auto & version = *snap.assignment.version;

    // absolute offset -> name, per node
    std::map<NodeName, std::map<std::size_t, std::string>> defs;
    struct Use
    {
      NodeName node;
      std::size_t at;
      MarkupLabel label;
    };
    std::vector<Use> found;

    for (const auto & na : snap.assignment.nodes) {
      const NodeState * state = version.node(na.node);
      for (std::size_t i = 0; i < na.execs.size(); ++i) {
        const auto & entry = snap.entries.at(na.execs[i]);
        if (!entry.result) continue;
        const CommandSpan & span = state->spans.at(i);
        if (const auto bad = markup_violation(entry.result->markup, utf8::length(span.text))) {
          return {false, na.node.path() + " at " + std::to_string(span.range.begin) + ": " + *bad};
        }
        ++trees;
        entry.result->markup.for_each([&](const MarkupNode & n, std::size_t) {
          const std::size_t at = span.range.begin + n.range.begin;
          for (const auto & label : n.labels) {
            if (label.kind == MarkupLabel::Kind::def_site) defs[na.node][at] = label.text;
            if (label.kind == MarkupLabel::Kind::use_site) found.push_back({na.node, at, label});
          }
        });
      }
    }

    for (const auto & use : found) {
      ++uses;
      const std::string where = use.node.path() + "@" + std::to_string(use.at) + " " + use.label.text;
      if (!use.label.target) return {false, where + " has no target"};
      const auto & target = *use.label.target;
      const auto at = site_offset(version, target);
      if (!at) return {false, where + " does not resolve"};
      const auto & sites = defs[target.node];
      const auto it = sites.find(*at);
      if (it == sites.end() || it->second != use.label.text) return {false, where + " does not point at its def"};
      const bool preceding = target.node == use.node ? *at < use.at
                                                     : imported_closure(snap.assignment, use.node).contains(target.node);
      if (!preceding) return {false, where + " points forward"};
    }
  }
  return {trees > 0 && uses > 0,
          std::to_string(trees) + " trees well formed, " + std::to_string(uses) + " use sites resolve backwards"};
}

// ---------------------------------------------------------------- codec

Outcome symbol_codec(const Paths &)
{
  const auto & table = SymbolTable::bundled();
  std::size_t entries = 0;
  for (const auto & entry : table.entries()) {
    std::vector<std::string> samples{entry.escape(), "a" + entry.escape() + "b"};
    if (entry.style != SymbolStyle::glyph) samples.push_back(entry.escape() + "x");
    if (entry.style != SymbolStyle::glyph) samples.push_back(entry.escape() + "\\<alpha>");
    for (const auto & raw : samples) {
      if (encode(decode(raw)) != raw) return {false, "entry " + entry.name + " breaks on " + raw};
    }
    if (entry.codepoint && encode(StyledText::from_glyphs(utf8::encode(*entry.codepoint))) != entry.escape()) {
      return {false, "glyph of " + entry.name + " does not encode to its escape"};
    }
    ++entries;
  }

  std::vector<std::string> pieces;
  for (const auto & entry : table.entries()) pieces.push_back(entry.escape());
  for (const char * p : {"\\<", ">", "\\", "<", "^", "\\<^", "\\<nosuch>", "\\<^sub>", "\\<^sup>", "x", "1", " ", "∀",
                         "α", "\n", "\\<^bogus>", "\\<>", "é"}) {
    pieces.emplace_back(p);
  }
  std::mt19937 rng(4242);
  for (int i = 0; i < 1000; ++i) {
    std::string raw;
    for (int n = static_cast<int>(rng() % 16); n > 0; --n) raw += pieces[rng() % pieces.size()];
    try {
      if (encode(decode(raw)) != raw) return {false, "fuzzed string breaks: " + Json(raw).dump()};
    } catch (const std::exception & e) {
      return {false, "fuzzed string throws: " + std::string(e.what())};
    }
  }

  for (int i = 0; i < 1000; ++i) {
    std::string bytes;
    for (int n = static_cast<int>(rng() % 32); n > 0; --n) bytes.push_back(static_cast<char>(rng() % 256));
    try {
      (void)decode(bytes);
    } catch (const std::exception & e) {
      return {false, "decode is not total: " + std::string(e.what())};
    }
  }
  return {true, std::to_string(entries) + " entries, 1000 fuzzed strings round trip, 1000 arbitrary inputs decode"};
}

Outcome partition_fuzz(const Paths &)
{
  static const std::vector<std::string> pieces{
      "theory", "imports", "begin", "end", "def", "eval", "lemma", "sleep", " ", "\n", "\t", "x", "1", "=", "+",
      "*", "(", ")", "(*", "*)", "\"", "\\<forall>", "\\<", ">", ":", "∀", "é", "$", "\r"};
  std::mt19937 rng(99);
  int failures = 0;
  for (int i = 0; i < 10000; ++i) {
    std::string s;
    for (int n = static_cast<int>(rng() % 24); n > 0; --n) {
      if (rng() % 20 == 0) {
        s.push_back(static_cast<char>(rng() % 256));
      } else {
        s += pieces[rng() % pieces.size()];
      }
    }
    const auto p = partition(s);
    std::string joined;
    for (const auto & span : p.spans) joined += span.text;
    if (joined != s) ++failures;
  }
  return {failures == 0, "10000 strings, " + std::to_string(failures) + " failures"};
}

// ---------------------------------------------------------------- protocol

Outcome golden(const Paths & paths)
{
  std::size_t ok = 0;
  for (const auto type : all_message_types()) {
    const auto file = paths.golden / (std::string(to_string(type)) + ".json");
    if (!fs::exists(file)) return {false, "missing " + file.filename().string()};
    try {
      const auto text = read_all(file);
      const auto message = deserialize(text);
      if (message.type != type) return {false, file.filename().string() + " holds another type"};
      const auto body = serialize(message);
      if (body != Json::parse(text).dump()) return {false, file.filename().string() + " is not reproduced"};
      if (deserialize(body) != message) return {false, file.filename().string() + " does not round trip"};
      FrameDecoder decoder;
      decoder.feed(encode_frame(message));
      const auto framed = decoder.next();
      if (!framed || *framed != body || !decoder.idle()) return {false, file.filename().string() + " frame mismatch"};
      ++ok;
    } catch (const std::exception & e) {
      return {false, file.filename().string() + ": " + e.what()};
    }
  }
  return {ok == all_message_types().size(), std::to_string(ok) + " message types round trip"};
}

}  // namespace

int main(int argc, char ** argv)
{
  Paths paths;
  std::string fixtures;
  std::string golden_dir;
  std::vector<std::string> only;
  CLI::App app{"minipide acceptance checks"};
  app.add_option("--bin", paths.bin, "minipide executable")->required();
  app.add_option("--fixtures", fixtures, "fixture directory")->required();
  app.add_option("--golden", golden_dir, "golden protocol messages")->required();
  app.add_option("--only", only, "run the named checks");
  app.add_option("--seed", paths.seed, "seed for the generated edit scripts");
  CLI11_PARSE(app, argc, argv);
  paths.fixtures = fixtures;
  paths.golden = golden_dir;

  const std::vector<std::pair<std::string, std::function<Outcome(const Paths &)>>> checks{
      {"differential", differential},
      {"non_blocking", non_blocking},
      {"parallelism", parallelism},
      {"cancellation", cancellation},
      {"budget_independence", budget_independence},
      {"symbol_codec", symbol_codec},
      {"partition_fuzz", partition_fuzz},
      {"markup", markup},
      {"protocol_golden", golden},
  };

  int failed = 0;
  for (const auto & [name, run] : checks) {
    if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) continue;
    Outcome outcome;
    try {
      outcome = run(paths);
    } catch (const std::exception & e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (outcome.pass ? "PASS " : "FAIL ") << name << ": " << outcome.detail << std::endl;
    if (!outcome.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
