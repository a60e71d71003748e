#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "minipide/checker.hpp"
#include "minipide/edit_script.hpp"
#include "minipide/engine.hpp"
#include "minipide/outer_syntax.hpp"
#include "minipide/protocol.hpp"
#include "minipide/symbols.hpp"
#include "minipide/trace.hpp"

namespace py = pybind11;
using namespace minipide;

namespace
{

py::tuple range_tuple(const Range & r) { return py::make_tuple(r.begin, r.end); }

py::dict message_dict(const Message & m)
{
  py::dict d;
  d["severity"] = std::string(to_string(m.severity));
  d["text"] = m.text;
  d["range"] = m.range ? py::object(range_tuple(*m.range)) : py::object(py::none());
  return d;
}

py::list message_list(const std::vector<Message> & messages)
{
  py::list out;
  for (const auto & m : messages) out.append(message_dict(m));
  return out;
}

// Edits travel as JSON text so Python callers can use plain dicts.
std::vector<Edit> edits_from_text(const std::string & json_text)
{
  try {
    return edits_from_json(Json::parse(json_text));
  } catch (const Json::exception & e) {
    throw Error(e.what());
  }
}

class PyEngine
{
public:
  PyEngine(unsigned workers, std::optional<std::string> root)
      : engine_({workers, root ? std::optional<std::filesystem::path>(*root) : std::nullopt})
  {
  }

  VersionId submit(const std::string & edits_json)
  {
    const auto edits = edits_from_text(edits_json);
    py::gil_scoped_release release;
    return engine_.submit(edits).assignment.version_id;
  }

  bool wait_quiescent(double timeout_s)
  {
    py::gil_scoped_release release;
    return engine_.wait_quiescent(std::chrono::milliseconds(static_cast<long long>(timeout_s * 1000)));
  }

  std::string trace() const { return canonical_trace(engine_.scheduler().snapshot()); }

  py::dict summary() const
  {
    const auto s = engine_.scheduler().summary();
    const auto counts = [](const StatusCounts & c) {
      py::dict d;
      d["unprocessed"] = c.unprocessed;
      d["running"] = c.running;
      d["finished"] = c.finished;
      d["failed"] = c.failed;
      return d;
    };
    py::dict nodes;
    for (const auto & [name, c] : s.nodes) nodes[py::str(name.path())] = counts(c);
    py::dict out;
    out["session"] = counts(s.session);
    out["nodes"] = nodes;
    return out;
  }

private:
  Engine engine_;
};

}  // namespace

PYBIND11_MODULE(_core, m)
{
  m.doc() = "Continuous checking engine for Mini-Theory files";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidEdit>(m, "InvalidEdit", base.ptr());
  py::register_exception<FrameError>(m, "FrameError", base.ptr());
  py::register_exception<SchemaError>(m, "SchemaError", base.ptr());
  py::register_exception<ScriptError>(m, "ScriptError", base.ptr());

  m.attr("PROTOCOL_VERSION") = kProtocolVersion;

  m.def("tokenize", [](const std::string & text) {
    py::list out;
    for (const auto & t : tokenize(text)) {
      out.append(py::make_tuple(std::string(to_string(t.kind)), t.text, t.range.begin, t.range.end));
    }
    return out;
  }, py::arg("text"), "Tokens as (kind, text, begin, end).");

  m.def("partition", [](const std::string & text) {
    const auto p = partition(text);
    py::list spans;
    for (const auto & s : p.spans) {
      py::dict d;
      d["keyword"] = s.keyword;
      d["range"] = range_tuple(s.range);
      d["text"] = s.text;
      spans.append(d);
    }
    return py::make_tuple(spans, message_list(p.messages));
  }, py::arg("text"), "Command spans and parse messages.");

  py::class_<StyledText>(m, "StyledText")
      .def_readonly("text", &StyledText::text)
      .def_property_readonly("styles", [](const StyledText & s) {
        py::list out;
        for (const auto & run : s.styles) {
          out.append(py::make_tuple(run.range.begin, run.range.end, std::string(to_string(run.style))));
        }
        return out;
      })
      .def("to_presentation", &StyledText::to_presentation)
      .def("to_raw", &StyledText::to_raw)
      .def("__repr__", [](const StyledText & s) { return "StyledText(" + Json(s.text).dump() + ")"; });

  m.def("decode", [](const std::string & raw) { return decode(raw); }, py::arg("raw"));
  m.def("encode", [](const StyledText & styled) { return encode(styled); }, py::arg("styled"));
  m.def("encode_glyphs", [](const std::string & text) { return encode(StyledText::from_glyphs(text)); },
        py::arg("text"), "Escapes every glyph that has a table entry.");
  m.def("symbol_table", [] { return std::string(SymbolTable::bundled_source()); });

  m.def("complete", [](const std::string & prefix) {
    static const CompletionTables tables = CompletionTables::bundled();
    py::list out;
    for (const auto & item : complete(prefix, tables)) out.append(py::make_tuple(item.replacement, item.display));
    return out;
  }, py::arg("prefix"), "Completions as (replacement, display).");

  m.def("check_text", [](const std::string & text) {
    const auto result = check_text(text, Environment{});
    py::dict d;
    d["status"] = std::string(to_string(result->status));
    d["messages"] = message_list(result->messages);
    d["markup"] = to_json(result->markup).dump();
    return d;
  }, py::arg("text"), "Checks one command in an empty environment.");

  py::class_<PyEngine>(m, "Engine")
      .def(py::init<unsigned, std::optional<std::string>>(), py::arg("workers") = 2, py::arg("root") = py::none())
      .def("submit", &PyEngine::submit, py::arg("edits_json"))
      .def("wait_quiescent", &PyEngine::wait_quiescent, py::arg("timeout") = 60.0)
      .def("trace", &PyEngine::trace)
      .def("summary", &PyEngine::summary);

  m.def("replay", [](const std::string & path, const std::string & mode, unsigned workers) {
    const auto script = load_edit_script(path);
    if (mode != "incremental" && mode != "batch") throw Error("mode must be incremental or batch");
    py::gil_scoped_release release;
    return mode == "batch" ? replay_batch(script, workers) : replay_incremental(script, workers);
  }, py::arg("script"), py::arg("mode") = "incremental", py::arg("workers") = 2);

  m.def("canonical_json", [](const std::string & body) { return serialize(deserialize(body)); }, py::arg("body"),
        "Validates a message body and returns its canonical form.");
  m.def("encode_frame", [](const std::string & body) { return py::bytes(encode_frame(serialize(deserialize(body)))); },
        py::arg("body"));
  m.def("decode_frames", [](const py::bytes & data) {
    FrameDecoder decoder;
    decoder.feed(std::string(data));
    py::list bodies;
    while (auto body = decoder.next()) bodies.append(*body);
    return py::make_tuple(bodies, decoder.idle());
  }, py::arg("data"), "Complete frame bodies, and whether no partial frame remains.");
}
