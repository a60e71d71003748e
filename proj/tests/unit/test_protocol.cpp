#include <doctest.h>

#include "minipide/protocol.hpp"

using namespace minipide;

TEST_SUITE("protocol")
{
  TEST_CASE("round trip")
  {
    const ProtocolMessage m{MessageType::completion_request, 3, {{"prefix", "\\<for"}}};
    const std::string body = serialize(m);
    CHECK(body == R"({"payload":{"prefix":"\\<for"},"seq":3,"type":"completion_request"})");
    CHECK(deserialize(body) == m);

    FrameDecoder decoder;
    const std::string frame = encode_frame(m);
    CHECK(frame.size() == body.size() + 4);
    CHECK(frame[3] == static_cast<char>(body.size()));
    decoder.feed(frame.substr(0, 2));
    CHECK(!decoder.next());
    decoder.feed(frame.substr(2) + frame);
    CHECK(deserialize(decoder.next().value()) == m);
    CHECK(deserialize(decoder.next().value()) == m);
    CHECK(!decoder.next());
    CHECK(decoder.idle());
  }

  TEST_CASE("every type has a name")
  {
    CHECK(all_message_types().size() == 11);
    for (auto t : all_message_types()) CHECK(message_type_from_string(to_string(t)) == t);
    CHECK(is_client_message(MessageType::hello));
    CHECK(!is_client_message(MessageType::welcome));
  }

  TEST_CASE("schema errors")
  {
    CHECK_THROWS_AS(deserialize("{}"), SchemaError);
    CHECK_THROWS_AS(deserialize("[1]"), SchemaError);
    CHECK_THROWS_AS(deserialize("{\"type\": \"hello\""), SchemaError);
    CHECK_THROWS_AS(deserialize(R"({"type":"hello","payload":{}})"), SchemaError);
    CHECK_THROWS_AS(deserialize(R"({"type":"hello","seq":-1,"payload":{}})"), SchemaError);
    CHECK_THROWS_AS(deserialize(R"({"type":"hello","seq":1})"), SchemaError);
    CHECK_THROWS_AS(deserialize(R"({"type":"hello","seq":1,"payload":{},"x":0})"), SchemaError);
    CHECK_THROWS_AS(deserialize(R"({"type":"completion_request","seq":1,"payload":{"prefix":1}})"), SchemaError);
    CHECK_THROWS_AS(deserialize(R"({"type":"node_edits","seq":1,"payload":{"client_version_tag":"a",
        "edits":[{"node":"A.mthy","kind":"move","offset":0,"text":""}]}})"),
                    SchemaError);
    CHECK_THROWS_AS(deserialize(R"({"type":"node_edits","seq":1,"payload":{"client_version_tag":"a",
        "edits":[{"node":"../A.mthy","kind":"insert","offset":0,"text":""}]}})"),
                    SchemaError);
    try {
      deserialize(R"({"type":"nope","seq":9,"payload":{}})");
      FAIL("accepted");
    } catch (const SchemaError & e) {
      CHECK(e.seq() == 9);
    }
    CHECK_NOTHROW(deserialize(R"({"type":"hello","seq":1,"payload":{"client":"x"}})"));
  }

  TEST_CASE("frame errors")
  {
    FrameDecoder zero;
    zero.feed(std::string("\0\0\0\0", 4));
    CHECK_THROWS_AS(zero.next(), FrameError);

    FrameDecoder huge;
    huge.feed("\x7f\xff\xff\xff");
    CHECK_THROWS_AS(huge.next(), FrameError);

    FrameDecoder bad;
    bad.feed(std::string("\0\0\0\2\xc3\x28", 6));
    CHECK_THROWS_AS(bad.next(), FrameError);

    CHECK_THROWS_AS(encode_frame(std::string_view{}), FrameError);
  }

  TEST_CASE("edits")
  {
    const Edit e = Edit::remove(NodeName::make("d/A.mthy"), 4, "x = 1");
    CHECK(edit_from_json(to_json(e)) == e);
    CHECK_THROWS(edit_from_json(Json{{"node", "A.mthy"}, {"kind", "insert"}, {"offset", -1}, {"text", ""}}));
  }
}
