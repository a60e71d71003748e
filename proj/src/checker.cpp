#include "minipide/checker.hpp"

#include <algorithm>
#include <charconv>
#include <condition_variable>
#include <limits>
#include <mutex>

#include "minipide/outer_syntax.hpp"

namespace minipide
{
namespace
{

struct ParseError
{
  Range range;
  std::string message;
};

struct Expr
{
  enum class Kind { number, boolean, ident, paren, binary };

  Kind kind = Kind::number;
  Range range;
  std::string text;  // literal or identifier text
  char op = 0;
  std::vector<Expr> children;

  std::optional<Type> type;  // filled in by evaluation
  std::optional<Value> value;
};

std::string describe(const Token & t)
{
  if (t.kind == TokenKind::string_error) return "unterminated comment";
  return "'" + t.text + "'";
}

class CommandChecker
{
public:
  CommandChecker(std::string_view text, const Environment & env, std::stop_token stop)
      : env_(env), stop_(std::move(stop))
  {
    for (auto & t : tokenize(text)) {
      if (!t.is_trivia()) tokens_.push_back(std::move(t));
    }
  }

  std::optional<CheckResult> run()
  {
    if (tokens_.empty()) return finish(env_);

    const Token & head = tokens_.front();
    if (head.kind != TokenKind::keyword) {
      report(Severity::error, {head.range.begin, tokens_.back().range.end}, "expected a command keyword");
      return finish(env_);
    }
    result_.markup.add(head.range, {MarkupLabel::Kind::keyword, head.text, {}});
    pos_ = 1;

    try {
      if (head.text == "theory") {
        expect_ident("theory name");
        expect_end();
      } else if (head.text == "imports") {
        check_imports();
      } else if (head.text == "begin" || head.text == "end") {
        expect_end();
      } else if (head.text == "def") {
        return check_def();
      } else if (head.text == "eval") {
        check_eval();
      } else if (head.text == "lemma") {
        check_lemma();
      } else if (head.text == "sleep") {
        if (!check_sleep()) return std::nullopt;
      }
    } catch (const ParseError & e) {
      report(Severity::error, e.range, e.message);
    }
    return finish(env_);
  }

private:
  CheckResult finish(const Environment & env_out)
  {
    result_.status = failed_ ? CheckResult::Status::failed : CheckResult::Status::finished;
    result_.env_out = failed_ ? env_ : env_out;
    return std::move(result_);
  }

  void report(Severity severity, Range range, std::string text)
  {
    if (severity == Severity::error) failed_ = true;
    if (severity != Severity::writeln) {
      result_.markup.add(range, {severity == Severity::error ? MarkupLabel::Kind::error : MarkupLabel::Kind::warning,
                                 text, {}});
    }
    result_.messages.push_back({severity, std::move(text), std::nullopt, range});
  }

  // -- token stream

  bool at_end() const { return pos_ >= tokens_.size(); }
  const Token & peek() const { return tokens_[pos_]; }

  Range here() const { return at_end() ? tokens_.back().range : peek().range; }

  [[noreturn]] void fail(std::string message) const
  {
    if (at_end()) throw ParseError{here(), message + " at end of command"};
    throw ParseError{here(), message + ", found " + describe(peek())};
  }

  bool accept(char delimiter)
  {
    if (!at_end() && peek().kind == TokenKind::delimiter && peek().text[0] == delimiter) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char delimiter)
  {
    if (!accept(delimiter)) fail(std::string("expected '") + delimiter + "'");
  }

  const Token & expect_ident(std::string_view what)
  {
    if (at_end() || peek().kind != TokenKind::ident) fail("expected " + std::string(what));
    return tokens_[pos_++];
  }

  void expect_end()
  {
    if (!at_end()) {
      if (peek().kind == TokenKind::string_error) throw ParseError{peek().range, "unterminated comment"};
      throw ParseError{peek().range, "unexpected '" + peek().text + "'"};
    }
  }

  // -- commands

  void check_imports()
  {
    if (at_end()) {
      report(Severity::warning, tokens_.front().range, "imports lists no theories");
      return;
    }
    while (!at_end()) expect_ident("theory name");
  }

  const Token & definition_name()
  {
    const Token & name = expect_ident("a name");
    if (name.text == "true" || name.text == "false") {
      throw ParseError{name.range, "'" + name.text + "' is reserved"};
    }
    result_.markup.add(name.range, {MarkupLabel::Kind::def_site, name.text, {}});
    return name;
  }

  std::optional<CheckResult> check_def()
  {
    try {
      const Token & name = definition_name();
      std::optional<Type> declared;
      if (accept(':')) {
        const Token & type = expect_ident("a type");
        if (type.text == "int") {
          declared = Type::integer;
        } else if (type.text == "bool") {
          declared = Type::boolean;
        } else {
          throw ParseError{type.range, "unknown type '" + type.text + "'"};
        }
      }
      expect('=');
      Expr expr = parse_expression();
      expect_end();

      if (env_.find(name.text) != nullptr) {
        report(Severity::warning, name.range, "redefinition of '" + name.text + "' shadows an earlier definition");
      }
      evaluate(expr);
      if (expr.type && declared && *expr.type != *declared) {
        report(Severity::error, expr.range,
               "type mismatch: declared " + std::string(to_string(*declared)) + " but expression has type " +
                 std::string(to_string(*expr.type)));
      }
      if (failed_ || !expr.value) return finish(env_);

      result_.markup.add(expr.range, {MarkupLabel::Kind::value, format_value(*expr.value), {}});
      Environment out = env_;
      out.define({name.text, *expr.type, *expr.value, DefSite{{}, std::nullopt, name.range.begin}});
      return finish(out);
    } catch (const ParseError & e) {
      report(Severity::error, e.range, e.message);
      return finish(env_);
    }
  }

  void check_eval()
  {
    Expr expr = parse_expression();
    expect_end();
    evaluate(expr);
    if (expr.value) {
      const auto text = format_value(*expr.value);
      result_.markup.add(expr.range, {MarkupLabel::Kind::value, text, {}});
      report(Severity::writeln, expr.range, text);
    }
  }

  void check_lemma()
  {
    const Token & name = definition_name();
    expect(':');
    Expr expr = parse_expression();
    expect_end();
    if (expr.kind != Expr::Kind::binary || expr.op != '=') {
      evaluate(expr);
      report(Severity::error, expr.range, "lemma statement must be an equation");
      return;
    }
    evaluate(expr);
    if (!expr.value) return;
    if (!std::get<bool>(*expr.value)) {
      const auto & lhs = expr.children[0];
      const auto & rhs = expr.children[1];
      report(Severity::error, expr.range,
             "lemma " + name.text + ": " + format_value(*lhs.value) + " ≠ " + format_value(*rhs.value));
    }
  }

  // Returns false when interrupted.
  bool check_sleep()
  {
    if (at_end() || peek().kind != TokenKind::number) fail("expected a duration in milliseconds");
    const Token & number = tokens_[pos_++];
    expect_end();
    std::int64_t ms = 0;
    const auto [ptr, ec] = std::from_chars(number.text.data(), number.text.data() + number.text.size(), ms);
    if (ec != std::errc{}) throw ParseError{number.range, "duration too large"};

    std::mutex mutex;
    std::condition_variable wake;
    bool stopped = false;
    std::stop_callback on_stop(stop_, [&] {
      {
        std::lock_guard lock(mutex);
        stopped = true;
      }
      wake.notify_all();
    });
    std::unique_lock lock(mutex);
    wake.wait_for(lock, std::chrono::milliseconds(ms), [&] { return stopped; });
    return !stopped;
  }

  // -- expressions: comparison < additive < multiplicative, all left-assoc

  Expr parse_expression() { return parse_binary(0); }

  static int precedence(char op)
  {
    switch (op) {
      case '=':
      case '<':
        return 0;
      case '+':
      case '-':
        return 1;
      case '*':
        return 2;
      default:
        return -1;
    }
  }

  Expr parse_binary(int level)
  {
    if (level > 2) return parse_atom();
    Expr lhs = parse_binary(level + 1);
    while (!at_end() && peek().kind == TokenKind::delimiter && precedence(peek().text[0]) == level) {
      const char op = tokens_[pos_++].text[0];
      Expr rhs = parse_binary(level + 1);
      Expr node;
      node.kind = Expr::Kind::binary;
      node.op = op;
      node.range = {lhs.range.begin, rhs.range.end};
      node.children.push_back(std::move(lhs));
      node.children.push_back(std::move(rhs));
      lhs = std::move(node);
    }
    return lhs;
  }

  Expr parse_atom()
  {
    if (at_end()) fail("expected an expression");
    const Token & t = peek();
    Expr e;
    e.range = t.range;
    e.text = t.text;
    if (t.kind == TokenKind::number) {
      e.kind = Expr::Kind::number;
    } else if (t.kind == TokenKind::ident) {
      e.kind = (t.text == "true" || t.text == "false") ? Expr::Kind::boolean : Expr::Kind::ident;
    } else if (t.kind == TokenKind::delimiter && t.text == "(") {
      ++pos_;
      Expr inner = parse_expression();
      const Range close = here();
      expect(')');
      e.kind = Expr::Kind::paren;
      e.range = {t.range.begin, close.end};
      e.children.push_back(std::move(inner));
      return e;
    } else {
      fail("expected an expression");
    }
    ++pos_;
    return e;
  }

  void typed(Expr & e, Type type, Value value)
  {
    e.type = type;
    e.value = value;
    result_.markup.add(e.range, {MarkupLabel::Kind::inferred_type, std::string(to_string(type)), {}});
  }

  void evaluate(Expr & e)
  {
    switch (e.kind) {
      case Expr::Kind::number: {
        std::int64_t n = 0;
        const auto [ptr, ec] = std::from_chars(e.text.data(), e.text.data() + e.text.size(), n);
        if (ec != std::errc{}) {
          report(Severity::error, e.range, "number too large");
          return;
        }
        typed(e, Type::integer, n);
        return;
      }
      case Expr::Kind::boolean:
        typed(e, Type::boolean, e.text == "true");
        return;
      case Expr::Kind::ident: {
        const Definition * def = env_.find(e.text);
        if (def == nullptr) {
          report(Severity::error, e.range, "unbound identifier '" + e.text + "'");
          return;
        }
        result_.markup.add(e.range, {MarkupLabel::Kind::use_site, e.text, def->site});
        typed(e, def->type, def->value);
        return;
      }
      case Expr::Kind::paren:
        evaluate(e.children[0]);
        if (e.children[0].type) typed(e, *e.children[0].type, *e.children[0].value);
        return;
      case Expr::Kind::binary:
        break;
    }

    Expr & lhs = e.children[0];
    Expr & rhs = e.children[1];
    evaluate(lhs);
    evaluate(rhs);
    if (!lhs.type || !rhs.type) return;

    const auto mismatch = [&] {
      report(Severity::error, e.range,
             "type mismatch: " + std::string(to_string(*lhs.type)) + " " + e.op + " " +
               std::string(to_string(*rhs.type)));
    };
    if (e.op == '=') {
      if (*lhs.type != *rhs.type) return mismatch();
      typed(e, Type::boolean, *lhs.value == *rhs.value);
      return;
    }
    if (*lhs.type != Type::integer || *rhs.type != Type::integer) return mismatch();
    const std::int64_t a = std::get<std::int64_t>(*lhs.value);
    const std::int64_t b = std::get<std::int64_t>(*rhs.value);
    if (e.op == '<') {
      typed(e, Type::boolean, a < b);
      return;
    }
    std::int64_t r = 0;
    bool overflow = false;
    switch (e.op) {
      case '+':
        overflow = __builtin_add_overflow(a, b, &r);
        break;
      case '-':
        overflow = __builtin_sub_overflow(a, b, &r);
        break;
      case '*':
        overflow = __builtin_mul_overflow(a, b, &r);
        break;
    }
    if (overflow) {
      report(Severity::error, e.range, "integer overflow");
      return;
    }
    typed(e, Type::integer, r);
  }

  const Environment & env_;
  std::stop_token stop_;
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  bool failed_ = false;
  CheckResult result_;
};

}  // namespace

std::string_view to_string(CheckResult::Status status)
{
  return status == CheckResult::Status::finished ? "finished" : "failed";
}

std::optional<CheckResult> check_text(std::string_view command_text, const Environment & env_in, std::stop_token stop)
{
  return CommandChecker(command_text, env_in, std::move(stop)).run();
}

std::optional<CheckResult> check_command(const CommandSpan & span, const Environment & env_in, std::stop_token stop)
{
  return check_text(span.text, env_in, std::move(stop));
}

std::vector<NodeName> node_dependencies(const NodeName & node, std::span<const CommandSpan> spans)
{
  std::vector<NodeName> out;
  const auto imports = std::find_if(spans.begin(), spans.end(), [](const CommandSpan & s) { return s.keyword == "imports"; });
  if (imports == spans.end()) return out;
  for (const auto & t : imports->tokens) {
    if (t.kind != TokenKind::ident) continue;
    try {
      auto dep = NodeName::make(node.directory() + t.text + std::string(kTheoryExtension));
      if (std::find(out.begin(), out.end(), dep) == out.end()) out.push_back(std::move(dep));
    } catch (const Error &) {
      // not a usable file name; the checker reports nothing special for it
    }
  }
  return out;
}

}  // namespace minipide
