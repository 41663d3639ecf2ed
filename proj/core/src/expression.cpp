#include "heattrace/expression.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>

#include "heattrace/errors.hpp"

namespace heattrace {

// Postfix program evaluated on a small stack.
struct Expression::Node {
  enum class Op {
    Number, VarX, VarY, VarT, VarS, VarDelta,
    Add, Sub, Mul, Div, Pow, Neg,
    Sin, Cos, Tan, Exp, Log, Sqrt, Abs, Step,
    Min, Max, SmoothStep
  };
  Op op;
  double value = 0.0;
};

namespace {

using Node = Expression::Node;
using Op = Node::Op;

class Parser {
 public:
  explicit Parser(const std::string& text) : text_(text) {}

  std::vector<Node> run() {
    expression();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected character");
    return std::move(out_);
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw SchemaError("expression '" + text_ + "': " + what + " at column " + std::to_string(pos_ + 1));
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  void expression() {
    term();
    for (;;) {
      if (accept('+')) {
        term();
        out_.push_back({Op::Add});
      } else if (accept('-')) {
        term();
        out_.push_back({Op::Sub});
      } else {
        return;
      }
    }
  }

  void term() {
    unary();
    for (;;) {
      if (accept('*')) {
        unary();
        out_.push_back({Op::Mul});
      } else if (accept('/')) {
        unary();
        out_.push_back({Op::Div});
      } else {
        return;
      }
    }
  }

  void unary() {
    if (++nesting_ > kMaxNesting) fail("nesting too deep");
    struct Leave {
      int& n;
      ~Leave() { --n; }
    } leave{nesting_};
    if (accept('-')) {
      unary();
      out_.push_back({Op::Neg});
      return;
    }
    if (accept('+')) {
      unary();
      return;
    }
    power();
  }

  void power() {
    primary();
    if (accept('^')) {
      unary();
      out_.push_back({Op::Pow});
    }
  }

  void arguments(int count) {
    expect('(');
    for (int i = 0; i < count; ++i) {
      if (i > 0) expect(',');
      expression();
    }
    expect(')');
  }

  void primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = text_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("malformed number");
      pos_ += static_cast<std::size_t>(end - begin);
      out_.push_back({Op::Number, v});
      return;
    }
    if (accept('(')) {
      expression();
      expect(')');
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) ++pos_;
      const std::string name = text_.substr(start, pos_ - start);
      if (name == "x") return out_.push_back({Op::VarX});
      if (name == "y") return out_.push_back({Op::VarY});
      if (name == "t") return out_.push_back({Op::VarT});
      if (name == "s") return out_.push_back({Op::VarS});
      if (name == "delta") return out_.push_back({Op::VarDelta});
      if (name == "pi") return out_.push_back({Op::Number, std::numbers::pi});
      if (name == "e") return out_.push_back({Op::Number, std::numbers::e});
      static const std::pair<const char*, Op> unary_fns[] = {
          {"sin", Op::Sin}, {"cos", Op::Cos}, {"tan", Op::Tan}, {"exp", Op::Exp}, {"log", Op::Log},
          {"sqrt", Op::Sqrt}, {"abs", Op::Abs}, {"step", Op::Step}};
      for (const auto& [fname, op] : unary_fns)
        if (name == fname) {
          arguments(1);
          return out_.push_back({op});
        }
      if (name == "min" || name == "max" || name == "pow") {
        arguments(2);
        return out_.push_back({name == "min" ? Op::Min : name == "max" ? Op::Max : Op::Pow});
      }
      if (name == "smoothstep") {
        arguments(3);
        return out_.push_back({Op::SmoothStep});
      }
      pos_ = start;
      fail("unknown identifier '" + name + "'");
    }
    fail("unexpected character");
  }

  static constexpr int kMaxNesting = 256;

  const std::string& text_;
  std::size_t pos_ = 0;
  int nesting_ = 0;
  std::vector<Node> out_;
};

constexpr int kMaxDepth = 64;

double smoothstep(double a, double b, double v) {
  if (v <= a) return 0.0;
  if (v >= b) return 1.0;
  const double s = (v - a) / (b - a);
  return s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

}  // namespace

Expression::Expression()
    : text_("0"), program_(std::make_shared<const std::vector<Node>>(std::vector<Node>{{Op::Number, 0.0}})) {}

Expression Expression::constant(double value) {
  Expression e;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  e.text_ = buf;
  e.program_ = std::make_shared<const std::vector<Node>>(std::vector<Node>{{Op::Number, value}});
  return e;
}

Expression Expression::parse(const std::string& text) {
  Expression e;
  e.text_ = text;
  std::vector<Node> program = Parser(text).run();
  int depth = 0;
  int deepest = 0;
  for (const Node& n : program) {
    switch (n.op) {
      case Op::Number: case Op::VarX: case Op::VarY: case Op::VarT: case Op::VarS: case Op::VarDelta:
        ++depth;
        break;
      case Op::Add: case Op::Sub: case Op::Mul: case Op::Div: case Op::Pow: case Op::Min: case Op::Max:
        --depth;
        break;
      case Op::SmoothStep:
        depth -= 2;
        break;
      default:
        break;
    }
    deepest = std::max(deepest, depth);
  }
  if (deepest > kMaxDepth) throw SchemaError("expression '" + text + "': nesting too deep");
  e.program_ = std::make_shared<const std::vector<Node>>(std::move(program));
  return e;
}

double Expression::operator()(const Variables& v) const {
  double stack[kMaxDepth];
  int top = 0;
  for (const Node& n : *program_) {
    switch (n.op) {
      case Op::Number: stack[top++] = n.value; break;
      case Op::VarX: stack[top++] = v.x; break;
      case Op::VarY: stack[top++] = v.y; break;
      case Op::VarT: stack[top++] = v.t; break;
      case Op::VarS: stack[top++] = v.s; break;
      case Op::VarDelta: stack[top++] = v.delta; break;
      case Op::Add: --top; stack[top - 1] += stack[top]; break;
      case Op::Sub: --top; stack[top - 1] -= stack[top]; break;
      case Op::Mul: --top; stack[top - 1] *= stack[top]; break;
      case Op::Div: --top; stack[top - 1] /= stack[top]; break;
      case Op::Pow: --top; stack[top - 1] = std::pow(stack[top - 1], stack[top]); break;
      case Op::Min: --top; stack[top - 1] = std::min(stack[top - 1], stack[top]); break;
      case Op::Max: --top; stack[top - 1] = std::max(stack[top - 1], stack[top]); break;
      case Op::Neg: stack[top - 1] = -stack[top - 1]; break;
      case Op::Sin: stack[top - 1] = std::sin(stack[top - 1]); break;
      case Op::Cos: stack[top - 1] = std::cos(stack[top - 1]); break;
      case Op::Tan: stack[top - 1] = std::tan(stack[top - 1]); break;
      case Op::Exp: stack[top - 1] = std::exp(stack[top - 1]); break;
      case Op::Log: stack[top - 1] = std::log(stack[top - 1]); break;
      case Op::Sqrt: stack[top - 1] = std::sqrt(stack[top - 1]); break;
      case Op::Abs: stack[top - 1] = std::abs(stack[top - 1]); break;
      case Op::Step: stack[top - 1] = stack[top - 1] >= 0.0 ? 1.0 : 0.0; break;
      case Op::SmoothStep:
        top -= 2;
        stack[top - 1] = smoothstep(stack[top - 1], stack[top], stack[top + 1]);
        break;
    }
  }
  return stack[0];
}

}  // namespace heattrace
