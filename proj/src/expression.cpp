#include "sspop/expression.hpp"

#include <fmt/format.h>

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <functional>

namespace sspop {

ParseError::ParseError(const std::string& message, std::size_t offset)
    : std::runtime_error(fmt::format("{} (at byte {})", message, offset)), offset_(offset) {}

bool same_tree(const ExprNode& a, const ExprNode& b) {
  if (a.op != b.op) return false;
  if (a.op == ExprOp::Number) return a.value == b.value;
  if (static_cast<bool>(a.lhs) != static_cast<bool>(b.lhs)) return false;
  if (static_cast<bool>(a.rhs) != static_cast<bool>(b.rhs)) return false;
  if (a.lhs && !same_tree(*a.lhs, *b.lhs)) return false;
  if (a.rhs && !same_tree(*a.rhs, *b.rhs)) return false;
  return true;
}

namespace {

ExprPtr make(ExprOp op, ExprPtr lhs = nullptr, ExprPtr rhs = nullptr, double value = 0.0) {
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  n->value = value;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  ExprPtr parse() {
    ExprPtr e = sum();
    skip_space();
    if (pos_ < text_.size())
      throw ParseError(fmt::format("unexpected '{}'", text_[pos_]), pos_);
    return e;
  }

 private:
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
    if (!accept(c)) {
      if (pos_ >= text_.size()) throw ParseError(fmt::format("expected '{}' before end of input", c), pos_);
      throw ParseError(fmt::format("expected '{}' but found '{}'", c, text_[pos_]), pos_);
    }
  }

  ExprPtr sum() {
    ExprPtr lhs = product();
    for (;;) {
      if (accept('+')) lhs = make(ExprOp::Add, lhs, product());
      else if (accept('-')) lhs = make(ExprOp::Sub, lhs, product());
      else return lhs;
    }
  }

  ExprPtr product() {
    ExprPtr lhs = unary();
    for (;;) {
      if (accept('*')) lhs = make(ExprOp::Mul, lhs, unary());
      else if (accept('/')) lhs = make(ExprOp::Div, lhs, unary());
      else return lhs;
    }
  }

  // -a^b parses as -(a^b); the exponent may itself carry a sign.
  ExprPtr unary() {
    if (accept('-')) return make(ExprOp::Neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  ExprPtr power() {
    ExprPtr base = primary();
    if (accept('^')) return make(ExprOp::Pow, base, unary());
    return base;
  }

  ExprPtr primary() {
    skip_space();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      ExprPtr e = sum();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    throw ParseError(fmt::format("unexpected '{}'", c), pos_);
  }

  ExprPtr number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    };
    digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      digits();
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) digits();
      else pos_ = save;  // "2e" is 2 followed by an identifier
    }
    double v = 0.0;
    const auto res = std::from_chars(text_.data() + start, text_.data() + pos_, v);
    if (res.ec != std::errc() || res.ptr != text_.data() + pos_)
      throw ParseError(fmt::format("malformed number '{}'", text_.substr(start, pos_ - start)), start);
    return make(ExprOp::Number, nullptr, nullptr, v);
  }

  ExprPtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    const std::string_view name = text_.substr(start, pos_ - start);
    if (name == "s") return make(ExprOp::VarS);
    if (name == "P") return make(ExprOp::VarP);
    if (name == "exp") {
      expect('(');
      ExprPtr arg = sum();
      expect(')');
      return make(ExprOp::Exp, arg);
    }
    throw ParseError(fmt::format("unknown identifier '{}'", name), start);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void print(const ExprNode& n, std::string& out) {
  auto binary = [&](const char* op) {
    out += '(';
    print(*n.lhs, out);
    out += op;
    print(*n.rhs, out);
    out += ')';
  };
  switch (n.op) {
    case ExprOp::Number: out += fmt::format("{}", n.value); break;
    case ExprOp::VarS: out += 's'; break;
    case ExprOp::VarP: out += 'P'; break;
    case ExprOp::Neg:
      out += "(-";
      print(*n.lhs, out);
      out += ')';
      break;
    case ExprOp::Exp:
      out += "exp(";
      print(*n.lhs, out);
      out += ')';
      break;
    case ExprOp::Add: binary(" + "); break;
    case ExprOp::Sub: binary(" - "); break;
    case ExprOp::Mul: binary(" * "); break;
    case ExprOp::Div: binary(" / "); break;
    case ExprOp::Pow: binary("^"); break;
  }
}

}  // namespace

Expression::Expression(ExprPtr root) : root_(std::move(root)) {
  if (!root_) throw std::invalid_argument("Expression: null tree");
  int depth = 0;
  int max_depth = 0;
  std::function<void(const ExprNode&)> emit = [&](const ExprNode& n) {
    if (n.lhs) emit(*n.lhs);
    if (n.rhs) emit(*n.rhs);
    program_.push_back({n.op, n.value});
    switch (n.op) {
      case ExprOp::Number:
      case ExprOp::VarS:
      case ExprOp::VarP: ++depth; break;
      case ExprOp::Neg:
      case ExprOp::Exp: break;
      default: --depth; break;
    }
    if (n.op == ExprOp::VarP) uses_P_ = true;
    max_depth = std::max(max_depth, depth);
  };
  emit(*root_);
  if (max_depth > kMaxStack) throw ParseError("expression nested too deeply", 0);
}

double Expression::operator()(double s, double P) const {
  std::array<double, kMaxStack> stack;
  int sp = 0;
  for (const Instr& in : program_) {
    switch (in.op) {
      case ExprOp::Number: stack[sp++] = in.value; break;
      case ExprOp::VarS: stack[sp++] = s; break;
      case ExprOp::VarP: stack[sp++] = P; break;
      case ExprOp::Neg: stack[sp - 1] = -stack[sp - 1]; break;
      case ExprOp::Exp: stack[sp - 1] = std::exp(stack[sp - 1]); break;
      case ExprOp::Add: --sp; stack[sp - 1] += stack[sp]; break;
      case ExprOp::Sub: --sp; stack[sp - 1] -= stack[sp]; break;
      case ExprOp::Mul: --sp; stack[sp - 1] *= stack[sp]; break;
      case ExprOp::Div: --sp; stack[sp - 1] /= stack[sp]; break;
      case ExprOp::Pow: --sp; stack[sp - 1] = std::pow(stack[sp - 1], stack[sp]); break;
    }
  }
  return stack[0];
}

std::string Expression::to_string() const {
  std::string out;
  print(*root_, out);
  return out;
}

Expression parse_rate(std::string_view text) { return Expression(Parser(text).parse()); }

}  // namespace sspop
