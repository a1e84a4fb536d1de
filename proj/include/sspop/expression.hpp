#pragma once

// A tiny arithmetic language for vital rates: numbers, the variables s and P,
// + - * / ^, unary minus, parentheses and exp(). Nothing else.

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sspop {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t offset);
  /// Byte offset into the parsed text.
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

enum class ExprOp { Number, VarS, VarP, Neg, Add, Sub, Mul, Div, Pow, Exp };

struct ExprNode {
  ExprOp op = ExprOp::Number;
  double value = 0.0;  // Number only
  std::shared_ptr<const ExprNode> lhs;  // operand of Neg/Exp, left of binaries
  std::shared_ptr<const ExprNode> rhs;
};

using ExprPtr = std::shared_ptr<const ExprNode>;

bool same_tree(const ExprNode& a, const ExprNode& b);

/// Immutable parsed expression. Evaluation runs a flattened postfix program
/// and is safe to call concurrently.
class Expression {
 public:
  static constexpr int kMaxStack = 64;

  explicit Expression(ExprPtr root);

  double operator()(double s, double P) const;

  /// Fully parenthesised text; parsing it yields an identical tree.
  std::string to_string() const;

  const ExprNode& root() const { return *root_; }
  bool depends_on_P() const { return uses_P_; }

  friend bool operator==(const Expression& a, const Expression& b) {
    return same_tree(*a.root_, *b.root_);
  }

 private:
  struct Instr {
    ExprOp op;
    double value;
  };
  ExprPtr root_;
  std::vector<Instr> program_;
  bool uses_P_ = false;
};

/// Parses text over the variables s and P.
/// Throws ParseError with the byte offset of the offending token.
Expression parse_rate(std::string_view text);

}  // namespace sspop
