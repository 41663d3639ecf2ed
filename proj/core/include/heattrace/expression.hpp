#pragma once

#include <memory>
#include <string>
#include <vector>

namespace heattrace {

/// Variables visible to a density expression.
struct Variables {
  double x = 0.0;
  double y = 0.0;
  double t = 0.0;
  double s = 0.0;      // arclength along a boundary side
  double delta = 0.0;  // distance to the boundary
};

/// Small arithmetic expression language used for densities in measure files.
///
/// Grammar: numbers, the variables x y t s delta, the constants pi and e,
/// + - * / ^ (right associative), unary minus, parentheses and the functions
/// sin cos tan exp log sqrt abs step (one argument), min max pow (two
/// arguments), smoothstep(a, b, v) (quintic ramp from 0 at a to 1 at b).
class Expression {
 public:
  Expression();  // the constant 0
  /// Throws SchemaError with the column of the first offending character.
  static Expression parse(const std::string& text);
  static Expression constant(double value);

  double operator()(const Variables& vars) const;
  const std::string& text() const { return text_; }
  bool operator==(const Expression& other) const { return text_ == other.text_; }

  struct Node;

 private:
  std::string text_;
  std::shared_ptr<const std::vector<Node>> program_;
};

}  // namespace heattrace
