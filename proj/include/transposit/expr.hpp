#pragma once

// Expression language for Lagrangians, constraints and monitors.
//
//   expr    := term (('+' | '-') term)*
//   term    := power (('*' | '/') power)*
//   power   := unary ('^' power)?
//   unary   := '-' unary | primary
//   primary := number | name | func '(' expr (',' expr)* ')' | '(' expr ')'
//
// Names resolve to `t`, a coordinate, `d<coord>` or a declared parameter.

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace transposit {

enum class Func { Sin, Cos, Tan, Atan, Atan2, Sqrt, Exp, Ln, Abs, Pow };

enum class NodeKind { Constant, Parameter, Variable, Unary, Binary, Call };

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

/// Immutable AST node.
struct ExprNode {
    NodeKind kind = NodeKind::Constant;
    double value = 0.0;  ///< Constant
    std::string name;    ///< Parameter, Variable
    char op = 0;         ///< Unary '-', Binary + - * / ^
    Func func = Func::Sin;
    std::vector<Expr> children;
};

Expr make_constant(double value);
Expr make_parameter(std::string name);
Expr make_variable(std::string name);
Expr make_unary(char op, Expr operand);
Expr make_binary(char op, Expr lhs, Expr rhs);
Expr make_call(Func func, std::vector<Expr> args);

const char* func_name(Func func);
std::optional<Func> func_from_name(std::string_view name);
int func_arity(Func func);

bool structurally_equal(const ExprNode& a, const ExprNode& b);

/// Fully parenthesized canonical text; parse(pretty_print(e)) == e.
std::string pretty_print(const ExprNode& e);
std::string pretty_print(const Expr& e);

/// Names visible to an expression besides `t`.
struct Scope {
    std::vector<std::string> coords;
    std::vector<std::string> params;
};

Expr parse_expression(std::string_view src, const Scope& scope);

/// Replace variable references by name.
Expr substitute(const Expr& e, const std::vector<std::pair<std::string, Expr>>& replacements);

/// True when the expression references the named variable or parameter.
bool mentions(const ExprNode& e, std::string_view name);

struct Monitor {
    std::string name;
    Expr expr;
};

/// Parsed and validated model file.
struct ModelSpec {
    std::string name;
    std::vector<std::string> coords;
    std::vector<std::pair<std::string, double>> params;
    Expr lagrangian;
    std::vector<Expr> constraints;
    std::vector<Expr> aux;
    std::vector<double> lambda0;
    std::vector<Monitor> monitors;

    std::size_t n() const { return coords.size(); }
    std::size_t m() const { return constraints.size(); }
    Scope scope() const;
    std::optional<double> param(std::string_view key) const;
};

ModelSpec parse_model_file(std::string_view text);
std::string emit_model_file(const ModelSpec& spec);

inline constexpr std::size_t kMaxCoords = 8;

}  // namespace transposit
