#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gbmap {

// Root of the error hierarchy for the whole engine.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Syntax / unknown-identifier error with byte offset into the source text.
struct ParseError : Error {
    ParseError(const std::string& msg, std::size_t offset)
        : Error(msg + " (at offset " + std::to_string(offset) + ")"), offset(offset) {}
    std::size_t offset;
};

// sqrt/log of a non-positive argument, division by zero, non-finite result.
struct EvalDomainError : Error {
    EvalDomainError(const std::string& msg, std::string subexpr)
        : Error(msg + " in '" + subexpr + "'"), subexpression(std::move(subexpr)) {}
    std::string subexpression;
};

enum class ExprKind : std::uint8_t {
    Constant,   // real literal
    Variable,   // name from the declared variable set
    Sum,        // n-ary
    Product,    // n-ary, nonnegative folded coefficient first
    Quotient,   // binary
    Negate,     // unary
    IntPower,   // base ^ integer exponent (exponent stored exactly)
    Function,   // sin cos exp log sqrt atan
};

enum class UnaryFn : std::uint8_t { Sin, Cos, Exp, Log, Sqrt, Atan };

const char* unary_fn_name(UnaryFn fn);

class Expr;

struct ExprNode {
    ExprKind kind = ExprKind::Constant;
    double constant = 0.0;   // Constant
    int var = -1;            // Variable: index into the declared variable set
    std::string var_name;    // Variable
    int exponent = 0;        // IntPower
    UnaryFn fn = UnaryFn::Sin;
    std::vector<Expr> kids;
};

// Immutable symbolic expression over a fixed, ordered variable set.
// Subtrees are shared; copies are cheap. Evaluation is pure, so one Expr
// may be evaluated from any number of threads concurrently.
//
// Construction runs a fixed normal form: constant folding, 0/1 identity
// elimination, flattening of nested sums/products, and sign extraction
// from product coefficients. Equality checks are structural after this
// normal form; there is no further canonicalization.
class Expr {
public:
    Expr() : Expr(constant(0.0)) {}

    static Expr constant(double c);
    static Expr variable(std::string name, int index);
    static Expr sum(std::vector<Expr> kids);
    static Expr product(std::vector<Expr> kids);
    static Expr quotient(Expr num, Expr den);
    static Expr negate(Expr e);
    static Expr int_power(Expr base, int exponent);
    static Expr function(UnaryFn fn, Expr arg);

    const ExprNode& node() const { return *node_; }
    ExprKind kind() const { return node_->kind; }

    bool is_constant() const { return node_->kind == ExprKind::Constant; }
    bool is_constant(double c) const {
        return is_constant() && node_->constant == c;
    }
    bool is_zero() const { return is_constant(0.0); }

    // Exact partial derivative with respect to variable index `var`,
    // with constants folded.
    Expr derivative(int var) const;

    // Evaluate at a point; `values` is indexed by variable index.
    // Throws EvalDomainError naming the offending sub-expression.
    double eval(std::span<const double> values) const;

    // Infix rendering; parse(render(e)) is structurally equal to e.
    std::string render() const;

    bool equals(const Expr& other) const;

    // Replace variable i by replacements[i] (which may be over a different
    // variable set). Rebuilds through the normalizing constructors.
    Expr substituted(const std::vector<Expr>& replacements) const;

private:
    explicit Expr(std::shared_ptr<const ExprNode> n) : node_(std::move(n)) {}
    static Expr make(ExprNode&& n);
    std::shared_ptr<const ExprNode> node_;
};

// Parse an infix expression over the given variable names.
// Grammar: ^ (integer literal exponents only) > unary minus > * / > + -,
// left-associative, parentheses, functions sin cos exp log sqrt atan,
// named constant pi.
Expr parse_expression(std::string_view text, const std::vector<std::string>& vars);

} // namespace gbmap
