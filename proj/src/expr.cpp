#include "gbmap/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <optional>

namespace gbmap {

const char* unary_fn_name(UnaryFn fn) {
    switch (fn) {
        case UnaryFn::Sin: return "sin";
        case UnaryFn::Cos: return "cos";
        case UnaryFn::Exp: return "exp";
        case UnaryFn::Log: return "log";
        case UnaryFn::Sqrt: return "sqrt";
        case UnaryFn::Atan: return "atan";
    }
    return "?";
}

Expr Expr::make(ExprNode&& n) {
    return Expr(std::make_shared<const ExprNode>(std::move(n)));
}

Expr Expr::constant(double c) {
    ExprNode n;
    n.kind = ExprKind::Constant;
    n.constant = c;
    return make(std::move(n));
}

Expr Expr::variable(std::string name, int index) {
    ExprNode n;
    n.kind = ExprKind::Variable;
    n.var = index;
    n.var_name = std::move(name);
    return make(std::move(n));
}

Expr Expr::sum(std::vector<Expr> kids) {
    std::vector<Expr> flat;
    double c = 0.0;
    for (auto& k : kids) {
        if (k.kind() == ExprKind::Sum) {
            for (const auto& g : k.node().kids) {
                if (g.is_constant()) c += g.node().constant;
                else flat.push_back(g);
            }
        } else if (k.is_constant()) {
            c += k.node().constant;
        } else {
            flat.push_back(std::move(k));
        }
    }
    if (flat.empty()) return constant(c);
    if (c != 0.0) flat.push_back(constant(c));
    if (flat.size() == 1) return flat[0];
    ExprNode n;
    n.kind = ExprKind::Sum;
    n.kids = std::move(flat);
    return make(std::move(n));
}

Expr Expr::product(std::vector<Expr> kids) {
    std::vector<Expr> flat;
    double c = 1.0;
    for (auto& k : kids) {
        if (k.kind() == ExprKind::Product) {
            for (const auto& g : k.node().kids) {
                if (g.is_constant()) c *= g.node().constant;
                else flat.push_back(g);
            }
        } else if (k.is_constant()) {
            c *= k.node().constant;
        } else {
            flat.push_back(std::move(k));
        }
    }
    if (c == 0.0) return constant(0.0);
    bool negative = c < 0.0;
    if (negative) c = -c;
    Expr result;
    if (flat.empty()) {
        result = constant(c);
    } else {
        if (c != 1.0) flat.insert(flat.begin(), constant(c));
        if (flat.size() == 1) {
            result = flat[0];
        } else {
            ExprNode n;
            n.kind = ExprKind::Product;
            n.kids = std::move(flat);
            result = make(std::move(n));
        }
    }
    return negative ? negate(result) : result;
}

Expr Expr::quotient(Expr num, Expr den) {
    if (num.is_zero() && !den.is_zero()) return constant(0.0);
    if (den.is_constant(1.0)) return num;
    if (num.is_constant() && den.is_constant() && den.node().constant != 0.0)
        return constant(num.node().constant / den.node().constant);
    ExprNode n;
    n.kind = ExprKind::Quotient;
    n.kids = {std::move(num), std::move(den)};
    return make(std::move(n));
}

Expr Expr::negate(Expr e) {
    if (e.is_constant()) return constant(-e.node().constant);
    if (e.kind() == ExprKind::Negate) return e.node().kids[0];
    ExprNode n;
    n.kind = ExprKind::Negate;
    n.kids = {std::move(e)};
    return make(std::move(n));
}

Expr Expr::int_power(Expr base, int exponent) {
    if (exponent == 0) return constant(1.0);
    if (exponent == 1) return base;
    if (base.is_constant()) {
        double v = std::pow(base.node().constant, exponent);
        if (std::isfinite(v)) return constant(v);
    }
    ExprNode n;
    n.kind = ExprKind::IntPower;
    n.exponent = exponent;
    n.kids = {std::move(base)};
    return make(std::move(n));
}

Expr Expr::function(UnaryFn fn, Expr arg) {
    if (arg.is_constant()) {
        double a = arg.node().constant;
        double v = std::numeric_limits<double>::quiet_NaN();
        switch (fn) {
            case UnaryFn::Sin: v = std::sin(a); break;
            case UnaryFn::Cos: v = std::cos(a); break;
            case UnaryFn::Exp: v = std::exp(a); break;
            case UnaryFn::Log: v = a > 0.0 ? std::log(a) : v; break;
            case UnaryFn::Sqrt: v = a >= 0.0 ? std::sqrt(a) : v; break;
            case UnaryFn::Atan: v = std::atan(a); break;
        }
        if (std::isfinite(v)) return constant(v);
        // keep the node; evaluation reports the domain violation
    }
    ExprNode n;
    n.kind = ExprKind::Function;
    n.fn = fn;
    n.kids = {std::move(arg)};
    return make(std::move(n));
}

// ---------------------------------------------------------------------------
// differentiation

Expr Expr::derivative(int var) const {
    const ExprNode& n = *node_;
    switch (n.kind) {
        case ExprKind::Constant:
            return constant(0.0);
        case ExprKind::Variable:
            return constant(n.var == var ? 1.0 : 0.0);
        case ExprKind::Sum: {
            std::vector<Expr> kids;
            kids.reserve(n.kids.size());
            for (const auto& k : n.kids) kids.push_back(k.derivative(var));
            return sum(std::move(kids));
        }
        case ExprKind::Product: {
            std::vector<Expr> terms;
            for (std::size_t i = 0; i < n.kids.size(); ++i) {
                std::vector<Expr> factors;
                factors.reserve(n.kids.size());
                for (std::size_t j = 0; j < n.kids.size(); ++j)
                    factors.push_back(i == j ? n.kids[j].derivative(var) : n.kids[j]);
                terms.push_back(product(std::move(factors)));
            }
            return sum(std::move(terms));
        }
        case ExprKind::Quotient: {
            const Expr& a = n.kids[0];
            const Expr& b = n.kids[1];
            Expr num = sum({product({a.derivative(var), b}),
                            negate(product({a, b.derivative(var)}))});
            return quotient(std::move(num), int_power(b, 2));
        }
        case ExprKind::Negate:
            return negate(n.kids[0].derivative(var));
        case ExprKind::IntPower: {
            const Expr& b = n.kids[0];
            return product({constant(static_cast<double>(n.exponent)),
                            int_power(b, n.exponent - 1), b.derivative(var)});
        }
        case ExprKind::Function: {
            const Expr& a = n.kids[0];
            Expr da = a.derivative(var);
            switch (n.fn) {
                case UnaryFn::Sin:
                    return product({std::move(da), function(UnaryFn::Cos, a)});
                case UnaryFn::Cos:
                    return negate(product({std::move(da), function(UnaryFn::Sin, a)}));
                case UnaryFn::Exp:
                    return product({std::move(da), function(UnaryFn::Exp, a)});
                case UnaryFn::Log:
                    return quotient(std::move(da), a);
                case UnaryFn::Sqrt:
                    return quotient(std::move(da),
                                    product({constant(2.0), function(UnaryFn::Sqrt, a)}));
                case UnaryFn::Atan:
                    return quotient(std::move(da), sum({constant(1.0), int_power(a, 2)}));
            }
            return constant(0.0);
        }
    }
    return constant(0.0);
}

// ---------------------------------------------------------------------------
// evaluation

namespace {

double eval_node(const ExprNode& n, std::span<const double> values);

double eval_expr(const Expr& e, std::span<const double> values) {
    return eval_node(e.node(), values);
}

double eval_node(const ExprNode& n, std::span<const double> values) {
    switch (n.kind) {
        case ExprKind::Constant:
            return n.constant;
        case ExprKind::Variable:
            return values[static_cast<std::size_t>(n.var)];
        case ExprKind::Sum: {
            double s = 0.0;
            for (const auto& k : n.kids) s += eval_expr(k, values);
            return s;
        }
        case ExprKind::Product: {
            double p = 1.0;
            for (const auto& k : n.kids) p *= eval_expr(k, values);
            return p;
        }
        case ExprKind::Quotient: {
            double num = eval_expr(n.kids[0], values);
            double den = eval_expr(n.kids[1], values);
            if (den == 0.0)
                throw EvalDomainError("division by zero", n.kids[1].render());
            return num / den;
        }
        case ExprKind::Negate:
            return -eval_expr(n.kids[0], values);
        case ExprKind::IntPower: {
            double b = eval_expr(n.kids[0], values);
            int e = n.exponent;
            if (e < 0) {
                if (b == 0.0)
                    throw EvalDomainError("zero base with negative exponent",
                                          n.kids[0].render());
                b = 1.0 / b;
                e = -e;
            }
            double r = 1.0;
            while (e > 0) {
                if (e & 1) r *= b;
                b *= b;
                e >>= 1;
            }
            return r;
        }
        case ExprKind::Function: {
            double a = eval_expr(n.kids[0], values);
            switch (n.fn) {
                case UnaryFn::Sin: return std::sin(a);
                case UnaryFn::Cos: return std::cos(a);
                case UnaryFn::Exp: return std::exp(a);
                case UnaryFn::Log:
                    if (a <= 0.0)
                        throw EvalDomainError("log of non-positive argument",
                                              n.kids[0].render());
                    return std::log(a);
                case UnaryFn::Sqrt:
                    if (a < 0.0)
                        throw EvalDomainError("sqrt of negative argument",
                                              n.kids[0].render());
                    return std::sqrt(a);
                case UnaryFn::Atan: return std::atan(a);
            }
            return 0.0;
        }
    }
    return 0.0;
}

} // namespace

double Expr::eval(std::span<const double> values) const {
    double v = eval_node(*node_, values);
    if (!std::isfinite(v))
        throw EvalDomainError("non-finite value", render());
    return v;
}

// ---------------------------------------------------------------------------
// rendering

namespace {

// precedence levels: sum 1, product/quotient 2, negate 3, power 4, atom 5
int precedence_of(const ExprNode& n) {
    switch (n.kind) {
        case ExprKind::Sum: return 1;
        case ExprKind::Product:
        case ExprKind::Quotient: return 2;
        case ExprKind::Negate: return 3;
        case ExprKind::IntPower: return 4;
        default: return 5;
    }
}

std::string render_constant(double c) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), c);
    (void)ec;
    return std::string(buf, ptr);
}

void render_node(const Expr& e, std::string& out, int parent_prec);

void render_child(const Expr& e, std::string& out, int parent_prec) {
    bool need_parens = precedence_of(e.node()) < parent_prec;
    if (need_parens) out.push_back('(');
    render_node(e, out, 0);
    if (need_parens) out.push_back(')');
}

void render_node(const Expr& e, std::string& out, int) {
    const ExprNode& n = e.node();
    switch (n.kind) {
        case ExprKind::Constant:
            out += render_constant(n.constant);
            return;
        case ExprKind::Variable:
            out += n.var_name;
            return;
        case ExprKind::Sum: {
            render_child(n.kids[0], out, 2);
            for (std::size_t i = 1; i < n.kids.size(); ++i) {
                const Expr& k = n.kids[i];
                if (k.kind() == ExprKind::Negate) {
                    out += " - ";
                    render_child(k.node().kids[0], out, 2);
                } else if (k.is_constant() && k.node().constant < 0.0) {
                    out += " - ";
                    out += render_constant(-k.node().constant);
                } else {
                    out += " + ";
                    render_child(k, out, 2);
                }
            }
            return;
        }
        case ExprKind::Product: {
            for (std::size_t i = 0; i < n.kids.size(); ++i) {
                if (i) out.push_back('*');
                // parenthesize quotients too, to preserve structure under
                // the left-associative reparse
                render_child(n.kids[i], out, 3);
            }
            return;
        }
        case ExprKind::Quotient: {
            render_child(n.kids[0], out, 2);
            out.push_back('/');
            render_child(n.kids[1], out, 3);
            return;
        }
        case ExprKind::Negate:
            out.push_back('-');
            render_child(n.kids[0], out, 4);
            return;
        case ExprKind::IntPower: {
            render_child(n.kids[0], out, 5);
            out.push_back('^');
            out += std::to_string(n.exponent);
            return;
        }
        case ExprKind::Function:
            out += unary_fn_name(n.fn);
            out.push_back('(');
            render_node(n.kids[0], out, 0);
            out.push_back(')');
            return;
    }
}

} // namespace

std::string Expr::render() const {
    std::string out;
    render_node(*this, out, 0);
    return out;
}

bool Expr::equals(const Expr& other) const {
    if (node_ == other.node_) return true;
    const ExprNode& a = *node_;
    const ExprNode& b = *other.node_;
    if (a.kind != b.kind || a.kids.size() != b.kids.size()) return false;
    switch (a.kind) {
        case ExprKind::Constant:
            if (a.constant != b.constant) return false;
            break;
        case ExprKind::Variable:
            if (a.var != b.var || a.var_name != b.var_name) return false;
            break;
        case ExprKind::IntPower:
            if (a.exponent != b.exponent) return false;
            break;
        case ExprKind::Function:
            if (a.fn != b.fn) return false;
            break;
        default:
            break;
    }
    for (std::size_t i = 0; i < a.kids.size(); ++i)
        if (!a.kids[i].equals(b.kids[i])) return false;
    return true;
}

Expr Expr::substituted(const std::vector<Expr>& replacements) const {
    const ExprNode& n = *node_;
    switch (n.kind) {
        case ExprKind::Constant:
            return *this;
        case ExprKind::Variable:
            return replacements.at(static_cast<std::size_t>(n.var));
        default:
            break;
    }
    std::vector<Expr> kids;
    kids.reserve(n.kids.size());
    for (const auto& k : n.kids) kids.push_back(k.substituted(replacements));
    switch (n.kind) {
        case ExprKind::Sum: return sum(std::move(kids));
        case ExprKind::Product: return product(std::move(kids));
        case ExprKind::Quotient: return quotient(kids[0], kids[1]);
        case ExprKind::Negate: return negate(kids[0]);
        case ExprKind::IntPower: return int_power(kids[0], n.exponent);
        case ExprKind::Function: return function(n.fn, kids[0]);
        default: return *this;
    }
}

// ---------------------------------------------------------------------------
// parser

namespace {

struct Token {
    enum Type { Number, Ident, Op, End } type = End;
    double number = 0.0;
    bool integral = false;  // number consists of digits only
    std::string text;
    std::size_t offset = 0;
};

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) { advance(); }

    const Token& peek() const { return tok_; }

    Token take() {
        Token t = tok_;
        advance();
        return t;
    }

private:
    void advance() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
        tok_ = Token{};
        tok_.offset = pos_;
        if (pos_ >= text_.size()) {
            tok_.type = Token::End;
            return;
        }
        char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = text_.data() + pos_;
            const char* end = text_.data() + text_.size();
            double value = 0.0;
            auto [ptr, ec] = std::from_chars(begin, end, value);
            if (ec != std::errc() || ptr == begin)
                throw ParseError("malformed number", pos_);
            tok_.type = Token::Number;
            tok_.number = value;
            tok_.text = std::string(begin, ptr);
            tok_.integral = tok_.text.find_first_not_of("0123456789") == std::string::npos;
            pos_ += static_cast<std::size_t>(ptr - begin);
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
                ++pos_;
            tok_.type = Token::Ident;
            tok_.text = std::string(text_.substr(start, pos_ - start));
            return;
        }
        if (std::string_view("+-*/^()").find(c) != std::string_view::npos) {
            tok_.type = Token::Op;
            tok_.text = std::string(1, c);
            ++pos_;
            return;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    Token tok_;
};

class Parser {
public:
    Parser(std::string_view text, const std::vector<std::string>& vars)
        : lex_(text), vars_(vars) {}

    Expr parse() {
        Expr e = parse_sum();
        const Token& t = lex_.peek();
        if (t.type != Token::End)
            throw ParseError("unexpected token '" + t.text + "', expected operator or end",
                             t.offset);
        return e;
    }

private:
    Expr parse_sum() {
        Expr e = parse_term();
        while (lex_.peek().type == Token::Op &&
               (lex_.peek().text == "+" || lex_.peek().text == "-")) {
            bool minus = lex_.take().text == "-";
            Expr rhs = parse_term();
            e = Expr::sum({std::move(e), minus ? Expr::negate(std::move(rhs)) : std::move(rhs)});
        }
        return e;
    }

    Expr parse_term() {
        Expr e = parse_unary();
        while (lex_.peek().type == Token::Op &&
               (lex_.peek().text == "*" || lex_.peek().text == "/")) {
            bool div = lex_.take().text == "/";
            Expr rhs = parse_unary();
            e = div ? Expr::quotient(std::move(e), std::move(rhs))
                    : Expr::product({std::move(e), std::move(rhs)});
        }
        return e;
    }

    Expr parse_unary() {
        if (lex_.peek().type == Token::Op && lex_.peek().text == "-") {
            lex_.take();
            return Expr::negate(parse_unary());
        }
        return parse_power();
    }

    Expr parse_power() {
        Expr base = parse_atom();
        if (lex_.peek().type == Token::Op && lex_.peek().text == "^") {
            lex_.take();
            bool neg = false;
            if (lex_.peek().type == Token::Op && lex_.peek().text == "-") {
                lex_.take();
                neg = true;
            }
            const Token& t = lex_.peek();
            if (t.type != Token::Number || !t.integral)
                throw ParseError("expected integer exponent after '^'", t.offset);
            Token n = lex_.take();
            int e = static_cast<int>(n.number);
            return Expr::int_power(std::move(base), neg ? -e : e);
        }
        return base;
    }

    Expr parse_atom() {
        const Token& t = lex_.peek();
        if (t.type == Token::Number)
            return Expr::constant(lex_.take().number);
        if (t.type == Token::Op && t.text == "(") {
            lex_.take();
            Expr e = parse_sum();
            expect_op(")");
            return e;
        }
        if (t.type == Token::Ident) {
            Token id = lex_.take();
            auto fn = lookup_function(id.text);
            if (fn) {
                expect_op("(");
                Expr arg = parse_sum();
                expect_op(")");
                return Expr::function(*fn, std::move(arg));
            }
            if (id.text == "pi")
                return Expr::constant(std::numbers::pi);
            for (std::size_t i = 0; i < vars_.size(); ++i)
                if (vars_[i] == id.text)
                    return Expr::variable(id.text, static_cast<int>(i));
            throw ParseError("unknown identifier '" + id.text + "'", id.offset);
        }
        throw ParseError("expected expression, got '" +
                             (t.type == Token::End ? std::string("end of input") : t.text) + "'",
                         t.offset);
    }

    static std::optional<UnaryFn> lookup_function(const std::string& name) {
        if (name == "sin") return UnaryFn::Sin;
        if (name == "cos") return UnaryFn::Cos;
        if (name == "exp") return UnaryFn::Exp;
        if (name == "log") return UnaryFn::Log;
        if (name == "sqrt") return UnaryFn::Sqrt;
        if (name == "atan") return UnaryFn::Atan;
        return std::nullopt;
    }

    void expect_op(const char* op) {
        const Token& t = lex_.peek();
        if (t.type != Token::Op || t.text != op)
            throw ParseError("expected '" + std::string(op) + "'", t.offset);
        lex_.take();
    }

    Lexer lex_;
    const std::vector<std::string>& vars_;
};

} // namespace

Expr parse_expression(std::string_view text, const std::vector<std::string>& vars) {
    if (vars.empty())
        throw ParseError("variable set must not be empty", 0);
    Parser p(text, vars);
    return p.parse();
}

} // namespace gbmap
