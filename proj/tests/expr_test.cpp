#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "gbmap/expr.hpp"

using namespace gbmap;

namespace {

const std::vector<std::string> kUV = {"u", "v"};

Expr parse_uv(const std::string& s) { return parse_expression(s, kUV); }

double eval_at(const Expr& e, double u, double v) {
    double vals[2] = {u, v};
    return e.eval(vals);
}

// Bounded random expression generator. log/sqrt arguments and quotient
// denominators are kept strictly positive so random evaluation points in
// [-1.5, 1.5]^2 stay inside the domain.
struct ExprGen {
    std::mt19937_64 rng;

    explicit ExprGen(std::uint64_t seed) : rng(seed) {}

    double uniform(double a, double b) {
        return std::uniform_real_distribution<double>(a, b)(rng);
    }
    int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }

    Expr leaf() {
        switch (pick(3)) {
            case 0: return Expr::constant(uniform(-3.0, 3.0));
            case 1: return Expr::variable("u", 0);
            default: return Expr::variable("v", 1);
        }
    }

    Expr positive(int depth) {
        return Expr::sum({Expr::constant(uniform(1.5, 3.0)),
                          Expr::int_power(gen(depth), 2)});
    }

    Expr gen(int depth) {
        if (depth <= 0) return leaf();
        switch (pick(8)) {
            case 0: return Expr::sum({gen(depth - 1), gen(depth - 1)});
            case 1: return Expr::product({gen(depth - 1), gen(depth - 1)});
            case 2: return Expr::quotient(gen(depth - 1), positive(depth - 1));
            case 3: return Expr::negate(gen(depth - 1));
            case 4: return Expr::int_power(gen(depth - 1), 2 + pick(3));
            case 5: {
                UnaryFn fn = pick(2) ? UnaryFn::Sin : UnaryFn::Cos;
                return Expr::function(fn, gen(depth - 1));
            }
            case 6: {
                UnaryFn fn = pick(2) ? UnaryFn::Log : UnaryFn::Sqrt;
                return Expr::function(fn, positive(depth - 1));
            }
            default:
                return pick(2)
                           ? Expr::function(UnaryFn::Atan, gen(depth - 1))
                           : Expr::function(UnaryFn::Exp,
                                            Expr::product({Expr::constant(0.25),
                                                           gen(depth - 1)}));
        }
    }
};

} // namespace

TEST_CASE("parse produces the expected tree shapes") {
    Expr e = parse_uv("u^3 - 3*u*v");
    Expr expected = Expr::sum(
        {Expr::int_power(Expr::variable("u", 0), 3),
         Expr::negate(Expr::product({Expr::constant(3.0), Expr::variable("u", 0),
                                     Expr::variable("v", 1)}))});
    CHECK(e.equals(expected));

    CHECK(eval_at(parse_uv("2*v"), 1.0, 3.0) == doctest::Approx(6.0));
    CHECK(eval_at(parse_uv("2+3"), -7.0, 4.0) == doctest::Approx(5.0));
    CHECK(eval_at(parse_uv("3*(u^2 - v)"), 1.0, 1.0) == doctest::Approx(0.0));
}

TEST_CASE("syntax errors carry byte offsets") {
    try {
        parse_uv("u + * v");
        FAIL("expected ParseError");
    } catch (const ParseError& err) {
        CHECK(err.offset == 4);
    }
    CHECK_THROWS_AS(parse_uv("u + w"), ParseError);
    CHECK_THROWS_AS(parse_uv("sin(u"), ParseError);
    CHECK_THROWS_AS(parse_uv("u^1.5"), ParseError);
    CHECK_THROWS_AS(parse_uv("u^v"), ParseError);
    CHECK_THROWS_AS(parse_expression("u", {}), ParseError);
}

TEST_CASE("evaluation domain violations name the sub-expression") {
    Expr e = parse_uv("sqrt(u)");
    try {
        eval_at(e, -1.0, 0.0);
        FAIL("expected EvalDomainError");
    } catch (const EvalDomainError& err) {
        CHECK(err.subexpression == "u");
    }
    CHECK_THROWS_AS(eval_at(parse_uv("log(u - 2)"), 1.0, 0.0), EvalDomainError);
    CHECK_THROWS_AS(eval_at(parse_uv("1/(u - 1)"), 1.0, 0.0), EvalDomainError);
    CHECK_THROWS_AS(eval_at(parse_uv("u^-2"), 0.0, 0.0), EvalDomainError);
}

TEST_CASE("derivatives of the named examples") {
    CHECK(parse_uv("v^2").derivative(1).equals(parse_uv("2*v")));
    CHECK(parse_uv("u^3 - 3*u*v").derivative(0).equals(parse_uv("3*u^2 - 3*v")));
    CHECK(parse_uv("sin(u*v)").derivative(0).equals(parse_uv("v*cos(u*v)")));

    // pi folds to a literal
    CHECK(parse_uv("2*pi").is_constant(2.0 * std::acos(-1.0)));
}

TEST_CASE("derivative of a constant is the zero constant; linear over sums") {
    CHECK(parse_uv("4.25").derivative(0).is_zero());

    ExprGen gen(20240611u);
    for (int i = 0; i < 50; ++i) {
        Expr a = gen.gen(3), b = gen.gen(3);
        Expr ds = Expr::sum({a, b}).derivative(0);
        Expr sd = Expr::sum({a.derivative(0), b.derivative(0)});
        CHECK(ds.equals(sd));
    }
}

TEST_CASE("round trip: parse(render(e)) is structurally equal to e") {
    ExprGen gen(987654321u);
    for (int i = 0; i < 300; ++i) {
        Expr e = gen.gen(4);
        Expr back = parse_uv(e.render());
        if (!back.equals(e)) {
            CAPTURE(e.render());
            CAPTURE(back.render());
            CHECK(back.equals(e));
        }
    }
}

TEST_CASE("symbolic derivative matches central differences at order >= 1.9") {
    ExprGen gen(555u);
    int measured = 0;
    std::vector<double> orders;
    for (int i = 0; i < 200; ++i) {
        Expr e = gen.gen(4);
        Expr de = e.derivative(0);
        double u = gen.uniform(-1.5, 1.5), v = gen.uniform(-1.5, 1.5);
        double exact, scale;
        std::array<double, 2> hs = {1e-3, 1e-4};
        std::array<double, 2> errs{};
        try {
            exact = eval_at(de, u, v);
            scale = std::max({1.0, std::abs(exact), std::abs(eval_at(e, u, v))});
            for (int k = 0; k < 2; ++k) {
                double h = hs[k];
                double fd = (eval_at(e, u + h, v) - eval_at(e, u - h, v)) / (2.0 * h);
                errs[k] = std::abs(fd - exact);
            }
        } catch (const EvalDomainError&) {
            continue;  // stepped over a domain edge; skip the sample
        }
        // C h^2 bound with a generous constant relative to the local scale
        CHECK(errs[0] <= 1e4 * scale * 1e-6);
        CHECK(errs[1] <= 1e4 * scale * 1e-8);
        if (errs[0] > 1e-9 * scale && errs[1] > 0.0) {
            orders.push_back(std::log10(errs[0] / errs[1]));
            ++measured;
        }
    }
    REQUIRE(measured > 40);
    std::sort(orders.begin(), orders.end());
    double median = orders[orders.size() / 2];
    CHECK(median >= 1.9);
}

TEST_CASE("substitution composes expression trees") {
    // E(x, y) = x^2 + y with x = u*v, y = sin(u)
    Expr E = parse_expression("x^2 + y", {"x", "y"});
    Expr x = parse_uv("u*v"), y = parse_uv("sin(u)");
    Expr composed = E.substituted({x, y});
    double u = 0.7, v = -1.3;
    CHECK(eval_at(composed, u, v) ==
          doctest::Approx(std::pow(u * v, 2) + std::sin(u)).epsilon(1e-12));
}
