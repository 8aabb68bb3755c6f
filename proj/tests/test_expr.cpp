#include "doctest.h"

#include <cmath>
#include <string>
#include <vector>

#include "hyperode/expr.hpp"
#include "support.hpp"

using namespace hyperode;
using Kind = Expression::Node::Kind;

TEST_CASE("constant zero parses to a single number node") {
    const Expression e = parse("0");
    REQUIRE(e.root()->kind == Kind::Number);
    CHECK(e.root()->number == 0.0);
    CHECK(e.to_string() == "0");
}

TEST_CASE("-omega^2 is the negation of the squared parameter") {
    const Expression e = parse("-omega^2");
    REQUIRE(e.root()->kind == Kind::Neg);
    REQUIRE(e.root()->lhs->kind == Kind::Pow);
    CHECK(e.root()->lhs->lhs->name == "omega");

    const HFunction h(e, {{"omega", 2.0}});
    const Jet2 j = h.eval_jet(5.0);
    CHECK(j.v == doctest::Approx(-4.0).epsilon(1e-15));
    CHECK(j.d1 == 0.0);
    CHECK(j.d2 == 0.0);
}

TEST_CASE("sin(x) is a function node with exact jet at 0") {
    const Expression e = parse("sin(x)");
    REQUIRE(e.root()->kind == Kind::Call);
    const HFunction h(e);
    const Jet2 j = h.eval_jet(0.0);
    CHECK(j.v == 0.0);
    CHECK(j.d1 == 1.0);
    CHECK(j.d2 == 0.0);
}

TEST_CASE("whitespace is insignificant") {
    CHECK(parse(" 1 +\t2 * x ").structurally_equal(parse("1+2*x")));
}

TEST_CASE("power is right-associative and binds tighter than unary minus") {
    const HFunction h(parse("2^3^2"));
    CHECK(h(0.0) == doctest::Approx(512.0));  // 2^(3^2)
    const HFunction g(parse("-x^2"));
    CHECK(g(3.0) == doctest::Approx(-9.0));
    const HFunction p(parse("2^-3"));
    CHECK(p(0.0) == doctest::Approx(0.125));
}

TEST_CASE("integer exponents keep the sign of negative bases") {
    const HFunction h(parse("x^3"));
    const Jet2 j = h.eval_jet(-2.0);
    CHECK(j.v == doctest::Approx(-8.0));
    CHECK(j.d1 == doctest::Approx(12.0));
    CHECK(j.d2 == doctest::Approx(-12.0));
}

TEST_CASE("non-integer exponent needs a positive base") {
    const HFunction h(parse("x^0.5"));
    CHECK(h(4.0) == doctest::Approx(2.0));
    CHECK_THROWS_AS(h(-4.0), EvalError);
}

TEST_CASE("syntax errors carry offsets and expectations") {
    try {
        parse("1+");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 2);
        CHECK(!e.expected().empty());
    }
    try {
        parse("(x");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.expected() == std::vector<std::string>{")"});
    }
    try {
        parse("foo(x)");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 0);
        CHECK(std::string(e.what()).find("unknown function") != std::string::npos);
    }
    CHECK_THROWS_AS(parse("sin"), ParseError);   // bare function name
    CHECK_THROWS_AS(parse("1 2"), ParseError);   // trailing input
    CHECK_THROWS_AS(parse(""), ParseError);
    CHECK_THROWS_AS(parse("1 + * 2"), ParseError);
}

TEST_CASE("unbound parameters are rejected at construction") {
    CHECK_THROWS_AS(HFunction(parse("omega*x")), EvalError);
    CHECK_NOTHROW(HFunction(parse("omega*x"), {{"omega", 1.0}}));
}

TEST_CASE("domain violations raise instead of propagating non-finite values") {
    CHECK_THROWS_AS(HFunction(parse("ln(x)"))(-1.0), EvalError);
    CHECK_THROWS_AS(HFunction(parse("ln(x)"))(0.0), EvalError);
    CHECK_THROWS_AS(HFunction(parse("sqrt(x)"))(-2.0), EvalError);
    CHECK_THROWS_AS(HFunction(parse("1/(x-1)"))(1.0), EvalError);
    CHECK_THROWS_AS(HFunction(parse("exp(x)"))(1000.0), EvalError);  // overflow -> inf
    CHECK_THROWS_AS(HFunction(parse("abs(x)")).eval_jet(0.0), EvalError);
    const Jet2 j = HFunction(parse("abs(x)")).eval_jet(-3.0);
    CHECK(j.v == 3.0);
    CHECK(j.d1 == -1.0);
}

TEST_CASE("rational example jet matches the hand value and finite differences") {
    const HFunction h(parse("x^2 - 1/(1+x^2)"));
    const Jet2 j = h.eval_jet(1.0);
    CHECK(j.v == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(j.d1 == doctest::Approx(2.5).epsilon(1e-14));
    CHECK(j.d2 == doctest::Approx(1.5).epsilon(1e-14));

    auto f = [&](double x) { return h(x); };
    CHECK(j.d1 == doctest::Approx(testing::fd1(f, 1.0, 1e-3)).epsilon(1e-7));
    CHECK(j.d2 == doctest::Approx(testing::fd2(f, 1.0, 1e-3)).epsilon(1e-5));
}

namespace {

// Random domain-safe expression texts: every sqrt/ln/division goes through
// a strictly positive combination.
std::string random_expr(Rng& rng, int depth) {
    auto num = [&]() {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.3f", rng.uniform(-2.0, 2.0));
        return std::string(buf);
    };
    if (depth == 0) {
        switch (rng.below(3)) {
            case 0: return std::string("x");
            case 1: return num();
            default: return "(" + num() + "*x)";
        }
    }
    const std::string a = random_expr(rng, depth - 1);
    const std::string b = random_expr(rng, depth - 1);
    switch (rng.below(10)) {
        case 0: return "(" + a + "+" + b + ")";
        case 1: return "(" + a + "-" + b + ")";
        case 2: return "(" + a + "*" + b + ")";
        case 3: return "(" + a + "/((" + b + ")^2+1.5))";
        case 4: return "sin(" + a + ")";
        case 5: return "cos(" + a + ")";
        case 6: return "tanh(" + a + ")";
        case 7: return "sqrt((" + a + ")^2+0.75)";
        case 8: return "ln((" + a + ")^2+1.25)";
        default: return "(" + a + ")^2";
    }
}

} // namespace

TEST_CASE("jets of 200 random expressions agree with five-point differences") {
    Rng rng(20260810);
    int tested = 0;
    while (tested < 200) {
        const std::string text = random_expr(rng, 1 + static_cast<int>(rng.below(2)));
        const HFunction h = HFunction::from_text(text);
        const double x = rng.uniform(-2.0, 2.0);
        Jet2 j{};
        try {
            j = h.eval_jet(x);
        } catch (const EvalError&) {
            continue;  // stencil-safe forms may still overflow in corners
        }
        auto f = [&](double xx) { return h(xx); };
        const double step = 1e-3 * (1.0 + std::fabs(x));
        const double d1 = testing::fd1(f, x, step);
        const double d2 = testing::fd2(f, x, step);
        INFO("expr = " << text << " at x = " << x);
        CHECK(std::fabs(j.d1 - d1) <= 1e-6 * (1.0 + std::fabs(j.d1)));
        CHECK(std::fabs(j.d2 - d2) <= 1e-4 * (1.0 + std::fabs(j.d2)));
        ++tested;
    }
}

TEST_CASE("serialize then reparse reproduces the tree") {
    Rng rng(7);
    for (int i = 0; i < 200; ++i) {
        const std::string text = random_expr(rng, 1 + static_cast<int>(rng.below(2)));
        const Expression e = parse(text);
        const Expression round = parse(e.to_string());
        INFO("expr = " << text << " serialized = " << e.to_string());
        CHECK(e.structurally_equal(round));
    }
    // operator fixtures where parenthesization matters
    for (const char* s : {"1-(2-3)", "1-2-3", "2/(3/4)", "2/3/4", "2^(3^2)", "(2^3)^2",
                          "-(x+1)", "-x^2", "x^-2", "(1+x)*(1-x)"}) {
        const Expression e = parse(s);
        CHECK(e.structurally_equal(parse(e.to_string())));
    }
}

TEST_CASE("jet arithmetic is compositional for sums and products") {
    Rng rng(99);
    for (int i = 0; i < 50; ++i) {
        const std::string a = random_expr(rng, 1);
        const std::string b = random_expr(rng, 1);
        const double x = rng.uniform(-1.5, 1.5);
        Jet2 ja{}, jb{}, jsum{}, jprod{};
        try {
            ja = HFunction::from_text(a).eval_jet(x);
            jb = HFunction::from_text(b).eval_jet(x);
            jsum = HFunction::from_text("(" + a + ")+(" + b + ")").eval_jet(x);
            jprod = HFunction::from_text("(" + a + ")*(" + b + ")").eval_jet(x);
        } catch (const EvalError&) {
            continue;
        }
        // sums bitwise; products to ulp scale
        CHECK(jsum.v == ja.v + jb.v);
        CHECK(jsum.d1 == ja.d1 + jb.d1);
        CHECK(jsum.d2 == ja.d2 + jb.d2);
        const Jet2 leibniz = ja * jb;
        CHECK(jprod.v == doctest::Approx(leibniz.v).epsilon(4e-16));
        CHECK(jprod.d1 == doctest::Approx(leibniz.d1).epsilon(4e-16));
        CHECK(jprod.d2 == doctest::Approx(leibniz.d2).epsilon(4e-16));
    }
}
