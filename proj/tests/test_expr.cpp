#include <doctest.h>

#include <cmath>

#include <hypiss/expr.hpp>

using hypiss::Coefficient;
using hypiss::Expr;
using hypiss::SampleTable;

TEST_CASE("expression parsing and evaluation") {
    Expr e = Expr::parse("2*x^2 + sin(x) - 3/x");
    for (double x : {0.3, 1.0, 2.5, 7.0})
        CHECK(e(x) == doctest::Approx(2 * x * x + std::sin(x) - 3 / x).epsilon(1e-14));

    CHECK(Expr::parse("pi")(0.0) == doctest::Approx(M_PI));
    CHECK(Expr::parse("e")(0.0) == doctest::Approx(std::exp(1.0)));
    CHECK(Expr::parse("exp(-x)*cos(2*x)")(0.5) ==
          doctest::Approx(std::exp(-0.5) * std::cos(1.0)));
    CHECK(Expr::parse("-x^2")(2.0) == doctest::Approx(-4.0)); // unary minus binds last
    CHECK(Expr::parse("2^3^x", "x")(1.0) == doctest::Approx(std::pow(2.0, 3.0)));
}

TEST_CASE("parse errors are reported") {
    CHECK_THROWS_AS(Expr::parse("2*+"), hypiss::ParseError);
    CHECK_THROWS_AS(Expr::parse("sin(x"), hypiss::ParseError);
    CHECK_THROWS_AS(Expr::parse("x y"), hypiss::ParseError);
    CHECK_THROWS_AS(Expr::parse("unknownfn(x)"), hypiss::ParseError);
    CHECK_THROWS_AS(Expr::parse(""), hypiss::ParseError);
}

TEST_CASE("symbolic derivative matches finite differences") {
    for (const char* text : {"x^3 - 2*x", "sin(3*x)*exp(x)", "1/(1+x^2)", "sqrt(x+2)",
                             "tanh(x)*cos(x)", "log(x+3)"}) {
        Expr e = Expr::parse(text);
        Expr d = e.derivative();
        for (double x : {0.1, 0.7, 1.9}) {
            double h = 1e-6;
            double fd = (e(x + h) - e(x - h)) / (2 * h);
            CHECK(d(x) == doctest::Approx(fd).epsilon(1e-6));
        }
    }
}

TEST_CASE("sample tables interpolate linearly and clamp at the ends") {
    SampleTable t;
    t.x = {0.0, 1.0, 2.0};
    t.v = {1.0, 3.0, 2.0};
    CHECK(t(0.5) == doctest::Approx(2.0));
    CHECK(t(1.5) == doctest::Approx(2.5));
    CHECK(t(-1.0) == doctest::Approx(1.0)); // clamped
    CHECK(t(5.0) == doctest::Approx(2.0));  // clamped
}

TEST_CASE("coefficient variants evaluate and differentiate") {
    Coefficient c(2.5);
    CHECK(c(10.0) == 2.5);
    CHECK(c.derivative_at(10.0) == 0.0);

    Coefficient e = Coefficient::expression("x^2");
    CHECK(e(3.0) == doctest::Approx(9.0));
    CHECK(e.derivative_at(3.0) == doctest::Approx(6.0));

    SampleTable t;
    t.x = {0.0, 1.0};
    t.v = {0.0, 2.0};
    Coefficient s(t);
    CHECK(s(0.25) == doctest::Approx(0.5));
    CHECK(s.derivative_at(0.5) == doctest::Approx(2.0).epsilon(1e-6));
}
