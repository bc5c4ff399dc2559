#include "hann/expr.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace hann;

namespace {

double eval1(const System& s, std::size_t eq, std::initializer_list<double> x, double t = 0.0) {
    std::vector<double> v(x);
    return s.equations.at(eq).eval(v, t);
}

// Central difference of equation `eq` in slot `k`.
double fd(const System& s, std::size_t eq, std::vector<double> x, std::size_t k, double t = 0.0) {
    const double h = 1e-6 * std::max(1.0, std::abs(x[k]));
    x[k] += h;
    const double fp = s.equations[eq].eval(x, t);
    x[k] -= 2 * h;
    const double fm = s.equations[eq].eval(x, t);
    return (fp - fm) / (2 * h);
}

}  // namespace

TEST(ExprParse, InfersVariablesInOrderOfAppearance) {
    const System s = parse_system("x^2 + y^2 = 1\nx = y\n");
    ASSERT_EQ(s.variables, (std::vector<std::string>{"x", "y"}));
    EXPECT_EQ(s.size(), 2u);
    EXPECT_DOUBLE_EQ(eval1(s, 0, {0.6, 0.8}), 0.0);
    EXPECT_DOUBLE_EQ(eval1(s, 1, {2.0, 0.5}), 1.5);
    // default box when no domain line is given
    EXPECT_EQ(s.domain[0], (Interval{-10.0, 10.0}));
}

TEST(ExprParse, DeclaredVariablesFixOrderAndDomains) {
    const System s = parse_system("vars: b, a\na - b = 0\ndomain: a in (-1, 2)\n");
    ASSERT_EQ(s.variables, (std::vector<std::string>{"b", "a"}));
    EXPECT_EQ(s.domain[1], (Interval{-1.0, 2.0}));
    EXPECT_DOUBLE_EQ(eval1(s, 0, {1.0, 3.0}), 2.0);
}

TEST(ExprParse, UndeclaredIdentifierIsAnError) {
    try {
        parse_system("vars: x\nx + y = 0\n");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2);
        EXPECT_EQ(e.column(), 5);
    }
}

TEST(ExprParse, ErrorsCarryPositions) {
    EXPECT_THROW(parse_system("x + = 1"), ParseError);
    EXPECT_THROW(parse_system("foo(x) = 1"), ParseError);
    EXPECT_THROW(parse_system("sin(x, x) = 1"), ParseError);
    EXPECT_THROW(parse_system("x + 1"), ParseError);
    EXPECT_THROW(parse_system("# only a comment\n"), ParseError);
    EXPECT_THROW(parse_system("vars: x, x\nx = 0"), ParseError);
    EXPECT_THROW(parse_system("x = 0\ndomain: y in [0, 1]"), ParseError);
    EXPECT_THROW(parse_system("x = 0\ndomain: x in [1, 0]"), ParseError);
    try {
        parse_system("x = 1\n\n  x * (2 = 0\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3);
    }
}

TEST(ExprParse, PrecedenceAndAssociativity) {
    const System s = parse_system("vars: x\n-x^2 + 2^3^2 - 8/4/2 + |x - 5| = 0\n");
    // -(x^2) + 2^(3^2) - ((8/4)/2) + |x-5| at x = 3
    EXPECT_DOUBLE_EQ(eval1(s, 0, {3.0}), -9.0 + 512.0 - 1.0 + 2.0);
}

TEST(ExprParse, FunctionsAndConstants) {
    const System s = parse_system("vars: x\nsin(x) + cos(x) + tan(x) + exp(x) + ln(x) + log(x) + sqrt(x) + abs(-x) + pow(x, 1.5) + pi = 0\n");
    const double x = 0.7;
    const double want = std::sin(x) + std::cos(x) + std::tan(x) + std::exp(x) + 2 * std::log(x) + std::sqrt(x) + x +
                        std::pow(x, 1.5) + M_PI;
    EXPECT_NEAR(eval1(s, 0, {x}), want, 1e-14);
}

TEST(ExprParse, TimeSymbol) {
    const System s = parse_system("vars: x\ntime: t in [0, 10]\nx - sin(t) = 0\n");
    ASSERT_TRUE(s.time.has_value());
    EXPECT_EQ(s.time->range, (Interval{0.0, 10.0}));
    EXPECT_DOUBLE_EQ(eval1(s, 0, {1.0}, 2.0), 1.0 - std::sin(2.0));
}

TEST(ExprParse, PrintRoundTrip) {
    const char* src = R"(vars: x1, x2
time: s in [0, 2]
2*(x2 - x1) + sin(2*x2) - sin(2*x1) - 1.2*s = 0
x1^-2 + |x2| - pow(x2^2 + 1, 0.5) = 0.25
domain: x1 in [-5, 5]
domain: x2 in [-3, 4]
)";
    const System a = parse_system(src);
    const System b = parse_system(print_system(a));
    EXPECT_EQ(a, b);
}

TEST(ExprEval, DomainErrors) {
    const System s = parse_system("vars: x\n1/x + ln(x) = 0\n");
    EXPECT_THROW(eval1(s, 0, {0.0}), DomainError);
    EXPECT_THROW(eval1(s, 0, {-1.0}), DomainError);
    const System o = parse_system("vars: x\nexp(x) = 0\n");
    EXPECT_THROW(eval1(o, 0, {1000.0}), DomainError);
    try {
        eval_system(parse_system("vars: x\nx = 0\nsqrt(x) = 0\n"), Vector::Constant(1, -1.0));
        FAIL();
    } catch (const DomainError& e) {
        EXPECT_EQ(e.equation(), 1);
    }
}

TEST(ExprEval, IntegerPowersOfNegativeBases) {
    const System s = parse_system("vars: x\nx^3 + x^-1 = 0\n");
    EXPECT_DOUBLE_EQ(eval1(s, 0, {-2.0}), -8.0 - 0.5);
    const System p = parse_system("vars: x\nx^0.5 = 0\n");
    EXPECT_THROW(eval1(p, 0, {-2.0}), DomainError);
}

TEST(ExprEval, ResidualL1) {
    const System s = parse_system("vars: x, y\nx - 1 = 0\ny + 2 = 0\n");
    EXPECT_DOUBLE_EQ(residual_l1(s, (Vector(2) << 0.0, 0.0).finished()), 3.0);
    EXPECT_THROW(residual_l1(s, Vector::Zero(3)), std::invalid_argument);
}

TEST(ExprDerivative, ForwardModeMatchesCentralDifferences) {
    const System s = parse_system(R"(vars: x, y, z
x*y*z + sin(x*y) - exp(z/3) = 0
1/x - sin(x) + 1 = 0
x^2 - y^3 + z^-2 + sqrt(x*x + 1) = 0
ln(x^2 + y^2) * cos(z) + pow(x*x + 2, z) = 0
tan(x/4) * |y - 2| - x/(y*y + 1) = 0
)");
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(0.3, 1.7);
    for (int trial = 0; trial < 50; ++trial) {
        const std::vector<double> x{u(gen), u(gen), u(gen)};
        std::vector<double> g(3);
        for (std::size_t eq = 0; eq < s.size(); ++eq) {
            const double v = s.equations[eq].eval_gradient(x, 0.0, g);
            EXPECT_DOUBLE_EQ(v, s.equations[eq].eval(x));
            for (std::size_t k = 0; k < 3; ++k) {
                const double want = fd(s, eq, x, k);
                EXPECT_NEAR(g[k], want, 1e-6 * std::max(1.0, std::abs(want))) << "eq " << eq << " slot " << k;
            }
        }
    }
}

TEST(ExprDerivative, AbsUsesSignSubgradient) {
    const System s = parse_system("vars: x\n|x| = 0\n");
    std::vector<double> g(1);
    s.equations[0].eval_gradient(std::vector<double>{0.0}, 0.0, g);
    EXPECT_EQ(g[0], 0.0);
    s.equations[0].eval_gradient(std::vector<double>{-3.0}, 0.0, g);
    EXPECT_EQ(g[0], -1.0);
}

TEST(ExprDerivative, JacobianOfSystem) {
    const System s = parse_system("vars: x, y\nx^2 - y^2 = 0\n1 - |x - y| = 0\n");
    const Matrix j = jacobian(s, (Vector(2) << 0.5, -0.25).finished());
    EXPECT_DOUBLE_EQ(j(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(j(0, 1), 0.5);
    EXPECT_DOUBLE_EQ(j(1, 0), -1.0);
    EXPECT_DOUBLE_EQ(j(1, 1), 1.0);
}

TEST(ExprAst, RejectsForwardOperands) {
    EXPECT_THROW(Expr({Node{Op::neg, 0, -1, 0, 0.0}}), std::invalid_argument);
    const Expr c = Expr::constant(2.5);
    EXPECT_DOUBLE_EQ(c.eval(std::vector<double>{}), 2.5);
}

TEST(ExprAst, ToStringReparses) {
    const std::vector<std::string> names{"a", "b"};
    const Expr e = parse_expression("a^-3 * sin(b) - (a - b)/2 + |a|^1.5", names);
    const Expr f = parse_expression(to_string(e, names), names);
    const std::vector<double> x{0.8, -1.3};
    EXPECT_DOUBLE_EQ(e.eval(x), f.eval(x));
}
