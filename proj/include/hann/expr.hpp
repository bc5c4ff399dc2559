/**
 * @file expr.hpp
 * @brief Scalar expressions and square systems of equations over named reals.
 *
 * An Expr is stored as a flat postfix node array: every node's operands
 * precede it and the root is the last node. Evaluation is one linear sweep,
 * and forward-mode differentiation carries a dense tangent per node.
 *
 * The text front-end (parse_system / print_system) implements the equation
 * DSL documented in docs/dsl.md.
 */
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace hann {

/// Closed interval [lo, hi].
struct Interval {
    double lo = -10.0;
    double hi = 10.0;

    double width() const noexcept { return hi - lo; }
    bool valid() const noexcept { return std::isfinite(lo) && std::isfinite(hi) && lo < hi; }
    bool contains(double v) const noexcept { return lo <= v && v <= hi; }
    friend bool operator==(const Interval&, const Interval&) = default;
};

/// Syntax or semantic error in DSL text, with 1-based position.
class ParseError : public std::runtime_error {
  public:
    ParseError(const std::string& message, int line, int column)
        : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) +
                             ": " + message),
          line_(line), column_(column) {}

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

  private:
    int line_;
    int column_;
};

/// Evaluation outside an expression's domain of definition (x/0, ln of a
/// non-positive number, 0^negative, overflow to a non-finite value).
class DomainError : public std::runtime_error {
  public:
    explicit DomainError(const std::string& message, int equation = -1)
        : std::runtime_error(equation >= 0 ? "equation " + std::to_string(equation) + ": " + message
                                           : message),
          equation_(equation), reason_(message) {}

    /// Index of the offending equation, or -1 when raised by a bare Expr.
    int equation() const noexcept { return equation_; }
    const std::string& reason() const noexcept { return reason_; }

  private:
    int equation_;
    std::string reason_;
};

enum class Op : std::uint8_t {
    constant,
    variable,
    time,
    neg,
    add,
    sub,
    mul,
    div,
    pow,   // real exponent, base must be positive
    powi,  // integer exponent stored in Node::index
    sin,
    cos,
    tan,
    exp,
    ln,
    sqrt,
    abs,
};

struct Node {
    Op op = Op::constant;
    std::int32_t lhs = -1;
    std::int32_t rhs = -1;
    std::int32_t index = 0;  // variable slot, or exponent for powi
    double value = 0.0;      // constant value

    friend bool operator==(const Node&, const Node&) = default;
};

namespace detail {

inline bool is_binary(Op op) noexcept {
    return op == Op::add || op == Op::sub || op == Op::mul || op == Op::div || op == Op::pow;
}
inline bool is_leaf(Op op) noexcept {
    return op == Op::constant || op == Op::variable || op == Op::time;
}

inline double integer_power(double base, int k) noexcept {
    unsigned n = static_cast<unsigned>(k < 0 ? -k : k);
    double result = 1.0;
    double b = base;
    while (n != 0) {
        if (n & 1U) result *= b;
        n >>= 1U;
        if (n != 0) b *= b;
    }
    return result;
}

inline std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

}  // namespace detail

/// Immutable expression tree in postfix layout.
class Expr {
  public:
    Expr() = default;

    /// Takes ownership of a postfix node array. Throws std::invalid_argument
    /// when an operand index does not precede its user.
    explicit Expr(std::vector<Node> nodes) : nodes_(std::move(nodes)) {
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            const Node& n = nodes_[i];
            const auto here = static_cast<std::int32_t>(i);
            if (!detail::is_leaf(n.op) && (n.lhs < 0 || n.lhs >= here))
                throw std::invalid_argument("Expr: operand must precede its node");
            if (detail::is_binary(n.op) && (n.rhs < 0 || n.rhs >= here))
                throw std::invalid_argument("Expr: operand must precede its node");
            if (n.op == Op::variable && n.index < 0)
                throw std::invalid_argument("Expr: negative variable slot");
        }
    }

    static Expr constant(double v) { return Expr({Node{Op::constant, -1, -1, 0, v}}); }
    static Expr variable(int slot) { return Expr({Node{Op::variable, -1, -1, slot, 0.0}}); }

    std::span<const Node> nodes() const noexcept { return nodes_; }
    bool empty() const noexcept { return nodes_.empty(); }

    /// Largest variable slot referenced, or -1.
    int max_variable() const noexcept {
        int m = -1;
        for (const Node& n : nodes_)
            if (n.op == Op::variable) m = std::max(m, static_cast<int>(n.index));
        return m;
    }

    bool uses_time() const noexcept {
        return std::any_of(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.op == Op::time; });
    }

    double eval(std::span<const double> x, double t = 0.0) const { return sweep<false>(x, t, {}); }

    /// Value plus the gradient with respect to every variable slot; `grad`
    /// must have one entry per slot of the owning system.
    double eval_gradient(std::span<const double> x, double t, std::span<double> grad) const {
        return sweep<true>(x, t, grad);
    }

    friend bool operator==(const Expr&, const Expr&) = default;

  private:
    template <bool WithGradient>
    double sweep(std::span<const double> x, double t, std::span<double> grad) const {
        if (nodes_.empty()) throw std::logic_error("Expr: empty expression");
        thread_local std::vector<double> val;
        thread_local std::vector<double> tangent;
        const std::size_t nv = grad.size();
        val.resize(nodes_.size());
        if constexpr (WithGradient) tangent.assign(nodes_.size() * nv, 0.0);

        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            const Node& n = nodes_[i];
            double* dt = WithGradient ? tangent.data() + i * nv : nullptr;
            const double a = n.lhs >= 0 ? val[static_cast<std::size_t>(n.lhs)] : 0.0;
            const double b = n.rhs >= 0 ? val[static_cast<std::size_t>(n.rhs)] : 0.0;
            const double* da = (WithGradient && n.lhs >= 0) ? tangent.data() + static_cast<std::size_t>(n.lhs) * nv : nullptr;
            const double* db = (WithGradient && n.rhs >= 0) ? tangent.data() + static_cast<std::size_t>(n.rhs) * nv : nullptr;
            double v = 0.0;
            // chain rule helper: dt = ca * da (+ cb * db)
            auto chain1 = [&](double ca) {
                if constexpr (WithGradient)
                    for (std::size_t k = 0; k < nv; ++k) dt[k] = ca * da[k];
            };
            auto chain2 = [&](double ca, double cb) {
                if constexpr (WithGradient)
                    for (std::size_t k = 0; k < nv; ++k) dt[k] = ca * da[k] + cb * db[k];
            };
            switch (n.op) {
                case Op::constant: v = n.value; break;
                case Op::variable: {
                    const auto slot = static_cast<std::size_t>(n.index);
                    if (slot >= x.size()) throw std::out_of_range("Expr: variable slot outside point");
                    v = x[slot];
                    if constexpr (WithGradient)
                        if (slot < nv) dt[slot] = 1.0;
                    break;
                }
                case Op::time: v = t; break;
                case Op::neg: v = -a; chain1(-1.0); break;
                case Op::add: v = a + b; chain2(1.0, 1.0); break;
                case Op::sub: v = a - b; chain2(1.0, -1.0); break;
                case Op::mul: v = a * b; chain2(b, a); break;
                case Op::div:
                    if (b == 0.0) throw DomainError("division by zero");
                    v = a / b;
                    chain2(1.0 / b, -a / (b * b));
                    break;
                case Op::powi: {
                    const int k = n.index;
                    if (a == 0.0 && k < 0) throw DomainError("zero raised to a negative power");
                    const double pk = detail::integer_power(a, k);
                    v = k < 0 ? 1.0 / pk : pk;
                    if constexpr (WithGradient) {
                        double c = 0.0;
                        if (k != 0) {
                            const double pkm1 = detail::integer_power(a, k - 1);
                            c = k - 1 < 0 ? k / pkm1 : k * pkm1;
                        }
                        chain1(c);
                    }
                    break;
                }
                case Op::pow:
                    if (!(a > 0.0)) throw DomainError("non-integer power of a non-positive base");
                    v = std::pow(a, b);
                    chain2(b * v / a, v * std::log(a));
                    break;
                case Op::sin: v = std::sin(a); chain1(std::cos(a)); break;
                case Op::cos: v = std::cos(a); chain1(-std::sin(a)); break;
                case Op::tan: {
                    const double c = std::cos(a);
                    if (c == 0.0) throw DomainError("tan at a pole");
                    v = std::tan(a);
                    chain1(1.0 / (c * c));
                    break;
                }
                case Op::exp: v = std::exp(a); chain1(v); break;
                case Op::ln:
                    if (!(a > 0.0)) throw DomainError("logarithm of a non-positive number");
                    v = std::log(a);
                    chain1(1.0 / a);
                    break;
                case Op::sqrt:
                    if (a < 0.0) throw DomainError("square root of a negative number");
                    if (WithGradient && a == 0.0) throw DomainError("square root is not differentiable at 0");
                    v = std::sqrt(a);
                    chain1(a > 0.0 ? 0.5 / v : 0.0);
                    break;
                case Op::abs:
                    v = std::abs(a);
                    // subgradient convention: d|u| = sign(u) du with sign(0) = 0
                    chain1(a > 0.0 ? 1.0 : (a < 0.0 ? -1.0 : 0.0));
                    break;
            }
            if (!std::isfinite(v)) throw DomainError("non-finite intermediate value");
            val[i] = v;
        }
        if constexpr (WithGradient) {
            const double* root = tangent.data() + (nodes_.size() - 1) * nv;
            for (std::size_t k = 0; k < nv; ++k) {
                if (!std::isfinite(root[k])) throw DomainError("non-finite derivative");
                grad[k] = root[k];
            }
        }
        return val.back();
    }

    std::vector<Node> nodes_;
};

/// Appends nodes in postfix order; used by the parser and by code that
/// assembles expressions programmatically.
class ExprBuilder {
  public:
    int constant(double v) { return push({Op::constant, -1, -1, 0, v}); }
    int variable(int slot) { return push({Op::variable, -1, -1, slot, 0.0}); }
    int time() { return push({Op::time, -1, -1, 0, 0.0}); }
    int unary(Op op, int a) { return push({op, a, -1, 0, 0.0}); }
    int binary(Op op, int a, int b) { return push({op, a, b, 0, 0.0}); }
    int powi(int base, int k) { return push({Op::powi, base, -1, k, 0.0}); }

    std::size_t size() const noexcept { return nodes_.size(); }
    const Node& at(int i) const { return nodes_.at(static_cast<std::size_t>(i)); }
    void truncate(std::size_t n) { nodes_.resize(n); }

    /// Copies the subtree rooted at `root` out of a finished expression.
    int append(const Expr& e) {
        const auto offset = static_cast<std::int32_t>(nodes_.size());
        for (Node n : e.nodes()) {
            if (n.lhs >= 0) n.lhs += offset;
            if (n.rhs >= 0) n.rhs += offset;
            nodes_.push_back(n);
        }
        return static_cast<int>(nodes_.size()) - 1;
    }

    Expr finish() && { return Expr(std::move(nodes_)); }

  private:
    int push(Node n) {
        nodes_.push_back(n);
        return static_cast<int>(nodes_.size()) - 1;
    }
    std::vector<Node> nodes_;
};

/// Reserved time symbol of a time-varying system.
struct TimeAxis {
    std::string name = "t";
    Interval range{0.0, 1.0};
    friend bool operator==(const TimeAxis&, const TimeAxis&) = default;
};

/// F(x) = 0 as an ordered list of equations over named variables and a box.
struct System {
    std::vector<Expr> equations;
    std::vector<std::string> variables;
    std::vector<Interval> domain;
    std::optional<TimeAxis> time;

    std::size_t dimension() const noexcept { return variables.size(); }
    std::size_t size() const noexcept { return equations.size(); }
    bool square() const noexcept { return equations.size() == variables.size(); }

    friend bool operator==(const System&, const System&) = default;
};

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using VectorRef = Eigen::Ref<const Eigen::VectorXd>;

namespace detail {

inline void check_point(const System& sys, const VectorRef& x) {
    if (static_cast<std::size_t>(x.size()) != sys.dimension())
        throw std::invalid_argument("point has " + std::to_string(x.size()) + " entries, system has " +
                                    std::to_string(sys.dimension()) + " variables");
}

inline std::span<const double> as_span(const VectorRef& x) {
    return {x.data(), static_cast<std::size_t>(x.size())};
}

}  // namespace detail

/// (f_1(x), …, f_m(x)). Domain errors carry the equation index.
inline Vector eval_system(const System& sys, const VectorRef& x, double t = 0.0) {
    detail::check_point(sys, x);
    Vector out(static_cast<Eigen::Index>(sys.size()));
    const auto xs = detail::as_span(x);
    for (std::size_t i = 0; i < sys.size(); ++i) {
        try {
            out[static_cast<Eigen::Index>(i)] = sys.equations[i].eval(xs, t);
        } catch (const DomainError& e) {
            throw DomainError(e.reason(), static_cast<int>(i));
        }
    }
    return out;
}

/// Σ_i |f_i(x)|, the solution-quality metric used throughout the library.
inline double residual_l1(const System& sys, const VectorRef& x, double t = 0.0) {
    return eval_system(sys, x, t).cwiseAbs().sum();
}

/// Values and exact Jacobian (forward mode) in one pass.
inline void eval_with_jacobian(const System& sys, const VectorRef& x, double t, Vector& values, Matrix& jac) {
    detail::check_point(sys, x);
    const auto n = static_cast<Eigen::Index>(sys.dimension());
    const auto m = static_cast<Eigen::Index>(sys.size());
    values.resize(m);
    jac.resize(m, n);
    const auto xs = detail::as_span(x);
    thread_local std::vector<double> row;
    row.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < m; ++i) {
        try {
            values[i] = sys.equations[static_cast<std::size_t>(i)].eval_gradient(xs, t, row);
        } catch (const DomainError& e) {
            throw DomainError(e.reason(), static_cast<int>(i));
        }
        for (Eigen::Index j = 0; j < n; ++j) jac(i, j) = row[static_cast<std::size_t>(j)];
    }
}

inline Matrix jacobian(const System& sys, const VectorRef& x, double t = 0.0) {
    Vector values;
    Matrix jac;
    eval_with_jacobian(sys, x, t, values, jac);
    return jac;
}

// ------------------------------------------------------------------------
// Text front-end
// ------------------------------------------------------------------------

namespace detail {

enum class Tok { number, ident, symbol, end };

struct Token {
    Tok kind = Tok::end;
    std::string_view text;
    double number = 0.0;
    int column = 1;  // 1-based
};

class Lexer {
  public:
    Lexer(std::string_view line, int line_no) : src_(line), line_(line_no) { advance(); }

    const Token& peek() const noexcept { return cur_; }
    Token take() {
        Token t = cur_;
        advance();
        return t;
    }
    bool accept(char c) {
        if (cur_.kind == Tok::symbol && cur_.text[0] == c) {
            advance();
            return true;
        }
        return false;
    }
    void expect(char c, const char* what) {
        if (!accept(c)) fail(std::string("expected ") + what);
    }
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line_, cur_.column); }
    [[noreturn]] void fail_at(const std::string& msg, int column) const { throw ParseError(msg, line_, column); }
    int line() const noexcept { return line_; }

  private:
    void advance() {
        while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\r')) ++pos_;
        cur_ = Token{};
        cur_.column = static_cast<int>(pos_) + 1;
        if (pos_ >= src_.size()) return;
        const char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* first = src_.data() + pos_;
            const char* last = src_.data() + src_.size();
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(first, last, v);
            if (ec != std::errc() || ptr == first) fail_at("malformed number", cur_.column);
            cur_.kind = Tok::number;
            cur_.number = v;
            cur_.text = src_.substr(pos_, static_cast<std::size_t>(ptr - first));
            pos_ += static_cast<std::size_t>(ptr - first);
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t end = pos_;
            while (end < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '_'))
                ++end;
            cur_.kind = Tok::ident;
            cur_.text = src_.substr(pos_, end - pos_);
            pos_ = end;
            return;
        }
        static constexpr std::string_view symbols = "+-*/^(),=|[]:";
        if (symbols.find(c) == std::string_view::npos)
            fail_at(std::string("unexpected character '") + c + "'", cur_.column);
        cur_.kind = Tok::symbol;
        cur_.text = src_.substr(pos_, 1);
        ++pos_;
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    int line_;
    Token cur_;
};

struct FunctionInfo {
    std::string_view name;
    Op op;
    int arity;
};

inline const FunctionInfo* find_function(std::string_view name) {
    static constexpr FunctionInfo table[] = {
        {"sin", Op::sin, 1},   {"cos", Op::cos, 1}, {"tan", Op::tan, 1},   {"exp", Op::exp, 1},
        {"ln", Op::ln, 1},     {"log", Op::ln, 1},  {"sqrt", Op::sqrt, 1}, {"abs", Op::abs, 1},
        {"pow", Op::pow, 2},
    };
    for (const auto& f : table)
        if (f.name == name) return &f;
    return nullptr;
}

inline bool reserved_word(std::string_view s) {
    return find_function(s) != nullptr || s == "pi" || s == "vars" || s == "domain" || s == "time" ||
           s == "in";
}

/// Symbol table shared by the equation parser: declared (or inferred)
/// variables and the optional time symbol.
struct Scope {
    std::vector<std::string> variables;
    std::unordered_map<std::string, int> slots;
    std::string time_name;  // empty when no time axis
    bool infer = false;

    int declare(std::string name) {
        const int slot = static_cast<int>(variables.size());
        slots.emplace(name, slot);
        variables.push_back(std::move(name));
        return slot;
    }
};

class ExprParser {
  public:
    ExprParser(Lexer& lex, Scope& scope) : lex_(lex), scope_(scope) {}

    int expression() {
        int lhs = term();
        for (;;) {
            if (lex_.accept('+')) lhs = b_.binary(Op::add, lhs, term());
            else if (lex_.accept('-')) lhs = b_.binary(Op::sub, lhs, term());
            else return lhs;
        }
    }

    ExprBuilder& builder() { return b_; }

  private:
    int term() {
        int lhs = unary();
        for (;;) {
            if (lex_.accept('*')) lhs = b_.binary(Op::mul, lhs, unary());
            else if (lex_.accept('/')) lhs = b_.binary(Op::div, lhs, unary());
            else return lhs;
        }
    }

    int unary() {
        if (lex_.accept('-')) return b_.unary(Op::neg, unary());
        if (lex_.accept('+')) return unary();
        return power();
    }

    int power() {
        const int base = primary();
        if (!lex_.accept('^')) return base;
        const std::size_t mark = b_.size();
        const int exponent = unary();  // right associative, allows x^-2
        return make_power(base, exponent, mark);
    }

    // Integer-valued constant exponents become powi; their nodes are dropped.
    int make_power(int base, int exponent, std::size_t mark) {
        std::optional<double> k;
        const Node& e = b_.at(exponent);
        if (e.op == Op::constant) k = e.value;
        else if (e.op == Op::neg && b_.at(e.lhs).op == Op::constant) k = -b_.at(e.lhs).value;
        if (k && std::trunc(*k) == *k && std::abs(*k) <= 1024.0) {
            b_.truncate(mark);
            return b_.powi(base, static_cast<int>(*k));
        }
        return b_.binary(Op::pow, base, exponent);
    }

    int primary() {
        const Token tok = lex_.peek();
        if (tok.kind == Tok::number) {
            lex_.take();
            return b_.constant(tok.number);
        }
        if (tok.kind == Tok::ident) {
            lex_.take();
            if (lex_.accept('(')) return call(tok);
            return identifier(tok);
        }
        if (lex_.accept('(')) {
            const int inner = expression();
            lex_.expect(')', "')'");
            return inner;
        }
        if (lex_.accept('|')) {
            const int inner = expression();
            lex_.expect('|', "closing '|'");
            return b_.unary(Op::abs, inner);
        }
        if (tok.kind == Tok::end) lex_.fail("unexpected end of expression");
        lex_.fail("unexpected '" + std::string(tok.text) + "'");
    }

    int call(const Token& name) {
        const FunctionInfo* f = find_function(name.text);
        if (f == nullptr) lex_.fail_at("unknown function '" + std::string(name.text) + "'", name.column);
        std::vector<int> args;
        std::vector<std::size_t> marks;
        if (!lex_.accept(')')) {
            do {
                marks.push_back(b_.size());
                args.push_back(expression());
            } while (lex_.accept(','));
            lex_.expect(')', "')' after arguments");
        }
        if (static_cast<int>(args.size()) != f->arity)
            lex_.fail_at("function '" + std::string(f->name) + "' expects " + std::to_string(f->arity) +
                             " argument" + (f->arity == 1 ? "" : "s") + ", got " + std::to_string(args.size()),
                         name.column);
        if (f->op == Op::pow) return make_power(args[0], args[1], marks[1]);
        return b_.unary(f->op, args[0]);
    }

    int identifier(const Token& tok) {
        const std::string name(tok.text);
        if (name == "pi") return b_.constant(3.14159265358979323846);
        if (!scope_.time_name.empty() && name == scope_.time_name) return b_.time();
        if (auto it = scope_.slots.find(name); it != scope_.slots.end()) return b_.variable(it->second);
        if (find_function(name) != nullptr)
            lex_.fail_at("function '" + name + "' used without arguments", tok.column);
        if (!scope_.infer || reserved_word(name))
            lex_.fail_at("unknown identifier '" + name + "'", tok.column);
        return b_.variable(scope_.declare(name));
    }

    Lexer& lex_;
    Scope& scope_;
    ExprBuilder b_;
};

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline double signed_number(Lexer& lex) {
    double sign = 1.0;
    if (lex.accept('-')) sign = -1.0;
    else lex.accept('+');
    const Token t = lex.peek();
    if (t.kind == Tok::ident && t.text == "pi") {
        lex.take();
        return sign * 3.14159265358979323846;
    }
    if (t.kind != Tok::number) lex.fail("expected a number");
    lex.take();
    return sign * t.number;
}

// `name in [a, b]`; open brackets are accepted and stored closed.
inline std::pair<Token, Interval> bound_clause(Lexer& lex) {
    const Token name = lex.take();
    if (name.kind != Tok::ident) lex.fail_at("expected a name", name.column);
    const Token in = lex.take();
    if (in.kind != Tok::ident || in.text != "in") lex.fail_at("expected 'in'", in.column);
    if (!lex.accept('[') && !lex.accept('(')) lex.fail("expected '[' or '('");
    Interval iv;
    iv.lo = signed_number(lex);
    lex.expect(',', "','");
    iv.hi = signed_number(lex);
    if (!lex.accept(']') && !lex.accept(')')) lex.fail("expected ']' or ')'");
    if (lex.peek().kind != Tok::end) lex.fail("trailing input after interval");
    if (!iv.valid()) lex.fail_at("interval lower bound must be below upper bound", name.column);
    return {name, iv};
}

struct SourceLine {
    int number;
    std::string_view text;  // comment stripped
    std::string_view directive;  // "vars", "domain", "time" or empty
    std::size_t body_offset = 0;
};

inline std::vector<SourceLine> split_lines(std::string_view source) {
    std::vector<SourceLine> lines;
    int number = 0;
    std::size_t pos = 0;
    while (pos <= source.size()) {
        std::size_t end = source.find('\n', pos);
        if (end == std::string_view::npos) end = source.size();
        std::string_view line = source.substr(pos, end - pos);
        ++number;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        if (!trim(line).empty()) {
            SourceLine sl{number, line, {}, 0};
            const std::string_view t = trim(line);
            for (std::string_view d : {"vars", "domain", "time"}) {
                if (t.substr(0, d.size()) == d && trim(t.substr(d.size())).substr(0, 1) == ":") {
                    sl.directive = d;
                    sl.body_offset = line.find(':') + 1;
                    break;
                }
            }
            lines.push_back(sl);
        }
        if (end == source.size()) break;
        pos = end + 1;
    }
    return lines;
}

inline void skip_directive(Lexer& lex) {
    lex.take();  // keyword
    lex.expect(':', "':'");
}

}  // namespace detail

/// Parses the equation DSL (docs/dsl.md) into a System.
inline System parse_system(std::string_view source) {
    using namespace detail;
    const std::vector<SourceLine> lines = split_lines(source);
    Scope scope;
    std::optional<TimeAxis> time;
    bool declared = false;

    // vars and time first so equations may precede them
    for (const SourceLine& sl : lines) {
        if (sl.directive == "vars") {
            Lexer lex(sl.text, sl.number);
            skip_directive(lex);
            declared = true;
            do {
                const Token name = lex.take();
                if (name.kind != Tok::ident) lex.fail_at("expected a variable name", name.column);
                const std::string s(name.text);
                if (reserved_word(s)) lex.fail_at("'" + s + "' is reserved", name.column);
                if (scope.slots.count(s) != 0 || (time && time->name == s))
                    lex.fail_at("duplicate variable declaration '" + s + "'", name.column);
                scope.declare(s);
            } while (lex.accept(','));
            if (lex.peek().kind != Tok::end) lex.fail("expected ',' or end of line");
        } else if (sl.directive == "time") {
            Lexer lex(sl.text, sl.number);
            skip_directive(lex);
            if (time) lex.fail("duplicate time declaration");
            auto [name, iv] = bound_clause(lex);
            const std::string s(name.text);
            if (reserved_word(s) || scope.slots.count(s) != 0)
                lex.fail_at("duplicate variable declaration '" + s + "'", name.column);
            time = TimeAxis{s, iv};
        }
    }
    scope.infer = !declared;
    if (time) scope.time_name = time->name;

    System sys;
    for (const SourceLine& sl : lines) {
        if (!sl.directive.empty()) continue;
        Lexer lex(sl.text, sl.number);
        ExprParser parser(lex, scope);
        const int lhs = parser.expression();
        if (!lex.accept('=')) lex.fail("expected '='");
        const std::size_t mark = parser.builder().size();
        const int rhs = parser.expression();
        if (lex.peek().kind != Tok::end) lex.fail("unexpected '" + std::string(lex.peek().text) + "'");
        ExprBuilder& b = parser.builder();
        const Node& r = b.at(rhs);
        if (r.op == Op::constant && r.value == 0.0 && b.size() == mark + 1) {
            b.truncate(mark);
            (void)lhs;
        } else {
            b.binary(Op::sub, lhs, rhs);
        }
        sys.equations.push_back(std::move(b).finish());
    }
    if (sys.equations.empty()) throw ParseError("no equations", lines.empty() ? 1 : lines.back().number, 1);

    sys.variables = scope.variables;
    sys.domain.assign(sys.variables.size(), Interval{});
    std::vector<bool> bounded(sys.variables.size(), false);
    for (const SourceLine& sl : lines) {
        if (sl.directive != "domain") continue;
        Lexer lex(sl.text, sl.number);
        skip_directive(lex);
        auto [name, iv] = bound_clause(lex);
        const auto it = scope.slots.find(std::string(name.text));
        if (it == scope.slots.end())
            lex.fail_at("domain for unknown variable '" + std::string(name.text) + "'", name.column);
        const auto slot = static_cast<std::size_t>(it->second);
        if (bounded[slot]) lex.fail_at("duplicate domain for '" + std::string(name.text) + "'", name.column);
        bounded[slot] = true;
        sys.domain[slot] = iv;
    }
    sys.time = time;
    return sys;
}

/// Parses a single expression over the given variable names (and optional
/// time symbol); no inference.
inline Expr parse_expression(std::string_view text, const std::vector<std::string>& variables,
                             std::string_view time_name = {}) {
    detail::Scope scope;
    for (const auto& v : variables) scope.declare(v);
    scope.time_name = std::string(time_name);
    detail::Lexer lex(text, 1);
    detail::ExprParser parser(lex, scope);
    parser.expression();
    if (lex.peek().kind != detail::Tok::end) lex.fail("unexpected '" + std::string(lex.peek().text) + "'");
    return std::move(parser.builder()).finish();
}

/// Fully parenthesized text form; parse_expression(to_string(e)) == e.
inline std::string to_string(const Expr& e, const std::vector<std::string>& names, std::string_view time_name = "t") {
    const auto nodes = e.nodes();
    if (nodes.empty()) return {};
    auto rec = [&](auto&& self, std::int32_t i) -> std::string {
        const Node& n = nodes[static_cast<std::size_t>(i)];
        switch (n.op) {
            case Op::constant: return detail::format_double(n.value);
            case Op::variable:
                return static_cast<std::size_t>(n.index) < names.size() ? names[static_cast<std::size_t>(n.index)]
                                                                         : "_v" + std::to_string(n.index);
            case Op::time: return std::string(time_name);
            case Op::neg: return "(-" + self(self, n.lhs) + ")";
            case Op::add: return "(" + self(self, n.lhs) + " + " + self(self, n.rhs) + ")";
            case Op::sub: return "(" + self(self, n.lhs) + " - " + self(self, n.rhs) + ")";
            case Op::mul: return "(" + self(self, n.lhs) + " * " + self(self, n.rhs) + ")";
            case Op::div: return "(" + self(self, n.lhs) + " / " + self(self, n.rhs) + ")";
            case Op::pow: return "(" + self(self, n.lhs) + "^" + self(self, n.rhs) + ")";
            case Op::powi:
                return "(" + self(self, n.lhs) + "^" +
                       (n.index < 0 ? "(" + std::to_string(n.index) + ")" : std::to_string(n.index)) + ")";
            case Op::sin: return "sin(" + self(self, n.lhs) + ")";
            case Op::cos: return "cos(" + self(self, n.lhs) + ")";
            case Op::tan: return "tan(" + self(self, n.lhs) + ")";
            case Op::exp: return "exp(" + self(self, n.lhs) + ")";
            case Op::ln: return "ln(" + self(self, n.lhs) + ")";
            case Op::sqrt: return "sqrt(" + self(self, n.lhs) + ")";
            case Op::abs: return "abs(" + self(self, n.lhs) + ")";
        }
        return {};
    };
    return rec(rec, static_cast<std::int32_t>(nodes.size() - 1));
}

/// DSL text that parses back to an equal System.
inline std::string print_system(const System& sys) {
    std::string out = "vars: ";
    for (std::size_t i = 0; i < sys.variables.size(); ++i) {
        if (i != 0) out += ", ";
        out += sys.variables[i];
    }
    out += '\n';
    if (sys.time)
        out += "time: " + sys.time->name + " in [" + detail::format_double(sys.time->range.lo) + ", " +
               detail::format_double(sys.time->range.hi) + "]\n";
    for (std::size_t i = 0; i < sys.variables.size() && i < sys.domain.size(); ++i)
        out += "domain: " + sys.variables[i] + " in [" + detail::format_double(sys.domain[i].lo) + ", " +
               detail::format_double(sys.domain[i].hi) + "]\n";
    const std::string tname = sys.time ? sys.time->name : "t";
    for (const Expr& e : sys.equations) out += to_string(e, sys.variables, tname) + " = 0\n";
    return out;
}

}  // namespace hann
