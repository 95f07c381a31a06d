#include "cwqr/model.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cwqr {

// ---------------------------------------------------------------------------
// Expression parser (recursive descent into postfix ops)
// ---------------------------------------------------------------------------

Expression Expression::parse(const std::string& text) {
    Expression e;
    e.text_ = text;

    struct P {
        const std::string& s;
        std::size_t i = 0;
        std::vector<Op>& prog;

        void fail(const std::string& msg) const {
            throw std::invalid_argument("expression parse error at position " +
                                        std::to_string(i) + ": " + msg);
        }
        void skip() {
            while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        }
        bool consume(char c) {
            skip();
            if (i < s.size() && s[i] == c) {
                ++i;
                return true;
            }
            return false;
        }
        void expect(char c) {
            if (!consume(c)) fail(std::string("expected '") + c + "'");
        }

        void expr() {
            term();
            for (;;) {
                skip();
                if (consume('+')) {
                    term();
                    prog.push_back({Op::Add});
                } else if (consume('-')) {
                    term();
                    prog.push_back({Op::Sub});
                } else {
                    break;
                }
            }
        }
        void term() {
            unary();
            for (;;) {
                skip();
                if (consume('*')) {
                    unary();
                    prog.push_back({Op::Mul});
                } else if (consume('/')) {
                    unary();
                    prog.push_back({Op::Div});
                } else {
                    break;
                }
            }
        }
        void unary() {
            skip();
            if (consume('-')) {
                unary();
                prog.push_back({Op::Neg});
                return;
            }
            primary();
        }
        void primary() {
            skip();
            if (i >= s.size()) fail("unexpected end of input");
            if (consume('(')) {
                expr();
                expect(')');
                return;
            }
            const char c = s[i];
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                std::size_t used = 0;
                double v;
                try {
                    v = std::stod(s.substr(i), &used);
                } catch (const std::exception&) {
                    fail("bad number");
                    return;
                }
                i += used;
                Op op{Op::Push};
                op.value = v;
                prog.push_back(op);
                return;
            }
            if (std::isalpha(static_cast<unsigned char>(c))) {
                std::size_t j = i;
                while (j < s.size() && std::isalpha(static_cast<unsigned char>(s[j]))) ++j;
                const std::string name = s.substr(i, j - i);
                i = j;
                static const char* vars[] = {"x", "y", "t", "u", "ut", "ux", "uy"};
                for (int v = 0; v < 7; ++v) {
                    if (name == vars[v]) {
                        Op op{Op::Var};
                        op.var = v;
                        prog.push_back(op);
                        return;
                    }
                }
                if (name == "min" || name == "max") {
                    expect('(');
                    expr();
                    expect(',');
                    expr();
                    expect(')');
                    prog.push_back({name == "min" ? Op::Min : Op::Max});
                    return;
                }
                Op::Kind kind;
                if (name == "abs") kind = Op::Abs;
                else if (name == "sqrt") kind = Op::Sqrt;
                else if (name == "exp") kind = Op::Exp;
                else if (name == "sin") kind = Op::Sin;
                else if (name == "cos") kind = Op::Cos;
                else {
                    fail("unknown identifier '" + name + "'");
                    return;
                }
                expect('(');
                expr();
                expect(')');
                prog.push_back({kind});
                return;
            }
            fail(std::string("unexpected character '") + c + "'");
        }
    };

    P p{text, 0, e.prog_};
    p.expr();
    p.skip();
    if (p.i != text.size()) p.fail("trailing input");
    return e;
}

double Expression::eval(double x, double y, double t, double u, double ut,
                        double ux, double uy) const {
    double stack[64];
    int top = 0;
    const double vars[7] = {x, y, t, u, ut, ux, uy};
    for (const Op& op : prog_) {
        switch (op.kind) {
            case Op::Push: stack[top++] = op.value; break;
            case Op::Var: stack[top++] = vars[op.var]; break;
            case Op::Neg: stack[top - 1] = -stack[top - 1]; break;
            case Op::Add: --top; stack[top - 1] += stack[top]; break;
            case Op::Sub: --top; stack[top - 1] -= stack[top]; break;
            case Op::Mul: --top; stack[top - 1] *= stack[top]; break;
            case Op::Div: --top; stack[top - 1] /= stack[top]; break;
            case Op::Min: --top; stack[top - 1] = std::min(stack[top - 1], stack[top]); break;
            case Op::Max: --top; stack[top - 1] = std::max(stack[top - 1], stack[top]); break;
            case Op::Abs: stack[top - 1] = std::abs(stack[top - 1]); break;
            case Op::Sqrt: stack[top - 1] = std::sqrt(stack[top - 1]); break;
            case Op::Exp: stack[top - 1] = std::exp(stack[top - 1]); break;
            case Op::Sin: stack[top - 1] = std::sin(stack[top - 1]); break;
            case Op::Cos: stack[top - 1] = std::cos(stack[top - 1]); break;
        }
        if (top >= 63) throw std::runtime_error("expression too deep");
    }
    return stack[0];
}

// ---------------------------------------------------------------------------
// Sources
// ---------------------------------------------------------------------------

SourceSpec SourceSpec::test(TestId id) {
    SourceSpec s;
    s.kind_ = Kind::Benchmark;
    s.id_ = id;
    return s;
}

SourceSpec SourceSpec::zero() {
    SourceSpec s;
    s.kind_ = Kind::Zero;
    return s;
}

SourceSpec SourceSpec::custom(const std::string& expr) {
    SourceSpec s;
    s.kind_ = Kind::Custom;
    s.expr_ = Expression::parse(expr);
    return s;
}

TestId SourceSpec::test_id() const {
    if (kind_ != Kind::Benchmark)
        throw std::logic_error("source has no benchmark id");
    return id_;
}

double SourceSpec::eval(double x, double y) const {
    switch (kind_) {
        case Kind::Zero:
            return 0.0;
        case Kind::Custom:
            return expr_->eval(x, y, 0, 0, 0, 0, 0);
        case Kind::Benchmark:
            break;
    }
    switch (id_) {
        case TestId::Test1: {
            const double r = x * x / 0.25 + y * y / 0.64;
            if (r >= 1.0) return 0.0;
            const double r2 = r * r;
            return 15.0 * std::exp(r2 / (r2 - 1.0));
        }
        case TestId::Test2: {
            const double pi = std::numbers::pi;
            return std::sin(pi * (x + y)) + std::sin(2.0 * pi * (x - y));
        }
        case TestId::Test3: {
            const bool in_rect = std::max(std::abs(x - 0.4) / 0.15, std::abs(y) / 0.7) < 1.0;
            const bool in_disk = (x + 0.4) * (x + 0.4) + y * y < 0.04;
            return (in_rect || in_disk) ? 15.0 : 0.0;
        }
        case TestId::Test4: {
            const bool in_disk = x * x + y * y < 0.65 * 0.65;
            const bool outside_void = std::max(std::abs(x), std::abs(y)) > 0.35;
            return (in_disk && outside_void) ? 25.0 : 0.0;
        }
    }
    return 0.0;
}

std::string SourceSpec::describe() const {
    switch (kind_) {
        case Kind::Zero: return "zero";
        case Kind::Custom: return "custom: " + expr_->text();
        case Kind::Benchmark: return "test" + std::to_string(int(id_));
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Nonlinearities
// ---------------------------------------------------------------------------

namespace {

// e^u capped at `bound` without evaluating exp past the overflow threshold.
double capped_exp(double u, double bound) {
    if (u > std::log(bound)) return bound;
    return std::exp(u);
}

}  // namespace

NonlinearitySpec NonlinearitySpec::test(TestId id) {
    NonlinearitySpec f;
    f.kind_ = Kind::Benchmark;
    f.id_ = id;
    return f;
}

NonlinearitySpec NonlinearitySpec::linear() {
    NonlinearitySpec f;
    f.kind_ = Kind::Linear;
    return f;
}

NonlinearitySpec NonlinearitySpec::custom(const std::string& expr) {
    NonlinearitySpec f;
    f.kind_ = Kind::Custom;
    f.expr_ = Expression::parse(expr);
    return f;
}

NonlinearitySpec NonlinearitySpec::with_truncation(double c3m) const {
    if (!(c3m > 0.0))
        throw std::invalid_argument("truncation bound must be positive");
    NonlinearitySpec f = *this;
    f.c3m_ = c3m;
    return f;
}

double NonlinearitySpec::raw_eval(double x, double y, double t, double u,
                                  double ut, double ux, double uy) const {
    const double grad = std::sqrt(ux * ux + uy * uy);
    switch (kind_) {
        case Kind::Linear:
            return 0.0;
        case Kind::Custom:
            return expr_->eval(x, y, t, u, ut, ux, uy);
        case Kind::Benchmark:
            break;
    }
    switch (id_) {
        case TestId::Test1:
            return std::sqrt(u * u + 1.0) + grad;
        case TestId::Test2:
            if (u > std::log(10.0)) return 10.0;
            return std::min(std::exp(u) + grad, 10.0);
        case TestId::Test3:
            return std::min(u * u + 1.0, 10.0) + grad;
        case TestId::Test4:
            return capped_exp(u, 100.0) + grad;
    }
    return 0.0;
}

double NonlinearitySpec::eval(double x, double y, double t, double u,
                              double ut, double ux, double uy) const {
    const double f = raw_eval(x, y, t, u, ut, ux, uy);
    if (!c3m_) return f;
    const double grad = std::sqrt(ux * ux + uy * uy);
    return cutoff_chi(u, ut, grad, *c3m_) * f;
}

std::string NonlinearitySpec::describe() const {
    std::string base;
    switch (kind_) {
        case Kind::Linear: base = "linear"; break;
        case Kind::Custom: base = "custom: " + expr_->text(); break;
        case Kind::Benchmark: base = "test" + std::to_string(int(id_)); break;
    }
    if (c3m_) base += " (truncated at " + std::to_string(*c3m_) + ")";
    return base;
}

double cutoff_chi(double s1, double s2, double p_norm, double c3m) {
    if (!(c3m > 0.0))
        throw std::invalid_argument("cutoff_chi: bound must be positive");
    const double rho = std::sqrt(s1 * s1 + s2 * s2 + p_norm * p_norm);
    if (rho <= c3m) return 1.0;
    if (rho >= 2.0 * c3m) return 0.0;
    const double s = (rho - c3m) / c3m;  // in (0,1)
    const double s3 = s * s * s;
    return 1.0 - (10.0 * s3 - 15.0 * s3 * s + 6.0 * s3 * s * s);
}

// ---------------------------------------------------------------------------
// Wave speed
// ---------------------------------------------------------------------------

WaveSpeed WaveSpeed::constant(double value) {
    if (!(value >= 1.0) || !std::isfinite(value))
        throw std::invalid_argument("wave speed must satisfy c >= 1");
    WaveSpeed c;
    c.value_ = value;
    c.c_max_ = value;
    return c;
}

WaveSpeed WaveSpeed::grid_function(ScalarField spatial) {
    if (!spatial.is_spatial())
        throw std::invalid_argument("wave speed grid function must be spatial");
    double cmax = 1.0;
    for (double v : spatial.values()) {
        if (!(v >= 1.0) || !std::isfinite(v))
            throw std::invalid_argument("wave speed values must satisfy 1 <= c < inf");
        cmax = std::max(cmax, v);
    }
    WaveSpeed c;
    c.field_ = std::move(spatial);
    c.c_max_ = cmax;
    return c;
}

double WaveSpeed::eval(double x, double y) const {
    if (!field_) return value_;
    const SpaceTimeGrid& g = field_->grid();
    // Bilinear interpolation, clamped to the field's box.
    double fx = (x - g.bounds().x_min) / g.dx();
    double fy = (y - g.bounds().y_min) / g.dx();
    fx = std::min(std::max(fx, 0.0), double(g.nx() - 1));
    fy = std::min(std::max(fy, 0.0), double(g.ny() - 1));
    const int i0 = std::min(int(fx), g.nx() - 2);
    const int j0 = std::min(int(fy), g.ny() - 2);
    const double ax = fx - i0, ay = fy - j0;
    return (1 - ax) * (1 - ay) * field_->at(i0, j0) +
           ax * (1 - ay) * field_->at(i0 + 1, j0) +
           (1 - ax) * ay * field_->at(i0, j0 + 1) +
           ax * ay * field_->at(i0 + 1, j0 + 1);
}

bool check_speed_condition(const WaveSpeed& c, double x0x, double x0y,
                           const SpaceTimeGrid& grid) {
    if (c.is_constant()) return true;
    const double h = grid.dx();
    for (int j = 1; j < grid.ny() - 1; ++j) {
        for (int i = 1; i < grid.nx() - 1; ++i) {
            const double x = grid.x(i), y = grid.y(j);
            const double gx = (c.eval(x + h, y) - c.eval(x - h, y)) / (2.0 * h);
            const double gy = (c.eval(x, y + h) - c.eval(x, y - h)) / (2.0 * h);
            const double ip = (x - x0x) * gx + (y - x0y) * gy;
            if (ip < -1e-12) return false;
        }
    }
    return true;
}

ModelSpec benchmark_model(TestId id) {
    ModelSpec m;
    m.source = SourceSpec::test(id);
    m.nonlinearity = NonlinearitySpec::test(id);
    m.speed = WaveSpeed::constant(1.0);
    return m;
}

ScalarField sample_source(const SourceSpec& s, GridPtr grid) {
    ScalarField p = ScalarField::spatial(grid);
    for (int j = 0; j < grid->ny(); ++j)
        for (int i = 0; i < grid->nx(); ++i)
            p.at(i, j) = s.eval(grid->x(i), grid->y(j));
    p.check_finite("sampled source");
    return p;
}

}  // namespace cwqr
