#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cwqr/grid.hpp"

namespace cwqr {

enum class TestId { Test1 = 1, Test2 = 2, Test3 = 3, Test4 = 4 };

/// A tiny arithmetic expression compiled to postfix form.
/// Grammar: + - * / min max abs sqrt exp sin cos, variables x y t u ut ux uy,
/// decimal literals, parentheses, unary minus.
class Expression {
public:
    static Expression parse(const std::string& text);
    double eval(double x, double y, double t, double u, double ut, double ux,
                double uy) const;
    const std::string& text() const { return text_; }

private:
    struct Op {
        enum Kind { Push, Var, Neg, Add, Sub, Mul, Div, Min, Max, Abs, Sqrt, Exp, Sin, Cos } kind;
        double value = 0.0;  // Push
        int var = 0;         // Var: 0..6 for x y t u ut ux uy
    };
    std::string text_;
    std::vector<Op> prog_;
};

/// Benchmark initial sources plus a zero and a custom-expression variant.
class SourceSpec {
public:
    static SourceSpec test(TestId id);
    static SourceSpec zero();
    static SourceSpec custom(const std::string& expr);

    double eval(double x, double y) const;
    bool is_benchmark() const { return kind_ == Kind::Benchmark; }
    TestId test_id() const;
    std::string describe() const;

private:
    enum class Kind { Benchmark, Zero, Custom };
    Kind kind_ = Kind::Zero;
    TestId id_ = TestId::Test1;
    std::optional<Expression> expr_;
};

/// Benchmark nonlinearities F(x,t,u,u_t,grad u), a linear (zero) variant and
/// a custom expression. An optional C3*M bound switches on the C^1 cutoff.
class NonlinearitySpec {
public:
    static NonlinearitySpec test(TestId id);
    static NonlinearitySpec linear();
    static NonlinearitySpec custom(const std::string& expr);

    NonlinearitySpec with_truncation(double c3m) const;
    bool truncated() const { return c3m_.has_value(); }

    double eval(double x, double y, double t, double u, double ut, double ux,
                double uy) const;
    std::string describe() const;

private:
    enum class Kind { Benchmark, Linear, Custom };
    double raw_eval(double x, double y, double t, double u, double ut,
                    double ux, double uy) const;
    Kind kind_ = Kind::Linear;
    TestId id_ = TestId::Test1;
    std::optional<Expression> expr_;
    std::optional<double> c3m_;
};

/// C^1 cutoff in rho = sqrt(s1^2 + s2^2 + |p|^2): 1 below c3m, 0 above
/// 2*c3m, quintic smoothstep in between.
double cutoff_chi(double s1, double s2, double p_norm, double c3m);

/// Wave speed c(x) with range [1, c_bar]; constant or sampled on a grid.
class WaveSpeed {
public:
    static WaveSpeed constant(double value);
    static WaveSpeed grid_function(ScalarField spatial);

    double eval(double x, double y) const;
    double max_value() const { return c_max_; }
    bool is_constant() const { return !field_.has_value(); }

private:
    WaveSpeed() = default;
    double value_ = 1.0;
    double c_max_ = 1.0;
    std::optional<ScalarField> field_;
};

/// Discrete check of <x - x0, grad c(x)> >= 0 at interior nodes, centered
/// differences, tolerance -1e-12.
bool check_speed_condition(const WaveSpeed& c, double x0x, double x0y,
                           const SpaceTimeGrid& grid);

struct ModelSpec {
    SourceSpec source = SourceSpec::zero();
    NonlinearitySpec nonlinearity = NonlinearitySpec::linear();
    WaveSpeed speed = WaveSpeed::constant(1.0);
};

ModelSpec benchmark_model(TestId id);

/// Samples a source on the spatial nodes of a grid.
ScalarField sample_source(const SourceSpec& s, GridPtr grid);

}  // namespace cwqr
