#include "cwqr/carleman.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace cwqr {

namespace {

double exponent_at(const CarlemanParams& p, double x, double y, double t,
                   double eta) {
    const double rx = x - p.x0x;
    const double ry = y - p.x0y;
    return p.lambda * (rx * rx + ry * ry - eta * t * t);
}

}  // namespace

void validate(const CarlemanParams& p) {
    if (!(p.lambda > 0.0))
        throw std::invalid_argument("carleman: lambda must be positive");
    if (!(p.eta >= 0.0 && p.eta < 1.0))
        throw std::invalid_argument("carleman: eta must lie in [0,1)");
    if (!(p.eps_domain > 0.0))
        throw std::invalid_argument("carleman: eps_domain must be positive");
}

void validate_for_domain(const CarlemanParams& p, const SpaceTimeGrid& omega) {
    validate(p);
    const auto& b = omega.bounds();
    const bool inside = p.x0x >= b.x_min && p.x0x <= b.x_max &&
                        p.x0y >= b.y_min && p.x0y <= b.y_max;
    if (inside)
        throw std::invalid_argument("carleman: x0 must lie outside the closed domain");
    if (!check_domain_condition(p, omega))
        throw std::invalid_argument(
            "carleman: domain condition |x-x0|^2 - eta t^2 > eps fails on the grid");
}

double carleman_weight(const CarlemanParams& p, double x, double y, double t) {
    const double e = exponent_at(p, x, y, t, p.eta);
    if (e > 700.0)
        throw std::overflow_error("carleman weight overflow at (x,y,t)=(" +
                                  std::to_string(x) + "," + std::to_string(y) +
                                  "," + std::to_string(t) + "): exponent " +
                                  std::to_string(e));
    return std::exp(e);
}

ScalarField weight_field(const CarlemanParams& p, GridPtr grid, double eta) {
    ScalarField w = ScalarField::space_time(grid);
    const SpaceTimeGrid& g = *grid;
    for (int k = 0; k < g.nt(); ++k) {
        const double t = g.t(k);
        for (int j = 0; j < g.ny(); ++j) {
            const double y = g.y(j);
            for (int i = 0; i < g.nx(); ++i) {
                const double e = exponent_at(p, g.x(i), y, t, eta);
                if (e > 700.0)
                    throw std::overflow_error(
                        "carleman weight overflow at node (" + std::to_string(i) +
                        "," + std::to_string(j) + "," + std::to_string(k) +
                        "): exponent " + std::to_string(e));
                w.at(i, j, k) = std::exp(e);
            }
        }
    }
    return w;
}

bool check_domain_condition(const CarlemanParams& p, const SpaceTimeGrid& omega) {
    double min_val = std::numeric_limits<double>::infinity();
    for (int k = 0; k < omega.nt(); ++k) {
        const double t = omega.t(k);
        for (int j = 0; j < omega.ny(); ++j) {
            for (int i = 0; i < omega.nx(); ++i) {
                const double rx = omega.x(i) - p.x0x;
                const double ry = omega.y(j) - p.x0y;
                const double v = rx * rx + ry * ry - p.eta * t * t;
                if (v < min_val) min_val = v;
            }
        }
    }
    return min_val > p.eps_domain;
}

double weighted_sobolev_norm(const ScalarField& f, int s, const CarlemanParams& p) {
    if (s < 0 || s > 2)
        throw std::invalid_argument("weighted_sobolev_norm: s must be in {0,1,2}");
    if (f.is_spatial())
        throw std::invalid_argument("weighted_sobolev_norm: needs a space-time field");
    const SpaceTimeGrid& g = f.grid();
    const double vol = g.dx() * g.dx() * g.dt();
    const auto alphas = multi_indices_up_to(s);
    double acc = 0.0;
    for (int k = 0; k < g.nt(); ++k) {
        const double t = g.t(k);
        for (int j = 0; j < g.ny(); ++j) {
            const double y = g.y(j);
            for (int i = 0; i < g.nx(); ++i) {
                const double w = carleman_weight(p, g.x(i), y, t);
                double node_sum = 0.0;
                for (const MultiIndex& a : alphas) {
                    const double d = apply_derivative(f, a, i, j, k);
                    node_sum += d * d;
                }
                acc += w * w * node_sum * vol;
            }
        }
    }
    return std::sqrt(acc);
}

double weighted_l2_source_norm(const ScalarField& p_field, const CarlemanParams& p) {
    if (!p_field.is_spatial())
        throw std::invalid_argument("weighted_l2_source_norm: needs a spatial field");
    const SpaceTimeGrid& g = p_field.grid();
    const double area = g.dx() * g.dx();
    double acc = 0.0;
    for (int j = 0; j < g.ny(); ++j) {
        for (int i = 0; i < g.nx(); ++i) {
            const double rx = g.x(i) - p.x0x;
            const double ry = g.y(j) - p.x0y;
            const double e = 2.0 * p.lambda * (rx * rx + ry * ry);
            if (e > 700.0)
                throw std::overflow_error("weighted_l2_source_norm: weight overflow");
            const double v = p_field.at(i, j);
            acc += std::exp(e) * v * v * area;
        }
    }
    return std::sqrt(acc);
}

}  // namespace cwqr
