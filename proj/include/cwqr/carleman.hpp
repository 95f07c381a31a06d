#pragma once

#include "cwqr/grid.hpp"

namespace cwqr {

/// Parameters of the weight exp(lambda(|x-x0|^2 - eta t^2)) and the domain
/// condition |x-x0|^2 - eta t^2 > eps_domain on the cylinder.
struct CarlemanParams {
    double x0x = 0.0;
    double x0y = -2.5;
    double lambda = 2.1;
    double eta = 0.5;
    double eps_domain = 0.1;
};

/// Throws on lambda <= 0, eta outside [0,1), eps_domain <= 0.
void validate(const CarlemanParams& p);

/// Additionally requires x0 outside the closed spatial box and the domain
/// condition at every node of the grid.
void validate_for_domain(const CarlemanParams& p, const SpaceTimeGrid& omega);

/// exp(lambda(|x-x0|^2 - eta t^2)); throws if the exponent exceeds 700.
double carleman_weight(const CarlemanParams& p, double x, double y, double t);

/// Weight sampled on every node, with the time-damping coefficient given
/// explicitly so W_{lambda,0} shares the code path.
ScalarField weight_field(const CarlemanParams& p, GridPtr grid, double eta);

bool check_domain_condition(const CarlemanParams& p, const SpaceTimeGrid& omega);

/// Discrete H^s_{lambda,eta} norm (s in {0,1,2}): plain node sums weighted by
/// the cell volume, derivatives by centered differences with one-sided
/// fallback at the box faces.
double weighted_sobolev_norm(const ScalarField& f, int s, const CarlemanParams& p);

/// Discrete [ integral exp(2 lambda |x-x0|^2) p^2 dx ]^{1/2} on a spatial field.
double weighted_l2_source_norm(const ScalarField& p_field, const CarlemanParams& p);

}  // namespace cwqr
