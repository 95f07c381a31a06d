#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cwqr/grid.hpp"

namespace cwqr {

/// ||p - p_star||_L2 / ||p_star||_L2 on a shared grid.
double rel_l2_error(const ScalarField& p, const ScalarField& p_star);

/// Max-norm difference between two fields on a shared grid.
double consecutive_diff(const ScalarField& p_n, const ScalarField& p_prev);

/// |max p - max p_star| / max p_star: the peak-value error used for the
/// piecewise-constant benchmarks.
double peak_value_error(const ScalarField& p, const ScalarField& p_star);

/// Least-squares slope of log(diff_n) against n, exponentiated. Needs at
/// least 3 entries, all positive; otherwise empty.
std::optional<double> fit_contraction_rate(const std::vector<double>& consec_diffs);

struct ErrorReport {
    double rel_l2 = 0.0;
    double rel_linf_peak = 0.0;
    std::vector<double> consec_diffs;
    std::optional<double> fitted_theta;
};

ErrorReport make_error_report(const ScalarField& p_comp, const ScalarField& p_star,
                              const std::vector<double>& consec_diffs);

void write_error_report(const ErrorReport& r, const std::string& path);

}  // namespace cwqr
