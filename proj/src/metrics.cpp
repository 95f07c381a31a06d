#include "cwqr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace cwqr {

namespace {

void require_same_shape(const ScalarField& a, const ScalarField& b, const char* who) {
    if (!a.same_shape(b))
        throw std::invalid_argument(std::string(who) + ": fields live on different grids");
}

}  // namespace

double rel_l2_error(const ScalarField& p, const ScalarField& p_star) {
    require_same_shape(p, p_star, "rel_l2_error");
    double num = 0.0, den = 0.0;
    const auto& pv = p.values();
    const auto& sv = p_star.values();
    for (std::size_t n = 0; n < pv.size(); ++n) {
        const double d = pv[n] - sv[n];
        num += d * d;
        den += sv[n] * sv[n];
    }
    if (den == 0.0) throw std::invalid_argument("rel_l2_error: reference field is zero");
    return std::sqrt(num / den);
}

double consecutive_diff(const ScalarField& p_n, const ScalarField& p_prev) {
    require_same_shape(p_n, p_prev, "consecutive_diff");
    double m = 0.0;
    const auto& a = p_n.values();
    const auto& b = p_prev.values();
    for (std::size_t n = 0; n < a.size(); ++n)
        m = std::max(m, std::abs(a[n] - b[n]));
    return m;
}

double peak_value_error(const ScalarField& p, const ScalarField& p_star) {
    require_same_shape(p, p_star, "peak_value_error");
    const double mp = *std::max_element(p.values().begin(), p.values().end());
    const double ms = *std::max_element(p_star.values().begin(), p_star.values().end());
    if (ms == 0.0) throw std::invalid_argument("peak_value_error: reference peak is zero");
    return std::abs(mp - ms) / ms;
}

std::optional<double> fit_contraction_rate(const std::vector<double>& consec_diffs) {
    if (consec_diffs.size() < 3) return std::nullopt;
    for (double d : consec_diffs)
        if (!(d > 0.0)) return std::nullopt;
    const int n = int(consec_diffs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        const double y = std::log(consec_diffs[i]);
        sx += i;
        sy += y;
        sxx += double(i) * i;
        sxy += i * y;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return std::exp(slope);
}

ErrorReport make_error_report(const ScalarField& p_comp, const ScalarField& p_star,
                              const std::vector<double>& consec_diffs) {
    ErrorReport r;
    r.rel_l2 = rel_l2_error(p_comp, p_star);
    r.rel_linf_peak = peak_value_error(p_comp, p_star);
    r.consec_diffs = consec_diffs;
    r.fitted_theta = fit_contraction_rate(consec_diffs);
    return r;
}

void write_error_report(const ErrorReport& r, const std::string& path) {
    nlohmann::json j;
    j["rel_l2"] = r.rel_l2;
    j["rel_linf_peak"] = r.rel_linf_peak;
    j["consec_diffs"] = r.consec_diffs;
    if (r.fitted_theta)
        j["fitted_theta"] = *r.fitted_theta;
    else
        j["fitted_theta"] = nullptr;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open file: " + path);
    out << j.dump(2) << "\n";
}

}  // namespace cwqr
