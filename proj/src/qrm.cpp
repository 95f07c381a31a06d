#include "cwqr/qrm.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "cwqr/metrics.hpp"
#include "json.hpp"

namespace cwqr {

double dirichlet_trace_value(const CauchyData& data, int i, int j, int k) {
    const SpaceTimeGrid& g = data.grid();
    double sum = 0.0;
    int hits = 0;
    if (i == 0) {
        sum += data.f(Face::West, j, k);
        ++hits;
    }
    if (i == g.nx() - 1) {
        sum += data.f(Face::East, j, k);
        ++hits;
    }
    if (j == 0) {
        sum += data.f(Face::South, i, k);
        ++hits;
    }
    if (j == g.ny() - 1) {
        sum += data.f(Face::North, i, k);
        ++hits;
    }
    if (hits == 0)
        throw std::invalid_argument("dirichlet_trace_value: not a boundary node");
    return sum / hits;
}

namespace {

DofMap build_dof_map(const SpaceTimeGrid& g) {
    DofMap m;
    m.node_to_dof.assign(g.n_nodes(), -1);
    m.dof_to_node.reserve(g.n_nodes());
    for (int k = 0; k < g.nt(); ++k)
        for (int j = 0; j < g.ny(); ++j)
            for (int i = 0; i < g.nx(); ++i) {
                if (g.is_spatial_boundary(i, j)) continue;
                const std::size_t node = g.index(i, j, k);
                m.node_to_dof[node] = std::int64_t(m.dof_to_node.size());
                m.dof_to_node.push_back(node);
            }
    return m;
}

enum class ResidualOp { WaveOperator, NegativeLaplacian };

struct RowAccumulator {
    const SpaceTimeGrid& g;
    const DofMap& dof;
    const std::vector<double>& dirichlet;  // values at eliminated nodes, by node index
    std::vector<Triplet> entries;
    std::vector<double> rhs;
    int n_rows = 0;

    // Entry buffer for the row under construction.
    std::vector<Triplet> row_buf;
    double row_rhs = 0.0;

    void begin_row(double rhs_target) {
        row_buf.clear();
        row_rhs = rhs_target;
    }
    void add(int i, int j, int k, double coeff) {
        const std::size_t node = g.index(i, j, k);
        const std::int64_t d = dof.node_to_dof[node];
        if (d >= 0)
            row_buf.push_back(Triplet{n_rows, int(d), coeff});
        else
            row_rhs -= coeff * dirichlet[node];
    }
    // Emits the row unless it touches no unknowns.
    bool end_row() {
        if (row_buf.empty()) return false;
        for (const Triplet& t : row_buf) entries.push_back(t);
        rhs.push_back(row_rhs);
        ++n_rows;
        return true;
    }
};

AssembledSystem assemble(GridPtr grid, const WaveSpeed* speed,
                         const CarlemanParams& params,
                         const ScalarField* source_term, const CauchyData& data,
                         double epsilon, double kappa_scale, ResidualOp op) {
    validate(params);
    const SpaceTimeGrid& g = *grid;
    if (!(data.grid() == g))
        throw std::invalid_argument("assemble: trace data lives on a different grid");
    if (source_term &&
        (source_term->is_spatial() || !(source_term->grid() == g)))
        throw std::invalid_argument("assemble: source term shape mismatch");
    if (!(epsilon > 0.0)) throw std::invalid_argument("assemble: epsilon must be positive");
    if (!(kappa_scale > 0.0)) throw std::invalid_argument("assemble: kappa_scale must be positive");

    const int nx = g.nx(), ny = g.ny(), nt = g.nt();
    const double dx = g.dx(), dt = g.dt();
    const double sqrt_vol = std::sqrt(dx * dx * dt);
    const double inv_h2 = 1.0 / (dx * dx);
    const double inv_dt2 = 1.0 / (dt * dt);
    const double inv_2h = 0.5 / dx;

    AssembledSystem sys;
    sys.grid = grid;
    sys.dof_map = build_dof_map(g);

    // Dirichlet values for every eliminated node.
    std::vector<double> dirichlet(g.n_nodes(), 0.0);
    for (int k = 0; k < nt; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i)
                if (g.is_spatial_boundary(i, j))
                    dirichlet[g.index(i, j, k)] = dirichlet_trace_value(data, i, j, k);

    // Carleman weights: W_{lambda,eta} on all nodes, W_{lambda,0} per spatial node.
    const ScalarField w_eta = weight_field(params, grid, params.eta);
    std::vector<double> w_zero(g.n_spatial_nodes());
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            w_zero[g.spatial_index(i, j)] = carleman_weight(params, g.x(i), g.y(j), 0.0);

    RowAccumulator rows{g, sys.dof_map, dirichlet, {}, {}, 0, {}, 0.0};
    const std::size_t nnz_guess =
        7 * g.n_nodes() + 31 * g.n_nodes() + 3 * 2 * (nx + ny) * nt;
    rows.entries.reserve(nnz_guess);
    rows.rhs.reserve(g.n_nodes() * 11 / 10);

    // (a) Residual rows.
    double max_residual_weight = 0.0;
    const int k_lo = (op == ResidualOp::WaveOperator) ? 1 : 0;
    const int k_hi = (op == ResidualOp::WaveOperator) ? nt - 2 : nt - 1;
    for (int k = k_lo; k <= k_hi; ++k) {
        for (int j = 1; j < ny - 1; ++j) {
            for (int i = 1; i < nx - 1; ++i) {
                const double w = sqrt_vol * w_eta.at(i, j, k);
                max_residual_weight = std::max(max_residual_weight, w);
                const double rhs_target =
                    (op == ResidualOp::WaveOperator && source_term)
                        ? w * source_term->at(i, j, k)
                        : 0.0;
                rows.begin_row(rhs_target);
                if (op == ResidualOp::WaveOperator) {
                    const double c = speed ? speed->eval(g.x(i), g.y(j)) : 1.0;
                    rows.add(i, j, k - 1, w * c * inv_dt2);
                    rows.add(i, j, k + 1, w * c * inv_dt2);
                    rows.add(i, j, k, -2.0 * w * c * inv_dt2 + 4.0 * w * inv_h2);
                    rows.add(i + 1, j, k, -w * inv_h2);
                    rows.add(i - 1, j, k, -w * inv_h2);
                    rows.add(i, j + 1, k, -w * inv_h2);
                    rows.add(i, j - 1, k, -w * inv_h2);
                } else {
                    rows.add(i, j, k, 4.0 * w * inv_h2);
                    rows.add(i + 1, j, k, -w * inv_h2);
                    rows.add(i - 1, j, k, -w * inv_h2);
                    rows.add(i, j + 1, k, -w * inv_h2);
                    rows.add(i, j - 1, k, -w * inv_h2);
                }
                if (rows.end_row() && op == ResidualOp::WaveOperator) {
                    sys.residual_row_node.push_back(g.index(i, j, k));
                    sys.residual_row_weight.push_back(w);
                }
            }
        }
    }
    sys.n_residual_rows = rows.n_rows;

    // (b) Regularization rows: sqrt(eps) W_{lambda,0} D_alpha over all nodes.
    const double sqrt_eps = std::sqrt(epsilon);
    const auto alphas = multi_indices_up_to(2);
    StencilEntry3D st[9];
    for (int k = 0; k < nt; ++k) {
        for (int j = 0; j < ny; ++j) {
            for (int i = 0; i < nx; ++i) {
                const double w = sqrt_eps * sqrt_vol * w_zero[g.spatial_index(i, j)];
                for (const MultiIndex& a : alphas) {
                    const int n = derivative_entries(g, a, i, j, k, st);
                    rows.begin_row(0.0);
                    for (int q = 0; q < n; ++q)
                        rows.add(st[q].i, st[q].j, st[q].k, w * st[q].coeff);
                    rows.end_row();
                }
            }
        }
    }
    sys.n_rows_objective = rows.n_rows;

    // (c) Constraint rows, weight kappa.
    const double kappa = kappa_scale * max_residual_weight;
    sys.kappa = kappa;

    // Neumann: outward one-sided difference into the interior.
    struct FaceDir {
        Face face;
        int di, dj;  // inward unit step
    };
    const FaceDir face_dirs[4] = {{Face::West, 1, 0},
                                  {Face::East, -1, 0},
                                  {Face::South, 0, 1},
                                  {Face::North, 0, -1}};
    for (const FaceDir& fd : face_dirs) {
        for (int a = 0; a < data.face_nodes(fd.face); ++a) {
            int bi, bj;
            data.face_node(fd.face, a, &bi, &bj);
            for (int k = 0; k < nt; ++k) {
                rows.begin_row(kappa * data.g(fd.face, a, k));
                rows.add(bi, bj, k, kappa * 3.0 * inv_2h);
                rows.add(bi + fd.di, bj + fd.dj, k, kappa * -4.0 * inv_2h);
                rows.add(bi + 2 * fd.di, bj + 2 * fd.dj, k, kappa * inv_2h);
                rows.end_row();
            }
        }
    }

    // Initial velocity (u^1 - u^0)/dt = 0 for interior spatial nodes.
    for (int j = 1; j < ny - 1; ++j) {
        for (int i = 1; i < nx - 1; ++i) {
            rows.begin_row(0.0);
            rows.add(i, j, 1, kappa / dt);
            rows.add(i, j, 0, -kappa / dt);
            rows.end_row();
        }
    }

    TripletMatrix tm(rows.n_rows, int(sys.dof_map.n_unknowns()));
    tm.reserve(rows.entries.size());
    for (const Triplet& t : rows.entries) tm.add(t.row, t.col, t.value);
    rows.entries.clear();
    rows.entries.shrink_to_fit();

    sys.A = CsrMatrix::from_triplets(tm);
    sys.At = sys.A.transpose();
    sys.b = std::move(rows.rhs);

    // Fixed part of the rhs (source contribution removed).
    sys.b_fixed = sys.b;
    for (std::size_t r = 0; r < sys.residual_row_node.size(); ++r)
        sys.b_fixed[r] -= (source_term ? sys.residual_row_weight[r] *
                                             source_term->values()[sys.residual_row_node[r]]
                                       : 0.0);
    return sys;
}

LsqOptions to_lsq_options(const SolverOptions& s, const std::vector<double>* warm) {
    LsqOptions o;
    o.tol = s.tol;
    o.max_iter = s.max_iter;
    o.warm_start = warm;
    return o;
}

std::pair<std::vector<double>, LsqReport> solve_system(
    const AssembledSystem& sys, const SolverOptions& solver,
    const std::vector<double>* warm) {
    auto [x, report] = cgls_solve(sys.A, sys.At, sys.b, to_lsq_options(solver, warm));
    for (double v : x)
        if (!std::isfinite(v))
            throw std::runtime_error("qrm solve produced a non-finite unknown");
    if (solver.strict && !report.converged)
        throw std::runtime_error(
            "qrm solver did not reach tolerance after " +
            std::to_string(report.iterations) + " iterations");
    return {std::move(x), report};
}

}  // namespace

AssembledSystem assemble_step_system(GridPtr grid, const ModelSpec& model,
                                     const CarlemanParams& params,
                                     const ScalarField& source_term,
                                     const CauchyData& data, double epsilon,
                                     double kappa_scale) {
    return assemble(std::move(grid), &model.speed, params, &source_term, data,
                    epsilon, kappa_scale, ResidualOp::WaveOperator);
}

AssembledSystem assemble_initial_system(GridPtr grid, const CarlemanParams& params,
                                        const CauchyData& data, double epsilon,
                                        double kappa_scale) {
    return assemble(std::move(grid), nullptr, params, nullptr, data, epsilon,
                    kappa_scale, ResidualOp::NegativeLaplacian);
}

void refresh_rhs(AssembledSystem& sys, const ScalarField& source_term) {
    if (source_term.is_spatial() || !(source_term.grid() == *sys.grid))
        throw std::invalid_argument("refresh_rhs: source term shape mismatch");
    sys.b = sys.b_fixed;
    for (std::size_t r = 0; r < sys.residual_row_node.size(); ++r)
        sys.b[r] += sys.residual_row_weight[r] *
                    source_term.values()[sys.residual_row_node[r]];
}

double evaluate_objective(const AssembledSystem& sys, const std::vector<double>& x) {
    const std::vector<double> ax = matvec(sys.A, x);
    double acc = 0.0;
    for (std::size_t r = 0; r < sys.n_rows_objective; ++r) {
        const double d = ax[r] - sys.b[r];
        acc += d * d;
    }
    return acc;
}

std::vector<double> field_to_dofs(const ScalarField& u, const DofMap& dof_map) {
    std::vector<double> x(dof_map.n_unknowns());
    for (std::size_t d = 0; d < x.size(); ++d)
        x[d] = u.values()[dof_map.dof_to_node[d]];
    return x;
}

ScalarField dofs_to_field(const std::vector<double>& x, const DofMap& dof_map,
                          GridPtr grid, const CauchyData& data) {
    if (x.size() != dof_map.n_unknowns())
        throw std::invalid_argument("dofs_to_field: size mismatch");
    ScalarField u = ScalarField::space_time(grid);
    const SpaceTimeGrid& g = *grid;
    for (int k = 0; k < g.nt(); ++k)
        for (int j = 0; j < g.ny(); ++j)
            for (int i = 0; i < g.nx(); ++i) {
                const std::size_t node = g.index(i, j, k);
                const std::int64_t d = dof_map.node_to_dof[node];
                u.values()[node] =
                    d >= 0 ? x[d] : dirichlet_trace_value(data, i, j, k);
            }
    return u;
}

ScalarField nonlinearity_field(const ModelSpec& model, const ScalarField& u) {
    if (u.is_spatial())
        throw std::invalid_argument("nonlinearity_field: need a space-time field");
    const SpaceTimeGrid& g = u.grid();
    ScalarField s = ScalarField::space_time(u.grid_ptr());
    const MultiIndex dt_idx{0, 0, 1}, dx_idx{1, 0, 0}, dy_idx{0, 1, 0};
    for (int k = 0; k < g.nt(); ++k) {
        const double t = g.t(k);
        for (int j = 0; j < g.ny(); ++j) {
            for (int i = 0; i < g.nx(); ++i) {
                const double ut = apply_derivative(u, dt_idx, i, j, k);
                const double ux = apply_derivative(u, dx_idx, i, j, k);
                const double uy = apply_derivative(u, dy_idx, i, j, k);
                s.at(i, j, k) = model.nonlinearity.eval(g.x(i), g.y(j), t,
                                                        u.at(i, j, k), ut, ux, uy);
            }
        }
    }
    s.check_finite("nonlinearity field");
    return s;
}

ScalarField initial_guess(GridPtr grid, const CauchyData& data,
                          const CarlemanParams& params, double epsilon,
                          double kappa_scale, const SolverOptions& solver,
                          LsqReport* report) {
    AssembledSystem sys =
        assemble_initial_system(grid, params, data, epsilon, kappa_scale);
    auto [x, rep] = solve_system(sys, solver, nullptr);
    if (report) *report = rep;
    return dofs_to_field(x, sys.dof_map, grid, data);
}

ScalarField iterate_step(const ScalarField& u_n, const QrmConfig& config,
                         const ModelSpec& model, const CauchyData& data,
                         LsqReport* report) {
    const ScalarField s = nonlinearity_field(model, u_n);
    AssembledSystem sys =
        assemble_step_system(config.omega_grid, model, config.carleman, s, data,
                             config.epsilon, config.kappa_scale);
    const std::vector<double> warm = field_to_dofs(u_n, sys.dof_map);
    auto [x, rep] = solve_system(sys, config.solver, &warm);
    if (report) *report = rep;
    return dofs_to_field(x, sys.dof_map, config.omega_grid, data);
}

ScalarField extract_initial_slice(const ScalarField& u) {
    if (u.is_spatial())
        throw std::invalid_argument("extract_initial_slice: already spatial");
    ScalarField p = ScalarField::spatial(u.grid_ptr());
    const SpaceTimeGrid& g = u.grid();
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i)
            p.at(i, j) = u.at(i, j, 0);
    return p;
}

std::vector<double> IterationHistory::consecutive_diffs() const {
    std::vector<double> d;
    for (const IterationRecord& r : records)
        if (r.n > 0) d.push_back(r.consec_diff_inf);
    return d;
}

void IterationHistory::write_jsonl(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open file: " + path);
    for (const IterationRecord& r : records) {
        nlohmann::json j;
        j["n"] = r.n;
        if (std::isfinite(r.consec_diff_inf))
            j["consec_diff_inf"] = r.consec_diff_inf;
        else
            j["consec_diff_inf"] = nullptr;
        if (std::isfinite(r.rel_l2_err))
            j["rel_l2_err"] = r.rel_l2_err;
        else
            j["rel_l2_err"] = nullptr;
        j["residual"] = r.objective;
        j["solver_iters"] = r.solver.iterations;
        j["solver_converged"] = r.solver.converged;
        out << j.dump() << "\n";
    }
}

AlgorithmResult run_algorithm(const QrmConfig& config, const ModelSpec& model,
                              const CauchyData& data, const ScalarField* p_star) {
    if (!config.omega_grid)
        throw std::invalid_argument("run_algorithm: missing grid");
    validate_for_domain(config.carleman, *config.omega_grid);
    if (config.n0 < 0) throw std::invalid_argument("run_algorithm: n0 must be >= 0");
    const double nan = std::numeric_limits<double>::quiet_NaN();

    IterationHistory history;

    auto record = [&](int n, const ScalarField& u, double consec, double objective,
                      const LsqReport& rep) {
        IterationRecord r{n, extract_initial_slice(u), consec, nan, objective, rep};
        if (p_star) r.rel_l2_err = rel_l2_error(r.p_slice, *p_star);
        history.records.push_back(std::move(r));
    };

    // Initial guess.
    AssembledSystem init_sys = assemble_initial_system(
        config.omega_grid, config.carleman, data, config.epsilon, config.kappa_scale);
    auto [x, rep] = solve_system(init_sys, config.solver, nullptr);
    ScalarField u = dofs_to_field(x, init_sys.dof_map, config.omega_grid, data);
    record(0, u, nan, evaluate_objective(init_sys, x), rep);

    if (config.n0 > 0) {
        // The step matrix does not depend on the iterate; assemble once.
        ScalarField s = nonlinearity_field(model, u);
        AssembledSystem step_sys =
            assemble_step_system(config.omega_grid, model, config.carleman, s, data,
                                 config.epsilon, config.kappa_scale);
        for (int n = 1; n <= config.n0; ++n) {
            if (n > 1) {
                s = nonlinearity_field(model, u);
                refresh_rhs(step_sys, s);
            }
            std::vector<double> warm = field_to_dofs(u, step_sys.dof_map);
            auto [xs, reps] = solve_system(step_sys, config.solver, &warm);
            ScalarField u_next =
                dofs_to_field(xs, step_sys.dof_map, config.omega_grid, data);
            const ScalarField p_prev = extract_initial_slice(u);
            const ScalarField p_next = extract_initial_slice(u_next);
            double diff = 0.0;
            for (std::size_t q = 0; q < p_prev.values().size(); ++q)
                diff = std::max(diff,
                                std::abs(p_next.values()[q] - p_prev.values()[q]));
            u = std::move(u_next);
            record(n, u, diff, evaluate_objective(step_sys, xs), reps);
        }
    }

    AlgorithmResult result{u, extract_initial_slice(u), std::move(history)};
    return result;
}

}  // namespace cwqr
