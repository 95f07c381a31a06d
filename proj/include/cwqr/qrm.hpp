#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "cwqr/carleman.hpp"
#include "cwqr/forward.hpp"
#include "cwqr/grid.hpp"
#include "cwqr/model.hpp"
#include "cwqr/sparse.hpp"

namespace cwqr {

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SolverOptions {
    double tol = 1e-10;
    long max_iter = -1;   // -1: 10 * n_cols
    bool strict = false;  // throw when the tolerance is not reached
};

struct QrmConfig {
    CarlemanParams carleman;
    double epsilon = 1e-14;    // regularization weight
    int n0 = 7;                // outer fixed-point iterations
    double kappa_scale = 1e3;  // kappa = kappa_scale * max residual row weight
    SolverOptions solver;
    GridPtr omega_grid;
};

struct DofMap {
    std::vector<std::int64_t> node_to_dof;  // -1 for eliminated Dirichlet nodes
    std::vector<std::size_t> dof_to_node;
    std::size_t n_unknowns() const { return dof_to_node.size(); }
};

/// A weighted least-squares system over the non-Dirichlet unknowns.
/// Row blocks in order: PDE residual rows, H^2 regularization rows,
/// kappa-weighted Neumann and initial-velocity rows.
struct AssembledSystem {
    CsrMatrix A;
    CsrMatrix At;
    std::vector<double> b;
    DofMap dof_map;
    GridPtr grid;
    std::size_t n_residual_rows = 0;
    std::size_t n_rows_objective = 0;  // residual + regularization rows
    double kappa = 0.0;
    // Residual-row source hooks: b[row] = b_fixed[row] + weight * s(node).
    std::vector<std::size_t> residual_row_node;
    std::vector<double> residual_row_weight;
    std::vector<double> b_fixed;
};

/// Dirichlet value at a boundary node from the trace data; corner samples
/// are averaged over the two adjacent faces.
double dirichlet_trace_value(const CauchyData& data, int i, int j, int k);

/// System for one fixed-point step: residual rows W(c u_tt - lap u) = W s.
AssembledSystem assemble_step_system(GridPtr grid, const ModelSpec& model,
                                     const CarlemanParams& params,
                                     const ScalarField& source_term,
                                     const CauchyData& data, double epsilon,
                                     double kappa_scale);

/// System for the initial guess: residual rows W(-lap u) = 0 on every layer.
AssembledSystem assemble_initial_system(GridPtr grid, const CarlemanParams& params,
                                        const CauchyData& data, double epsilon,
                                        double kappa_scale);

/// Rewrites sys.b for a new source term without reassembling the matrix.
void refresh_rhs(AssembledSystem& sys, const ScalarField& source_term);

/// Objective value over the residual + regularization blocks at x.
double evaluate_objective(const AssembledSystem& sys, const std::vector<double>& x);

std::vector<double> field_to_dofs(const ScalarField& u, const DofMap& dof_map);

/// Unknowns back onto the grid, Dirichlet nodes reinstated from the data.
ScalarField dofs_to_field(const std::vector<double>& x, const DofMap& dof_map,
                          GridPtr grid, const CauchyData& data);

/// Pointwise F(x, t, u, u_t, grad u) with centered differences (one-sided at
/// the box faces). Throws on non-finite output.
ScalarField nonlinearity_field(const ModelSpec& model, const ScalarField& u);

ScalarField initial_guess(GridPtr grid, const CauchyData& data,
                          const CarlemanParams& params, double epsilon,
                          double kappa_scale, const SolverOptions& solver,
                          LsqReport* report = nullptr);

ScalarField iterate_step(const ScalarField& u_n, const QrmConfig& config,
                         const ModelSpec& model, const CauchyData& data,
                         LsqReport* report = nullptr);

ScalarField extract_initial_slice(const ScalarField& u);

struct IterationRecord {
    int n = 0;  // 0 is the initial guess
    ScalarField p_slice;
    double consec_diff_inf = 0.0;  // NaN for n = 0
    double rel_l2_err = 0.0;       // NaN when the true source is unknown
    double objective = 0.0;
    LsqReport solver;
};

struct IterationHistory {
    std::vector<IterationRecord> records;
    std::vector<double> consecutive_diffs() const;
    void write_jsonl(const std::string& path) const;
};

struct AlgorithmResult {
    ScalarField u_comp;
    ScalarField p_comp;
    IterationHistory history;
};

/// The full fixed-point loop: initial guess, n0 minimization steps, then
/// p_comp = u(.,0). The step matrix is assembled once; each step only
/// refreshes the right-hand side and warm-starts from the previous iterate.
AlgorithmResult run_algorithm(const QrmConfig& config, const ModelSpec& model,
                              const CauchyData& data,
                              const ScalarField* p_star = nullptr);

}  // namespace cwqr
