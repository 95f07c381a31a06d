#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "cwqr/forward.hpp"
#include "cwqr/grid.hpp"
#include "cwqr/model.hpp"
#include "cwqr/qrm.hpp"

namespace cwqr {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MissingInputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Flat key = value experiment description (TOML-style, no nesting).
struct ExperimentConfig {
    // Problem.
    std::string test = "1";  // 1|2|3|4|custom
    std::string source_expr;
    std::string nonlinearity;  // empty: follow test; test1..test4|linear|custom
    std::string nonlinearity_expr;
    double wave_speed = 1.0;
    bool truncate = false;
    double c3m = 0.0;

    // Geometry and discretization.
    std::string grid = "desk";  // desk|paper|custom
    int nx = 0, ny = 0, nt = 0;
    double omega_x_min = -1.0, omega_x_max = 1.0;
    double omega_y_min = -1.0, omega_y_max = 1.0;
    double padding_radius = 4.0;  // G = (-R, R)^2
    double final_time = 2.0;

    // Data.
    double delta = 0.1;
    std::uint64_t seed = 1;

    // Inversion.
    double lambda = 2.1;
    double eta = 0.5;
    double x0_x = 0.0, x0_y = -2.5;
    double eps_domain = 0.1;
    double epsilon = 1e-14;
    int n0 = 7;
    double kappa_scale = 1e3;
    double solver_tol = 1e-10;
    long solver_max_iter = -1;
    bool solver_strict = false;

    // Output.
    std::string out_dir = "out";
    bool debug_export_system = false;
};

ExperimentConfig load_config_file(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

/// Canonical sorted key=value dump used for hashing and the manifest.
std::string canonical_config(const ExperimentConfig& cfg);
std::string config_hash(const ExperimentConfig& cfg);

/// Desk-scale benchmark preset for one of the four tests.
ExperimentConfig desk_preset(int test_id);

struct Experiment {
    ExperimentConfig cfg;
    GridPtr omega;
    GridPtr padded;
    ModelSpec model;
    QrmConfig qrm;
    bool has_true_source = false;
};

/// Validates the configuration and builds grids, model and solver settings.
Experiment resolve_experiment(const ExperimentConfig& cfg);

// Pipeline stages. Both return the data they produced for chaining.
CauchyData cmd_simulate(const Experiment& ex);
struct InversionArtifacts {
    ScalarField p_comp;
    IterationHistory history;
};
InversionArtifacts cmd_invert(const Experiment& ex, const CauchyData& noisy);

/// Reads the trace file written by cmd_simulate (exit-code-3 error if absent).
CauchyData load_traces(const Experiment& ex);

/// 8-bit PGM with a JSON sidecar holding the value range.
void write_pgm(const ScalarField& spatial, const std::string& path,
               const std::string& meta_path);

void write_manifest(const Experiment& ex, const std::string& command,
                    const std::string& path);

/// Entry point for the command-line tool. Returns the process exit code:
/// 0 ok, 2 config error, 3 missing input, 4 solver failure.
int run_cli(const std::vector<std::string>& args);

}  // namespace cwqr
