#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace cwqr {

/// Classification of a space-time node. Spatial boundary wins over the
/// time layers so that Dirichlet bookkeeping sees every boundary column.
enum class NodeClass { Interior, SpatialBoundary, InitialLayer, FinalLayer };

struct GridBounds {
    double x_min = -1.0;
    double x_max = 1.0;
    double y_min = -1.0;
    double y_max = 1.0;
};

/// Uniform tensor grid over a rectangle times [0, T]. Cells must be square
/// in space (single spacing d_x); node layout is row-major with x fastest,
/// then y, then t.
class SpaceTimeGrid {
public:
    SpaceTimeGrid(GridBounds bounds, int nx, int ny, int nt, double T);

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    int nt() const { return nt_; }
    double final_time() const { return T_; }
    double dx() const { return dx_; }
    double dt() const { return dt_; }
    const GridBounds& bounds() const { return bounds_; }

    double x(int i) const { return bounds_.x_min + i * dx_; }
    double y(int j) const { return bounds_.y_min + j * dx_; }
    double t(int k) const { return k * dt_; }

    std::size_t n_nodes() const { return std::size_t(nx_) * ny_ * nt_; }
    std::size_t n_spatial_nodes() const { return std::size_t(nx_) * ny_; }

    std::size_t index(int i, int j, int k) const {
        return (std::size_t(k) * ny_ + j) * nx_ + i;
    }
    std::size_t spatial_index(int i, int j) const {
        return std::size_t(j) * nx_ + i;
    }

    bool is_spatial_boundary(int i, int j) const {
        return i == 0 || j == 0 || i == nx_ - 1 || j == ny_ - 1;
    }

    /// Deterministic partition of the nodes; throws std::out_of_range for
    /// indices outside the grid.
    NodeClass classify(int i, int j, int k) const;

    bool operator==(const SpaceTimeGrid& other) const;

private:
    GridBounds bounds_;
    int nx_, ny_, nt_;
    double T_;
    double dx_, dt_;
};

using GridPtr = std::shared_ptr<const SpaceTimeGrid>;

GridPtr make_grid(GridBounds bounds, int nx, int ny, int nt, double T);

double cfl_ratio(const SpaceTimeGrid& grid);

/// Node values of a function on a grid: either a full space-time field
/// (nx*ny*nt values) or a single spatial layer (nx*ny values).
class ScalarField {
public:
    static ScalarField space_time(GridPtr grid);
    static ScalarField spatial(GridPtr grid);

    const SpaceTimeGrid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    int layers() const { return layers_; }
    bool is_spatial() const { return layers_ == 1; }
    std::size_t size() const { return values_.size(); }

    double at(int i, int j, int k = 0) const { return values_[flat(i, j, k)]; }
    double& at(int i, int j, int k = 0) { return values_[flat(i, j, k)]; }

    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    void fill(double v);

    /// Throws std::runtime_error naming `what` if any entry is NaN/Inf.
    void check_finite(const char* what) const;

    bool same_shape(const ScalarField& other) const;

private:
    ScalarField(GridPtr grid, int layers);
    std::size_t flat(int i, int j, int k) const {
        return (std::size_t(k) * grid_->ny() + j) * grid_->nx() + i;
    }

    GridPtr grid_;
    int layers_;
    std::vector<double> values_;
};

/// 5-point Laplacian at a node with all four spatial neighbors.
double laplacian_stencil(const ScalarField& f, int i, int j, int k);

/// Centered second time difference, defined for 1 <= k <= nt-2.
double dtt_stencil(const ScalarField& f, int i, int j, int k);

/// One-dimensional finite-difference stencil: centered in the interior,
/// second-order one-sided at the ends (first-order for second derivatives).
struct Stencil1D {
    int n = 0;
    int off[3] = {0, 0, 0};
    double c[3] = {0.0, 0.0, 0.0};
};

Stencil1D fd_stencil(int deriv, int i, int n, double h);

/// Multi-index (ax, ay, at) for mixed space-time derivatives, |alpha| <= 2.
struct MultiIndex {
    int ax = 0, ay = 0, at = 0;
    int order() const { return ax + ay + at; }
};

/// The 10 multi-indices with |alpha| <= s for s in {0, 1, 2}.
std::vector<MultiIndex> multi_indices_up_to(int s);

struct StencilEntry3D {
    int i, j, k;
    double coeff;
};

/// Expands D_alpha at (i,j,k) as a tensor product of 1-D stencils.
/// Writes at most 9 entries into `out`, returns the count.
int derivative_entries(const SpaceTimeGrid& grid, MultiIndex alpha,
                       int i, int j, int k, StencilEntry3D out[9]);

/// Applies D_alpha to a field at one node (spatial fields: alpha.at must be 0).
double apply_derivative(const ScalarField& f, MultiIndex alpha,
                        int i, int j, int k);

// Serialization.
// CSV: one row per y (x across columns); one file per time slice.
// Binary: header nx, ny, n_layers as little-endian int64, then doubles.
void write_csv(const ScalarField& f, const std::string& path);
void write_csv_slices(const ScalarField& f, const std::string& prefix);
void write_binary(const ScalarField& f, const std::string& path);

struct RawFieldDump {
    std::int64_t nx = 0, ny = 0, n_layers = 0;
    std::vector<double> values;
};

RawFieldDump read_binary_dump(const std::string& path);
ScalarField read_binary(const std::string& path, GridPtr grid);

}  // namespace cwqr
