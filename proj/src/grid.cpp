#include "cwqr/grid.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace cwqr {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

SpaceTimeGrid::SpaceTimeGrid(GridBounds bounds, int nx, int ny, int nt, double T)
    : bounds_(bounds), nx_(nx), ny_(ny), nt_(nt), T_(T) {
    require(nx >= 3 && ny >= 3 && nt >= 3, "grid: need at least 3 nodes per axis");
    require(bounds.x_max > bounds.x_min && bounds.y_max > bounds.y_min,
            "grid: degenerate spatial extents");
    require(T > 0.0, "grid: final time must be positive");
    const double hx = (bounds.x_max - bounds.x_min) / (nx - 1);
    const double hy = (bounds.y_max - bounds.y_min) / (ny - 1);
    require(std::abs(hx - hy) <= 1e-12 * std::max(hx, hy),
            "grid: cells must be square (x and y spacings differ)");
    dx_ = hx;
    dt_ = T / (nt - 1);
}

NodeClass SpaceTimeGrid::classify(int i, int j, int k) const {
    if (i < 0 || j < 0 || k < 0 || i >= nx_ || j >= ny_ || k >= nt_)
        throw std::out_of_range("grid: node index out of range");
    if (is_spatial_boundary(i, j)) return NodeClass::SpatialBoundary;
    if (k == 0) return NodeClass::InitialLayer;
    if (k == nt_ - 1) return NodeClass::FinalLayer;
    return NodeClass::Interior;
}

bool SpaceTimeGrid::operator==(const SpaceTimeGrid& other) const {
    return nx_ == other.nx_ && ny_ == other.ny_ && nt_ == other.nt_ &&
           T_ == other.T_ && bounds_.x_min == other.bounds_.x_min &&
           bounds_.x_max == other.bounds_.x_max &&
           bounds_.y_min == other.bounds_.y_min &&
           bounds_.y_max == other.bounds_.y_max;
}

GridPtr make_grid(GridBounds bounds, int nx, int ny, int nt, double T) {
    return std::make_shared<SpaceTimeGrid>(bounds, nx, ny, nt, T);
}

double cfl_ratio(const SpaceTimeGrid& grid) { return grid.dt() / grid.dx(); }

ScalarField::ScalarField(GridPtr grid, int layers)
    : grid_(std::move(grid)), layers_(layers) {
    values_.assign(grid_->n_spatial_nodes() * layers_, 0.0);
}

ScalarField ScalarField::space_time(GridPtr grid) {
    int nt = grid->nt();
    return ScalarField(std::move(grid), nt);
}

ScalarField ScalarField::spatial(GridPtr grid) {
    return ScalarField(std::move(grid), 1);
}

void ScalarField::fill(double v) {
    for (double& x : values_) x = v;
}

void ScalarField::check_finite(const char* what) const {
    for (std::size_t n = 0; n < values_.size(); ++n) {
        if (!std::isfinite(values_[n])) {
            throw std::runtime_error(std::string(what) +
                                     ": non-finite value at flat index " +
                                     std::to_string(n));
        }
    }
}

bool ScalarField::same_shape(const ScalarField& other) const {
    return layers_ == other.layers_ && *grid_ == *other.grid_;
}

double laplacian_stencil(const ScalarField& f, int i, int j, int k) {
    const auto& g = f.grid();
    if (i <= 0 || j <= 0 || i >= g.nx() - 1 || j >= g.ny() - 1)
        throw std::invalid_argument("laplacian_stencil: node lacks a spatial neighbor");
    const double h2 = g.dx() * g.dx();
    return (f.at(i + 1, j, k) + f.at(i - 1, j, k) + f.at(i, j + 1, k) +
            f.at(i, j - 1, k) - 4.0 * f.at(i, j, k)) / h2;
}

double dtt_stencil(const ScalarField& f, int i, int j, int k) {
    if (f.is_spatial())
        throw std::invalid_argument("dtt_stencil: spatial field has no time axis");
    const auto& g = f.grid();
    if (k < 1 || k > g.nt() - 2)
        throw std::invalid_argument("dtt_stencil: needs an interior time layer");
    const double dt2 = g.dt() * g.dt();
    return (f.at(i, j, k + 1) - 2.0 * f.at(i, j, k) + f.at(i, j, k - 1)) / dt2;
}

Stencil1D fd_stencil(int deriv, int i, int n, double h) {
    Stencil1D s;
    switch (deriv) {
        case 0:
            s.n = 1;
            s.off[0] = 0;
            s.c[0] = 1.0;
            return s;
        case 1:
            if (i > 0 && i < n - 1) {
                s.n = 2;
                s.off[0] = -1; s.c[0] = -0.5 / h;
                s.off[1] = +1; s.c[1] = +0.5 / h;
            } else if (i == 0) {
                s.n = 3;
                s.off[0] = 0; s.c[0] = -1.5 / h;
                s.off[1] = 1; s.c[1] = 2.0 / h;
                s.off[2] = 2; s.c[2] = -0.5 / h;
            } else {
                s.n = 3;
                s.off[0] = 0;  s.c[0] = 1.5 / h;
                s.off[1] = -1; s.c[1] = -2.0 / h;
                s.off[2] = -2; s.c[2] = 0.5 / h;
            }
            return s;
        case 2: {
            const double h2 = h * h;
            if (i > 0 && i < n - 1) {
                s.n = 3;
                s.off[0] = -1; s.c[0] = 1.0 / h2;
                s.off[1] = 0;  s.c[1] = -2.0 / h2;
                s.off[2] = +1; s.c[2] = 1.0 / h2;
            } else if (i == 0) {
                s.n = 3;
                s.off[0] = 0; s.c[0] = 1.0 / h2;
                s.off[1] = 1; s.c[1] = -2.0 / h2;
                s.off[2] = 2; s.c[2] = 1.0 / h2;
            } else {
                s.n = 3;
                s.off[0] = 0;  s.c[0] = 1.0 / h2;
                s.off[1] = -1; s.c[1] = -2.0 / h2;
                s.off[2] = -2; s.c[2] = 1.0 / h2;
            }
            return s;
        }
        default:
            throw std::invalid_argument("fd_stencil: derivative order must be 0, 1 or 2");
    }
}

std::vector<MultiIndex> multi_indices_up_to(int s) {
    if (s < 0 || s > 2)
        throw std::invalid_argument("multi_indices_up_to: s must be in {0,1,2}");
    std::vector<MultiIndex> out;
    for (int total = 0; total <= s; ++total)
        for (int ax = total; ax >= 0; --ax)
            for (int ay = total - ax; ay >= 0; --ay)
                out.push_back(MultiIndex{ax, ay, total - ax - ay});
    return out;
}

int derivative_entries(const SpaceTimeGrid& grid, MultiIndex alpha,
                       int i, int j, int k, StencilEntry3D out[9]) {
    const Stencil1D sx = fd_stencil(alpha.ax, i, grid.nx(), grid.dx());
    const Stencil1D sy = fd_stencil(alpha.ay, j, grid.ny(), grid.dx());
    const Stencil1D st = fd_stencil(alpha.at, k, grid.nt(), grid.dt());
    int count = 0;
    for (int a = 0; a < sx.n; ++a)
        for (int b = 0; b < sy.n; ++b)
            for (int c = 0; c < st.n; ++c) {
                out[count++] = StencilEntry3D{i + sx.off[a], j + sy.off[b],
                                              k + st.off[c],
                                              sx.c[a] * sy.c[b] * st.c[c]};
            }
    return count;
}

double apply_derivative(const ScalarField& f, MultiIndex alpha,
                        int i, int j, int k) {
    if (f.is_spatial() && alpha.at != 0)
        throw std::invalid_argument("apply_derivative: spatial field has no time axis");
    StencilEntry3D e[9];
    const SpaceTimeGrid& g = f.grid();
    // For a spatial field, reuse the grid's time axis metadata with nt=1 demoted
    // to the identity stencil (alpha.at == 0 guarantees a single entry of 1).
    const int n = derivative_entries(g, alpha, i, j, f.is_spatial() ? 1 : k, e);
    double v = 0.0;
    for (int q = 0; q < n; ++q)
        v += e[q].coeff * f.at(e[q].i, e[q].j, f.is_spatial() ? 0 : e[q].k);
    return v;
}

namespace {

class FileHandle {
public:
    FileHandle(const std::string& path, const char* mode) : f_(std::fopen(path.c_str(), mode)) {
        if (!f_) throw std::runtime_error("cannot open file: " + path);
    }
    ~FileHandle() {
        if (f_) std::fclose(f_);
    }
    std::FILE* get() { return f_; }

private:
    std::FILE* f_;
};

void write_slice_csv(std::FILE* f, const ScalarField& field, int k) {
    const auto& g = field.grid();
    for (int j = 0; j < g.ny(); ++j) {
        for (int i = 0; i < g.nx(); ++i) {
            std::fprintf(f, i + 1 == g.nx() ? "%.17g" : "%.17g,", field.at(i, j, k));
        }
        std::fprintf(f, "\n");
    }
}

}  // namespace

void write_csv(const ScalarField& f, const std::string& path) {
    if (!f.is_spatial())
        throw std::invalid_argument("write_csv: use write_csv_slices for space-time fields");
    FileHandle fh(path, "w");
    write_slice_csv(fh.get(), f, 0);
}

void write_csv_slices(const ScalarField& f, const std::string& prefix) {
    char name[32];
    for (int k = 0; k < f.layers(); ++k) {
        std::snprintf(name, sizeof(name), "_k%04d.csv", k);
        FileHandle fh(prefix + name, "w");
        write_slice_csv(fh.get(), f, k);
    }
}

void write_binary(const ScalarField& f, const std::string& path) {
    FileHandle fh(path, "wb");
    const std::int64_t header[3] = {f.grid().nx(), f.grid().ny(), f.layers()};
    std::fwrite(header, sizeof(std::int64_t), 3, fh.get());
    std::fwrite(f.values().data(), sizeof(double), f.values().size(), fh.get());
}

RawFieldDump read_binary_dump(const std::string& path) {
    FileHandle fh(path, "rb");
    RawFieldDump d;
    std::int64_t header[3];
    if (std::fread(header, sizeof(std::int64_t), 3, fh.get()) != 3)
        throw std::runtime_error("truncated field dump: " + path);
    d.nx = header[0];
    d.ny = header[1];
    d.n_layers = header[2];
    if (d.nx <= 0 || d.ny <= 0 || d.n_layers <= 0)
        throw std::runtime_error("invalid field dump header: " + path);
    const std::size_t count = std::size_t(d.nx) * d.ny * d.n_layers;
    d.values.resize(count);
    if (std::fread(d.values.data(), sizeof(double), count, fh.get()) != count)
        throw std::runtime_error("truncated field dump: " + path);
    return d;
}

ScalarField read_binary(const std::string& path, GridPtr grid) {
    RawFieldDump d = read_binary_dump(path);
    if (d.nx != grid->nx() || d.ny != grid->ny())
        throw std::runtime_error("field dump does not match grid: " + path);
    ScalarField f = (d.n_layers == 1) ? ScalarField::spatial(grid)
                                      : ScalarField::space_time(grid);
    if (std::int64_t(f.layers()) != d.n_layers)
        throw std::runtime_error("field dump layer count mismatch: " + path);
    f.values() = std::move(d.values);
    return f;
}

}  // namespace cwqr
