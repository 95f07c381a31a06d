#include "cwqr/forward.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <random>
#include <stdexcept>

namespace cwqr {

const char* face_name(Face f) {
    switch (f) {
        case Face::West: return "west";
        case Face::East: return "east";
        case Face::South: return "south";
        case Face::North: return "north";
    }
    return "?";
}

CauchyData::CauchyData(GridPtr omega_grid) : grid_(std::move(omega_grid)) {
    const std::size_t per_layer = 2 * (std::size_t(grid_->nx()) + grid_->ny());
    f_.assign(per_layer * grid_->nt(), 0.0);
    g_.assign(per_layer * grid_->nt(), 0.0);
}

int CauchyData::face_nodes(Face f) const {
    return (f == Face::West || f == Face::East) ? grid_->ny() : grid_->nx();
}

std::size_t CauchyData::sample_index(Face face, int a, int k) const {
    const int ny = grid_->ny(), nx = grid_->nx(), nt = grid_->nt();
    if (a < 0 || a >= face_nodes(face) || k < 0 || k >= nt)
        throw std::out_of_range("cauchy data sample out of range");
    std::size_t base = 0;
    switch (face) {
        case Face::West: base = 0; break;
        case Face::East: base = std::size_t(ny); break;
        case Face::South: base = 2 * std::size_t(ny); break;
        case Face::North: base = 2 * std::size_t(ny) + nx; break;
    }
    return (base + a) * nt + k;
}

void CauchyData::face_node(Face face, int a, int* i, int* j) const {
    switch (face) {
        case Face::West: *i = 0; *j = a; break;
        case Face::East: *i = grid_->nx() - 1; *j = a; break;
        case Face::South: *i = a; *j = 0; break;
        case Face::North: *i = a; *j = grid_->ny() - 1; break;
    }
}

void CauchyData::write_csv(const std::string& path) const {
    std::FILE* out = std::fopen(path.c_str(), "w");
    if (!out) throw std::runtime_error("cannot open file: " + path);
    std::fprintf(out, "face,i,k,f,g\n");
    for (Face face : {Face::West, Face::East, Face::South, Face::North}) {
        for (int a = 0; a < face_nodes(face); ++a)
            for (int k = 0; k < grid_->nt(); ++k)
                std::fprintf(out, "%s,%d,%d,%.17g,%.17g\n", face_name(face), a, k,
                             f(face, a, k), g(face, a, k));
    }
    std::fclose(out);
}

void CauchyData::write_binary(const std::string& path) const {
    std::FILE* out = std::fopen(path.c_str(), "wb");
    if (!out) throw std::runtime_error("cannot open file: " + path);
    const std::int64_t header[3] = {grid_->nx(), grid_->ny(), grid_->nt()};
    std::fwrite(header, sizeof(std::int64_t), 3, out);
    std::fwrite(f_.data(), sizeof(double), f_.size(), out);
    std::fwrite(g_.data(), sizeof(double), g_.size(), out);
    std::fclose(out);
}

CauchyData CauchyData::read_binary(const std::string& path, GridPtr omega_grid) {
    std::FILE* in = std::fopen(path.c_str(), "rb");
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::int64_t header[3];
    if (std::fread(header, sizeof(std::int64_t), 3, in) != 3) {
        std::fclose(in);
        throw std::runtime_error("truncated trace file: " + path);
    }
    if (header[0] != omega_grid->nx() || header[1] != omega_grid->ny() ||
        header[2] != omega_grid->nt()) {
        std::fclose(in);
        throw std::runtime_error("trace file does not match the configured grid: " + path);
    }
    CauchyData d(std::move(omega_grid));
    const std::size_t n = d.f_.size();
    if (std::fread(d.f_.data(), sizeof(double), n, in) != n ||
        std::fread(d.g_.data(), sizeof(double), n, in) != n) {
        std::fclose(in);
        throw std::runtime_error("truncated trace file: " + path);
    }
    std::fclose(in);
    return d;
}

// ---------------------------------------------------------------------------
// Forward solver
// ---------------------------------------------------------------------------

ScalarField solve_forward(const ModelSpec& model, GridPtr padded_grid,
                          const ScalarField& p) {
    const SpaceTimeGrid& g = *padded_grid;
    if (!(cfl_ratio(g) < 0.5))
        throw std::invalid_argument("solve_forward: CFL ratio d_t/d_x must be below 0.5");
    if (!p.is_spatial() || p.grid().nx() != g.nx() || p.grid().ny() != g.ny())
        throw std::invalid_argument("solve_forward: initial source shape mismatch");

    const int nx = g.nx(), ny = g.ny(), nt = g.nt();
    const double dx = g.dx(), dt = g.dt();
    const double inv_h2 = 1.0 / (dx * dx);
    const double inv_2h = 0.5 / dx;

    ScalarField u = ScalarField::space_time(padded_grid);

    // Wave speed sampled once per spatial node.
    std::vector<double> c(std::size_t(nx) * ny);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            c[g.spatial_index(i, j)] = model.speed.eval(g.x(i), g.y(j));

    // Layer 0: u = p (walls forced to zero by the Dirichlet condition).
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            u.at(i, j, 0) = g.is_spatial_boundary(i, j) ? 0.0 : p.at(i, j);

    const NonlinearitySpec& F = model.nonlinearity;

    auto step_layer = [&](int k_new) {
        const int k = k_new - 1;
        const double t = g.t(k);
        const bool first = (k == 0);
        const double scale = first ? 0.5 * dt * dt : dt * dt;
        for (int j = 1; j < ny - 1; ++j) {
            for (int i = 1; i < nx - 1; ++i) {
                const double uc = u.at(i, j, k);
                const double lap = (u.at(i + 1, j, k) + u.at(i - 1, j, k) +
                                    u.at(i, j + 1, k) + u.at(i, j - 1, k) -
                                    4.0 * uc) * inv_h2;
                const double ux = (u.at(i + 1, j, k) - u.at(i - 1, j, k)) * inv_2h;
                const double uy = (u.at(i, j + 1, k) - u.at(i, j - 1, k)) * inv_2h;
                const double ut = first ? 0.0 : (uc - u.at(i, j, k - 1)) / dt;
                const double fv = F.eval(g.x(i), g.y(j), t, uc, ut, ux, uy);
                const double ci = c[g.spatial_index(i, j)];
                const double prev = first ? uc : 2.0 * uc - u.at(i, j, k - 1);
                u.at(i, j, k_new) = first ? uc + scale / ci * (lap + fv)
                                          : prev + scale / ci * (lap + fv);
            }
        }
        // Dirichlet walls stay zero (already initialized).
        for (int j = 1; j < ny - 1; ++j)
            for (int i = 1; i < nx - 1; ++i)
                if (!std::isfinite(u.at(i, j, k_new)))
                    throw std::runtime_error(
                        "solve_forward: instability, non-finite value at time layer " +
                        std::to_string(k_new));
    };

    for (int k_new = 1; k_new < nt; ++k_new) step_layer(k_new);
    return u;
}

// ---------------------------------------------------------------------------
// Trace extraction
// ---------------------------------------------------------------------------

namespace {

int locate_on_lattice(double value, double origin, double h, const char* what) {
    const double raw = (value - origin) / h;
    const int idx = int(std::lround(raw));
    if (std::abs(raw - idx) > 1e-9)
        throw std::invalid_argument(std::string("extract_cauchy: ") + what +
                                    " does not lie on the padded lattice");
    return idx;
}

}  // namespace

CauchyData extract_cauchy(const ScalarField& u_padded, GridPtr omega_grid) {
    const SpaceTimeGrid& gg = u_padded.grid();
    const SpaceTimeGrid& og = *omega_grid;
    if (u_padded.is_spatial())
        throw std::invalid_argument("extract_cauchy: need a space-time field");
    if (gg.nt() != og.nt() || std::abs(gg.dt() - og.dt()) > 1e-12 * gg.dt())
        throw std::invalid_argument("extract_cauchy: time axes do not match");
    if (std::abs(gg.dx() - og.dx()) > 1e-12 * gg.dx())
        throw std::invalid_argument("extract_cauchy: spatial spacings do not match");

    const double h = gg.dx();
    const int i0 = locate_on_lattice(og.bounds().x_min, gg.bounds().x_min, h, "x_min");
    const int j0 = locate_on_lattice(og.bounds().y_min, gg.bounds().y_min, h, "y_min");
    const int i1 = i0 + og.nx() - 1;
    const int j1 = j0 + og.ny() - 1;
    if (i0 < 2 || j0 < 2 || i1 > gg.nx() - 3 || j1 > gg.ny() - 3)
        throw std::invalid_argument(
            "extract_cauchy: inner box too close to the padded wall for one-sided stencils");

    CauchyData d(omega_grid);
    const double inv_2h = 0.5 / h;
    const int nt = og.nt();

    // One-sided second-order outward normal derivative using exterior nodes.
    auto normal_east = [&](int gi, int gj, int k) {
        return (-3.0 * u_padded.at(gi, gj, k) + 4.0 * u_padded.at(gi + 1, gj, k) -
                u_padded.at(gi + 2, gj, k)) * inv_2h;
    };
    auto normal_west = [&](int gi, int gj, int k) {
        return (-3.0 * u_padded.at(gi, gj, k) + 4.0 * u_padded.at(gi - 1, gj, k) -
                u_padded.at(gi - 2, gj, k)) * inv_2h;
    };
    auto normal_north = [&](int gi, int gj, int k) {
        return (-3.0 * u_padded.at(gi, gj, k) + 4.0 * u_padded.at(gi, gj + 1, k) -
                u_padded.at(gi, gj + 2, k)) * inv_2h;
    };
    auto normal_south = [&](int gi, int gj, int k) {
        return (-3.0 * u_padded.at(gi, gj, k) + 4.0 * u_padded.at(gi, gj - 1, k) -
                u_padded.at(gi, gj - 2, k)) * inv_2h;
    };

    for (int k = 0; k < nt; ++k) {
        for (int a = 0; a < og.ny(); ++a) {
            d.f(Face::West, a, k) = u_padded.at(i0, j0 + a, k);
            d.g(Face::West, a, k) = normal_west(i0, j0 + a, k);
            d.f(Face::East, a, k) = u_padded.at(i1, j0 + a, k);
            d.g(Face::East, a, k) = normal_east(i1, j0 + a, k);
        }
        for (int a = 0; a < og.nx(); ++a) {
            d.f(Face::South, a, k) = u_padded.at(i0 + a, j0, k);
            d.g(Face::South, a, k) = normal_south(i0 + a, j0, k);
            d.f(Face::North, a, k) = u_padded.at(i0 + a, j1, k);
            d.g(Face::North, a, k) = normal_north(i0 + a, j1, k);
        }
    }
    return d;
}

// ---------------------------------------------------------------------------
// Noise
// ---------------------------------------------------------------------------

CauchyData add_noise(const CauchyData& clean, double delta, std::uint64_t seed) {
    if (!(delta >= 0.0 && delta < 1.0))
        throw std::invalid_argument("add_noise: delta must lie in [0,1)");
    CauchyData noisy = clean;
    noisy.set_noise_meta(delta, seed);
    std::mt19937_64 rng(seed);
    auto draw = [&rng]() {
        // Uniform in [-1, 1], mapped from the top 53 bits for portability.
        return 2.0 * ((rng() >> 11) * 0x1.0p-53) - 1.0;
    };
    for (Face face : {Face::West, Face::East, Face::South, Face::North}) {
        for (int a = 0; a < noisy.face_nodes(face); ++a) {
            for (int k = 0; k < noisy.grid().nt(); ++k) {
                noisy.f(face, a, k) *= (1.0 + delta * draw());
                noisy.g(face, a, k) *= (1.0 + delta * draw());
            }
        }
    }
    return noisy;
}

}  // namespace cwqr
