#pragma once

#include <cstdint>
#include <string>

#include "cwqr/grid.hpp"
#include "cwqr/model.hpp"

namespace cwqr {

enum class Face { West = 0, East = 1, South = 2, North = 3 };

const char* face_name(Face f);

/// Dirichlet and Neumann traces on the four faces of the spatial boundary
/// over all time layers. Corner nodes appear on both adjacent faces (the
/// Neumann trace differs per face normal).
class CauchyData {
public:
    explicit CauchyData(GridPtr omega_grid);

    const SpaceTimeGrid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }

    /// Nodes along a face: ny for west/east, nx for south/north.
    int face_nodes(Face f) const;

    double f(Face face, int a, int k) const { return f_[sample_index(face, a, k)]; }
    double g(Face face, int a, int k) const { return g_[sample_index(face, a, k)]; }
    double& f(Face face, int a, int k) { return f_[sample_index(face, a, k)]; }
    double& g(Face face, int a, int k) { return g_[sample_index(face, a, k)]; }

    std::size_t n_samples() const { return f_.size(); }
    const std::vector<double>& f_values() const { return f_; }
    const std::vector<double>& g_values() const { return g_; }

    double noise_level() const { return delta_; }
    std::uint64_t seed() const { return seed_; }
    void set_noise_meta(double delta, std::uint64_t seed) {
        delta_ = delta;
        seed_ = seed;
    }

    /// Grid (i, j) of sample a on a face; the boundary node itself.
    void face_node(Face face, int a, int* i, int* j) const;

    // CSV: "face,i,k,f,g" rows. Binary: int64 nx,ny,nt header, then all f
    // samples, then all g samples (faces W,E,S,N; node-major, time fastest).
    void write_csv(const std::string& path) const;
    void write_binary(const std::string& path) const;
    static CauchyData read_binary(const std::string& path, GridPtr omega_grid);

private:
    std::size_t sample_index(Face face, int a, int k) const;
    GridPtr grid_;
    std::vector<double> f_, g_;
    double delta_ = 0.0;
    std::uint64_t seed_ = 0;
};

/// Explicit leapfrog solve of c u_tt = lap u + F(x,t,u,u_t,grad u) on the
/// padded grid with homogeneous Dirichlet walls, u(.,0) = p, u_t(.,0) = 0.
/// Throws on a CFL ratio >= 0.5 and on non-finite values mid-run (naming
/// the time layer).
ScalarField solve_forward(const ModelSpec& model, GridPtr padded_grid,
                          const ScalarField& p);

/// Restriction of a field on the padded grid to boundary traces of the
/// inner grid; Neumann by second-order one-sided differences using nodes
/// outside the inner box. Throws when the grids do not align.
CauchyData extract_cauchy(const ScalarField& u_padded, GridPtr omega_grid);

/// Multiplicative uniform noise f*(1 + delta rand), rand in [-1,1], one
/// independent draw per f and per g sample; deterministic per seed.
CauchyData add_noise(const CauchyData& clean, double delta, std::uint64_t seed);

}  // namespace cwqr
