#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "slef/geometry.hpp"
#include "slef/sparse.hpp"

namespace slef {

enum class MeshKind { interval, cartesian, polar };

// One stencil arm of an unknown: the point it couples to and the arm length.
struct Arm {
    std::int32_t target = -1;
    double length = 0.0;
};

// Points are numbered unknowns first, then boundary points. Arms are ordered
// (+axis0, -axis0, +axis1, -axis1); axis0 is x / r / t, axis1 is y / omega.
struct Mesh {
    MeshKind kind = MeshKind::cartesian;
    std::uint64_t id = 0;

    std::vector<Point2> points;   // physical coordinates
    std::vector<Point2> native;   // (x,y), (r,omega) or (t,0)
    std::vector<int> part;        // boundary part tag; -1 for unknowns
    std::size_t unknowns = 0;
    std::vector<std::array<Arm, 4>> arms;                 // per unknown
    std::vector<std::array<std::int32_t, 2>> grid_coord;  // per unknown

    // Cartesian and polar: dense lookup grid index -> point index (-1 if absent)
    std::int32_t nx = 0, ny = 0;
    std::vector<std::int32_t> lookup;
    double h = 0.0;            // Cartesian spacing / largest interval step
    Point2 origin;             // Cartesian grid origin
    double fold_fraction = 0.05;

    // polar
    std::vector<double> radii;
    double dtheta = 0.0;
    double theta = 0.0;

    std::size_t size() const { return points.size(); }
    bool is_unknown(std::size_t p) const { return p < unknowns; }
    std::int32_t at(std::int32_t i, std::int32_t j) const;
    // length scale used for eps_min and tolerance heuristics
    double characteristic_spacing() const;
    // smallest arm fraction (arm length / nominal spacing) of a Cartesian unknown
    double min_boundary_fraction() const;
};

using MeshPtr = std::shared_ptr<const Mesh>;

// Grid function on every point of one mesh.
struct Field {
    std::uint64_t mesh_id = 0;
    std::vector<double> values;

    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
    std::size_t size() const { return values.size(); }
};

Field make_field(const Mesh& m, double value = 0.0);
// value at every point from a function of (physical point, boundary part)
Field sample_field(const Mesh& m, const std::function<double(Point2, int)>& f);
// boundary points from f, unknowns zero
Field boundary_field(const Mesh& m, const std::function<double(Point2, int)>& f);
void require_same_mesh(const Mesh& m, const Field& f);

// g on (x_min,x_max) x (g, top); box sides must lie on grid lines.
MeshPtr build_cartesian_mesh(const GraphDomain& dom, double h, double fold_fraction = 0.05);
MeshPtr build_cartesian_mesh(const PlanarRegion& region, double h, double fold_fraction = 0.05);
// Boundary parts: 0 inner arc r_min, 1 side omega=0, 2 side omega=theta, 3 outer arc.
MeshPtr build_polar_mesh(const SectorDomain& sec, int n_r, int n_omega, double grading);
// Nodes t_i = a + (b-a) (i/n)^p; parts 0 (left end), 1 (right end).
MeshPtr build_interval_mesh(double a, double b, int n, double grading_power = 1.0);

// Discrete -Laplacian split as  (L u)_i = sum_arms c (u_i - u_target),
// with cell weights W so that (L u)_i / W_i approximates -Delta u.
struct DiscreteLaplacian {
    CsrMatrix stiffness;                 // unknown-unknown block
    std::vector<double> weight;          // W_i
    std::vector<std::int64_t> bnd_ptr;   // per unknown: couplings to boundary points
    std::vector<std::int32_t> bnd_point;
    std::vector<double> bnd_coeff;

    std::vector<double> boundary_rhs(const Field& u) const;
    // (L u)_i for all unknowns, using the boundary values stored in u
    std::vector<double> apply(const Field& u) const;
};

DiscreteLaplacian assemble_laplacian(const Mesh& m);

Field harmonic_solve(const Mesh& m, const Field& boundary_data, LinearOptions opts = {});
// Solve only the unknowns where mask is true; every other point keeps f's value.
Field masked_harmonic_solve(const Mesh& m, const DiscreteLaplacian& lap, const Field& f,
                            const std::vector<char>& mask);

// Interpolation. Cartesian: bilinear inside a cell whose corners exist, else
// linear along a vertical grid line through cut points. Polar: bilinear in (r, omega).
std::optional<double> interpolate(const Mesh& m, const Field& f, Point2 physical);
std::optional<double> interpolate_polar(const Mesh& m, const Field& f, double r, double omega);

void write_field_csv(std::ostream& os, const Mesh& m, const Field& f, int precision = 17);

}  // namespace slef
