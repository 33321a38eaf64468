#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "quadnav/noise.hpp"
#include "quadnav/vec3.hpp"

namespace quadnav::reach {

using quadnav::Vec3;

struct Grid3 {
    Vec3 lower{-1.5, -2.0, -1.0};
    Vec3 upper{2.5, 2.0, 3.0};
    std::array<int, 3> resolution{81, 81, 81};

    Vec3 spacing() const {
        return {(upper.x - lower.x) / (resolution[0] - 1),
                (upper.y - lower.y) / (resolution[1] - 1),
                (upper.z - lower.z) / (resolution[2] - 1)};
    }
    size_t size() const {
        return size_t(resolution[0]) * size_t(resolution[1]) * size_t(resolution[2]);
    }
    // row-major with z fastest: idx = (i*ny + j)*nz + k
    size_t index(int i, int j, int k) const {
        return (size_t(i) * size_t(resolution[1]) + size_t(j)) * size_t(resolution[2]) +
               size_t(k);
    }
    Vec3 node(int i, int j, int k) const {
        Vec3 h = spacing();
        return {lower.x + i * h.x, lower.y + j * h.y, lower.z + k * h.z};
    }
    void validate() const; // throws ConfigError
};

struct ValueField {
    Grid3 grid;
    std::vector<double> values;
    double time_label = 0.0;
};

struct DynamicsBounds {
    double u_max = 0.5;   // m/s per axis control authority
    Vec3 d_max;           // m/s per axis worst-case disturbance
    Vec3 reference{0, 0, 1};
};

struct BrtResult {
    ValueField tube; // pointwise min over time
    double tau = 0;
    double target_radius = 0;
    DynamicsBounds bounds;
};

ValueField signed_distance_sphere(const Grid3& grid, const Vec3& center, double radius);

// Left/right one-sided differences per axis at every node (upwind pair).
// Boundary nodes use linearly extrapolated ghost values, i.e. the one-sided
// interior stencil.
struct GradientField {
    Grid3 grid;
    std::vector<Vec3> left;
    std::vector<Vec3> right;
};
GradientField spatial_gradient(const ValueField& field);

// Closed-form min_u max_d grad·(u+d) over per-axis boxes.
double hamiltonian(const Vec3& grad, const DynamicsBounds& bounds);

// Lax-Friedrichs time stepping of the reachability PDE with the
// min-with-previous freeze (reach-within-tau semantics).
BrtResult integrate_brt(const ValueField& initial, const DynamicsBounds& bounds,
                        double tau, double cfl = 0.8, double target_radius = 0.1);

// Optimal control: full speed against the spatial gradient of the distance
// value function, per axis.
Vec3 bang_bang_policy(const Vec3& p, const DynamicsBounds& bounds);

// Adversarial disturbance: full magnitude along the gradient.
Vec3 worst_disturbance(const Vec3& p, const DynamicsBounds& bounds);

// d_max_i = kappa*(|mean_i| + sqrt(cov_ii))/step_duration; u_max = 0.05/step_duration.
DynamicsBounds bounds_from_stats(const noise::ErrorStats& stats, double step_duration,
                                 double kappa);

enum class Axis { X = 0, Y = 1, Z = 2 };

struct SliceResult {
    Axis axis = Axis::Z;
    double coordinate = 0;
    std::array<int, 2> plane_axes{0, 1}; // remaining axes (u, v)
    int nu = 0, nv = 0;
    std::vector<double> values; // nu*nv, v fastest
    // marching-squares zero contour as segment soup in plane coordinates
    std::vector<std::array<double, 4>> contour;
    double area = 0; // area of {V < 0} in the plane
};

SliceResult extract_slice(const BrtResult& result, Axis axis, double coordinate);
SliceResult extract_slice(const ValueField& field, Axis axis, double coordinate);

// True iff every slice node lying inside the in-plane disc of the given
// center/radius has negative value (and at least one node lies inside).
bool slice_contains_disc(const SliceResult& slice, const Grid3& grid,
                         const Vec3& center, double radius);

} // namespace quadnav::reach
