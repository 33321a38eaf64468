#include <doctest.h>

#include <cmath>

#include "quadnav/errors.hpp"
#include "quadnav/reach.hpp"
#include "quadnav/rng.hpp"

using namespace quadnav;
using namespace quadnav::reach;

namespace {

Grid3 small_grid(int n, const Vec3& lower, const Vec3& upper) {
    Grid3 g;
    g.lower = lower;
    g.upper = upper;
    g.resolution = {n, n, n};
    return g;
}

// Field that is |x| - radius, constant in y and z: collapses the PDE to 1D.
ValueField axis_field(const Grid3& g, double radius) {
    ValueField f;
    f.grid = g;
    f.values.resize(g.size());
    for (int i = 0; i < g.resolution[0]; ++i)
        for (int j = 0; j < g.resolution[1]; ++j)
            for (int k = 0; k < g.resolution[2]; ++k)
                f.values[g.index(i, j, k)] = std::abs(g.node(i, j, k).x) - radius;
    return f;
}

// Zero crossing of the tube along +x on the central (y,z) row.
double front_radius(const ValueField& tube) {
    const Grid3& g = tube.grid;
    const int j = g.resolution[1] / 2, k = g.resolution[2] / 2;
    const int mid = g.resolution[0] / 2;
    for (int i = mid; i + 1 < g.resolution[0]; ++i) {
        const double a = tube.values[g.index(i, j, k)];
        const double b = tube.values[g.index(i + 1, j, k)];
        if (a <= 0 && b > 0) {
            const double x0 = g.node(i, 0, 0).x;
            return x0 + g.spacing().x * (-a) / (b - a);
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

} // namespace

TEST_CASE("signed_distance_sphere closed forms") {
    const Grid3 g = small_grid(21, {-1, -1, 0}, {1, 1, 2});
    const ValueField f = signed_distance_sphere(g, {0, 0, 1}, 0.1);

    const auto at = [&](int i, int j, int k) { return f.values[g.index(i, j, k)]; };
    CHECK(at(10, 10, 10) == doctest::Approx(-0.1)); // center, node (0,0,1)
    CHECK(at(10, 10, 0) == doctest::Approx(0.9));   // (0,0,0): distance 1 - 0.1
    CHECK(at(20, 10, 10) == doctest::Approx(0.9));  // (1,0,1)
    // node exactly on the sphere: (0.1, 0, 1)
    CHECK(at(11, 10, 10) == doctest::Approx(0.0));
}

TEST_CASE("spatial_gradient is exact for linear fields") {
    const Grid3 g = small_grid(15, {-1, -1, -1}, {1, 1, 1});
    ValueField f;
    f.grid = g;
    f.values.resize(g.size());
    for (int i = 0; i < 15; ++i)
        for (int j = 0; j < 15; ++j)
            for (int k = 0; k < 15; ++k) {
                const Vec3 p = g.node(i, j, k);
                f.values[g.index(i, j, k)] = 2 * p.x + 3 * p.y - p.z + 0.25;
            }
    const GradientField grad = spatial_gradient(f);
    for (size_t n = 0; n < g.size(); ++n) {
        CHECK(grad.left[n].x == doctest::Approx(2.0));
        CHECK(grad.right[n].x == doctest::Approx(2.0));
        CHECK(grad.left[n].y == doctest::Approx(3.0));
        CHECK(grad.right[n].y == doctest::Approx(3.0));
        CHECK(grad.left[n].z == doctest::Approx(-1.0));
        CHECK(grad.right[n].z == doctest::Approx(-1.0));
    }
}

TEST_CASE("spatial_gradient of a constant field is zero") {
    const Grid3 g = small_grid(9, {-1, -1, -1}, {1, 1, 1});
    ValueField f;
    f.grid = g;
    f.values.assign(g.size(), 4.0);
    const GradientField grad = spatial_gradient(f);
    for (size_t n = 0; n < g.size(); ++n) {
        CHECK(grad.left[n].norm() == 0.0);
        CHECK(grad.right[n].norm() == 0.0);
    }
}

TEST_CASE("spatial_gradient approximates the distance-field gradient") {
    const Grid3 g = small_grid(41, {1, -1, -1}, {3, 1, 1});
    const ValueField f = signed_distance_sphere(g, {0, 0, 1}, 0.1);
    const GradientField grad = spatial_gradient(f);
    // analytic gradient of |p - (0,0,1)| at p = (2,0,0): (2,0,-1)/sqrt(5)
    const size_t n = g.index(20, 20, 20); // node (2, 0, 0)
    const Vec3 got = 0.5 * (grad.left[n] + grad.right[n]);
    CHECK(got.x == doctest::Approx(0.8944).epsilon(0.01));
    CHECK(got.y == doctest::Approx(0.0).epsilon(0.01));
    CHECK(got.z == doctest::Approx(-0.4472).epsilon(0.01));
}

TEST_CASE("hamiltonian closed forms") {
    DynamicsBounds b;
    b.u_max = 0.5;
    b.d_max = {0.1, 0.1, 0.1};
    CHECK(hamiltonian({1, 0, 0}, b) == doctest::Approx(-0.4));
    CHECK(hamiltonian({0, 0, 0}, b) == doctest::Approx(0.0));

    b.d_max = {0.1, 0.2, 0.3};
    CHECK(hamiltonian({1, 1, 1}, b) == doctest::Approx(-0.9));
    CHECK(hamiltonian({-1, -1, -1}, b) == doctest::Approx(-0.9)); // even in grad
}

TEST_CASE("integrate_brt with tau 0 returns the initial field") {
    const Grid3 g = small_grid(21, {-1, -1, 0}, {1, 1, 2});
    const ValueField f = signed_distance_sphere(g, {0, 0, 1}, 0.1);
    DynamicsBounds b;
    b.d_max = {0.1, 0.1, 0.1};
    const BrtResult res = integrate_brt(f, b, 0.0);
    for (size_t n = 0; n < g.size(); ++n) CHECK(res.tube.values[n] == f.values[n]);
}

TEST_CASE("disturbance matching control freezes the tube") {
    const Grid3 g = small_grid(21, {-1, -1, 0}, {1, 1, 2});
    const ValueField f = signed_distance_sphere(g, {0, 0, 1}, 0.1);
    DynamicsBounds b;
    b.u_max = 0.5;
    b.d_max = {0.5, 0.5, 0.5}; // H vanishes identically
    const BrtResult res = integrate_brt(f, b, 1.0);
    for (size_t n = 0; n < g.size(); ++n)
        CHECK(res.tube.values[n] == doctest::Approx(f.values[n]).epsilon(1e-12));
}

TEST_CASE("1d front propagates at the net control speed") {
    const Grid3 g = [] {
        Grid3 gg;
        gg.lower = {-3, -0.2, -0.2};
        gg.upper = {3, 0.2, 0.2};
        gg.resolution = {61, 5, 5};
        return gg;
    }();
    const ValueField f = axis_field(g, 0.1);
    DynamicsBounds b;
    b.u_max = 0.5;
    b.d_max = {0.2, 0.2, 0.2};
    const BrtResult res = integrate_brt(f, b, 1.0);
    // zero level should sit at radius + (u-d)*tau = 0.1 + 0.3
    const double two_cells = 2 * g.spacing().x;
    CHECK(std::abs(front_radius(res.tube) - 0.4) <= two_cells);
}

TEST_CASE("tube grows monotonically with horizon and contains the target") {
    const Grid3 g = small_grid(25, {-1, -1, 0}, {1, 1, 2});
    const ValueField f = signed_distance_sphere(g, {0, 0, 1}, 0.1);
    DynamicsBounds b;
    b.u_max = 0.5;
    b.d_max = {0.1, 0.1, 0.1};
    const BrtResult shorter = integrate_brt(f, b, 0.5);
    const BrtResult longer = integrate_brt(f, b, 1.0);
    for (size_t n = 0; n < g.size(); ++n) {
        CHECK(longer.tube.values[n] <= shorter.tube.values[n] + 1e-12);
        CHECK(shorter.tube.values[n] <= f.values[n] + 1e-12); // containment
    }
}

TEST_CASE("stronger disturbance never enlarges the tube") {
    const Grid3 g = small_grid(25, {-1, -1, 0}, {1, 1, 2});
    const ValueField f = signed_distance_sphere(g, {0, 0, 1}, 0.1);
    DynamicsBounds weak, strong;
    weak.d_max = {0.05, 0.05, 0.05};
    strong.d_max = {0.2, 0.2, 0.2};
    const BrtResult a = integrate_brt(f, weak, 0.8);
    const BrtResult c = integrate_brt(f, strong, 0.8);
    for (size_t n = 0; n < g.size(); ++n)
        CHECK(c.tube.values[n] >= a.tube.values[n] - 1e-12);
}

TEST_CASE("tube inherits the x/y symmetry of the problem") {
    const Grid3 g = small_grid(21, {-1, -1, 0}, {1, 1, 2});
    const ValueField f = signed_distance_sphere(g, {0, 0, 1}, 0.1);
    DynamicsBounds b;
    b.d_max = {0.1, 0.1, 0.25};
    const BrtResult res = integrate_brt(f, b, 0.75);
    for (int i = 0; i < 21; ++i)
        for (int j = 0; j < 21; ++j)
            for (int k = 0; k < 21; ++k)
                CHECK(res.tube.values[g.index(i, j, k)] ==
                      doctest::Approx(res.tube.values[g.index(j, i, k)]).epsilon(1e-9));
}

TEST_CASE("halving the cfl number barely moves the converged field") {
    const Grid3 g = small_grid(21, {-1, -1, 0}, {1, 1, 2});
    const ValueField f = signed_distance_sphere(g, {0, 0, 1}, 0.1);
    DynamicsBounds b;
    b.d_max = {0.1, 0.1, 0.1};
    const BrtResult coarse = integrate_brt(f, b, 0.5, 0.8);
    const BrtResult fine = integrate_brt(f, b, 0.5, 0.4);
    double worst = 0;
    for (size_t n = 0; n < g.size(); ++n)
        worst = std::max(worst, std::abs(coarse.tube.values[n] - fine.tube.values[n]));
    CHECK(worst < 0.5 * g.spacing().x);
}

TEST_CASE("integrate_brt validates its knobs") {
    const Grid3 g = small_grid(9, {-1, -1, 0}, {1, 1, 2});
    const ValueField f = signed_distance_sphere(g, {0, 0, 1}, 0.1);
    CHECK_THROWS_AS(integrate_brt(f, {}, 1.0, 0.0), ConfigError);
    CHECK_THROWS_AS(integrate_brt(f, {}, 1.0, 1.5), ConfigError);
    CHECK_THROWS_AS(integrate_brt(f, {}, -1.0), ConfigError);
}

TEST_CASE("bang_bang_policy pushes against the gradient") {
    DynamicsBounds b;
    b.u_max = 0.5;
    b.reference = {0, 0, 1};

    const Vec3 u = bang_bang_policy({2, 0, 0}, b);
    CHECK(u.x == doctest::Approx(-0.5));
    CHECK(u.y == 0.0); // exactly zero on a zero-gradient axis
    CHECK(u.z == doctest::Approx(0.5));

    const Vec3 v = bang_bang_policy({0, 0, 2}, b);
    CHECK(v.x == 0.0);
    CHECK(v.z == doctest::Approx(-0.5));

    CHECK(bang_bang_policy({0, 0, 1}, b).norm() == 0.0);
}

TEST_CASE("worst_disturbance pushes along the gradient but never wins") {
    DynamicsBounds b;
    b.u_max = 0.5;
    b.d_max = {0.1, 0.2, 0.3};
    b.reference = {0, 0, 1};

    const Vec3 d = worst_disturbance({2, 0, 0}, b);
    CHECK(d.x == doctest::Approx(0.1));
    CHECK(d.y == 0.0);
    CHECK(d.z == doctest::Approx(-0.3));

    Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        const Vec3 p{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
        if ((p - b.reference).norm() < 1e-6) continue;
        const Vec3 grad = (p - b.reference) * (1.0 / (p - b.reference).norm());
        const Vec3 u = bang_bang_policy(p, b);
        const Vec3 dd = worst_disturbance(p, b);
        CHECK(grad.dot(u + dd) <= 1e-12); // control authority dominates
    }
}

TEST_CASE("bounds_from_stats formula and validation") {
    noise::ErrorStats stats;
    stats.mean = {-0.02, 0.0, 0.01};
    stats.covariance[0][0] = 0.0009;
    stats.covariance[1][1] = 0.0025;
    stats.covariance[2][2] = 0.04;

    const DynamicsBounds b = bounds_from_stats(stats, 0.1, 0.25);
    CHECK(b.u_max == doctest::Approx(0.5));
    CHECK(b.d_max.x == doctest::Approx(0.25 * (0.02 + 0.03) / 0.1));
    CHECK(b.d_max.y == doctest::Approx(0.25 * (0.0 + 0.05) / 0.1));
    CHECK(b.d_max.z == doctest::Approx(0.25 * (0.01 + 0.2) / 0.1));

    CHECK_THROWS_AS(bounds_from_stats(stats, 0.1, 0.0), ConfigError);
    CHECK_THROWS_AS(bounds_from_stats(stats, 0.0, 0.25), ConfigError);
    stats.covariance[1][1] = -1.0;
    CHECK_THROWS_WITH_AS(bounds_from_stats(stats, 0.1, 0.25), doctest::Contains("-1"),
                         NumericalInstability);
}

TEST_CASE("slicing a sphere field recovers the target circle") {
    Grid3 g;
    g.lower = {-0.3, -0.3, 0.7};
    g.upper = {0.3, 0.3, 1.3};
    g.resolution = {61, 61, 61};
    const ValueField f = signed_distance_sphere(g, {0, 0, 1}, 0.1);
    const SliceResult s = extract_slice(f, Axis::Z, 1.0);

    CHECK(s.plane_axes[0] == 0);
    CHECK(s.plane_axes[1] == 1);
    CHECK(s.area == doctest::Approx(M_PI * 0.01).epsilon(0.05));
    REQUIRE(!s.contour.empty());
    for (const auto& seg : s.contour) {
        CHECK(std::hypot(seg[0], seg[1]) == doctest::Approx(0.1).epsilon(0.05));
        CHECK(std::hypot(seg[2], seg[3]) == doctest::Approx(0.1).epsilon(0.05));
    }
    CHECK(slice_contains_disc(s, g, {0, 0, 1}, 0.09));
    CHECK(!slice_contains_disc(s, g, {0, 0, 1}, 0.25));
}

TEST_CASE("slice area grows with the horizon") {
    const Grid3 g = small_grid(31, {-1, -1, 0}, {1, 1, 2});
    const ValueField f = signed_distance_sphere(g, {0, 0, 1}, 0.1);
    DynamicsBounds b;
    b.d_max = {0.1, 0.1, 0.1};
    double prev = extract_slice(f, Axis::Z, 1.0).area;
    for (const double tau : {0.4, 0.8, 1.2}) {
        const double area = extract_slice(integrate_brt(f, b, tau), Axis::Z, 1.0).area;
        CHECK(area > prev);
        prev = area;
    }
}

TEST_CASE("slice coordinate outside the grid is rejected") {
    const Grid3 g = small_grid(9, {-1, -1, 0}, {1, 1, 2});
    const ValueField f = signed_distance_sphere(g, {0, 0, 1}, 0.1);
    CHECK_THROWS_AS(extract_slice(f, Axis::Z, 5.0), ConfigError);
    CHECK_THROWS_AS(extract_slice(f, Axis::X, -2.0), ConfigError);
}

TEST_CASE("grid validation") {
    Grid3 g;
    g.resolution = {1, 9, 9};
    CHECK_THROWS_AS(g.validate(), ConfigError);
    g = Grid3{};
    g.lower = {1, 0, 0};
    g.upper = {-1, 1, 1};
    CHECK_THROWS_AS(g.validate(), ConfigError);
}
