#include "quadnav/reach.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "quadnav/errors.hpp"

namespace quadnav::reach {

void Grid3::validate() const {
    for (int a = 0; a < 3; ++a) {
        if (resolution[size_t(a)] < 8)
            throw ConfigError("grid resolution must be >= 8 per axis");
        if (!(upper[a] > lower[a]))
            throw ConfigError("grid upper bound must exceed lower bound");
    }
}

ValueField signed_distance_sphere(const Grid3& grid, const Vec3& center, double radius) {
    grid.validate();
    if (!(radius > 0)) throw ConfigError("sphere radius must be positive");
    ValueField f;
    f.grid = grid;
    f.values.resize(grid.size());
    for (int i = 0; i < grid.resolution[0]; ++i)
        for (int j = 0; j < grid.resolution[1]; ++j)
            for (int k = 0; k < grid.resolution[2]; ++k)
                f.values[grid.index(i, j, k)] =
                    (grid.node(i, j, k) - center).norm() - radius;
    return f;
}

namespace {

// One-sided differences along one axis with ghost extrapolation at the ends.
inline void axis_diffs(const std::vector<double>& v, const Grid3& g, int i, int j,
                       int k, double& dxm, double& dxp, double& dym, double& dyp,
                       double& dzm, double& dzp) {
    const Vec3 h = g.spacing();
    const int nx = g.resolution[0], ny = g.resolution[1], nz = g.resolution[2];
    const double c = v[g.index(i, j, k)];

    double xm = i > 0 ? v[g.index(i - 1, j, k)] : 2 * c - v[g.index(i + 1, j, k)];
    double xp = i < nx - 1 ? v[g.index(i + 1, j, k)] : 2 * c - v[g.index(i - 1, j, k)];
    dxm = (c - xm) / h.x;
    dxp = (xp - c) / h.x;

    double ym = j > 0 ? v[g.index(i, j - 1, k)] : 2 * c - v[g.index(i, j + 1, k)];
    double yp = j < ny - 1 ? v[g.index(i, j + 1, k)] : 2 * c - v[g.index(i, j - 1, k)];
    dym = (c - ym) / h.y;
    dyp = (yp - c) / h.y;

    double zm = k > 0 ? v[g.index(i, j, k - 1)] : 2 * c - v[g.index(i, j, k + 1)];
    double zp = k < nz - 1 ? v[g.index(i, j, k + 1)] : 2 * c - v[g.index(i, j, k - 1)];
    dzm = (c - zm) / h.z;
    dzp = (zp - c) / h.z;
}

} // namespace

GradientField spatial_gradient(const ValueField& field) {
    const Grid3& g = field.grid;
    for (int a = 0; a < 3; ++a)
        if (g.resolution[size_t(a)] < 3)
            throw ConfigError("spatial_gradient needs resolution >= 3 per axis");
    GradientField out;
    out.grid = g;
    out.left.resize(g.size());
    out.right.resize(g.size());
    for (int i = 0; i < g.resolution[0]; ++i)
        for (int j = 0; j < g.resolution[1]; ++j)
            for (int k = 0; k < g.resolution[2]; ++k) {
                double dxm, dxp, dym, dyp, dzm, dzp;
                axis_diffs(field.values, g, i, j, k, dxm, dxp, dym, dyp, dzm, dzp);
                size_t idx = g.index(i, j, k);
                out.left[idx] = {dxm, dym, dzm};
                out.right[idx] = {dxp, dyp, dzp};
            }
    return out;
}

double hamiltonian(const Vec3& grad, const DynamicsBounds& bounds) {
    double h = 0;
    for (int a = 0; a < 3; ++a)
        h += (bounds.d_max[a] - bounds.u_max) * std::abs(grad[a]);
    return h;
}

BrtResult integrate_brt(const ValueField& initial, const DynamicsBounds& bounds,
                        double tau, double cfl, double target_radius) {
    if (!(cfl > 0) || cfl > 1) throw ConfigError("cfl must be in (0, 1]");
    if (tau < 0) throw ConfigError("tau must be nonnegative");

    const Grid3& g = initial.grid;
    const Vec3 h = g.spacing();
    const double alpha_x = bounds.u_max + bounds.d_max.x;
    const double alpha_y = bounds.u_max + bounds.d_max.y;
    const double alpha_z = bounds.u_max + bounds.d_max.z;
    const double alpha_sum = alpha_x + alpha_y + alpha_z;
    const double min_h = std::min({h.x, h.y, h.z});
    const double dt = alpha_sum > 0 ? cfl * min_h / alpha_sum : tau;

    std::vector<double> v = initial.values;
    std::vector<double> vnew(v.size());

    double t = 0;
    long step = 0;
    while (t < tau - 1e-12) {
        const double step_dt = std::min(dt, tau - t);
        for (int i = 0; i < g.resolution[0]; ++i)
            for (int j = 0; j < g.resolution[1]; ++j)
                for (int k = 0; k < g.resolution[2]; ++k) {
                    double dxm, dxp, dym, dyp, dzm, dzp;
                    axis_diffs(v, g, i, j, k, dxm, dxp, dym, dyp, dzm, dzp);
                    Vec3 avg{0.5 * (dxm + dxp), 0.5 * (dym + dyp), 0.5 * (dzm + dzp)};
                    double ham = hamiltonian(avg, bounds);
                    double dissipation = 0.5 * (alpha_x * (dxp - dxm) +
                                                alpha_y * (dyp - dym) +
                                                alpha_z * (dzp - dzm));
                    size_t idx = g.index(i, j, k);
                    // Value falls at rate (u−d) near the front where control
                    // wins; where the disturbance wins the candidate rises and
                    // the min freezes the node instead.
                    double cand = v[idx] + step_dt * (ham + dissipation);
                    vnew[idx] = std::min(cand, v[idx]);
                    if (!std::isfinite(vnew[idx])) {
                        std::ostringstream os;
                        os << "BRT integration went non-finite at step " << step
                           << " node (" << i << "," << j << "," << k << "), cfl=" << cfl;
                        throw NumericalInstability(os.str());
                    }
                }
        v.swap(vnew);
        t += step_dt;
        ++step;
    }

    BrtResult res;
    res.tube.grid = g;
    res.tube.values = std::move(v);
    res.tube.time_label = tau;
    res.tau = tau;
    res.target_radius = target_radius;
    res.bounds = bounds;
    return res;
}

Vec3 bang_bang_policy(const Vec3& p, const DynamicsBounds& bounds) {
    Vec3 diff = p - bounds.reference;
    double dist = diff.norm();
    if (dist < 1e-12) return {0, 0, 0}; // singular at the reference point
    Vec3 u;
    for (int a = 0; a < 3; ++a) {
        double grad = diff[a] / dist;
        u[a] = std::abs(grad) < 1e-12 ? 0.0 : -std::copysign(bounds.u_max, grad);
    }
    return u;
}

Vec3 worst_disturbance(const Vec3& p, const DynamicsBounds& bounds) {
    Vec3 diff = p - bounds.reference;
    double dist = diff.norm();
    if (dist < 1e-12) return {0, 0, 0};
    Vec3 d;
    for (int a = 0; a < 3; ++a) {
        double grad = diff[a] / dist;
        d[a] = std::abs(grad) < 1e-12 ? 0.0 : std::copysign(bounds.d_max[a], grad);
    }
    return d;
}

DynamicsBounds bounds_from_stats(const noise::ErrorStats& stats, double step_duration,
                                 double kappa) {
    if (!(step_duration > 0)) throw ConfigError("step_duration must be positive");
    if (!(kappa > 0)) throw ConfigError("kappa must be positive");
    Eigen::Matrix3d cov;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) cov(i, j) = stats.covariance[i][j];
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
    for (int i = 0; i < 3; ++i)
        if (es.eigenvalues()[i] < -1e-12)
            throw NumericalInstability("bounds_from_stats: covariance not PSD, eigenvalue " +
                                       std::to_string(es.eigenvalues()[i]));
    DynamicsBounds b;
    b.u_max = 0.05 / step_duration;
    for (int a = 0; a < 3; ++a)
        b.d_max[a] = kappa *
                     (std::abs(stats.mean[a]) + std::sqrt(std::max(0.0, stats.covariance[size_t(a)][size_t(a)]))) /
                     step_duration;
    return b;
}

namespace {

// Area of the {V<0} region inside one cell: walk the cell boundary,
// collecting inside corners and edge zero-crossings, then shoelace.
double cell_area(double v00, double v10, double v11, double v01, double hu, double hv) {
    // corners in walk order: (0,0) (1,0) (1,1) (0,1), values at each
    const double vals[4] = {v00, v10, v11, v01};
    const double px[4] = {0, hu, hu, 0};
    const double py[4] = {0, 0, hv, hv};
    double polyx[8], polyy[8];
    int n = 0;
    for (int c = 0; c < 4; ++c) {
        int cn = (c + 1) % 4;
        if (vals[c] < 0) {
            polyx[n] = px[c];
            polyy[n] = py[c];
            ++n;
        }
        if ((vals[c] < 0) != (vals[cn] < 0)) {
            double tpar = vals[c] / (vals[c] - vals[cn]);
            polyx[n] = px[c] + tpar * (px[cn] - px[c]);
            polyy[n] = py[c] + tpar * (py[cn] - py[c]);
            ++n;
        }
    }
    double area = 0;
    for (int i = 0; i < n; ++i) {
        int j = (i + 1) % n;
        area += polyx[i] * polyy[j] - polyx[j] * polyy[i];
    }
    return 0.5 * std::abs(area);
}

} // namespace

SliceResult extract_slice(const ValueField& field, Axis axis, double coordinate) {
    const Grid3& g = field.grid;
    const int ax = int(axis);
    if (coordinate < g.lower[ax] - 1e-12 || coordinate > g.upper[ax] + 1e-12)
        throw ConfigError("slice coordinate " + std::to_string(coordinate) +
                          " outside grid bounds on axis " + std::to_string(ax));

    SliceResult s;
    s.axis = axis;
    s.coordinate = coordinate;
    int ua = (ax + 1) % 3, va = (ax + 2) % 3;
    if (ua > va) std::swap(ua, va); // keep plane axes in (x,y,z) order
    s.plane_axes = {ua, va};
    s.nu = g.resolution[size_t(ua)];
    s.nv = g.resolution[size_t(va)];
    s.values.resize(size_t(s.nu) * size_t(s.nv));

    // bracketing planes along the sliced axis (plane-aligned => the trilinear
    // interpolation reduces to linear between two grid planes)
    const Vec3 h = g.spacing();
    double f = (coordinate - g.lower[ax]) / h[ax];
    int k0 = std::clamp(int(std::floor(f)), 0, g.resolution[size_t(ax)] - 2);
    double w = std::clamp(f - k0, 0.0, 1.0);

    auto value_at = [&](int iu, int iv, int ks) {
        int ijk[3];
        ijk[ua] = iu;
        ijk[va] = iv;
        ijk[ax] = ks;
        return field.values[g.index(ijk[0], ijk[1], ijk[2])];
    };
    for (int iu = 0; iu < s.nu; ++iu)
        for (int iv = 0; iv < s.nv; ++iv)
            s.values[size_t(iu) * size_t(s.nv) + size_t(iv)] =
                (1 - w) * value_at(iu, iv, k0) + w * value_at(iu, iv, k0 + 1);

    // marching squares + sub-zero area
    const double hu = h[ua], hv = h[va];
    auto sval = [&](int iu, int iv) {
        return s.values[size_t(iu) * size_t(s.nv) + size_t(iv)];
    };
    auto upos = [&](int iu) { return g.lower[ua] + iu * hu; };
    auto vpos = [&](int iv) { return g.lower[va] + iv * hv; };

    for (int iu = 0; iu + 1 < s.nu; ++iu)
        for (int iv = 0; iv + 1 < s.nv; ++iv) {
            double v00 = sval(iu, iv), v10 = sval(iu + 1, iv);
            double v11 = sval(iu + 1, iv + 1), v01 = sval(iu, iv + 1);
            bool any_neg = v00 < 0 || v10 < 0 || v11 < 0 || v01 < 0;
            bool any_pos = v00 >= 0 || v10 >= 0 || v11 >= 0 || v01 >= 0;
            if (any_neg) s.area += cell_area(v00, v10, v11, v01, hu, hv);
            if (!(any_neg && any_pos)) continue;

            // crossing points on the four edges, in boundary-walk order
            const double vals[4] = {v00, v10, v11, v01};
            const double cx[4] = {upos(iu), upos(iu + 1), upos(iu + 1), upos(iu)};
            const double cy[4] = {vpos(iv), vpos(iv), vpos(iv + 1), vpos(iv + 1)};
            double crossx[4], crossy[4];
            int nc = 0;
            for (int c = 0; c < 4; ++c) {
                int cn = (c + 1) % 4;
                if ((vals[c] < 0) != (vals[cn] < 0)) {
                    double tpar = vals[c] / (vals[c] - vals[cn]);
                    crossx[nc] = cx[c] + tpar * (cx[cn] - cx[c]);
                    crossy[nc] = cy[c] + tpar * (cy[cn] - cy[c]);
                    ++nc;
                }
            }
            // 2 crossings: one segment. 4 (saddle): pair them in walk order.
            for (int c = 0; c + 1 < nc; c += 2)
                s.contour.push_back({crossx[c], crossy[c], crossx[c + 1], crossy[c + 1]});
        }
    return s;
}

SliceResult extract_slice(const BrtResult& result, Axis axis, double coordinate) {
    return extract_slice(result.tube, axis, coordinate);
}

bool slice_contains_disc(const SliceResult& slice, const Grid3& grid,
                         const Vec3& center, double radius) {
    const int ua = slice.plane_axes[0];
    const int va = slice.plane_axes[1];
    const Vec3 h = grid.spacing();
    bool any = false;
    for (int iu = 0; iu < slice.nu; ++iu) {
        const double du = grid.lower[ua] + iu * h[ua] - center[ua];
        for (int iv = 0; iv < slice.nv; ++iv) {
            const double dv = grid.lower[va] + iv * h[va] - center[va];
            if (du * du + dv * dv > radius * radius) continue;
            any = true;
            if (slice.values[size_t(iu) * size_t(slice.nv) + size_t(iv)] >= 0)
                return false;
        }
    }
    return any;
}

} // namespace quadnav::reach
