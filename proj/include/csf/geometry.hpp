#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "csf/errors.hpp"
#include "csf/mesh.hpp"
#include "csf/vec2.hpp"

namespace csf {

// Closed polygonal curve: vertex j sits at parameter node x_j.
struct DiscreteCurve {
    const PeriodicMesh* mesh = nullptr;
    std::vector<Vec2> positions;
};

// Nodal scalar values on the same parameter mesh.
struct SurfaceField {
    const PeriodicMesh* mesh = nullptr;
    std::vector<double> values;
};

// Per-segment and per-vertex quantities of a polygon. Segment j joins vertex
// j-1 to vertex j:
//   q[j]     = |u_j - u_{j-1}|            (segment length)
//   tau[j]   = (u_j - u_{j-1}) / q[j]     (unit tangent)
//   nu[j]    = perp(tau[j])               (unit normal)
//   nubar[j] = (q_j nu_j + q_{j+1} nu_{j+1}) / (q_j + q_{j+1})
// nubar[j] is the length-weighted average of the two segment normals meeting
// at vertex j; |nubar[j]| <= 1 always.
struct PolygonGeometry {
    std::vector<double> q;
    std::vector<Vec2> tau;
    std::vector<Vec2> nu;
    std::vector<Vec2> nubar;

    std::size_t size() const { return q.size(); }
};

inline PolygonGeometry compute_geometry(const DiscreteCurve& curve) {
    const std::size_t n = curve.positions.size();
    PolygonGeometry g;
    g.q.resize(n);
    g.tau.resize(n);
    g.nu.resize(n);
    g.nubar.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        const Vec2 d = curve.positions[j] - curve.positions[j == 0 ? n - 1 : j - 1];
        const double qj = norm(d);
        if (!(qj > 0.0))
            throw DegenerateCurveError("compute_geometry: zero-length segment (mesh collapse)");
        g.q[j] = qj;
        g.tau[j] = d / qj;
        g.nu[j] = perp(g.tau[j]);
    }
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t jn = (j + 1) % n;
        g.nubar[j] = (g.q[j] * g.nu[j] + g.q[jn] * g.nu[jn]) / (g.q[j] + g.q[jn]);
    }
    return g;
}

// r_j = f(c_j) nubar_j, the forcing contribution to the vertex velocity.
inline std::vector<Vec2> forcing_vectors(const PolygonGeometry& geom, const SurfaceField& field,
                                         const std::function<double(double)>& f) {
    const std::size_t n = geom.size();
    std::vector<Vec2> r(n);
    for (std::size_t j = 0; j < n; ++j) r[j] = f(field.values[j]) * geom.nubar[j];
    return r;
}

// Vertex velocities of the spatially discrete flow:
//   du_j/dt = r_j - 2 (tau_j - tau_{j+1}) / (q_j + q_{j+1}).
inline std::vector<Vec2> nodal_velocities(const PolygonGeometry& geom, std::span<const Vec2> r) {
    const std::size_t n = geom.size();
    std::vector<Vec2> v(n);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t jn = (j + 1) % n;
        v[j] = r[j] - (2.0 / (geom.q[j] + geom.q[jn])) * (geom.tau[j] - geom.tau[jn]);
    }
    return v;
}

// Residual of the exact algebraic identity for the rate of change of q_j:
//   tau_j . (v_j - v_{j-1})
//     = tau_j . (r_j - r_{j-1})
//       - |tau_{j+1} - tau_j|^2 / (q_j + q_{j+1})
//       - |tau_{j-1} - tau_j|^2 / (q_j + q_{j-1})
// with v from nodal_velocities. Vanishes up to rounding for any polygon.
inline std::vector<double> length_rate_residual(const PolygonGeometry& geom, std::span<const Vec2> r) {
    const std::size_t n = geom.size();
    const std::vector<Vec2> v = nodal_velocities(geom, r);
    std::vector<double> res(n);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t jn = (j + 1) % n;
        const std::size_t jp = (j + n - 1) % n;
        const double lhs = dot(geom.tau[j], v[j] - v[jp]);
        const double rhs = dot(geom.tau[j], r[j] - r[jp]) -
                           norm2(geom.tau[jn] - geom.tau[j]) / (geom.q[j] + geom.q[jn]) -
                           norm2(geom.tau[jp] - geom.tau[j]) / (geom.q[j] + geom.q[jp]);
        res[j] = lhs - rhs;
    }
    return res;
}

inline double total_length(const PolygonGeometry& geom) {
    double sum = 0.0;
    for (double qj : geom.q) sum += qj;
    return sum;
}

// Integral of the piecewise linear field against the polygon length element:
// sum_j q_j (c_{j-1} + c_j) / 2. Exactly conserved by the field step when the
// field equation has no source.
inline double discrete_mass(const PolygonGeometry& geom, const SurfaceField& field) {
    const std::size_t n = geom.size();
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t jp = (j + n - 1) % n;
        sum += geom.q[j] * 0.5 * (field.values[jp] + field.values[j]);
    }
    return sum;
}

} // namespace csf
