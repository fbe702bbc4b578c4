// Test-only reference implementations, kept independent of the library code
// paths they check.
#pragma once

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "csf/cyclic_tridiagonal.hpp"
#include "csf/geometry.hpp"
#include "csf/mesh.hpp"

namespace oracles {

// Densify a cyclic tridiagonal matrix.
inline std::vector<std::vector<double>> to_dense(const csf::CyclicTridiagonal& a) {
    const std::size_t n = a.size();
    std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t in = (i + 1) % n;
        m[i][i] = a.diag[i];
        m[i][in] += a.off[i];
        m[in][i] += a.off[i];
    }
    return m;
}

// Dense Gaussian elimination with partial pivoting.
inline std::vector<double> dense_solve(std::vector<std::vector<double>> m, std::vector<double> b) {
    const std::size_t n = m.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t p = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(m[r][col]) > std::abs(m[p][col])) p = r;
        if (m[p][col] == 0.0) throw std::runtime_error("dense_solve: singular");
        std::swap(m[col], m[p]);
        std::swap(b[col], b[p]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = m[r][col] / m[col][col];
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) m[r][c] -= f * m[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t c = i + 1; c < n; ++c) s -= m[i][c] * x[c];
        x[i] = s / m[i][i];
    }
    return x;
}

// Random symmetric positive definite cyclic tridiagonal system (diagonally
// dominant by construction).
inline csf::CyclicTridiagonal random_spd_system(std::size_t n, std::mt19937& rng) {
    std::uniform_real_distribution<double> off_dist(-1.0, 1.0);
    std::uniform_real_distribution<double> slack(0.1, 2.0);
    csf::CyclicTridiagonal a;
    a.off.resize(n);
    a.diag.resize(n);
    for (auto& o : a.off) o = off_dist(rng);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t ip = (i + n - 1) % n;
        a.diag[i] = std::abs(a.off[i]) + std::abs(a.off[ip]) + slack(rng);
    }
    return a;
}

// Random closed polygon: jittered circle, guaranteed non-degenerate for the
// jitter sizes used.
inline csf::DiscreteCurve random_polygon(const csf::PeriodicMesh& mesh, std::mt19937& rng,
                                         double radial_jitter = 0.25, double angular_jitter = 0.25) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const std::size_t n = mesh.size();
    csf::DiscreteCurve curve{&mesh, std::vector<csf::Vec2>(n)};
    const double two_pi = 2.0 * 3.14159265358979323846;
    for (std::size_t j = 0; j < n; ++j) {
        const double angle =
            two_pi * (mesh.node(static_cast<std::ptrdiff_t>(j)) + angular_jitter * u(rng) / static_cast<double>(n));
        const double radius = 1.0 + radial_jitter * u(rng);
        curve.positions[j] = {radius * std::cos(angle), radius * std::sin(angle)};
    }
    return curve;
}

inline csf::SurfaceField random_field(const csf::PeriodicMesh& mesh, std::mt19937& rng,
                                      double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    csf::SurfaceField f{&mesh, std::vector<double>(mesh.size())};
    for (auto& v : f.values) v = u(rng);
    return f;
}

// Regular n-gon with circumradius r, counter-clockwise.
inline csf::DiscreteCurve regular_polygon(const csf::PeriodicMesh& mesh, double r) {
    const std::size_t n = mesh.size();
    csf::DiscreteCurve curve{&mesh, std::vector<csf::Vec2>(n)};
    const double two_pi = 2.0 * 3.14159265358979323846;
    for (std::size_t j = 0; j < n; ++j) {
        const double angle = two_pi * mesh.node(static_cast<std::ptrdiff_t>(j));
        curve.positions[j] = {r * std::cos(angle), r * std::sin(angle)};
    }
    return curve;
}

} // namespace oracles
