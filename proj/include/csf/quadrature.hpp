#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <utility>
#include <vector>

#include "csf/errors.hpp"
#include "csf/mesh.hpp"

namespace csf {

// Gauss-Legendre rule on [-1,1], exact for polynomials of degree 2*npts - 1.
// Nodes are computed by Newton iteration on the Legendre recurrence.
class GaussLegendre {
public:
    explicit GaussLegendre(int npts) {
        if (npts < 1 || npts > 10) throw ConfigError("GaussLegendre: npts must lie in [1,10]");
        node_.resize(static_cast<std::size_t>(npts));
        weight_.resize(static_cast<std::size_t>(npts));
        for (int k = 0; k < npts; ++k) {
            double x = std::cos(std::numbers::pi * (k + 0.75) / (npts + 0.5));
            for (int it = 0; it < 64; ++it) {
                const auto [p, dp] = legendre(npts, x);
                const double dx = p / dp;
                x -= dx;
                if (std::abs(dx) < 1e-15) break;
            }
            const auto [p, dp] = legendre(npts, x);
            (void)p;
            node_[static_cast<std::size_t>(k)] = x;
            weight_[static_cast<std::size_t>(k)] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
    }

    std::size_t size() const { return node_.size(); }
    double node(std::size_t k) const { return node_[k]; }
    double weight(std::size_t k) const { return weight_[k]; }

private:
    static std::pair<double, double> legendre(int n, double x) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        const double dp = n * (x * p1 - p0) / (x * x - 1.0);
        return {p1, dp};
    }

    std::vector<double> node_;
    std::vector<double> weight_;
};

// Map x back into [0,1).
inline double wrap_unit(double x) { return x - std::floor(x); }

// Integrate fn over the periodic domain by per-segment Gauss quadrature.
template <class F>
double integrate_segments(F&& fn, const PeriodicMesh& mesh, int points_per_segment) {
    const GaussLegendre rule(points_per_segment);
    const std::size_t n = mesh.size();
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double h = mesh.seg_len(static_cast<std::ptrdiff_t>(j));
        const double left = mesh.node(static_cast<std::ptrdiff_t>(j)) - h;
        double seg = 0.0;
        for (std::size_t k = 0; k < rule.size(); ++k) {
            const double theta = 0.5 * (rule.node(k) + 1.0);
            seg += rule.weight(k) * fn(wrap_unit(left + theta * h));
        }
        sum += 0.5 * h * seg;
    }
    return sum;
}

} // namespace csf
