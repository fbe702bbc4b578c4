#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "csf/errors.hpp"

namespace csf {

// Reduce a (possibly negative) index modulo n.
inline std::size_t pmod(std::ptrdiff_t j, std::size_t n) {
    std::ptrdiff_t r = j % static_cast<std::ptrdiff_t>(n);
    if (r < 0) r += static_cast<std::ptrdiff_t>(n);
    return static_cast<std::size_t>(r);
}

// Partition of the periodic parameter domain [0,1) into N segments.
// Node j lives at x_j in [0,1); segment j runs from x_{j-1} to x_j and has
// length h_j = x_j - x_{j-1} (mod 1). Index accessors reduce modulo N.
class PeriodicMesh {
public:
    // Nodes in cyclic order, each in [0,1). Segment lengths are the periodic
    // gaps, so they sum to 1 by construction; a shuffled list is rejected.
    explicit PeriodicMesh(std::vector<double> nodes) : nodes_(std::move(nodes)) {
        const std::size_t n = nodes_.size();
        if (n < 3) throw ConfigError("PeriodicMesh: need at least 3 nodes");
        seg_len_.resize(n);
        double total = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double x = nodes_[j];
            if (!(x >= 0.0 && x < 1.0))
                throw ConfigError("PeriodicMesh: nodes must lie in [0,1)");
            double h = x - nodes_[j == 0 ? n - 1 : j - 1];
            if (h <= 0.0) h += 1.0;
            if (!(h > 0.0))
                throw ConfigError("PeriodicMesh: segment lengths must be positive");
            seg_len_[j] = h;
            total += h;
            h_max_ = std::max(h_max_, h);
        }
        const double tol = 8.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(n);
        if (std::abs(total - 1.0) > tol)
            throw ConfigError("PeriodicMesh: segments do not tile [0,1) (nodes not in cyclic order?)");
    }

    // x_j = j/n with the closing node stored as 0; every h_j is exactly 1/n.
    static PeriodicMesh uniform(int n) {
        if (n < 3) throw ConfigError("uniform mesh: need n >= 3 (a polygon has at least 3 vertices)");
        const std::size_t un = static_cast<std::size_t>(n);
        std::vector<double> nodes(un);
        for (std::size_t j = 0; j + 1 < un; ++j)
            nodes[j] = static_cast<double>(j + 1) / static_cast<double>(n);
        nodes[un - 1] = 0.0;
        return PeriodicMesh(std::move(nodes), std::vector<double>(un, 1.0 / static_cast<double>(n)));
    }

    std::size_t size() const { return nodes_.size(); }
    double node(std::ptrdiff_t j) const { return nodes_[pmod(j, size())]; }
    double seg_len(std::ptrdiff_t j) const { return seg_len_[pmod(j, size())]; }
    double h_max() const { return h_max_; }
    std::span<const double> nodes() const { return nodes_; }
    std::span<const double> seg_lens() const { return seg_len_; }

    // Grid regularity: h_j >= cbar*h and |h_{j+1} - h_j| <= cbar*h^2 for all j.
    bool check_regularity(double cbar) const {
        if (!(cbar > 0.0 && cbar <= 1.0))
            throw ConfigError("check_regularity: cbar must lie in (0,1]");
        const std::size_t n = size();
        for (std::size_t j = 0; j < n; ++j) {
            const double hj = seg_len_[j];
            const double hn = seg_len_[(j + 1) % n];
            if (hj < cbar * h_max_) return false;
            if (std::abs(hn - hj) > cbar * h_max_ * h_max_) return false;
        }
        return true;
    }

private:
    PeriodicMesh(std::vector<double> nodes, std::vector<double> seg_len)
        : nodes_(std::move(nodes)), seg_len_(std::move(seg_len)) {
        for (double h : seg_len_) h_max_ = std::max(h_max_, h);
    }

    std::vector<double> nodes_;
    std::vector<double> seg_len_;
    double h_max_ = 0.0;
};

// Nodal interpolation: sample fn at every mesh node (componentwise for
// vector-valued fn).
template <class F>
auto interpolate_nodal(F&& fn, const PeriodicMesh& mesh) {
    using Value = decltype(fn(0.0));
    std::vector<Value> out(mesh.size());
    for (std::size_t j = 0; j < mesh.size(); ++j) out[j] = fn(mesh.node(static_cast<std::ptrdiff_t>(j)));
    return out;
}

} // namespace csf
