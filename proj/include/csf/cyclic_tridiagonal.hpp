#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "csf/errors.hpp"

namespace csf {

// Symmetric cyclic tridiagonal matrix. diag[i] is the main diagonal entry of
// row i; off[i] couples unknowns i and i+1 (mod n), so off[n-1] is the
// wrap-around corner entry. A single off array serves both triangles, which
// makes the matrix symmetric by construction. n >= 3.
struct CyclicTridiagonal {
    std::vector<double> diag;
    std::vector<double> off;

    std::size_t size() const { return diag.size(); }
};

inline std::vector<double> matvec(const CyclicTridiagonal& a, std::span<const double> v) {
    const std::size_t n = a.size();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t in = (i + 1) % n;
        const std::size_t ip = (i + n - 1) % n;
        out[i] = a.diag[i] * v[i] + a.off[i] * v[in] + a.off[ip] * v[ip];
    }
    return out;
}

inline double quadratic_form(const CyclicTridiagonal& a, std::span<const double> v) {
    const std::size_t n = a.size();
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t in = (i + 1) % n;
        sum += a.diag[i] * v[i] * v[i] + 2.0 * a.off[i] * v[i] * v[in];
    }
    return sum;
}

inline double inf_norm(const CyclicTridiagonal& a) {
    const std::size_t n = a.size();
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t ip = (i + n - 1) % n;
        worst = std::max(worst, std::abs(a.diag[i]) + std::abs(a.off[i]) + std::abs(a.off[ip]));
    }
    return worst;
}

// Direct solver: Thomas elimination of the tridiagonal core plus a rank-one
// correction for the periodic corner entries. The factorization is reusable,
// so one system can be solved for several right-hand sides. For n == 3 every
// entry pair is coupled and the matrix is dense; that case is solved by 3x3
// Gaussian elimination with partial pivoting.
class CyclicSolver {
public:
    explicit CyclicSolver(const CyclicTridiagonal& a) : a_(a) {
        const std::size_t n = a.size();
        if (n < 3 || a.off.size() != n)
            throw ConfigError("CyclicSolver: need diag and off of equal size n >= 3");
        scale_ = inf_norm(a);
        if (!(scale_ > 0.0)) throw SingularSystemError("CyclicSolver: zero matrix");
        if (n == 3) {
            factor_dense3();
            return;
        }
        // Modified tridiagonal B with A = B + u v^T,
        // u = (gamma, 0, ..., 0, alpha)^T, v = (1, 0, ..., 0, alpha/gamma)^T.
        alpha_ = a.off[n - 1];
        gamma_ = (a.diag[0] != 0.0) ? -a.diag[0] : -scale_;
        bdiag_.assign(a.diag.begin(), a.diag.end());
        bdiag_[0] -= gamma_;
        bdiag_[n - 1] -= alpha_ * alpha_ / gamma_;
        factor_tridiag();
        std::vector<double> u(n, 0.0);
        u[0] = gamma_;
        u[n - 1] = alpha_;
        z_ = solve_tridiag(u);
        denom_ = 1.0 + z_[0] + (alpha_ / gamma_) * z_[n - 1];
        const double denom_scale = 1.0 + std::abs(z_[0]) + std::abs(alpha_ / gamma_ * z_[n - 1]);
        if (std::abs(denom_) < 1e-14 * denom_scale)
            throw SingularSystemError("CyclicSolver: singular system (corner correction degenerate)");
    }

    std::vector<double> solve(std::span<const double> rhs) const {
        const std::size_t n = a_.size();
        if (rhs.size() != n) throw ConfigError("CyclicSolver::solve: rhs size mismatch");
        if (n == 3) return solve_dense3(rhs);
        std::vector<double> y = solve_tridiag(rhs);
        const double f = (y[0] + (alpha_ / gamma_) * y[n - 1]) / denom_;
        for (std::size_t i = 0; i < n; ++i) y[i] -= f * z_[i];
        return y;
    }

private:
    void factor_tridiag() {
        const std::size_t n = bdiag_.size();
        piv_.resize(n);
        mult_.resize(n);
        piv_[0] = bdiag_[0];
        check_pivot(piv_[0]);
        for (std::size_t i = 1; i < n; ++i) {
            mult_[i] = a_.off[i - 1] / piv_[i - 1];
            piv_[i] = bdiag_[i] - mult_[i] * a_.off[i - 1];
            check_pivot(piv_[i]);
        }
    }

    std::vector<double> solve_tridiag(std::span<const double> rhs) const {
        const std::size_t n = bdiag_.size();
        std::vector<double> x(n);
        x[0] = rhs[0];
        for (std::size_t i = 1; i < n; ++i) x[i] = rhs[i] - mult_[i] * x[i - 1];
        x[n - 1] /= piv_[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) x[i] = (x[i] - a_.off[i] * x[i + 1]) / piv_[i];
        return x;
    }

    void factor_dense3() {
        const auto& d = a_.diag;
        const auto& o = a_.off;
        m3_ = {{{d[0], o[0], o[2]}, {o[0], d[1], o[1]}, {o[2], o[1], d[2]}}};
        perm3_ = {0, 1, 2};
        for (int col = 0; col < 3; ++col) {
            int p = col;
            for (int r = col + 1; r < 3; ++r)
                if (std::abs(m3_[r][col]) > std::abs(m3_[p][col])) p = r;
            std::swap(m3_[col], m3_[p]);
            std::swap(perm3_[col], perm3_[p]);
            check_pivot(m3_[col][col]);
            for (int r = col + 1; r < 3; ++r) {
                m3_[r][col] /= m3_[col][col];
                for (int c = col + 1; c < 3; ++c) m3_[r][c] -= m3_[r][col] * m3_[col][c];
            }
        }
    }

    std::vector<double> solve_dense3(std::span<const double> rhs) const {
        double y[3];
        for (int i = 0; i < 3; ++i) {
            y[i] = rhs[static_cast<std::size_t>(perm3_[i])];
            for (int j = 0; j < i; ++j) y[i] -= m3_[i][j] * y[j];
        }
        for (int i = 2; i >= 0; --i) {
            for (int j = i + 1; j < 3; ++j) y[i] -= m3_[i][j] * y[j];
            y[i] /= m3_[i][i];
        }
        return {y[0], y[1], y[2]};
    }

    void check_pivot(double p) const {
        if (std::abs(p) < 1e-14 * scale_)
            throw SingularSystemError("CyclicSolver: pivot below tolerance (singular system)");
    }

    CyclicTridiagonal a_;
    double scale_ = 0.0;
    // n >= 4 path
    double alpha_ = 0.0;
    double gamma_ = 0.0;
    double denom_ = 0.0;
    std::vector<double> bdiag_, piv_, mult_, z_;
    // n == 3 path
    std::array<std::array<double, 3>, 3> m3_{};
    std::array<int, 3> perm3_{};
};

inline std::vector<double> solve(const CyclicTridiagonal& a, std::span<const double> rhs) {
    return CyclicSolver(a).solve(rhs);
}

} // namespace csf
