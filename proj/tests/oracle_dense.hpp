// Test-only dense symmetric eigenvalue oracle, independent of the library's
// solvers. Classical Jacobi with off-diagonal sweeps until convergence;
// intended for matrices up to ~30x30.
#pragma once

#include "surfspec/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace oracle {

inline std::vector<double> dense_symmetric_eigenvalues(std::vector<double> a, int n) {
    if (n > 40) throw std::invalid_argument("oracle limited to n <= 40");
    auto A = [&](int i, int j) -> double& { return a[(std::size_t)i * n + j]; };
    for (int sweep = 0; sweep < 200; ++sweep) {
        double off = 0.0, scale = 1e-300;
        for (int i = 0; i < n; ++i) {
            scale = std::max(scale, std::abs(A(i, i)));
            for (int j = i + 1; j < n; ++j) off = std::max(off, std::abs(A(i, j)));
        }
        if (off <= 1e-15 * std::max(scale, off)) break;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                double apq = A(p, q);
                if (apq == 0.0) continue;
                double tau = (A(q, q) - A(p, p)) / (2.0 * apq);
                double t = (tau >= 0.0) ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                        : -1.0 / (-tau + std::sqrt(1.0 + tau * tau));
                double c = 1.0 / std::sqrt(1.0 + t * t), s = t * c;
                for (int k = 0; k < n; ++k) {
                    double akp = A(k, p), akq = A(k, q);
                    A(k, p) = c * akp - s * akq;
                    A(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    double apk = A(p, k), aqk = A(q, k);
                    A(p, k) = c * apk - s * aqk;
                    A(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> ev(n);
    for (int i = 0; i < n; ++i) ev[i] = A(i, i);
    std::sort(ev.begin(), ev.end());
    return ev;
}

inline std::vector<double> densify(const surfspec::linalg::TridiagonalMatrix& T) {
    int n = T.n();
    std::vector<double> a((std::size_t)n * n, 0.0);
    for (int i = 0; i < n; ++i) {
        a[(std::size_t)i * n + i] = T.diag[i];
        if (i + 1 < n) {
            a[(std::size_t)i * n + i + 1] = T.offdiag[i];
            a[(std::size_t)(i + 1) * n + i] = T.offdiag[i];
        }
    }
    return a;
}

// Densified symmetric form of the (optionally mass-weighted) banded pencil:
// with a diagonal mass M the returned matrix is M^{-1/2} K M^{-1/2}, whose
// eigenvalues are those of K v = e M v.
inline std::vector<double> densify(const surfspec::linalg::BandedMatrix& B) {
    int n = B.n;
    std::vector<double> a((std::size_t)n * n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = std::max(0, i - B.bandwidth); j <= i; ++j) {
            double v = B.get(i, j);
            if (B.has_mass()) v /= std::sqrt(B.mass[i] * B.mass[j]);
            a[(std::size_t)i * n + j] = v;
            a[(std::size_t)j * n + i] = v;
        }
    return a;
}

// Deterministic pseudo-random stream for test matrix generation.
struct Rng {
    std::uint64_t s;
    explicit Rng(std::uint64_t seed) : s(seed * 2654435761u + 1) {}
    double uniform() { // in (-1, 1)
        s = s * 6364136223846793005ull + 1442695040888963407ull;
        return (double)(s >> 11) / (double)(1ull << 52) - 1.0;
    }
};

} // namespace oracle
