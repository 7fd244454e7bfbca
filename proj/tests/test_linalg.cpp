#include "doctest.h"
#include "oracle_dense.hpp"
#include "surfspec/errors.hpp"
#include "surfspec/linalg.hpp"

#include <algorithm>
#include <cmath>

using namespace surfspec;
using namespace surfspec::linalg;

namespace {

TridiagonalMatrix random_tridiag(int n, oracle::Rng& rng, double scale = 2.0) {
    TridiagonalMatrix T;
    T.diag.resize(n);
    T.offdiag.resize(n - 1);
    for (int i = 0; i < n; ++i) T.diag[i] = scale * rng.uniform();
    for (int i = 0; i + 1 < n; ++i) T.offdiag[i] = scale * rng.uniform();
    return T;
}

BandedMatrix random_band(int n, int bw, oracle::Rng& rng, bool with_mass = false) {
    BandedMatrix B = BandedMatrix::zero(n, bw);
    for (int i = 0; i < n; ++i)
        for (int j = std::max(0, i - bw); j <= i; ++j) B.at(i, j) = 2.0 * rng.uniform();
    if (with_mass) {
        B.mass.resize(n);
        for (int i = 0; i < n; ++i) B.mass[i] = 0.5 + std::abs(rng.uniform());
    }
    return B;
}

// 2-D Dirichlet FD Laplacian on an m x m interior grid, unit spacing;
// eigenvalues are 4 sin^2(p pi / (2(m+1))) + 4 sin^2(q pi / (2(m+1))).
BandedMatrix fd_laplacian_2d(int m) {
    int n = m * m;
    BandedMatrix B = BandedMatrix::zero(n, m);
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c) {
            int i = r * m + c;
            B.at(i, i) = 4.0;
            if (c > 0) B.at(i, i - 1) = -1.0;
            if (r > 0) B.at(i, i - m) = -1.0;
        }
    return B;
}

std::vector<double> fd_laplacian_2d_eigs(int m) {
    std::vector<double> ev;
    for (int p = 1; p <= m; ++p)
        for (int q = 1; q <= m; ++q) {
            double sp = std::sin(p * M_PI / (2.0 * (m + 1)));
            double sq = std::sin(q * M_PI / (2.0 * (m + 1)));
            ev.push_back(4.0 * (sp * sp + sq * sq));
        }
    std::sort(ev.begin(), ev.end());
    return ev;
}

} // namespace

TEST_CASE("sturm_count on diagonal and 2x2 matrices") {
    TridiagonalMatrix T{{1, 2, 3}, {0, 0}};
    CHECK(sturm_count(T, 2.5) == 2);
    TridiagonalMatrix T2{{0, 0}, {1}}; // eigenvalues -1, +1
    CHECK(sturm_count(T2, 0.0) == 1);
    CHECK(sturm_count(T2, -2.0) == 0);
    CHECK(sturm_count(T2, 2.0) == 2);
}

TEST_CASE("sturm_count matches dense oracle at the spectral median") {
    for (int trial = 0; trial < 20; ++trial) {
        oracle::Rng rng(100 + trial);
        auto T = random_tridiag(8, rng);
        auto ev = oracle::dense_symmetric_eigenvalues(oracle::densify(T), 8);
        double median = 0.5 * (ev[3] + ev[4]);
        int expect = (int)(std::lower_bound(ev.begin(), ev.end(), median) - ev.begin());
        CHECK(sturm_count(T, median) == expect);
    }
}

TEST_CASE("sturm_count is monotone in the shift") {
    oracle::Rng rng(7);
    auto T = random_tridiag(15, rng);
    auto [lo, hi] = gershgorin_tridiag(T);
    int prev = 0;
    for (int k = 0; k <= 20; ++k) {
        int c = sturm_count(T, lo + (hi - lo) * k / 20.0);
        CHECK(c >= prev);
        prev = c;
    }
    CHECK(prev == 15);
}

TEST_CASE("eigs_below_tridiag single cell") {
    TridiagonalMatrix T{{5}, {}};
    auto w = eigs_below_tridiag(T, 6.0, 1e-12);
    CHECK(w.count() == 1);
    CHECK(w.eigenvalues[0] == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(w.deficit == doctest::Approx(1.0));
}

TEST_CASE("eigs_below_tridiag full spectrum equals dense oracle") {
    for (int trial = 0; trial < 10; ++trial) {
        oracle::Rng rng(31 + trial);
        auto T = random_tridiag(12, rng);
        auto ev = oracle::dense_symmetric_eigenvalues(oracle::densify(T), 12);
        auto [lo, hi] = gershgorin_tridiag(T);
        (void)lo;
        auto w = eigs_below_tridiag(T, hi + 1.0, 1e-12);
        REQUIRE(w.count() == 12);
        for (int i = 0; i < 12; ++i)
            CHECK(std::abs(w.eigenvalues[i] - ev[i]) <= 1e-10 * std::max(1.0, std::abs(ev[i])));
    }
}

TEST_CASE("band_inertia on a diagonal matrix") {
    BandedMatrix B = BandedMatrix::zero(3, 1);
    B.at(0, 0) = 1.0;
    B.at(1, 1) = 4.0;
    B.at(2, 2) = 9.0;
    CHECK(band_inertia(B, 5.0) == 2);
    CHECK(band_inertia(B, 0.5) == 0);
    CHECK(band_inertia(B, 100.0) == 3);
}

TEST_CASE("band_inertia matches the closed-form FD Laplacian counts") {
    auto B = fd_laplacian_2d(5);
    auto ev = fd_laplacian_2d_eigs(5);
    // shift between the two lowest analytic eigenvalues
    double sigma = 0.5 * (ev[0] + ev[1]);
    CHECK(band_inertia(B, sigma) == 1);
    for (int k = 0; k < (int)ev.size() - 1; k += 5) {
        double s = 0.5 * (ev[k] + ev[k + 1]);
        int expect = (int)(std::lower_bound(ev.begin(), ev.end(), s) - ev.begin());
        CHECK(band_inertia(B, s) == expect);
    }
    auto [glo, ghi] = gershgorin_band(B);
    (void)ghi;
    CHECK(band_inertia(B, glo - 0.5) == 0);
}

TEST_CASE("band_inertia throws SingularShift on an exact eigenvalue") {
    BandedMatrix B = BandedMatrix::zero(2, 1);
    B.at(0, 0) = 1.0;
    B.at(1, 1) = 2.0;
    CHECK_THROWS_AS(band_inertia(B, 1.0), SingularShift);
}

TEST_CASE("eigs_below_band recovers the FD Laplacian spectrum") {
    auto B = fd_laplacian_2d(5);
    auto ev = fd_laplacian_2d_eigs(5);
    auto w = eigs_below_band(B, ev.back() + 1.0, 1e-11);
    REQUIRE(w.count() == 25);
    for (int i = 0; i < 25; ++i) CHECK(std::abs(w.eigenvalues[i] - ev[i]) <= 1e-9);
    auto empty = eigs_below_band(B, ev.front() - 0.1, 1e-11);
    CHECK(empty.count() == 0);
    CHECK(empty.deficit == 0.0);
}

TEST_CASE("eigs_below_band equals dense oracle on random banded matrices") {
    for (int trial = 0; trial < 8; ++trial) {
        oracle::Rng rng(1000 + trial);
        auto B = random_band(20, 3, rng);
        auto ev = oracle::dense_symmetric_eigenvalues(oracle::densify(B), 20);
        double sigma = ev[13] + 0.1 * (ev[14] - ev[13]);
        auto w = eigs_below_band(B, sigma, 1e-12);
        int expect = (int)(std::lower_bound(ev.begin(), ev.end(), sigma) - ev.begin());
        REQUIRE(w.count() == expect);
        for (int i = 0; i < expect; ++i)
            CHECK(std::abs(w.eigenvalues[i] - ev[i]) <= 1e-9 * std::max(1.0, std::abs(ev[i])));
    }
}

TEST_CASE("generalized pencil: diagonal mass agrees with the scaled dense oracle") {
    for (int trial = 0; trial < 6; ++trial) {
        oracle::Rng rng(4200 + trial);
        auto B = random_band(16, 2, rng, /*with_mass=*/true);
        auto ev = oracle::dense_symmetric_eigenvalues(oracle::densify(B), 16);
        double sigma = ev[9] + 0.2 * (ev[10] - ev[9]);
        auto w = eigs_below_band(B, sigma, 1e-12);
        REQUIRE(w.count() == 10);
        for (int i = 0; i < 10; ++i)
            CHECK(std::abs(w.eigenvalues[i] - ev[i]) <= 1e-9 * std::max(1.0, std::abs(ev[i])));
        CHECK(band_inertia(B, sigma) == 10);
    }
}

TEST_CASE("window consistency and deficit identity") {
    oracle::Rng rng(99);
    auto B = random_band(24, 4, rng);
    auto [glo, ghi] = gershgorin_band(B);
    double sigma = 0.5 * (glo + ghi);
    auto w = eigs_below_band(B, sigma, 1e-12);
    CHECK(band_inertia(B, sigma) == w.count());
    CHECK(w.deficit == w.recompute_deficit()); // fixed ascending summation order
    for (double e : w.eigenvalues) CHECK(e < sigma);
}

TEST_CASE("band_inertia monotone in the shift") {
    oracle::Rng rng(123);
    auto B = random_band(18, 3, rng);
    auto [lo, hi] = gershgorin_band(B);
    int prev = 0;
    for (int k = 0; k <= 12; ++k) {
        int c = band_inertia(B, lo + (hi - lo) * (k + 0.131) / 12.5);
        CHECK(c >= prev);
        prev = c;
    }
}

TEST_CASE("subspace window solver agrees with slicing") {
    for (int trial = 0; trial < 5; ++trial) {
        oracle::Rng rng(777 + trial);
        auto B = random_band(120, 6, rng, trial % 2 == 1);
        auto ev = oracle::densify(B); // only to pick a threshold scale
        auto [glo, ghi] = gershgorin_band(B);
        double sigma = glo + 0.15 * (ghi - glo);
        auto a = eigs_below_band(B, sigma, 1e-11);
        auto b = eigs_below_band_subspace(B, sigma, 1e-11, 5 + trial);
        REQUIRE(a.count() == b.count());
        for (int i = 0; i < a.count(); ++i)
            CHECK(std::abs(a.eigenvalues[i] - b.eigenvalues[i]) <=
                  1e-9 * std::max(1.0, std::abs(a.eigenvalues[i])));
    }
}

TEST_CASE("warm-start hints reproduce the cold path") {
    oracle::Rng rng(31337);
    auto B = random_band(40, 5, rng);
    auto [glo, ghi] = gershgorin_band(B);
    double sigma = glo + 0.4 * (ghi - glo);
    auto cold = eigs_below_band(B, sigma, 1e-11);
    SliceOptions opts;
    for (double e : cold.eigenvalues) opts.hints.push_back({e - 1e-4, e + 1e-4});
    auto warm = eigs_below_band(B, sigma, 1e-11, opts);
    REQUIRE(warm.count() == cold.count());
    for (int i = 0; i < warm.count(); ++i)
        CHECK(warm.eigenvalues[i] == doctest::Approx(cold.eigenvalues[i]).epsilon(1e-9));
    // wrong hints must fall back, not fail
    SliceOptions bad;
    for (double e : cold.eigenvalues) bad.hints.push_back({e + 0.5, e + 0.6});
    auto fallback = eigs_below_band(B, sigma, 1e-11, bad);
    CHECK(fallback.count() == cold.count());
}
