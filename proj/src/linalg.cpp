#include "surfspec/linalg.hpp"

#include "surfspec/errors.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>

namespace surfspec::linalg {

namespace {

constexpr double kPivotAbsFloor = 1e-300;
constexpr double kPivotRelFloor = 1e-14;

double jitter_scale(double sigma) { return 1e-10 * (1.0 + std::abs(sigma)); }

// Deterministic fill for iteration seed vectors.
void lcg_fill(std::vector<double>& x, std::uint64_t seed) {
    std::uint64_t s = seed * 6364136223846793005ull + 1442695040888963407ull;
    for (double& v : x) {
        s = s * 6364136223846793005ull + 1442695040888963407ull;
        v = (double)(s >> 11) / (double)(1ull << 53) - 0.5;
    }
}

} // namespace

BandedMatrix BandedMatrix::zero(int n, int bandwidth) {
    BandedMatrix b;
    b.n = n;
    b.bandwidth = bandwidth;
    b.bands.assign((std::size_t)n * (bandwidth + 1), 0.0);
    return b;
}

double& BandedMatrix::at(int i, int j) {
    assert(j <= i && i - j <= bandwidth);
    return bands[(std::size_t)i * (bandwidth + 1) + (j - i + bandwidth)];
}

double BandedMatrix::get(int i, int j) const {
    if (j > i) std::swap(i, j);
    if (i - j > bandwidth) return 0.0;
    return bands[(std::size_t)i * (bandwidth + 1) + (j - i + bandwidth)];
}

void BandedMatrix::matvec(const std::vector<double>& x, std::vector<double>& y) const {
    y.assign(n, 0.0);
    const int w = bandwidth;
    for (int i = 0; i < n; ++i) {
        const double* row = &bands[(std::size_t)i * (w + 1)];
        double yi = row[w] * x[i];
        const int j0 = std::max(0, i - w);
        for (int j = j0; j < i; ++j) {
            const double v = row[j - i + w];
            yi += v * x[j];
            y[j] += v * x[i];
        }
        y[i] += yi;
    }
}

double SpectralWindow::recompute_deficit() const {
    double s = 0.0;
    for (double e : eigenvalues) s += threshold - e;
    return s;
}

int sturm_count(const TridiagonalMatrix& T, double sigma) {
    const int n = T.n();
    int count = 0;
    double q = 1.0;
    for (int i = 0; i < n; ++i) {
        double off2 = (i > 0) ? T.offdiag[i - 1] * T.offdiag[i - 1] : 0.0;
        q = (T.diag[i] - sigma) - (i > 0 ? off2 / q : 0.0);
        if (q == 0.0 || std::abs(q) < kPivotAbsFloor) q = -kPivotAbsFloor;
        if (q < 0.0) ++count;
    }
    return count;
}

std::pair<double, double> gershgorin_tridiag(const TridiagonalMatrix& T) {
    const int n = T.n();
    double lo = std::numeric_limits<double>::max();
    double hi = std::numeric_limits<double>::lowest();
    for (int i = 0; i < n; ++i) {
        double r = 0.0;
        if (i > 0) r += std::abs(T.offdiag[i - 1]);
        if (i + 1 < n) r += std::abs(T.offdiag[i]);
        lo = std::min(lo, T.diag[i] - r);
        hi = std::max(hi, T.diag[i] + r);
    }
    return {lo, hi};
}

namespace {

// Solves (T - shift) x = b with partial pivoting; the factored band has two
// upper diagonals after row swaps.
bool tridiag_shifted_solve(const TridiagonalMatrix& T, double shift, std::vector<double>& x) {
    const int n = T.n();
    std::vector<double> d(n), u1(std::max(0, n - 1), 0.0), u2(std::max(0, n - 2), 0.0);
    std::vector<double> l(std::max(0, n - 1), 0.0);
    for (int i = 0; i < n; ++i) d[i] = T.diag[i] - shift;
    for (int i = 0; i + 1 < n; ++i) {
        u1[i] = T.offdiag[i];
        l[i] = T.offdiag[i];
    }
    // forward elimination with row swap
    for (int i = 0; i + 1 < n; ++i) {
        double a = d[i], b = l[i];
        if (std::abs(b) > std::abs(a)) {
            std::swap(d[i], l[i]);
            std::swap(u1[i], d[i + 1]);
            if (i + 2 < n) std::swap(u2[i], u1[i + 1]);
            std::swap(x[i], x[i + 1]);
            a = d[i];
            b = l[i];
        }
        if (a == 0.0) a = d[i] = kPivotAbsFloor;
        double m = b / a;
        d[i + 1] -= m * u1[i];
        if (i + 2 < n) u1[i + 1] -= m * u2[i];
        x[i + 1] -= m * x[i];
    }
    if (d[n - 1] == 0.0) d[n - 1] = kPivotAbsFloor;
    // back substitution
    for (int i = n - 1; i >= 0; --i) {
        double s = x[i];
        if (i + 1 < n) s -= u1[i] * x[i + 1];
        if (i + 2 < n) s -= u2[i] * x[i + 2];
        x[i] = s / d[i];
    }
    for (double v : x)
        if (!std::isfinite(v)) return false;
    return true;
}

double tridiag_rayleigh(const TridiagonalMatrix& T, const std::vector<double>& x) {
    const int n = T.n();
    double num = 0.0, den = 0.0;
    for (int i = 0; i < n; ++i) {
        double tx = T.diag[i] * x[i];
        if (i > 0) tx += T.offdiag[i - 1] * x[i - 1];
        if (i + 1 < n) tx += T.offdiag[i] * x[i + 1];
        num += x[i] * tx;
        den += x[i] * x[i];
    }
    return num / den;
}

} // namespace

SpectralWindow eigs_below_tridiag(const TridiagonalMatrix& T, double sigma, double tol) {
    if (!(tol > 0.0)) throw ValidationError("eigs_below_tridiag: tol must be positive");
    SpectralWindow w;
    w.threshold = sigma;
    const int m = sturm_count(T, sigma);
    if (m == 0) return w;
    auto [glo, ghi] = gershgorin_tridiag(T);
    (void)ghi;
    w.eigenvalues.reserve(m);
    double prev_hi = glo;
    for (int k = 1; k <= m; ++k) {
        double lo = prev_hi, hi = sigma;
        int it = 0;
        while (hi - lo > tol) {
            if (++it > 200) {
                if (hi - lo > tol * (1.0 + std::abs(sigma)))
                    throw BisectionStall("eigs_below_tridiag: interval failed to shrink");
                break;
            }
            double mid = 0.5 * (lo + hi);
            if (sturm_count(T, mid) >= k)
                hi = mid;
            else
                lo = mid;
        }
        prev_hi = lo; // the (k+1)-th eigenvalue is >= lo
        double e = 0.5 * (lo + hi);
        // one Rayleigh-quotient refinement from an inverse-iteration vector
        std::vector<double> x(T.n());
        lcg_fill(x, (std::uint64_t)k * 977 + 13);
        if (tridiag_shifted_solve(T, e, x)) {
            double rho = tridiag_rayleigh(T, x);
            if (rho >= lo - tol && rho <= hi + tol) e = rho;
        }
        w.eigenvalues.push_back(e);
    }
    std::sort(w.eigenvalues.begin(), w.eigenvalues.end());
    w.deficit = w.recompute_deficit();
    return w;
}

BandFactorization::BandFactorization(const BandedMatrix& B, double sigma)
    : n_(B.n), bw_(B.bandwidth) {
    const int n = n_, w = bw_;
    f_ = B.bands; // copy, then shift the diagonal
    std::vector<double> scale(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double* row = &f_[(std::size_t)i * (w + 1)];
        row[w] -= sigma * (B.has_mass() ? B.mass[i] : 1.0);
    }
    // row scales (inf-like norm of the shifted matrix) for the pivot guard
    for (int i = 0; i < n; ++i) {
        const double* row = &f_[(std::size_t)i * (w + 1)];
        double s = std::abs(row[w]);
        const int j0 = std::max(0, i - w);
        for (int j = j0; j < i; ++j) {
            double v = std::abs(row[j - i + w]);
            s += v;
            scale[j] += v;
        }
        scale[i] += s;
    }
    // row profiles (first stored nonzero column)
    start_.assign(n, 0);
    for (int i = 0; i < n; ++i) {
        const double* row = &f_[(std::size_t)i * (w + 1)];
        int j0 = std::max(0, i - w);
        int s = i;
        for (int j = j0; j < i; ++j)
            if (row[j - i + w] != 0.0) {
                s = j;
                break;
            }
        start_[i] = s;
    }
    // reach[j] = how far below the diagonal column j extends, from the
    // envelope (profiles are preserved by LDL^T fill)
    std::vector<int> maxrow(n, 0);
    for (int i = 0; i < n; ++i) maxrow[start_[i]] = std::max(maxrow[start_[i]], i);
    std::vector<int> reach(n, 0);
    int running = 0;
    for (int j = 0; j < n; ++j) {
        running = std::max(running, maxrow[j]);
        reach[j] = std::min({running - j, w, n - 1 - j});
    }

    std::vector<double> col(w + 1);
    neg_ = 0;
    for (int j = 0; j < n; ++j) {
        double* rowj = &f_[(std::size_t)j * (w + 1)];
        const double d = rowj[w];
        const double guard = std::max(kPivotAbsFloor, kPivotRelFloor * scale[j]);
        if (std::abs(d) < guard)
            throw SingularShift("band LDL^T: pivot under guard at row " + std::to_string(j));
        if (d < 0.0) ++neg_;
        const int m = reach[j];
        if (m <= 0) continue;
        for (int k = 1; k <= m; ++k) {
            int i = j + k;
            col[k] = (start_[i] <= j) ? f_[(std::size_t)i * (w + 1) + (w - k)] : 0.0;
        }
        for (int i = 1; i <= m; ++i) {
            if (start_[j + i] > j) continue;
            const double lij = col[i] / d;
            double* base = &f_[(std::size_t)(j + i) * (w + 1) + (w - i)];
            for (int k = 1; k <= i; ++k) base[k] -= lij * col[k];
            base[0] = lij;
        }
    }
}

void BandFactorization::solve(std::vector<double>& x) const {
    const int n = n_, w = bw_;
    // z = L^{-1} b
    for (int i = 0; i < n; ++i) {
        const double* row = &f_[(std::size_t)i * (w + 1)];
        double s = x[i];
        for (int j = start_[i]; j < i; ++j) s -= row[j - i + w] * x[j];
        x[i] = s;
    }
    // w = D^{-1} z
    for (int i = 0; i < n; ++i) x[i] /= f_[(std::size_t)i * (w + 1) + w];
    // x = L^{-T} w  (row-wise scatter, descending)
    for (int i = n - 1; i > 0; --i) {
        const double* row = &f_[(std::size_t)i * (w + 1)];
        const double xi = x[i];
        for (int j = start_[i]; j < i; ++j) x[j] -= row[j - i + w] * xi;
    }
}

int band_inertia(const BandedMatrix& B, double sigma) {
    return BandFactorization(B, sigma).negative_pivots();
}

std::pair<double, double> gershgorin_band(const BandedMatrix& B) {
    const int n = B.n, w = B.bandwidth;
    const bool has_m = B.has_mass();
    std::vector<double> radius(n, 0.0), center(n, 0.0);
    for (int i = 0; i < n; ++i) {
        const double mi = has_m ? B.mass[i] : 1.0;
        center[i] = B.bands[(std::size_t)i * (w + 1) + w] / mi;
        const int j0 = std::max(0, i - w);
        for (int j = j0; j < i; ++j) {
            const double mj = has_m ? B.mass[j] : 1.0;
            double v = std::abs(B.bands[(std::size_t)i * (w + 1) + (j - i + w)]) / std::sqrt(mi * mj);
            radius[i] += v;
            radius[j] += v;
        }
    }
    double lo = std::numeric_limits<double>::max();
    double hi = std::numeric_limits<double>::lowest();
    for (int i = 0; i < n; ++i) {
        lo = std::min(lo, center[i] - radius[i]);
        hi = std::max(hi, center[i] + radius[i]);
    }
    return {lo, hi};
}

namespace {

struct InertiaProbe {
    const BandedMatrix& B;

    // Inertia at (approximately) sigma; on SingularShift the shift is moved
    // by growing jitter up to 5 retries.
    int count(double sigma) const {
        const double jit = jitter_scale(sigma);
        const double deltas[6] = {0.0, jit, -jit, 4 * jit, -4 * jit, 16 * jit};
        for (int t = 0; t < 6; ++t) {
            try {
                return band_inertia(B, sigma + deltas[t]);
            } catch (const SingularShift&) {
                if (t == 5) throw;
            }
        }
        return 0; // unreachable
    }

    // Factorization with the same jitter policy; reports the shift used.
    BandFactorization factor(double sigma, double* used = nullptr) const {
        const double jit = jitter_scale(sigma);
        const double deltas[6] = {0.0, jit, -jit, 4 * jit, -4 * jit, 16 * jit};
        for (int t = 0; t < 6; ++t) {
            try {
                BandFactorization f(B, sigma + deltas[t]);
                if (used) *used = sigma + deltas[t];
                return f;
            } catch (const SingularShift&) {
                if (t == 5) throw;
            }
        }
        throw SingularShift("unreachable");
    }
};

double m_norm(const BandedMatrix& B, const std::vector<double>& x) {
    double s = 0.0;
    if (B.has_mass())
        for (int i = 0; i < B.n; ++i) s += B.mass[i] * x[i] * x[i];
    else
        for (double v : x) s += v * v;
    return std::sqrt(s);
}

// Inverse iteration anchored at `shift`, certified by the residual bound
// dist(rho, spectrum) <= ||K x - rho M x||_{M^{-1}} / ||x||_M. Returns a
// value only when the certificate places it strictly inside (lo, hi) with
// margin, so the bracketed eigenvalue (or cluster value) is the one found.
std::optional<double> refine_at_shift(const BandedMatrix& B, double shift, double lo, double hi,
                                      double tol, const InertiaProbe& probe,
                                      std::uint64_t seed) {
    const int n = B.n;
    std::optional<BandFactorization> f;
    try {
        f.emplace(probe.factor(shift, nullptr));
    } catch (const SingularShift&) {
        return std::nullopt;
    }
    std::vector<double> x(n), kx(n), y(n);
    lcg_fill(x, seed);
    double nrm = m_norm(B, x);
    for (double& v : x) v /= nrm;
    double rho_prev = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 50; ++it) {
        // y = (K - shift M)^{-1} M x
        if (B.has_mass())
            for (int i = 0; i < n; ++i) y[i] = B.mass[i] * x[i];
        else
            y = x;
        f->solve(y);
        nrm = m_norm(B, y);
        if (!(nrm > 0.0) || !std::isfinite(nrm)) return std::nullopt;
        for (int i = 0; i < n; ++i) x[i] = y[i] / nrm;
        B.matvec(x, kx);
        double rho = 0.0;
        for (int i = 0; i < n; ++i) rho += x[i] * kx[i]; // x is M-normalized
        double resid2 = 0.0;
        for (int i = 0; i < n; ++i) {
            double mi = B.has_mass() ? B.mass[i] : 1.0;
            double r = kx[i] - rho * mi * x[i];
            resid2 += r * r / mi;
        }
        double resid = std::sqrt(resid2);
        if (resid <= 0.5 * tol && rho > lo && rho < hi &&
            std::min(rho - lo, hi - rho) > resid)
            return rho;
        if (std::abs(rho - rho_prev) < 1e-3 * tol && resid > 0.5 * tol) return std::nullopt;
        rho_prev = rho;
    }
    return std::nullopt;
}

struct Interval {
    double lo, hi;
    int clo, chi;
};

// Shared bracket-resolution loop. Near a multiple eigenvalue the pivots of
// the shifted factorization shrink like the squared distance, so probes in a
// neighborhood of the cluster can all fail the guard; in that case the value
// is recovered by inverse iteration anchored at the (previously factorable)
// interval endpoints and emitted with the multiplicity given by the counts.
void resolve_intervals(const BandedMatrix& B, std::vector<Interval> stack, double tol,
                       bool rayleigh_refine, const InertiaProbe& probe,
                       std::vector<double>& out) {
    auto try_count = [&](double s) -> std::optional<int> {
        try {
            return probe.count(s);
        } catch (const SingularShift&) {
            return std::nullopt;
        }
    };
    std::uint64_t seq = 0;
    while (!stack.empty()) {
        Interval s = stack.back();
        stack.pop_back();
        const int k = s.chi - s.clo;
        if (k == 0) continue;
        const double width = s.hi - s.lo;
        if (width <= tol) {
            for (int r = 0; r < k; ++r) out.push_back(0.5 * (s.lo + s.hi));
            continue;
        }
        ++seq;
        if (k == 1 && rayleigh_refine) {
            auto e = refine_at_shift(B, 0.5 * (s.lo + s.hi), s.lo, s.hi, tol, probe, seq * 131 + 7);
            if (e) {
                out.push_back(*e);
                continue;
            }
        }
        // bisect; nudge the split point when the factorization is pinned
        bool split = false;
        for (double frac : {0.5, 0.37, 0.11, 0.73}) {
            double mid = s.lo + frac * width;
            auto cmid = try_count(mid);
            if (cmid) {
                stack.push_back({mid, s.hi, *cmid, s.chi});
                stack.push_back({s.lo, mid, s.clo, *cmid});
                split = true;
                break;
            }
        }
        if (split) continue;
        // every interior probe hit the guard: a cluster fills the interval
        bool emitted = false;
        for (double anchor : {s.lo, s.hi}) {
            auto e = refine_at_shift(B, anchor, s.lo, s.hi, tol, probe, seq * 977 + 3);
            if (e) {
                for (int r = 0; r < k; ++r) out.push_back(*e);
                emitted = true;
                break;
            }
        }
        if (!emitted)
            for (int r = 0; r < k; ++r) out.push_back(0.5 * (s.lo + s.hi));
    }
}

} // namespace

SpectralWindow eigs_below_band(const BandedMatrix& B, double sigma, double tol,
                               const SliceOptions& opts) {
    if (!(tol > 0.0)) throw ValidationError("eigs_below_band: tol must be positive");
    InertiaProbe probe{B};
    SpectralWindow w;
    w.threshold = sigma;
    const int m = probe.count(sigma);
    if (m == 0) return w;

    // Warm start: verified seed brackets replace the cold top-level split.
    if (!opts.hints.empty() && (int)opts.hints.size() == m) {
        bool ok = true;
        std::vector<Interval> iv;
        iv.reserve(m);
        for (int k = 0; k < m && ok; ++k) {
            const auto& h = opts.hints[k];
            if (!(h.lo < h.hi) || h.hi > sigma) {
                ok = false;
                break;
            }
            int clo = probe.count(h.lo), chi = probe.count(h.hi);
            if (clo != k || chi != k + 1) ok = false;
            iv.push_back({h.lo, h.hi, clo, chi});
        }
        if (ok) {
            for (int k = 0; k < m; ++k) {
                // refine within the verified bracket
                std::vector<Interval> stack{iv[k]};
                while (!stack.empty()) {
                    Interval s = stack.back();
                    stack.pop_back();
                    if (s.chi == s.clo) continue;
                    if (s.hi - s.lo <= tol) {
                        for (int r = 0; r < s.chi - s.clo; ++r)
                            w.eigenvalues.push_back(0.5 * (s.lo + s.hi));
                        continue;
                    }
                    if (s.chi - s.clo == 1 && opts.rayleigh_refine) {
                        try {
                            auto e = refine_by_inverse_iteration(B, s.lo, s.hi, tol, probe,
                                                                 (std::uint64_t)k + 1);
                            if (e) {
                                w.eigenvalues.push_back(*e);
                                continue;
                            }
                        } catch (const SingularShift&) {
                        }
                    }
                    double mid = 0.5 * (s.lo + s.hi);
                    int cmid = probe.count(mid);
                    stack.push_back({mid, s.hi, cmid, s.chi});
                    stack.push_back({s.lo, mid, s.clo, cmid});
                }
            }
            std::sort(w.eigenvalues.begin(), w.eigenvalues.end());
            w.deficit = w.recompute_deficit();
            return w;
        }
        // hints were wrong: fall through to the cold path
        w.eigenvalues.clear();
    }

    auto [glo, ghi] = gershgorin_band(B);
    (void)ghi;
    double lo0 = glo - 1e-8 * (1.0 + std::abs(glo));
    for (int t = 0; t < 8 && probe.count(lo0) > 0; ++t) lo0 -= std::max(1.0, sigma - lo0);

    std::vector<Interval> stack{{lo0, sigma, 0, m}};
    while (!stack.empty()) {
        Interval s = stack.back();
        stack.pop_back();
        int k = s.chi - s.clo;
        if (k == 0) continue;
        if (s.hi - s.lo <= tol) {
            for (int r = 0; r < k; ++r) w.eigenvalues.push_back(0.5 * (s.lo + s.hi));
            continue;
        }
        if (k == 1 && opts.rayleigh_refine) {
            try {
                auto e = refine_by_inverse_iteration(B, s.lo, s.hi, tol, probe,
                                                     (std::uint64_t)s.clo * 131 + 7);
                if (e) {
                    w.eigenvalues.push_back(*e);
                    continue;
                }
            } catch (const SingularShift&) {
            }
        }
        double mid = 0.5 * (s.lo + s.hi);
        int cmid = probe.count(mid);
        stack.push_back({mid, s.hi, cmid, s.chi});
        stack.push_back({s.lo, mid, s.clo, cmid});
    }
    std::sort(w.eigenvalues.begin(), w.eigenvalues.end());
    w.deficit = w.recompute_deficit();
    return w;
}

static void jacobi_rotate_full(std::vector<double>& a, int n, std::vector<double>* V);

std::vector<double> small_symmetric_eigenvalues(std::vector<double> a, int n) {
    jacobi_rotate_full(a, n, nullptr);
    std::vector<double> ev(n);
    for (int i = 0; i < n; ++i) ev[i] = a[(std::size_t)i * n + i];
    std::sort(ev.begin(), ev.end());
    return ev;
}

// Cyclic Jacobi on a dense symmetric matrix (row-major). When V is non-null
// it accumulates the rotations (columns are eigenvectors).
static void jacobi_rotate_full(std::vector<double>& a, int n, std::vector<double>* V) {
    if (n > 64) throw ProblemTooLarge("small_symmetric_eigenvalues: n > 64");
    if (V) {
        V->assign((std::size_t)n * n, 0.0);
        for (int i = 0; i < n; ++i) (*V)[(std::size_t)i * n + i] = 1.0;
    }
    auto A = [&](int i, int j) -> double& { return a[(std::size_t)i * n + j]; };
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += A(p, q) * A(p, q);
        if (off < 1e-30 * (n * n)) break;
        double norm = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) norm = std::max(norm, std::abs(A(i, j)));
        if (off < 1e-28 * norm * norm) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                double apq = A(p, q);
                if (std::abs(apq) < 1e-300) continue;
                double theta = 0.5 * (A(q, q) - A(p, p)) / apq;
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (int i = 0; i < n; ++i) {
                    double aip = A(i, p), aiq = A(i, q);
                    A(i, p) = c * aip - s * aiq;
                    A(i, q) = s * aip + c * aiq;
                }
                for (int j = 0; j < n; ++j) {
                    double apj = A(p, j), aqj = A(q, j);
                    A(p, j) = c * apj - s * aqj;
                    A(q, j) = s * apj + c * aqj;
                }
                if (V) {
                    for (int i = 0; i < n; ++i) {
                        double vip = (*V)[(std::size_t)i * n + p];
                        double viq = (*V)[(std::size_t)i * n + q];
                        (*V)[(std::size_t)i * n + p] = c * vip - s * viq;
                        (*V)[(std::size_t)i * n + q] = s * vip + c * viq;
                    }
                }
            }
        }
    }
}

SpectralWindow eigs_below_band_subspace(const BandedMatrix& B, double sigma, double tol,
                                        std::uint64_t seed) {
    if (!(tol > 0.0)) throw ValidationError("eigs_below_band_subspace: tol must be positive");
    InertiaProbe probe{B};
    SpectralWindow w;
    w.threshold = sigma;
    const int n = B.n;
    double used_shift = sigma;
    BandFactorization f = probe.factor(sigma, &used_shift);
    const int m = f.negative_pivots();
    if (m == 0) return w;
    const int p = std::min(m + 4, n);
    if (p > 48 || n < 4 * p) return eigs_below_band(B, sigma, tol);

    // block of M-orthonormal iteration vectors, column-major
    std::vector<std::vector<double>> X(p, std::vector<double>(n));
    for (int c = 0; c < p; ++c) lcg_fill(X[c], seed * 131 + c + 1);
    auto m_dot = [&](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        if (B.has_mass())
            for (int i = 0; i < n; ++i) s += B.mass[i] * a[i] * b[i];
        else
            for (int i = 0; i < n; ++i) s += a[i] * b[i];
        return s;
    };
    auto orthonormalize = [&]() {
        for (int c = 0; c < p; ++c) {
            for (int d = 0; d < c; ++d) {
                double proj = m_dot(X[c], X[d]);
                for (int i = 0; i < n; ++i) X[c][i] -= proj * X[d][i];
            }
            double nrm = std::sqrt(m_dot(X[c], X[c]));
            if (!(nrm > 1e-290)) {
                lcg_fill(X[c], seed * 977 + c + 17);
                nrm = std::sqrt(m_dot(X[c], X[c]));
            }
            for (int i = 0; i < n; ++i) X[c][i] /= nrm;
        }
    };
    orthonormalize();

    std::vector<double> kx(n), tmp(n);
    std::vector<double> prev;
    for (int iter = 0; iter < 80; ++iter) {
        for (int c = 0; c < p; ++c) {
            if (B.has_mass())
                for (int i = 0; i < n; ++i) X[c][i] *= B.mass[i];
            f.solve(X[c]);
        }
        orthonormalize();
        // Rayleigh-Ritz: G = X^T K X
        std::vector<std::vector<double>> KX(p, std::vector<double>(n));
        for (int c = 0; c < p; ++c) B.matvec(X[c], KX[c]);
        std::vector<double> G((std::size_t)p * p);
        for (int c = 0; c < p; ++c)
            for (int d = 0; d <= c; ++d) {
                double s = 0.0;
                for (int i = 0; i < n; ++i) s += X[c][i] * KX[d][i];
                G[(std::size_t)c * p + d] = G[(std::size_t)d * p + c] = s;
            }
        std::vector<double> V;
        jacobi_rotate_full(G, p, &V);
        std::vector<std::pair<double, int>> ritz(p);
        for (int c = 0; c < p; ++c) ritz[c] = {G[(std::size_t)c * p + c], c};
        std::sort(ritz.begin(), ritz.end());
        // rotate the block onto the Ritz basis
        std::vector<std::vector<double>> Y(p, std::vector<double>(n, 0.0));
        for (int c = 0; c < p; ++c) {
            int col = ritz[c].second;
            for (int d = 0; d < p; ++d) {
                double v = V[(std::size_t)d * p + col];
                if (v == 0.0) continue;
                for (int i = 0; i < n; ++i) Y[c][i] += v * X[d][i];
            }
        }
        X.swap(Y);
        std::vector<double> kept;
        for (int c = 0; c < p; ++c)
            if (ritz[c].first < sigma) kept.push_back(ritz[c].first);
        bool stable = ((int)kept.size() == m) && (prev.size() == kept.size());
        if (stable)
            for (std::size_t c = 0; c < kept.size(); ++c)
                if (std::abs(kept[c] - prev[c]) > 0.05 * tol) stable = false;
        prev = kept;
        if (!stable) continue;
        // residual certificate: dist(ritz, spectrum) <= ||K x - e M x||_{M^{-1}}
        bool certified = true;
        for (int c = 0; c < m && certified; ++c) {
            B.matvec(X[c], kx);
            double resid2 = 0.0;
            for (int i = 0; i < n; ++i) {
                double mi = B.has_mass() ? B.mass[i] : 1.0;
                double r = kx[i] - kept[c] * mi * X[c][i];
                resid2 += r * r / mi;
            }
            if (std::sqrt(resid2) > 0.5 * tol) certified = false;
        }
        if (certified) {
            w.eigenvalues = kept;
            std::sort(w.eigenvalues.begin(), w.eigenvalues.end());
            w.deficit = w.recompute_deficit();
            return w;
        }
    }
    return eigs_below_band(B, sigma, tol);
}

} // namespace surfspec::linalg
