#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace surfspec::linalg {

struct TridiagonalMatrix {
    std::vector<double> diag;    // length n
    std::vector<double> offdiag; // length n-1

    int n() const { return static_cast<int>(diag.size()); }
};

// Symmetric banded matrix, lower triangle packed row-major: row i, slot k
// holds A(i, i - bandwidth + k) for k = 0..bandwidth (slot `bandwidth` is the
// diagonal); slots referring to columns < 0 are zero padding. An optional
// strictly positive diagonal mass turns eigenvalue queries into the pencil
// K v = e M v.
struct BandedMatrix {
    int n = 0;
    int bandwidth = 0;
    std::vector<double> bands;
    std::vector<double> mass; // empty = identity

    static BandedMatrix zero(int n, int bandwidth);

    double& at(int i, int j);
    double get(int i, int j) const;

    // y = K x
    void matvec(const std::vector<double>& x, std::vector<double>& y) const;

    bool has_mass() const { return !mass.empty(); }
};

// Eigenvalues of one operator strictly below `threshold`, sorted ascending,
// with the deficit sum over the listed values.
struct SpectralWindow {
    double threshold = 0.0;
    std::vector<double> eigenvalues;
    double deficit = 0.0; // sum of (threshold - e) over the list

    int count() const { return static_cast<int>(eigenvalues.size()); }
    // Deficit recomputed from the stored list in ascending order.
    double recompute_deficit() const;
};

// Number of eigenvalues of T strictly below sigma, by the sign changes of the
// Sturm sequence (LDL^T pivots) with pivot-underflow substitution. Total.
int sturm_count(const TridiagonalMatrix& T, double sigma);

// Gershgorin bounds of T.
std::pair<double, double> gershgorin_tridiag(const TridiagonalMatrix& T);

// Every eigenvalue below sigma isolated by bisection on sturm_count to width
// <= tol, then one Rayleigh-quotient refinement from an inverse-iteration
// vector. Throws BisectionStall if an interval cannot shrink below
// tol*(1+|sigma|) within 200 iterations.
SpectralWindow eigs_below_tridiag(const TridiagonalMatrix& T, double sigma, double tol);

// Negative inertia of K - sigma*M via symmetric banded LDL^T without
// pivoting; equals #(eigenvalues < sigma) by Sylvester's law. Throws
// SingularShift when a pivot falls under the guard floor.
int band_inertia(const BandedMatrix& B, double sigma);

// Gershgorin bounds of the (mass-scaled) matrix.
std::pair<double, double> gershgorin_band(const BandedMatrix& B);

// Seed bracket for one eigenvalue, used to warm-start the slicing. The
// bracket is verified with inertia counts before being trusted.
struct SeedBracket {
    double lo;
    double hi;
};

struct SliceOptions {
    // After an interval isolates a single eigenvalue, refine it by shifted
    // inverse iteration instead of continuing the bisection to width tol.
    bool rayleigh_refine = true;
    // Optional warm-start brackets (ascending); on any count mismatch the
    // hints are discarded and the cold path runs.
    std::vector<SeedBracket> hints;
};

// Spectrum slicing: recursive inertia bisection of [gershgorin_min, sigma]
// until each subinterval holds <= 1 eigenvalue of width <= tol; deterministic
// ascending output; eigenvalues closer than the isolation width are reported
// as repeated entries (counting multiplicity). SingularShift is retried with
// a jittered shift up to 5 times, then propagated.
SpectralWindow eigs_below_band(const BandedMatrix& B, double sigma, double tol,
                               const SliceOptions& opts = {});

// Window solver for operators expected to hold only a handful of eigenvalues
// below sigma: one factorization at sigma gives the exact count, then a
// subspace inverse iteration with Rayleigh-Ritz extraction computes the
// values. Residual-verified; falls back to eigs_below_band when verification
// fails. Deterministic for a fixed seed.
SpectralWindow eigs_below_band_subspace(const BandedMatrix& B, double sigma, double tol,
                                        std::uint64_t seed = 1);

// Banded LDL^T factorization of K - sigma*M with row-profile skipping.
// Exposes the negative-pivot count and in-place solves for inverse iteration.
class BandFactorization {
  public:
    BandFactorization(const BandedMatrix& B, double sigma);

    int negative_pivots() const { return neg_; }
    // Solves (K - sigma*M) x = b in place.
    void solve(std::vector<double>& x) const;

  private:
    int n_;
    int bw_;
    std::vector<double> f_;
    std::vector<int> start_;
    int neg_ = 0;
};

// Jacobi eigenvalues of a small dense symmetric matrix (row-major), ascending.
// Internal helper for Rayleigh-Ritz extraction; guarded to n <= 64.
std::vector<double> small_symmetric_eigenvalues(std::vector<double> a, int n);

} // namespace surfspec::linalg
