#include "surfspec/degennes.hpp"

#include "surfspec/errors.hpp"
#include "surfspec/quadrature.hpp"

#include <cmath>
#include <cstring>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <tuple>

namespace surfspec::degennes {

namespace {

std::uint64_t hash_mix(std::uint64_t h, std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    return h;
}

struct MuKey {
    std::int64_t xi_fixed; // xi rounded to 1e-12
    int j;
    std::uint64_t grid_sig;
    bool operator<(const MuKey& o) const {
        if (xi_fixed != o.xi_fixed) return xi_fixed < o.xi_fixed;
        if (j != o.j) return j < o.j;
        return grid_sig < o.grid_sig;
    }
};

std::map<MuKey, double>& mu_cache() {
    static std::map<MuKey, double> c;
    return c;
}
std::shared_mutex& mu_cache_mutex() {
    static std::shared_mutex m;
    return m;
}

// j-th eigenvalue on one concrete grid (no extrapolation).
double mu_single_grid(double xi, int j, double t_max, int n) {
    HalfLineGrid g{t_max, n, false};
    auto T = assemble_h_xi(xi, g);
    // raise the threshold until the window holds j eigenvalues
    auto [glo, ghi] = linalg::gershgorin_tridiag(T);
    (void)glo;
    double sigma = 4.0 + xi * xi;
    while (linalg::sturm_count(T, sigma) < j && sigma < ghi + 1.0) sigma *= 2.0;
    auto w = linalg::eigs_below_tridiag(T, sigma, 1e-10);
    if (w.count() < j) throw NumericalGuardError("mu: window failed to capture j eigenvalues");
    return w.eigenvalues[j - 1];
}

double mu_on(double xi, int j, const HalfLineGrid& grid) {
    double base = mu_single_grid(xi, j, grid.t_max, grid.n);
    if (!grid.richardson) return base;
    double fine = mu_single_grid(xi, j, grid.t_max, 2 * grid.n);
    return (4.0 * fine - base) / 3.0;
}

} // namespace

std::uint64_t HalfLineGrid::signature() const {
    std::uint64_t h = 0x5f5f;
    std::uint64_t bits;
    static_assert(sizeof(double) == sizeof(std::uint64_t));
    std::memcpy(&bits, &t_max, 8);
    h = hash_mix(h, bits);
    h = hash_mix(h, (std::uint64_t)n);
    h = hash_mix(h, richardson ? 1 : 0);
    return h;
}

HalfLineGrid HalfLineGrid::for_xi(double xi, double delta, bool richardson) {
    double t_max = std::max(xi, 0.0) + 10.0;
    int n = (int)std::ceil(t_max / delta);
    n = std::max(n, 16);
    return HalfLineGrid{n * delta, n, richardson};
}

linalg::TridiagonalMatrix assemble_h_xi(double xi, const HalfLineGrid& grid) {
    if (!(grid.n >= 2) || !(grid.t_max > 0.0))
        throw BadParams("assemble_h_xi: invalid grid");
    const int n = grid.n;
    const double d = grid.delta();
    const double inv2 = 1.0 / (d * d);
    linalg::TridiagonalMatrix T;
    T.diag.resize(n);
    T.offdiag.assign(n - 1, -inv2);
    for (int i = 0; i < n; ++i) {
        double t = (i + 0.5) * d;
        // reflected Neumann cell at i=0 keeps a single coupling
        double kin = (i == 0) ? inv2 : 2.0 * inv2;
        T.diag[i] = kin + (t - xi) * (t - xi);
    }
    return T;
}

double mu(double xi, int j, const HalfLineGrid& grid, bool self_check) {
    if (j < 1 || j > 5) throw ValidationError("mu: only j <= 5 supported");
    if (grid.t_max < std::max(xi, 0.0) + 10.0 - 1e-12)
        throw ValidationError("mu: grid truncation below max(xi,0)+10");
    MuKey key{(std::int64_t)llround(xi * 1e12), j, grid.signature()};
    if (!self_check) {
        std::shared_lock lock(mu_cache_mutex());
        auto it = mu_cache().find(key);
        if (it != mu_cache().end()) return it->second;
    }
    double value = mu_on(xi, j, grid);
    if (self_check) {
        int extra = (int)std::ceil(2.0 / grid.delta());
        HalfLineGrid wide{grid.t_max + extra * grid.delta(), grid.n + extra, grid.richardson};
        double moved = mu_on(xi, j, wide);
        if (std::abs(moved - value) > 1e-8)
            throw TruncationTooSmall("mu: eigenvalue moved under t_max+2 self-check");
    }
    {
        std::unique_lock lock(mu_cache_mutex());
        mu_cache().emplace(key, value);
    }
    return value;
}

double mu_auto(double xi, int j, const HalfLineGrid& grid) {
    HalfLineGrid g = HalfLineGrid::for_xi(xi, grid.delta(), grid.richardson);
    return mu(xi, j, g);
}

std::pair<double, double> minimize_mu1(const HalfLineGrid& grid) {
    static std::map<std::uint64_t, std::pair<double, double>> cache;
    static std::mutex mtx;
    {
        std::lock_guard lock(mtx);
        auto it = cache.find(grid.signature());
        if (it != cache.end()) return it->second;
    }
    // Theta0 is attained at a unique xi0 in (0,1); golden-section search.
    HalfLineGrid g = HalfLineGrid::for_xi(1.0, grid.delta(), grid.richardson);
    auto f = [&](double xi) { return mu(xi, 1, g); };
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = 0.0, b = 1.0;
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > 1e-8) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        }
    }
    double xi0 = 0.5 * (a + b);
    std::pair<double, double> out{f(xi0), xi0};
    std::lock_guard lock(mtx);
    cache.emplace(grid.signature(), out);
    return out;
}

std::optional<SupportInterval> support_interval(double lambda, const HalfLineGrid& grid) {
    if (!(lambda >= 0.0) || lambda >= 1.0)
        throw ValidationError("support_interval: lambda must be in [0,1)");
    if (lambda > kLambdaMax)
        throw ValidationError("support_interval: lambda beyond the 0.999 service limit");
    auto [theta0, xi0] = minimize_mu1(grid);
    if (lambda <= theta0) return std::nullopt;
    auto f = [&](double xi) { return mu_auto(xi, 1, grid) - lambda; };
    auto bisect = [&](double lo, double hi, bool decreasing) {
        // root of f with sign change across [lo, hi]
        for (int it = 0; it < 200 && hi - lo > 1e-10; ++it) {
            double mid = 0.5 * (lo + hi);
            double v = f(mid);
            bool left = decreasing ? (v > 0.0) : (v < 0.0);
            if (left)
                lo = mid;
            else
                hi = mid;
        }
        return 0.5 * (lo + hi);
    };
    // left branch: mu1 strictly decreasing on (-inf, xi0]; mu1(0)=1 > lambda
    double xi_minus = bisect(0.0, xi0, true);
    // right branch: strictly increasing toward 1
    double hi = xi0 + 0.5;
    while (hi < kXiCap && mu_auto(hi, 1, grid) < lambda) hi += 0.5;
    if (hi >= kXiCap)
        throw NumericalGuardError("support_interval: right crossing beyond xi cap");
    double xi_plus = bisect(xi0, hi, false);
    return SupportInterval{lambda, xi_minus, xi_plus};
}

double moment_integral(double lambda, double p, const HalfLineGrid& grid) {
    if (p != 0.5 && p != 1.5) throw ValidationError("moment_integral: p must be 1/2 or 3/2");
    if (!(lambda >= 0.0) || lambda >= 1.0)
        throw ValidationError("moment_integral: lambda must be in [0,1)");
    if (lambda > kLambdaMax)
        throw ValidationError("moment_integral: lambda beyond the 0.999 service limit");
    struct Key {
        std::int64_t l;
        int p2;
        std::uint64_t sig;
        bool operator<(const Key& o) const {
            return std::tie(l, p2, sig) < std::tie(o.l, o.p2, o.sig);
        }
    };
    static std::map<Key, double> cache;
    static std::mutex mtx;
    Key key{(std::int64_t)llround(lambda * 1e12), (int)(2 * p), grid.signature()};
    {
        std::lock_guard lock(mtx);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    auto support = support_interval(lambda, grid);
    double value = 0.0;
    if (support) {
        auto f = [&](double xi) {
            double gap = lambda - mu_auto(xi, 1, grid);
            return gap > 0.0 ? std::pow(gap, p) : 0.0;
        };
        value = integrate_endpoint_graded(f, support->xi_minus, support->xi_plus, 1e-7);
    }
    std::lock_guard lock(mtx);
    cache.emplace(key, value);
    return value;
}

DeGennesCurve sample_curve(const std::vector<double>& xi_samples, const HalfLineGrid& grid) {
    DeGennesCurve c;
    c.grid = grid;
    c.xi_samples = xi_samples;
    c.mu1.reserve(xi_samples.size());
    for (double xi : xi_samples) c.mu1.push_back(mu_auto(xi, 1, grid));
    auto [theta0, xi0] = minimize_mu1(grid);
    c.theta0 = theta0;
    c.xi0 = xi0;
    return c;
}

} // namespace surfspec::degennes
