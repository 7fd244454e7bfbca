#pragma once

#include "surfspec/linalg.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace surfspec::degennes {

// Cell-centered grid on (0, t_max): nodes t_i = (i+1/2)*delta with
// delta = t_max/n. Cell centering makes the reflected Neumann stencil at
// t = 0 symmetric; the far end carries a Dirichlet cap.
struct HalfLineGrid {
    double t_max = 10.0;
    int n = 2000;
    // When set, eigenvalues are Richardson-extrapolated from the (delta,
    // delta/2) pair, removing the leading O(delta^2) discretization term.
    bool richardson = true;

    double delta() const { return t_max / n; }
    std::uint64_t signature() const;

    // Grid with truncation t_max = max(xi,0) + 10 (Gaussian decay margin)
    // at the requested spacing.
    static HalfLineGrid for_xi(double xi, double delta = 0.005, bool richardson = true);
};

struct DeGennesCurve {
    std::vector<double> xi_samples;
    std::vector<double> mu1;
    double theta0 = 0.0;
    double xi0 = 0.0;
    HalfLineGrid grid;
};

struct SupportInterval {
    double lambda;
    double xi_minus;
    double xi_plus;
};

// Service limits: beyond these the operations refuse rather than silently
// degrade.
inline constexpr double kXiCap = 30.0;
inline constexpr double kLambdaMax = 0.999;

// 3-point finite differences of -d^2/dt^2 + (t-xi)^2 on the grid; Neumann by
// reflection at t=0, Dirichlet at the cap.
linalg::TridiagonalMatrix assemble_h_xi(double xi, const HalfLineGrid& grid);

// j-th eigenvalue (j <= 5) of H(xi) on the given grid. With self_check, the
// truncation is re-run at t_max+2 and TruncationTooSmall is thrown when the
// value moves by more than 1e-8.
double mu(double xi, int j, const HalfLineGrid& grid, bool self_check = false);

// As mu(), with the truncation adapted to xi at the grid's spacing/policy.
double mu_auto(double xi, int j, const HalfLineGrid& grid);

// Golden-section minimization of mu1 over xi in [0,1] to xi-tolerance 1e-8.
// Cached per grid signature.
std::pair<double, double> minimize_mu1(const HalfLineGrid& grid);

// {xi : mu1(xi) < lambda}; empty when lambda <= Theta0. Branch bisections to
// xi-width 1e-10.
std::optional<SupportInterval> support_interval(double lambda, const HalfLineGrid& grid);

// Integral of (lambda - mu1(xi))_+^p over the support interval, p in
// {1/2, 3/2}; endpoint-graded quadrature, relative tolerance 1e-7.
double moment_integral(double lambda, double p, const HalfLineGrid& grid);

// mu1 sampled over an ascending xi list, with the minimizer attached.
DeGennesCurve sample_curve(const std::vector<double>& xi_samples, const HalfLineGrid& grid);

} // namespace surfspec::degennes
