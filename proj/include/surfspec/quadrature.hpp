#pragma once

#include <functional>
#include <vector>

namespace surfspec {

struct GaussRule {
    std::vector<double> nodes;   // on (-1, 1)
    std::vector<double> weights; // sum to 2
};

// Gauss-Legendre nodes and weights by Newton iteration on the Legendre
// polynomial recurrence. Cached per n.
const GaussRule& gauss_legendre(int n);

// Fixed-order Gauss-Legendre on [a, b].
double gauss_panel(const std::function<double(double)>& f, double a, double b, int order = 16);

// Adaptive panel-splitting Gauss-Legendre: a panel is accepted when the
// order-n and order-2n values agree to the requested relative tolerance
// (scaled by a running estimate of the whole integral).
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol = 1e-9, int order = 12, int max_depth = 40);

// As above, but the initial panels are graded dyadically toward both
// endpoints. Intended for integrands that vanish like dist^p (p = 1/2, 3/2)
// at a and b where plain panels converge slowly.
double integrate_endpoint_graded(const std::function<double(double)>& f, double a, double b,
                                 double rel_tol = 1e-7, int levels = 28, int order = 12);

} // namespace surfspec
