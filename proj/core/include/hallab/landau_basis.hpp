// landau_basis.hpp — truncated symmetric-gauge Landau level basis
//
// Basis states |n, m> with n the level index (energy (2n+1)B) and m the
// guiding-center index. Real-space wavefunctions are polynomials in
// w = x1 + i x2 and conjugate(w) times exp(-B |w|^2 / 4); the polynomial
// tables are generated exactly by ladder-operator recursion, so scalar
// functions can be projected onto the basis by Gauss-Hermite quadrature.
#pragma once

#include "hallab/common.hpp"

#include <functional>
#include <vector>

namespace hallab {

enum class Axis { x1, x2 };

class LandauBasis {
  public:
    LandauBasis(double field_B, int n_levels, int m_max);

    double field() const { return field_b_; }
    int n_levels() const { return n_levels_; }
    int m_max() const { return m_max_; }
    int dim() const { return n_levels_ * (m_max_ + 1); }
    int index(int n, int m) const { return n * (m_max_ + 1) + m; }

    // diag((2n+1)B) in basis order.
    RVec level_energies() const;
    Mat number_operator() const;

    // Exact ladder-operator forms of the position observables.
    Mat position_operator(Axis axis) const;

    // <n m| f(x1,x2) |n' m'> by tensor panel-Gauss quadrature. Supplying the
    // x1 coordinates where f has reduced smoothness (switch-profile edges)
    // keeps the panels aligned and the convergence spectral. The order is
    // doubled until the element-wise change drops below tol; throws
    // QuadratureError if the doubling cap is reached first.
    Mat project_scalar(const std::function<double(double, double)>& f,
                       double tol = 1e-8, int* order_used = nullptr,
                       const std::vector<double>& x1_breaks = {},
                       const std::vector<double>& x2_breaks = {}) const;

    // Same quadrature applied to the identity; distance from the unit matrix
    // measures basis-evaluation fidelity at a given order.
    double gram_defect(int order) const;

    // Wavefunction value at a point (includes the Gaussian factor).
    cxd evaluate(int n, int m, double x1, double x2) const;

  private:
    struct Poly {  // coefficients c[i][j] of w^i conj(w)^j
        int deg_w{0}, deg_wbar{0};
        std::vector<cxd> c;  // (deg_w+1) x (deg_wbar+1), row-major in i
        cxd at(int i, int j) const { return c[i * (deg_wbar + 1) + j]; }
    };

    Mat quadrature_matrix(const std::function<double(double, double)>& f,
                          int order, const std::vector<double>& x1_breaks,
                          const std::vector<double>& x2_breaks) const;
    cxd evaluate_poly(const Poly& p, cxd w) const;

    double field_b_;
    int n_levels_;
    int m_max_;
    std::vector<Poly> polys_;  // indexed by index(n, m)
};

}  // namespace hallab
