// switch_function.hpp — smooth 0->1 switch profiles and the current observable
#pragma once

#include "hallab/common.hpp"
#include "hallab/model.hpp"

#include <vector>

namespace hallab {

// Polynomial smoothstep S_N on [0,1]: C^N at both ends, S_N(1/2) = 1/2.
struct SmoothStep {
    int order{3};
    std::vector<double> coeff;  // of t^(N+1) ... t^(2N+1)

    static SmoothStep of_order(int n);
    double value(double t) const;       // clamped outside [0,1]
    double derivative(double t) const;  // zero outside (0,1)
};

struct SwitchFunction {
    Axis direction{Axis::x1};
    double half_width{1.0};
    int order{3};        // order < 0 means a sharp step
    double center{0.0};
    bool periodic{false};  // torus profile: rises at center, falls at the seam
    double period{0.0};
    SmoothStep step;

    bool is_diagonal{true};
    RVec diag;   // values on the model basis (lattice)
    Mat dense;   // projected operator (landau backend)

    // Profile value at a coordinate; plateaus are exact.
    double profile(double x) const;
    double profile_derivative(double x) const;
    Mat as_matrix() const;
    int dim() const;
};

// Builds the switch on a model's basis. Lattice: evaluated at the site
// coordinates (diagonal); torus models get the periodic two-transition
// profile. Landau backend: projected by quadrature (dense).
// boundary_margin < 0 selects the default of four magnetic lengths.
SwitchFunction make_switch(Axis direction, double half_width, int order,
                           const MagneticModel& model, double center = 0.0,
                           double boundary_margin = -1.0);

// [H, Lambda]; anti-Hermitian, and bit-exactly zero on every matrix element
// whose two sites sit on a common plateau.
Mat current_operator(const MagneticModel& model, const SwitchFunction& lambda2);

}  // namespace hallab
