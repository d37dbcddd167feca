// spectral.hpp — dense eigendecomposition, Fermi projectors with gap
// certificates, and the eigenbasis residue form of the Riesz sandwich
#pragma once

#include "hallab/common.hpp"
#include "hallab/model.hpp"

#include <functional>

namespace hallab {

struct EigenSystem {
    RVec energies;    // ascending
    Mat vectors;      // columns; deterministic phase convention
    double residual{0.0};  // max_n ||H v_n - E_n v_n||

    int dim() const { return static_cast<int>(energies.size()); }
    double spectral_radius() const;
};

EigenSystem diagonalize(const Mat& hamiltonian);
EigenSystem diagonalize(const MagneticModel& model);

struct GapInfo {
    int band_index{0};         // occupied state count
    double gap_lower{0.0};     // nearest eigenvalue below E_F
    double gap_upper{0.0};     // nearest eigenvalue above E_F
    double fermi_margin{0.0};  // min distance from E_F to the spectrum
    double width() const { return gap_upper - gap_lower; }
};

struct FermiProjector {
    Mat matrix;          // P = sum_{E_n < E_F} |n><n|
    Mat occupied_frame;  // D x N isometry of occupied eigenvectors
    double fermi_energy{0.0};
    int occupied_count{0};
    double gap_lower{0.0}, gap_upper{0.0}, gap_width{0.0};
    double fermi_margin{0.0};
    double delta_min{0.0};  // certification threshold used at construction

    GapInfo gap() const;
    // Throws NoGapError unless fermi_margin >= threshold (default: the one
    // stored at construction).
    void require_certified(double threshold = -1.0) const;
};

// delta_min < 0 selects the default 1e-3 * spectral radius. Throws
// NoGapError when the margin is below delta_min, and rejects E_F within
// 1e-8 of an eigenvalue.
FermiProjector fermi_projector(const EigenSystem& eig, double fermi_energy,
                               double delta_min = -1.0);

// Midpoint of the spectral gap above the `occupied` lowest states.
double midgap_energy(const EigenSystem& eig, int occupied);

// Exact residue evaluation of the gap-contour sandwich: in the eigenbasis,
//   out_{mn} = C_{mn} / (E_n - E_m)   m occupied, n unoccupied
//   out_{mn} = C_{mn} / (E_m - E_n)   m unoccupied, n occupied
//   out_{mn} = 0                      otherwise.
// Equals the clockwise contour integral (1/(2 pi i)) ∮ R_z C R_z dz around
// the spectrum below E_F.
Mat riesz_sandwich(const EigenSystem& eig, double fermi_energy, const Mat& c);

// V f(E) V†
Mat spectral_function(const EigenSystem& eig, const std::function<cxd(double)>& f);

}  // namespace hallab
