// kubo.hpp — Kubo-Streda conductance traces, the lattice Chern oracle, and
// the coupling-stability sweep
#pragma once

#include "hallab/common.hpp"
#include "hallab/model.hpp"
#include "hallab/spectral.hpp"
#include "hallab/switch_function.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace hallab {

// Diagonal trace weight. On a finite open (or periodic) sample the full
// trace of P[[P,L1],[P,L2]]P vanishes identically by cyclicity once the two
// switches commute; the transported-charge content lives in the trace over
// the certified bulk, which this mask selects. An empty mask is the full
// trace (the Landau backend, whose truncated switches do not commute).
struct TraceWindow {
    RVec weights;  // empty => identity

    bool is_identity() const { return weights.size() == 0; }
    static TraceWindow all();
    // Keeps lattice sites with centered coordinates |x_i| <= L/2 - margin.
    static TraceWindow bulk_margin(const MagneticModel& model, double margin);
    cxd trace(const Mat& a) const;
    // Tr_W(a b) from the product diagonal, O(D^2).
    cxd product_trace(const Mat& a, const Mat& b) const;
};

struct ConductanceResult {
    cxd raw_trace{0.0, 0.0};     // windowed trace of P[[P,L1],[P,L2]]P
    cxd full_trace{0.0, 0.0};    // same operator, whole-basis trace
    cxd cyclic_trace{0.0, 0.0};  // Tr [P L1 P, P L2 P] (whole basis)
    double imag_purity{0.0};     // |Re raw| / |raw|
    cxd convention_constant{0.0, 0.0};
    double normalized{0.0};      // Re(raw / constant) once calibrated
    bool switches_commute{true};
};

ConductanceResult kubo_streda_trace(const FermiProjector& p,
                                    const SwitchFunction& lambda1,
                                    const SwitchFunction& lambda2,
                                    const TraceWindow& window = TraceWindow::all());

// raw/oracle; the constant is measured once per model family, never assumed.
cxd calibrate_convention(const ConductanceResult& reference, int oracle);
double normalized_value(cxd raw_trace, cxd convention_constant);

// ------------------------------ Chern oracle -------------------------------

struct ChernResult {
    int chern{0};
    double residue{0.0};  // |pre-rounding sum - integer|
    int grid_used{0};     // k-points per magnetic Brillouin zone side
};

// Lattice field-strength Chern number of the `lowest_bands` lowest magnetic
// bands, from plaquette products of occupied-frame link overlaps on a
// discretized Brillouin zone. Requires a commensurate torus spec. The grid
// is doubled once if the integer residue exceeds 0.1; a second failure
// throws QuadratureError.
ChernResult chern_fhs(const LatticeSpec& spec, int lowest_bands,
                      int grid_per_mbz = 24);

// Counting rule r = q s + p t with |t| <= q/2: the Chern number of the r
// lowest bands is t. Independent cross-check for chern_fhs.
int diophantine_chern(int p, int q, int lowest_bands);

// ---------------------------- coupling stability ----------------------------

struct StabilityPoint {
    double lambda{0.0};
    double gap_margin{0.0};
    cxd raw{0.0, 0.0};
    double normalized{0.0};
};

struct StabilityReport {
    std::vector<StabilityPoint> points;
    std::vector<std::pair<double, std::string>> dropped;  // (lambda, reason)
    double max_deviation{0.0};  // max - min of normalized values
};

struct SwitchGeometry {
    double half_width{3.0};
    int order{3};
    double center1{0.0};
    double center2{0.0};
};

// Builds the family model at each coupling, certifies the gap at the target
// filling (dropping and reporting points that lost it), and evaluates the
// normalized conductance. delta_min < 0 selects the projector default.
// Throws EmptyGridError if nothing survives.
StabilityReport lambda_stability_sweep(
    const std::function<MagneticModel(double)>& family,
    const std::vector<double>& lambda_grid, int occupied_target,
    const SwitchGeometry& switches, cxd convention_constant,
    double window_margin, int threads = 1, double delta_min = -1.0);

}  // namespace hallab
