// adiabatic.hpp — driving profiles, the iso-spectral gauge frame, slow-drive
// propagation, and the induced-current measurements
#pragma once

#include "hallab/common.hpp"
#include "hallab/fit.hpp"
#include "hallab/kubo.hpp"
#include "hallab/spectral.hpp"
#include "hallab/switch_function.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace hallab {

// ----------------------------- driving profile -----------------------------

enum class ProfileKind { ramp, pulse };

struct DrivingProfile {
    ProfileKind kind{ProfileKind::ramp};
    int smoothness_k{4};
    std::function<double(double)> g;      // g(0) = 0
    std::function<double(double)> g_dot;  // supported in (0,1)
    std::function<double(double)> phi;    // exact primitive of g
    double integral_g{0.0};               // phi(1)
};

// ramp: g = smoothstep with g(1) = 1; pulse: symmetric bump with g(1) = 0.
// Both have g_dot in C^k. phi is the exact polynomial antiderivative.
DrivingProfile driving_profile(ProfileKind kind, int k);

// ------------------------------- gauge frame -------------------------------

// Applies G(phi) = exp(i phi Lambda1): diagonal phases on the lattice, a
// cached eigendecomposition of the dense switch otherwise.
class Conjugator {
  public:
    explicit Conjugator(const SwitchFunction& lambda1);

    Mat gauged(const Mat& a, double phi) const;          // G A G†
    void apply_left(Mat& y, double phi) const;           // y <- G y
    void apply_left_dagger(Mat& y, double phi) const;    // y <- G† y
    bool diagonal() const { return diagonal_; }
    const RVec& switch_values() const { return values_; }
    const Mat& frame() const { return frame_; }  // empty when diagonal

  private:
    bool diagonal_{true};
    RVec values_;   // switch eigen/diagonal values
    Mat frame_;     // eigenvectors of the dense switch (identity if diagonal)
};

// Spectrum-preserving family H(s) = exp(i phi L1) H exp(-i phi L1).
Mat gauge_hamiltonian(const Mat& hamiltonian, const Conjugator& conj, double phi);

// ------------------------------ drive context ------------------------------

// Immutable bundle shared by propagation, expansion, and current code.
struct DriveContext {
    Mat hamiltonian;  // undriven H
    std::shared_ptr<const EigenSystem> eig;
    std::shared_ptr<const FermiProjector> projector;
    DrivingProfile profile;
    SwitchFunction lambda1, lambda2;
    std::shared_ptr<const Conjugator> conj1;
    TraceWindow window;

    int dim() const { return static_cast<int>(hamiltonian.rows()); }
    Mat gauged_projector(double s) const;    // P(s) = G P G†
    Mat gauged_hamiltonian(double s) const;  // H(s)
    // Exact s-derivative of the gauged projector: i g(s) [L1, P(s)].
    Mat projector_derivative(double s) const;
};

DriveContext make_drive_context(const MagneticModel& model, double fermi_energy,
                                const DrivingProfile& profile,
                                const SwitchFunction& lambda1,
                                const SwitchFunction& lambda2,
                                const TraceWindow& window = TraceWindow::all(),
                                double delta_min = -1.0);

// ------------------------------- propagation -------------------------------

struct EvolutionState {
    double tau{0.0};
    double s{0.0};
    Mat frame;  // D x N propagated occupied frame (D x D when full_propagator)
    int n_steps_used{0};
    double unitarity_defect{0.0};  // ||frame† frame - 1||_F

    Mat projector() const { return frame * frame.adjoint(); }
    double rank_trace() const { return frame.squaredNorm(); }
};

struct Trajectory {
    double tau{0.0};
    int n_steps{0};
    std::vector<EvolutionState> samples;  // ascending in s

    const EvolutionState& at_s(double s, double tol = 1e-9) const;
};

// Midpoint-exponential stepping of the scaled evolution in the gauge frame:
// over [s, s+ds] the propagator factor is G(s_mid) exp(-i tau ds H) G(s_mid)†
// with exp(-i tau ds H) evaluated once in the eigenbasis. Propagates the
// occupied frame (or the full propagator on request), sampling at the given
// s values. Throws StepBudgetError if the unitarity defect exceeds 1e-9.
Trajectory evolve(const DriveContext& ctx, double tau, int n_steps,
                  const std::vector<double>& s_samples,
                  bool full_propagator = false);

// Same stepper applied to an arbitrary orthonormal initial frame (a single
// column propagates one state).
Trajectory evolve_frame(const DriveContext& ctx, double tau, int n_steps,
                        const std::vector<double>& s_samples, const Mat& initial);

// Default step budget: max(floor, ceil(8 ||H|| tau)).
int default_steps(double tau, double spectral_radius, int floor_steps = 4096);

// ------------------------------ current samples ----------------------------

struct CurrentSample {
    double s{0.0};
    cxd current{0.0, 0.0};          // -i Tr_W (P_tau(s) - P(s)) [H(s), L2]
    cxd kubo_prediction{0.0, 0.0};  // -(i/tau) g(s) K
    double residual{0.0};           // |current - prediction|
    double unitarity_defect{0.0};
};

CurrentSample instantaneous_current(const DriveContext& ctx,
                                    const EvolutionState& state, cxd k_raw);

// tau * Simpson quadrature of the sampled current over s in [0,1].
// refinement_defect reports the half-grid Simpson difference.
struct ChargeResult {
    cxd charge{0.0, 0.0};
    double refinement_defect{0.0};
};
ChargeResult accumulated_charge(const DriveContext& ctx, double tau, int n_steps,
                                cxd k_raw, int n_samples = 33);

// -------------------------------- tau sweep --------------------------------

struct TauSweepRow {
    double tau{0.0};
    int n_steps{0};
    double residual{0.0};
    double residual_halved{0.0};  // from the doubled-step certification run
    double change{0.0};           // relative change under step doubling
};

struct TauSweepReport {
    double s_probe{0.0};
    std::vector<TauSweepRow> rows;
    FitResult fit;  // log residual vs log tau
};

using StepRule = std::function<int(double tau)>;

// Residuals |Tr J + (i/tau) g K| on a geometric tau grid, each certified by
// step-halving (throws IntegratorDominatedError when any residual moves by
// more than 20%). Work items run on `threads` workers.
TauSweepReport tau_sweep(const DriveContext& ctx, const std::vector<double>& taus,
                         double s_probe, cxd k_raw, const StepRule& steps,
                         int threads = 1, bool certify = true,
                         FitWindow fit_window = FitWindow::drop_first);

}  // namespace hallab
