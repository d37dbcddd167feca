// harness.hpp — run configuration, pipeline orchestration, worker pool
#pragma once

#include "hallab/adiabatic.hpp"
#include "hallab/common.hpp"
#include "hallab/fit.hpp"
#include "hallab/kubo.hpp"
#include "hallab/model.hpp"
#include "hallab/parallel.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace hallab {

// ------------------------------ configuration ------------------------------

struct ModelConfig {
    std::string backend{"hofstadter"};
    std::string boundary{"open"};
    int L{24};
    int p{1};
    int q{3};
    double B{0.0};  // <= 0: natural label
    double lambda{0.0};
    // potential
    std::string potential_kind{"zero"};
    std::vector<GaussianBump> bumps;
    double sup_norm{1.0};
    int smoothness_order{6};
    int random_bumps{0};  // > 0: seeded random placement
    // landau backend
    double landau_B{1.0};
    int n_levels{3};
    int m_max{40};
};

struct RunConfig {
    int schema_version{1};
    ModelConfig model;
    SwitchGeometry switches;
    // fermi
    int band_count{0};  // occupied target; 0 = dim/q on lattice
    std::optional<double> fermi_energy;
    std::optional<double> delta_min;
    // drive
    std::string drive_kind{"ramp"};
    int drive_k{4};
    // evolution
    std::vector<double> tau_list{32, 64, 128, 256, 512};
    int n_steps_floor{4096};
    double n_steps_factor{8.0};  // steps >= factor * ||H|| * tau
    std::string n_steps_boost{"none"};  // none | sqrt (multiply by sqrt(tau/tau0))
    int s_samples{33};
    std::vector<double> s_probes{1.0};
    bool certify{true};
    // expansion
    int expansion_order{3};
    double fd_step{1e-3};
    double expansion_s{0.5};
    // coupling sweep
    std::vector<double> lambda_grid{0.0, 0.1, 0.2, 0.3};
    // window
    std::optional<double> window_margin;  // default L/4
    // outputs
    std::filesystem::path out_dir{"out"};
    bool write_csv{true};
    bool write_json{true};
    bool write_svg{false};
    int threads{1};
    std::uint64_t seed{0};
    std::optional<std::filesystem::path> cache_dir;

    static RunConfig from_json_file(const std::filesystem::path& path);
    std::string to_json() const;  // fully resolved echo for the manifest
};

// Assembled pieces shared by the pipelines.
struct RunSetup {
    MagneticModel model;
    EigenSystem eig;
    double fermi_energy{0.0};
    SwitchFunction lambda1, lambda2;
    TraceWindow window;
    DrivingProfile profile;
    double margin{0.0};
};

RunSetup prepare_run(const RunConfig& cfg);
StepRule step_rule_from_config(const RunConfig& cfg, double spectral_radius);

// ------------------------------- pipelines ---------------------------------

// Exit codes: 0 success, 2 config error, 3 no certified gap, 4 certification
// failure (integrator/quadrature/fit), 1 anything else. Output files are
// written only after the pipeline succeeds.
enum class Pipeline { build, kubo, evolve, sweep_tau, sweep_lambda, expansion,
                      diagnostics, report };

int run_pipeline(Pipeline which, const RunConfig& cfg);
std::optional<Pipeline> pipeline_from_name(const std::string& name);

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNoGap = 3;
inline constexpr int kExitCertification = 4;
inline constexpr int kExitFailure = 1;

}  // namespace hallab
