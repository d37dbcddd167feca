#include "hallab/adiabatic.hpp"
#include "hallab/kubo.hpp"
#include "hallab/model.hpp"
#include "hallab/spectral.hpp"
#include "hallab/switch_function.hpp"

#include <benchmark/benchmark.h>

using namespace hallab;

namespace {

MagneticModel lattice_model(int l) {
    LatticeSpec spec{l, 1, 3, Boundary::open};
    return build_hofstadter(spec, PotentialSpec::zero_potential(), 0.0);
}

void BM_BuildHofstadter(benchmark::State& state) {
    const int l = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(lattice_model(l));
    }
}
BENCHMARK(BM_BuildHofstadter)->Arg(12)->Arg(24);

void BM_Diagonalize(benchmark::State& state) {
    const auto model = lattice_model(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(diagonalize(model));
    }
}
BENCHMARK(BM_Diagonalize)->Arg(12)->Arg(18)->Arg(24)->Unit(benchmark::kMillisecond);

void BM_KuboTrace(benchmark::State& state) {
    const int l = static_cast<int>(state.range(0));
    const auto model = lattice_model(l);
    const auto eig = diagonalize(model);
    const auto proj = fermi_projector(eig, midgap_energy(eig, model.dim() / 3));
    const auto l1 = make_switch(Axis::x1, l / 8.0, 3, model);
    const auto l2 = make_switch(Axis::x2, l / 8.0, 3, model);
    const auto window = TraceWindow::bulk_margin(model, l / 4.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(kubo_streda_trace(proj, l1, l2, window));
    }
}
BENCHMARK(BM_KuboTrace)->Arg(12)->Arg(24)->Unit(benchmark::kMillisecond);

void BM_ChernFhs(benchmark::State& state) {
    LatticeSpec spec{12, 1, 3, Boundary::torus};
    for (auto _ : state) {
        benchmark::DoNotOptimize(chern_fhs(spec, 1));
    }
}
BENCHMARK(BM_ChernFhs)->Unit(benchmark::kMillisecond);

void BM_EvolveSteps(benchmark::State& state) {
    const int l = static_cast<int>(state.range(0));
    const auto model = lattice_model(l);
    const auto eig = diagonalize(model);
    const double ef = midgap_energy(eig, model.dim() / 3);
    const auto l1 = make_switch(Axis::x1, l / 8.0, 3, model);
    const auto l2 = make_switch(Axis::x2, l / 8.0, 3, model);
    const auto ctx = make_drive_context(model, ef,
                                        driving_profile(ProfileKind::ramp, 4), l1, l2);
    const int steps = 256;
    for (auto _ : state) {
        benchmark::DoNotOptimize(evolve(ctx, 16.0, steps, {1.0}));
    }
    state.SetItemsProcessed(state.iterations() * steps);
}
BENCHMARK(BM_EvolveSteps)->Arg(12)->Arg(18)->Unit(benchmark::kMillisecond);

void BM_RieszSandwich(benchmark::State& state) {
    const auto model = lattice_model(12);
    const auto eig = diagonalize(model);
    const double ef = midgap_energy(eig, model.dim() / 3);
    const Mat c = Mat::Random(model.dim(), model.dim());
    const Mat herm = 0.5 * (c + Mat(c.adjoint()));
    for (auto _ : state) {
        benchmark::DoNotOptimize(riesz_sandwich(eig, ef, herm));
    }
}
BENCHMARK(BM_RieszSandwich)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
