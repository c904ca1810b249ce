#include <benchmark/benchmark.h>

#include <memory>

#include "dictct/blocks.hpp"
#include "dictct/dictlearn.hpp"
#include "dictct/eval.hpp"
#include "dictct/phantom.hpp"
#include "dictct/projector.hpp"
#include "dictct/recon.hpp"

using namespace dictct;

namespace {

void BM_AssembleMatrix(benchmark::State& state) {
  const auto n = static_cast<Index>(state.range(0));
  const ScanGeometry g = make_geometry(n, n, 25);
  for (auto _ : state) benchmark::DoNotOptimize(assemble_matrix(g));
  state.SetLabel("N_p=25");
}
BENCHMARK(BM_AssembleMatrix)->Arg(64)->Arg(128)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_AdmmStep(benchmark::State& state) {
  const auto t = static_cast<Index>(state.range(0));
  const PatchMatrix Y = extract_patches(textured_phantom(128, 128, 1), {8, 8}, 1, t, 1);
  LearnConfig cfg;
  AdmmState s = admm_init(Y, 200, cfg);
  for (auto _ : state) s = admm_step(std::move(s), Y.data, 3.0, ConstraintSet::Ball2);
  state.SetItemsProcessed(state.iterations() * t);
}
BENCHMARK(BM_AdmmStep)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_BlockDictionary(benchmark::State& state) {
  const auto n = static_cast<Index>(state.range(0));
  const BlockPermutation perm(n, n, 8, 8);
  const Eigen::MatrixXd D = Eigen::MatrixXd::Random(64, 200).cwiseAbs();
  const Eigen::VectorXd alpha = Eigen::VectorXd::Random(200 * (n / 8) * (n / 8)).cwiseAbs();
  for (auto _ : state) {
    const Eigen::VectorXd x = apply_block_dictionary(D, alpha, perm);
    benchmark::DoNotOptimize(apply_block_dictionary_adjoint(D, x, perm));
  }
}
BENCHMARK(BM_BlockDictionary)->Arg(128)->Arg(256)->Unit(benchmark::kMicrosecond);

void BM_SmoothPart(benchmark::State& state) {
  const Index n = 128;
  auto A = std::make_shared<const SparseMatrix>(assemble_matrix(make_geometry(n, n, 20)));
  const GrayImage x = textured_phantom(n, n, 2);
  const Eigen::VectorXd b = (*A) * x.vec();
  const ReconProblem pb(A, b, Eigen::MatrixXd::Random(64, 200).cwiseAbs(), PatchGeometry(n, n, {8, 8}), 1.0, 1.0);
  const Eigen::VectorXd alpha = Eigen::VectorXd::Constant(pb.coefficients(), 0.01);
  for (auto _ : state) benchmark::DoNotOptimize(smooth_part(pb, alpha));
}
BENCHMARK(BM_SmoothPart)->Unit(benchmark::kMillisecond);

void BM_ArtSweep(benchmark::State& state) {
  const Index n = 128;
  const SparseMatrix A = assemble_matrix(make_geometry(n, n, 20));
  const Eigen::VectorXd b = A * textured_phantom(n, n, 3).vec();
  for (auto _ : state) benchmark::DoNotOptimize(solve_art(A, b, GrayImage(n, n), 1));
}
BENCHMARK(BM_ArtSweep)->Unit(benchmark::kMillisecond);

void BM_ConeProjection(benchmark::State& state) {
  const Eigen::MatrixXd D = Eigen::MatrixXd::Random(64, 200).cwiseAbs();
  const Eigen::VectorXd x = Eigen::VectorXd::Random(64).cwiseAbs();
  for (auto _ : state) benchmark::DoNotOptimize(project_block_to_cone(D, x));
}
BENCHMARK(BM_ConeProjection)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
