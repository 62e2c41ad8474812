// Serial reference vs OpenMP kernels on the largest corpus supercell.

#include "xtalbench/kernels.hpp"
#include "xtalbench/orientation.hpp"
#include "xtalbench/supercell.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace xtalbench;

namespace {

const Supercell& big_cell() {
  static const Supercell cell = [] {
    const auto materials = load_materials();
    return generate_supercell(find_material(materials, "Fe2O3"), 1.0);
  }();
  return cell;
}

std::vector<kernels::Disk> random_disks(int n, int size) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> pos(0, size), rad(1.5, 4.0);
  std::vector<kernels::Disk> disks;
  for (int i = 0; i < n; ++i) disks.push_back({pos(rng), pos(rng), rad(rng), 0.8, {200, 120, 40}});
  return disks;
}

void BM_NearestNeighbor(benchmark::State& state) {
  const auto& atoms = big_cell().atoms;
  for (auto _ : state) benchmark::DoNotOptimize(kernels::mean_nearest_neighbor(atoms));
}

void BM_NearestNeighborSerial(benchmark::State& state) {
  const auto& atoms = big_cell().atoms;
  for (auto _ : state) benchmark::DoNotOptimize(kernels::mean_nearest_neighbor_serial(atoms));
}

void BM_Rotate(benchmark::State& state) {
  const auto& cell = big_cell();
  const auto r = pose_rotations().back().m;
  for (auto _ : state) benchmark::DoNotOptimize(kernels::rotate_about(cell.atoms, r, cell.center));
}

void BM_RotateSerial(benchmark::State& state) {
  const auto& cell = big_cell();
  const auto r = pose_rotations().back().m;
  for (auto _ : state) benchmark::DoNotOptimize(kernels::rotate_about_serial(cell.atoms, r, cell.center));
}

void BM_Composite(benchmark::State& state) {
  const auto size = static_cast<int>(state.range(0));
  const auto disks = random_disks(400, size);
  for (auto _ : state) {
    kernels::Canvas canvas(size, size, {0, 0, 0});
    kernels::composite_disks(canvas, disks);
    benchmark::DoNotOptimize(canvas.rgb.data());
  }
}

void BM_CompositeSerial(benchmark::State& state) {
  const auto size = static_cast<int>(state.range(0));
  const auto disks = random_disks(400, size);
  for (auto _ : state) {
    kernels::Canvas canvas(size, size, {0, 0, 0});
    kernels::composite_disks_serial(canvas, disks);
    benchmark::DoNotOptimize(canvas.rgb.data());
  }
}

}  // namespace

BENCHMARK(BM_NearestNeighbor);
BENCHMARK(BM_NearestNeighborSerial);
BENCHMARK(BM_Rotate);
BENCHMARK(BM_RotateSerial);
BENCHMARK(BM_Composite)->Arg(64)->Arg(512);
BENCHMARK(BM_CompositeSerial)->Arg(64)->Arg(512);

BENCHMARK_MAIN();
