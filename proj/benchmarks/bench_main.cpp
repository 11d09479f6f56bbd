#include <benchmark/benchmark.h>

#include "qtorsion/arith.hpp"
#include "qtorsion/classgroup.hpp"
#include "qtorsion/experiment.hpp"
#include "qtorsion/heights.hpp"
#include "qtorsion/moments.hpp"
#include "qtorsion/units_lattice.hpp"

using namespace qtorsion;

namespace {

void BM_Factorize(benchmark::State& state) {
    // product of two primes near 2^(bits/2)
    const int half = int(state.range(0)) / 2;
    u128 p = (u128(1) << half) + 1, q = (u128(1) << half) + 3;
    while (!arith::is_prime(p)) p += 2;
    q = p + 2;
    while (!arith::is_prime(q)) q += 2;
    const u128 n = p * q;
    for (auto _ : state) benchmark::DoNotOptimize(arith::factorize(n));
}
BENCHMARK(BM_Factorize)->Arg(40)->Arg(64)->Arg(80)->Unit(benchmark::kMicrosecond);

void BM_ClassGroup(benchmark::State& state) {
    const auto D = arith::Discriminant::fundamental(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(classgroup::class_group(D));
}
BENCHMARK(BM_ClassGroup)->Arg(-3299)->Arg(-1000003)->Arg(1000001)->Arg(-99999959)->Unit(benchmark::kMicrosecond);

void BM_Regulator(benchmark::State& state) {
    const auto D = arith::Discriminant::fundamental(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(units::regulator_and_norm(D));
}
BENCHMARK(BM_Regulator)->Arg(1000001)->Arg(99999989)->Unit(benchmark::kMicrosecond);

void BM_EnumerateSEll(benchmark::State& state) {
    const heights::FieldContext K(arith::Discriminant::fundamental(state.range(0)));
    const auto Z = heights::exact_bound(double(state.range(1)));
    for (auto _ : state) benchmark::DoNotOptimize(heights::enumerate_s_ell(K, 2, Z));
}
BENCHMARK(BM_EnumerateSEll)->Args({-4, 400})->Args({-23, 10000})->Args({5, 10000})->Unit(benchmark::kMillisecond);

void BM_Census(benchmark::State& state) {
    const auto family = arith::fundamental_discriminants(0, std::uint64_t(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(experiment::census(family, nullptr, 1));
    state.SetItemsProcessed(std::int64_t(state.iterations() * family.size()));
}
BENCHMARK(BM_Census)->Arg(1 << 12)->Arg(1 << 15)->Unit(benchmark::kMillisecond);

void BM_Minkowski(benchmark::State& state) {
    std::vector<std::vector<field::Rational>> rows = {
        {17, -3, 44, 5}, {-31, 12, 7, 9}, {2, 48, -19, 13}, {40, 1, 3, -27}};
    const auto L = units::Lattice::exact(rows);
    for (auto _ : state) benchmark::DoNotOptimize(units::minkowski_reduce(L));
}
BENCHMARK(BM_Minkowski)->Unit(benchmark::kMicrosecond);

} // namespace
