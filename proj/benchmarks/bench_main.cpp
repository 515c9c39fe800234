// Copyright 2026 The kronfc Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <cstddef>

#include "kfc/kfc_layer.hpp"
#include "kfc/kfc_spec.hpp"
#include "kfc/matrix.hpp"
#include "kfc/nkp.hpp"
#include "kfc/rng.hpp"
#include "kfc/svd.hpp"

namespace {

kfc::Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  kfc::Rng rng(seed);
  kfc::Matrix m(r, c);
  for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

struct LayerSetup {
  kfc::KfcSpec spec;
  kfc::KfcWeights weights;
  kfc::Matrix dense_w;
  kfc::Matrix x;
};

// (c, h, w) tensor input, formulation II, rank 1.
LayerSetup make_setup(std::size_t c, std::size_t h, std::size_t w,
                      std::size_t k, std::size_t k1, std::size_t batch) {
  LayerSetup s;
  s.spec = kfc::make_spec_formulation(kfc::Formulation::kII, c, h, w, k, k1,
                                      k / k1, 0, 1);
  kfc::Rng rng(7);
  s.weights = kfc::init_weights(s.spec, rng);
  s.dense_w = kfc::materialize(s.spec, s.weights);
  s.x = random_matrix(batch, c * h * w, 11);
  return s;
}

void BM_DenseForward(benchmark::State& state, std::size_t c, std::size_t h,
                     std::size_t w, std::size_t k, std::size_t k1) {
  LayerSetup s = make_setup(c, h, w, k, k1, 64);
  for (auto _ : state) {
    kfc::Matrix y = kfc::matmul(s.x, s.dense_w);
    benchmark::DoNotOptimize(y.data());
  }
}

void BM_KfcForward(benchmark::State& state, std::size_t c, std::size_t h,
                   std::size_t w, std::size_t k, std::size_t k1) {
  LayerSetup s = make_setup(c, h, w, k, k1, 64);
  for (auto _ : state) {
    kfc::Matrix y = kfc::kfc_forward(s.spec, s.weights, s.x);
    benchmark::DoNotOptimize(y.data());
  }
}

void BM_Nkp(benchmark::State& state) {
  const kfc::Matrix m = random_matrix(288, 256, 3);
  const kfc::KfcSpec spec = kfc::make_spec_formulation(
      kfc::Formulation::kII, 32, 3, 3, 256, 64, 4, 0, 2);
  for (auto _ : state) {
    kfc::DecompResult r = kfc::nkp(m, spec.groups[0].shape, 2);
    benchmark::DoNotOptimize(r.weights.bias.data());
  }
}

void BM_TruncatedSvd(benchmark::State& state) {
  const kfc::Matrix m = random_matrix(128, 96, 5);
  for (auto _ : state) {
    kfc::SvdResult r = kfc::svd_truncated(m, 4);
    benchmark::DoNotOptimize(r.s.data());
  }
}

}  // namespace

// MNIST-shaped first layer: 288 inputs as (32, 3, 3), 256 outputs.
BENCHMARK_CAPTURE(BM_DenseForward, mnist_288x256, 32, 3, 3, 256, 64);
BENCHMARK_CAPTURE(BM_KfcForward, mnist_288x256, 32, 3, 3, 256, 64);
// SVHN-shaped layer: 6400 inputs as (256, 5, 5), 256 outputs.
BENCHMARK_CAPTURE(BM_DenseForward, svhn_6400x256, 256, 5, 5, 256, 64);
BENCHMARK_CAPTURE(BM_KfcForward, svhn_6400x256, 256, 5, 5, 256, 64);
BENCHMARK(BM_Nkp);
BENCHMARK(BM_TruncatedSvd);

BENCHMARK_MAIN();
