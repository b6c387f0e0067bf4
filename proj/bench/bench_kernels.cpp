// Serial reference against the blocked OpenMP kernels on the autoencoder's layer shapes.
#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "hifd/nn/kernels.hpp"

using hifd::nn::ConvShape;

namespace {

struct Layer {
  int len, ci, co;
};
const Layer kLayers[] = {{166, 6, 256}, {83, 256, 128}, {42, 128, 128}, {84, 128, 256}, {166, 256, 6}};

struct Buffers {
  ConvShape s;
  std::vector<double> x, w, b, y, dx, dw, db;
};

Buffers make(int layer) {
  const Layer& l = kLayers[layer];
  Buffers bf;
  bf.s.batch = 16;
  bf.s.len_in = bf.s.len_out = l.len;
  bf.s.ch_in = l.ci;
  bf.s.ch_out = l.co;
  bf.s.k = 3;
  bf.s.pad_left = 1;
  std::mt19937_64 rng(1);
  std::normal_distribution<double> d;
  auto fill = [&](std::vector<double>& v, std::size_t n) {
    v.resize(n);
    for (auto& e : v) e = d(rng);
  };
  fill(bf.x, bf.s.in_size());
  fill(bf.w, bf.s.weight_size());
  fill(bf.b, bf.s.ch_out);
  fill(bf.y, bf.s.out_size());
  bf.dx.resize(bf.s.in_size());
  bf.dw.resize(bf.s.weight_size());
  bf.db.resize(bf.s.ch_out);
  return bf;
}

void set_flops(benchmark::State& st, const ConvShape& s) {
  st.counters["GFLOPS"] = benchmark::Counter(2.0 * double(s.out_size()) * s.k * s.ch_in,
                                             benchmark::Counter::kIsIterationInvariantRate,
                                             benchmark::Counter::kIs1000);
}

template <bool Par>
void forward(benchmark::State& st) {
  auto bf = make(int(st.range(0)));
  for (auto _ : st) {
    if (Par)
      hifd::nn::parallel::conv1d_forward(bf.s, bf.x.data(), bf.w.data(), bf.b.data(), bf.y.data());
    else
      hifd::nn::serial::conv1d_forward(bf.s, bf.x.data(), bf.w.data(), bf.b.data(), bf.y.data());
    benchmark::DoNotOptimize(bf.y.data());
  }
  set_flops(st, bf.s);
}

template <bool Par>
void backward_input(benchmark::State& st) {
  auto bf = make(int(st.range(0)));
  for (auto _ : st) {
    if (Par)
      hifd::nn::parallel::conv1d_backward_input(bf.s, bf.y.data(), bf.w.data(), bf.dx.data());
    else
      hifd::nn::serial::conv1d_backward_input(bf.s, bf.y.data(), bf.w.data(), bf.dx.data());
    benchmark::DoNotOptimize(bf.dx.data());
  }
  set_flops(st, bf.s);
}

template <bool Par>
void backward_weights(benchmark::State& st) {
  auto bf = make(int(st.range(0)));
  for (auto _ : st) {
    if (Par)
      hifd::nn::parallel::conv1d_backward_weights(bf.s, bf.x.data(), bf.y.data(), bf.dw.data(), bf.db.data());
    else
      hifd::nn::serial::conv1d_backward_weights(bf.s, bf.x.data(), bf.y.data(), bf.dw.data(), bf.db.data());
    benchmark::DoNotOptimize(bf.dw.data());
  }
  set_flops(st, bf.s);
}

}  // namespace

BENCHMARK(forward<false>)->DenseRange(0, 4)->Unit(benchmark::kMillisecond)->Name("forward/serial");
BENCHMARK(forward<true>)->DenseRange(0, 4)->Unit(benchmark::kMillisecond)->Name("forward/parallel");
BENCHMARK(backward_input<false>)->DenseRange(0, 4)->Unit(benchmark::kMillisecond)->Name("backward_input/serial");
BENCHMARK(backward_input<true>)->DenseRange(0, 4)->Unit(benchmark::kMillisecond)->Name("backward_input/parallel");
BENCHMARK(backward_weights<false>)->DenseRange(0, 4)->Unit(benchmark::kMillisecond)->Name("backward_weights/serial");
BENCHMARK(backward_weights<true>)->DenseRange(0, 4)->Unit(benchmark::kMillisecond)->Name("backward_weights/parallel");

BENCHMARK_MAIN();
