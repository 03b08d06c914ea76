// Microbenchmark for the affine kernels: prints GFLOP/s per backend for the
// layer shapes the learners actually run.

#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#include "pql/kernels/kernels.hpp"

using namespace pql;

namespace {

double now_s() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

void bench_shape(kernels::Backend be, std::size_t B, std::size_t I, std::size_t O, int reps) {
  std::mt19937 rng(42);
  std::uniform_real_distribution<float> u(-1.f, 1.f);
  std::vector<float> in(B * I), w(I * O), bias(O), out(B * O), g(B * O), din(B * I), dw(I * O),
      db(O);
  for (auto& x : in) x = u(rng);
  for (auto& x : w) x = u(rng);
  for (auto& x : bias) x = u(rng);
  for (auto& x : g) x = u(rng);

  const double macs = double(B) * I * O;

  double t0 = now_s();
  for (int r = 0; r < reps; ++r)
    kernels::detail::affine_forward_impl(be, in.data(), w.data(), bias.data(), out.data(), B, I, O);
  double fwd = (now_s() - t0) / reps;

  t0 = now_s();
  for (int r = 0; r < reps; ++r)
    kernels::detail::affine_backward_input_impl(be, g.data(), w.data(), din.data(), B, I, O);
  double bwd_in = (now_s() - t0) / reps;

  t0 = now_s();
  for (int r = 0; r < reps; ++r)
    kernels::detail::affine_backward_params_impl(be, in.data(), g.data(), dw.data(), db.data(), B,
                                                 I, O);
  double bwd_par = (now_s() - t0) / reps;

  std::printf("%-7s B=%5zu I=%4zu O=%4zu  fwd %7.2f GF/s  bwd_in %7.2f GF/s  bwd_par %7.2f GF/s\n",
              kernels::backend_name(be).c_str(), B, I, O, 2e-9 * macs / fwd, 2e-9 * macs / bwd_in,
              2e-9 * macs / bwd_par);
}

}  // namespace

int main() {
  std::printf("avx2 supported: %d\n", kernels::cpu_supports_avx2());
  for (auto be : {kernels::Backend::scalar, kernels::Backend::avx2}) {
    if (be == kernels::Backend::avx2 && !kernels::cpu_supports_avx2()) continue;
    bench_shape(be, 8192, 256, 256, be == kernels::Backend::avx2 ? 20 : 2);
    bench_shape(be, 8192, 4, 256, be == kernels::Backend::avx2 ? 50 : 5);
    bench_shape(be, 8192, 256, 1, be == kernels::Backend::avx2 ? 50 : 5);
    bench_shape(be, 1024, 256, 256, be == kernels::Backend::avx2 ? 50 : 5);
  }
  return 0;
}
