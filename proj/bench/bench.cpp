// Serial reference loops vs their OpenMP counterparts on the kernels that
// dominate runtime. Each pair must produce identical results.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#include "edd/discrete.hpp"
#include "edd/order.hpp"
#include "edd/parallel.hpp"
#include "edd/verify.hpp"

using namespace edd;

namespace {

double seconds(const std::function<void()>& fn, int reps) {
  fn();  // warm-up
  const auto t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / reps;
}

void row(const char* name, double serial, double parallel, bool same) {
  std::printf("%-34s %10.4f %10.4f %8.2fx  %s\n", name, serial, parallel, serial / parallel,
              same ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  const int reps = argc > 1 ? std::atoi(argv[1]) : 3;
  std::printf("threads: %d, repetitions: %d\n", max_threads(), reps);
  std::printf("%-34s %10s %10s %9s\n", "kernel", "serial s", "parallel s", "speedup");

  {
    const Instance inst({9.0, 8.0, 14.0, 6.0, 11.0, 12.0, 10.0}, 60.0);
    OrderSearchResult s, p;
    const double ts = seconds([&] { s = brute_force_order(inst, {}, 8, Exec::serial); }, reps);
    const double tp = seconds([&] { p = brute_force_order(inst, {}, 8, Exec::parallel); }, reps);
    row("brute-force order, n=7", ts, tp, s.order == p.order && s.report.cost.total == p.report.cost.total);
  }
  {
    const std::vector<double> bits{3.0, 2.0, 1.0};
    const DiscreteParams params{0.5, 1.0, 6, 6};
    OracleResult s, p;
    const double ts = seconds([&] { s = oracle_allocate(bits, params, {}, Exec::serial); }, reps);
    const double tp = seconds([&] { p = oracle_allocate(bits, params, {}, Exec::parallel); }, reps);
    row("discrete oracle, n=3 Q=6 J=6", ts, tp, s.alloc == p.alloc && s.cost.total == p.cost.total);
  }
  {
    const std::vector<double> bits{3.0};
    const DiscreteParams params{1.0, 1.0, 0, 4};
    const auto f = di_as_set_function(bits, params, 0, CellGround{4, 4, {0, 0, 0, 0}});
    PropertyReport s, p;
    const double ts = seconds([&] { s = check_supermodular(f, {0, 0, true, Exec::serial}); }, reps);
    const double tp = seconds([&] { p = check_supermodular(f, {0, 0, true, Exec::parallel}); }, reps);
    row("exhaustive supermodularity, 16", ts, tp,
        s.violations == p.violations && s.worst_witness == p.worst_witness);
  }
  {
    const Instance inst({15.0, 20.0, 4.0, 9.0}, 60.0);
    const Order order = Order::identity(4);
    PropertyReport s, p;
    const double ts = seconds([&] { s = check_convexity(inst, order, {100'000, 1, Exec::serial}); }, reps);
    const double tp = seconds([&] { p = check_convexity(inst, order, {100'000, 1, Exec::parallel}); }, reps);
    row("convexity probe, 1e5 trials", ts, tp, s.violations == p.violations && s.trials == p.trials);
  }
  {
    SpfStats s, p;
    const double ts = seconds([&] { s = spf_agreement_experiment(40, 3, 3, {}, 8, Exec::serial); }, reps);
    const double tp = seconds([&] { p = spf_agreement_experiment(40, 3, 3, {}, 8, Exec::parallel); }, reps);
    bool same = s.agreements == p.agreements;
    for (std::size_t k = 0; k < s.rows.size(); ++k) same = same && s.rows[k].opt_cost == p.rows[k].opt_cost;
    row("SPF experiment, 40 x n=3", ts, tp, same);
  }
  return 0;
}
