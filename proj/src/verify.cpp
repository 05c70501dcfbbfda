#include "edd/verify.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <random>

#include "edd/csolve.hpp"
#include "edd/format.hpp"

namespace edd {

namespace {

// Accumulated result of a batch of checks. The witness is kept as raw
// coordinates and formatted once at the end.
struct Outcome {
  std::size_t checks = 0;
  std::size_t violations = 0;
  std::size_t skipped = 0;
  double worst = std::numeric_limits<double>::infinity();  // most negative violating slack
  std::uint32_t s = 0;
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t trial = 0;

  void record(double slack, bool violated, std::uint32_t mask, std::size_t a, std::size_t b,
              std::size_t k) {
    ++checks;
    if (!violated) return;
    ++violations;
    if (slack < worst) {
      worst = slack;
      s = mask;
      i = a;
      j = b;
      trial = k;
    }
  }

  // Earlier batches win ties, so merging in index order is deterministic.
  void merge(const Outcome& o) {
    checks += o.checks;
    skipped += o.skipped;
    if (o.violations && o.worst < worst) {
      worst = o.worst;
      s = o.s;
      i = o.i;
      j = o.j;
      trial = o.trial;
    }
    violations += o.violations;
  }
};

template <class Fn>
std::vector<Outcome> run_batches(std::size_t count, Exec exec, Fn&& fn) {
  std::vector<Outcome> out(count);
  const auto total = static_cast<std::ptrdiff_t>(count);
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 64)
    for (std::ptrdiff_t k = 0; k < total; ++k) out[k] = fn(static_cast<std::size_t>(k));
  } else {
    for (std::ptrdiff_t k = 0; k < total; ++k) out[k] = fn(static_cast<std::size_t>(k));
  }
  return out;
}

Outcome merge_all(const std::vector<Outcome>& parts) {
  Outcome total;
  for (const Outcome& o : parts) total.merge(o);
  return total;
}

void check_ground(const SetFunction& f) {
  if (!f.eval) throw std::invalid_argument("set function has no evaluator");
  if (f.ground_size > kMaxGroundSize)
    throw SizeError("ground set limited to " + std::to_string(kMaxGroundSize) + " elements");
}

bool admissible(const SetFunction& f, std::uint32_t mask) {
  return !f.admissible || f.admissible(mask);
}

std::uint32_t bit(std::size_t i) { return std::uint32_t{1} << i; }

// Uniform random subset plus `need` distinct elements outside it.
bool sample_triple(std::mt19937_64& rng, std::size_t n, std::size_t need, std::uint32_t& s,
                   std::size_t& a, std::size_t& b) {
  const std::uint32_t full = n == 32 ? ~std::uint32_t{0} : bit(n) - 1;
  s = static_cast<std::uint32_t>(rng()) & full;
  std::vector<std::size_t> outside;
  for (std::size_t k = 0; k < n; ++k)
    if (!(s & bit(k))) outside.push_back(k);
  if (outside.size() < need) return false;
  std::uniform_int_distribution<std::size_t> pick(0, outside.size() - 1);
  a = outside[pick(rng)];
  if (need == 1) return true;
  std::uniform_int_distribution<std::size_t> pick2(0, outside.size() - 2);
  std::size_t idx = pick2(rng);
  if (outside[idx] == a) idx = outside.size() - 1;
  b = outside[idx];
  if (a > b) std::swap(a, b);
  return true;
}

constexpr int kSampleAttempts = 64;

}  // namespace

std::string format_mask(std::uint32_t mask, std::size_t ground_size) {
  std::string out = "{";
  bool first = true;
  for (std::size_t k = 0; k < ground_size; ++k) {
    if (!(mask & bit(k))) continue;
    if (!first) out += ",";
    out += std::to_string(k);
    first = false;
  }
  return out + "}";
}

PropertyReport check_supermodular(const SetFunction& f, const CheckOptions& opt) {
  const bool exhaustive = opt.force_exhaustive || f.ground_size <= kExhaustiveGroundSize;
  check_ground(f);
  const std::size_t n = f.ground_size;

  auto test = [&](Outcome& o, std::uint32_t s, std::size_t i, std::size_t j, std::size_t k) {
    const std::uint32_t si = s | bit(i), sj = s | bit(j), sij = si | bit(j);
    if (!admissible(f, si) || !admissible(f, sj) || !admissible(f, sij)) return false;
    const double slack = f.eval(s) + f.eval(sij) - f.eval(si) - f.eval(sj);
    o.record(slack, slack < -kPropertyTolerance, s, i, j, k);
    return true;
  };

  Outcome total;
  if (exhaustive) {
    const std::size_t masks = std::size_t{1} << n;
    total = merge_all(run_batches(masks, opt.exec, [&](std::size_t m) {
      Outcome o;
      const auto s = static_cast<std::uint32_t>(m);
      if (!admissible(f, s)) return o;
      for (std::size_t i = 0; i < n; ++i) {
        if (s & bit(i)) continue;
        for (std::size_t j = i + 1; j < n; ++j)
          if (!(s & bit(j))) test(o, s, i, j, m);
      }
      return o;
    }));
  } else {
    total = merge_all(run_batches(opt.trials, opt.exec, [&](std::size_t k) {
      Outcome o;
      std::mt19937_64 rng(trial_seed(opt.seed, k));
      for (int attempt = 0; attempt < kSampleAttempts; ++attempt) {
        std::uint32_t s = 0;
        std::size_t i = 0, j = 0;
        if (!sample_triple(rng, n, 2, s, i, j) || !admissible(f, s)) continue;
        if (test(o, s, i, j, k)) return o;
      }
      ++o.skipped;
      return o;
    }));
  }

  PropertyReport r;
  r.name = "supermodular";
  r.exhaustive = exhaustive;
  r.trials = total.checks;
  r.violations = total.violations;
  r.skipped = total.skipped;
  if (total.violations) {
    r.margin = total.worst;
    r.worst_witness = "S=" + format_mask(total.s, n) + " i=" + std::to_string(total.i) +
                      " j=" + std::to_string(total.j) + " slack=" + format_double(total.worst);
  }
  return r;
}

PropertyReport check_monotone(const SetFunction& f, const CheckOptions& opt) {
  const bool exhaustive = opt.force_exhaustive || f.ground_size <= kExhaustiveGroundSize;
  check_ground(f);
  const std::size_t n = f.ground_size;

  auto test = [&](Outcome& o, std::uint32_t s, std::size_t x, std::size_t k) {
    const std::uint32_t sx = s | bit(x);
    if (!admissible(f, sx)) return false;
    const double slack = f.eval(s) - f.eval(sx);
    o.record(slack, slack < -kPropertyTolerance, s, x, x, k);
    return true;
  };

  Outcome total;
  if (exhaustive) {
    const std::size_t masks = std::size_t{1} << n;
    total = merge_all(run_batches(masks, opt.exec, [&](std::size_t m) {
      Outcome o;
      const auto s = static_cast<std::uint32_t>(m);
      if (!admissible(f, s)) return o;
      for (std::size_t x = 0; x < n; ++x)
        if (!(s & bit(x))) test(o, s, x, m);
      return o;
    }));
  } else {
    total = merge_all(run_batches(opt.trials, opt.exec, [&](std::size_t k) {
      Outcome o;
      std::mt19937_64 rng(trial_seed(opt.seed, k));
      for (int attempt = 0; attempt < kSampleAttempts; ++attempt) {
        std::uint32_t s = 0;
        std::size_t x = 0, unused = 0;
        if (!sample_triple(rng, n, 1, s, x, unused) || !admissible(f, s)) continue;
        if (test(o, s, x, k)) return o;
      }
      ++o.skipped;
      return o;
    }));
  }

  PropertyReport r;
  r.name = "monotone";
  r.exhaustive = exhaustive;
  r.trials = total.checks;
  r.violations = total.violations;
  r.skipped = total.skipped;
  if (total.violations) {
    r.margin = total.worst;
    r.worst_witness = "S=" + format_mask(total.s, n) + " x=" + std::to_string(total.i) +
                      " slack=" + format_double(total.worst);
  }
  return r;
}

SetFunction di_as_set_function(std::span<const double> bits, const DiscreteParams& params,
                               std::size_t packet, const CellGround& ground,
                               bool distortion_only, bool greedy_reachable) {
  params.validate();
  if (packet >= bits.size()) throw std::out_of_range("packet index out of range");
  if (ground.levels == 0 || ground.slots == 0) throw std::invalid_argument("empty cell ground set");
  if (ground.slot_owner.size() != ground.slots)
    throw std::invalid_argument("slot ownership must list every slot");
  if (ground.slots * ground.levels > kMaxGroundSize)
    throw SizeError("ground set limited to " + std::to_string(kMaxGroundSize) + " cells");

  const double b = bits[packet];
  const std::size_t levels = ground.levels;
  const std::uint32_t level_mask = bit(levels) - 1;
  const std::vector<int> owner = ground.slot_owner;
  const int me = static_cast<int>(packet);

  SetFunction f;
  f.ground_size = ground.slots * levels;
  f.eval = [=](std::uint32_t mask) {
    double sent = 0.0;
    std::size_t last = 0;
    for (std::size_t j = 0; j < owner.size(); ++j) {
      const auto r = static_cast<std::size_t>(std::popcount((mask >> (j * levels)) & level_mask));
      if (owner[j] != me || r == 0) continue;
      sent += slot_bits(params, r);
      last = j + 1;
    }
    const double delay = distortion_only ? 0.0 : params.slot_len * static_cast<double>(last);
    return std::exp2(b - sent) + delay;
  };
  if (greedy_reachable) {
    f.admissible = [=](std::uint32_t mask) {
      bool ended = false;
      for (std::size_t j = 0; j < owner.size(); ++j) {
        const std::uint32_t cells = (mask >> (j * levels)) & level_mask;
        if ((cells & (cells + 1)) != 0) return false;  // levels must form a prefix
        if (cells == 0) {
          ended = true;
        } else if (ended) {
          return false;  // a gap before this slot
        }
      }
      return true;
    };
  }
  return f;
}

SetFunction di_as_set_function(const Instance& inst, const DiscreteParams& params,
                               std::size_t packet, const CellGround& ground,
                               bool distortion_only, bool greedy_reachable) {
  return di_as_set_function(inst.bits(), params, packet, ground, distortion_only,
                            greedy_reachable);
}

FeasiblePoint sample_feasible(const Instance& inst, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::size_t n = inst.size();
  std::uniform_real_distribution<double> unit(0.01, 1.0);
  std::uniform_real_distribution<double> slack(0.0, 1.0);
  double max_bits = 1.0;
  for (double b : inst.bits()) max_bits = std::max(max_bits, b);
  std::uniform_real_distribution<double> log_t(std::log(1e-3), std::log(10.0 * max_bits));

  FeasiblePoint p{std::vector<double>(n), std::vector<double>(n)};
  double sum = slack(rng);
  for (double& e : p.energies) {
    e = unit(rng);
    sum += e;
  }
  for (double& e : p.energies) e *= inst.energy() / sum;
  for (double& t : p.times) t = std::exp(log_t(rng));
  return p;
}

namespace {

std::string point_witness(const FeasiblePoint& x, const FeasiblePoint& y) {
  return "x.E=(" + join(x.energies) + ") x.t=(" + join(x.times) + ") y.E=(" + join(y.energies) +
         ") y.t=(" + join(y.times) + ")";
}

constexpr std::uint64_t kHessianStream = 0x4845535349414eULL;

}  // namespace

PropertyReport check_midpoint_convexity(const Instance& inst, const Order& order,
                                        const ConvexityOptions& opt) {
  if (order.size() != inst.size()) throw std::invalid_argument("order size does not match instance");
  const auto a = delay_coefficients(order);
  const std::size_t n = inst.size();

  auto cost = [&](const FeasiblePoint& p) { return linear_cost(inst, p.energies, p.times, a); };
  auto draw = [&](std::size_t k) {
    return std::pair{sample_feasible(inst, trial_seed(opt.seed, 2 * k)),
                     sample_feasible(inst, trial_seed(opt.seed, 2 * k + 1))};
  };

  const Outcome total = merge_all(run_batches(opt.trials, opt.exec, [&](std::size_t k) {
    Outcome o;
    const auto [x, y] = draw(k);
    FeasiblePoint mid{std::vector<double>(n), std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) {
      mid.energies[i] = 0.5 * (x.energies[i] + y.energies[i]);
      mid.times[i] = 0.5 * (x.times[i] + y.times[i]);
    }
    const double rhs = 0.5 * (cost(x) + cost(y));
    const double slack = rhs - cost(mid);
    o.record(slack, slack < -kPropertyTolerance * std::max(1.0, std::abs(rhs)), 0, 0, 0, k);
    return o;
  }));

  PropertyReport r;
  r.name = "midpoint-convexity";
  r.trials = total.checks;
  r.violations = total.violations;
  if (total.violations) {
    r.margin = total.worst;
    const auto [x, y] = draw(total.trial);
    r.worst_witness = point_witness(x, y) + " slack=" + format_double(total.worst);
  }
  return r;
}

PropertyReport check_hessian_blocks(const Instance& inst, const Order& order,
                                    const ConvexityOptions& opt) {
  if (order.size() != inst.size()) throw std::invalid_argument("order size does not match instance");
  const auto a = delay_coefficients(order);
  const std::size_t n = inst.size();
  const std::uint64_t stream = opt.seed ^ kHessianStream;

  const Outcome total = merge_all(run_batches(opt.trials, opt.exec, [&](std::size_t k) {
    Outcome o;
    const FeasiblePoint x = sample_feasible(inst, trial_seed(stream, k));
    for (std::size_t i = 0; i < n; ++i) {
      const Mat2 h = hessian_block(inst, i, x.energies[i], x.times[i], a[i]);
      const double slack = std::min(determinant(h), h[0][0] + h[1][1]);
      o.record(slack, !(slack > 0.0), 0, i, 0, k);
    }
    return o;
  }));

  PropertyReport r;
  r.name = "hessian-blocks";
  r.trials = total.checks;
  r.violations = total.violations;
  if (total.violations) {
    r.margin = total.worst;
    const FeasiblePoint x = sample_feasible(inst, trial_seed(stream, total.trial));
    r.worst_witness = "packet=" + std::to_string(total.i) +
                      " E=" + format_double(x.energies[total.i]) +
                      " t=" + format_double(x.times[total.i]) +
                      " min(det,trace)=" + format_double(total.worst);
  }
  return r;
}

PropertyReport check_convexity(const Instance& inst, const Order& order,
                               const ConvexityOptions& opt) {
  const PropertyReport mid = check_midpoint_convexity(inst, order, opt);
  const PropertyReport hes = check_hessian_blocks(inst, order, opt);
  PropertyReport r;
  r.name = "convexity";
  r.trials = mid.trials + hes.trials;
  r.violations = mid.violations + hes.violations;
  if (mid.violations) {
    r.worst_witness = "midpoint: " + *mid.worst_witness;
    r.margin = mid.margin;
  } else if (hes.violations) {
    r.worst_witness = "hessian: " + *hes.worst_witness;
    r.margin = hes.margin;
  }
  return r;
}

}  // namespace edd
