#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

#include <boost/math/tools/minima.hpp>

#include "CLI11.hpp"
#include "edd/csolve.hpp"
#include "edd/discrete.hpp"
#include "edd/format.hpp"
#include "edd/io.hpp"
#include "edd/order.hpp"
#include "edd/verify.hpp"

namespace edd::cli {

namespace {

using io::Json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// start:stop:step, or a single value.
std::vector<double> parse_range(const std::string& text) {
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw UsageError("malformed range '" + text + "'");
    }
    if (used != item.size() || !std::isfinite(v)) throw UsageError("malformed range '" + text + "'");
    parts.push_back(v);
  }
  if (parts.size() == 1) return parts;
  if (parts.size() != 3) throw UsageError("range must be start:stop:step, got '" + text + "'");
  const double start = parts[0], stop = parts[1], step = parts[2];
  if (!(step > 0.0) || stop < start) throw UsageError("range needs step > 0 and stop >= start");
  const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  if (count > 1'000'000) throw UsageError("range has too many points");
  std::vector<double> values(count);
  for (std::size_t k = 0; k < count; ++k) values[k] = start + static_cast<double>(k) * step;
  return values;
}

// "B2=..." -> (1, "...")
std::pair<std::size_t, std::string> parse_assignment(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq < 2 || (text[0] != 'B' && text[0] != 'b'))
    throw UsageError("expected Bk=value, got '" + text + "'");
  std::size_t index = 0;
  try {
    std::size_t used = 0;
    index = std::stoul(text.substr(1, eq - 1), &used);
    if (used != eq - 1) throw UsageError("");
  } catch (const std::exception&) {
    throw UsageError("expected Bk=value, got '" + text + "'");
  }
  if (index == 0) throw UsageError("packet numbers start at 1");
  return {index - 1, text.substr(eq + 1)};
}

Order order_from_flag(const std::vector<std::size_t>& sequence, std::size_t n) {
  if (sequence.empty()) return Order::identity(n);
  if (sequence.size() != n) throw UsageError("--order must list every packet once");
  std::vector<std::size_t> seq;
  for (std::size_t p : sequence) {
    if (p == 0) throw UsageError("--order is 1-based");
    seq.push_back(p - 1);
  }
  return Order::from_sequence(seq);
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path);
  return Json::parse(in);
}

// Instance fields and solver overrides gathered from --config and flags.
struct Setup {
  std::vector<double> bits;
  std::optional<double> energy;
  std::optional<double> slot_len;
  std::optional<double> quantum;
  SolverConfig solver;
};

Setup load_setup(const std::string& config, const std::vector<double>& bits,
                 std::optional<double> energy) {
  Setup s;
  if (!config.empty()) {
    const Json j = read_json_file(config);
    if (j.contains("bits")) s.bits = j["bits"].get<std::vector<double>>();
    if (j.contains("energy")) s.energy = j["energy"].get<double>();
    if (j.contains("slot_len")) s.slot_len = j["slot_len"].get<double>();
    if (j.contains("quantum")) s.quantum = j["quantum"].get<double>();
    s.solver = io::parse_solver_config(j);
  }
  if (!bits.empty()) s.bits = bits;
  if (energy) s.energy = energy;
  return s;
}

Instance continuous_instance(const Setup& s) {
  if (s.bits.empty()) throw UsageError("--bits is required");
  if (!s.energy) throw UsageError("--energy is required");
  return Instance(s.bits, *s.energy);
}

void print_json(std::ostream& out, const Json& j) { out << j.dump(2) << '\n'; }

Json instance_json(std::span<const double> bits, double energy, const DiscreteParams* p) {
  io::InstanceDoc doc{std::vector<double>(bits.begin(), bits.end()), energy, {}, {}};
  if (p) {
    doc.slot_len = p->slot_len;
    doc.quantum = p->quantum;
  }
  return io::to_json(doc);
}

// ---------------------------------------------------------------- solve

struct SolveFlags {
  std::vector<double> bits;
  std::optional<double> energy;
  std::vector<std::size_t> order;
  std::string search;
  std::string config;
};

int cmd_solve(const SolveFlags& f, std::ostream& out) {
  const Setup s = load_setup(f.config, f.bits, f.energy);
  const Instance inst = continuous_instance(s);

  SolveReport report;
  Json doc;
  doc["instance"] = instance_json(inst.bits(), inst.energy(), nullptr);
  if (f.search == "brute") {
    if (!f.order.empty()) throw UsageError("--order and --search are exclusive");
    auto result = brute_force_order(inst, s.solver);
    doc["search"] = "brute";
    doc["orders_tried"] = result.orders_tried;
    report = std::move(result.report);
  } else if (f.search == "spf") {
    if (!f.order.empty()) throw UsageError("--order and --search are exclusive");
    doc["search"] = "spf";
    report = solve_fixed_order(inst, spf_order(inst), s.solver);
  } else if (f.search.empty()) {
    doc["search"] = "fixed";
    report = solve_fixed_order(inst, order_from_flag(f.order, inst.size()), s.solver);
  } else {
    throw UsageError("--search must be brute or spf");
  }
  doc["delay_model"] = "completion-time";
  doc["report"] = io::to_json(report);
  print_json(out, doc);
  return report.converged ? kOk : kNotConverged;
}

// ---------------------------------------------------------------- sweep

struct SweepFlags {
  std::vector<std::string> fix;
  std::string vary;
  std::optional<double> energy;
  std::vector<std::size_t> order;
  std::string search;
  std::string config;
  bool surface = false;
  std::vector<double> bits;
  std::string e1;
  std::string t1;
};

SolveReport solve_with(const Instance& inst, const std::vector<std::size_t>& order_flag,
                       const std::string& search, const SolverConfig& cfg) {
  if (search == "brute") return brute_force_order(inst, cfg, kDefaultMaxOrderSearch, Exec::serial).report;
  if (search == "spf") return solve_fixed_order(inst, spf_order(inst), cfg);
  return solve_fixed_order(inst, order_from_flag(order_flag, inst.size()), cfg);
}

int cmd_sweep_line(const SweepFlags& f, const Setup& s, std::ostream& out) {
  if (f.vary.empty()) throw UsageError("--vary is required (or use --surface)");
  if (!s.energy) throw UsageError("--energy is required");
  if (!f.search.empty() && f.search != "brute" && f.search != "spf")
    throw UsageError("--search must be brute or spf");
  if (!f.search.empty() && !f.order.empty()) throw UsageError("--order and --search are exclusive");

  std::map<std::size_t, double> fixed;
  for (const auto& a : f.fix) {
    const auto [k, v] = parse_assignment(a);
    const auto vals = parse_range(v);
    if (vals.size() != 1) throw UsageError("--fix takes a single value");
    if (!fixed.emplace(k, vals[0]).second) throw UsageError("packet fixed twice");
  }
  const auto [varied, range] = parse_assignment(f.vary);
  if (fixed.count(varied)) throw UsageError("a packet cannot be both fixed and varied");
  const std::vector<double> values = parse_range(range);

  std::size_t n = varied + 1;
  for (const auto& [k, v] : fixed) n = std::max(n, k + 1);
  for (std::size_t k = 0; k < n; ++k)
    if (k != varied && !fixed.count(k))
      throw UsageError("packet B" + std::to_string(k + 1) + " is neither fixed nor varied");

  std::vector<std::vector<double>> point_bits(values.size(), std::vector<double>(n));
  for (std::size_t p = 0; p < values.size(); ++p) {
    for (const auto& [k, v] : fixed) point_bits[p][k] = v;
    point_bits[p][varied] = values[p];
  }
  // Validate every point before starting any work.
  std::vector<Instance> instances;
  for (const auto& b : point_bits) instances.emplace_back(b, *s.energy);

  std::vector<SolveReport> reports(values.size());
  const auto count = static_cast<std::ptrdiff_t>(values.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t p = 0; p < count; ++p)
    reports[p] = solve_with(instances[p], f.order, f.search, s.solver);

  io::CsvWriter w(out);
  w.cell("B" + std::to_string(varied + 1));
  for (std::size_t k = 0; k < n; ++k) w.cell("bhat" + std::to_string(k + 1));
  w.cell(std::string("U")).cell(std::string("converged")).end_row();
  bool all = true;
  for (std::size_t p = 0; p < values.size(); ++p) {
    w.cell(values[p]);
    for (double b : reports[p].cost.bhat) w.cell(b);
    w.cell(reports[p].cost.total).cell(std::size_t{reports[p].converged ? 1u : 0u}).end_row();
    all = all && reports[p].converged;
  }
  return all ? kOk : kNotConverged;
}

// Two-packet cost surface over packet 1's (E1, t1). Packet 2 gets the rest of
// the energy and the transmission time that minimizes the joint cost.
int cmd_sweep_surface(const SweepFlags& f, const Setup& s, std::ostream& out) {
  const Instance inst = continuous_instance(s);
  if (inst.size() != 2) throw UsageError("--surface needs exactly two packets");
  const Order order = order_from_flag(f.order, 2);
  const double budget = inst.energy();
  const double t_min = s.solver.t_min;

  const std::vector<double> e1 =
      parse_range(f.e1.empty() ? "0:" + format_double(budget) + ":" + format_double(budget / 50)
                               : f.e1);
  const std::vector<double> t1 = parse_range(f.t1.empty() ? "0.25:25:0.25" : f.t1);
  for (double e : e1)
    if (e < 0.0 || e > budget * (1.0 + 1e-12)) throw UsageError("--e1 values must lie in [0, E]");
  for (double t : t1)
    if (t < t_min) throw UsageError("--t1 values must be at least t_min");

  struct Row {
    double u1, u2;
  };
  std::vector<Row> rows(e1.size() * t1.size());
  const auto count = static_cast<std::ptrdiff_t>(rows.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t k = 0; k < count; ++k) {
    const double e = std::min(e1[k / t1.size()], budget);
    const double t = t1[k % t1.size()];
    const double e2 = std::max(budget - e, 0.0);
    auto breakdown = [&](double t2) {
      return evaluate_cost(inst, ContinuousAllocation{{e, e2}, {t, t2}, order}, t_min);
    };
    // U2 <= 2^B2 + t1 + t_min at t2 = t_min, so larger t2 cannot help.
    const double hi = std::exp2(inst.bits(1)) + t + e2 + 1.0;
    const auto best = boost::math::tools::brent_find_minima(
        [&](double log_t2) { return breakdown(std::exp(log_t2)).total; }, std::log(t_min),
        std::log(hi), std::numeric_limits<double>::digits / 2);
    const CostBreakdown c = breakdown(std::exp(best.first));
    rows[k] = Row{c.distortions[0] + c.delays[0], c.distortions[1] + c.delays[1]};
  }

  io::CsvWriter w(out);
  w.header({"E1", "t1", "U1", "U2"});
  for (std::size_t k = 0; k < rows.size(); ++k)
    w.cell(e1[k / t1.size()]).cell(t1[k % t1.size()]).cell(rows[k].u1).cell(rows[k].u2).end_row();
  return kOk;
}

int cmd_sweep(const SweepFlags& f, std::ostream& out) {
  const Setup s = load_setup(f.config, f.bits, f.energy);
  return f.surface ? cmd_sweep_surface(f, s, out) : cmd_sweep_line(f, s, out);
}

// ------------------------------------------------------- discrete / oracle

struct DiscreteFlags {
  std::vector<double> bits;
  std::optional<double> energy;
  std::optional<double> slot_len;
  std::optional<double> quantum;
  std::size_t max_slots = 0;
  bool spend_all = false;
  std::string config;
};

struct DiscreteSetup {
  std::vector<double> bits;
  double energy = 0.0;
  DiscreteParams params;
};

DiscreteSetup discrete_setup(const DiscreteFlags& f, std::size_t default_slots) {
  const Setup s = load_setup(f.config, f.bits, f.energy);
  if (s.bits.empty()) throw UsageError("--bits is required");
  if (!s.energy) throw UsageError("--energy is required");
  const double slot_len = f.slot_len.value_or(s.slot_len.value_or(1.0));
  const double quantum = f.quantum.value_or(s.quantum.value_or(1.0));
  const std::size_t slots = f.max_slots ? f.max_slots : default_slots;
  return DiscreteSetup{s.bits, *s.energy,
                       DiscreteParams::from_energy(slot_len, quantum, *s.energy, slots)};
}

Json params_json(const DiscreteParams& p) {
  Json j;
  j["slot_len"] = p.slot_len;
  j["quantum"] = p.quantum;
  j["budget_quanta"] = p.budget_quanta;
  j["max_slots"] = p.max_slots;
  return j;
}

int cmd_discrete(const DiscreteFlags& f, std::ostream& out) {
  const DiscreteSetup d = discrete_setup(f, 64);
  const GreedyResult g = greedy_allocate(d.bits, d.params, f.spend_all);
  Json doc;
  doc["instance"] = instance_json(d.bits, d.energy, &d.params);
  doc["params"] = params_json(d.params);
  doc["spend_all"] = f.spend_all;
  doc["allocation"] = io::to_json(g.alloc);
  doc["cost"] = io::to_json(g.cost);
  print_json(out, doc);
  out << '\n';
  io::write_trace_csv(out, g.trace);
  return kOk;
}

int cmd_oracle(const DiscreteFlags& f, std::ostream& out) {
  const DiscreteSetup d = discrete_setup(f, OracleLimits{}.max_slots);
  const OracleResult o = oracle_allocate(d.bits, d.params);
  const GreedyResult g = greedy_allocate(d.bits, d.params, f.spend_all);
  const double ratio = g.cost.total / o.cost.total;
  Json doc;
  doc["instance"] = instance_json(d.bits, d.energy, &d.params);
  doc["params"] = params_json(d.params);
  doc["oracle"] = {{"allocation", io::to_json(o.alloc)}, {"cost", io::to_json(o.cost)}};
  doc["greedy"] = {{"allocation", io::to_json(g.alloc)}, {"cost", io::to_json(g.cost)}};
  doc["ratio"] = ratio;
  print_json(out, doc);
  return ratio > 2.0 ? kRatioViolation : kOk;
}

// ----------------------------------------------------------------- check

struct CheckFlags {
  std::vector<double> bits{2.0};
  std::optional<double> energy;
  double slot_len = 1.0;
  double quantum = 1.0;
  std::size_t packet = 1;
  std::size_t ground_set = 6;
  std::size_t levels = 3;
  std::vector<std::size_t> owners;
  std::vector<std::size_t> order;
  std::size_t trials = 10'000;
  std::uint64_t seed = 0;
  bool exhaustive = false;
  bool greedy_reachable = false;
  bool distortion_only = false;
  bool convexity = false;
  bool json = false;
};

int cmd_check(const CheckFlags& f, std::ostream& out) {
  std::vector<PropertyReport> reports;
  if (f.convexity) {
    if (!f.energy) throw UsageError("--convexity needs --energy");
    const Instance inst(f.bits, *f.energy);
    const ConvexityOptions opt{f.trials, f.seed, Exec::parallel};
    const Order order = order_from_flag(f.order, inst.size());
    reports.push_back(check_midpoint_convexity(inst, order, opt));
    reports.push_back(check_hessian_blocks(inst, order, opt));
  } else {
    if (f.levels == 0 || f.ground_set % f.levels != 0)
      throw UsageError("--ground-set must be a multiple of --levels");
    if (f.packet == 0 || f.packet > f.bits.size()) throw UsageError("--packet out of range");
    CellGround ground{f.ground_set / f.levels, f.levels, {}};
    if (f.owners.empty()) {
      ground.slot_owner.assign(ground.slots, static_cast<int>(f.packet - 1));
    } else {
      if (f.owners.size() != ground.slots) throw UsageError("--owners must list every slot");
      for (std::size_t o : f.owners) {
        if (o > f.bits.size()) throw UsageError("--owners entry out of range");
        ground.slot_owner.push_back(o == 0 ? kUnowned : static_cast<int>(o - 1));
      }
    }
    const DiscreteParams params{f.slot_len, f.quantum, 0, ground.slots};
    const SetFunction fn = di_as_set_function(std::span<const double>(f.bits), params,
                                              f.packet - 1, ground, f.distortion_only,
                                              f.greedy_reachable);
    const CheckOptions opt{f.trials, f.seed, f.exhaustive, Exec::parallel};
    reports.push_back(check_supermodular(fn, opt));
    reports.push_back(check_monotone(fn, opt));
  }
  if (f.json) {
    Json arr = Json::array();
    for (const auto& r : reports) arr.push_back(io::to_json(r));
    print_json(out, arr);
  } else {
    io::write_property_table(out, reports);
  }
  return kOk;
}

// ------------------------------------------------------------------- spf

struct SpfFlags {
  std::size_t count = 200;
  std::size_t n = 2;
  std::uint64_t seed = 0;
  std::string csv;
  std::string config;
};

int cmd_spf(const SpfFlags& f, std::ostream& out) {
  const Setup s = load_setup(f.config, {}, std::nullopt);
  const SpfStats stats = spf_agreement_experiment(f.count, f.seed, f.n, s.solver);
  if (!f.csv.empty()) {
    std::ofstream file(f.csv, std::ios::binary);
    if (!file) throw UsageError("cannot write " + f.csv);
    io::write_spf_csv(file, stats);
  }
  print_json(out, io::to_json(stats));
  return kOk;
}

template <class T>
CLI::Option* add_optional(CLI::App* app, const std::string& name, std::optional<T>& target,
                          const std::string& desc) {
  return app->add_option_function<T>(name, [&target](const T& v) { target = v; }, desc);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Energy-delay-distortion scheduling solver"};
  app.name("edd");
  app.require_subcommand(1);

  SolveFlags solve;
  auto* s = app.add_subcommand("solve", "Solve the continuous problem; prints a JSON report");
  s->add_option("--bits", solve.bits, "Packet sizes in bits")->delimiter(',');
  add_optional(s, "--energy", solve.energy, "Energy budget (J)");
  s->add_option("--order", solve.order, "Send sequence, 1-based (e.g. 2,1)")->delimiter(',');
  s->add_option("--search", solve.search, "Order search: brute or spf");
  s->add_option("--config", solve.config, "JSON instance and solver overrides");

  SweepFlags sweep;
  auto* w = app.add_subcommand("sweep", "Parameter sweeps and the two-packet cost surface (CSV)");
  w->add_option("--fix", sweep.fix, "Fixed packet size, e.g. B1=15");
  w->add_option("--vary", sweep.vary, "Varied packet size, e.g. B2=1:30:1");
  add_optional(w, "--energy", sweep.energy, "Energy budget (J)");
  w->add_option("--order", sweep.order, "Send sequence, 1-based")->delimiter(',');
  w->add_option("--search", sweep.search, "Order search per point: brute or spf");
  w->add_option("--config", sweep.config, "JSON instance and solver overrides");
  w->add_flag("--surface", sweep.surface, "Emit the (E1, t1) grid with U1, U2");
  w->add_option("--bits", sweep.bits, "Packet sizes for --surface")->delimiter(',');
  w->add_option("--e1", sweep.e1, "E1 grid start:stop:step (default 0:E:E/50)");
  w->add_option("--t1", sweep.t1, "t1 grid start:stop:step (default 0.25:25:0.25)");

  DiscreteFlags discrete;
  auto* d = app.add_subcommand("discrete", "Greedy resource-block allocation (JSON + trace CSV)");
  DiscreteFlags oracle;
  auto* o = app.add_subcommand("oracle", "Exhaustive optimum and the greedy/optimal ratio");
  for (auto [cmd, flags] : {std::pair{d, &discrete}, std::pair{o, &oracle}}) {
    cmd->add_option("--bits", flags->bits, "Packet sizes in bits")->delimiter(',');
    add_optional(cmd, "--energy", flags->energy, "Energy budget (J), may be 0");
    add_optional(cmd, "--slot-len", flags->slot_len, "Slot length l (s), default 1");
    add_optional(cmd, "--quantum", flags->quantum, "Energy quantum e (J), default 1");
    cmd->add_option("--max-slots", flags->max_slots, "Slot cap J");
    cmd->add_flag("--spend-all", flags->spend_all, "Greedy keeps spending quanta without gain");
    cmd->add_option("--config", flags->config, "JSON instance");
  }

  CheckFlags check;
  auto* c = app.add_subcommand("check", "Property probes (supermodularity, monotonicity, convexity)");
  c->add_option("--bits", check.bits, "Packet sizes in bits (default 2)")->delimiter(',');
  add_optional(c, "--energy", check.energy, "Energy budget for --convexity");
  c->add_option("--slot-len", check.slot_len, "Slot length l (s)");
  c->add_option("--quantum", check.quantum, "Energy quantum e (J)");
  c->add_option("--packet", check.packet, "Packet whose D_i is probed, 1-based");
  c->add_option("--ground-set", check.ground_set, "Number of cells (slots x levels)");
  c->add_option("--levels", check.levels, "Cells per slot");
  c->add_option("--owners", check.owners, "Slot owners, 1-based, 0 for none")->delimiter(',');
  c->add_option("--order", check.order, "Send sequence for --convexity")->delimiter(',');
  c->add_option("--trials", check.trials, "Sampled trials");
  c->add_option("--seed", check.seed, "Random seed");
  c->add_flag("--exhaustive", check.exhaustive, "Enumerate every triple");
  c->add_flag("--greedy-reachable", check.greedy_reachable, "Only sets the greedy can reach");
  c->add_flag("--distortion-only", check.distortion_only, "Drop the delay term of D_i");
  c->add_flag("--convexity", check.convexity, "Probe the continuous objective instead");
  c->add_flag("--json", check.json, "JSON instead of a table");

  SpfFlags spf;
  auto* p = app.add_subcommand("spf", "Shortest-packet-first vs brute-force agreement experiment");
  p->add_option("--count", spf.count, "Number of random instances");
  p->add_option("--n", spf.n, "Packets per instance");
  p->add_option("--seed", spf.seed, "Random seed");
  p->add_option("--csv", spf.csv, "Write per-instance rows to this file");
  p->add_option("--config", spf.config, "JSON solver overrides");

  std::vector<const char*> argv{"edd"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    if (s->parsed()) return cmd_solve(solve, out);
    if (w->parsed()) return cmd_sweep(sweep, out);
    if (d->parsed()) return cmd_discrete(discrete, out);
    if (o->parsed()) return cmd_oracle(oracle, out);
    if (c->parsed()) return cmd_check(check, out);
    if (p->parsed()) return cmd_spf(spf, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace edd::cli
