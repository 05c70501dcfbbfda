#include "edd/io.hpp"

#include <cstdio>

#include "edd/format.hpp"

namespace edd::io {

namespace {

std::vector<std::size_t> one_based(std::span<const std::size_t> v) {
  std::vector<std::size_t> out(v.begin(), v.end());
  for (auto& x : out) ++x;
  return out;
}

std::vector<std::size_t> zero_based(const Json& j, const char* what) {
  std::vector<std::size_t> out;
  for (const auto& x : j) {
    const auto v = x.get<long long>();
    if (v < 1) throw std::invalid_argument(std::string(what) + " entries are 1-based");
    out.push_back(static_cast<std::size_t>(v - 1));
  }
  return out;
}

}  // namespace

Json to_json(const InstanceDoc& doc) {
  Json j;
  j["bits"] = doc.bits;
  j["energy"] = doc.energy;
  if (doc.slot_len) j["slot_len"] = *doc.slot_len;
  if (doc.quantum) j["quantum"] = *doc.quantum;
  return j;
}

InstanceDoc parse_instance(const Json& j) {
  if (!j.is_object()) throw std::invalid_argument("instance document must be an object");
  InstanceDoc doc;
  doc.bits = j.at("bits").get<std::vector<double>>();
  doc.energy = j.at("energy").get<double>();
  if (j.contains("slot_len")) doc.slot_len = j["slot_len"].get<double>();
  if (j.contains("quantum")) doc.quantum = j["quantum"].get<double>();
  return doc;
}

SolverConfig parse_solver_config(const Json& j, SolverConfig cfg) {
  if (!j.is_object()) throw std::invalid_argument("solver config must be an object");
  if (j.contains("max_iters")) cfg.max_iters = j["max_iters"].get<std::size_t>();
  if (j.contains("grad_tol")) cfg.grad_tol = j["grad_tol"].get<double>();
  if (j.contains("armijo_c")) cfg.armijo_c = j["armijo_c"].get<double>();
  if (j.contains("backtrack_factor")) cfg.backtrack_factor = j["backtrack_factor"].get<double>();
  if (j.contains("init_step")) cfg.init_step = j["init_step"].get<double>();
  if (j.contains("t_min")) cfg.t_min = j["t_min"].get<double>();
  cfg.validate();
  return cfg;
}

Json to_json(const SolverConfig& cfg) {
  Json j;
  j["max_iters"] = cfg.max_iters;
  j["grad_tol"] = cfg.grad_tol;
  j["armijo_c"] = cfg.armijo_c;
  j["backtrack_factor"] = cfg.backtrack_factor;
  j["init_step"] = cfg.init_step;
  j["t_min"] = cfg.t_min;
  return j;
}

Json to_json(const Order& order) {
  Json j;
  j["positions"] = one_based(order.positions());
  j["sequence"] = one_based(order.sequence());
  return j;
}

Order parse_order(const Json& j) {
  if (j.contains("positions")) return Order::from_positions(zero_based(j["positions"], "positions"));
  const auto seq = zero_based(j.at("sequence"), "sequence");
  return Order::from_sequence(seq);
}

Json to_json(const SolveReport& r) {
  Json j;
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["final_pg_norm"] = r.final_pg_norm;
  j["energy_slack"] = r.energy_slack;
  j["bhat_exceeds_bits"] = r.bhat_exceeds_bits;
  j["order"] = to_json(r.alloc.order);
  j["energies"] = r.alloc.energies;
  j["times"] = r.alloc.times;
  j["bhat"] = r.cost.bhat;
  j["distortions"] = r.cost.distortions;
  j["delays"] = r.cost.delays;
  j["total"] = r.cost.total;
  return j;
}

SolveReport parse_solve_report(const Json& j) {
  SolveReport r;
  r.converged = j.at("converged").get<bool>();
  r.iterations = j.at("iterations").get<std::size_t>();
  r.final_pg_norm = j.at("final_pg_norm").get<double>();
  r.energy_slack = j.at("energy_slack").get<double>();
  r.bhat_exceeds_bits = j.at("bhat_exceeds_bits").get<bool>();
  r.alloc.order = parse_order(j.at("order"));
  r.alloc.energies = j.at("energies").get<std::vector<double>>();
  r.alloc.times = j.at("times").get<std::vector<double>>();
  r.cost.bhat = j.at("bhat").get<std::vector<double>>();
  r.cost.distortions = j.at("distortions").get<std::vector<double>>();
  r.cost.delays = j.at("delays").get<std::vector<double>>();
  r.cost.total = j.at("total").get<double>();
  return r;
}

Json to_json(const DiscreteAllocation& alloc) {
  Json slots = Json::array();
  for (std::size_t k = 0; k < alloc.owner.size(); ++k) {
    Json s;
    if (alloc.owner[k] == kUnowned)
      s["owner"] = nullptr;
    else
      s["owner"] = alloc.owner[k] + 1;
    s["quanta"] = alloc.quanta[k];
    slots.push_back(std::move(s));
  }
  Json j;
  j["slots"] = std::move(slots);
  return j;
}

DiscreteAllocation parse_discrete_allocation(const Json& j) {
  DiscreteAllocation a;
  for (const auto& s : j.at("slots")) {
    const auto& o = s.at("owner");
    if (o.is_null()) {
      a.owner.push_back(kUnowned);
    } else {
      const auto v = o.get<long long>();
      if (v < 1) throw std::invalid_argument("slot owners are 1-based");
      a.owner.push_back(static_cast<int>(v - 1));
    }
    a.quanta.push_back(s.at("quanta").get<std::size_t>());
  }
  return a;
}

Json to_json(const DiscreteCost& cost) {
  Json j;
  j["per_packet"] = cost.per_packet;
  j["total"] = cost.total;
  return j;
}

Json to_json(const PropertyReport& r) {
  Json j;
  j["name"] = r.name;
  j["trials"] = r.trials;
  j["violations"] = r.violations;
  j["skipped"] = r.skipped;
  j["exhaustive"] = r.exhaustive;
  j["margin"] = r.margin;
  if (r.worst_witness)
    j["worst_witness"] = *r.worst_witness;
  else
    j["worst_witness"] = nullptr;
  return j;
}

Json to_json(const SpfRow& row) {
  Json j;
  j["seed"] = row.seed;
  j["index"] = row.index;
  j["bits"] = row.bits;
  j["energy"] = row.energy;
  j["spf_cost"] = row.spf_cost;
  j["opt_cost"] = row.opt_cost;
  j["gap"] = row.gap;
  j["agrees"] = row.agrees;
  return j;
}

Json to_json(const SpfStats& s) {
  Json j;
  j["count"] = s.count;
  j["n"] = s.n;
  j["seed"] = s.seed;
  j["agreements"] = s.agreements;
  j["agreement"] = s.agreement;
  if (s.worst)
    j["worst"] = to_json(*s.worst);
  else
    j["worst"] = nullptr;
  return j;
}

void CsvWriter::sep() {
  if (!first_) out_ << ',';
  first_ = false;
}

CsvWriter& CsvWriter::header(std::initializer_list<const char*> names) {
  for (const char* n : names) {
    sep();
    out_ << n;
  }
  end_row();
  return *this;
}

CsvWriter& CsvWriter::cell(double v) {
  sep();
  out_ << format_double(v);
  return *this;
}

CsvWriter& CsvWriter::cell(std::size_t v) {
  sep();
  out_ << v;
  return *this;
}

CsvWriter& CsvWriter::cell(const std::string& v) {
  sep();
  out_ << v;
  return *this;
}

void CsvWriter::end_row() {
  out_ << '\n';
  first_ = true;
}

void write_trace_csv(std::ostream& out, const std::vector<TraceStep>& trace) {
  CsvWriter w(out);
  w.header({"iteration", "action", "slot", "packet", "total_cost"});
  for (const TraceStep& s : trace) {
    w.cell(s.iteration).cell(std::string(to_string(s.action))).cell(s.slot + 1).cell(s.packet + 1);
    w.cell(s.total_cost).end_row();
  }
}

void write_spf_csv(std::ostream& out, const SpfStats& stats) {
  CsvWriter w(out);
  w.header({"seed", "index", "bits", "energy", "spf_cost", "opt_cost", "gap"});
  for (const SpfRow& r : stats.rows) {
    w.cell(std::to_string(r.seed)).cell(r.index).cell(join(r.bits, ";")).cell(r.energy);
    w.cell(r.spf_cost).cell(r.opt_cost).cell(r.gap).end_row();
  }
}

void write_property_table(std::ostream& out, const std::vector<PropertyReport>& reports) {
  char line[160];
  std::snprintf(line, sizeof line, "%-22s %-10s %10s %10s %8s %12s\n", "property", "mode", "trials",
                "violations", "skipped", "margin");
  out << line;
  for (const PropertyReport& r : reports) {
    std::snprintf(line, sizeof line, "%-22s %-10s %10zu %10zu %8zu %12s\n", r.name.c_str(),
                  r.exhaustive ? "exhaustive" : "sampled", r.trials, r.violations, r.skipped,
                  format_double(r.margin).c_str());
    out << line;
  }
  for (const PropertyReport& r : reports)
    if (r.worst_witness) out << r.name << " worst: " << *r.worst_witness << '\n';
}

}  // namespace edd::io
