#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "edd/csolve.hpp"
#include "edd/discrete.hpp"
#include "edd/model.hpp"
#include "edd/order.hpp"
#include "edd/verify.hpp"

namespace edd::io {

using Json = nlohmann::ordered_json;

/// Instance document. Energy is kept raw so that a discrete run with zero
/// energy can still be described; to_instance() enforces E > 0.
struct InstanceDoc {
  std::vector<double> bits;
  double energy = 0.0;
  std::optional<double> slot_len;
  std::optional<double> quantum;

  Instance to_instance() const { return Instance(bits, energy); }
};

Json to_json(const InstanceDoc& doc);
InstanceDoc parse_instance(const Json& j);

/// Overrides any SolverConfig field present in `j` (same names as the struct).
SolverConfig parse_solver_config(const Json& j, SolverConfig base = {});
Json to_json(const SolverConfig& cfg);

/// Positions and sequence are written 1-based.
Json to_json(const Order& order);
Order parse_order(const Json& j);

Json to_json(const SolveReport& report);
SolveReport parse_solve_report(const Json& j);

/// {"slots":[{"owner":i,"quanta":R}, ...]}, owner 1-based or null.
Json to_json(const DiscreteAllocation& alloc);
DiscreteAllocation parse_discrete_allocation(const Json& j);

Json to_json(const DiscreteCost& cost);
Json to_json(const PropertyReport& report);
Json to_json(const SpfRow& row);
Json to_json(const SpfStats& stats);

/// Comma-separated rows with LF endings. Doubles are written in their
/// shortest round-trip form.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}
  CsvWriter& header(std::initializer_list<const char*> names);
  CsvWriter& cell(double v);
  CsvWriter& cell(std::size_t v);
  CsvWriter& cell(const std::string& v);
  void end_row();

 private:
  void sep();
  std::ostream& out_;
  bool first_ = true;
};

void write_trace_csv(std::ostream& out, const std::vector<TraceStep>& trace);
void write_spf_csv(std::ostream& out, const SpfStats& stats);

/// Fixed-width summary table of property reports.
void write_property_table(std::ostream& out, const std::vector<PropertyReport>& reports);

}  // namespace edd::io
