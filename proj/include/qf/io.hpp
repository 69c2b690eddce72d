#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "qf/dynamics.hpp"
#include "qf/family.hpp"
#include "qf/integral_finder.hpp"

// Artifact formats. Every JSON file carries a "schema" version and echoes the
// parameters it was produced from, so a file is reproducible from its own
// header. Floating-point values are printed with 17 significant digits.

namespace qf {

using Json = nlohmann::ordered_json;

// %.17g serialization of a JSON tree (nlohmann's writer prints shortest
// round-trip forms instead, which would break byte-stable artifacts).
std::string dump_json(const Json& j, int indent = 2);

// temp + rename in the target directory
void write_text_atomic(const std::string& path, const std::string& content);
void write_json(const std::string& path, const Json& j);
Json read_json(const std::string& path);

Json system_to_json(const ChartedSystem& sys);
ChartedSystem system_from_json(const Json& j);

ChartedSystem load_system(const std::string& path);

Json integral_to_json(const ChartedSystem& sys, const QuarticAnsatz& ansatz,
                      const NullspaceReport& rep);
// rebuilds the ansatz (coefficients attached); verifies the parameter echo
// against the system the caller loaded
QuarticAnsatz integral_from_json(const Json& j, const ChartedSystem& sys);

// t, chart, q1, q2, p1, p2, H, F with CRLF line ends; F is blank unless an
// integral is supplied and the sample lies in its chart
void write_trajectory_csv(const std::string& path, const ChartedSystem& sys,
                          const Trajectory& traj, const QuarticAnsatz* ansatz = nullptr);

void write_crossings_csv(const std::string& path, const ChartedSystem& sys,
                         const std::vector<TrajSample>& crossings);

struct TrajRow {
  Real t = 0;
  std::string chart;
  Real q1 = 0, q2 = 0, p1 = 0, p2 = 0, H = 0;
  std::optional<Real> F;
};

std::vector<TrajRow> read_trajectory_csv(const std::string& path);

}  // namespace qf
