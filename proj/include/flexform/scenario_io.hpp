#ifndef FLEXFORM_SCENARIO_IO_HPP
#define FLEXFORM_SCENARIO_IO_HPP

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "flexform/simulation.hpp"

namespace flexform {

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Loads a scenario from a JSON file. Parse failures and missing fields
/// raise ScenarioError naming the offending field; invariant violations are
/// rejected through validate(Scenario).
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(std::istream& in, const std::string& origin);

void save_scenario(const Scenario& scenario, const std::string& path);
void write_scenario(const Scenario& scenario, std::ostream& out);

/// The four simulation cases shipped as built-ins: a square formation of
/// side 2 for four arms with one to four underactuated members
/// ("case1".."case4"). Throws ScenarioError for unknown names.
Scenario builtin_scenario(const std::string& name);
std::vector<std::string> builtin_scenario_names();

/// True when `name` refers to a built-in rather than a file path.
bool is_builtin_scenario(const std::string& name);

/// Trajectory CSV: a header row naming every column, one row per sample,
/// round-trip decimal formatting.
void save_trajectory(const TrajectoryRecord& record, const std::string& path);
void write_trajectory(const TrajectoryRecord& record, std::ostream& out);

/// Reads back a trajectory CSV column by header name (exact values).
std::vector<double> read_trajectory_column(const std::string& path,
                                           const std::string& column);

}  // namespace flexform

#endif
