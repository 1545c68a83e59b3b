#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "superrad/dynamics.hpp"
#include "superrad/emitters.hpp"
#include "superrad/montecarlo.hpp"

namespace superrad {

using ordered_json = nlohmann::ordered_json;

/// Shortest-safe decimal: printf "%.17g", which round-trips every double.
std::string format_double(double value);

ordered_json emitters_to_json(const EmitterArray& array);
/// Reads {"lambda0_nm": f, "emitters": [{"pos_nm": [x,y,z], "dip": [ux,uy,uz]}, ...]}.
EmitterArray emitters_from_json(const nlohmann::json& doc, bool allow_coincident = false);

ordered_json lattice_to_json(const LatticeSpec& spec);
LatticeSpec lattice_from_json(const nlohmann::json& doc, LatticeSpec defaults = {});

/// Tabulated environments serialise their matrix as a digest plus size; the
/// matrix itself travels separately (see environment_from_json).
ordered_json environment_to_json(const EnvironmentModel& model);
/// {"type": "freespace"|"bic"|"dicke"|"independent"|"tabulated", ...}; a
/// tabulated entry needs "path", resolved relative to `base_dir`.
EnvironmentModel environment_from_json(const nlohmann::json& doc,
                                       const std::filesystem::path& base_dir = {});

ordered_json mode_to_json(const DisorderMode& mode);
DisorderMode mode_from_json(const nlohmann::json& doc);

/// Everything that determines the samples; thread count and cache size are
/// excluded because they cannot change the output.
ordered_json config_to_json(const DisorderConfig& config);

ordered_json distribution_to_json(const DisorderDistribution& dist, const DisorderConfig& config);
/// Parses the samples and stored statistics back (skewness null -> NaN).
DisorderDistribution distribution_from_json(const nlohmann::json& doc);

void write_trace_csv(std::ostream& out, const RateTrace& trace);
void write_histogram_csv(std::ostream& out, const Histogram& h);
void write_stats_csv(std::ostream& out, const SummaryStats& stats);

/// One row of a "noise,mu,sigma,gamma" reference table.
struct ReferenceRow {
  std::string label;
  SummaryStats stats;
};

std::vector<ReferenceRow> read_reference_table(std::istream& in);
void write_reference_table(std::ostream& out, const std::vector<ReferenceRow>& rows);

}  // namespace superrad
