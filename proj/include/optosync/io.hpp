#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "optosync/covariance.hpp"
#include "optosync/floquet.hpp"
#include "optosync/spectrum.hpp"
#include "optosync/sweep.hpp"

namespace optosync {

/// %.17g; nan/inf spelled out.
std::string format_number(double v);

void write_csv(std::ostream& out, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

/// t,Q1,P1,Q2,P2,ReA,ImA,Sq,ED,duan,Sqm
void write_simulation_csv(std::ostream& out, const SimulationResult& run);

nlohmann::json floquet_json(const FloquetSolution& f, const StabilityReport& s);
nlohmann::json stability_json(const EffectiveConstants& k, const StabilityReport& s);
nlohmann::json spectrum_json(const AnalyticReport& r);
nlohmann::json sweep_metadata_json(const SweepTable& table);

/// Writes to `path`, or to stdout when path is empty or "-". LF line endings.
void write_text(const std::string& path, const std::string& text);

}  // namespace optosync
