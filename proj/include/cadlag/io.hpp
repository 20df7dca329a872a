#pragma once

// JSON encodings of paths, laws, generator specs, functionals and reports.
// Doubles are written as shortest round-trip decimals, so laws survive a
// write/read cycle bit for bit.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cadlag/convergence.hpp"
#include "cadlag/generators.hpp"
#include "cadlag/laws.hpp"
#include "cadlag/metrics.hpp"
#include "cadlag/tightness.hpp"

namespace cadlag::io {

using nlohmann::json;

/// Parses text, turning syntax errors into ValidationError("json.syntax") with a line number.
json parse_json(const std::string& text);
json read_json_file(const std::filesystem::path& file);
/// Writes to a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& file, const std::string& content);

json horizon_to_json(const TimeHorizon& h);
TimeHorizon horizon_from_json(const json& j);

/// {"horizon": ..., "coords": [{"breakpoints": [...], "values": [...]}, ...]}
json path_to_json(const CadlagPath& p);
/// Accepts the object form or a bare coords array; the horizon falls back to `fallback`.
CadlagPath path_from_json(const json& j, const std::optional<TimeHorizon>& fallback = std::nullopt);

/// {"grid": [...], "d": n, "horizon": ..., "atoms": [{"weight": w, "paths": {"coords": [...]}}]}
json law_to_json(const DiscreteProcessLaw& Q);
/// The horizon defaults to [0, last grid time].
DiscreteProcessLaw law_from_json(const json& j);

GeneratorSpec spec_from_json(const json& j);
json spec_to_json(const GeneratorSpec& spec);

MzFunctional functional_from_json(const json& j);
json functional_to_json(const MzFunctional& f);

json to_json(const Classification& c);
json to_json(const Norms& n);
json to_json(const ConditionReport& r);
json to_json(const ConvergenceReport& r);
json to_json(const StabilityReport& r);

/// Rows "condition,curve,c,statistic" for plotting.
std::string curves_csv(const std::vector<ConditionReport>& reports);

}  // namespace cadlag::io
