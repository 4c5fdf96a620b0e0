#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "pchaz/estimators.hpp"
#include "pchaz/multistate.hpp"
#include "pchaz/pipeline.hpp"
#include "pchaz/simharness.hpp"
#include "pchaz/step_function.hpp"
#include "pchaz/tuning.hpp"

namespace pchaz::io {

using json = nlohmann::json;

json to_json(const Window& w);
Window window_from_json(const json& j);

/// {"domain": [tau_min, tau_max], "breaks": [...], "levels": [...]}
json to_json(const StepFunction& f);
StepFunction step_function_from_json(const json& j);

json to_json(const TuningResult& t);
TuningResult tuning_from_json(const json& j);

json to_json(const CoxFit& c);
json to_json(const HazardFit& fit);
json to_json(const IllnessDeathModel& m);
IllnessDeathModel model_from_json(const json& j);
json to_json(const StudyReport& r, bool include_runs = true);

/// Step corner points "t,level": two rows per break so plots show exact steps.
void write_step_csv(std::ostream& out, const StepFunction& f);
StepFunction read_step_csv(std::istream& in);

/// "time,cumhaz": (0, 0) followed by one row per jump.
void write_cumhaz_csv(std::ostream& out, const BreslowCurve& curve);
BreslowCurve read_cumhaz_csv(std::istream& in);

/// "t,S_PFS,S_OS".
void write_curves_csv(std::ostream& out, const SurvivalCurve& pfs, const SurvivalCurve& os);
/// "t,S".
void write_curve_csv(std::ostream& out, const SurvivalCurve& c);
SurvivalCurve read_curve_csv(std::istream& in, const std::string& column = "S");

json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace pchaz::io
