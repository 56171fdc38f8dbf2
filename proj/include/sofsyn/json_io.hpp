#pragma once

#include "sofsyn/robustness.hpp"
#include "sofsyn/synthesis.hpp"

#include <string>

namespace sofsyn {

std::string synthesis_result_to_json(const SynthesisResult& result);
void save_synthesis_result(const SynthesisResult& result, const std::string& path);

std::string robustness_report_to_json(const RobustnessReport& report);
void save_robustness_report(const RobustnessReport& report, const std::string& path);

/// Reads the gain matrix K back out of a saved synthesis result.
Matrix load_gain(const std::string& path);

}  // namespace sofsyn
