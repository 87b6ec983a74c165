#pragma once

#include <nlohmann/json_fwd.hpp>
#include <string>

#include "mixlasso/model.hpp"
#include "mixlasso/select_metrics.hpp"
#include "mixlasso/sim_study.hpp"

namespace mixlasso {

// Deterministic decimal formatting shared by every CSV writer.
std::string format_double(double value);

// Dataset CSV: header x1..xq, w1..wP, z1..zT, y; '.' decimal, UTF-8.
Dataset read_dataset_csv(const std::string& path, const FactorSpec& spec);
std::string dataset_to_csv(const Dataset& dataset, const FactorSpec& spec);

FactorSpec factor_spec_from_json(const nlohmann::json& j);
nlohmann::json factor_spec_to_json(const FactorSpec& spec);

ModelFormula formula_from_json(const nlohmann::json& j);
nlohmann::json formula_to_json(const ModelFormula& formula);

nlohmann::json posterior_summary_to_json(const PosteriorSummary& summary);
nlohmann::json selection_report_to_json(const SelectionReport& report);

// Frequency-table CSV: one row per term, one frequency column per
// method/criterion pair.
std::string study_report_to_csv(const StudyReport& report);
nlohmann::json study_report_to_json(const StudyReport& report);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace mixlasso
