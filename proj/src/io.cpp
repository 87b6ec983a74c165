#include "mixlasso/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace mixlasso {

using nlohmann::json;

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", value);
  return buf;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) {
    // Trim surrounding whitespace.
    const auto begin = field.find_first_not_of(" \t\r");
    const auto end = field.find_last_not_of(" \t\r");
    fields.push_back(begin == std::string::npos ? ""
                                                : field.substr(begin, end - begin + 1));
  }
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

double parse_double(const std::string& text, int line_no, const std::string& column) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    std::ostringstream os;
    os << "CSV line " << line_no << ": cannot parse '" << text << "' in column "
       << column;
    throw IoError(os.str());
  }
}

std::vector<std::string> expected_header(const FactorSpec& spec) {
  std::vector<std::string> names;
  for (int i = 1; i <= spec.n_mixture; ++i) names.push_back("x" + std::to_string(i));
  for (int k = 1; k <= spec.n_process(); ++k) names.push_back("w" + std::to_string(k));
  for (int t = 1; t <= spec.n_noise; ++t) names.push_back("z" + std::to_string(t));
  names.push_back("y");
  return names;
}

}  // namespace

Dataset read_dataset_csv(const std::string& path, const FactorSpec& spec) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("dataset file is empty: " + path);
  const auto header = split_csv_line(line);
  const auto expected = expected_header(spec);
  if (header != expected) {
    std::ostringstream os;
    os << "dataset header mismatch in " << path << "; expected:";
    for (const auto& h : expected) os << " " << h;
    throw IoError(os.str());
  }

  std::vector<std::vector<double>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != expected.size()) {
      std::ostringstream os;
      os << "CSV line " << line_no << ": expected " << expected.size()
         << " fields, got " << fields.size();
      throw IoError(os.str());
    }
    std::vector<double> row;
    for (std::size_t k = 0; k < fields.size(); ++k)
      row.push_back(parse_double(fields[k], line_no, expected[k]));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("dataset has a header but no rows: " + path);

  Dataset data;
  const auto n = static_cast<Eigen::Index>(rows.size());
  data.x.resize(n, spec.n_mixture);
  data.w.resize(n, spec.n_process());
  data.z.resize(n, spec.n_noise);
  data.y.resize(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    std::size_t at = 0;
    for (int i = 0; i < spec.n_mixture; ++i) data.x(r, i) = rows[r][at++];
    for (int k = 0; k < spec.n_process(); ++k) data.w(r, k) = rows[r][at++];
    for (int t = 0; t < spec.n_noise; ++t) data.z(r, t) = rows[r][at++];
    data.y(r) = rows[r][at];
  }
  data.validate(spec);
  return data;
}

std::string dataset_to_csv(const Dataset& dataset, const FactorSpec& spec) {
  std::ostringstream os;
  const auto header = expected_header(spec);
  for (std::size_t k = 0; k < header.size(); ++k)
    os << (k ? "," : "") << header[k];
  os << "\n";
  for (Eigen::Index r = 0; r < dataset.n_rows(); ++r) {
    for (int i = 0; i < spec.n_mixture; ++i)
      os << (i ? "," : "") << format_double(dataset.x(r, i));
    for (int k = 0; k < spec.n_process(); ++k)
      os << "," << format_double(dataset.w(r, k));
    for (int t = 0; t < spec.n_noise; ++t)
      os << "," << format_double(dataset.z(r, t));
    os << "," << format_double(dataset.y(r)) << "\n";
  }
  return os.str();
}

FactorSpec factor_spec_from_json(const json& j) {
  FactorSpec spec;
  try {
    spec.n_mixture = j.at("n_mixture").get<int>();
    for (const auto& b : j.at("mixture_bounds"))
      spec.mixture_bounds.push_back({b.at(0).get<double>(), b.at(1).get<double>()});
    if (j.contains("process")) {
      for (const auto& pj : j.at("process")) {
        ProcessVariable pv;
        if (pj.contains("levels"))
          pv.levels = pj.at("levels").get<std::vector<double>>();
        else
          pv.bounds = {pj.at("bounds").at(0).get<double>(),
                       pj.at("bounds").at(1).get<double>()};
        spec.process.push_back(std::move(pv));
      }
    }
    spec.n_noise = j.value("n_noise", 0);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("invalid FactorSpec JSON: ") + e.what());
  }
  spec.validate();
  return spec;
}

json factor_spec_to_json(const FactorSpec& spec) {
  json j;
  j["n_mixture"] = spec.n_mixture;
  j["mixture_bounds"] = json::array();
  for (const auto& b : spec.mixture_bounds)
    j["mixture_bounds"].push_back(json::array({b.lo, b.hi}));
  j["process"] = json::array();
  for (const auto& pv : spec.process) {
    json pj;
    if (pv.has_levels())
      pj["levels"] = pv.levels;
    else
      pj["bounds"] = json::array({pv.bounds.lo, pv.bounds.hi});
    j["process"].push_back(pj);
  }
  j["n_noise"] = spec.n_noise;
  return j;
}

ModelFormula formula_from_json(const json& j) {
  ModelFormula f;
  f.linear_mixture = j.value("linear_mixture", true);
  f.blend = j.value("blend", false);
  f.mixture_process = j.value("mixture_process", false);
  f.blend_process = j.value("blend_process", false);
  f.mixture_noise = j.value("mixture_noise", false);
  f.blend_noise = j.value("blend_noise", false);
  f.mixture_process_noise = j.value("mixture_process_noise", false);
  f.blend_process_noise = j.value("blend_process_noise", false);
  return f;
}

json formula_to_json(const ModelFormula& f) {
  return json{{"linear_mixture", f.linear_mixture},
              {"blend", f.blend},
              {"mixture_process", f.mixture_process},
              {"blend_process", f.blend_process},
              {"mixture_noise", f.mixture_noise},
              {"blend_noise", f.blend_noise},
              {"mixture_process_noise", f.mixture_process_noise},
              {"blend_process_noise", f.blend_process_noise}};
}

json posterior_summary_to_json(const PosteriorSummary& summary) {
  json j;
  j["backend"] = backend_name(summary.backend);
  j["coefficients"] = json::array();
  for (std::size_t k = 0; k < summary.labels.size(); ++k) {
    const auto& c = summary.coefficients[k];
    j["coefficients"].push_back({{"term", summary.labels[k].name()},
                                 {"mean", c.mean},
                                 {"variance", c.variance},
                                 {"interval_low", c.interval_low},
                                 {"interval_high", c.interval_high},
                                 {"sn_probability", c.sn_probability}});
  }
  return j;
}

json selection_report_to_json(const SelectionReport& report) {
  json j;
  j["criterion"] = criterion_name(report.criterion);
  j["threshold"] = report.threshold;
  j["included"] = json::array();
  for (std::size_t k = 0; k < report.labels.size(); ++k)
    j["included"].push_back(
        {{"term", report.labels[k].name()}, {"included", bool(report.included[k])}});
  return j;
}

std::string study_report_to_csv(const StudyReport& report) {
  std::ostringstream os;
  os << "term";
  for (const auto& r : report.results) {
    os << "," << method_name(r.method);
    if (r.criterion != SelectionCriterion::LassoNonzero)
      os << " " << criterion_name(r.criterion);
  }
  os << "\n";
  for (std::size_t k = 0; k < report.labels.size(); ++k) {
    os << report.labels[k].name();
    for (const auto& r : report.results)
      os << "," << format_double(r.selection_frequency(static_cast<Eigen::Index>(k)));
    os << "\n";
  }
  os << "BAI";
  for (const auto& r : report.results) os << "," << format_double(r.bai);
  os << "\n";
  return os.str();
}

json study_report_to_json(const StudyReport& report) {
  json j;
  j["terms"] = json::array();
  for (std::size_t k = 0; k < report.labels.size(); ++k)
    j["terms"].push_back({{"term", report.labels[k].name()},
                          {"truly_nonzero", bool(report.truth_mask[k])}});
  j["results"] = json::array();
  for (const auto& r : report.results) {
    json rj;
    rj["method"] = method_name(r.method);
    rj["criterion"] = criterion_name(r.criterion);
    rj["selection_frequency"] = json::array();
    for (Eigen::Index k = 0; k < r.selection_frequency.size(); ++k)
      rj["selection_frequency"].push_back(r.selection_frequency(k));
    rj["confusion"] = {{"tp", r.confusion.tp},
                       {"fp", r.confusion.fp},
                       {"fn", r.confusion.fn},
                       {"tn", r.confusion.tn}};
    rj["bai"] = r.bai;
    rj["failures"] = r.failures;
    j["results"].push_back(rj);
  }
  j["failure_log"] = report.failure_log;
  return j;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open output file for writing: " + path);
  out << content;
  if (!out) throw IoError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace mixlasso
