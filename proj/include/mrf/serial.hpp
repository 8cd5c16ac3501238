#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "mrf/model.hpp"
#include "mrf/stats.hpp"

namespace mrf {

// EVD calibration embedded in a template document, together with the search
// configuration it was produced under.  P-values are only meaningful when a
// later search runs with the same fingerprint.
struct CalibrationInfo {
  EvdParams params;
  std::string search_fingerprint;
  int samples = 0;
  bool low_sample_warning = false;
};

// Everything needed to score queries, in one versioned file: the template,
// the pair-score tables it was trained against, optional calibration, and a
// free-form provenance record (input files, configuration, seed).
struct TemplateDocument {
  MrfTemplate tmpl;
  PairScoreTables tables;
  std::optional<CalibrationInfo> calibration;
  nlohmann::json provenance = nlohmann::json::object();
};

inline constexpr int kTemplateFormatVersion = 1;

nlohmann::json template_document_to_json(const TemplateDocument& doc);
TemplateDocument template_document_from_json(const nlohmann::json& j);

// File wrappers: load validates the document (format version, template
// invariants, table ranges) and throws ParseError/ValidationError.
TemplateDocument load_template_document(const std::string& path);
void save_template_document(const std::string& path, const TemplateDocument& doc);

}  // namespace mrf
