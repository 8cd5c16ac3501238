#include "mrf/io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include <json.hpp>

#include "mrf/errors.hpp"
#include "mrf/pair_tables.hpp"

namespace mrf {
namespace {

struct FastaRecord {
  std::string id;
  std::string body;
};

std::vector<FastaRecord> read_fasta_records(const std::string& path, bool require_records = true) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open FASTA: " + path);

  std::vector<FastaRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '>') {
      std::string id = line.substr(1);
      const std::size_t space = id.find_first_of(" \t");
      if (space != std::string::npos) id.resize(space);
      if (id.empty()) throw ParseError(path + ": record with empty id");
      records.push_back(FastaRecord{std::move(id), ""});
    } else {
      if (records.empty()) throw ParseError(path + ": sequence data before first '>'");
      for (char c : line) {
        if (!std::isspace(static_cast<unsigned char>(c))) records.back().body.push_back(c);
      }
    }
  }
  if (require_records && records.empty()) throw ParseError(path + ": no FASTA records");
  return records;
}

}  // namespace

std::vector<QuerySequence> read_fasta(const std::string& path) {
  std::vector<QuerySequence> out;
  for (FastaRecord& rec : read_fasta_records(path)) {
    if (rec.body.empty()) throw ParseError(path + ": record '" + rec.id + "' is empty");
    out.push_back(make_sequence(std::move(rec.id), rec.body));
  }
  return out;
}

MultipleAlignment read_alignment(const std::string& path) {
  MultipleAlignment alignment;
  std::vector<FastaRecord> records = read_fasta_records(path, /*require_records=*/false);
  if (records.empty()) throw ParseError(path + ": empty alignment");
  for (FastaRecord& rec : records) {
    AlignmentRow row;
    row.name = std::move(rec.id);
    row.cells.reserve(rec.body.size());
    for (char c : rec.body) {
      if (c == '-' || c == '.') {
        row.cells.push_back('-');
      } else {
        row.cells.push_back(AminoAcid::from_char(c).code());
      }
    }
    alignment.rows.push_back(std::move(row));
  }
  const int width = alignment.width();
  for (const AlignmentRow& row : alignment.rows) {
    if (static_cast<int>(row.cells.size()) != width) {
      throw ParseError(path + ": row '" + row.name + "' has width " +
                       std::to_string(row.cells.size()) + ", expected " +
                       std::to_string(width));
    }
  }
  return alignment;
}

StrandAnnotationSet read_annotations(const std::string& path, const MultipleAlignment& rows) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open annotations: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }

  std::map<std::string, int> row_index;
  for (int i = 0; i < rows.row_count(); ++i) {
    row_index.emplace(rows.rows[static_cast<std::size_t>(i)].name, i);
  }

  StrandAnnotationSet out;
  try {
    for (const nlohmann::json& a : j.at("annotations")) {
      StrandAnnotation ann;
      const std::string row_name = a.at("row").get<std::string>();
      const auto found = row_index.find(row_name);
      if (found == row_index.end()) {
        throw ParseError(path + ": annotation names unknown row '" + row_name + "'");
      }
      ann.row = found->second;
      ann.start_col = a.at("start").get<int>();
      ann.end_col = a.at("end").get<int>();
      ann.partner_start = a.at("partner_start").get<int>();
      ann.partner_end = a.at("partner_end").get<int>();
      const std::string orient = a.at("orientation").get<std::string>();
      if (orient == "parallel") {
        ann.orientation = Orientation::Parallel;
      } else if (orient == "antiparallel") {
        ann.orientation = Orientation::Antiparallel;
      } else {
        throw ParseError(path + ": unknown orientation '" + orient + "'");
      }
      if (a.contains("exposure")) {
        for (char c : a.at("exposure").get<std::string>()) {
          ann.exposure_hint.push_back(exposure_from_code(c));
        }
      }
      out.annotations.push_back(std::move(ann));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return out;
}

HitsWriter::HitsWriter(const std::string& path, const HitsWriterOptions& options)
    : path_(path), out_(path), options_(options) {
  if (!out_) throw IoError("cannot write hits: " + path);
  if (!options_.comment.empty()) out_ << "# " << options_.comment << '\n';
  out_ << "query_id\traw_score\tp_value\tplacement\tgenerations\tseconds\tstatus";
  if (options_.exact_column) out_ << "\texact";
  out_ << '\n';
  out_.flush();
}

void HitsWriter::write(const HitRow& row) {
  char buffer[64];
  out_ << row.query_id << '\t';
  if (row.feasible && !row.capped) {
    std::snprintf(buffer, sizeof buffer, "%.4f", row.raw_score);
    out_ << buffer << '\t';
    if (row.has_p_value) {
      std::snprintf(buffer, sizeof buffer, "%.6g", row.p_value);
      out_ << buffer << '\t';
    } else {
      out_ << "NA\t";
    }
    if (row.placement.empty()) {
      out_ << '-';
    } else {
      for (std::size_t i = 0; i < row.placement.size(); ++i) {
        if (i > 0) out_ << ',';
        out_ << row.placement[i];
      }
    }
    out_ << '\t' << row.generations << '\t';
  } else {
    out_ << "NA\tNA\t-\t" << row.generations << '\t';
  }
  std::snprintf(buffer, sizeof buffer, "%.3f", options_.zero_timing ? 0.0 : row.seconds);
  out_ << buffer << '\t';
  out_ << (row.capped ? "CAPPED" : (row.feasible ? "OK" : "INFEASIBLE"));
  if (options_.exact_column) out_ << "\ttrue";
  out_ << '\n';
  out_.flush();
  if (!out_) throw IoError("short write to " + path_);
}

namespace {

// Splits one TSV line; trailing '\r' already stripped by the caller.
std::vector<std::string> split_tsv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, '\t')) fields.push_back(field);
  if (!line.empty() && line.back() == '\t') fields.push_back("");
  return fields;
}

double parse_finite(const std::string& text, const std::string& path, const char* what) {
  try {
    std::size_t used = 0;
    const double value = std::stod(text, &used);
    if (used != text.size() || !std::isfinite(value)) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw ParseError(path + ": bad " + what + " '" + text + "'");
  }
}

}  // namespace

std::vector<ScoredId> read_hits_scores(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open hits: " + path);
  std::vector<ScoredId> out;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      if (line.rfind("query_id\t", 0) != 0) {
        throw ParseError(path + ": missing hits header");
      }
      continue;
    }
    const std::vector<std::string> fields = split_tsv(line);
    if (fields.size() < 2) throw ParseError(path + ": malformed hits row '" + line + "'");
    if (fields[1] == "NA") continue;  // INFEASIBLE / CAPPED rows carry no score
    out.push_back(ScoredId{fields[0], parse_finite(fields[1], path, "raw score")});
  }
  if (out.empty()) throw ParseError(path + ": no scored rows");
  return out;
}

std::vector<LabeledScore> read_labeled_hits(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open hits: " + path);

  std::vector<LabeledScore> out;
  std::string line;
  bool seen_header = false;
  std::size_t id_col = 0;
  std::size_t raw_col = 0;
  std::size_t label_col = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const std::vector<std::string> fields = split_tsv(line);
    if (!seen_header) {
      seen_header = true;
      bool have_id = false;
      bool have_raw = false;
      bool have_label = false;
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (fields[i] == "query_id") { id_col = i; have_id = true; }
        if (fields[i] == "raw_score") { raw_col = i; have_raw = true; }
        if (fields[i] == "label") { label_col = i; have_label = true; }
      }
      if (!have_id || !have_raw) {
        throw ParseError(path + ": header must name query_id and raw_score columns");
      }
      if (!have_label) throw ParseError(path + ": no label column");
      width = fields.size();
      continue;
    }
    if (fields.size() != width) {
      throw ParseError(path + ": row has " + std::to_string(fields.size()) +
                       " fields, header has " + std::to_string(width));
    }
    if (fields[raw_col] == "NA") continue;

    LabeledScore score;
    score.id = fields[id_col];
    score.raw = parse_finite(fields[raw_col], path, "raw score");
    const std::string& label = fields[label_col];
    if (label == "1" || label == "pos" || label == "positive" || label == "true" ||
        label == "+") {
      score.positive = true;
    } else if (label == "0" || label == "neg" || label == "negative" || label == "false" ||
               label == "-") {
      score.positive = false;
    } else {
      throw ParseError(path + ": bad label '" + label + "' (want 1/0, pos/neg, +/-)");
    }
    out.push_back(std::move(score));
  }
  if (!seen_header) throw ParseError(path + ": empty hits file");
  if (out.empty()) throw ParseError(path + ": no scored rows");
  return out;
}

void write_roc_csv(const std::string& path, const RocResult& roc) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write ROC: " + path);
  out << "fpr,tpr,threshold\n";
  char buffer[96];
  for (const RocPoint& p : roc.points) {
    std::snprintf(buffer, sizeof buffer, "%.6f,%.6f,%.6g\n", p.fpr, p.tpr, p.threshold);
    out << buffer;
  }
  std::snprintf(buffer, sizeof buffer, "# auc = %.6f\n", roc.auc);
  out << buffer;
  if (!out) throw IoError("short write to " + path);
}

}  // namespace mrf
