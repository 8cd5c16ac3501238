#include "mrf/serial.hpp"

#include <cmath>
#include <fstream>

#include "mrf/errors.hpp"

namespace mrf {
namespace {

using nlohmann::json;

json emissions_to_json(const EmissionTable& e) {
  json j;
  j["scores"] = e.scores;
  j["background"] = e.background;
  return j;
}

EmissionTable emissions_from_json(const json& j) {
  EmissionTable e;
  const auto& scores = j.at("scores");
  const auto& background = j.at("background");
  if (scores.size() != kAlphabetSize || background.size() != kAlphabetSize) {
    throw ParseError("emission tables must carry 21 entries");
  }
  for (int i = 0; i < kAlphabetSize; ++i) {
    e.scores[static_cast<std::size_t>(i)] = scores.at(static_cast<std::size_t>(i)).get<double>();
    e.background[static_cast<std::size_t>(i)] =
        background.at(static_cast<std::size_t>(i)).get<double>();
  }
  return e;
}

json grid_to_json(const PairScoreGrid& g) {
  json rows = json::array();
  for (int r = 0; r < kAlphabetSize; ++r) {
    json row = json::array();
    for (int c = 0; c < kAlphabetSize; ++c) {
      row.push_back(g.at(AminoAcid::from_index(r), AminoAcid::from_index(c)));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

PairScoreGrid grid_from_json(const json& j) {
  if (j.size() != kAlphabetSize) throw ParseError("pair grid must have 21 rows");
  PairScoreGrid g;
  for (int r = 0; r < kAlphabetSize; ++r) {
    const auto& row = j.at(static_cast<std::size_t>(r));
    if (row.size() != kAlphabetSize) throw ParseError("pair grid row must have 21 cells");
    for (int c = 0; c < kAlphabetSize; ++c) {
      const double v = row.at(static_cast<std::size_t>(c)).get<double>();
      if (!std::isfinite(v) || v <= 0.0 || v > kSentinelCost) {
        throw ParseError("pair grid cell outside (0, 9.21]");
      }
      if ((r == kStandardResidues || c == kStandardResidues) && v != kSentinelCost) {
        throw ParseError("pair grid X cells must equal the 9.21 sentinel");
      }
      g.set(AminoAcid::from_index(r), AminoAcid::from_index(c), v);
    }
  }
  return g;
}

std::string exposure_string(const std::vector<Exposure>& exposure) {
  std::string s;
  s.reserve(exposure.size());
  for (Exposure e : exposure) s.push_back(exposure_code(e));
  return s;
}

std::vector<Exposure> exposure_from_string(const std::string& s) {
  std::vector<Exposure> out;
  out.reserve(s.size());
  for (char c : s) out.push_back(exposure_from_code(c));
  return out;
}

}  // namespace

json template_document_to_json(const TemplateDocument& doc) {
  json j;
  j["format"] = "mrf-template";
  j["version"] = kTemplateFormatVersion;
  j["name"] = doc.tmpl.name;
  j["max_gap"] = doc.tmpl.max_gap;

  json nodes = json::array();
  for (const TemplateNode& n : doc.tmpl.nodes) {
    json node;
    node["index"] = n.index;
    node["kind"] = n.kind == NodeKind::StrandMatch ? "strand-match" : "regular";
    node["match"] = emissions_to_json(n.match_emissions);
    node["insert"] = emissions_to_json(n.regular.insert_emissions);
    const NodeTransitions& tr = n.regular.transitions;
    node["transitions"] = json{{"mm", tr.mm}, {"mi", tr.mi}, {"md", tr.md}, {"im", tr.im},
                               {"ii", tr.ii}, {"dm", tr.dm}, {"dd", tr.dd}};
    nodes.push_back(std::move(node));
  }
  j["nodes"] = std::move(nodes);

  json strands = json::array();
  for (const BetaStrand& s : doc.tmpl.strands) {
    strands.push_back(json{{"id", s.id}, {"start_node", s.start_node}, {"length", s.length}});
  }
  j["strands"] = std::move(strands);

  json pairs = json::array();
  for (const StrandPair& p : doc.tmpl.pairs) {
    pairs.push_back(json{
        {"first", p.first},
        {"second", p.second},
        {"orientation", p.orientation == Orientation::Parallel ? "parallel" : "antiparallel"},
        {"exposure", exposure_string(p.exposure)}});
  }
  j["pairs"] = std::move(pairs);

  j["pair_tables"] =
      json{{"buried", grid_to_json(doc.tables.buried)}, {"exposed", grid_to_json(doc.tables.exposed)}};

  if (doc.calibration) {
    j["calibration"] = json{{"mu", doc.calibration->params.mu},
                            {"beta", doc.calibration->params.beta},
                            {"samples", doc.calibration->samples},
                            {"low_sample_warning", doc.calibration->low_sample_warning},
                            {"search", doc.calibration->search_fingerprint}};
  }
  j["provenance"] = doc.provenance;
  return j;
}

TemplateDocument template_document_from_json(const json& j) {
  if (!j.is_object() || j.value("format", "") != "mrf-template") {
    throw ParseError("not a template document (missing format tag)");
  }
  const int version = j.value("version", -1);
  if (version != kTemplateFormatVersion) {
    throw ParseError("unsupported template format version " + std::to_string(version) +
                     " (this build reads version " + std::to_string(kTemplateFormatVersion) + ")");
  }

  TemplateDocument doc;
  doc.tmpl.name = j.value("name", "");
  doc.tmpl.max_gap = j.at("max_gap").get<int>();

  for (const json& node : j.at("nodes")) {
    TemplateNode n;
    n.index = node.at("index").get<int>();
    const std::string kind = node.at("kind").get<std::string>();
    if (kind == "strand-match") {
      n.kind = NodeKind::StrandMatch;
    } else if (kind == "regular") {
      n.kind = NodeKind::Regular;
    } else {
      throw ParseError("unknown node kind '" + kind + "'");
    }
    n.match_emissions = emissions_from_json(node.at("match"));
    n.regular.insert_emissions = emissions_from_json(node.at("insert"));
    const json& tr = node.at("transitions");
    n.regular.transitions.mm = tr.at("mm").get<double>();
    n.regular.transitions.mi = tr.at("mi").get<double>();
    n.regular.transitions.md = tr.at("md").get<double>();
    n.regular.transitions.im = tr.at("im").get<double>();
    n.regular.transitions.ii = tr.at("ii").get<double>();
    n.regular.transitions.dm = tr.at("dm").get<double>();
    n.regular.transitions.dd = tr.at("dd").get<double>();
    doc.tmpl.nodes.push_back(std::move(n));
  }

  for (const json& strand : j.at("strands")) {
    BetaStrand s;
    s.id = strand.at("id").get<int>();
    s.start_node = strand.at("start_node").get<int>();
    s.length = strand.at("length").get<int>();
    doc.tmpl.strands.push_back(s);
  }

  for (const json& pair : j.at("pairs")) {
    StrandPair p;
    p.first = pair.at("first").get<int>();
    p.second = pair.at("second").get<int>();
    const std::string orient = pair.at("orientation").get<std::string>();
    if (orient == "parallel") {
      p.orientation = Orientation::Parallel;
    } else if (orient == "antiparallel") {
      p.orientation = Orientation::Antiparallel;
    } else {
      throw ParseError("unknown orientation '" + orient + "'");
    }
    p.exposure = exposure_from_string(pair.at("exposure").get<std::string>());
    doc.tmpl.pairs.push_back(std::move(p));
  }

  const json& tables = j.at("pair_tables");
  doc.tables.buried = grid_from_json(tables.at("buried"));
  doc.tables.exposed = grid_from_json(tables.at("exposed"));

  if (j.contains("calibration")) {
    const json& cal = j.at("calibration");
    CalibrationInfo info;
    info.params.mu = cal.at("mu").get<double>();
    info.params.beta = cal.at("beta").get<double>();
    info.samples = cal.at("samples").get<int>();
    info.low_sample_warning = cal.value("low_sample_warning", false);
    info.search_fingerprint = cal.at("search").get<std::string>();
    doc.calibration = std::move(info);
  }
  if (j.contains("provenance")) doc.provenance = j.at("provenance");

  validate_or_throw(doc.tmpl);
  return doc;
}

TemplateDocument load_template_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open template: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  try {
    return template_document_from_json(j);
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void save_template_document(const std::string& path, const TemplateDocument& doc) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write template: " + path);
  out << template_document_to_json(doc).dump(2) << '\n';
  if (!out) throw IoError("short write to " + path);
}

}  // namespace mrf
