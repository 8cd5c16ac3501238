#include "mrf/pair_tables.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "mrf/errors.hpp"

namespace mrf {
namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

[[noreturn]] void fail(const std::string& origin, const std::string& what) {
  throw ParseError(origin + ": " + what);
}

}  // namespace

char exposure_code(Exposure e) { return e == Exposure::Buried ? 'b' : 'e'; }

Exposure exposure_from_code(char c) {
  if (c == 'b') return Exposure::Buried;
  if (c == 'e') return Exposure::Exposed;
  throw ParseError(std::string("unknown exposure code '") + c + "'");
}

PairScoreGrid::PairScoreGrid() {
  for (auto& row : cells_) row.fill(kSentinelCost);
}

PairScoreGrid parse_pair_grid(std::istream& in, const std::string& origin) {
  std::string line;
  if (!std::getline(in, line)) fail(origin, "empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const auto header = split_tabs(line);
  if (header.size() != kAlphabetSize + 1) {
    // Short headers usually mean a residue column was dropped; say which one.
    for (int i = 0; i < kAlphabetSize; ++i) {
      const std::string code(1, kResidueCodes[i]);
      bool found = false;
      for (std::size_t f = 1; f < header.size(); ++f) {
        if (header[f] == code) {
          found = true;
          break;
        }
      }
      if (!found) fail(origin, "header is missing residue column '" + code + "'");
    }
    fail(origin, "header must have 22 fields, got " + std::to_string(header.size()));
  }
  for (int i = 0; i < kAlphabetSize; ++i) {
    if (header[static_cast<std::size_t>(i) + 1] != std::string(1, kResidueCodes[i])) {
      fail(origin, "header column " + std::to_string(i + 1) + " expected '" +
                       std::string(1, kResidueCodes[i]) + "', got '" +
                       header[static_cast<std::size_t>(i) + 1] + "'");
    }
  }

  PairScoreGrid grid;
  for (int r = 0; r < kAlphabetSize; ++r) {
    if (!std::getline(in, line)) {
      fail(origin, "missing data row for residue '" + std::string(1, kResidueCodes[r]) + "'");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto fields = split_tabs(line);
    if (fields.size() != kAlphabetSize + 1) {
      fail(origin, "row " + std::to_string(r + 1) + " must have 22 fields, got " +
                       std::to_string(fields.size()));
    }
    if (fields[0] != std::string(1, kResidueCodes[r])) {
      fail(origin, "row " + std::to_string(r + 1) + " labeled '" + fields[0] +
                       "', expected '" + std::string(1, kResidueCodes[r]) + "'");
    }
    for (int c = 0; c < kAlphabetSize; ++c) {
      const std::string& cell = fields[static_cast<std::size_t>(c) + 1];
      double value = 0.0;
      try {
        std::size_t used = 0;
        value = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        fail(origin, "row " + std::string(1, kResidueCodes[r]) + " column " +
                         std::string(1, kResidueCodes[c]) + ": bad number '" + cell + "'");
      }
      if (!std::isfinite(value) || value <= 0.0 || value > kSentinelCost) {
        fail(origin, "row " + std::string(1, kResidueCodes[r]) + " column " +
                         std::string(1, kResidueCodes[c]) + ": value " + cell +
                         " outside (0, 9.21]");
      }
      const bool involves_x = r == kStandardResidues || c == kStandardResidues;
      if (involves_x && value != kSentinelCost) {
        fail(origin, "X row/column cells must equal 9.21, got " + cell);
      }
      grid.set(AminoAcid::from_index(r), AminoAcid::from_index(c), value);
    }
  }
  return grid;
}

PairScoreGrid load_pair_grid(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open pair-score table: " + path);
  return parse_pair_grid(in, path);
}

PairScoreTables load_pair_tables(const std::string& buried_path,
                                 const std::string& exposed_path) {
  PairScoreTables tables;
  tables.buried = load_pair_grid(buried_path);
  tables.exposed = load_pair_grid(exposed_path);
  return tables;
}

void write_pair_grid(std::ostream& out, const PairScoreGrid& grid) {
  for (int i = 0; i < kAlphabetSize; ++i) out << '\t' << kResidueCodes[i];
  out << '\n';
  out << std::fixed << std::setprecision(2);
  for (int r = 0; r < kAlphabetSize; ++r) {
    out << kResidueCodes[r];
    for (int c = 0; c < kAlphabetSize; ++c) {
      out << '\t' << grid.at(AminoAcid::from_index(r), AminoAcid::from_index(c));
    }
    out << '\n';
  }
  out.unsetf(std::ios_base::floatfield);
}

}  // namespace mrf
