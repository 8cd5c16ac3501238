#pragma once

#include <string>
#include <vector>

#include "mrf/amino.hpp"
#include "mrf/model.hpp"

namespace mrf {

// One row of a multiple alignment: canonical uppercase residue codes and '-'
// for gaps.  All rows in an alignment share the same width.
struct AlignmentRow {
  std::string name;
  std::string cells;
};

struct MultipleAlignment {
  std::vector<AlignmentRow> rows;

  int width() const { return rows.empty() ? 0 : static_cast<int>(rows[0].cells.size()); }
  int row_count() const { return static_cast<int>(rows.size()); }
  bool is_gap(int row, int col) const {
    return rows[static_cast<std::size_t>(row)].cells[static_cast<std::size_t>(col)] == '-';
  }
  AminoAcid residue(int row, int col) const {
    return AminoAcid::from_char(
        rows[static_cast<std::size_t>(row)].cells[static_cast<std::size_t>(col)]);
  }
};

// A strand annotation on one training row: this row pairs alignment columns
// [start_col, end_col] with columns [partner_start, partner_end] (both
// 0-based inclusive).  `exposure_hint`, when non-empty, gives per-position
// exposure for the first span.
struct StrandAnnotation {
  int row = 0;
  int start_col = 0;
  int end_col = 0;
  int partner_start = 0;
  int partner_end = 0;
  Orientation orientation = Orientation::Antiparallel;
  std::vector<Exposure> exposure_hint;
};

struct StrandAnnotationSet {
  std::vector<StrandAnnotation> annotations;
};

}  // namespace mrf
