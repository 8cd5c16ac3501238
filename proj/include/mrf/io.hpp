#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "mrf/alignment.hpp"
#include "mrf/amino.hpp"
#include "mrf/stats.hpp"

namespace mrf {

// Plain FASTA: ids are the first whitespace-delimited token after '>'.
// Unknown residue codes map to X.
std::vector<QuerySequence> read_fasta(const std::string& path);

// Aligned FASTA: '-' and '.' are gaps, everything else a residue code.
// All rows must share one width.
MultipleAlignment read_alignment(const std::string& path);

// Strand annotations, JSON:
//   {"annotations": [{"row": "<row name>", "start": 3, "end": 7,
//                     "partner_start": 20, "partner_end": 24,
//                     "orientation": "antiparallel",
//                     "exposure": "bbeeb"            // optional
//                    }, ...]}
// Column indices are 0-based and inclusive; rows are named.
StrandAnnotationSet read_annotations(const std::string& path, const MultipleAlignment& rows);

// One scored query in a hits file.
struct HitRow {
  std::string query_id;
  bool feasible = true;
  bool capped = false;           // oracle refused: placement space above cap
  double raw_score = 0.0;
  bool has_p_value = false;
  double p_value = 1.0;
  std::vector<int> placement;
  std::uint64_t generations = 0; // candidates scored, for oracle rows
  double seconds = 0.0;
};

struct HitsWriterOptions {
  // Write every seconds column as 0.000 so reruns compare byte for byte.
  bool zero_timing = false;
  // Append an `exact` column (always "true"): set by the exhaustive scorer.
  bool exact_column = false;
  // Free-form provenance written as a leading "# ..." line when non-empty.
  std::string comment;
};

// Tab-separated hits writer.  Rows are written (and flushed) one at a time
// so partial output is usable if a long run is interrupted.
//
// Columns: query_id, raw_score, p_value, placement, generations, seconds,
// status (and optionally exact).  Missing values (no score, no calibration)
// are NA; placements are comma-joined starts or "-" when empty.  Status is
// OK, INFEASIBLE, or CAPPED.
class HitsWriter {
 public:
  // Opens `path`, writes the comment line (if any) and the header.
  HitsWriter(const std::string& path, const HitsWriterOptions& options);

  HitsWriter(const HitsWriter&) = delete;
  HitsWriter& operator=(const HitsWriter&) = delete;

  void write(const HitRow& row);

 private:
  std::string path_;
  std::ofstream out_;
  HitsWriterOptions options_;
};

// Reads query_id + raw_score back out of a hits file, skipping comment lines
// and rows without a score (INFEASIBLE/CAPPED).
struct ScoredId {
  std::string id;
  double raw = 0.0;
};
std::vector<ScoredId> read_hits_scores(const std::string& path);

// Reads a hits-style TSV that also carries a `label` column (1/0, pos/neg,
// true/false, +/-) into labeled scores for ROC evaluation.  Rows without a
// score are skipped.
std::vector<LabeledScore> read_labeled_hits(const std::string& path);

// ROC points as fpr,tpr,threshold CSV, with the AUC in a trailing comment.
void write_roc_csv(const std::string& path, const RocResult& roc);

}  // namespace mrf
