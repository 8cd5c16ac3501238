#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mrf/search.hpp"

namespace mrf {

// Gumbel (extreme-value) location/scale for calibrated raw scores.  Raw
// scores are costs (lower is better); the fit negates them first so the
// distribution lives on the conventional higher-is-better axis.
struct EvdParams {
  double mu = 0.0;
  double beta = 1.0;
};

struct EvdFit {
  EvdParams params;
  int samples = 0;
  bool low_sample_warning = false;  // fewer than 30 scores went in
};

// Maximum-likelihood Gumbel fit to raw search scores.  Requires >= 2 samples
// with at least two distinct values; throws ValidationError otherwise.
EvdFit fit_evd(const std::vector<double>& raw_scores);

// P(random score at least this good) under the fitted EVD; always in (0, 1).
double evd_p_value(const EvdParams& params, double raw_score);

struct LabeledScore {
  std::string id;
  double raw = 0.0;
  bool positive = false;
};

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;  // raw-score cutoff that yields this point
};

struct RocResult {
  std::vector<RocPoint> points;
  double auc = 0.5;
};

// ROC over raw scores where LOWER means better.  Tied scores advance the
// curve together, which is exactly the midrank AUC: a degenerate input where
// every score ties yields AUC 0.5.  Needs at least one positive and one
// negative label.
RocResult roc_auc(const std::vector<LabeledScore>& scores);

struct CalibrationRun {
  EvdFit fit;
  std::string fingerprint;      // search configuration the fit belongs to
  std::vector<double> scores;   // raw decoy scores, by decoy index
};

// Searches every decoy under the given configuration (seed derived per
// decoy index, so the result is deterministic regardless of worker count)
// and fits the EVD to the raw scores.  The fit carries a warning below 30
// decoys; p-values from it are only valid for searches run under the same
// fingerprint.
CalibrationRun calibrate(const MrfTemplate& t, const PairScoreTables& tables,
                         const std::vector<QuerySequence>& decoys, const SearchConfig& config,
                         const TerminationPolicy& policy, std::uint64_t seed,
                         int workers = 1);

// Random decoy sequences of the given length, residues drawn i.i.d. from the
// background distribution; ids are "decoy_0", "decoy_1", ...
std::vector<QuerySequence> sample_decoys(int count, int length, std::uint64_t seed);

}  // namespace mrf
