#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "mrf/alignment.hpp"
#include "mrf/model.hpp"
#include "mrf/pair_tables.hpp"

namespace mrf {

struct TrainConfig {
  // A column becomes a match column when at least this fraction of rows have
  // a residue in it.
  double symfrac = 0.2;
  // A column joins a consensus strand, and a strand pairing becomes part of
  // the template, when MORE than this fraction of rows annotate it.
  double consensus_fraction = 0.5;
  // Laplace-style pseudocount mass added to emission and transition counts.
  double pseudocount = 1.0;
  // Added to the longest observed inter-strand residue run to form max_gap.
  int max_gap_slack = 20;
  // Background residue frequencies the emission odds are taken against.
  std::array<double, kAlphabetSize> background = background_frequencies();
};

// Per-column match flag: a column is a match (consensus) column when its
// non-gap fraction is at least symfrac.
std::vector<bool> mark_consensus_columns(const MultipleAlignment& alignment, double symfrac);

// One consensus strand, as a span of alignment columns (0-based inclusive).
struct ConsensusStrand {
  int start_col = 0;
  int end_col = 0;

  int length() const { return end_col - start_col + 1; }
};

// A consensus pairing between two consensus strands (ordinal indices into
// ConsensusTopology::strands, first < second).
struct ConsensusPair {
  int first = 0;
  int second = 0;
  Orientation orientation = Orientation::Antiparallel;
};

struct ConsensusTopology {
  // The training alignment after gap scrubbing: inside consensus-strand
  // columns, per-row gaps are squeezed out by shifting the row left (the row
  // is padded with gaps at its end), so every surviving row crosses each
  // consensus strand contiguously or not at all.
  MultipleAlignment alignment;
  std::vector<bool> beta_column;
  std::vector<ConsensusStrand> strands;
  std::vector<ConsensusPair> pairs;
};

// Derives consensus strands and pairings from per-row annotations, then
// scrubs gaps out of the consensus columns.  Columns annotated by more than
// config.consensus_fraction of rows become strand columns; maximal runs of
// those form the consensus strands.  Pairings and orientations are decided
// by the same majority rule.  Pairs joining strands of unequal length are
// dropped (the pairwise tables need aligned positions).
ConsensusTopology consensus_strands(const MultipleAlignment& alignment,
                                    const StrandAnnotationSet& annotations,
                                    const TrainConfig& config);

// Picks buried/exposed per pairing position by total pairwise cost over the
// training rows: whichever table explains the observed residue pairs more
// cheaply wins (ties go to buried).
std::vector<Exposure> choose_exposure(const MultipleAlignment& alignment,
                                      const ConsensusStrand& first,
                                      const ConsensusStrand& second,
                                      Orientation orientation,
                                      const PairScoreTables& tables);

// Estimates the full template from training data: match/insert emissions and
// Plan7 transitions with pseudocounts, strand nodes from the consensus
// topology, per-pair exposure, and max_gap from the longest observed
// inter-strand residue run plus slack.
MrfTemplate estimate_template(const MultipleAlignment& alignment,
                              const StrandAnnotationSet& annotations,
                              const TrainConfig& config, const PairScoreTables& tables);

struct SimulatedEvolutionResult {
  MultipleAlignment alignment;        // originals first, then artificial rows
  StrandAnnotationSet annotations;    // originals plus copies for new rows
  std::uint64_t attempted = 0;        // Bernoulli successes (mutations tried)
  std::uint64_t paired_positions = 0; // positions eligible for mutation
};

// Augments training data with `count` artificial rows per original.  Each
// hydrogen-bonded position mutates independently with probability `rate`;
// a mutated later-strand residue is resampled from the pairwise model
// conditioned on its earlier partner.  Deterministic in `seed`.
SimulatedEvolutionResult simulated_evolution(const MultipleAlignment& alignment,
                                             const StrandAnnotationSet& annotations,
                                             const TrainConfig& config,
                                             const PairScoreTables& tables,
                                             double rate, int count, std::uint64_t seed);

}  // namespace mrf
