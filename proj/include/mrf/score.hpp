#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "mrf/amino.hpp"
#include "mrf/model.hpp"
#include "mrf/pair_tables.hpp"

namespace mrf {

// Residues consumed by a probability-0 event (a non-empty residue span facing
// an empty interior node span) are charged double the sentinel each, keeping
// every score finite while making such placements strictly worse than any
// achievable alignment of the same residues.
inline constexpr double kImpossibleCostPerResidue = 2.0 * kSentinelCost;

// Start residue (0-based) of each strand, in strand order.
struct Placement {
  std::vector<int> starts;

  friend bool operator==(const Placement& a, const Placement& b) {
    return a.starts == b.starts;
  }
  friend bool operator<(const Placement& a, const Placement& b) {
    return a.starts < b.starts;  // lexicographic; used for tie-breaking
  }
};

// One step of an alignment path.  `state` is:
//   'M','I','D'  -- Plan7 states at `node`
//   'n','c'      -- residues consumed by the N-/C-terminal flank loop
//   'g'          -- residue consumed by a probability-0 gap fill
// Flank and gap steps carry node = 0.
struct PathStep {
  int node = 0;
  char state = 'M';

  friend bool operator==(const PathStep& a, const PathStep& b) {
    return a.node == b.node && a.state == b.state;
  }
};

struct StatePath {
  std::vector<PathStep> steps;
};

// A Viterbi subproblem: align residues [first_residue, end_residue) of the
// query to Regular nodes [first_node, last_node] (1-based, inclusive;
// first_node > last_node encodes an empty node span).  A true flank flag
// means that boundary absorbs any number of residues at zero cost (the
// N-/C-terminal loop); a false flag means the boundary is pinned to an
// adjacent strand and consumes nothing.
struct SegmentSpec {
  int first_node = 1;
  int last_node = 0;
  int first_residue = 0;
  int end_residue = 0;
  bool leading_flank = false;
  bool trailing_flank = false;
};

struct SegmentResult {
  double score = 0.0;
  StatePath path;
};

// Minimum-cost alignment of the segment, with its state path.  Ties are
// broken by preferring match over delete over insert at every choice point.
// The path re-scores to exactly the returned value.
SegmentResult viterbi_segment(const MrfTemplate& t, const QuerySequence& q,
                              const SegmentSpec& seg);

// Score-only variant (same recurrence, two-row storage).
double viterbi_segment_score(const MrfTemplate& t, const QuerySequence& q,
                             const SegmentSpec& seg);

// Full decomposed score of one placement.
struct ScoreBreakdown {
  double total = 0.0;
  std::vector<double> segment_scores;  // k+1 entries, in sequence order
  std::vector<double> strand_scores;   // k entries, match emissions only
  std::vector<double> pair_scores;     // one per template pair
};

// True iff `p` places every strand in order, within bounds, without overlap,
// and with every inter-strand residue gap <= t.max_gap.
bool legal(const MrfTemplate& t, int query_length, const Placement& p);

// Throws ValidationError naming the violated constraint when !legal.
ScoreBreakdown placement_score(const MrfTemplate& t, const PairScoreTables& tables,
                               const QuerySequence& q, const Placement& p);

// Number of placements that satisfy ordering/overlap/bounds.  By default the
// max-gap constraint is ignored (the combinatorial figure for "how large is
// this search space"); pass include_max_gap to count exactly the legal set.
// Saturates at UINT64_MAX.
std::uint64_t count_placements(const MrfTemplate& t, int query_length,
                               bool include_max_gap = false);

// Calls fn for every legal placement, in ascending lexicographic order.
// Returns the number of placements visited.
std::uint64_t enumerate_legal_placements(const MrfTemplate& t, int query_length,
                                         const std::function<void(const Placement&)>& fn);

struct ExhaustiveResult {
  Placement placement;
  ScoreBreakdown breakdown;
  std::uint64_t candidates = 0;  // legal placements actually scored
};

// Scores every legal placement and returns the best (ties resolved toward
// the lexicographically smallest placement).  Refuses with ValidationError
// when count_placements(t, N) exceeds `cap`.
ExhaustiveResult exhaustive_optimum(const MrfTemplate& t, const PairScoreTables& tables,
                                    const QuerySequence& q, std::uint64_t cap = 10'000'000,
                                    int workers = 1);

}  // namespace mrf
