#pragma once

#include <array>
#include <string>
#include <vector>

#include "mrf/amino.hpp"
#include "mrf/pair_tables.hpp"

namespace mrf {

// Match/insert emission scores for one node.  Scores are -log(p/q) against
// the stored background q; X is pinned to the sentinel because it never has a
// meaningful estimate.
struct EmissionTable {
  std::array<double, kAlphabetSize> scores{};
  std::array<double, kAlphabetSize> background = background_frequencies();

  double score(AminoAcid a) const { return scores[static_cast<std::size_t>(a.index())]; }
};

// The seven Plan7 transition costs out of one node, already in -log space.
// There is no insert<->delete edge by construction.
struct NodeTransitions {
  double mm = 0.0;
  double mi = 0.0;
  double md = 0.0;
  double im = 0.0;
  double ii = 0.0;
  double dm = 0.0;
  double dd = 0.0;
};

enum class NodeKind : std::uint8_t { Regular, StrandMatch };

// Insert emissions and outgoing transitions.  Only consulted while the node
// is Regular, but retained on StrandMatch nodes so that demoting a strand
// (interleave filtering) can restore full Plan7 behaviour.
struct RegularParams {
  EmissionTable insert_emissions;
  NodeTransitions transitions;
};

struct TemplateNode {
  int index = 0;  // 1-based position in the node sequence
  NodeKind kind = NodeKind::Regular;
  EmissionTable match_emissions;
  RegularParams regular;
};

// A run of consecutive StrandMatch nodes.  Strand ids are ordinals: strands
// are numbered 0..k-1 in template (= sequence) order.
struct BetaStrand {
  int id = 0;
  int start_node = 0;  // 1-based, inclusive
  int length = 0;      // >= 2 nodes

  int end_node() const { return start_node + length - 1; }
};

enum class Orientation : std::uint8_t { Parallel, Antiparallel };

// A residue-pairing constraint between two strands of equal length.
// `exposure` has one entry per position of the FIRST strand; position t of
// the first strand pairs with position t (parallel) or length-1-t
// (antiparallel) of the second.
struct StrandPair {
  int first = 0;
  int second = 0;
  Orientation orientation = Orientation::Antiparallel;
  std::vector<Exposure> exposure;
};

struct MrfTemplate {
  std::string name;
  std::vector<TemplateNode> nodes;
  std::vector<BetaStrand> strands;
  std::vector<StrandPair> pairs;
  int max_gap = 0;  // longest allowed residue run between adjacent strands

  int node_count() const { return static_cast<int>(nodes.size()); }
  int strand_count() const { return static_cast<int>(strands.size()); }
  const TemplateNode& node(int index_1based) const {
    return nodes[static_cast<std::size_t>(index_1based - 1)];
  }
};

// |ordinal difference| of the two strands: adjacent strands interleave at 1,
// and larger values measure how many strands the pairing reaches across.
int interleave(const MrfTemplate& t, const StrandPair& pair);

// Largest interleave over all pairs; 0 for a pair-free template.
int max_interleave(const MrfTemplate& t);

// Keeps only pairs with interleave <= threshold.  Strands left with no
// retained pair are demoted: their nodes become Regular again (insert/delete
// behaviour restored from the stored params) and the strand disappears.
// Survivors are renumbered 0..k'-1 and pair references remapped.
MrfTemplate apply_interleave_filter(const MrfTemplate& t, int threshold);

// Cost of observing `later` downstream of `earlier` under one pairing slot.
double pair_position_score(const PairScoreTables& tables, Exposure exposure,
                           AminoAcid later, AminoAcid earlier);

// Returns human-readable descriptions of every violated invariant (empty
// means the template is well-formed).
std::vector<std::string> validate(const MrfTemplate& t);

// Convenience: throws ValidationError listing the problems, if any.
void validate_or_throw(const MrfTemplate& t);

}  // namespace mrf
