#pragma once

// Shared fixtures for the test suite: small hand-built templates with known
// topology, in-memory pair tables, and random model/query generators for
// property tests.  Everything goes through the public headers only.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mrf/amino.hpp"
#include "mrf/model.hpp"
#include "mrf/pair_tables.hpp"
#include "mrf/rng.hpp"
#include "mrf/score.hpp"

namespace fixtures {

inline mrf::AminoAcid aa(char c) { return mrf::AminoAcid::from_char(c); }

// A grid whose every standard-residue cell is `value`; the X row/column sits
// at the sentinel as in every well-formed table, so the grid round-trips
// through the text format.
inline mrf::PairScoreGrid constant_grid(double value) {
  mrf::PairScoreGrid grid;
  for (int r = 0; r < mrf::kAlphabetSize; ++r) {
    for (int c = 0; c < mrf::kAlphabetSize; ++c) {
      const mrf::AminoAcid later = mrf::AminoAcid::from_index(r);
      const mrf::AminoAcid earlier = mrf::AminoAcid::from_index(c);
      const bool x = later.is_unknown() || earlier.is_unknown();
      grid.set(later, earlier, x ? mrf::kSentinelCost : value);
    }
  }
  return grid;
}

inline mrf::PairScoreTables constant_tables(double buried, double exposed) {
  return mrf::PairScoreTables{constant_grid(buried), constant_grid(exposed)};
}

// Structured tables: every (later, earlier) cell differs, values stay inside
// the parseable range (0, 9.21], and X cells sit at the sentinel.  Having
// distinct cells makes optima unique in practice, which keeps search and
// enumeration comparisons meaningful.
inline mrf::PairScoreTables varied_tables() {
  mrf::PairScoreTables tables;
  for (int r = 0; r < mrf::kAlphabetSize; ++r) {
    for (int c = 0; c < mrf::kAlphabetSize; ++c) {
      const mrf::AminoAcid later = mrf::AminoAcid::from_index(r);
      const mrf::AminoAcid earlier = mrf::AminoAcid::from_index(c);
      if (later.is_unknown() || earlier.is_unknown()) {
        tables.buried.set(later, earlier, mrf::kSentinelCost);
        tables.exposed.set(later, earlier, mrf::kSentinelCost);
        continue;
      }
      tables.buried.set(later, earlier, 0.25 + ((r * 7 + c * 3) % 31) * 0.28);
      tables.exposed.set(later, earlier, 0.20 + ((r * 5 + c * 11) % 31) * 0.29);
    }
  }
  return tables;
}

// Uninformative emissions: every residue scores `value`, X pinned to the
// sentinel (matching what training produces).
inline mrf::EmissionTable flat_emissions(double value = 0.0) {
  mrf::EmissionTable em;
  for (int i = 0; i < mrf::kStandardResidues; ++i) em.scores[static_cast<std::size_t>(i)] = value;
  em.scores[mrf::kStandardResidues] = mrf::kSentinelCost;
  return em;
}

inline mrf::NodeTransitions flat_transitions(double cost = 0.1) {
  mrf::NodeTransitions tr;
  tr.mm = tr.mi = tr.md = tr.im = tr.ii = tr.dm = tr.dd = cost;
  return tr;
}

struct StrandSpec {
  int start_node = 0;  // 1-based
  int length = 0;
};

// A template with `node_count` nodes, flat parameters, and the given strands
// (template order).  Pairs are added separately.
inline mrf::MrfTemplate make_template(int node_count, const std::vector<StrandSpec>& strands,
                                      int max_gap = 1000) {
  mrf::MrfTemplate t;
  t.name = "fixture";
  t.max_gap = max_gap;
  t.nodes.resize(static_cast<std::size_t>(node_count));
  for (int j = 0; j < node_count; ++j) {
    mrf::TemplateNode& node = t.nodes[static_cast<std::size_t>(j)];
    node.index = j + 1;
    node.kind = mrf::NodeKind::Regular;
    node.match_emissions = flat_emissions();
    node.regular.insert_emissions = flat_emissions();
    node.regular.transitions = flat_transitions();
  }
  int id = 0;
  for (const StrandSpec& s : strands) {
    mrf::BetaStrand strand;
    strand.id = id++;
    strand.start_node = s.start_node;
    strand.length = s.length;
    t.strands.push_back(strand);
    for (int j = s.start_node; j <= strand.end_node(); ++j) {
      t.nodes[static_cast<std::size_t>(j - 1)].kind = mrf::NodeKind::StrandMatch;
    }
  }
  return t;
}

inline void add_pair(mrf::MrfTemplate& t, int first, int second,
                     mrf::Orientation orientation = mrf::Orientation::Antiparallel,
                     mrf::Exposure exposure = mrf::Exposure::Buried) {
  mrf::StrandPair pair;
  pair.first = first;
  pair.second = second;
  pair.orientation = orientation;
  pair.exposure.assign(
      static_cast<std::size_t>(t.strands[static_cast<std::size_t>(first)].length), exposure);
  t.pairs.push_back(pair);
}

// Strand topologies laid out as in the figure fixtures.  Spatial neighbors in
// the sheet become pairs; the interleave of a pair is the |ordinal difference|
// of its strands in sequence order.

// Four strands, each hydrogen-bonded to the next in sequence order.
inline mrf::MrfTemplate up_down_template() {
  mrf::MrfTemplate t = make_template(
      4 * 3 + 3 * 2,
      {{1, 3}, {6, 3}, {11, 3}, {16, 3}});
  add_pair(t, 0, 1);
  add_pair(t, 1, 2);
  add_pair(t, 2, 3);
  return t;
}

// Greek key: spatial order 3,0,1,2 over sequence strands 0..3 gives the
// classic (0,1), (1,2) neighbors plus the long (0,3) reach across the key.
inline mrf::MrfTemplate greek_key_template() {
  mrf::MrfTemplate t = make_template(
      4 * 3 + 3 * 2,
      {{1, 3}, {6, 3}, {11, 3}, {16, 3}});
  add_pair(t, 0, 1);
  add_pair(t, 1, 2);
  add_pair(t, 0, 3);
  return t;
}

// Jelly roll: eight strands whose spatial order in the rolled sheet is
// 1,0,7,2,5,4,3,6 (sequence ordinals).  Adjacent strands in that order pair:
// (0,1) (0,7) (2,7) (2,5) (4,5) (3,4) (3,6), with interleaves
//  1     7     5     3     1     1     3.
inline mrf::MrfTemplate jelly_roll_template() {
  std::vector<StrandSpec> strands;
  for (int s = 0; s < 8; ++s) strands.push_back(StrandSpec{1 + s * 4, 2});
  mrf::MrfTemplate t = make_template(8 * 4 - 2, strands);
  add_pair(t, 0, 1);
  add_pair(t, 0, 7);
  add_pair(t, 2, 7);
  add_pair(t, 2, 5);
  add_pair(t, 4, 5);
  add_pair(t, 3, 4);
  add_pair(t, 3, 6);
  return t;
}

// Random parameters in well-spread ranges: emissions in [-2, 3], transitions
// in [0.05, 2.5].  Continuous draws make score ties essentially impossible.
inline void randomize_parameters(mrf::MrfTemplate& t, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> em(-2.0, 3.0);
  std::uniform_real_distribution<double> tr(0.05, 2.5);
  for (mrf::TemplateNode& node : t.nodes) {
    for (int i = 0; i < mrf::kStandardResidues; ++i) {
      node.match_emissions.scores[static_cast<std::size_t>(i)] = em(rng);
      node.regular.insert_emissions.scores[static_cast<std::size_t>(i)] = em(rng);
    }
    node.match_emissions.scores[mrf::kStandardResidues] = mrf::kSentinelCost;
    node.regular.insert_emissions.scores[mrf::kStandardResidues] = mrf::kSentinelCost;
    mrf::NodeTransitions& x = node.regular.transitions;
    x.mm = tr(rng);
    x.mi = tr(rng);
    x.md = tr(rng);
    x.im = tr(rng);
    x.ii = tr(rng);
    x.dm = tr(rng);
    x.dd = tr(rng);
  }
}

// Random template: k strands of length 2-3 separated by 0-3 regular nodes,
// regular flanks on both ends, randomized parameters, random pairs optional.
inline mrf::MrfTemplate random_template(std::mt19937_64& rng, int max_strands, bool with_pairs,
                                        int max_gap = 1000) {
  const int k = max_strands <= 0 ? 0 : mrf::uniform_int(rng, 0, max_strands);
  std::vector<StrandSpec> strands;
  int node = 1 + mrf::uniform_int(rng, 0, 2);  // leading regular nodes
  for (int s = 0; s < k; ++s) {
    const int len = mrf::uniform_int(rng, 2, 3);
    strands.push_back(StrandSpec{node, len});
    node += len + mrf::uniform_int(rng, 0, 3);  // 0 = adjacent strands
  }
  const int node_count = node - 1 + mrf::uniform_int(rng, 1, 3);  // trailing regulars
  mrf::MrfTemplate t = make_template(node_count, strands, max_gap);
  randomize_parameters(t, rng);
  if (with_pairs && k >= 2) {
    // Chain pairs over equal-length strands plus an occasional long reach.
    for (int s = 0; s + 1 < k; ++s) {
      if (t.strands[static_cast<std::size_t>(s)].length !=
          t.strands[static_cast<std::size_t>(s) + 1].length) {
        continue;
      }
      if (mrf::uniform_real(rng) < 0.7) {
        add_pair(t, s, s + 1,
                 mrf::uniform_real(rng) < 0.5 ? mrf::Orientation::Parallel
                                              : mrf::Orientation::Antiparallel,
                 mrf::uniform_real(rng) < 0.5 ? mrf::Exposure::Buried : mrf::Exposure::Exposed);
      }
    }
    if (k >= 3 &&
        t.strands.front().length == t.strands.back().length && mrf::uniform_real(rng) < 0.5) {
      add_pair(t, 0, k - 1);
    }
  }
  return t;
}

inline mrf::QuerySequence random_query(std::mt19937_64& rng, int length,
                                       const std::string& id = "q") {
  std::string text;
  text.reserve(static_cast<std::size_t>(length));
  for (int i = 0; i < length; ++i) {
    text.push_back(mrf::kResidueCodes[mrf::uniform_int(rng, 0, mrf::kStandardResidues - 1)]);
  }
  return mrf::make_sequence(id, text);
}

// One-strand "ruler" fixture: match emission cost equals the residue index,
// and the query encodes distance from a target position in its residues, so
// the placement score falls strictly toward the target from both sides (no
// plateaus for lengths <= 19).  Shift descent from any start reaches the
// optimum.
inline mrf::MrfTemplate unimodal_template(int max_gap = 1000) {
  mrf::MrfTemplate t = make_template(2, {{1, 2}}, max_gap);
  for (int j = 0; j < 2; ++j) {
    mrf::EmissionTable& em = t.nodes[static_cast<std::size_t>(j)].match_emissions;
    for (int v = 0; v < mrf::kStandardResidues; ++v) {
      em.scores[static_cast<std::size_t>(v)] = v;
    }
  }
  return t;
}

inline mrf::QuerySequence unimodal_query(int length, int target) {
  std::string text;
  text.reserve(static_cast<std::size_t>(length));
  for (int i = 0; i < length; ++i) {
    const int d = std::min(i > target ? i - target : target - i, mrf::kStandardResidues - 1);
    text.push_back(mrf::kResidueCodes[d]);
  }
  return mrf::make_sequence("ruler", text);
}

// Structural equality with exact double comparison; serialization must not
// lose a single bit, and filter idempotence is defined up to identity.
inline bool emissions_equal(const mrf::EmissionTable& a, const mrf::EmissionTable& b) {
  return a.scores == b.scores && a.background == b.background;
}

inline bool transitions_equal(const mrf::NodeTransitions& a, const mrf::NodeTransitions& b) {
  return a.mm == b.mm && a.mi == b.mi && a.md == b.md && a.im == b.im && a.ii == b.ii &&
         a.dm == b.dm && a.dd == b.dd;
}

inline bool templates_equal(const mrf::MrfTemplate& a, const mrf::MrfTemplate& b) {
  if (a.name != b.name || a.max_gap != b.max_gap) return false;
  if (a.nodes.size() != b.nodes.size() || a.strands.size() != b.strands.size() ||
      a.pairs.size() != b.pairs.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.nodes.size(); ++i) {
    const mrf::TemplateNode& x = a.nodes[i];
    const mrf::TemplateNode& y = b.nodes[i];
    if (x.index != y.index || x.kind != y.kind) return false;
    if (!emissions_equal(x.match_emissions, y.match_emissions)) return false;
    if (!emissions_equal(x.regular.insert_emissions, y.regular.insert_emissions)) return false;
    if (!transitions_equal(x.regular.transitions, y.regular.transitions)) return false;
  }
  for (std::size_t i = 0; i < a.strands.size(); ++i) {
    const mrf::BetaStrand& x = a.strands[i];
    const mrf::BetaStrand& y = b.strands[i];
    if (x.id != y.id || x.start_node != y.start_node || x.length != y.length) return false;
  }
  for (std::size_t i = 0; i < a.pairs.size(); ++i) {
    const mrf::StrandPair& x = a.pairs[i];
    const mrf::StrandPair& y = b.pairs[i];
    if (x.first != y.first || x.second != y.second || x.orientation != y.orientation ||
        x.exposure != y.exposure) {
      return false;
    }
  }
  return true;
}

}  // namespace fixtures
