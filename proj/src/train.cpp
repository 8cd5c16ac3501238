#include "mrf/train.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>

#include "mrf/errors.hpp"
#include "mrf/rng.hpp"

namespace mrf {
namespace {

void check_training_input(const MultipleAlignment& alignment,
                          const StrandAnnotationSet& annotations) {
  if (alignment.rows.empty()) throw ValidationError("training alignment has no rows");
  const int width = alignment.width();
  if (width == 0) throw ValidationError("training alignment has zero width");
  for (const AlignmentRow& row : alignment.rows) {
    if (static_cast<int>(row.cells.size()) != width) {
      throw ValidationError("alignment row '" + row.name + "' has width " +
                            std::to_string(row.cells.size()) + ", expected " +
                            std::to_string(width));
    }
  }
  for (const StrandAnnotation& a : annotations.annotations) {
    if (a.row < 0 || a.row >= alignment.row_count()) {
      throw ValidationError("annotation references row " + std::to_string(a.row) +
                            " outside the alignment");
    }
    if (a.start_col > a.end_col || a.partner_start > a.partner_end || a.start_col < 0 ||
        a.end_col >= width || a.partner_start < 0 || a.partner_end >= width) {
      throw ValidationError("annotation span outside the alignment on row " +
                            std::to_string(a.row));
    }
    if (a.end_col - a.start_col != a.partner_end - a.partner_start) {
      throw ValidationError("annotation spans of unequal length on row " +
                            std::to_string(a.row));
    }
    if (!a.exposure_hint.empty() &&
        static_cast<int>(a.exposure_hint.size()) != a.end_col - a.start_col + 1) {
      throw ValidationError("exposure hint length mismatch on row " + std::to_string(a.row));
    }
  }
}

int span_overlap(int a_lo, int a_hi, int b_lo, int b_hi) {
  return std::max(0, std::min(a_hi, b_hi) - std::max(a_lo, b_lo) + 1);
}

// Consensus strand whose columns overlap [lo, hi] the most; -1 when none do.
int map_span(const std::vector<ConsensusStrand>& strands, int lo, int hi) {
  int best = -1;
  int best_overlap = 0;
  for (std::size_t i = 0; i < strands.size(); ++i) {
    const int ov = span_overlap(lo, hi, strands[i].start_col, strands[i].end_col);
    if (ov > best_overlap) {
      best_overlap = ov;
      best = static_cast<int>(i);
    }
  }
  return best;
}

EmissionTable estimate_emissions(const std::array<double, kAlphabetSize>& counts,
                                 double pseudocount,
                                 const std::array<double, kAlphabetSize>& bg) {
  double total = 0.0;
  for (int a = 0; a < kStandardResidues; ++a) total += counts[static_cast<std::size_t>(a)];

  EmissionTable table;
  table.background = bg;
  for (int a = 0; a < kStandardResidues; ++a) {
    const double p = (counts[static_cast<std::size_t>(a)] + pseudocount * bg[static_cast<std::size_t>(a)]) /
                     (total + pseudocount);
    table.scores[static_cast<std::size_t>(a)] = -std::log(p / bg[static_cast<std::size_t>(a)]);
  }
  table.scores[kStandardResidues] = kSentinelCost;  // X never has an estimate
  return table;
}

}  // namespace

std::vector<bool> mark_consensus_columns(const MultipleAlignment& alignment, double symfrac) {
  if (alignment.rows.empty()) throw ValidationError("training alignment has no rows");
  const int width = alignment.width();
  const int row_count = alignment.row_count();
  std::vector<bool> is_match(static_cast<std::size_t>(width), false);
  for (int c = 0; c < width; ++c) {
    int residues = 0;
    for (int r = 0; r < row_count; ++r) {
      if (!alignment.is_gap(r, c)) ++residues;
    }
    const double occupancy = static_cast<double>(residues) / static_cast<double>(row_count);
    is_match[static_cast<std::size_t>(c)] = occupancy >= symfrac;
  }
  return is_match;
}

ConsensusTopology consensus_strands(const MultipleAlignment& alignment,
                                    const StrandAnnotationSet& annotations,
                                    const TrainConfig& config) {
  check_training_input(alignment, annotations);
  const int width = alignment.width();
  const int row_count = alignment.row_count();

  ConsensusTopology out;
  out.alignment = alignment;

  // A row marks a column as strand if any of its annotation spans (either
  // side of the pairing) covers it; consensus needs a strict majority per
  // config.consensus_fraction.
  std::vector<std::set<int>> rows_marking(static_cast<std::size_t>(width));
  for (const StrandAnnotation& a : annotations.annotations) {
    for (int c = a.start_col; c <= a.end_col; ++c) {
      rows_marking[static_cast<std::size_t>(c)].insert(a.row);
    }
    for (int c = a.partner_start; c <= a.partner_end; ++c) {
      rows_marking[static_cast<std::size_t>(c)].insert(a.row);
    }
  }
  out.beta_column.assign(static_cast<std::size_t>(width), false);
  for (int c = 0; c < width; ++c) {
    const double fraction = static_cast<double>(rows_marking[static_cast<std::size_t>(c)].size()) /
                            static_cast<double>(row_count);
    out.beta_column[static_cast<std::size_t>(c)] = fraction > config.consensus_fraction;
  }

  // Maximal runs of consensus columns; runs of a single column cannot form a
  // strand (strands need >= 2 positions) and stay plain match columns.
  for (int c = 0; c < width;) {
    if (!out.beta_column[static_cast<std::size_t>(c)]) {
      ++c;
      continue;
    }
    int end = c;
    while (end + 1 < width && out.beta_column[static_cast<std::size_t>(end + 1)]) ++end;
    if (end > c) out.strands.push_back(ConsensusStrand{c, end});
    c = end + 1;
  }

  // Scrub gaps out of consensus-strand columns: each row shifts left across
  // a gap (losing one column of padding at its end) until the column holds a
  // residue or the row runs out of residues to pull in.
  for (AlignmentRow& row : out.alignment.rows) {
    for (const ConsensusStrand& s : out.strands) {
      for (int c = s.start_col; c <= s.end_col; ++c) {
        while (row.cells[static_cast<std::size_t>(c)] == '-') {
          const std::size_t next =
              row.cells.find_first_not_of('-', static_cast<std::size_t>(c) + 1);
          if (next == std::string::npos) break;
          row.cells.erase(static_cast<std::size_t>(c), 1);
          row.cells.push_back('-');
        }
      }
    }
  }

  // Pair votes: map each annotation's two spans onto consensus strands and
  // let rows vote.  A pairing is adopted on the same strict-majority rule.
  struct PairVotes {
    std::set<int> rows;
    int parallel = 0;
    int antiparallel = 0;
    std::set<int> orientation_voted_rows;
  };
  std::map<std::pair<int, int>, PairVotes> votes;
  for (const StrandAnnotation& a : annotations.annotations) {
    const int first = map_span(out.strands, a.start_col, a.end_col);
    const int second = map_span(out.strands, a.partner_start, a.partner_end);
    if (first < 0 || second < 0 || first == second) continue;
    const auto key = std::minmax(first, second);
    PairVotes& v = votes[{key.first, key.second}];
    v.rows.insert(a.row);
    if (v.orientation_voted_rows.insert(a.row).second) {
      (a.orientation == Orientation::Parallel ? v.parallel : v.antiparallel) += 1;
    }
  }
  for (const auto& [key, v] : votes) {
    const double fraction =
        static_cast<double>(v.rows.size()) / static_cast<double>(row_count);
    if (fraction <= config.consensus_fraction) continue;
    const ConsensusStrand& a = out.strands[static_cast<std::size_t>(key.first)];
    const ConsensusStrand& b = out.strands[static_cast<std::size_t>(key.second)];
    if (a.length() != b.length()) continue;  // pairwise tables need aligned positions
    ConsensusPair pair;
    pair.first = key.first;
    pair.second = key.second;
    pair.orientation = v.parallel > v.antiparallel ? Orientation::Parallel
                                                   : Orientation::Antiparallel;
    out.pairs.push_back(pair);
  }
  return out;
}

std::vector<Exposure> choose_exposure(const MultipleAlignment& alignment,
                                      const ConsensusStrand& first,
                                      const ConsensusStrand& second,
                                      Orientation orientation,
                                      const PairScoreTables& tables) {
  if (first.length() != second.length()) {
    throw ValidationError("exposure choice needs strands of equal length");
  }
  std::vector<Exposure> exposure;
  exposure.reserve(static_cast<std::size_t>(first.length()));
  for (int pos = 0; pos < first.length(); ++pos) {
    const int earlier_col = first.start_col + pos;
    const int later_col = orientation == Orientation::Parallel ? second.start_col + pos
                                                               : second.end_col - pos;
    double buried_sum = 0.0;
    double exposed_sum = 0.0;
    for (int r = 0; r < alignment.row_count(); ++r) {
      if (alignment.is_gap(r, earlier_col) || alignment.is_gap(r, later_col)) continue;
      const AminoAcid earlier = alignment.residue(r, earlier_col);
      const AminoAcid later = alignment.residue(r, later_col);
      buried_sum += tables.buried.at(later, earlier);
      exposed_sum += tables.exposed.at(later, earlier);
    }
    exposure.push_back(buried_sum <= exposed_sum ? Exposure::Buried : Exposure::Exposed);
  }
  return exposure;
}

MrfTemplate estimate_template(const MultipleAlignment& alignment,
                              const StrandAnnotationSet& annotations,
                              const TrainConfig& config, const PairScoreTables& tables) {
  const ConsensusTopology topo = consensus_strands(alignment, annotations, config);
  const MultipleAlignment& a = topo.alignment;
  const int width = a.width();
  const int row_count = a.row_count();

  for (int x = 0; x < kStandardResidues; ++x) {
    if (!(config.background[static_cast<std::size_t>(x)] > 0.0)) {
      throw ValidationError("background frequency for '" +
                            std::string(1, AminoAcid::from_index(x).code()) +
                            "' must be positive");
    }
  }

  // Match columns: enough residues, or membership in a consensus strand.
  std::vector<bool> is_match = mark_consensus_columns(a, config.symfrac);
  std::vector<int> col_node(static_cast<std::size_t>(width), 0);  // 1-based, 0 = none
  int node_count = 0;
  for (int c = 0; c < width; ++c) {
    if (topo.beta_column[static_cast<std::size_t>(c)]) {
      is_match[static_cast<std::size_t>(c)] = true;
    }
    if (is_match[static_cast<std::size_t>(c)]) {
      col_node[static_cast<std::size_t>(c)] = ++node_count;
    }
  }
  if (node_count == 0) {
    throw ValidationError("no column qualifies as a match column; lower symfrac");
  }

  MrfTemplate t;
  t.nodes.resize(static_cast<std::size_t>(node_count));
  for (int i = 0; i < node_count; ++i) t.nodes[static_cast<std::size_t>(i)].index = i + 1;

  // Emission counts.  X observations carry no usable signal and are skipped.
  std::vector<std::array<double, kAlphabetSize>> match_counts(
      static_cast<std::size_t>(node_count), std::array<double, kAlphabetSize>{});
  std::vector<std::array<double, kAlphabetSize>> insert_counts(
      static_cast<std::size_t>(node_count), std::array<double, kAlphabetSize>{});
  for (int c = 0; c < width; ++c) {
    const bool match_col = is_match[static_cast<std::size_t>(c)];
    int node = col_node[static_cast<std::size_t>(c)];
    if (!match_col) {
      for (int back = c - 1; back >= 0 && node == 0; --back) {
        node = col_node[static_cast<std::size_t>(back)];
      }
      if (node == 0) continue;  // inserts before node 1 belong to the free flank
    }
    for (int r = 0; r < row_count; ++r) {
      if (a.is_gap(r, c)) continue;
      const AminoAcid res = a.residue(r, c);
      if (res.is_unknown()) continue;
      auto& counts = match_col ? match_counts[static_cast<std::size_t>(node - 1)]
                               : insert_counts[static_cast<std::size_t>(node - 1)];
      counts[static_cast<std::size_t>(res.index())] += 1.0;
    }
  }
  for (int n = 0; n < node_count; ++n) {
    t.nodes[static_cast<std::size_t>(n)].match_emissions = estimate_emissions(
        match_counts[static_cast<std::size_t>(n)], config.pseudocount, config.background);
    t.nodes[static_cast<std::size_t>(n)].regular.insert_emissions = estimate_emissions(
        insert_counts[static_cast<std::size_t>(n)], config.pseudocount, config.background);
  }

  // Transition counts from each row's implied state path.  Adjacent states
  // that Plan7 cannot represent (delete->insert, insert->delete) contribute
  // nothing but do not break the walk.
  struct Counts {
    double mm = 0, mi = 0, md = 0, im = 0, ii = 0, dm = 0, dd = 0;
  };
  std::vector<Counts> counts(static_cast<std::size_t>(node_count));
  for (int r = 0; r < row_count; ++r) {
    char prev_state = 0;
    int prev_node = 0;
    for (int c = 0; c < width; ++c) {
      char state;
      int node;
      if (is_match[static_cast<std::size_t>(c)]) {
        node = col_node[static_cast<std::size_t>(c)];
        state = a.is_gap(r, c) ? 'D' : 'M';
      } else {
        if (a.is_gap(r, c)) continue;
        node = prev_state == 0 ? 0 : prev_node;
        state = 'I';
        if (node == 0) continue;  // leading insert residues: flank territory
      }
      if (prev_state != 0) {
        Counts& out = counts[static_cast<std::size_t>(prev_node - 1)];
        if (prev_state == 'M' && state == 'M') out.mm += 1;
        else if (prev_state == 'M' && state == 'I') out.mi += 1;
        else if (prev_state == 'M' && state == 'D') out.md += 1;
        else if (prev_state == 'I' && state == 'I') out.ii += 1;
        else if (prev_state == 'I' && state == 'M') out.im += 1;
        else if (prev_state == 'D' && state == 'M') out.dm += 1;
        else if (prev_state == 'D' && state == 'D') out.dd += 1;
      }
      prev_state = state;
      prev_node = node;
    }
  }
  const double pc = config.pseudocount;
  for (int n = 0; n < node_count; ++n) {
    const Counts& in = counts[static_cast<std::size_t>(n)];
    NodeTransitions& tr = t.nodes[static_cast<std::size_t>(n)].regular.transitions;
    const double m_total = in.mm + in.mi + in.md + pc;
    tr.mm = -std::log((in.mm + pc / 3.0) / m_total);
    tr.mi = -std::log((in.mi + pc / 3.0) / m_total);
    tr.md = -std::log((in.md + pc / 3.0) / m_total);
    const double i_total = in.ii + in.im + pc;
    tr.ii = -std::log((in.ii + pc / 2.0) / i_total);
    tr.im = -std::log((in.im + pc / 2.0) / i_total);
    const double d_total = in.dm + in.dd + pc;
    tr.dm = -std::log((in.dm + pc / 2.0) / d_total);
    tr.dd = -std::log((in.dd + pc / 2.0) / d_total);
  }

  // Strands, pairs, exposure.
  for (std::size_t i = 0; i < topo.strands.size(); ++i) {
    const ConsensusStrand& s = topo.strands[i];
    BetaStrand strand;
    strand.id = static_cast<int>(i);
    strand.start_node = col_node[static_cast<std::size_t>(s.start_col)];
    strand.length = s.length();
    t.strands.push_back(strand);
    for (int n = strand.start_node; n <= strand.end_node(); ++n) {
      t.nodes[static_cast<std::size_t>(n - 1)].kind = NodeKind::StrandMatch;
    }
  }
  for (const ConsensusPair& cp : topo.pairs) {
    const ConsensusStrand& first = topo.strands[static_cast<std::size_t>(cp.first)];
    const ConsensusStrand& second = topo.strands[static_cast<std::size_t>(cp.second)];
    StrandPair pair;
    pair.first = cp.first;
    pair.second = cp.second;
    pair.orientation = cp.orientation;

    // Per-position exposure: explicit hints win by majority where present;
    // everything else falls back to the cheaper-table rule.
    const int len = first.length();
    std::vector<int> buried_votes(static_cast<std::size_t>(len), 0);
    std::vector<int> exposed_votes(static_cast<std::size_t>(len), 0);
    for (const StrandAnnotation& an : annotations.annotations) {
      if (an.exposure_hint.empty()) continue;
      if (an.start_col != first.start_col || an.end_col != first.end_col) continue;
      if (an.partner_start != second.start_col || an.partner_end != second.end_col) continue;
      for (int pos = 0; pos < len; ++pos) {
        (an.exposure_hint[static_cast<std::size_t>(pos)] == Exposure::Buried
             ? buried_votes
             : exposed_votes)[static_cast<std::size_t>(pos)] += 1;
      }
    }
    const std::vector<Exposure> fallback =
        choose_exposure(a, first, second, cp.orientation, tables);
    pair.exposure.reserve(static_cast<std::size_t>(len));
    for (int pos = 0; pos < len; ++pos) {
      const int b = buried_votes[static_cast<std::size_t>(pos)];
      const int e = exposed_votes[static_cast<std::size_t>(pos)];
      if (b > e) {
        pair.exposure.push_back(Exposure::Buried);
      } else if (e > b) {
        pair.exposure.push_back(Exposure::Exposed);
      } else {
        pair.exposure.push_back(fallback[static_cast<std::size_t>(pos)]);
      }
    }
    t.pairs.push_back(pair);
  }

  // max_gap: longest residue run observed between adjacent strands, plus
  // breathing room for queries that stray from the training set.
  int longest = 0;
  for (std::size_t i = 0; i + 1 < topo.strands.size(); ++i) {
    const int lo = topo.strands[i].end_col + 1;
    const int hi = topo.strands[i + 1].start_col - 1;
    for (int r = 0; r < row_count; ++r) {
      int run = 0;
      for (int c = lo; c <= hi; ++c) {
        if (!a.is_gap(r, c)) ++run;
      }
      longest = std::max(longest, run);
    }
  }
  t.max_gap = longest + config.max_gap_slack;

  validate_or_throw(t);
  return t;
}

SimulatedEvolutionResult simulated_evolution(const MultipleAlignment& alignment,
                                             const StrandAnnotationSet& annotations,
                                             const TrainConfig& config,
                                             const PairScoreTables& tables,
                                             double rate, int count, std::uint64_t seed) {
  if (rate < 0.0 || rate > 1.0) throw ValidationError("mutation rate must be in [0, 1]");
  if (count < 0) throw ValidationError("artificial row count must be >= 0");

  const ConsensusTopology topo = consensus_strands(alignment, annotations, config);
  const int original_rows = topo.alignment.row_count();

  // Exposure per pair, decided on the original rows: the artificial rows
  // must be drawn from the model the originals imply, not from themselves.
  std::vector<std::vector<Exposure>> pair_exposure;
  pair_exposure.reserve(topo.pairs.size());
  for (const ConsensusPair& cp : topo.pairs) {
    pair_exposure.push_back(choose_exposure(topo.alignment,
                                            topo.strands[static_cast<std::size_t>(cp.first)],
                                            topo.strands[static_cast<std::size_t>(cp.second)],
                                            cp.orientation, tables));
  }

  SimulatedEvolutionResult out;
  out.alignment = topo.alignment;
  out.annotations = annotations;

  const RandomSource source(seed);
  for (int r = 0; r < original_rows; ++r) {
    for (int copy = 0; copy < count; ++copy) {
      std::mt19937_64 rng = source.stream(
          RngPurpose::SimulatedEvolution,
          static_cast<std::uint64_t>(r) * static_cast<std::uint64_t>(count) +
              static_cast<std::uint64_t>(copy));
      AlignmentRow row = topo.alignment.rows[static_cast<std::size_t>(r)];
      row.name += "|sim" + std::to_string(copy + 1);

      for (std::size_t p = 0; p < topo.pairs.size(); ++p) {
        const ConsensusPair& cp = topo.pairs[p];
        const ConsensusStrand& first = topo.strands[static_cast<std::size_t>(cp.first)];
        const ConsensusStrand& second = topo.strands[static_cast<std::size_t>(cp.second)];
        for (int pos = 0; pos < first.length(); ++pos) {
          const int earlier_col = first.start_col + pos;
          const int later_col = cp.orientation == Orientation::Parallel
                                    ? second.start_col + pos
                                    : second.end_col - pos;
          if (row.cells[static_cast<std::size_t>(earlier_col)] == '-' ||
              row.cells[static_cast<std::size_t>(later_col)] == '-') {
            continue;
          }
          ++out.paired_positions;
          if (uniform_real(rng) >= rate) continue;
          ++out.attempted;

          const AminoAcid earlier =
              AminoAcid::from_char(row.cells[static_cast<std::size_t>(earlier_col)]);
          const Exposure exposure = pair_exposure[p][static_cast<std::size_t>(pos)];
          const PairScoreGrid& grid = tables.grid(exposure);
          std::array<double, kStandardResidues> weights{};
          double total = 0.0;
          for (int x = 0; x < kStandardResidues; ++x) {
            weights[static_cast<std::size_t>(x)] =
                std::exp(-grid.at(AminoAcid::from_index(x), earlier));
            total += weights[static_cast<std::size_t>(x)];
          }
          double u = uniform_real(rng) * total;
          int chosen = kStandardResidues - 1;
          for (int x = 0; x < kStandardResidues; ++x) {
            u -= weights[static_cast<std::size_t>(x)];
            if (u <= 0.0) {
              chosen = x;
              break;
            }
          }
          row.cells[static_cast<std::size_t>(later_col)] =
              AminoAcid::from_index(chosen).code();
        }
      }

      const int new_row_index = out.alignment.row_count();
      out.alignment.rows.push_back(std::move(row));
      for (const StrandAnnotation& an : annotations.annotations) {
        if (an.row != r) continue;
        StrandAnnotation copy_an = an;
        copy_an.row = new_row_index;
        out.annotations.annotations.push_back(copy_an);
      }
    }
  }
  return out;
}

}  // namespace mrf
