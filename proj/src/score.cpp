#include "mrf/score.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mrf/errors.hpp"
#include "mrf/parallel.hpp"

namespace mrf {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Backtrace choices.  kBoundary means "entered directly from the segment
// boundary" (consuming leading flank residues, if any).
enum Choice : std::uint8_t { kFromM, kFromI, kFromD, kBoundary };

struct SegmentShape {
  int m = 0;  // nodes in the span
  int c = 0;  // residues in the span
};

SegmentShape segment_shape(const MrfTemplate& t, const QuerySequence& q,
                           const SegmentSpec& seg) {
  SegmentShape shape;
  shape.m = seg.last_node - seg.first_node + 1;
  shape.c = seg.end_residue - seg.first_residue;
  if (shape.m < 0) shape.m = 0;
  if (seg.first_node < 1 || (shape.m > 0 && seg.last_node > t.node_count())) {
    throw ValidationError("segment node span outside the template");
  }
  if (seg.first_residue < 0 || seg.end_residue < seg.first_residue ||
      seg.end_residue > q.length()) {
    throw ValidationError("segment residue span outside the query");
  }
  for (int n = seg.first_node; n <= seg.last_node; ++n) {
    if (t.node(n).kind != NodeKind::Regular) {
      throw ValidationError("segment spans StrandMatch node " + std::to_string(n));
    }
  }
  return shape;
}

// Shared recurrence for the score-only and path-recording variants.  In
// -log space everything is a minimization; ties prefer match over delete
// over insert, applied by evaluating candidates in that order and replacing
// only on strict improvement.
template <bool WithPath>
SegmentResult run_viterbi(const MrfTemplate& t, const QuerySequence& q,
                          const SegmentSpec& seg) {
  const SegmentShape shape = segment_shape(t, q, seg);
  const int m = shape.m;
  const int c = shape.c;
  SegmentResult result;

  if (m == 0) {
    // No nodes to visit.  Residues are either flank loops (free) or, pinned
    // between two strands, a probability-0 event charged per residue.
    double score = 0.0;
    const char step = seg.leading_flank ? 'n' : (seg.trailing_flank ? 'c' : 'g');
    if (step == 'g') {
      for (int i = 0; i < c; ++i) score += kImpossibleCostPerResidue;
    }
    result.score = score;
    if (WithPath) result.path.steps.assign(static_cast<std::size_t>(c), PathStep{0, step});
    return result;
  }

  const auto node_at = [&](int j) -> const TemplateNode& {
    return t.node(seg.first_node + j - 1);
  };
  const auto residue_at = [&](int i) { return q[seg.first_residue + i - 1]; };

  const std::size_t stride = static_cast<std::size_t>(c) + 1;
  std::vector<double> vm_prev(stride), vi_prev(stride), vd_prev(stride);
  std::vector<double> vm_cur(stride), vi_cur(stride), vd_cur(stride);
  std::vector<std::uint8_t> cm, ci, cd;
  if (WithPath) {
    cm.assign((static_cast<std::size_t>(m) + 1) * stride, kBoundary);
    ci.assign((static_cast<std::size_t>(m) + 1) * stride, kBoundary);
    cd.assign((static_cast<std::size_t>(m) + 1) * stride, kBoundary);
  }
  const auto at = [&](std::vector<std::uint8_t>& v, int j, int i) -> std::uint8_t& {
    return v[static_cast<std::size_t>(j) * stride + static_cast<std::size_t>(i)];
  };

  // Entry cost for consuming i boundary residues before touching a node.
  const auto boundary = [&](int i) {
    return (i == 0 || seg.leading_flank) ? 0.0 : kInf;
  };

  static const NodeTransitions kNoTransitions{};
  for (int j = 1; j <= m; ++j) {
    const TemplateNode& node = node_at(j);
    const NodeTransitions& prev_tr =
        j >= 2 ? node_at(j - 1).regular.transitions : kNoTransitions;
    for (int i = 0; i <= c; ++i) {
      // Match: consumes one residue.
      double vm = kInf;
      std::uint8_t vm_choice = kBoundary;
      if (i >= 1) {
        if (j == 1) {
          vm = boundary(i - 1);  // model entry itself is free
        } else {
          vm = vm_prev[static_cast<std::size_t>(i - 1)] + prev_tr.mm;
          vm_choice = kFromM;
          const double from_d = vd_prev[static_cast<std::size_t>(i - 1)] + prev_tr.dm;
          if (from_d < vm) {
            vm = from_d;
            vm_choice = kFromD;
          }
          const double from_i = vi_prev[static_cast<std::size_t>(i - 1)] + prev_tr.im;
          if (from_i < vm) {
            vm = from_i;
            vm_choice = kFromI;
          }
        }
        vm += node.match_emissions.score(residue_at(i));
      }
      vm_cur[static_cast<std::size_t>(i)] = vm;
      if (WithPath) at(cm, j, i) = vm_choice;

      // Delete: consumes nothing.
      double vd;
      std::uint8_t vd_choice;
      if (j == 1) {
        vd = boundary(i);
        vd_choice = kBoundary;
      } else {
        vd = vm_prev[static_cast<std::size_t>(i)] + prev_tr.md;
        vd_choice = kFromM;
        const double from_d = vd_prev[static_cast<std::size_t>(i)] + prev_tr.dd;
        if (from_d < vd) {
          vd = from_d;
          vd_choice = kFromD;
        }
      }
      vd_cur[static_cast<std::size_t>(i)] = vd;
      if (WithPath) at(cd, j, i) = vd_choice;

      // Insert at this node: consumes one residue, loops on itself.
      double vi = kInf;
      std::uint8_t vi_choice = kFromM;
      if (i >= 1) {
        const NodeTransitions& tr = node.regular.transitions;
        vi = vm_cur[static_cast<std::size_t>(i - 1)] + tr.mi;
        const double from_i = vi_cur[static_cast<std::size_t>(i - 1)] + tr.ii;
        if (from_i < vi) {
          vi = from_i;
          vi_choice = kFromI;
        }
        vi += node.regular.insert_emissions.score(residue_at(i));
      }
      vi_cur[static_cast<std::size_t>(i)] = vi;
      if (WithPath) at(ci, j, i) = vi_choice;
    }
    vm_prev.swap(vm_cur);
    vd_prev.swap(vd_cur);
    vi_prev.swap(vi_cur);
  }

  // Exit: model exit is free; a trailing flank may absorb any suffix.  Ties
  // prefer consuming more residues in the model (larger i), then M > D > I.
  double best = kInf;
  char best_state = 'M';
  int best_i = c;
  const int lowest_exit = seg.trailing_flank ? 0 : c;
  for (int i = c; i >= lowest_exit; --i) {
    const struct {
      double value;
      char state;
    } candidates[] = {{vm_prev[static_cast<std::size_t>(i)], 'M'},
                      {vd_prev[static_cast<std::size_t>(i)], 'D'},
                      {vi_prev[static_cast<std::size_t>(i)], 'I'}};
    for (const auto& cand : candidates) {
      if (cand.value < best) {
        best = cand.value;
        best_state = cand.state;
        best_i = i;
      }
    }
  }
  result.score = best;

  if (WithPath) {
    // Walk backwards from the chosen exit.  Trailing flank steps are pushed
    // first so the final reverse leaves them at the end.
    std::vector<PathStep> reversed;
    for (int f = best_i; f < c; ++f) reversed.push_back(PathStep{0, 'c'});
    char state = best_state;
    int j = m;
    int i = best_i;
    int leading = 0;
    while (true) {
      const int node_index = seg.first_node + j - 1;
      if (state == 'M') {
        reversed.push_back(PathStep{node_index, 'M'});
        const std::uint8_t choice = at(cm, j, i);
        --i;
        if (choice == kBoundary) {
          leading = i;  // residues consumed before entering the model
          break;
        }
        --j;
        state = choice == kFromM ? 'M' : (choice == kFromD ? 'D' : 'I');
      } else if (state == 'D') {
        reversed.push_back(PathStep{node_index, 'D'});
        const std::uint8_t choice = at(cd, j, i);
        if (choice == kBoundary) {
          leading = i;
          break;
        }
        --j;
        state = choice == kFromM ? 'M' : 'D';
      } else {
        reversed.push_back(PathStep{node_index, 'I'});
        const std::uint8_t choice = at(ci, j, i);
        --i;
        state = choice == kFromM ? 'M' : 'I';
      }
    }
    for (int f = 0; f < leading; ++f) reversed.push_back(PathStep{0, 'n'});
    std::reverse(reversed.begin(), reversed.end());
    result.path.steps = std::move(reversed);
  }
  return result;
}

struct StrandLayout {
  std::vector<int> lengths;
  std::vector<int> suffix;  // suffix[i] = total strand residues from strand i on

  explicit StrandLayout(const MrfTemplate& t) {
    lengths.reserve(t.strands.size());
    for (const BetaStrand& s : t.strands) lengths.push_back(s.length);
    suffix.assign(lengths.size() + 1, 0);
    for (int i = static_cast<int>(lengths.size()) - 1; i >= 0; --i) {
      suffix[static_cast<std::size_t>(i)] =
          suffix[static_cast<std::size_t>(i) + 1] + lengths[static_cast<std::size_t>(i)];
    }
  }
};

// Recursively enumerates completions of a partial placement, in ascending
// lexicographic order, honoring the max-gap constraint.
template <typename Fn>
void enumerate_from(const StrandLayout& layout, int max_gap, int query_length, int strand,
                    std::vector<int>& starts, Fn&& fn) {
  const int k = static_cast<int>(layout.lengths.size());
  if (strand == k) {
    fn(starts);
    return;
  }
  const int prev_end =
      strand == 0 ? 0
                  : starts[static_cast<std::size_t>(strand - 1)] +
                        layout.lengths[static_cast<std::size_t>(strand - 1)];
  const int lo = prev_end;
  int hi = query_length - layout.suffix[static_cast<std::size_t>(strand)];
  if (strand > 0) hi = std::min(hi, prev_end + max_gap);
  for (int p = lo; p <= hi; ++p) {
    starts.push_back(p);
    enumerate_from(layout, max_gap, query_length, strand + 1, starts, fn);
    starts.pop_back();
  }
}

}  // namespace

SegmentResult viterbi_segment(const MrfTemplate& t, const QuerySequence& q,
                              const SegmentSpec& seg) {
  return run_viterbi<true>(t, q, seg);
}

double viterbi_segment_score(const MrfTemplate& t, const QuerySequence& q,
                             const SegmentSpec& seg) {
  return run_viterbi<false>(t, q, seg).score;
}

bool legal(const MrfTemplate& t, int query_length, const Placement& p) {
  const int k = t.strand_count();
  if (static_cast<int>(p.starts.size()) != k) return false;
  int prev_end = 0;
  for (int i = 0; i < k; ++i) {
    const int start = p.starts[static_cast<std::size_t>(i)];
    const int length = t.strands[static_cast<std::size_t>(i)].length;
    if (start < 0) return false;
    if (start < prev_end) return false;
    if (i > 0 && start - prev_end > t.max_gap) return false;
    prev_end = start + length;
  }
  return prev_end <= query_length || k == 0;
}

ScoreBreakdown placement_score(const MrfTemplate& t, const PairScoreTables& tables,
                               const QuerySequence& q, const Placement& p) {
  const int k = t.strand_count();
  if (static_cast<int>(p.starts.size()) != k) {
    throw ValidationError("placement has " + std::to_string(p.starts.size()) +
                          " starts for " + std::to_string(k) + " strands");
  }
  int prev_end = 0;
  for (int i = 0; i < k; ++i) {
    const int start = p.starts[static_cast<std::size_t>(i)];
    const BetaStrand& s = t.strands[static_cast<std::size_t>(i)];
    if (start < 0) throw ValidationError("strand 0 placed before the sequence start");
    if (start < prev_end) {
      throw ValidationError("strand " + std::to_string(i) +
                            " overlaps or reorders against strand " + std::to_string(i - 1));
    }
    if (i > 0 && start - prev_end > t.max_gap) {
      throw ValidationError("gap before strand " + std::to_string(i) + " is " +
                            std::to_string(start - prev_end) + " residues (max_gap " +
                            std::to_string(t.max_gap) + ")");
    }
    prev_end = start + s.length;
  }
  if (k > 0 && prev_end > q.length()) {
    throw ValidationError("last strand extends past the end of the query");
  }

  ScoreBreakdown out;
  out.segment_scores.reserve(static_cast<std::size_t>(k) + 1);
  out.strand_scores.reserve(static_cast<std::size_t>(k));
  out.pair_scores.reserve(t.pairs.size());

  for (int i = 0; i <= k; ++i) {
    SegmentSpec seg;
    seg.first_node = i == 0 ? 1 : t.strands[static_cast<std::size_t>(i - 1)].end_node() + 1;
    seg.last_node =
        i == k ? t.node_count() : t.strands[static_cast<std::size_t>(i)].start_node - 1;
    seg.first_residue = i == 0 ? 0
                               : p.starts[static_cast<std::size_t>(i - 1)] +
                                     t.strands[static_cast<std::size_t>(i - 1)].length;
    seg.end_residue = i == k ? q.length() : p.starts[static_cast<std::size_t>(i)];
    seg.leading_flank = i == 0;
    seg.trailing_flank = i == k;
    out.segment_scores.push_back(viterbi_segment_score(t, q, seg));
  }

  for (int i = 0; i < k; ++i) {
    const BetaStrand& s = t.strands[static_cast<std::size_t>(i)];
    const int start = p.starts[static_cast<std::size_t>(i)];
    double score = 0.0;
    for (int j = 0; j < s.length; ++j) {
      score += t.node(s.start_node + j).match_emissions.score(q[start + j]);
    }
    out.strand_scores.push_back(score);
  }

  for (const StrandPair& pair : t.pairs) {
    const BetaStrand& a = t.strands[static_cast<std::size_t>(pair.first)];
    const int a_start = p.starts[static_cast<std::size_t>(pair.first)];
    const int b_start = p.starts[static_cast<std::size_t>(pair.second)];
    double score = 0.0;
    for (int pos = 0; pos < a.length; ++pos) {
      const int partner =
          pair.orientation == Orientation::Parallel ? pos : a.length - 1 - pos;
      score += tables.score(pair.exposure[static_cast<std::size_t>(pos)],
                            q[b_start + partner], q[a_start + pos]);
    }
    out.pair_scores.push_back(score);
  }

  double total = 0.0;
  for (double v : out.segment_scores) total += v;
  for (double v : out.strand_scores) total += v;
  for (double v : out.pair_scores) total += v;
  out.total = total;
  return out;
}

std::uint64_t count_placements(const MrfTemplate& t, int query_length, bool include_max_gap) {
  const StrandLayout layout(t);
  const int k = static_cast<int>(layout.lengths.size());
  if (k == 0) return 1;
  if (layout.suffix[0] > query_length) return 0;

  // W[p] = number of ways to place strands i..k-1 with strand i starting at
  // p.  Accumulation uses 128-bit cells with a generous ceiling; anything
  // that reaches the ceiling saturates the (64-bit) answer.
  using Wide = unsigned __int128;
  constexpr Wide kCeiling = Wide(1) << 96;
  const std::size_t slots = static_cast<std::size_t>(query_length) + 1;
  std::vector<Wide> w(slots, 0), prefix(slots + 1, 0);
  bool saturated = false;

  const auto hi_start = [&](int strand) {
    return query_length - layout.suffix[static_cast<std::size_t>(strand)];
  };

  for (int p = 0; p <= hi_start(k - 1); ++p) w[static_cast<std::size_t>(p)] = 1;
  for (int i = k - 2; i >= 0 && !saturated; --i) {
    // prefix[p] = sum of w[p..end] for the already-computed row i+1.
    prefix[slots] = 0;
    for (int p = static_cast<int>(slots) - 1; p >= 0; --p) {
      prefix[static_cast<std::size_t>(p)] =
          prefix[static_cast<std::size_t>(p) + 1] + w[static_cast<std::size_t>(p)];
    }
    const int len = layout.lengths[static_cast<std::size_t>(i)];
    std::vector<Wide> next(slots, 0);
    for (int p = 0; p <= hi_start(i); ++p) {
      const int lo = p + len;
      long long hi = hi_start(i + 1);
      if (include_max_gap) hi = std::min<long long>(hi, static_cast<long long>(lo) + t.max_gap);
      if (hi < lo) continue;
      const Wide total = prefix[static_cast<std::size_t>(lo)] -
                         prefix[static_cast<std::size_t>(hi) + 1];
      next[static_cast<std::size_t>(p)] = total;
      if (total >= kCeiling) saturated = true;
    }
    w = std::move(next);
  }
  if (saturated) return std::numeric_limits<std::uint64_t>::max();

  Wide total = 0;
  for (int p = 0; p <= hi_start(0); ++p) {
    total += w[static_cast<std::size_t>(p)];
    if (total >= kCeiling) return std::numeric_limits<std::uint64_t>::max();
  }
  if (total > Wide(std::numeric_limits<std::uint64_t>::max())) {
    return std::numeric_limits<std::uint64_t>::max();
  }
  return static_cast<std::uint64_t>(total);
}

std::uint64_t enumerate_legal_placements(const MrfTemplate& t, int query_length,
                                         const std::function<void(const Placement&)>& fn) {
  const StrandLayout layout(t);
  if (layout.suffix[0] > query_length) return 0;
  std::uint64_t visited = 0;
  std::vector<int> starts;
  starts.reserve(layout.lengths.size());
  enumerate_from(layout, t.max_gap, query_length, 0, starts, [&](const std::vector<int>& s) {
    ++visited;
    Placement p;
    p.starts = s;
    fn(p);
  });
  return visited;
}

ExhaustiveResult exhaustive_optimum(const MrfTemplate& t, const PairScoreTables& tables,
                                    const QuerySequence& q, std::uint64_t cap, int workers) {
  const std::uint64_t space = count_placements(t, q.length());
  if (space > cap) {
    throw ValidationError("placement space has " + std::to_string(space) +
                          " candidates, above the exhaustive cap of " + std::to_string(cap));
  }
  const int k = t.strand_count();
  if (k == 0) {
    ExhaustiveResult res;
    res.breakdown = placement_score(t, tables, q, Placement{});
    res.candidates = 1;
    return res;
  }

  const StrandLayout layout(t);
  if (layout.suffix[0] > q.length()) {
    throw ValidationError("query of length " + std::to_string(q.length()) +
                          " cannot fit " + std::to_string(layout.suffix[0]) +
                          " strand residues");
  }

  // Partition by the first strand's start.  Each slot is searched
  // independently; the serial merge below makes the winner independent of
  // how slots were distributed across workers.
  const int first_hi = q.length() - layout.suffix[0];
  struct SlotBest {
    bool found = false;
    double score = 0.0;
    Placement placement;
    std::uint64_t candidates = 0;
  };
  std::vector<SlotBest> slots(static_cast<std::size_t>(first_hi) + 1);
  parallel_for(slots.size(), workers, [&](std::size_t slot) {
    SlotBest& best = slots[slot];
    std::vector<int> starts{static_cast<int>(slot)};
    enumerate_from(layout, t.max_gap, q.length(), 1, starts, [&](const std::vector<int>& s) {
      Placement p;
      p.starts = s;
      const ScoreBreakdown bd = placement_score(t, tables, q, p);
      ++best.candidates;
      if (!best.found || bd.total < best.score) {
        best.found = true;
        best.score = bd.total;
        best.placement = std::move(p);
      }
    });
  });

  // Ascending slot order: on score ties the lexicographically smallest
  // placement wins, no matter how the slots were assigned to workers.
  ExhaustiveResult res;
  bool found = false;
  double best_score = 0.0;
  for (const SlotBest& slot : slots) {
    res.candidates += slot.candidates;
    if (slot.found && (!found || slot.score < best_score)) {
      found = true;
      best_score = slot.score;
      res.placement = slot.placement;
    }
  }
  if (!found) {
    throw ValidationError("no legal placement exists for this query");
  }
  res.breakdown = placement_score(t, tables, q, res.placement);
  return res;
}

}  // namespace mrf
