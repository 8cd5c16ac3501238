#pragma once

// Independent reference implementations used to cross-check the library:
// brute-force path enumeration for segment Viterbi, a direct whole-model
// Viterbi for pair-free templates, an odometer placement enumerator, exact
// path re-scoring, and a pairwise-counting AUC.  None of these share code
// with the library beyond the public data types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "mrf/model.hpp"
#include "mrf/score.hpp"
#include "mrf/stats.hpp"

namespace oracles {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Minimum path cost for a segment by enumerating every path the grammar
// admits: optional leading-flank consumption, entry at M or D of the first
// node, Plan7 moves without i<->d edges, exit from the last node (the
// trailing flank, when present, absorbs any suffix).  Exponential, so only
// for small segments.
inline double brute_segment_min(const mrf::MrfTemplate& t, const mrf::QuerySequence& q,
                                const mrf::SegmentSpec& seg) {
  const int m = seg.last_node - seg.first_node + 1;
  const int c = seg.end_residue - seg.first_residue;
  if (m <= 0) {
    if (c == 0 || seg.leading_flank || seg.trailing_flank) return 0.0;
    return c * mrf::kImpossibleCostPerResidue;
  }

  double best = kInf;
  const auto residue = [&](int i) { return q[seg.first_residue + i]; };  // i consumed so far
  std::function<void(int, int, char, double)> walk = [&](int j, int i, char state, double cost) {
    const mrf::TemplateNode& node = t.node(seg.first_node + j - 1);
    if (j == m && (seg.trailing_flank || i == c) && cost < best) best = cost;
    if ((state == 'M' || state == 'I') && i < c) {
      const mrf::NodeTransitions& tr = node.regular.transitions;
      const double step = (state == 'M' ? tr.mi : tr.ii) +
                          node.regular.insert_emissions.score(residue(i));
      walk(j, i + 1, 'I', cost + step);
    }
    if (j < m) {
      const mrf::NodeTransitions& tr = node.regular.transitions;
      const mrf::TemplateNode& next = t.node(seg.first_node + j);
      if (i < c) {
        const double into_m = state == 'M' ? tr.mm : (state == 'D' ? tr.dm : tr.im);
        walk(j + 1, i + 1, 'M', cost + into_m + next.match_emissions.score(residue(i)));
      }
      if (state != 'I') {
        walk(j + 1, i, 'D', cost + (state == 'M' ? tr.md : tr.dd));
      }
    }
  };

  const int max_lead = seg.leading_flank ? c : 0;
  for (int lead = 0; lead <= max_lead; ++lead) {
    if (lead < c) {
      walk(1, lead + 1, 'M',
           t.node(seg.first_node).match_emissions.score(residue(lead)));
    }
    walk(1, lead, 'D', 0.0);
  }
  return best;
}

// Re-scores a segment path step by step with the same association the
// recurrence uses ((previous + transition) + emission), so the result must be
// bit-identical to the reported segment score.
inline double rescore_path(const mrf::MrfTemplate& t, const mrf::QuerySequence& q,
                           const mrf::SegmentSpec& seg, const mrf::StatePath& path) {
  double cost = 0.0;
  int residue = seg.first_residue;
  char prev_state = 0;
  int prev_node = 0;
  for (const mrf::PathStep& step : path.steps) {
    switch (step.state) {
      case 'n':
      case 'c':
        ++residue;
        continue;
      case 'g':
        cost += mrf::kImpossibleCostPerResidue;
        ++residue;
        continue;
      default:
        break;
    }
    if (prev_state != 0) {
      const mrf::NodeTransitions& tr =
          (step.state == 'I' ? t.node(step.node) : t.node(prev_node)).regular.transitions;
      switch (step.state) {
        case 'M':
          cost += prev_state == 'M' ? tr.mm : (prev_state == 'D' ? tr.dm : tr.im);
          break;
        case 'D':
          cost += prev_state == 'M' ? tr.md : tr.dd;
          break;
        case 'I':
          cost += prev_state == 'M' ? tr.mi : tr.ii;
          break;
        default:
          break;
      }
    }
    if (step.state == 'M') {
      cost += t.node(step.node).match_emissions.score(q[residue]);
      ++residue;
    } else if (step.state == 'I') {
      cost += t.node(step.node).regular.insert_emissions.score(q[residue]);
      ++residue;
    }
    prev_state = step.state;
    prev_node = step.node;
  }
  return cost;
}

// Direct Viterbi over the whole collapsed model: strand nodes are forced
// matches with free transitions, adjacent-strand gaps charge the impossible
// cost per residue, N-/C-flanks are free loops.  Pair scores are not modeled
// (use pair-free templates) and max_gap must not bind (use max_gap >= query
// length).  This never looks at placements, so agreement with the minimum of
// placement_score over every legal placement is a real consistency check.
inline double full_model_viterbi(const mrf::MrfTemplate& t, const mrf::QuerySequence& q) {
  const int node_count = t.node_count();
  const int n = q.length();
  std::vector<int> strand_of(static_cast<std::size_t>(node_count) + 1, -1);
  for (std::size_t s = 0; s < t.strands.size(); ++s) {
    const mrf::BetaStrand& strand = t.strands[s];
    for (int j = strand.start_node; j <= strand.end_node(); ++j) {
      strand_of[static_cast<std::size_t>(j)] = static_cast<int>(s);
    }
  }
  const auto in_strand = [&](int j) { return strand_of[static_cast<std::size_t>(j)] >= 0; };

  const std::size_t width = static_cast<std::size_t>(n) + 1;
  std::vector<double> vm(width, kInf), vi(width, kInf), vd(width, kInf);
  std::vector<double> pm, pi, pd;

  for (int j = 1; j <= node_count; ++j) {
    pm = vm;
    pi = vi;
    pd = vd;
    std::fill(vm.begin(), vm.end(), kInf);
    std::fill(vi.begin(), vi.end(), kInf);
    std::fill(vd.begin(), vd.end(), kInf);
    const mrf::TemplateNode& node = t.node(j);
    const auto em = [&](int i) { return node.match_emissions.score(q[i - 1]); };

    if (j == 1) {
      // The leading flank eats any prefix for free before the first node.
      for (int i = 1; i <= n; ++i) vm[static_cast<std::size_t>(i)] = em(i);
      if (!in_strand(1)) {
        for (int i = 0; i <= n; ++i) vd[static_cast<std::size_t>(i)] = 0.0;
      }
    } else if (in_strand(j) && strand_of[static_cast<std::size_t>(j)] ==
                                   strand_of[static_cast<std::size_t>(j - 1)]) {
      // Inside a strand: forced match on consecutive residues, free moves.
      for (int i = 1; i <= n; ++i) {
        vm[static_cast<std::size_t>(i)] = pm[static_cast<std::size_t>(i - 1)] + em(i);
      }
    } else if (in_strand(j) && in_strand(j - 1)) {
      // Two strands with no regular node between them: residues in between
      // are a probability-0 event, charged per residue.
      std::vector<double> g(width, kInf);
      g[0] = pm[0];
      for (int i = 1; i <= n; ++i) {
        g[static_cast<std::size_t>(i)] =
            std::min(pm[static_cast<std::size_t>(i)],
                     g[static_cast<std::size_t>(i - 1)] + mrf::kImpossibleCostPerResidue);
      }
      for (int i = 1; i <= n; ++i) {
        vm[static_cast<std::size_t>(i)] = g[static_cast<std::size_t>(i - 1)] + em(i);
      }
    } else if (in_strand(j)) {
      // Segment exit into a strand is free, from any of M/I/D.
      for (int i = 1; i <= n; ++i) {
        const double exit = std::min({pm[static_cast<std::size_t>(i - 1)],
                                      pd[static_cast<std::size_t>(i - 1)],
                                      pi[static_cast<std::size_t>(i - 1)]});
        vm[static_cast<std::size_t>(i)] = exit + em(i);
      }
    } else if (in_strand(j - 1)) {
      // Segment entry right after a strand: pinned, no boundary consumption.
      for (int i = 1; i <= n; ++i) {
        vm[static_cast<std::size_t>(i)] = pm[static_cast<std::size_t>(i - 1)] + em(i);
      }
      for (int i = 0; i <= n; ++i) vd[static_cast<std::size_t>(i)] = pm[static_cast<std::size_t>(i)];
    } else {
      // Regular -> regular: the full Plan7 step.
      const mrf::NodeTransitions& tr = t.node(j - 1).regular.transitions;
      for (int i = 1; i <= n; ++i) {
        vm[static_cast<std::size_t>(i)] =
            std::min({pm[static_cast<std::size_t>(i - 1)] + tr.mm,
                      pd[static_cast<std::size_t>(i - 1)] + tr.dm,
                      pi[static_cast<std::size_t>(i - 1)] + tr.im}) +
            em(i);
      }
      for (int i = 0; i <= n; ++i) {
        vd[static_cast<std::size_t>(i)] = std::min(pm[static_cast<std::size_t>(i)] + tr.md,
                                                   pd[static_cast<std::size_t>(i)] + tr.dd);
      }
    }

    if (!in_strand(j)) {
      // Self-inserts after node j, fed by this node's own M/I rows.
      const mrf::NodeTransitions& tr = node.regular.transitions;
      for (int i = 1; i <= n; ++i) {
        const double ins = node.regular.insert_emissions.score(q[i - 1]);
        vi[static_cast<std::size_t>(i)] =
            std::min(vm[static_cast<std::size_t>(i - 1)] + tr.mi,
                     vi[static_cast<std::size_t>(i - 1)] + tr.ii) +
            ins;
      }
    }
  }

  // The trailing flank eats any suffix for free, so every residue count is a
  // valid exit point.
  double best = kInf;
  for (int i = 0; i <= n; ++i) {
    best = std::min(best, vm[static_cast<std::size_t>(i)]);
    best = std::min(best, vd[static_cast<std::size_t>(i)]);
    best = std::min(best, vi[static_cast<std::size_t>(i)]);
  }
  return best;
}

// Every legal placement by brute force: run an odometer over [0, n]^k and
// keep the vectors that pass a legality check written straight from the
// rules (ordered, non-overlapping, in bounds, inter-strand gaps within
// max_gap when requested).
inline std::vector<std::vector<int>> odometer_placements(const mrf::MrfTemplate& t, int n,
                                                         bool use_max_gap) {
  const int k = t.strand_count();
  std::vector<std::vector<int>> out;
  if (k == 0) {
    out.emplace_back();
    return out;
  }
  const auto legal = [&](const std::vector<int>& starts) {
    int prev_end = 0;
    for (int i = 0; i < k; ++i) {
      const int start = starts[static_cast<std::size_t>(i)];
      if (start < prev_end) return false;
      if (use_max_gap && i > 0 && start - prev_end > t.max_gap) return false;
      prev_end = start + t.strands[static_cast<std::size_t>(i)].length;
    }
    return prev_end <= n;
  };
  std::vector<int> digits(static_cast<std::size_t>(k), 0);
  while (true) {
    if (legal(digits)) out.push_back(digits);
    int pos = k - 1;
    while (pos >= 0 && digits[static_cast<std::size_t>(pos)] == n) {
      digits[static_cast<std::size_t>(pos)] = 0;
      --pos;
    }
    if (pos < 0) break;
    ++digits[static_cast<std::size_t>(pos)];
  }
  return out;
}

// AUC by direct pair counting: the probability that a random positive scores
// strictly lower (better) than a random negative, ties worth half.
inline double auc_by_pairs(const std::vector<mrf::LabeledScore>& scores) {
  double wins = 0.0;
  std::uint64_t pairs = 0;
  for (const mrf::LabeledScore& pos : scores) {
    if (!pos.positive) continue;
    for (const mrf::LabeledScore& neg : scores) {
      if (neg.positive) continue;
      ++pairs;
      if (pos.raw < neg.raw) {
        wins += 1.0;
      } else if (pos.raw == neg.raw) {
        wins += 0.5;
      }
    }
  }
  return wins / static_cast<double>(pairs);
}

// Raw-score samples whose negation follows a Gumbel(mu, beta) distribution,
// matching the orientation the EVD fit expects (raw costs, lower better).
inline std::vector<double> gumbel_raw_samples(int count, double mu, double beta,
                                              std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(std::numeric_limits<double>::min(), 1.0);
  std::vector<double> raw;
  raw.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double g = mu - beta * std::log(-std::log(unit(rng)));
    raw.push_back(-g);
  }
  return raw;
}

// Kolmogorov-Smirnov distance between a sample and Uniform(0,1).
inline double ks_uniform_distance(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const double count = static_cast<double>(values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double lo = static_cast<double>(i) / count;
    const double hi = static_cast<double>(i + 1) / count;
    d = std::max(d, std::max(values[i] - lo, hi - values[i]));
  }
  return d;
}

}  // namespace oracles
