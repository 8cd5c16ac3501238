#include "mrf/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <sstream>

#include "mrf/errors.hpp"

namespace mrf {
namespace {

bool finite_nonnegative(double v) { return std::isfinite(v) && v >= 0.0; }

void check_emissions(const EmissionTable& table, const std::string& what, int node_index,
                     std::vector<std::string>& problems) {
  for (int i = 0; i < kAlphabetSize; ++i) {
    if (!std::isfinite(table.scores[static_cast<std::size_t>(i)])) {
      std::ostringstream msg;
      msg << "node " << node_index << ": " << what << " score for "
          << kResidueCodes[i] << " is not finite";
      problems.push_back(msg.str());
      return;
    }
  }
  double bg_total = 0.0;
  for (int i = 0; i < kStandardResidues; ++i) {
    const double f = table.background[static_cast<std::size_t>(i)];
    if (!(f > 0.0) || !std::isfinite(f)) {
      std::ostringstream msg;
      msg << "node " << node_index << ": " << what << " background for "
          << kResidueCodes[i] << " is not positive";
      problems.push_back(msg.str());
      return;
    }
    bg_total += f;
  }
  if (std::abs(bg_total - 1.0) > 1e-6) {
    std::ostringstream msg;
    msg << "node " << node_index << ": " << what
        << " background does not sum to 1 over the standard residues";
    problems.push_back(msg.str());
  }
}

}  // namespace

int interleave(const MrfTemplate& t, const StrandPair& pair) {
  const int k = t.strand_count();
  if (pair.first < 0 || pair.first >= k || pair.second < 0 || pair.second >= k) {
    throw ValidationError("pair references unknown strand id (valid ids 0.." +
                          std::to_string(k - 1) + ")");
  }
  return std::abs(pair.second - pair.first);
}

int max_interleave(const MrfTemplate& t) {
  int best = 0;
  for (const StrandPair& p : t.pairs) best = std::max(best, interleave(t, p));
  return best;
}

MrfTemplate apply_interleave_filter(const MrfTemplate& t, int threshold) {
  MrfTemplate out = t;
  out.pairs.clear();
  for (const StrandPair& p : t.pairs) {
    if (interleave(t, p) <= threshold) out.pairs.push_back(p);
  }

  std::vector<bool> keep_strand(static_cast<std::size_t>(t.strand_count()), false);
  for (const StrandPair& p : out.pairs) {
    keep_strand[static_cast<std::size_t>(p.first)] = true;
    keep_strand[static_cast<std::size_t>(p.second)] = true;
  }

  // Demote strands that lost every pair: their nodes fall back to plain
  // Plan7 behaviour using the params that were retained all along.
  std::vector<int> new_id(static_cast<std::size_t>(t.strand_count()), -1);
  std::vector<BetaStrand> kept;
  for (const BetaStrand& s : t.strands) {
    if (keep_strand[static_cast<std::size_t>(s.id)]) {
      new_id[static_cast<std::size_t>(s.id)] = static_cast<int>(kept.size());
      BetaStrand renumbered = s;
      renumbered.id = static_cast<int>(kept.size());
      kept.push_back(renumbered);
    } else {
      for (int n = s.start_node; n <= s.end_node(); ++n) {
        out.nodes[static_cast<std::size_t>(n - 1)].kind = NodeKind::Regular;
      }
    }
  }
  out.strands = std::move(kept);
  for (StrandPair& p : out.pairs) {
    p.first = new_id[static_cast<std::size_t>(p.first)];
    p.second = new_id[static_cast<std::size_t>(p.second)];
  }
  return out;
}

double pair_position_score(const PairScoreTables& tables, Exposure exposure,
                           AminoAcid later, AminoAcid earlier) {
  return tables.score(exposure, later, earlier);
}

std::vector<std::string> validate(const MrfTemplate& t) {
  std::vector<std::string> problems;

  for (int i = 0; i < t.node_count(); ++i) {
    const TemplateNode& node = t.nodes[static_cast<std::size_t>(i)];
    if (node.index != i + 1) {
      problems.push_back("node at offset " + std::to_string(i) + " has index " +
                         std::to_string(node.index) + ", expected " + std::to_string(i + 1));
    }
    check_emissions(node.match_emissions, "match emission", i + 1, problems);
    check_emissions(node.regular.insert_emissions, "insert emission", i + 1, problems);
    const NodeTransitions& tr = node.regular.transitions;
    for (double v : {tr.mm, tr.mi, tr.md, tr.im, tr.ii, tr.dm, tr.dd}) {
      if (!finite_nonnegative(v)) {
        problems.push_back("node " + std::to_string(i + 1) +
                           ": transition cost is negative or non-finite");
        break;
      }
    }
  }

  if (t.max_gap < 0) problems.push_back("max_gap is negative");

  // Strand bookkeeping: ordinal ids, ordered, non-overlapping, length >= 2,
  // and exact agreement between strand membership and StrandMatch kinds.
  std::vector<int> owner(static_cast<std::size_t>(t.node_count()), -1);
  int prev_end = 0;
  for (int i = 0; i < t.strand_count(); ++i) {
    const BetaStrand& s = t.strands[static_cast<std::size_t>(i)];
    if (s.id != i) {
      problems.push_back("strand at offset " + std::to_string(i) + " has id " +
                         std::to_string(s.id) + ", expected ordinal " + std::to_string(i));
    }
    if (s.length < 2) {
      problems.push_back("strand " + std::to_string(s.id) + " has length " +
                         std::to_string(s.length) + " (< 2)");
      continue;
    }
    if (s.start_node < 1 || s.end_node() > t.node_count()) {
      problems.push_back("strand " + std::to_string(s.id) + " spans nodes outside the template");
      continue;
    }
    if (s.start_node <= prev_end) {
      problems.push_back("strand " + std::to_string(s.id) +
                         " overlaps or precedes the previous strand");
    }
    prev_end = s.end_node();
    for (int n = s.start_node; n <= s.end_node(); ++n) {
      if (owner[static_cast<std::size_t>(n - 1)] != -1) {
        problems.push_back("node " + std::to_string(n) + " belongs to two strands");
      }
      owner[static_cast<std::size_t>(n - 1)] = s.id;
      if (t.node(n).kind != NodeKind::StrandMatch) {
        problems.push_back("node " + std::to_string(n) + " is inside strand " +
                           std::to_string(s.id) + " but is not a StrandMatch node");
      }
    }
  }
  for (int n = 1; n <= t.node_count(); ++n) {
    if (t.node(n).kind == NodeKind::StrandMatch && owner[static_cast<std::size_t>(n - 1)] == -1) {
      problems.push_back("node " + std::to_string(n) +
                         " is StrandMatch but belongs to no strand");
    }
  }

  for (std::size_t i = 0; i < t.pairs.size(); ++i) {
    const StrandPair& p = t.pairs[i];
    if (p.first < 0 || p.first >= t.strand_count() || p.second < 0 ||
        p.second >= t.strand_count()) {
      problems.push_back("pair " + std::to_string(i) + " references an unknown strand id");
      continue;
    }
    if (p.first >= p.second) {
      problems.push_back("pair " + std::to_string(i) +
                         " must list the earlier strand first (first < second)");
      continue;
    }
    const BetaStrand& a = t.strands[static_cast<std::size_t>(p.first)];
    const BetaStrand& b = t.strands[static_cast<std::size_t>(p.second)];
    if (a.length != b.length) {
      problems.push_back("pair " + std::to_string(i) + " has unequal paired lengths (" +
                         std::to_string(a.length) + " vs " + std::to_string(b.length) + ")");
    }
    if (static_cast<int>(p.exposure.size()) != a.length) {
      problems.push_back("pair " + std::to_string(i) + " has " +
                         std::to_string(p.exposure.size()) + " exposure entries for a strand of length " +
                         std::to_string(a.length));
    }
  }

  return problems;
}

void validate_or_throw(const MrfTemplate& t) {
  const auto problems = validate(t);
  if (problems.empty()) return;
  std::string msg = "invalid template";
  if (!t.name.empty()) msg += " '" + t.name + "'";
  msg += ":";
  for (const std::string& p : problems) msg += "\n  - " + p;
  throw ValidationError(msg);
}

}  // namespace mrf
