#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "fixtures.hpp"
#include "mrf/errors.hpp"
#include "mrf/model.hpp"
#include "mrf/score.hpp"
#include "oracles.hpp"

namespace {

using fixtures::aa;

// Relative comparison with an absolute floor for scores near zero.
bool close(double a, double b, double tol = 1e-9) {
  const double scale = std::max({1.0, std::abs(a), std::abs(b)});
  return std::abs(a - b) <= tol * scale;
}

mrf::SegmentSpec segment(int first_node, int last_node, int first_residue, int end_residue,
                         bool leading, bool trailing) {
  mrf::SegmentSpec seg;
  seg.first_node = first_node;
  seg.last_node = last_node;
  seg.first_residue = first_residue;
  seg.end_residue = end_residue;
  seg.leading_flank = leading;
  seg.trailing_flank = trailing;
  return seg;
}

mrf::Placement place(std::initializer_list<int> starts) {
  mrf::Placement p;
  p.starts.assign(starts);
  return p;
}

}  // namespace

TEST_CASE("segment alignment matches exhaustive path enumeration") {
  std::mt19937_64 rng(7011);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    // A pure-regular template so any node window is a valid segment.
    mrf::MrfTemplate t = fixtures::make_template(6, {});
    fixtures::randomize_parameters(t, rng);
    const int node_count = t.node_count();

    const int first_node = mrf::uniform_int(rng, 1, node_count);
    const int last_node = mrf::uniform_int(rng, first_node - 1, node_count);
    const int residues = mrf::uniform_int(rng, 0, 6);
    const mrf::QuerySequence q = fixtures::random_query(rng, residues);
    const bool leading = (trial & 1) != 0;
    const bool trailing = (trial & 2) != 0;
    const mrf::SegmentSpec seg =
        segment(first_node, last_node, 0, residues, leading, trailing);

    const double brute = oracles::brute_segment_min(t, q, seg);
    const mrf::SegmentResult got = mrf::viterbi_segment(t, q, seg);
    CHECK_MESSAGE(close(got.score, brute),
                  "nodes [", first_node, ",", last_node, "] residues ", residues,
                  " leading ", leading, " trailing ", trailing, ": dp ", got.score,
                  " brute ", brute);
    CHECK(mrf::viterbi_segment_score(t, q, seg) == got.score);
    ++checked;
  }
  CHECK(checked == 200);
}

TEST_CASE("segment paths re-score to the exact reported value") {
  std::mt19937_64 rng(9902);
  for (int trial = 0; trial < 150; ++trial) {
    mrf::MrfTemplate t = fixtures::make_template(8, {});
    fixtures::randomize_parameters(t, rng);
    const int first_node = mrf::uniform_int(rng, 1, 8);
    const int last_node = mrf::uniform_int(rng, first_node - 1, 8);
    const int residues = mrf::uniform_int(rng, 0, 10);
    const mrf::QuerySequence q = fixtures::random_query(rng, residues);
    const mrf::SegmentSpec seg = segment(first_node, last_node, 0, residues,
                                         (trial & 1) != 0, (trial & 2) != 0);
    const mrf::SegmentResult got = mrf::viterbi_segment(t, q, seg);
    // Bitwise equality: the path replays the same additions in the same order.
    CHECK(oracles::rescore_path(t, q, seg, got.path) == got.score);
  }
}

TEST_CASE("empty node spans have closed-form costs") {
  const mrf::MrfTemplate t = fixtures::make_template(4, {});
  std::mt19937_64 rng(11);
  const mrf::QuerySequence query = fixtures::random_query(rng, 5);

  SUBCASE("leading flank absorbs everything at zero cost") {
    const mrf::SegmentSpec seg = segment(3, 2, 0, 5, true, false);
    const mrf::SegmentResult r = mrf::viterbi_segment(t, query, seg);
    CHECK(r.score == 0.0);
    REQUIRE(r.path.steps.size() == 5);
    for (const mrf::PathStep& s : r.path.steps) CHECK(s.state == 'n');
  }
  SUBCASE("trailing flank absorbs everything at zero cost") {
    const mrf::SegmentSpec seg = segment(3, 2, 1, 4, false, true);
    const mrf::SegmentResult r = mrf::viterbi_segment(t, query, seg);
    CHECK(r.score == 0.0);
    REQUIRE(r.path.steps.size() == 3);
    for (const mrf::PathStep& s : r.path.steps) CHECK(s.state == 'c');
  }
  SUBCASE("pinned empty span charges the impossible-cost rate per residue") {
    const mrf::SegmentSpec seg = segment(3, 2, 0, 4, false, false);
    const mrf::SegmentResult r = mrf::viterbi_segment(t, query, seg);
    CHECK(r.score == 4 * mrf::kImpossibleCostPerResidue);
    REQUIRE(r.path.steps.size() == 4);
    for (const mrf::PathStep& s : r.path.steps) CHECK(s.state == 'g');
  }
  SUBCASE("zero residues cost nothing") {
    const mrf::SegmentSpec seg = segment(3, 2, 2, 2, false, false);
    const mrf::SegmentResult r = mrf::viterbi_segment(t, query, seg);
    CHECK(r.score == 0.0);
    CHECK(r.path.steps.empty());
  }
}

TEST_CASE("exact ties resolve toward match states") {
  // All-zero parameters make every residue-consuming path cost 0; the
  // reported path must still be the all-match diagonal.
  mrf::MrfTemplate t = fixtures::make_template(2, {});
  for (mrf::TemplateNode& n : t.nodes) {
    n.match_emissions = fixtures::flat_emissions(0.0);
    n.regular.insert_emissions = fixtures::flat_emissions(0.0);
    n.regular.transitions = fixtures::flat_transitions(0.0);
  }
  const mrf::QuerySequence q = mrf::make_sequence("q", "AA");
  const mrf::SegmentResult r = mrf::viterbi_segment(t, q, segment(1, 2, 0, 2, false, false));
  CHECK(r.score == 0.0);
  REQUIRE(r.path.steps.size() == 2);
  CHECK(r.path.steps[0] == mrf::PathStep{1, 'M'});
  CHECK(r.path.steps[1] == mrf::PathStep{2, 'M'});
}

TEST_CASE("segment preconditions are validated") {
  const mrf::MrfTemplate t = fixtures::make_template(6, {{3, 2}});
  std::mt19937_64 rng(5);
  const mrf::QuerySequence q = fixtures::random_query(rng, 4);
  CHECK_THROWS_AS(mrf::viterbi_segment(t, q, segment(1, 6, 0, 2, true, true)),
                  mrf::ValidationError);  // crosses the strand at nodes 3-4
  CHECK_THROWS_AS(mrf::viterbi_segment(t, q, segment(1, 2, 0, 9, true, true)),
                  mrf::ValidationError);  // residue span beyond the query
  CHECK_THROWS_AS(mrf::viterbi_segment(t, q, segment(0, 2, 0, 2, true, true)),
                  mrf::ValidationError);  // node span before the template
}

TEST_CASE("placement scores decompose into segments, strands, and pairs") {
  std::mt19937_64 rng(31337);
  const mrf::PairScoreTables tables = fixtures::varied_tables();
  for (int trial = 0; trial < 60; ++trial) {
    const mrf::MrfTemplate t = fixtures::random_template(rng, 3, /*with_pairs=*/true);
    const int k = t.strand_count();
    int strand_residues = 0;
    for (const mrf::BetaStrand& s : t.strands) strand_residues += s.length;
    const int n = strand_residues + mrf::uniform_int(rng, 2, 12);
    const mrf::QuerySequence q = fixtures::random_query(rng, n);

    // Pick a random legal placement by enumerating and sampling.
    std::vector<mrf::Placement> all;
    mrf::enumerate_legal_placements(t, n, [&](const mrf::Placement& p) { all.push_back(p); });
    if (all.empty()) continue;
    const mrf::Placement& p =
        all[static_cast<std::size_t>(mrf::uniform_int(rng, 0, static_cast<int>(all.size()) - 1))];

    const mrf::ScoreBreakdown got = mrf::placement_score(t, tables, q, p);
    REQUIRE(got.segment_scores.size() == static_cast<std::size_t>(k) + 1);
    REQUIRE(got.strand_scores.size() == static_cast<std::size_t>(k));
    REQUIRE(got.pair_scores.size() == t.pairs.size());

    double sum = 0.0;
    for (double v : got.segment_scores) sum += v;
    for (double v : got.strand_scores) sum += v;
    for (double v : got.pair_scores) sum += v;
    CHECK(close(got.total, sum, 1e-12));

    // Strand emissions recomputed directly from the placed residues.
    for (int s = 0; s < k; ++s) {
      const mrf::BetaStrand& strand = t.strands[static_cast<std::size_t>(s)];
      double expect = 0.0;
      for (int pos = 0; pos < strand.length; ++pos) {
        expect += t.node(strand.start_node + pos)
                      .match_emissions.score(q[p.starts[static_cast<std::size_t>(s)] + pos]);
      }
      CHECK(close(got.strand_scores[static_cast<std::size_t>(s)], expect, 1e-12));
    }

    // Pair scores recomputed from the orientation and exposure rules: the
    // later strand's residue is looked up against its already-placed partner.
    for (std::size_t pi = 0; pi < t.pairs.size(); ++pi) {
      const mrf::StrandPair& pair = t.pairs[pi];
      const mrf::BetaStrand& a = t.strands[static_cast<std::size_t>(pair.first)];
      const int sa = p.starts[static_cast<std::size_t>(pair.first)];
      const int sb = p.starts[static_cast<std::size_t>(pair.second)];
      double expect = 0.0;
      for (int pos = 0; pos < a.length; ++pos) {
        const int partner =
            pair.orientation == mrf::Orientation::Parallel ? pos : a.length - 1 - pos;
        expect += mrf::pair_position_score(tables, pair.exposure[static_cast<std::size_t>(pos)],
                                           q[sb + partner], q[sa + pos]);
      }
      CHECK(close(got.pair_scores[pi], expect, 1e-12));
    }
  }
}

TEST_CASE("pair contributions are linear in the per-slot constants") {
  mrf::MrfTemplate t = fixtures::make_template(12, {{2, 3}, {8, 3}});
  fixtures::add_pair(t, 0, 1, mrf::Orientation::Antiparallel, mrf::Exposure::Buried);
  std::mt19937_64 rng(404);
  const mrf::QuerySequence q = fixtures::random_query(rng, 12);
  const mrf::ScoreBreakdown buried3 =
      mrf::placement_score(t, fixtures::constant_tables(0.7, 2.0), q, place({1, 7}));
  CHECK(close(buried3.pair_scores[0], 3 * 0.7, 1e-12));
  t.pairs[0].exposure[1] = mrf::Exposure::Exposed;
  const mrf::ScoreBreakdown mixed =
      mrf::placement_score(t, fixtures::constant_tables(0.7, 2.0), q, place({1, 7}));
  CHECK(close(mixed.pair_scores[0], 2 * 0.7 + 2.0, 1e-12));
}

TEST_CASE("placement legality enforces order, bounds, and max_gap") {
  mrf::MrfTemplate t = fixtures::make_template(14, {{3, 2}, {7, 3}}, /*max_gap=*/4);
  const int n = 20;
  const mrf::PairScoreTables tables = fixtures::constant_tables(1.0, 1.0);
  std::mt19937_64 rng(2);
  const mrf::QuerySequence q = fixtures::random_query(rng, n);

  CHECK(mrf::legal(t, n, place({0, 2})));
  CHECK(mrf::legal(t, n, place({5, 9})));    // gap 2 <= 4
  CHECK(mrf::legal(t, n, place({13, 17})));  // last strand ends exactly at n
  CHECK_FALSE(mrf::legal(t, n, place({3, 2})));   // overlap / reorder
  CHECK_FALSE(mrf::legal(t, n, place({0, 7})));   // gap 5 > max_gap 4
  CHECK_FALSE(mrf::legal(t, n, place({-1, 3}))); // before the sequence
  CHECK_FALSE(mrf::legal(t, n, place({0})));      // wrong arity
  CHECK_FALSE(mrf::legal(t, n, place({16, 18}))); // runs past the end

  // The flanks are unconstrained by max_gap: a first strand far from the
  // start and a last strand far from the end are fine.
  CHECK(mrf::legal(t, n, place({10, 14})));

  CHECK_THROWS_WITH_AS(mrf::placement_score(t, tables, q, place({0, 7})),
                       doctest::Contains("max_gap"), mrf::ValidationError);
  CHECK_THROWS_WITH_AS(mrf::placement_score(t, tables, q, place({3, 2})),
                       doctest::Contains("overlaps"), mrf::ValidationError);
  CHECK_THROWS_WITH_AS(mrf::placement_score(t, tables, q, place({0})),
                       doctest::Contains("starts"), mrf::ValidationError);
  CHECK_THROWS_WITH_AS(mrf::placement_score(t, tables, q, place({16, 18})),
                       doctest::Contains("past the end"), mrf::ValidationError);
}

TEST_CASE("placement counting agrees with direct enumeration") {
  std::mt19937_64 rng(606060);
  for (int trial = 0; trial < 50; ++trial) {
    const bool tight = (trial % 2) == 0;
    const mrf::MrfTemplate t =
        fixtures::random_template(rng, 3, /*with_pairs=*/false, tight ? 3 : 1000);
    const int n = mrf::uniform_int(rng, 0, 14);

    const auto legal_set = oracles::odometer_placements(t, n, /*use_max_gap=*/true);
    const auto loose_set = oracles::odometer_placements(t, n, /*use_max_gap=*/false);
    CHECK(mrf::count_placements(t, n, /*include_max_gap=*/true) == legal_set.size());
    CHECK(mrf::count_placements(t, n) == loose_set.size());

    std::vector<mrf::Placement> enumerated;
    const std::uint64_t visited = mrf::enumerate_legal_placements(
        t, n, [&](const mrf::Placement& p) { enumerated.push_back(p); });
    REQUIRE(visited == enumerated.size());
    REQUIRE(enumerated.size() == legal_set.size());
    for (std::size_t i = 0; i < enumerated.size(); ++i) {
      CHECK(enumerated[i].starts == legal_set[i]);
      CHECK(mrf::legal(t, n, enumerated[i]));
      if (i > 0) CHECK(enumerated[i - 1] < enumerated[i]);  // ascending order
    }
  }
}

TEST_CASE("placement counting closed forms") {
  SUBCASE("two strands of length 2 in a query of 10 give 28 arrangements") {
    const mrf::MrfTemplate t = fixtures::make_template(8, {{2, 2}, {6, 2}});
    CHECK(mrf::count_placements(t, 10) == 28);
    CHECK(mrf::count_placements(t, 10, /*include_max_gap=*/true) == 28);  // max_gap 1000
    std::uint64_t seen = mrf::enumerate_legal_placements(t, 10, [](const mrf::Placement&) {});
    CHECK(seen == 28);
  }
  SUBCASE("no strands leave exactly the empty placement") {
    const mrf::MrfTemplate t = fixtures::make_template(5, {});
    CHECK(mrf::count_placements(t, 9) == 1);
    int count = 0;
    mrf::Placement only;
    mrf::enumerate_legal_placements(t, 9, [&](const mrf::Placement& p) {
      ++count;
      only = p;
    });
    CHECK(count == 1);
    CHECK(only.starts.empty());
  }
  SUBCASE("too-short queries admit nothing") {
    const mrf::MrfTemplate t = fixtures::make_template(8, {{2, 3}, {6, 3}});
    CHECK(mrf::count_placements(t, 5) == 0);
    CHECK(mrf::count_placements(t, 5, /*include_max_gap=*/true) == 0);
  }
}

TEST_CASE("exhaustive optimum equals the enumeration minimum") {
  std::mt19937_64 rng(80818);
  const mrf::PairScoreTables tables = fixtures::varied_tables();
  for (int trial = 0; trial < 40; ++trial) {
    const mrf::MrfTemplate t =
        fixtures::random_template(rng, 3, /*with_pairs=*/true, (trial % 2) ? 4 : 1000);
    int strand_residues = 0;
    for (const mrf::BetaStrand& s : t.strands) strand_residues += s.length;
    const int n = strand_residues + mrf::uniform_int(rng, 1, 8);
    const mrf::QuerySequence q = fixtures::random_query(rng, n);

    double best = std::numeric_limits<double>::infinity();
    mrf::Placement best_placement;
    std::uint64_t total = mrf::enumerate_legal_placements(t, n, [&](const mrf::Placement& p) {
      const double s = mrf::placement_score(t, tables, q, p).total;
      if (s < best) {
        best = s;
        best_placement = p;
      }
    });
    if (total == 0) {
      CHECK_THROWS_AS(mrf::exhaustive_optimum(t, tables, q), mrf::ValidationError);
      continue;
    }
    const mrf::ExhaustiveResult got = mrf::exhaustive_optimum(t, tables, q);
    CHECK(got.candidates == total);
    CHECK(close(got.breakdown.total, best));
    CHECK(got.placement == best_placement);

    // Worker count cannot change the result (scores bitwise identical).
    const mrf::ExhaustiveResult par = mrf::exhaustive_optimum(t, tables, q, 10'000'000, 4);
    CHECK(par.placement == got.placement);
    CHECK(par.breakdown.total == got.breakdown.total);
  }
}

TEST_CASE("exhaustive ties pick the lexicographically smallest placement") {
  // Flat emissions + constant pair tables make every legal placement score
  // identically.
  mrf::MrfTemplate t = fixtures::make_template(8, {{2, 2}, {6, 2}});
  fixtures::add_pair(t, 0, 1);
  const mrf::PairScoreTables tables = fixtures::constant_tables(1.0, 1.0);
  std::mt19937_64 rng(99);
  const mrf::QuerySequence q = fixtures::random_query(rng, 9);

  mrf::Placement first;
  bool have_first = false;
  mrf::enumerate_legal_placements(t, 9, [&](const mrf::Placement& p) {
    if (!have_first) {
      first = p;
      have_first = true;
    }
  });
  REQUIRE(have_first);
  const mrf::ExhaustiveResult got = mrf::exhaustive_optimum(t, tables, q);
  CHECK(got.placement == first);
}

TEST_CASE("exhaustive search refuses oversized placement spaces") {
  const mrf::MrfTemplate t = fixtures::make_template(8, {{2, 2}, {6, 2}});
  const mrf::PairScoreTables tables = fixtures::constant_tables(1.0, 1.0);
  std::mt19937_64 rng(1);
  const mrf::QuerySequence q = fixtures::random_query(rng, 10);
  CHECK_THROWS_WITH_AS(mrf::exhaustive_optimum(t, tables, q, /*cap=*/10),
                       doctest::Contains("above the exhaustive cap"), mrf::ValidationError);
}

TEST_CASE("pair-free placement optimum equals a whole-model alignment") {
  // With no pair potentials and a non-binding max_gap bound, minimizing the
  // segment decomposition over all placements is exactly a full Viterbi pass
  // over the model with strands pinned to matches.  The oracle implements the
  // latter directly as one DP over the collapsed model.
  std::mt19937_64 rng(424242);
  const mrf::PairScoreTables tables = fixtures::constant_tables(1.0, 1.0);
  int compared = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const mrf::MrfTemplate t = fixtures::random_template(rng, 3, /*with_pairs=*/false);
    int strand_residues = 0;
    for (const mrf::BetaStrand& s : t.strands) strand_residues += s.length;
    const int n = std::min(30, strand_residues + mrf::uniform_int(rng, 1, 10));
    if (n < strand_residues) continue;
    const mrf::QuerySequence q = fixtures::random_query(rng, n);
    if (mrf::count_placements(t, n, true) == 0) continue;

    const mrf::ExhaustiveResult got = mrf::exhaustive_optimum(t, tables, q);
    const double direct = oracles::full_model_viterbi(t, q);
    CHECK_MESSAGE(close(got.breakdown.total, direct), "trial ", trial, ": placement min ",
                  got.breakdown.total, " vs whole-model ", direct);
    ++compared;
  }
  CHECK(compared >= 40);
}
