#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mrf/amino.hpp"
#include "mrf/model.hpp"
#include "mrf/rng.hpp"
#include "mrf/score.hpp"

namespace mrf {

enum class SearchStrategy : std::uint8_t { Anneal, Genetic, Local };

// Canonical short names: "sa", "ga", "ls".  strategy_from_name also accepts
// the spelled-out forms "anneal", "genetic", and "local".
const char* strategy_name(SearchStrategy s);
SearchStrategy strategy_from_name(const std::string& name);

struct AnnealConfig {
  int population = 10;      // independent chains
  double t0 = 0.0;          // 0 = auto: max(1, 1% of the best initial score)
  double cooling = 0.99;    // T(gen) = cooling^gen * T0
  int move_width = 8;       // proposal shifts one strand by up to this much
};

struct GeneticConfig {
  int population = 1000;
  int mutation_width = 4;   // per-strand jitter applied to offspring
};

struct LocalConfig {
  int fanout = 10;          // candidates per diversification burst
};

struct SearchConfig {
  SearchStrategy strategy = SearchStrategy::Anneal;
  AnnealConfig anneal;
  GeneticConfig genetic;
  LocalConfig local;
  int init_noise_width = 8;  // jitter around the scaled-template start
};

// At least one limit must be set.  Limits are checked between generations,
// so a generation always runs to completion once started.
struct TerminationPolicy {
  std::optional<std::uint64_t> max_generations;
  std::optional<double> time_limit_seconds;
  std::optional<std::uint64_t> convergence_window;  // generations w/o improvement
};

enum class TerminationReason : std::uint8_t { MaxGenerations, TimeLimit, Converged };

const char* termination_reason_name(TerminationReason r);

struct SearchResult {
  Placement best;
  ScoreBreakdown breakdown;
  std::uint64_t generations = 0;
  std::uint64_t evaluations = 0;  // placements scored, init included
  double seconds = 0.0;
  TerminationReason reason = TerminationReason::MaxGenerations;
};

// Metropolis acceptance for a proposed move from energy e to e2 at
// temperature t: certain when downhill, exp(-(e2-e)/t) otherwise.
double acceptance_probability(double e, double e2, double t);

// Geometric cooling schedule.
double temperature(double t0, double cooling, std::uint64_t generation);

// A placement drawn uniformly at random from the legal set (max_gap
// included).  Throws ValidationError when no legal placement exists.
Placement init_random(const MrfTemplate& t, int query_length, std::mt19937_64& rng);

// Strand starts scaled from template node positions to the query length,
// jittered by +-noise_width, then repaired to legality.
Placement init_scaled(const MrfTemplate& t, int query_length, int noise_width,
                      std::mt19937_64& rng);

// Clamps each start left-to-right into its feasible window; the result is
// always legal when a legal placement exists.
Placement repair(const MrfTemplate& t, int query_length, Placement p);

// Outer-in recombination: the child takes the left half of `a` and the
// right half of `b` (split at ceil(k/2), so an odd middle element comes from
// `a`), then gets repaired.
Placement ga_crossover(const MrfTemplate& t, int query_length, const Placement& a,
                       const Placement& b);

// One genetic-algorithm generation: random pairing of the population yields
// one offspring per member (crossover + per-strand jitter in
// +-mutation_width, repaired), parents and offspring compete, and the best
// |population| placements survive.  Returns the survivors sorted best first
// (score, then lexicographic).  Needs >= 2 legal members.
std::vector<Placement> ga_step(const MrfTemplate& t, const PairScoreTables& tables,
                               const QuerySequence& q, const std::vector<Placement>& population,
                               const GeneticConfig& cfg, std::mt19937_64& rng, int workers = 1);

// One diversification burst: split the strand list at two random points,
// resample every start inside one randomly chosen sublist (uniformly within
// its feasible window, left to right), producing `fanout` candidates; the
// best-scoring candidate comes back.
Placement ls_diversify(const MrfTemplate& t, const PairScoreTables& tables,
                       const QuerySequence& q, const Placement& s, int fanout,
                       std::mt19937_64& rng, int workers = 1);

// Steepest-descent over single-strand shifts of +-1 and +-2; repeats until
// no neighbor improves strictly.  Deterministic.
Placement ls_intensify(const MrfTemplate& t, const PairScoreTables& tables,
                       const QuerySequence& q, const Placement& s, int workers = 1);

// Runs the configured strategy.  Deterministic in (seed, config, policy):
// candidate generation is serial, scoring is parallel, and reduction is
// serial, so worker count never changes the answer.
SearchResult run_search(const MrfTemplate& t, const PairScoreTables& tables,
                        const QuerySequence& q, const SearchConfig& config,
                        const TerminationPolicy& policy, std::uint64_t seed,
                        int workers = 1);

// Canonical textual form of (config, policy), seed excluded.  Calibrated
// p-values stay valid only while searches run under the fingerprint they
// were calibrated with.
std::string search_fingerprint(const SearchConfig& config, const TerminationPolicy& policy);

}  // namespace mrf
