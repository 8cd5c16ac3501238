#include "mrf/search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "mrf/errors.hpp"
#include "mrf/parallel.hpp"

namespace mrf {
namespace {

struct Layout {
  std::vector<int> lengths;
  std::vector<int> suffix;  // suffix[i] = strand residues from strand i onward

  explicit Layout(const MrfTemplate& t) {
    lengths.reserve(t.strands.size());
    for (const BetaStrand& s : t.strands) lengths.push_back(s.length);
    suffix.assign(lengths.size() + 1, 0);
    for (int i = static_cast<int>(lengths.size()) - 1; i >= 0; --i) {
      suffix[static_cast<std::size_t>(i)] =
          suffix[static_cast<std::size_t>(i) + 1] + lengths[static_cast<std::size_t>(i)];
    }
  }

  void require_feasible(int query_length) const {
    if (suffix[0] > query_length) {
      throw InfeasibleError("query of length " + std::to_string(query_length) +
                            " cannot hold " + std::to_string(suffix[0]) +
                            " strand residues");
    }
  }
};

// Tracks the best (score, placement) pair seen so far; lexicographic
// placement order breaks score ties so the outcome never depends on
// evaluation order.
struct BestTracker {
  bool found = false;
  double score = 0.0;
  Placement placement;

  bool offer(double s, const Placement& p) {
    if (!found || s < score || (s == score && p < placement)) {
      found = true;
      score = s;
      placement = p;
      return true;
    }
    return false;
  }
};

double score_of(const MrfTemplate& t, const PairScoreTables& tables, const QuerySequence& q,
                const Placement& p) {
  return placement_score(t, tables, q, p).total;
}

// Scores candidates[i] into scores[i] on `workers` threads.
void score_batch(const MrfTemplate& t, const PairScoreTables& tables, const QuerySequence& q,
                 const std::vector<Placement>& candidates, std::vector<double>& scores,
                 int workers) {
  scores.assign(candidates.size(), 0.0);
  parallel_for(candidates.size(), workers, [&](std::size_t i) {
    scores[i] = score_of(t, tables, q, candidates[i]);
  });
}

void check_policy(const TerminationPolicy& policy) {
  if (!policy.max_generations && !policy.time_limit_seconds && !policy.convergence_window) {
    throw ValidationError("termination policy must set at least one limit");
  }
  if (policy.time_limit_seconds && *policy.time_limit_seconds <= 0.0) {
    throw ValidationError("time limit must be positive");
  }
  if (policy.convergence_window && *policy.convergence_window == 0) {
    throw ValidationError("convergence window must be at least 1 generation");
  }
}

void check_config(const SearchConfig& config) {
  if (config.init_noise_width < 0) throw ValidationError("init noise width must be >= 0");
  switch (config.strategy) {
    case SearchStrategy::Anneal:
      if (config.anneal.population < 1) throw ValidationError("anneal population must be >= 1");
      if (config.anneal.cooling <= 0.0 || config.anneal.cooling > 1.0) {
        throw ValidationError("cooling factor must be in (0, 1]");
      }
      if (config.anneal.t0 < 0.0) throw ValidationError("initial temperature must be >= 0");
      if (config.anneal.move_width < 0) throw ValidationError("move width must be >= 0");
      break;
    case SearchStrategy::Genetic:
      if (config.genetic.population < 2) throw ValidationError("population must be >= 2");
      if (config.genetic.mutation_width < 0) {
        throw ValidationError("mutation width must be >= 0");
      }
      break;
    case SearchStrategy::Local:
      if (config.local.fanout < 1) throw ValidationError("fanout must be >= 1");
      break;
  }
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

// Decides, between generations, whether the search is done.
struct Terminator {
  const TerminationPolicy& policy;
  const Stopwatch& clock;

  bool due(std::uint64_t generations, std::uint64_t since_improvement,
           TerminationReason& reason) const {
    if (policy.max_generations && generations >= *policy.max_generations) {
      reason = TerminationReason::MaxGenerations;
      return true;
    }
    if (policy.time_limit_seconds && clock.seconds() >= *policy.time_limit_seconds) {
      reason = TerminationReason::TimeLimit;
      return true;
    }
    if (policy.convergence_window && since_improvement >= *policy.convergence_window) {
      reason = TerminationReason::Converged;
      return true;
    }
    return false;
  }
};

// Feasible window for moving strand `i` while every other strand stays put.
// Bounds come from the neighbors' ends, the max-gap rule on both sides, and
// the sequence boundaries.
struct Window {
  int lo = 0;
  int hi = -1;
};

Window move_window(const MrfTemplate& t, int query_length, const std::vector<int>& starts,
                   int i) {
  const int k = static_cast<int>(starts.size());
  const int len = t.strands[static_cast<std::size_t>(i)].length;
  Window w;
  if (i > 0) {
    const int prev_end = starts[static_cast<std::size_t>(i - 1)] +
                         t.strands[static_cast<std::size_t>(i - 1)].length;
    w.lo = prev_end;
    w.hi = prev_end + t.max_gap;
  } else {
    w.lo = 0;
    w.hi = query_length - len;
  }
  if (i + 1 < k) {
    const int next_start = starts[static_cast<std::size_t>(i + 1)];
    w.lo = std::max(w.lo, next_start - len - t.max_gap);
    w.hi = std::min(w.hi, next_start - len);
  } else {
    w.hi = std::min(w.hi, query_length - len);
  }
  return w;
}

}  // namespace

const char* strategy_name(SearchStrategy s) {
  switch (s) {
    case SearchStrategy::Anneal:
      return "sa";
    case SearchStrategy::Genetic:
      return "ga";
    case SearchStrategy::Local:
      return "ls";
  }
  return "unknown";
}

SearchStrategy strategy_from_name(const std::string& name) {
  if (name == "sa" || name == "anneal") return SearchStrategy::Anneal;
  if (name == "ga" || name == "genetic") return SearchStrategy::Genetic;
  if (name == "ls" || name == "local") return SearchStrategy::Local;
  throw ValidationError("unknown search strategy '" + name + "' (expected sa, ga, or ls)");
}

const char* termination_reason_name(TerminationReason r) {
  switch (r) {
    case TerminationReason::MaxGenerations:
      return "max-generations";
    case TerminationReason::TimeLimit:
      return "time-limit";
    case TerminationReason::Converged:
      return "converged";
  }
  return "unknown";
}

double acceptance_probability(double e, double e2, double t) {
  if (e2 < e) return 1.0;
  if (t <= 0.0) return e2 == e ? 1.0 : 0.0;
  return std::exp(-(e2 - e) / t);
}

double temperature(double t0, double cooling, std::uint64_t generation) {
  return t0 * std::pow(cooling, static_cast<double>(generation));
}

Placement repair(const MrfTemplate& t, int query_length, Placement p) {
  const Layout layout(t);
  const int k = static_cast<int>(layout.lengths.size());
  if (static_cast<int>(p.starts.size()) != k) {
    throw ValidationError("placement has the wrong number of strands");
  }
  layout.require_feasible(query_length);
  int prev_end = 0;
  for (int i = 0; i < k; ++i) {
    int lo = prev_end;
    int hi = query_length - layout.suffix[static_cast<std::size_t>(i)];
    if (i > 0) hi = std::min(hi, prev_end + t.max_gap);
    // hi >= lo by induction: the previous start respected its own bound.
    int& start = p.starts[static_cast<std::size_t>(i)];
    start = std::clamp(start, lo, hi);
    prev_end = start + layout.lengths[static_cast<std::size_t>(i)];
  }
  return p;
}

Placement init_random(const MrfTemplate& t, int query_length, std::mt19937_64& rng) {
  const Layout layout(t);
  const int k = static_cast<int>(layout.lengths.size());
  layout.require_feasible(query_length);
  if (k == 0) return Placement{};

  // w[i][p] = number of legal ways to place strands i.. with strand i at p.
  // Sampling strand-by-strand proportionally to these counts is exactly
  // uniform over the legal set.
  const std::size_t slots = static_cast<std::size_t>(query_length) + 1;
  std::vector<std::vector<double>> w(static_cast<std::size_t>(k),
                                     std::vector<double>(slots, 0.0));
  const auto hi_start = [&](int strand) {
    return query_length - layout.suffix[static_cast<std::size_t>(strand)];
  };
  for (int p = 0; p <= hi_start(k - 1); ++p) {
    w[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(p)] = 1.0;
  }
  for (int i = k - 2; i >= 0; --i) {
    std::vector<double> tail(slots + 1, 0.0);  // tail[p] = sum of w[i+1][p..]
    for (int p = static_cast<int>(slots) - 1; p >= 0; --p) {
      tail[static_cast<std::size_t>(p)] = tail[static_cast<std::size_t>(p) + 1] +
                                          w[static_cast<std::size_t>(i + 1)][static_cast<std::size_t>(p)];
    }
    const int len = layout.lengths[static_cast<std::size_t>(i)];
    for (int p = 0; p <= hi_start(i); ++p) {
      const int lo = p + len;
      const int hi = std::min(hi_start(i + 1), lo + t.max_gap);
      if (hi < lo) continue;
      w[static_cast<std::size_t>(i)][static_cast<std::size_t>(p)] =
          tail[static_cast<std::size_t>(lo)] - tail[static_cast<std::size_t>(hi) + 1];
    }
  }

  Placement out;
  out.starts.reserve(static_cast<std::size_t>(k));
  int lo = 0;
  int hi = hi_start(0);
  for (int i = 0; i < k; ++i) {
    double total = 0.0;
    for (int p = lo; p <= hi; ++p) {
      total += w[static_cast<std::size_t>(i)][static_cast<std::size_t>(p)];
    }
    if (!(total > 0.0) || !std::isfinite(total)) {
      throw ValidationError("placement space defeats uniform sampling (count " +
                            std::to_string(total) + ")");
    }
    double u = uniform_real(rng) * total;
    int chosen = hi;
    for (int p = lo; p <= hi; ++p) {
      u -= w[static_cast<std::size_t>(i)][static_cast<std::size_t>(p)];
      if (u <= 0.0) {
        chosen = p;
        break;
      }
    }
    out.starts.push_back(chosen);
    if (i + 1 < k) {
      lo = chosen + layout.lengths[static_cast<std::size_t>(i)];
      hi = std::min(hi_start(i + 1), lo + t.max_gap);
    }
  }
  return out;
}

Placement init_scaled(const MrfTemplate& t, int query_length, int noise_width,
                      std::mt19937_64& rng) {
  const Layout layout(t);
  const int k = static_cast<int>(layout.lengths.size());
  layout.require_feasible(query_length);
  if (k == 0) return Placement{};

  // Map each strand's share of non-strand template nodes onto the query's
  // non-strand residues, so flanks and loops stretch proportionally.
  const int strand_total = layout.suffix[0];
  const int node_total = t.node_count();
  const double scale =
      node_total > strand_total
          ? static_cast<double>(query_length - strand_total) /
                static_cast<double>(node_total - strand_total)
          : 1.0;

  Placement p;
  p.starts.reserve(static_cast<std::size_t>(k));
  int strand_prefix = 0;
  for (int i = 0; i < k; ++i) {
    const BetaStrand& s = t.strands[static_cast<std::size_t>(i)];
    const int loop_nodes = s.start_node - 1 - strand_prefix;
    const int noise = noise_width > 0 ? uniform_int(rng, -noise_width, noise_width) : 0;
    const double scaled = std::round(static_cast<double>(loop_nodes) * scale);
    p.starts.push_back(static_cast<int>(scaled) + strand_prefix + noise);
    strand_prefix += s.length;
  }
  return repair(t, query_length, std::move(p));
}

Placement ga_crossover(const MrfTemplate& t, int query_length, const Placement& a,
                       const Placement& b) {
  const int k = t.strand_count();
  if (static_cast<int>(a.starts.size()) != k || static_cast<int>(b.starts.size()) != k) {
    throw ValidationError("crossover parents have the wrong number of strands");
  }
  Placement child;
  child.starts.reserve(static_cast<std::size_t>(k));
  const int split = (k + 1) / 2;
  for (int i = 0; i < k; ++i) {
    child.starts.push_back(i < split ? a.starts[static_cast<std::size_t>(i)]
                                     : b.starts[static_cast<std::size_t>(i)]);
  }
  return repair(t, query_length, std::move(child));
}

namespace {

struct EvaluatedPlacement {
  Placement placement;
  double score = 0.0;
};

// One genetic generation over an already-scored population: random pairing
// (shuffle + consecutive mates, odd straggler mates the front) produces one
// offspring per member, each jittered within +-mutation_width and repaired;
// parents and offspring then compete and the best |population| survive,
// sorted best first.  Pairing and mutation draw serially from `rng` so only
// scoring runs concurrently.  Returns the number of placements scored.
std::uint64_t ga_generation(const MrfTemplate& t, const PairScoreTables& tables,
                            const QuerySequence& q, const GeneticConfig& cfg,
                            std::mt19937_64& rng, int workers,
                            std::vector<Placement>& population, std::vector<double>& fitness,
                            BestTracker& best, bool& improved) {
  const int pop_size = static_cast<int>(population.size());
  const int k = t.strand_count();

  std::vector<int> order(static_cast<std::size_t>(pop_size));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<Placement> offspring;
  offspring.reserve(static_cast<std::size_t>(pop_size));
  for (int j = 0; j + 1 < pop_size; j += 2) {
    const Placement& a = population[static_cast<std::size_t>(order[static_cast<std::size_t>(j)])];
    const Placement& b =
        population[static_cast<std::size_t>(order[static_cast<std::size_t>(j + 1)])];
    offspring.push_back(ga_crossover(t, q.length(), a, b));
    offspring.push_back(ga_crossover(t, q.length(), b, a));
  }
  if (pop_size % 2 == 1) {
    const Placement& a =
        population[static_cast<std::size_t>(order[static_cast<std::size_t>(pop_size - 1)])];
    const Placement& b = population[static_cast<std::size_t>(order[0])];
    offspring.push_back(ga_crossover(t, q.length(), a, b));
  }

  if (cfg.mutation_width > 0 && k > 0) {
    for (Placement& p : offspring) {
      for (int i = 0; i < k; ++i) {
        p.starts[static_cast<std::size_t>(i)] +=
            uniform_int(rng, -cfg.mutation_width, cfg.mutation_width);
      }
      p = repair(t, q.length(), std::move(p));
    }
  }

  std::vector<double> offspring_fitness;
  score_batch(t, tables, q, offspring, offspring_fitness, workers);

  improved = false;
  for (std::size_t i = 0; i < offspring.size(); ++i) {
    if (best.offer(offspring_fitness[i], offspring[i])) improved = true;
  }

  std::vector<EvaluatedPlacement> pool;
  pool.reserve(population.size() + offspring.size());
  for (std::size_t i = 0; i < population.size(); ++i) {
    pool.push_back(EvaluatedPlacement{std::move(population[i]), fitness[i]});
  }
  for (std::size_t i = 0; i < offspring.size(); ++i) {
    pool.push_back(EvaluatedPlacement{std::move(offspring[i]), offspring_fitness[i]});
  }
  std::sort(pool.begin(), pool.end(),
            [](const EvaluatedPlacement& a, const EvaluatedPlacement& b) {
              if (a.score != b.score) return a.score < b.score;
              return a.placement < b.placement;
            });
  population.clear();
  fitness.clear();
  for (int i = 0; i < pop_size; ++i) {
    population.push_back(std::move(pool[static_cast<std::size_t>(i)].placement));
    fitness.push_back(pool[static_cast<std::size_t>(i)].score);
  }
  return offspring_fitness.size();
}

struct DiversifyOutcome {
  EvaluatedPlacement best;
  std::uint64_t evaluations = 0;
};

// Resamples one randomly chosen sublist of strands, fanout times, and keeps
// the cheapest candidate.  Each resampled start is drawn uniformly from the
// window that keeps the rest of the placement completable: ahead lie the
// sublist's remaining strands and then the first untouched strand (or the
// sequence end), and the max-gap rule must hold across all of them.
DiversifyOutcome diversify(const MrfTemplate& t, const PairScoreTables& tables,
                           const QuerySequence& q, const Placement& s, int fanout,
                           std::mt19937_64& rng, int workers) {
  const Layout layout(t);
  const int k = static_cast<int>(layout.lengths.size());
  const int b1 = uniform_int(rng, 0, k);
  const int b2 = uniform_int(rng, 0, k);
  const int begin = std::min(b1, b2);
  const int end = std::max(b1, b2);
  const int pick = uniform_int(rng, 0, 2);
  const int sub_begin = pick == 0 ? 0 : (pick == 1 ? begin : end);
  const int sub_end = pick == 0 ? begin : (pick == 1 ? end : k);

  std::vector<Placement> candidates;
  candidates.reserve(static_cast<std::size_t>(fanout));
  for (int c = 0; c < fanout; ++c) {
    Placement p = s;
    for (int i = sub_begin; i < sub_end; ++i) {
      int remaining = 0;  // strand residues still to place inside the sublist
      for (int j = i; j < sub_end; ++j) remaining += layout.lengths[static_cast<std::size_t>(j)];

      int lo;
      int hi;
      const int prev_end =
          i == 0 ? 0
                 : p.starts[static_cast<std::size_t>(i - 1)] +
                       layout.lengths[static_cast<std::size_t>(i - 1)];
      if (sub_end < k) {
        const int anchor = s.starts[static_cast<std::size_t>(sub_end)];
        const int gaps = sub_end - i;
        lo = std::max(prev_end, anchor - remaining - gaps * t.max_gap);
        hi = anchor - remaining;
      } else {
        lo = prev_end;
        hi = q.length() - layout.suffix[static_cast<std::size_t>(i)];
      }
      if (i > 0) hi = std::min(hi, prev_end + t.max_gap);
      if (lo > hi) {
        // Unreachable while s is legal; guards the distribution's contract.
        throw Error("internal: empty resampling window during diversification");
      }
      p.starts[static_cast<std::size_t>(i)] = uniform_int(rng, lo, hi);
    }
    candidates.push_back(std::move(p));
  }

  std::vector<double> scores;
  score_batch(t, tables, q, candidates, scores, workers);
  BestTracker best;
  for (std::size_t i = 0; i < candidates.size(); ++i) best.offer(scores[i], candidates[i]);

  DiversifyOutcome out;
  out.best.placement = best.placement;
  out.best.score = best.score;
  out.evaluations = candidates.size();
  return out;
}

struct IntensifyOutcome {
  EvaluatedPlacement best;
  std::uint64_t evaluations = 0;
};

IntensifyOutcome intensify(const MrfTemplate& t, const PairScoreTables& tables,
                           const QuerySequence& q, const Placement& s, double s_score,
                           int workers) {
  IntensifyOutcome out;
  out.best.placement = s;
  out.best.score = s_score;
  const int k = t.strand_count();
  while (true) {
    std::vector<Placement> neighbors;
    neighbors.reserve(static_cast<std::size_t>(k) * 4);
    for (int i = 0; i < k; ++i) {
      for (int delta : {1, -1, 2, -2}) {
        Placement p = out.best.placement;
        p.starts[static_cast<std::size_t>(i)] += delta;
        if (legal(t, q.length(), p)) neighbors.push_back(std::move(p));
      }
    }
    if (neighbors.empty()) break;
    std::vector<double> scores;
    score_batch(t, tables, q, neighbors, scores, workers);
    out.evaluations += neighbors.size();
    BestTracker best;
    for (std::size_t i = 0; i < neighbors.size(); ++i) best.offer(scores[i], neighbors[i]);
    if (best.score < out.best.score) {
      out.best.placement = best.placement;
      out.best.score = best.score;
    } else {
      break;
    }
  }
  return out;
}

}  // namespace

Placement ls_diversify(const MrfTemplate& t, const PairScoreTables& tables,
                       const QuerySequence& q, const Placement& s, int fanout,
                       std::mt19937_64& rng, int workers) {
  if (fanout < 1) throw ValidationError("fanout must be >= 1");
  if (!legal(t, q.length(), s)) throw ValidationError("diversification needs a legal start");
  return diversify(t, tables, q, s, fanout, rng, workers).best.placement;
}

Placement ls_intensify(const MrfTemplate& t, const PairScoreTables& tables,
                       const QuerySequence& q, const Placement& s, int workers) {
  if (!legal(t, q.length(), s)) throw ValidationError("intensification needs a legal start");
  return intensify(t, tables, q, s, score_of(t, tables, q, s), workers).best.placement;
}

std::vector<Placement> ga_step(const MrfTemplate& t, const PairScoreTables& tables,
                               const QuerySequence& q, const std::vector<Placement>& population,
                               const GeneticConfig& cfg, std::mt19937_64& rng, int workers) {
  if (population.size() < 2) throw ValidationError("genetic step needs a population of >= 2");
  if (cfg.mutation_width < 0) throw ValidationError("mutation width must be >= 0");
  for (const Placement& p : population) {
    if (!legal(t, q.length(), p)) throw ValidationError("genetic step needs legal placements");
  }
  std::vector<Placement> pop = population;
  std::vector<double> fitness;
  score_batch(t, tables, q, pop, fitness, workers);
  BestTracker best;
  bool improved = false;
  ga_generation(t, tables, q, cfg, rng, workers, pop, fitness, best, improved);
  return pop;
}

namespace {

SearchResult finish(const BestTracker& best, std::uint64_t generations,
                    std::uint64_t evaluations, const Stopwatch& clock,
                    TerminationReason reason, const MrfTemplate& t,
                    const PairScoreTables& tables, const QuerySequence& q) {
  SearchResult res;
  res.best = best.placement;
  res.breakdown = placement_score(t, tables, q, best.placement);
  res.generations = generations;
  res.evaluations = evaluations;
  res.seconds = clock.seconds();
  res.reason = reason;
  return res;
}

SearchResult run_anneal(const MrfTemplate& t, const PairScoreTables& tables,
                        const QuerySequence& q, const SearchConfig& config,
                        const TerminationPolicy& policy, const RandomSource& source,
                        int workers) {
  const AnnealConfig& cfg = config.anneal;
  const int chains = cfg.population;
  const int k = t.strand_count();
  Stopwatch clock;
  Terminator terminator{policy, clock};

  std::vector<Placement> current(static_cast<std::size_t>(chains));
  std::vector<std::mt19937_64> chain_rng;
  chain_rng.reserve(static_cast<std::size_t>(chains));
  for (int i = 0; i < chains; ++i) {
    std::mt19937_64 init_rng = source.stream(RngPurpose::InitPopulation,
                                             static_cast<std::uint64_t>(i));
    current[static_cast<std::size_t>(i)] =
        init_scaled(t, q.length(), config.init_noise_width, init_rng);
    chain_rng.push_back(source.stream(RngPurpose::SaProposal, static_cast<std::uint64_t>(i)));
  }
  std::vector<double> energy;
  score_batch(t, tables, q, current, energy, workers);
  std::uint64_t evaluations = static_cast<std::uint64_t>(chains);

  BestTracker best;
  for (int i = 0; i < chains; ++i) {
    best.offer(energy[static_cast<std::size_t>(i)], current[static_cast<std::size_t>(i)]);
  }
  const double t0 = cfg.t0 > 0.0 ? cfg.t0 : std::max(1.0, 0.01 * best.score);

  std::uint64_t generations = 0;
  std::uint64_t since_improvement = 0;
  TerminationReason reason = TerminationReason::MaxGenerations;
  while (!terminator.due(generations, since_improvement, reason)) {
    const double temp = temperature(t0, cfg.cooling, generations);

    // Serial proposal pass: each chain shifts one uniformly chosen strand by
    // a uniform nonzero offset in +-move_width, clamped into its window.
    std::vector<Placement> proposals = current;
    for (int i = 0; i < chains; ++i) {
      std::mt19937_64& rng = chain_rng[static_cast<std::size_t>(i)];
      if (k == 0 || cfg.move_width == 0) continue;
      const int strand = uniform_int(rng, 0, k - 1);
      const int magnitude = uniform_int(rng, 1, 2 * cfg.move_width);
      const int delta = magnitude <= cfg.move_width ? magnitude
                                                    : -(magnitude - cfg.move_width);
      Placement& p = proposals[static_cast<std::size_t>(i)];
      const Window w = move_window(t, q.length(), p.starts, strand);
      p.starts[static_cast<std::size_t>(strand)] =
          std::clamp(p.starts[static_cast<std::size_t>(strand)] + delta, w.lo, w.hi);
    }

    std::vector<double> proposed_energy;
    score_batch(t, tables, q, proposals, proposed_energy, workers);
    evaluations += proposals.size();

    bool improved = false;
    for (int i = 0; i < chains; ++i) {
      const double e = energy[static_cast<std::size_t>(i)];
      const double e2 = proposed_energy[static_cast<std::size_t>(i)];
      const double accept = acceptance_probability(e, e2, temp);
      const double u = uniform_real(chain_rng[static_cast<std::size_t>(i)]);
      if (u < accept) {
        current[static_cast<std::size_t>(i)] = proposals[static_cast<std::size_t>(i)];
        energy[static_cast<std::size_t>(i)] = e2;
      }
      if (best.offer(e2, proposals[static_cast<std::size_t>(i)])) improved = true;
    }
    ++generations;
    since_improvement = improved ? 0 : since_improvement + 1;
  }
  return finish(best, generations, evaluations, clock, reason, t, tables, q);
}

SearchResult run_genetic(const MrfTemplate& t, const PairScoreTables& tables,
                         const QuerySequence& q, const SearchConfig& config,
                         const TerminationPolicy& policy, const RandomSource& source,
                         int workers) {
  const GeneticConfig& cfg = config.genetic;
  const int pop_size = cfg.population;
  Stopwatch clock;
  Terminator terminator{policy, clock};

  std::vector<Placement> population(static_cast<std::size_t>(pop_size));
  for (int i = 0; i < pop_size; ++i) {
    std::mt19937_64 rng = source.stream(RngPurpose::InitPopulation,
                                        static_cast<std::uint64_t>(i));
    population[static_cast<std::size_t>(i)] =
        init_scaled(t, q.length(), config.init_noise_width, rng);
  }
  std::vector<double> fitness;
  score_batch(t, tables, q, population, fitness, workers);
  std::uint64_t evaluations = static_cast<std::uint64_t>(pop_size);

  BestTracker best;
  for (int i = 0; i < pop_size; ++i) {
    best.offer(fitness[static_cast<std::size_t>(i)], population[static_cast<std::size_t>(i)]);
  }

  std::uint64_t generations = 0;
  std::uint64_t since_improvement = 0;
  TerminationReason reason = TerminationReason::MaxGenerations;
  while (!terminator.due(generations, since_improvement, reason)) {
    std::mt19937_64 rng = source.stream(RngPurpose::GaStep, generations);
    bool improved = false;
    evaluations +=
        ga_generation(t, tables, q, cfg, rng, workers, population, fitness, best, improved);
    ++generations;
    since_improvement = improved ? 0 : since_improvement + 1;
  }
  return finish(best, generations, evaluations, clock, reason, t, tables, q);
}

SearchResult run_local(const MrfTemplate& t, const PairScoreTables& tables,
                       const QuerySequence& q, const SearchConfig& config,
                       const TerminationPolicy& policy, const RandomSource& source,
                       int workers) {
  const LocalConfig& cfg = config.local;
  Stopwatch clock;
  Terminator terminator{policy, clock};

  std::mt19937_64 init_rng = source.stream(RngPurpose::InitPopulation, 0);
  Placement current = init_scaled(t, q.length(), config.init_noise_width, init_rng);
  double current_score = score_of(t, tables, q, current);
  std::uint64_t evaluations = 1;

  BestTracker best;
  best.offer(current_score, current);

  std::uint64_t generations = 0;
  std::uint64_t since_improvement = 0;
  TerminationReason reason = TerminationReason::MaxGenerations;
  while (!terminator.due(generations, since_improvement, reason)) {
    std::mt19937_64 rng = source.stream(RngPurpose::LsDiversify, generations);
    const DiversifyOutcome d = diversify(t, tables, q, current, cfg.fanout, rng, workers);
    evaluations += d.evaluations;
    bool improved = best.offer(d.best.score, d.best.placement);

    const IntensifyOutcome i =
        intensify(t, tables, q, d.best.placement, d.best.score, workers);
    evaluations += i.evaluations;
    if (best.offer(i.best.score, i.best.placement)) improved = true;

    current = i.best.placement;
    current_score = i.best.score;
    ++generations;
    since_improvement = improved ? 0 : since_improvement + 1;
  }
  return finish(best, generations, evaluations, clock, reason, t, tables, q);
}

}  // namespace

std::string search_fingerprint(const SearchConfig& config, const TerminationPolicy& policy) {
  std::ostringstream out;
  out << "strategy=" << strategy_name(config.strategy);
  switch (config.strategy) {
    case SearchStrategy::Anneal:
      out << ";population=" << config.anneal.population << ";t0=" << config.anneal.t0
          << ";cooling=" << config.anneal.cooling << ";move_width=" << config.anneal.move_width;
      break;
    case SearchStrategy::Genetic:
      out << ";population=" << config.genetic.population
          << ";mutation_width=" << config.genetic.mutation_width;
      break;
    case SearchStrategy::Local:
      out << ";fanout=" << config.local.fanout;
      break;
  }
  out << ";init_noise=" << config.init_noise_width;
  out << ";max_generations=";
  if (policy.max_generations) {
    out << *policy.max_generations;
  } else {
    out << "none";
  }
  out << ";time_limit=";
  if (policy.time_limit_seconds) {
    out << *policy.time_limit_seconds;
  } else {
    out << "none";
  }
  out << ";convergence_window=";
  if (policy.convergence_window) {
    out << *policy.convergence_window;
  } else {
    out << "none";
  }
  return out.str();
}

SearchResult run_search(const MrfTemplate& t, const PairScoreTables& tables,
                        const QuerySequence& q, const SearchConfig& config,
                        const TerminationPolicy& policy, std::uint64_t seed, int workers) {
  check_config(config);
  check_policy(policy);
  Layout(t).require_feasible(q.length());

  // A template without strands admits exactly one placement; score it and
  // report convergence, whatever the configured strategy.
  if (t.strand_count() == 0) {
    Stopwatch clock;
    BestTracker best;
    best.offer(score_of(t, tables, q, Placement{}), Placement{});
    return finish(best, 0, 1, clock, TerminationReason::Converged, t, tables, q);
  }

  const RandomSource source(seed);
  switch (config.strategy) {
    case SearchStrategy::Anneal:
      return run_anneal(t, tables, q, config, policy, source, workers);
    case SearchStrategy::Genetic:
      return run_genetic(t, tables, q, config, policy, source, workers);
    case SearchStrategy::Local:
      return run_local(t, tables, q, config, policy, source, workers);
  }
  throw ValidationError("unreachable: unknown strategy");
}

}  // namespace mrf
