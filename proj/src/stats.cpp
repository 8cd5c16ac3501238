#include "mrf/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mrf/errors.hpp"
#include "mrf/parallel.hpp"
#include "mrf/rng.hpp"

namespace mrf {
namespace {

// Sum of exp(-(s - ref)/beta) and of s*exp(-(s - ref)/beta), with exponents
// clamped so pathological spreads cannot overflow.
struct ExpSums {
  double w = 0.0;
  double sw = 0.0;
  double ssw = 0.0;
};

ExpSums weighted_sums(const std::vector<double>& s, double beta, double ref) {
  ExpSums sums;
  for (double v : s) {
    double exponent = -(v - ref) / beta;
    exponent = std::clamp(exponent, -700.0, 700.0);
    const double w = std::exp(exponent);
    sums.w += w;
    sums.sw += v * w;
    sums.ssw += v * v * w;
  }
  return sums;
}

}  // namespace

EvdFit fit_evd(const std::vector<double>& raw_scores) {
  const int n = static_cast<int>(raw_scores.size());
  if (n < 2) throw ValidationError("EVD fit needs at least 2 scores");

  // Lower raw scores are better matches, so flip to the conventional axis.
  std::vector<double> s;
  s.reserve(raw_scores.size());
  for (double r : raw_scores) s.push_back(-r);

  const double mean = std::accumulate(s.begin(), s.end(), 0.0) / n;
  double var = 0.0;
  for (double v : s) var += (v - mean) * (v - mean);
  var /= n;
  if (var == 0.0) {
    throw ValidationError("EVD fit needs at least two distinct scores");
  }

  // Moment estimates seed Newton iteration on the profile likelihood in
  // beta; the likelihood equation is
  //   f(beta) = beta - mean(s) + sum(s_i w_i)/sum(w_i) = 0,
  //   w_i = exp(-s_i/beta),
  // and f is monotone increasing, so Newton from the moment seed converges
  // fast and safely with a positivity clamp.
  double beta = std::sqrt(var * 6.0) / 3.14159265358979323846;
  for (int iter = 0; iter < 100; ++iter) {
    const ExpSums sums = weighted_sums(s, beta, mean);
    const double ratio = sums.sw / sums.w;
    const double f = beta - mean + ratio;
    // d/dbeta of sum(s w)/sum(w) is (E[s^2 w] - E[s w]^2 like) / beta^2.
    const double fprime =
        1.0 + (sums.ssw * sums.w - sums.sw * sums.sw) / (sums.w * sums.w * beta * beta);
    const double step = f / fprime;
    double next = beta - step;
    if (next <= 0.0) next = beta / 2.0;
    const bool done = std::abs(f) < 1e-10 || std::abs(next - beta) < 1e-12 * beta;
    beta = next;
    if (done) break;
  }

  const ExpSums sums = weighted_sums(s, beta, mean);
  const double mu = mean + beta * std::log(static_cast<double>(n) / sums.w);

  EvdFit fit;
  fit.params.mu = mu;
  fit.params.beta = beta;
  fit.samples = n;
  fit.low_sample_warning = n < 30;
  return fit;
}

double evd_p_value(const EvdParams& params, double raw_score) {
  const double s = -raw_score;
  const double z = (s - params.mu) / params.beta;
  // P(S >= s) = 1 - exp(-exp(-z)); expm1 keeps precision when the survival
  // probability is tiny.
  const double t = std::exp(-z);
  double p = -std::expm1(-t);
  const double lo = std::numeric_limits<double>::min();
  const double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2;
  return std::clamp(p, lo, hi);
}

RocResult roc_auc(const std::vector<LabeledScore>& scores) {
  std::size_t positives = 0;
  for (const LabeledScore& s : scores) positives += s.positive ? 1 : 0;
  const std::size_t negatives = scores.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw ValidationError("ROC needs at least one positive and one negative score");
  }

  // Sort ascending by raw score, i.e. best matches first.
  std::vector<LabeledScore> sorted = scores;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const LabeledScore& a, const LabeledScore& b) { return a.raw < b.raw; });

  RocResult out;
  out.points.push_back(RocPoint{0.0, 0.0, sorted.front().raw});

  // Walk groups of tied scores; each group moves the curve diagonally, and
  // the trapezoid under that move accumulates the (midrank) AUC.
  double tp = 0.0;
  double fp = 0.0;
  double auc = 0.0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    double group_tp = 0.0;
    double group_fp = 0.0;
    while (j < sorted.size() && sorted[j].raw == sorted[i].raw) {
      (sorted[j].positive ? group_tp : group_fp) += 1.0;
      ++j;
    }
    const double prev_fpr = fp / static_cast<double>(negatives);
    const double prev_tpr = tp / static_cast<double>(positives);
    tp += group_tp;
    fp += group_fp;
    const double fpr = fp / static_cast<double>(negatives);
    const double tpr = tp / static_cast<double>(positives);
    auc += (fpr - prev_fpr) * (prev_tpr + tpr) / 2.0;
    out.points.push_back(RocPoint{fpr, tpr, sorted[i].raw});
    i = j;
  }
  out.auc = auc;
  return out;
}

CalibrationRun calibrate(const MrfTemplate& t, const PairScoreTables& tables,
                         const std::vector<QuerySequence>& decoys, const SearchConfig& config,
                         const TerminationPolicy& policy, std::uint64_t seed, int workers) {
  if (decoys.size() < 2) throw ValidationError("calibration needs at least 2 decoys");

  const RandomSource source(seed);

  CalibrationRun run;
  run.fingerprint = search_fingerprint(config, policy);
  run.scores.assign(decoys.size(), 0.0);

  // Decoys are independent searches; parallelism lives here while each
  // search runs single-threaded, keeping slot i's result a pure function of
  // (seed, i).
  parallel_for(decoys.size(), workers, [&](std::size_t i) {
    std::mt19937_64 rng = source.stream(RngPurpose::Calibration, i);
    const std::uint64_t search_seed = rng();
    const SearchResult res = run_search(t, tables, decoys[i], config, policy, search_seed, 1);
    run.scores[i] = res.breakdown.total;
  });

  run.fit = fit_evd(run.scores);
  return run;
}

std::vector<QuerySequence> sample_decoys(int count, int length, std::uint64_t seed) {
  if (count < 0) throw ValidationError("decoy count must be >= 0");
  if (length < 1) throw ValidationError("decoy length must be positive");

  const auto& bg = background_frequencies();
  const RandomSource source(seed);

  std::vector<QuerySequence> decoys(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    std::mt19937_64 rng = source.stream(RngPurpose::DecoySynthesis, static_cast<std::uint64_t>(i));
    QuerySequence& decoy = decoys[static_cast<std::size_t>(i)];
    decoy.id = "decoy_" + std::to_string(i);
    decoy.residues.reserve(static_cast<std::size_t>(length));
    for (int r = 0; r < length; ++r) {
      double u = uniform_real(rng);
      int chosen = kStandardResidues - 1;
      for (int a = 0; a < kStandardResidues; ++a) {
        u -= bg[static_cast<std::size_t>(a)];
        if (u <= 0.0) {
          chosen = a;
          break;
        }
      }
      decoy.residues.push_back(AminoAcid::from_index(chosen));
    }
  }
  return decoys;
}

}  // namespace mrf
