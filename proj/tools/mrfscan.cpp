// mrfscan: build, filter, calibrate, and scan with beta-structure templates.
//
// Exit codes: 0 on success, 1 for I/O or internal failures, 2 for bad usage
// or invalid inputs.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "mrf/errors.hpp"
#include "mrf/io.hpp"
#include "mrf/model.hpp"
#include "mrf/parallel.hpp"
#include "mrf/score.hpp"
#include "mrf/search.hpp"
#include "mrf/serial.hpp"
#include "mrf/stats.hpp"
#include "mrf/train.hpp"

namespace {

// Wall-clock budgets read as "30" or "30s"; both mean seconds.
double parse_duration_seconds(const std::string& text) {
  std::string body = text;
  if (!body.empty() && (body.back() == 's' || body.back() == 'S')) body.pop_back();
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(body, &used);
  } catch (const std::exception&) {
    throw mrf::ValidationError("bad duration '" + text + "': expected seconds, e.g. 30 or 30s");
  }
  if (used != body.size() || !(value > 0.0)) {
    throw mrf::ValidationError("bad duration '" + text + "': expected seconds, e.g. 30 or 30s");
  }
  return value;
}

struct SearchOptions {
  std::string strategy = "sa";
  mrf::SearchConfig config;
  std::optional<std::uint64_t> max_generations;
  std::string time_limit;
  std::optional<std::uint64_t> convergence_window;

  void attach(CLI::App& cmd) {
    cmd.add_option("--strategy", strategy, "Search strategy: sa, ga, or ls")
        ->capture_default_str();
    cmd.add_option("--population", config.anneal.population,
                   "Chains (sa, default 10) or population size (ga, default 1000)");
    cmd.add_option("--t0", config.anneal.t0,
                   "Initial temperature; 0 picks max(1, 1% of the initial best score)")
        ->capture_default_str();
    cmd.add_option("--cooling", config.anneal.cooling, "Geometric cooling factor per generation")
        ->capture_default_str();
    cmd.add_option("--move-width", config.anneal.move_width,
                   "Annealing proposal: max shift of the chosen strand")
        ->capture_default_str();
    cmd.add_option("--mutation-width", config.genetic.mutation_width,
                   "Genetic mutation: max per-strand jitter")
        ->capture_default_str();
    cmd.add_option("--fanout", config.local.fanout, "Local-search diversification candidates")
        ->capture_default_str();
    cmd.add_option("--init-noise", config.init_noise_width,
                   "Jitter around the scaled-template initial placement")
        ->capture_default_str();
    cmd.add_option("--max-generations", max_generations, "Stop after this many generations");
    cmd.add_option("--time-limit", time_limit,
                   "Stop after this wall time, e.g. 30s (checked between generations)");
    cmd.add_option("--convergence,--convergence-window", convergence_window,
                   "Stop after this many generations without improvement");
  }

  // Population defaults differ per strategy, so resolve after parsing.
  mrf::SearchConfig resolve(const CLI::App& cmd) {
    config.strategy = mrf::strategy_from_name(strategy);
    if (cmd.count("--population") > 0) {
      config.genetic.population = config.anneal.population;
    } else {
      config.anneal.population = 10;
      config.genetic.population = 1000;
    }
    return config;
  }

  mrf::TerminationPolicy policy() const {
    mrf::TerminationPolicy p;
    p.max_generations = max_generations;
    if (!time_limit.empty()) p.time_limit_seconds = parse_duration_seconds(time_limit);
    p.convergence_window = convergence_window;
    if (!p.max_generations && !p.time_limit_seconds && !p.convergence_window) {
      // A sane default: cap generations and stop early on stagnation.
      p.max_generations = 500;
      p.convergence_window = 100;
    }
    return p;
  }
};

// Queries run concurrently but rows must land in input order, so finished
// rows park here until every earlier row has been written.
class OrderedHitsSink {
 public:
  OrderedHitsSink(const std::string& path, const mrf::HitsWriterOptions& options)
      : writer_(path, options) {}

  void put(std::size_t index, mrf::HitRow row) {
    std::lock_guard<std::mutex> lock(mu_);
    pending_.emplace(index, std::move(row));
    while (!pending_.empty() && pending_.begin()->first == next_) {
      writer_.write(pending_.begin()->second);
      pending_.erase(pending_.begin());
      ++next_;
    }
  }

 private:
  mrf::HitsWriter writer_;
  std::mutex mu_;
  std::map<std::size_t, mrf::HitRow> pending_;
  std::size_t next_ = 0;
};

int run_build(const std::string& alignment_path, const std::string& annotations_path,
              const std::string& buried_path, const std::string& exposed_path,
              const std::string& out_path, const std::string& name,
              const mrf::TrainConfig& train, int simev_count, double simev_rate,
              std::uint64_t seed) {
  const mrf::MultipleAlignment alignment = mrf::read_alignment(alignment_path);
  const mrf::StrandAnnotationSet annotations = mrf::read_annotations(annotations_path, alignment);
  mrf::TemplateDocument doc;
  doc.tables = mrf::load_pair_tables(buried_path, exposed_path);

  nlohmann::json sim_record;
  if (simev_count > 0) {
    const mrf::SimulatedEvolutionResult augmented =
        mrf::simulated_evolution(alignment, annotations, train, doc.tables, simev_rate,
                                 simev_count, seed);
    doc.tmpl = mrf::estimate_template(augmented.alignment, augmented.annotations, train,
                                      doc.tables);
    sim_record = {{"count", simev_count},
                  {"rate", simev_rate},
                  {"rows", augmented.alignment.row_count()},
                  {"mutations", augmented.attempted},
                  {"paired_positions", augmented.paired_positions}};
  } else {
    doc.tmpl = mrf::estimate_template(alignment, annotations, train, doc.tables);
    sim_record = nullptr;
  }
  doc.tmpl.name = name.empty() ? alignment_path : name;

  doc.provenance = {
      {"tool", "mrfscan build"},
      {"alignment", alignment_path},
      {"annotations", annotations_path},
      {"pair_tables", {{"buried", buried_path}, {"exposed", exposed_path}}},
      {"seed", seed},
      {"training",
       {{"symfrac", train.symfrac},
        {"consensus_fraction", train.consensus_fraction},
        {"pseudocount", train.pseudocount},
        {"max_gap_slack", train.max_gap_slack}}},
      {"simulated_evolution", sim_record},
  };

  mrf::save_template_document(out_path, doc);
  std::cerr << "built template '" << doc.tmpl.name << "': " << doc.tmpl.node_count()
            << " nodes, " << doc.tmpl.strand_count() << " strands, " << doc.tmpl.pairs.size()
            << " pairs, max interleave " << mrf::max_interleave(doc.tmpl) << "\n";
  return 0;
}

int run_filter(const std::string& template_path, int threshold, const std::string& out_path) {
  mrf::TemplateDocument doc = mrf::load_template_document(template_path);
  const std::size_t pairs_before = doc.tmpl.pairs.size();
  const int strands_before = doc.tmpl.strand_count();

  // Report the casualties before renumbering makes their ordinals ambiguous.
  for (const mrf::StrandPair& pair : doc.tmpl.pairs) {
    const int il = mrf::interleave(doc.tmpl, pair);
    if (il > threshold) {
      std::cout << "removed pair (" << pair.first << "," << pair.second
                << "): interleave " << il << "\n";
    }
  }

  doc.tmpl = mrf::apply_interleave_filter(doc.tmpl, threshold);
  doc.calibration.reset();  // scores change, so any old calibration is void
  doc.provenance["interleave_filter"] = {{"threshold", threshold},
                                         {"pairs_before", pairs_before},
                                         {"strands_before", strands_before}};
  mrf::save_template_document(out_path, doc);
  std::cerr << "kept " << doc.tmpl.pairs.size() << "/" << pairs_before << " pairs and "
            << doc.tmpl.strand_count() << "/" << strands_before << " strands at interleave <= "
            << threshold << "\n";
  return 0;
}

int run_search_cmd(const std::string& template_path, const std::string& queries_path,
                   const std::string& out_path, SearchOptions& opts, const CLI::App& cmd,
                   std::uint64_t seed, int threads, bool no_pvalue, bool no_timing,
                   double pvalue_cutoff) {
  const mrf::TemplateDocument doc = mrf::load_template_document(template_path);
  const std::vector<mrf::QuerySequence> queries = mrf::read_fasta(queries_path);
  const mrf::SearchConfig config = opts.resolve(cmd);
  const mrf::TerminationPolicy policy = opts.policy();
  const int workers = mrf::resolve_worker_count(threads);

  bool use_pvalues = false;
  if (!no_pvalue) {
    if (!doc.calibration) {
      std::cerr << "note: template has no calibration; p_value column will be NA\n";
    } else {
      const std::string fingerprint = mrf::search_fingerprint(config, policy);
      if (fingerprint != doc.calibration->search_fingerprint) {
        std::cerr << "error: search configuration does not match the calibration\n"
                  << "  calibrated: " << doc.calibration->search_fingerprint << "\n"
                  << "  requested:  " << fingerprint << "\n"
                  << "Re-run calibrate, or pass --no-pvalue for raw scores only.\n";
        return 2;
      }
      use_pvalues = true;
    }
  }

  mrf::HitsWriterOptions options;
  options.zero_timing = no_timing;
  options.comment = std::string("strategy=") + mrf::strategy_name(config.strategy) +
                    " seed=" + std::to_string(seed);
  OrderedHitsSink sink(out_path, options);

  // One query: let the search itself use every worker.  Several queries: fan
  // out across them instead, one worker each, so hit rows stay a pure
  // function of (seed, query index) no matter how many threads run.
  const bool fan_out = queries.size() > 1;
  const int outer = fan_out ? workers : 1;
  const int inner = fan_out ? 1 : workers;

  std::atomic<std::uint64_t> scored{0};
  std::atomic<std::uint64_t> significant{0};
  mrf::parallel_for(queries.size(), outer, [&](std::size_t qi) {
    const mrf::QuerySequence& q = queries[qi];
    mrf::HitRow row;
    row.query_id = q.id;
    try {
      const mrf::SearchResult res = mrf::run_search(doc.tmpl, doc.tables, q, config, policy,
                                                    seed + qi, inner);
      row.raw_score = res.breakdown.total;
      row.placement = res.best.starts;
      row.generations = res.generations;
      row.seconds = res.seconds;
      if (use_pvalues) {
        row.has_p_value = true;
        row.p_value = mrf::evd_p_value(doc.calibration->params, res.breakdown.total);
        scored.fetch_add(1);
        if (row.p_value <= pvalue_cutoff) significant.fetch_add(1);
      }
    } catch (const mrf::InfeasibleError&) {
      row.feasible = false;
    }
    sink.put(qi, std::move(row));
  });

  if (use_pvalues) {
    std::cerr << significant.load() << " of " << scored.load() << " hits at p <= "
              << pvalue_cutoff << "\n";
  }
  return 0;
}

int run_oracle(const std::string& template_path, const std::string& queries_path,
               const std::string& out_path, std::uint64_t cap, int threads, bool no_timing) {
  const mrf::TemplateDocument doc = mrf::load_template_document(template_path);
  const std::vector<mrf::QuerySequence> queries = mrf::read_fasta(queries_path);
  const int workers = mrf::resolve_worker_count(threads);

  mrf::HitsWriterOptions options;
  options.zero_timing = no_timing;
  options.exact_column = true;
  mrf::HitsWriter writer(out_path, options);
  for (const mrf::QuerySequence& q : queries) {
    mrf::HitRow row;
    row.query_id = q.id;
    const std::uint64_t space = mrf::count_placements(doc.tmpl, q.length());
    if (space > cap) {
      row.capped = true;
      std::cerr << "note: '" << q.id << "' has " << space
                << " placements, above the cap of " << cap << "; row marked CAPPED\n";
      writer.write(row);
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    try {
      const mrf::ExhaustiveResult res = mrf::exhaustive_optimum(doc.tmpl, doc.tables, q, cap,
                                                                workers);
      row.raw_score = res.breakdown.total;
      row.placement = res.placement.starts;
      row.generations = res.candidates;
      row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                        .count();
      std::cerr << q.id << ": " << res.candidates << " placements\n";
    } catch (const mrf::ValidationError&) {
      // No legal placement (strands cannot fit): an infeasible query.
      row.feasible = false;
    }
    writer.write(row);
  }
  return 0;
}

int run_calibrate(const std::string& template_path, const std::string& decoys_path,
                  const std::string& out_path, SearchOptions& opts, const CLI::App& cmd,
                  std::uint64_t seed, int threads) {
  mrf::TemplateDocument doc = mrf::load_template_document(template_path);
  const std::vector<mrf::QuerySequence> decoys = mrf::read_fasta(decoys_path);
  const mrf::SearchConfig config = opts.resolve(cmd);
  const mrf::TerminationPolicy policy = opts.policy();
  const int workers = mrf::resolve_worker_count(threads);

  const mrf::CalibrationRun run = mrf::calibrate(doc.tmpl, doc.tables, decoys, config, policy,
                                                 seed, workers);
  mrf::CalibrationInfo info;
  info.params = run.fit.params;
  info.samples = run.fit.samples;
  info.low_sample_warning = run.fit.low_sample_warning;
  info.search_fingerprint = run.fingerprint;
  doc.calibration = info;
  doc.provenance["calibration"] = {{"decoys", decoys_path},
                                   {"samples", info.samples},
                                   {"seed", seed}};
  mrf::save_template_document(out_path.empty() ? template_path : out_path, doc);

  std::cerr << "calibrated: mu=" << info.params.mu << " beta=" << info.params.beta << " from "
            << info.samples << " decoys\n";
  if (run.fit.low_sample_warning) {
    std::cerr << "warning: fewer than 30 decoys; p-values will be unstable\n";
  }
  return 0;
}

int run_roc(const std::string& hits_path, const std::string& out_path) {
  const std::vector<mrf::LabeledScore> scores = mrf::read_labeled_hits(hits_path);
  const mrf::RocResult roc = mrf::roc_auc(scores);
  mrf::write_roc_csv(out_path, roc);
  char line[32];
  std::snprintf(line, sizeof line, "%.4f\n", roc.auc);
  std::cout << line;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scores protein sequences against beta-structure templates"};
  app.require_subcommand(1);

  // --- build ---------------------------------------------------------------
  auto* build = app.add_subcommand("build", "Estimate a template from a training alignment");
  std::string alignment_path, annotations_path, buried_path, exposed_path;
  std::string build_out, build_name;
  mrf::TrainConfig train;
  int simev_count = 0;
  double simev_rate = 0.5;
  std::uint64_t build_seed = 1;
  build->add_option("--alignment", alignment_path, "Aligned FASTA training file")->required();
  build->add_option("--annotations", annotations_path, "Strand annotation JSON")->required();
  build->add_option("--buried-table", buried_path, "Buried pair-score TSV")->required();
  build->add_option("--exposed-table", exposed_path, "Exposed pair-score TSV")->required();
  build->add_option("--out", build_out, "Output template JSON")->required();
  build->add_option("--name", build_name, "Template name (defaults to the alignment path)");
  build->add_option("--symfrac", train.symfrac, "Match-column occupancy threshold")
      ->capture_default_str();
  build->add_option("--consensus-fraction", train.consensus_fraction,
                    "Fraction of rows that must annotate a strand column")
      ->capture_default_str();
  build->add_option("--pseudocount", train.pseudocount, "Pseudocount mass for estimates")
      ->capture_default_str();
  build->add_option("--max-gap-slack", train.max_gap_slack,
                    "Slack added to the longest observed inter-strand run")
      ->capture_default_str();
  build->add_option("--simev,--simev-count", simev_count,
                    "Artificial rows per original (0 disables simulated evolution)")
      ->capture_default_str();
  build->add_option("--simev-rate", simev_rate, "Per-position mutation rate")
      ->capture_default_str();
  build->add_option("--seed", build_seed, "Seed for simulated evolution")->capture_default_str();

  // --- filter ----------------------------------------------------------------
  auto* filter = app.add_subcommand("filter", "Drop pairs above an interleave threshold");
  std::string filter_template, filter_out;
  int threshold = 0;
  filter->add_option("--template", filter_template, "Template JSON")->required();
  filter->add_option("--interleave-threshold,--threshold", threshold,
                     "Keep pairs with interleave <= this")
      ->required();
  filter->add_option("--out", filter_out, "Output template JSON")->required();

  // --- search ----------------------------------------------------------------
  auto* search = app.add_subcommand("search", "Score queries with stochastic placement search");
  std::string search_template, search_queries, search_out;
  SearchOptions search_opts;
  std::uint64_t search_seed = 1;
  int search_threads = 0;
  bool no_pvalue = false, search_no_timing = false;
  double pvalue_cutoff = 0.005;
  search->add_option("--template", search_template, "Template JSON")->required();
  search->add_option("--queries", search_queries, "Query FASTA")->required();
  search->add_option("--output,--out", search_out, "Output hits TSV")->required();
  search_opts.attach(*search);
  search->add_option("--seed", search_seed, "Master seed (query i uses seed + i)")
      ->capture_default_str();
  search->add_option("--threads", search_threads,
                     "Worker threads (default: MRF_THREADS or all cores)");
  search->add_option("--pvalue-cutoff", pvalue_cutoff,
                     "Report how many hits fall at or under this p-value")
      ->capture_default_str();
  search->add_flag("--no-pvalue", no_pvalue, "Skip p-values even when calibrated");
  search->add_flag("--no-timing", search_no_timing,
                   "Write 0.000 in the seconds column (byte-stable reruns)");

  // --- oracle ----------------------------------------------------------------
  auto* oracle = app.add_subcommand("oracle", "Score queries by exhaustive enumeration");
  std::string oracle_template, oracle_queries, oracle_out;
  std::uint64_t cap = 10'000'000;
  int oracle_threads = 0;
  bool oracle_no_timing = false;
  oracle->add_option("--template", oracle_template, "Template JSON")->required();
  oracle->add_option("--queries", oracle_queries, "Query FASTA")->required();
  oracle->add_option("--output,--out", oracle_out, "Output hits TSV")->required();
  oracle->add_option("--cap", cap, "Refuse queries with more placements than this")
      ->capture_default_str();
  oracle->add_option("--threads", oracle_threads, "Worker threads");
  oracle->add_flag("--no-timing", oracle_no_timing, "Write 0.000 in the seconds column");

  // --- calibrate ---------------------------------------------------------------
  auto* calibrate = app.add_subcommand("calibrate", "Fit the score EVD on decoy sequences");
  std::string cal_template, cal_decoys, cal_out;
  SearchOptions cal_opts;
  std::uint64_t cal_seed = 1;
  int cal_threads = 0;
  calibrate->add_option("--template", cal_template,
                        "Template JSON (updated in place unless --out)")
      ->required();
  calibrate->add_option("--decoys", cal_decoys, "Decoy FASTA (at least 30 sequences)")
      ->required();
  calibrate->add_option("--out", cal_out, "Write the calibrated template here instead");
  cal_opts.attach(*calibrate);
  calibrate->add_option("--seed", cal_seed, "Master seed (decoy i searches with its own stream)")
      ->capture_default_str();
  calibrate->add_option("--threads", cal_threads, "Worker threads");

  // --- roc ---------------------------------------------------------------------
  auto* roc = app.add_subcommand("roc", "ROC/AUC from a labeled hits file");
  std::string hits_path, roc_out;
  roc->add_option("--hits", hits_path, "Hits TSV with a label column (1/0, pos/neg)")
      ->required();
  roc->add_option("--out", roc_out, "Output CSV of (fpr, tpr, threshold) points")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (build->parsed()) {
      return run_build(alignment_path, annotations_path, buried_path, exposed_path, build_out,
                       build_name, train, simev_count, simev_rate, build_seed);
    }
    if (filter->parsed()) return run_filter(filter_template, threshold, filter_out);
    if (search->parsed()) {
      return run_search_cmd(search_template, search_queries, search_out, search_opts, *search,
                            search_seed, search_threads, no_pvalue, search_no_timing,
                            pvalue_cutoff);
    }
    if (oracle->parsed()) {
      return run_oracle(oracle_template, oracle_queries, oracle_out, cap, oracle_threads,
                        oracle_no_timing);
    }
    if (calibrate->parsed()) {
      return run_calibrate(cal_template, cal_decoys, cal_out, cal_opts, *calibrate, cal_seed,
                           cal_threads);
    }
    if (roc->parsed()) return run_roc(hits_path, roc_out);
  } catch (const mrf::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const mrf::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const mrf::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 2;  // no subcommand matched; require_subcommand should prevent this
}
