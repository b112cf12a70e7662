#include "dspp/cli.hpp"

#include "dspp/arrangement.hpp"
#include "dspp/energies.hpp"
#include "dspp/homotopy.hpp"
#include "dspp/matching.hpp"
#include "dspp/oracle.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <ostream>

namespace dspp::cli {

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const InputError*>(&e)) return input_error;
  if (dynamic_cast<const InfeasibleError*>(&e)) return infeasible;
  return solver_failure;
}

namespace {

struct Loaded {
  std::optional<MetricData> metric;
  MetricEnergy kind = MetricEnergy::gw;
  EnergySpec energy;
};

Loaded load_energy(const EnergyInput& in, std::optional<int> injective = std::nullopt) {
  const bool dense = !in.dense_energy.empty();
  const bool metric = !in.source_dist.empty() || !in.target_dist.empty();
  if (dense == metric) {
    throw InputError("give either --dense-energy or both --source-dist and --target-dist");
  }
  if (dense) {
    if (injective) {
      throw InputError("--injective needs distance inputs; a JSON energy already fixes k and n");
    }
    return {std::nullopt, MetricEnergy::gw, read_energy_json(in.dense_energy)};
  }
  if (in.source_dist.empty() || in.target_dist.empty()) {
    throw InputError("both --source-dist and --target-dist are required");
  }
  MetricData m{read_csv_matrix(in.source_dist), read_csv_matrix(in.target_dist)};
  if (injective) {
    const int k = *injective;
    if (k < 1 || k > m.source.rows()) {
      throw InputError("--injective " + std::to_string(k) + " exceeds the " + std::to_string(m.source.rows()) +
                       " source points");
    }
    m.source = MatrixXd(m.source.topLeftCorner(k, k));
  }
  m.validate();
  const MetricEnergy kind = parse_metric_energy(in.energy);
  EnergySpec e = metric_energy(m, kind, in.sigma);
  return {std::move(m), kind, std::move(e)};
}

HomotopyConfig homotopy_config(int samples, std::uint64_t seed) {
  HomotopyConfig cfg;
  cfg.num_samples = samples;
  cfg.eig.seed = seed;
  return cfg;
}

Json optional_number(const std::optional<double>& v) { return v ? Json(round12(*v)) : Json(nullptr); }

std::pair<Index, Index> parse_grid(const std::string& spec) {
  const auto x = spec.find('x');
  Index r = 0;
  Index c = 0;
  if (x != std::string::npos) {
    const char* begin = spec.data();
    const char* end = begin + spec.size();
    const auto [pr, er] = std::from_chars(begin, begin + x, r);
    const auto [pc, ec] = std::from_chars(begin + x + 1, end, c);
    if (er == std::errc() && ec == std::errc() && pr == begin + x && pc == end && r > 0 && c > 0) {
      return {r, c};
    }
  }
  throw InputError("--grid expects RxC with positive integers, got '" + spec + "'");
}

}  // namespace

Json cmd_bounds(const BoundsArgs& args) {
  const Loaded in = load_energy(args.input);
  const BoundReport r = bound_hierarchy(matching_problem(in.energy), homotopy_config(args.samples, args.seed));
  Json out;
  out["spectral"] = optional_number(r.spectral);
  out["ds"] = optional_number(r.ds);
  out["ds_plus"] = round12(r.ds_plus);
  out["ds_pp"] = round12(r.ds_pp);
  out["ds_pp_certified"] = round12(r.ds_pp_certified);
  out["upper"] = round12(r.upper);
  out["assignment"] = assignment_to_json(r.assignment);
  out["lambda_min"] = round12(r.lambda_min);
  out["lambda_bar_min"] = round12(r.range.lambda_bar_min);
  out["lambda_bar_max"] = round12(r.range.lambda_bar_max);
  Json gaps;
  gaps["upper_minus_ds_pp"] = round12(r.upper - r.ds_pp);
  gaps["upper_minus_ds_plus"] = round12(r.upper - r.ds_plus);
  gaps["ds_pp_minus_ds_plus"] = round12(r.ds_pp - r.ds_plus);
  out["gaps"] = gaps;
  return out;
}

Json cmd_match(const MatchArgs& args) {
  const Loaded in = load_energy(args.input, args.injective);
  EnergySpec solved = in.energy;
  if (!args.pins.empty()) {
    if (!in.metric) {
      throw InputError("--pins needs distance inputs");
    }
    const UserConstraints pins = constraints_from_json(read_json_file(args.pins));
    solved = coarse_to_fine_terms(*in.metric, pins, in.energy);
  }
  const Problem problem = matching_problem(solved);
  const HomotopyConfig cfg = homotopy_config(args.samples, args.seed);
  const HomotopyResult h = homotopy_solve(problem, cfg);

  Json out;
  out["assignment"] = assignment_to_json(h.assignment);
  out["energy"] = round12(eval_energy(in.energy, h.assignment));
  out["lower_bound"] = round12(h.lower_bound);
  if (!args.pins.empty()) {
    out["objective"] = round12(h.energy);
  }
  if (!args.fuzzy.empty()) {
    const HomotopyResult f = fuzzy_solve(problem, cfg);
    write_csv_matrix(args.fuzzy, f.relaxed.values.bottomRows(problem.matched_rows()));
    out["fuzzy_energy"] = round12(f.energy);
  }
  return out;
}

Json cmd_arrange(const ArrangeArgs& args) {
  if (args.features.empty() == args.dist.empty()) {
    throw InputError("give exactly one of --features and --dist");
  }
  if (args.swaps < 0) {
    throw InputError("--swaps must be nonnegative");
  }
  MatrixXd d;
  if (!args.features.empty()) {
    d = feature_distances(read_csv_matrix(args.features));
  } else {
    d = read_csv_matrix(args.dist);
    MetricData{d, d}.validate();
  }
  const auto [rows, cols] = parse_grid(args.grid);
  ArrangeOptions opts;
  opts.rows = rows;
  opts.cols = cols;
  opts.swaps = args.swaps;
  opts.seed = args.seed;
  opts.homotopy = homotopy_config(args.samples, args.seed);
  const Arrangement a = arrange(d, opts);

  Json out;
  out["grid"] = a.grid;
  out["energy"] = round12(a.energy);
  out["energy_before_swaps"] = round12(a.energy_before_swaps);
  out["swaps_accepted"] = a.swaps_accepted;
  return out;
}

Json cmd_upsample(const UpsampleArgs& args) {
  const Loaded in = load_energy(args.input);
  if (!in.metric) {
    throw InputError("upsample needs distance inputs");
  }
  const MetricData& fine = *in.metric;
  const UserConstraints coarse = constraints_from_json(read_json_file(args.coarse));
  coarse.validate(fine.k(), fine.n());
  const Correspondences anchors(coarse.pairs.begin(), coarse.pairs.end());

  UpsampleResult r;
  if (args.mode == "greedy") {
    r = upsample_greedy(fine, anchors, metric_penalty(fine, in.kind, args.input.sigma));
  } else if (args.mode == "limited") {
    if (!(args.keep_frac > 0.0 && args.keep_frac <= 1.0)) {
      throw InputError("--keep-frac must lie in (0, 1]");
    }
    r = upsample_limited(fine, anchors, in.energy, args.keep_frac, args.rho,
                         homotopy_config(args.samples, args.seed));
  } else {
    throw InputError("--mode must be limited or greedy, got '" + args.mode + "'");
  }

  Json out;
  out["assignment"] = assignment_to_json(r.assignment);
  Json provenance = Json::array();
  for (Provenance p : r.provenance) provenance.push_back(to_string(p));
  out["provenance"] = provenance;
  out["injective"] = r.assignment.is_injective(fine.n());
  out["energy"] = round12(eval_energy(in.energy, r.assignment));
  return out;
}

Json cmd_oracle(const OracleArgs& args) {
  const Loaded in = load_energy(args.input, args.injective);
  const BruteForceResult b = brute_force_injective(in.energy);
  Json out;
  out["assignment"] = assignment_to_json(b.assignment);
  out["value"] = round12(b.value);
  out["enumerated"] = b.enumerated;
  if (in.energy.dim() <= 100) {
    const DenseRange r = dense_subspace_eigs(in.energy);
    out["lambda_bar_min"] = round12(r.lambda_bar_min);
    out["lambda_bar_max"] = round12(r.lambda_bar_max);
  }
  return out;
}

namespace {

void add_energy_options(CLI::App* cmd, EnergyInput& in, bool dense) {
  if (dense) {
    cmd->add_option("--dense-energy", in.dense_energy, "Energy JSON {k, n, W | builder, c, d}");
  }
  cmd->add_option("--source-dist", in.source_dist, "Source distance matrix (CSV)");
  cmd->add_option("--target-dist", in.target_dist, "Target distance matrix (CSV)");
  cmd->add_option("--energy", in.energy, "Metric energy: gw, loggw or gauss")->capture_default_str();
  cmd->add_option("--sigma", in.sigma, "Gaussian kernel width")->capture_default_str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quadratic assignment by doubly stochastic relaxation and homotopy projection"};
  app.name(args.empty() ? "dspp" : args.front());
  app.require_subcommand(1);

  BoundsArgs bounds;
  auto* b = app.add_subcommand("bounds", "Lower bounds and an upper bound for a matching energy");
  add_energy_options(b, bounds.input, true);
  b->add_option("--samples", bounds.samples, "Homotopy samples N+1")->capture_default_str();
  b->add_option("--seed", bounds.seed, "Eigensolver seed");

  MatchArgs match;
  auto* m = app.add_subcommand("match", "Match two metric spaces");
  add_energy_options(m, match.input, true);
  m->add_option("--samples", match.samples, "Homotopy samples N+1")->capture_default_str();
  m->add_option("--injective", match.injective, "Match only the first k source points into the target");
  m->add_option("--fuzzy", match.fuzzy, "Write the fuzzy coupling to this CSV");
  m->add_option("--pins", match.pins, "Known correspondences (JSON)");
  m->add_option("--seed", match.seed, "Eigensolver seed");

  ArrangeArgs arrange_args;
  auto* a = app.add_subcommand("arrange", "Lay out items on a grid");
  a->add_option("--features", arrange_args.features, "Item features, one row per item (CSV)");
  a->add_option("--dist", arrange_args.dist, "Item dissimilarities (CSV)");
  a->add_option("--grid", arrange_args.grid, "Grid size RxC")->required();
  a->add_option("--swaps", arrange_args.swaps, "Random swaps tried after the homotopy")->capture_default_str();
  a->add_option("--samples", arrange_args.samples, "Homotopy samples N+1")->capture_default_str();
  a->add_option("--seed", arrange_args.seed, "Seed for the eigensolver and the swaps");

  UpsampleArgs upsample;
  auto* u = app.add_subcommand("upsample", "Extend a sparse correspondence to all points");
  add_energy_options(u, upsample.input, false);
  u->add_option("--coarse", upsample.coarse, "Known pairs of fine indices (JSON)")->required();
  u->add_option("--mode", upsample.mode, "limited or greedy")->capture_default_str();
  u->add_option("--rho", upsample.rho, "Penalty outside the sparsity pattern (default: automatic)");
  u->add_option("--keep-frac", upsample.keep_frac, "Share of targets kept per point")->capture_default_str();
  u->add_option("--samples", upsample.samples, "Homotopy samples N+1")->capture_default_str();
  u->add_option("--seed", upsample.seed, "Eigensolver seed");

  OracleArgs oracle;
  auto* o = app.add_subcommand("oracle", "Exact minimum by enumeration (small instances)");
  add_energy_options(o, oracle.input, true);
  o->add_option("--injective", oracle.injective, "Match only the first k source points into the target");

  std::vector<const char*> argv;
  for (const std::string& s : args) argv.push_back(s.c_str());
  if (argv.empty()) argv.push_back("dspp");
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : input_error;
  }

  try {
    Json result;
    if (*b) {
      result = cmd_bounds(bounds);
    } else if (*m) {
      result = cmd_match(match);
    } else if (*a) {
      result = cmd_arrange(arrange_args);
    } else if (*u) {
      result = cmd_upsample(upsample);
    } else {
      result = cmd_oracle(oracle);
    }
    out << result.dump(2) << '\n';
    return ok;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

}  // namespace dspp::cli
