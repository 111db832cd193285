// Command-line driver: simulate -> fit -> diagnose -> summarize, plus
// prediction, map export, model comparison, replication studies and
// dichotomization. Exit 0 on success, 1 on invalid input, 2 on runtime or
// convergence failure.
#include <algorithm>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lpm/andersen.hpp"
#include "lpm/diagnostics.hpp"
#include "lpm/io.hpp"
#include "lpm/mcmc.hpp"
#include "lpm/progress.hpp"
#include "lpm/simulation.hpp"

using namespace lpm;

namespace {

/// Signals a completed run whose result fails a convergence gate.
struct ConvergenceFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Flags shared by every subcommand. Unset flags leave config values alone.
struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> chains, iters, burnin, thin, dim;
  std::optional<std::string> metric;
  std::optional<double> radius;
  std::string out;
};

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("--config", f.config, "flat key = value configuration file");
  app->add_option("--seed", f.seed, "random seed");
  app->add_option("--chains", f.chains, "number of chains");
  app->add_option("--iters", f.iters, "iterations per chain");
  app->add_option("--burnin", f.burnin, "burn-in iterations");
  app->add_option("--thin", f.thin, "thinning interval");
  app->add_option("--dim", f.dim, "latent dimension q");
  app->add_option("--metric", f.metric, "euclidean or poincare");
  app->add_option("--radius", f.radius, "Poincare disk radius");
  app->add_option("--out", f.out, "output location");
}

/// Config file first, then command-line overrides.
RunConfig resolve(const CommonFlags& f) {
  RunConfig rc;
  if (!f.config.empty()) rc = load_run_config(f.config);
  if (f.metric) rc.set("metric", *f.metric);
  if (f.seed) rc.chain.seed = *f.seed;
  if (f.chains) rc.n_chains = *f.chains;
  if (f.iters) rc.chain.iterations = *f.iters;
  if (f.burnin) rc.chain.burnin = *f.burnin;
  if (f.thin) rc.chain.thin = *f.thin;
  if (f.dim) rc.chain.space.q = *f.dim;
  if (f.radius) rc.chain.space.rho = *f.radius;
  if (!f.out.empty()) rc.out = f.out;
  return rc;
}

fs::path require_out(const CommonFlags& f, const RunConfig& rc) {
  const std::string out = f.out.empty() ? rc.out : f.out;
  if (out.empty()) throw ValidationError("--out is required");
  return out;
}

std::string fmt(double v) { return format_double(v); }

/// Chain directories of a fit, or the directory itself when it is one.
std::vector<fs::path> chain_dirs(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ValidationError("not a directory: " + dir.string());
  if (fs::exists(dir / "manifest.json")) return {dir};
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_directory() && e.path().filename().string().rfind("chain_", 0) == 0 && fs::exists(e.path() / "manifest.json"))
      out.push_back(e.path());
  std::sort(out.begin(), out.end(), [](const fs::path& a, const fs::path& b) {
    return std::stoi(a.filename().string().substr(6)) < std::stoi(b.filename().string().substr(6));
  });
  if (out.empty()) throw ValidationError("no sample directories found under " + dir.string());
  return out;
}

std::vector<PosteriorSamples> load_chains(const fs::path& dir, std::optional<int> q = std::nullopt) {
  std::vector<PosteriorSamples> runs;
  for (const auto& d : chain_dirs(dir)) runs.push_back(load_samples(d, q));
  return runs;
}

/// All chains' draws in one sample set (chain order).
PosteriorSamples pooled(std::vector<PosteriorSamples> runs) {
  PosteriorSamples all = std::move(runs.front());
  for (std::size_t k = 1; k < runs.size(); ++k) {
    if (runs[k].n != all.n || runs[k].p != all.p || runs[k].T != all.T || runs[k].space().q != all.space().q)
      throw ValidationError("chains disagree in dimensions");
    for (auto& d : runs[k].draws) all.draws.push_back(std::move(d));
  }
  return all;
}

Matrix andersen_loglik_matrix(const AndersenSamples& s) {
  if (s.draws.empty()) throw ValidationError("no retained samples");
  Matrix m(static_cast<Eigen::Index>(s.draws.size()), static_cast<Eigen::Index>(s.draws.front().loglik.size()));
  for (std::size_t k = 0; k < s.draws.size(); ++k)
    for (std::size_t c = 0; c < s.draws[k].loglik.size(); ++c)
      m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c)) = s.draws[k].loglik[c];
  return m;
}

json waic_json(const WaicResult& w) {
  return {{"lppd", w.lppd}, {"p_waic", w.p_waic}, {"elpd_waic", w.elpd_waic}, {"waic", w.waic}};
}

/// Latent-dimension label in the style of the comparison tables.
std::string model_label(const fs::path& chain_dir) {
  const json m = read_json(chain_dir / "manifest.json");
  if (m.at("model") == "andersen") return "andersen";
  const auto& c = m.at("config");
  if (c.at("metric") == "poincare") return "poincare(rho=" + fmt(c.at("rho").get<double>()) + ")";
  return "R^" + std::to_string(m.at("q").get<int>());
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_simulate(const CommonFlags& f, const std::string& scenario) {
  RunConfig rc = resolve(f);
  const fs::path out = require_out(f, rc);
  GroupScenario sc;
  if (scenario == "n300") sc = n300_scenario(rc.chain.seed);
  else if (scenario == "n600") sc = n600_scenario(rc.chain.seed);
  else throw ValidationError("unknown scenario '" + scenario + "' (expected n300 or n600)");
  const auto sd = generate_group_scenario(sc);
  fs::create_directories(out);
  {
    auto o = open_out(out / "responses.csv");
    write_responses(o, sd.data);
  }
  {
    auto o = open_out(out / "groups.csv");
    o << "individual,group\n";
    for (std::size_t i = 0; i < sd.group_of.size(); ++i) o << i + 1 << ',' << sd.group_of[i] << '\n';
  }
  write_flat_config(out / "config.txt", {{"command", "simulate"}, {"scenario", scenario}, {"seed", std::to_string(rc.chain.seed)}});
  std::cout << "wrote " << sd.data.n() << " individuals x " << sd.data.p() << " items x 2 times to "
            << (out / "responses.csv").string() << '\n';
  return 0;
}

int cmd_fit(const CommonFlags& f, std::string data_path, const std::optional<std::string>& model) {
  RunConfig rc = resolve(f);
  if (model) rc.set("model", *model);
  if (data_path.empty()) data_path = rc.input;
  if (data_path.empty()) throw ValidationError("--data (or 'input' in the config) is required");
  rc.input = data_path;
  const fs::path out = require_out(f, rc);
  rc.validate();
  const auto loaded = load_responses(data_path);
  fs::create_directories(out);
  write_flat_config(out / "config.txt", rc.echo());
  for (int k = 0; k < rc.n_chains; ++k) {
    const std::uint64_t seed = derive_seed(rc.chain.seed, static_cast<std::uint64_t>(k), 0x636861696eULL);
    const fs::path dir = out / ("chain_" + std::to_string(k + 1));
    if (rc.model == ModelKind::Andersen) {
      AndersenConfig ac;
      ac.iterations = rc.chain.iterations;
      ac.burnin = rc.chain.burnin;
      ac.thin = rc.chain.thin;
      ac.seed = seed;
      ac.hyper = rc.chain.hyper;
      const auto s = fit_andersen(loaded.data, ac);
      persist_andersen(s, dir);
      std::cout << "chain " << k + 1 << ": " << s.draws.size() << " draws (andersen)\n";
    } else {
      ChainConfig cc = rc.chain;
      cc.seed = seed;
      const auto s = run_chain(loaded.data, cc);
      persist_samples(s, dir);
      std::cout << "chain " << k + 1 << ": " << s.draws.size() << " draws";
      for (const auto& b : acceptance_report(s))
        std::cout << ", " << b.block << " acceptance " << (b.rate ? fmt(*b.rate) : "n/a") << (b.flagged ? " (!)" : "");
      std::cout << '\n';
    }
  }
  return 0;
}

int cmd_diagnose(const CommonFlags& f, const fs::path& samples_dir) {
  const auto dirs = chain_dirs(samples_dir);
  const fs::path out = f.out.empty() ? samples_dir : fs::path(f.out);
  fs::create_directories(out);
  const bool andersen = sample_model(dirs.front()) == "andersen";
  json waic_report = {{"schema_version", schema_version()}, {"model", andersen ? "andersen" : "latent-process"}};
  json acc_report = {{"schema_version", schema_version()}, {"chains", json::array()}};
  std::vector<Matrix> psrf_chains;
  std::vector<PosteriorSamples> runs;
  json per_chain = json::array();
  std::vector<Matrix> ll;
  for (std::size_t k = 0; k < dirs.size(); ++k) {
    if (andersen) {
      const auto s = load_andersen(dirs[k]);
      ll.push_back(andersen_loglik_matrix(s));
      Matrix m(static_cast<Eigen::Index>(s.draws.size()), s.n * s.T + s.p + 1);
      for (std::size_t d = 0; d < s.draws.size(); ++d) {
        const auto& pr = s.draws[d].params;
        Eigen::Index c = 0;
        for (Eigen::Index i = 0; i < pr.alpha.size(); ++i) m(static_cast<Eigen::Index>(d), c++) = pr.alpha.data()[i];
        for (Eigen::Index j = 0; j < pr.beta.size(); ++j) m(static_cast<Eigen::Index>(d), c++) = pr.beta(j);
        m(static_cast<Eigen::Index>(d), c) = pr.sigma_alpha2;
      }
      psrf_chains.push_back(std::move(m));
    } else {
      runs.push_back(load_samples(dirs[k]));
      ll.push_back(loglik_matrix(runs.back()));
      json blocks = json::array();
      for (const auto& b : acceptance_report(runs.back()))
        blocks.push_back({{"block", b.block},
                          {"proposed", b.proposed},
                          {"accepted", b.accepted},
                          {"rate", b.rate ? json(*b.rate) : json(nullptr)},
                          {"flagged", b.flagged}});
      acc_report["chains"].push_back({{"chain", k + 1}, {"blocks", blocks}});
    }
    json entry = waic_json(waic(ll.back()));
    entry["chain"] = k + 1;
    per_chain.push_back(entry);
  }
  Matrix all(0, ll.front().cols());
  for (const auto& m : ll) {
    if (m.cols() != all.cols()) throw ValidationError("chains disagree in the number of observations");
    Matrix next(all.rows() + m.rows(), all.cols());
    next << all, m;
    all = std::move(next);
  }
  const auto pooled_waic = waic(all);
  waic_report["pooled"] = waic_json(pooled_waic);
  waic_report["chains"] = per_chain;
  write_json(out / "waic.json", waic_report);
  std::cout << "WAIC " << fmt(pooled_waic.waic) << " (lppd " << fmt(pooled_waic.lppd) << ", p_waic "
            << fmt(pooled_waic.p_waic) << ")\n";
  if (!andersen) {
    write_json(out / "acceptance.json", acc_report);
    for (std::size_t k = 0; k < runs.size(); ++k)
      for (const auto& b : acceptance_report(runs[k]))
        if (b.flagged) std::cout << "chain " << k + 1 << ": " << b.block << " acceptance " << fmt(*b.rate) << " is outside the target band\n";
  }
  if (dirs.size() < 2) {
    write_json(out / "psrf.json", {{"schema_version", schema_version()}, {"psrf", nullptr}, {"note", "needs at least two chains"}});
    std::cout << "PSRF not computed: one chain\n";
    return 0;
  }
  const PsrfResult r = andersen ? psrf_multivariate(psrf_chains) : psrf_multivariate(runs);
  write_json(out / "psrf.json", {{"schema_version", schema_version()},
                                 {"psrf", r.psrf},
                                 {"cutoff", r.cutoff},
                                 {"converged", r.converged()},
                                 {"n_params", r.n_params},
                                 {"n_chains", r.n_chains},
                                 {"n_samples", r.n_samples},
                                 {"batch_size", r.batch_size}});
  std::cout << "PSRF " << fmt(r.psrf) << " cutoff " << fmt(r.cutoff) << '\n';
  if (!r.converged())
    throw ConvergenceFailure("PSRF " + fmt(r.psrf) + " exceeds the cutoff " + fmt(r.cutoff) +
                             ": the chains have not converged");
  return 0;
}

std::vector<int> parse_ids(const std::string& spec, int n) {
  std::vector<int> ids;
  if (spec.empty() || spec == "all") {
    for (int i = 0; i < n; ++i) ids.push_back(i);
    return ids;
  }
  for (auto part : split_csv(spec)) ids.push_back(static_cast<int>(parse_int(trim(part), "--ids")) - 1);
  return ids;
}

int cmd_summarize(const CommonFlags& f, const fs::path& samples_dir, double threshold, const std::string& ids) {
  const fs::path out = f.out.empty() ? samples_dir : fs::path(f.out);
  fs::create_directories(out);
  const auto dirs = chain_dirs(samples_dir);
  if (sample_model(dirs.front()) == "andersen") {
    AndersenSamples first = load_andersen(dirs.front());
    for (std::size_t k = 1; k < dirs.size(); ++k)
      for (auto& d : load_andersen(dirs[k]).draws) first.draws.push_back(std::move(d));
    json rows = json::array();
    for (int i = 0; i < first.n; ++i)
      for (int t = 1; t < first.T; ++t) {
        std::vector<double> v;
        for (const auto& d : first.draws) {
          const auto r = andersen_progress(d.params.alpha(i, t - 1), d.params.alpha(i, t));
          if (r.status == RateStatus::InRegime) v.push_back(r.value);
        }
        json row = {{"individual", i + 1}, {"time", t + 1},
                    {"in_regime_share", static_cast<double>(v.size()) / first.draws.size()}};
        if (!v.empty()) {
          const auto q = quantiles(v, {0.1, 0.5, 0.9});
          row["p10"] = q[0];
          row["median"] = q[1];
          row["p90"] = q[2];
        }
        rows.push_back(row);
      }
    write_json(out / "summaries.json", {{"schema_version", schema_version()}, {"model", "andersen"}, {"rates", rows}});
    std::cout << "wrote " << (out / "summaries.json").string() << '\n';
    return 0;
  }
  const auto samples = pooled(load_chains(samples_dir, f.dim));
  const auto sums = lambda_summaries(samples, threshold);
  json rows = json::array();
  for (const auto& s : sums)
    rows.push_back({{"individual", s.individual + 1},
                    {"time", s.time},
                    {"p10", s.p10},
                    {"median", s.median},
                    {"p90", s.p90},
                    {"p2.5", s.p025},
                    {"p97.5", s.p975},
                    {"prob_progress", s.prob_progress},
                    {"progress", s.progress}});
  const auto cls = classify_progress(sums, threshold);
  const auto n_prog = std::count(cls.progress.begin(), cls.progress.end(), true);
  write_json(out / "summaries.json", {{"schema_version", schema_version()},
                                      {"model", "latent-process"},
                                      {"threshold", threshold},
                                      {"retained", samples.draws.size()},
                                      {"progress_count", n_prog},
                                      {"rates", rows}});
  {
    auto o = open_out(out / "density.csv");
    o << "individual,time,bandwidth,grid,density\n";
    for (const auto& c : lambda_density_export(samples, parse_ids(ids, samples.n)))
      for (std::size_t g = 0; g < c.grid.size(); ++g)
        o << c.individual + 1 << ',' << c.time << ',' << fmt(c.bandwidth) << ',' << fmt(c.grid[g]) << ','
          << fmt(c.density[g]) << '\n';
  }
  std::cout << n_prog << " of " << sums.size() << " rates classified as progress (threshold " << fmt(threshold)
            << ")\n";
  return 0;
}

int cmd_predict(const CommonFlags& f, const fs::path& samples_dir, std::string data_path, int draws) {
  const fs::path out = f.out.empty() ? samples_dir : fs::path(f.out);
  if (data_path.empty() && fs::exists(samples_dir / "config.txt")) {
    auto in = open_in(samples_dir / "config.txt");
    const auto kv = parse_flat_config(in);
    if (const auto it = kv.find("input"); it != kv.end()) data_path = it->second;
  }
  if (data_path.empty()) throw ValidationError("--data is required");
  const auto loaded = load_responses(data_path);
  const auto samples = pooled(load_chains(samples_dir, f.dim));
  ChainRng rng(derive_seed(f.seed.value_or(samples.seed()), 0x707063ULL));
  const auto ppc = posterior_predictive(loaded.data, samples, draws, rng);
  fs::create_directories(out);
  auto o = open_out(out / "ppc.csv");
  o << "individual,time,n_observed,observed,lo,mid,hi,covered\n";
  for (const auto& r : ppc.rows)
    o << loaded.individuals[static_cast<std::size_t>(r.individual)] << ',' << r.time + 1 << ',' << r.n_observed << ','
      << fmt(r.observed) << ',' << fmt(r.lo) << ',' << fmt(r.mid) << ',' << fmt(r.hi) << ',' << (r.covered() ? 1 : 0)
      << '\n';
  for (int t = 0; t < loaded.data.T(); ++t)
    std::cout << "time " << t + 1 << ": 95% interval coverage " << fmt(predictive_coverage(ppc, t)) << '\n';
  return 0;
}

int cmd_export_map(const CommonFlags& f, const fs::path& samples_dir) {
  const fs::path out = f.out.empty() ? samples_dir : fs::path(f.out);
  const auto samples = pooled(load_chains(samples_dir, f.dim));
  const auto map = export_interaction_map(samples);
  fs::create_directories(out);
  auto o = open_out(out / "map.csv");
  o << "entity,index,time,label";
  for (Eigen::Index c = 0; c < map.coords.cols(); ++c) o << ",x" << c + 1;
  o << '\n';
  for (std::size_t r = 0; r < map.rows.size(); ++r) {
    const auto& row = map.rows[r];
    o << to_string(row.entity) << ',' << row.index + 1 << ',' << row.time << ',' << row.label;
    for (Eigen::Index c = 0; c < map.coords.cols(); ++c) o << ',' << fmt(map.coords(static_cast<Eigen::Index>(r), c));
    o << '\n';
  }
  std::cout << "wrote " << map.rows.size() << " map rows to " << (out / "map.csv").string() << '\n';
  return 0;
}

int cmd_compare(const CommonFlags& f, const std::vector<std::string>& fits) {
  struct Row {
    std::string model;
    double p10, p50, p90;
  };
  std::vector<Row> rows;
  for (const auto& fit : fits) {
    std::vector<double> w;
    const auto dirs = chain_dirs(fit);
    for (const auto& d : dirs) {
      if (sample_model(d) == "andersen") w.push_back(waic(andersen_loglik_matrix(load_andersen(d))).waic);
      else w.push_back(waic(load_samples(d)).waic);
    }
    const auto q = quantiles(w, {0.1, 0.5, 0.9});
    rows.push_back({model_label(dirs.front()), q[0], q[1], q[2]});
  }
  const auto best = std::min_element(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.p50 < b.p50; });
  std::ostringstream table;
  table << "model,waic_p10,waic_median,waic_p90,minimizer\n";
  for (const auto& r : rows)
    table << r.model << ',' << fmt(r.p10) << ',' << fmt(r.p50) << ',' << fmt(r.p90) << ','
          << (&r == &*best ? "yes" : "no") << '\n';
  std::cout << table.str();
  if (!f.out.empty()) {
    fs::create_directories(f.out);
    auto o = open_out(fs::path(f.out) / "compare.csv");
    o << table.str();
  }
  return 0;
}

int cmd_study(const CommonFlags& f, const std::string& scenario, int reps, const std::string& dims, int shorten,
              int ppc_draws) {
  RunConfig rc = resolve(f);
  const fs::path out = require_out(f, rc);
  StudyConfig cfg;
  int study_n = 0;
  if (scenario == "n300") {
    cfg.scenario = n300_scenario();
    study_n = 300;
  } else if (scenario == "n600") {
    cfg.scenario = n600_scenario();
    study_n = 600;
  } else {
    throw ValidationError("unknown scenario '" + scenario + "' (expected n300 or n600)");
  }
  cfg.q_list.clear();
  for (auto part : split_csv(dims)) cfg.q_list.push_back(static_cast<int>(parse_int(trim(part), "--dims")));
  for (int q : cfg.q_list) study_chain_config(study_n, q, shorten);  // validates every q up front
  cfg.n_reps = reps;
  cfg.seed = rc.chain.seed;
  cfg.ppc_draws = ppc_draws;
  const std::optional<int> iters = f.iters, burnin = f.burnin;
  cfg.chain_for_q = [=](int q) {
    ChainConfig c = study_chain_config(study_n, q, shorten);
    if (iters) c.iterations = *iters;
    if (burnin) c.burnin = *burnin;
    return c;
  };
  const auto report = run_replications(cfg, [](int rep, int q) {
    std::cerr << "replicate " << rep << " q=" << q << " done\n";
  });
  json reps_json = json::array();
  for (const auto& r : report.replicates) {
    json fits = json::array();
    for (const auto& fit : r.fits) {
      json groups = json::array();
      for (const auto& g : fit.groups)
        groups.push_back({{"group", g.group},
                          {"mean_median_lambda", g.mean_median_lambda},
                          {"negligible", g.negligible},
                          {"total", g.total}});
      fits.push_back({{"q", fit.q}, {"waic", waic_json(fit.waic)}, {"groups", groups}, {"ppc_coverage_t2", fit.ppc_coverage_t2}});
    }
    reps_json.push_back({{"replicate", r.replicate}, {"ok", r.ok}, {"error", r.error}, {"minimizer_q", r.minimizer_q}, {"fits", fits}});
  }
  json dims_json = json::array();
  for (const auto& d : report.dimensions)
    dims_json.push_back({{"q", d.q},
                         {"waic_p10", d.waic_p10},
                         {"waic_median", d.waic_p50},
                         {"waic_p90", d.waic_p90},
                         {"minimizer_frequency", d.minimizer_frequency},
                         {"minimizer_count", d.minimizer_count}});
  fs::create_directories(out);
  write_json(out / "study.json", {{"schema_version", schema_version()},
                                  {"scenario", scenario},
                                  {"seed", cfg.seed},
                                  {"shorten", shorten},
                                  {"replicates", reps_json},
                                  {"dimensions", dims_json},
                                  {"successful", report.successful}});
  std::cout << "model,waic_p10,waic_median,waic_p90,minimizer_frequency\n";
  for (const auto& d : report.dimensions)
    std::cout << "R^" << d.q << ',' << fmt(d.waic_p10) << ',' << fmt(d.waic_p50) << ',' << fmt(d.waic_p90) << ','
              << fmt(d.minimizer_frequency) << '\n';
  return report.successful == reps ? 0 : 2;
}

int cmd_dichotomize(const CommonFlags& f, const std::string& input, const std::string& rule) {
  if (f.out.empty()) throw ValidationError("--out is required");
  const CategoryMap m = rule == "cesd" ? cesd_rule() : parse_category_map(rule);
  dichotomize(fs::path(input), fs::path(f.out), m);
  std::cout << "wrote " << f.out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latent process model for longitudinal binary responses"};
  app.require_subcommand(1);
  CommonFlags flags;

  auto* sim = app.add_subcommand("simulate", "generate a group scenario data set");
  std::string scenario = "n300";
  add_common(sim, flags);
  sim->add_option("--scenario", scenario, "n300 or n600");

  auto* fit = app.add_subcommand("fit", "fit the model and persist posterior samples");
  std::string data;
  std::optional<std::string> model;
  add_common(fit, flags);
  fit->add_option("--data", data, "responses CSV");
  fit->add_option("--model", model, "latent-process or andersen");

  auto* diag = app.add_subcommand("diagnose", "WAIC, PSRF and acceptance rates");
  std::string samples;
  add_common(diag, flags);
  diag->add_option("samples", samples, "fit directory")->required();

  auto* summ = app.add_subcommand("summarize", "posterior summaries of the rates of progress");
  double threshold = 0.5;
  std::string ids = "all";
  add_common(summ, flags);
  summ->add_option("samples", samples, "fit directory")->required();
  summ->add_option("--threshold", threshold, "progress probability threshold");
  summ->add_option("--ids", ids, "comma separated individuals for density.csv, or 'all'");

  auto* pred = app.add_subcommand("predict", "posterior predictive proportions");
  int draws = 1000;
  add_common(pred, flags);
  pred->add_option("samples", samples, "fit directory")->required();
  pred->add_option("--data", data, "responses CSV (defaults to the fit's input)");
  pred->add_option("--draws", draws, "number of predictive draws");

  auto* map = app.add_subcommand("export-map", "median Procrustes-aligned interaction map");
  add_common(map, flags);
  map->add_option("samples", samples, "fit directory")->required();

  auto* cmp = app.add_subcommand("compare", "WAIC table across fits");
  std::vector<std::string> fits;
  add_common(cmp, flags);
  cmp->add_option("fits", fits, "fit directories")->required();

  auto* study = app.add_subcommand("study", "replicated simulation study across dimensions");
  int reps = 10, shorten = 10, ppc_draws = 1000;
  std::string dims = "1,2,3";
  add_common(study, flags);
  study->add_option("--scenario", scenario, "n300 or n600");
  study->add_option("--reps", reps, "replicates");
  study->add_option("--dims", dims, "comma separated latent dimensions");
  study->add_option("--shorten", shorten, "divide the preset chain lengths by this factor");
  study->add_option("--ppc-draws", ppc_draws, "posterior predictive draws per fit");

  auto* dich = app.add_subcommand("dichotomize", "map categorical responses to binary ones");
  std::string input, rule = "cesd";
  add_common(dich, flags);
  dich->add_option("--input", input, "categorical long-format CSV")->required();
  dich->add_option("--rule", rule, "'cesd' or a map such as 1:1,2:0");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 1;
  }

  try {
    if (*sim) return cmd_simulate(flags, scenario);
    if (*fit) return cmd_fit(flags, data, model);
    if (*diag) return cmd_diagnose(flags, samples);
    if (*summ) return cmd_summarize(flags, samples, threshold, ids);
    if (*pred) return cmd_predict(flags, samples, data, draws);
    if (*map) return cmd_export_map(flags, samples);
    if (*cmp) return cmd_compare(flags, fits);
    if (*study) return cmd_study(flags, scenario, reps, dims, shorten, ppc_draws);
    if (*dich) return cmd_dichotomize(flags, input, rule);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const ConvergenceFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
