// Response ingestion, dichotomization, flat configuration files, and
// on-disk persistence of posterior samples.
#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "lpm/andersen.hpp"
#include "lpm/mcmc.hpp"
#include "lpm/types.hpp"

namespace lpm {

namespace fs = std::filesystem;
using json = nlohmann::json;

inline constexpr int kSchemaMajor = 1;
inline constexpr int kSchemaMinor = 0;
inline std::string schema_version() { return std::to_string(kSchemaMajor) + "." + std::to_string(kSchemaMinor); }

/// Throws unless `version` has the supported major number.
inline void check_schema_version(const std::string& version, const std::string& what) {
  const auto dot = version.find('.');
  int major = -1;
  const std::string head = version.substr(0, dot);
  auto [ptr, ec] = std::from_chars(head.data(), head.data() + head.size(), major);
  if (ec != std::errc() || ptr != head.data() + head.size() || major != kSchemaMajor)
    throw ValidationError(what + ": unsupported schema version '" + version + "'");
}

// ---------------------------------------------------------------------------
// Number formatting: shortest representation that reads back bit-exactly.

inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw NumericalError("cannot format number");
  return std::string(buf, ptr);
}

inline double parse_double(std::string_view s, const std::string& context) {
  double v = 0.0;
  if (s == "inf" || s == "-inf" || s == "nan") throw ValidationError(context + ": non-finite value");
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ValidationError(context + ": not a number: '" + std::string(s) + "'");
  return v;
}

inline long long parse_int(std::string_view s, const std::string& context) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ValidationError(context + ": not an integer: '" + std::string(s) + "'");
  return v;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path.string() + "' for reading");
  return in;
}

inline std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  return out;
}

// ---------------------------------------------------------------------------
// Responses

struct LoadedResponses {
  ResponseTensor data;
  std::vector<std::string> individuals;  // ids in first-appearance order
  std::vector<std::string> items;
};

namespace detail {
struct LongRow {
  std::string individual, item;
  long long time;
  long long value;
  std::size_t line;
};

inline std::vector<LongRow> read_long_csv(std::istream& in, const std::string& name) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(name + ": empty file");
  const auto header = split_csv(line);
  if (header.size() != 4 || header[0] != "individual" || header[1] != "item" || header[2] != "time" ||
      header[3] != "response")
    throw ValidationError(name + ": header must be 'individual,item,time,response'");
  std::vector<LongRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto f = split_csv(line);
    const std::string where = name + " row " + std::to_string(lineno);
    if (f.size() != 4) throw ValidationError(where + ": expected 4 fields, found " + std::to_string(f.size()));
    if (f[0].empty() || f[1].empty()) throw ValidationError(where + ": empty identifier");
    rows.push_back({std::string(f[0]), std::string(f[1]), parse_int(f[2], where), parse_int(f[3], where), lineno});
  }
  return rows;
}
}  // namespace detail

/// Reads long-format binary responses. Individuals and items are indexed
/// by first appearance; time points must cover 1..T without gaps; absent
/// rows are unobserved cells.
inline LoadedResponses read_responses(std::istream& in, const std::string& name = "responses") {
  const auto rows = detail::read_long_csv(in, name);
  if (rows.empty()) throw ValidationError(name + ": no data rows");
  std::unordered_map<std::string, int> ind_idx, item_idx;
  LoadedResponses out;
  long long T = 0;
  std::vector<char> time_seen;
  for (const auto& r : rows) {
    const std::string where = name + " row " + std::to_string(r.line);
    if (r.time < 1 || r.time > 100000) throw ValidationError(where + ": time must be an integer in 1..100000");
    if (r.value != 0 && r.value != 1)
      throw ValidationError(where + ": response must be 0 or 1, found " + std::to_string(r.value));
    if (ind_idx.emplace(r.individual, static_cast<int>(out.individuals.size())).second)
      out.individuals.push_back(r.individual);
    if (item_idx.emplace(r.item, static_cast<int>(out.items.size())).second) out.items.push_back(r.item);
    T = std::max(T, r.time);
    if (static_cast<long long>(time_seen.size()) < T) time_seen.resize(static_cast<std::size_t>(T), 0);
    time_seen[static_cast<std::size_t>(r.time - 1)] = 1;
  }
  for (long long t = 0; t < T; ++t)
    if (!time_seen[static_cast<std::size_t>(t)])
      throw ValidationError(name + ": time points must be contiguous from 1; time " + std::to_string(t + 1) + " is absent");
  if (T < 2) throw ValidationError(name + ": at least two time points are required");
  out.data = ResponseTensor(static_cast<int>(out.individuals.size()), static_cast<int>(out.items.size()),
                            static_cast<int>(T));
  for (const auto& r : rows) {
    const int i = ind_idx[r.individual], j = item_idx[r.item], t = static_cast<int>(r.time - 1);
    if (out.data.observed(i, j, t))
      throw ValidationError(name + " row " + std::to_string(r.line) + ": duplicate cell (" + r.individual + ", " +
                            r.item + ", " + std::to_string(r.time) + ")");
    out.data.set(i, j, t, static_cast<int>(r.value));
  }
  out.data.validate_for_fit();
  return out;
}

inline LoadedResponses load_responses(const fs::path& path) {
  auto in = open_in(path);
  return read_responses(in, path.filename().string());
}

/// Writes observed cells in long format. Ids default to 1-based indices.
inline void write_responses(std::ostream& out, const ResponseTensor& y, const std::vector<std::string>& individuals = {},
                            const std::vector<std::string>& items = {}) {
  auto id = [](const std::vector<std::string>& v, int k) {
    return v.empty() ? std::to_string(k + 1) : v[static_cast<std::size_t>(k)];
  };
  out << "individual,item,time,response\n";
  for (int i = 0; i < y.n(); ++i)
    for (int t = 0; t < y.T(); ++t)
      for (int j = 0; j < y.p(); ++j)
        if (y.observed(i, j, t)) out << id(individuals, i) << ',' << id(items, j) << ',' << t + 1 << ',' << y.value(i, j, t) << '\n';
}

inline void save_responses(const fs::path& path, const LoadedResponses& r) {
  auto out = open_out(path);
  write_responses(out, r.data, r.individuals, r.items);
}

// ---------------------------------------------------------------------------
// Dichotomization

using CategoryMap = std::map<long long, int>;

/// Category 1 becomes 1, categories 2-4 become 0.
inline CategoryMap cesd_rule() { return {{1, 1}, {2, 0}, {3, 0}, {4, 0}}; }

/// Parses "1:0,2:1" into a category map.
inline CategoryMap parse_category_map(const std::string& spec) {
  CategoryMap m;
  for (auto part : split_csv(spec)) {
    const auto colon = part.find(':');
    if (colon == std::string_view::npos) throw ValidationError("category map entries must look like 'category:bit'");
    const auto cat = parse_int(trim(part.substr(0, colon)), "category map");
    const auto bit = parse_int(trim(part.substr(colon + 1)), "category map");
    if (bit != 0 && bit != 1) throw ValidationError("category map targets must be 0 or 1");
    if (!m.emplace(cat, static_cast<int>(bit)).second) throw ValidationError("category map repeats a category");
  }
  if (m.empty()) throw ValidationError("category map is empty");
  return m;
}

/// Maps raw categorical responses to binary ones, row by row.
inline void dichotomize(std::istream& in, std::ostream& out, const CategoryMap& rule, const std::string& name = "input") {
  const auto rows = detail::read_long_csv(in, name);
  out << "individual,item,time,response\n";
  for (const auto& r : rows) {
    const auto it = rule.find(r.value);
    if (it == rule.end())
      throw ValidationError(name + " row " + std::to_string(r.line) + ": category " + std::to_string(r.value) +
                            " is not covered by the rule");
    out << r.individual << ',' << r.item << ',' << r.time << ',' << it->second << '\n';
  }
}

inline void dichotomize(const fs::path& in_path, const fs::path& out_path, const CategoryMap& rule) {
  auto in = open_in(in_path);
  std::ostringstream buf;
  dichotomize(in, buf, rule, in_path.filename().string());
  auto out = open_out(out_path);
  out << buf.str();
}

// ---------------------------------------------------------------------------
// Flat configuration

/// `key = value` lines; '#' starts a comment. Later keys override earlier.
inline std::map<std::string, std::string> parse_flat_config(std::istream& in, const std::string& name = "config") {
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view s = line;
    if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos)
      throw ValidationError(name + " line " + std::to_string(lineno) + ": expected 'key = value'");
    const auto key = trim(s.substr(0, eq)), value = trim(s.substr(eq + 1));
    if (key.empty()) throw ValidationError(name + " line " + std::to_string(lineno) + ": empty key");
    kv[std::string(key)] = std::string(value);
  }
  return kv;
}

enum class ModelKind { LatentProcess, Andersen };

inline std::string to_string(ModelKind m) { return m == ModelKind::LatentProcess ? "latent-process" : "andersen"; }
inline ModelKind model_from_string(const std::string& s) {
  if (s == "latent-process" || s == "lpm") return ModelKind::LatentProcess;
  if (s == "andersen") return ModelKind::Andersen;
  throw ValidationError("unknown model '" + s + "' (expected latent-process or andersen)");
}

struct RunConfig {
  ModelKind model = ModelKind::LatentProcess;
  ChainConfig chain;
  int n_chains = 1;
  std::string input;
  std::string out;

  /// Applies one key. Unknown keys are a validation error.
  void set(const std::string& key, const std::string& value) {
    const std::string ctx = "config key '" + key + "'";
    auto num = [&] { return parse_double(value, ctx); };
    auto integer = [&] { return parse_int(value, ctx); };
    auto& h = chain.hyper;
    if (key == "model") model = model_from_string(value);
    else if (key == "metric") chain.space.kind = geometry_from_string(value);
    else if (key == "dim") chain.space.q = static_cast<int>(integer());
    else if (key == "radius") chain.space.rho = num();
    else if (key == "iterations" || key == "iters") chain.iterations = static_cast<int>(integer());
    else if (key == "burnin") chain.burnin = static_cast<int>(integer());
    else if (key == "thin") chain.thin = static_cast<int>(integer());
    else if (key == "seed") chain.seed = static_cast<std::uint64_t>(integer());
    else if (key == "chains") n_chains = static_cast<int>(integer());
    else if (key == "sd_a") chain.proposal_sd_a = num();
    else if (key == "sd_b") chain.proposal_sd_b = num();
    else if (key == "sd_lambda") chain.proposal_sd_lambda = num();
    else if (key == "adapt") chain.adapt = value == "true" || value == "1" || value == "yes";
    else if (key == "adapt_target") chain.adapt_target = num();
    else if (key == "scale_mode") chain.scale_mode = scale_mode_from_string(value);
    else if (key == "fixed_gamma") chain.fixed_gamma = num();
    else if (key == "input" || key == "data") input = value;
    else if (key == "out") out = value;
    else if (key == "sigma_beta") h.sigma_beta = num();
    else if (key == "sigma_gamma") h.sigma_gamma = num();
    else if (key == "sigma_a") h.sigma_a = num();
    else if (key == "sigma_b") h.sigma_b = num();
    else if (key == "a_sigma_alpha") h.a_sigma_alpha = num();
    else if (key == "b_sigma_alpha") h.b_sigma_alpha = num();
    else if (key == "mu0") h.mu0 = num();
    else if (key == "sigma0") h.sigma0 = num();
    else if (key == "mu1") h.mu1 = num();
    else if (key == "sigma1") h.sigma1 = num();
    else if (key == "a_pi") h.a_pi = num();
    else if (key == "b_pi") h.b_pi = num();
    else throw ValidationError("unknown " + ctx);
  }

  void apply(const std::map<std::string, std::string>& kv) {
    for (const auto& [k, v] : kv) set(k, v);
  }

  void validate() const {
    chain.validate();
    if (n_chains < 1) throw ValidationError("chains must be at least 1");
    if (chain.space.q < 1 || chain.space.q > 4) throw ValidationError("dim must lie in 1..4");
  }

  /// Every key in a form `set` reads back.
  std::map<std::string, std::string> echo() const {
    const auto& h = chain.hyper;
    std::map<std::string, std::string> kv = {
        {"model", to_string(model)},
        {"metric", to_string(chain.space.kind)},
        {"dim", std::to_string(chain.space.q)},
        {"radius", format_double(chain.space.rho)},
        {"iterations", std::to_string(chain.iterations)},
        {"burnin", std::to_string(chain.burnin)},
        {"thin", std::to_string(chain.thin)},
        {"seed", std::to_string(chain.seed)},
        {"chains", std::to_string(n_chains)},
        {"sd_a", format_double(chain.proposal_sd_a)},
        {"sd_b", format_double(chain.proposal_sd_b)},
        {"sd_lambda", format_double(chain.proposal_sd_lambda)},
        {"adapt", chain.adapt ? "true" : "false"},
        {"adapt_target", format_double(chain.adapt_target)},
        {"scale_mode", to_string(chain.scale_mode)},
        {"sigma_beta", format_double(h.sigma_beta)},
        {"sigma_gamma", format_double(h.sigma_gamma)},
        {"sigma_a", format_double(h.sigma_a)},
        {"sigma_b", format_double(h.sigma_b)},
        {"a_sigma_alpha", format_double(h.a_sigma_alpha)},
        {"b_sigma_alpha", format_double(h.b_sigma_alpha)},
        {"mu0", format_double(h.mu0)},
        {"sigma0", format_double(h.sigma0)},
        {"mu1", format_double(h.mu1)},
        {"sigma1", format_double(h.sigma1)},
        {"a_pi", format_double(h.a_pi)},
        {"b_pi", format_double(h.b_pi)},
    };
    if (chain.fixed_gamma) kv["fixed_gamma"] = format_double(*chain.fixed_gamma);
    if (!input.empty()) kv["input"] = input;
    if (!out.empty()) kv["out"] = out;
    return kv;
  }
};

inline RunConfig load_run_config(const fs::path& path) {
  auto in = open_in(path);
  RunConfig rc;
  rc.apply(parse_flat_config(in, path.filename().string()));
  return rc;
}

inline void write_flat_config(const fs::path& path, const std::map<std::string, std::string>& kv) {
  auto out = open_out(path);
  for (const auto& [k, v] : kv) out << k << " = " << v << '\n';
}

// ---------------------------------------------------------------------------
// Sample persistence

inline json chain_config_json(const ChainConfig& c) {
  const auto& h = c.hyper;
  json j = {
      {"iterations", c.iterations},
      {"burnin", c.burnin},
      {"thin", c.thin},
      {"seed", c.seed},
      {"proposal_sd_a", c.proposal_sd_a},
      {"proposal_sd_b", c.proposal_sd_b},
      {"proposal_sd_lambda", c.proposal_sd_lambda},
      {"adapt", c.adapt},
      {"adapt_target", c.adapt_target},
      {"metric", to_string(c.space.kind)},
      {"q", c.space.q},
      {"rho", c.space.rho},
      {"scale_mode", to_string(c.scale_mode)},
      {"hyper",
       {{"sigma_beta", h.sigma_beta},
        {"sigma_gamma", h.sigma_gamma},
        {"sigma_a", h.sigma_a},
        {"sigma_b", h.sigma_b},
        {"a_sigma_alpha", h.a_sigma_alpha},
        {"b_sigma_alpha", h.b_sigma_alpha},
        {"mu0", h.mu0},
        {"sigma0", h.sigma0},
        {"mu1", h.mu1},
        {"sigma1", h.sigma1},
        {"a_pi", h.a_pi},
        {"b_pi", h.b_pi}}},
  };
  j["fixed_gamma"] = c.fixed_gamma ? json(*c.fixed_gamma) : json(nullptr);
  return j;
}

inline ChainConfig chain_config_from_json(const json& j) {
  ChainConfig c;
  c.iterations = j.at("iterations").get<int>();
  c.burnin = j.at("burnin").get<int>();
  c.thin = j.at("thin").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.proposal_sd_a = j.at("proposal_sd_a").get<double>();
  c.proposal_sd_b = j.at("proposal_sd_b").get<double>();
  c.proposal_sd_lambda = j.at("proposal_sd_lambda").get<double>();
  c.adapt = j.at("adapt").get<bool>();
  c.adapt_target = j.at("adapt_target").get<double>();
  c.space.kind = geometry_from_string(j.at("metric").get<std::string>());
  c.space.q = j.at("q").get<int>();
  c.space.rho = j.at("rho").get<double>();
  c.scale_mode = scale_mode_from_string(j.at("scale_mode").get<std::string>());
  const auto& h = j.at("hyper");
  c.hyper.sigma_beta = h.at("sigma_beta").get<double>();
  c.hyper.sigma_gamma = h.at("sigma_gamma").get<double>();
  c.hyper.sigma_a = h.at("sigma_a").get<double>();
  c.hyper.sigma_b = h.at("sigma_b").get<double>();
  c.hyper.a_sigma_alpha = h.at("a_sigma_alpha").get<double>();
  c.hyper.b_sigma_alpha = h.at("b_sigma_alpha").get<double>();
  c.hyper.mu0 = h.at("mu0").get<double>();
  c.hyper.sigma0 = h.at("sigma0").get<double>();
  c.hyper.mu1 = h.at("mu1").get<double>();
  c.hyper.sigma1 = h.at("sigma1").get<double>();
  c.hyper.a_pi = h.at("a_pi").get<double>();
  c.hyper.b_pi = h.at("b_pi").get<double>();
  if (j.contains("fixed_gamma") && !j.at("fixed_gamma").is_null()) c.fixed_gamma = j.at("fixed_gamma").get<double>();
  return c;
}

inline void write_json(const fs::path& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

inline json read_json(const fs::path& path) {
  auto in = open_in(path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(path.filename().string() + ": " + e.what());
  }
}

namespace detail {
/// Reads a CSV body (after the header) as rows of doubles, checking width.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline Table read_table(const fs::path& path) {
  auto in = open_in(path);
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path.filename().string() + ": empty file");
  for (auto f : split_csv(line)) t.header.emplace_back(f);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::vector<std::string> row;
    for (auto f : split_csv(line)) row.emplace_back(f);
    if (row.size() != t.header.size())
      throw ValidationError(path.filename().string() + " row " + std::to_string(lineno) + ": truncated or ragged row");
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline void expect_rows(const Table& t, std::size_t n, const fs::path& path) {
  if (t.rows.size() != n)
    throw ValidationError(path.filename().string() + ": expected " + std::to_string(n) + " rows, found " +
                          std::to_string(t.rows.size()));
}
}  // namespace detail

/// Writes a posterior sample directory: manifest.json, params.csv,
/// positions.csv, lambda.csv, r.csv, pi.csv and loglik.csv.
inline void persist_samples(const PosteriorSamples& s, const fs::path& dir) {
  fs::create_directories(dir);
  const int n = s.n, p = s.p, steps = s.T - 1, q = s.space().q;
  const std::size_t S = s.draws.size();
  const std::size_t N = S ? s.draws.front().loglik.size() : 0;
  auto rate_json = [](const AcceptanceCounter& c) { return json{{"proposed", c.proposed}, {"accepted", c.accepted}}; };
  json manifest = {
      {"schema_version", schema_version()},
      {"model", "latent-process"},
      {"n", n},
      {"p", p},
      {"T", s.T},
      {"q", q},
      {"seed", s.seed()},
      {"retained", S},
      {"observations", N},
      {"config", chain_config_json(s.config)},
      {"acceptance", {{"lambda", rate_json(s.acceptance.lambda)}, {"a1", rate_json(s.acceptance.a1)}, {"b", rate_json(s.acceptance.b)}}},
      {"final_proposal_sd", {{"a", s.final_sd_a}, {"b", s.final_sd_b}, {"lambda", s.final_sd_lambda}}},
  };
  write_json(dir / "manifest.json", manifest);

  {
    auto out = open_out(dir / "params.csv");
    out << "iteration,gamma,sigma_alpha2,log_posterior";
    for (int i = 0; i < n; ++i) out << ",alpha_" << i + 1;
    for (int j = 0; j < p; ++j) out << ",beta_" << j + 1;
    out << '\n';
    for (const auto& d : s.draws) {
      out << d.iteration << ',' << format_double(d.params.gamma) << ',' << format_double(d.params.sigma_alpha2) << ','
          << format_double(d.log_posterior);
      for (int i = 0; i < n; ++i) out << ',' << format_double(d.params.alpha(i));
      for (int j = 0; j < p; ++j) out << ',' << format_double(d.params.beta(j));
      out << '\n';
    }
  }
  {
    auto out = open_out(dir / "positions.csv");
    out << "iteration,kind,index";
    for (int c = 0; c < q; ++c) out << ",x" << c + 1;
    out << '\n';
    for (const auto& d : s.draws) {
      auto emit = [&](const char* kind, int idx, auto row) {
        out << d.iteration << ',' << kind << ',' << idx + 1;
        for (int c = 0; c < q; ++c) out << ',' << format_double(row(c));
        out << '\n';
      };
      for (int i = 0; i < n; ++i) emit("a1", i, d.state.a1.row(i));
      for (int j = 0; j < p; ++j) emit("b", j, d.state.B.row(j));
    }
  }
  auto rate_file = [&](const char* file, auto get) {
    auto out = open_out(dir / file);
    out << "iteration";
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < steps; ++k) out << ",i" << i + 1 << "_t" << k + 2;
    out << '\n';
    for (const auto& d : s.draws) {
      out << d.iteration;
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < steps; ++k) out << ',' << get(d, i, k);
      out << '\n';
    }
  };
  rate_file("lambda.csv", [](const Draw& d, int i, int k) { return format_double(d.state.lambda(i, k)); });
  rate_file("r.csv", [](const Draw& d, int i, int k) { return std::to_string(d.state.r(i, k)); });
  rate_file("pi.csv", [](const Draw& d, int i, int k) { return format_double(d.state.pi(i, k)); });
  {
    auto out = open_out(dir / "loglik.csv");
    out << "iteration";
    for (std::size_t c = 0; c < N; ++c) out << ",obs_" << c + 1;
    out << '\n';
    for (const auto& d : s.draws) {
      out << d.iteration;
      for (double v : d.loglik) out << ',' << format_double(v);
      out << '\n';
    }
  }
}

/// Reads a sample directory written by persist_samples. When
/// `expected_q` is given a different latent dimension is an error.
inline PosteriorSamples load_samples(const fs::path& dir, std::optional<int> expected_q = std::nullopt) {
  const json m = read_json(dir / "manifest.json");
  try {
    check_schema_version(m.at("schema_version").get<std::string>(), "manifest.json");
    if (m.at("model").get<std::string>() != "latent-process")
      throw ValidationError("manifest.json: sample directory holds a '" + m.at("model").get<std::string>() + "' fit");
    PosteriorSamples s;
    s.n = m.at("n").get<int>();
    s.p = m.at("p").get<int>();
    s.T = m.at("T").get<int>();
    s.config = chain_config_from_json(m.at("config"));
    const int q = m.at("q").get<int>();
    if (q != s.config.space.q) throw ValidationError("manifest.json: dimension disagrees with the config echo");
    if (expected_q && *expected_q != q)
      throw ValidationError("dimension mismatch: samples have q=" + std::to_string(q) + " but q=" +
                            std::to_string(*expected_q) + " was requested");
    const auto S = m.at("retained").get<std::size_t>();
    const auto N = m.at("observations").get<std::size_t>();
    auto counter = [&](const char* k) {
      AcceptanceCounter c;
      c.proposed = m.at("acceptance").at(k).at("proposed").get<std::uint64_t>();
      c.accepted = m.at("acceptance").at(k).at("accepted").get<std::uint64_t>();
      return c;
    };
    s.acceptance = {counter("lambda"), counter("a1"), counter("b")};
    s.final_sd_a = m.at("final_proposal_sd").at("a").get<double>();
    s.final_sd_b = m.at("final_proposal_sd").at("b").get<double>();
    s.final_sd_lambda = m.at("final_proposal_sd").at("lambda").get<double>();

    const int n = s.n, p = s.p, steps = s.T - 1;
    const auto params = detail::read_table(dir / "params.csv");
    detail::expect_rows(params, S, dir / "params.csv");
    if (params.header.size() != static_cast<std::size_t>(4 + n + p))
      throw ValidationError("params.csv: column count disagrees with the manifest");
    s.draws.resize(S);
    for (std::size_t k = 0; k < S; ++k) {
      const auto& row = params.rows[k];
      Draw& d = s.draws[k];
      const std::string ctx = "params.csv row " + std::to_string(k + 2);
      d.iteration = static_cast<int>(parse_int(row[0], ctx));
      d.params.gamma = parse_double(row[1], ctx);
      d.params.sigma_alpha2 = parse_double(row[2], ctx);
      d.log_posterior = parse_double(row[3], ctx);
      d.params.alpha = Vector(n);
      d.params.beta = Vector(p);
      for (int i = 0; i < n; ++i) d.params.alpha(i) = parse_double(row[static_cast<std::size_t>(4 + i)], ctx);
      for (int j = 0; j < p; ++j) d.params.beta(j) = parse_double(row[static_cast<std::size_t>(4 + n + j)], ctx);
      d.state.a1 = Points(n, q);
      d.state.B = Points(p, q);
      d.state.lambda = Matrix(n, steps);
      d.state.pi = Matrix(n, steps);
      d.state.r = IntMatrix(n, steps);
    }
    const auto pos = detail::read_table(dir / "positions.csv");
    detail::expect_rows(pos, S * static_cast<std::size_t>(n + p), dir / "positions.csv");
    if (pos.header.size() != static_cast<std::size_t>(3 + q))
      throw ValidationError("positions.csv: column count disagrees with the manifest dimension");
    for (std::size_t r = 0; r < pos.rows.size(); ++r) {
      const auto& row = pos.rows[r];
      const std::string ctx = "positions.csv row " + std::to_string(r + 2);
      Draw& d = s.draws[r / static_cast<std::size_t>(n + p)];
      const auto idx = parse_int(row[2], ctx) - 1;
      Points& target_pts = row[1] == "a1" ? d.state.a1 : d.state.B;
      if (row[1] != "a1" && row[1] != "b") throw ValidationError(ctx + ": unknown kind '" + row[1] + "'");
      if (idx < 0 || idx >= target_pts.rows()) throw ValidationError(ctx + ": index out of range");
      for (int c = 0; c < q; ++c) target_pts(idx, c) = parse_double(row[static_cast<std::size_t>(3 + c)], ctx);
    }
    auto read_rates = [&](const char* file, auto set) {
      const auto t = detail::read_table(dir / file);
      detail::expect_rows(t, S, dir / file);
      if (t.header.size() != static_cast<std::size_t>(1 + n * steps))
        throw ValidationError(std::string(file) + ": column count disagrees with the manifest");
      for (std::size_t k = 0; k < S; ++k)
        for (int i = 0; i < n; ++i)
          for (int c = 0; c < steps; ++c)
            set(s.draws[k], i, c, t.rows[k][static_cast<std::size_t>(1 + i * steps + c)],
                std::string(file) + " row " + std::to_string(k + 2));
    };
    read_rates("lambda.csv", [](Draw& d, int i, int c, const std::string& v, const std::string& ctx) {
      d.state.lambda(i, c) = parse_double(v, ctx);
    });
    read_rates("pi.csv", [](Draw& d, int i, int c, const std::string& v, const std::string& ctx) {
      d.state.pi(i, c) = parse_double(v, ctx);
    });
    read_rates("r.csv", [](Draw& d, int i, int c, const std::string& v, const std::string& ctx) {
      d.state.r(i, c) = static_cast<int>(parse_int(v, ctx));
    });
    const auto ll = detail::read_table(dir / "loglik.csv");
    detail::expect_rows(ll, S, dir / "loglik.csv");
    if (ll.header.size() != N + 1) throw ValidationError("loglik.csv: column count disagrees with the manifest");
    for (std::size_t k = 0; k < S; ++k) {
      auto& row = s.draws[k].loglik;
      row.resize(N);
      for (std::size_t c = 0; c < N; ++c)
        row[c] = parse_double(ll.rows[k][c + 1], "loglik.csv row " + std::to_string(k + 2));
    }
    return s;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("manifest.json: ") + e.what());
  }
}

/// Andersen fits: manifest.json (model "andersen"), params.csv with
/// abilities per time point, and loglik.csv.
inline void persist_andersen(const AndersenSamples& s, const fs::path& dir) {
  fs::create_directories(dir);
  const std::size_t N = s.draws.empty() ? 0 : s.draws.front().loglik.size();
  const auto& h = s.config.hyper;
  json manifest = {
      {"schema_version", schema_version()},
      {"model", "andersen"},
      {"n", s.n},
      {"p", s.p},
      {"T", s.T},
      {"seed", s.config.seed},
      {"retained", s.draws.size()},
      {"observations", N},
      {"config",
       {{"iterations", s.config.iterations},
        {"burnin", s.config.burnin},
        {"thin", s.config.thin},
        {"seed", s.config.seed},
        {"hyper", {{"sigma_beta", h.sigma_beta}, {"a_sigma_alpha", h.a_sigma_alpha}, {"b_sigma_alpha", h.b_sigma_alpha}}}}},
  };
  write_json(dir / "manifest.json", manifest);
  {
    auto out = open_out(dir / "params.csv");
    out << "iteration,sigma_alpha2";
    for (int i = 0; i < s.n; ++i)
      for (int t = 0; t < s.T; ++t) out << ",alpha_" << i + 1 << "_t" << t + 1;
    for (int j = 0; j < s.p; ++j) out << ",beta_" << j + 1;
    out << '\n';
    for (const auto& d : s.draws) {
      out << d.iteration << ',' << format_double(d.params.sigma_alpha2);
      for (int i = 0; i < s.n; ++i)
        for (int t = 0; t < s.T; ++t) out << ',' << format_double(d.params.alpha(i, t));
      for (int j = 0; j < s.p; ++j) out << ',' << format_double(d.params.beta(j));
      out << '\n';
    }
  }
  auto out = open_out(dir / "loglik.csv");
  out << "iteration";
  for (std::size_t c = 0; c < N; ++c) out << ",obs_" << c + 1;
  out << '\n';
  for (const auto& d : s.draws) {
    out << d.iteration;
    for (double v : d.loglik) out << ',' << format_double(v);
    out << '\n';
  }
}

inline AndersenSamples load_andersen(const fs::path& dir) {
  const json m = read_json(dir / "manifest.json");
  try {
    check_schema_version(m.at("schema_version").get<std::string>(), "manifest.json");
    if (m.at("model").get<std::string>() != "andersen") throw ValidationError("manifest.json: not an Andersen fit");
    AndersenSamples s;
    s.n = m.at("n").get<int>();
    s.p = m.at("p").get<int>();
    s.T = m.at("T").get<int>();
    const auto& c = m.at("config");
    s.config.iterations = c.at("iterations").get<int>();
    s.config.burnin = c.at("burnin").get<int>();
    s.config.thin = c.at("thin").get<int>();
    s.config.seed = c.at("seed").get<std::uint64_t>();
    s.config.hyper.sigma_beta = c.at("hyper").at("sigma_beta").get<double>();
    s.config.hyper.a_sigma_alpha = c.at("hyper").at("a_sigma_alpha").get<double>();
    s.config.hyper.b_sigma_alpha = c.at("hyper").at("b_sigma_alpha").get<double>();
    const auto S = m.at("retained").get<std::size_t>();
    const auto N = m.at("observations").get<std::size_t>();
    const auto params = detail::read_table(dir / "params.csv");
    detail::expect_rows(params, S, dir / "params.csv");
    if (params.header.size() != static_cast<std::size_t>(2 + s.n * s.T + s.p))
      throw ValidationError("params.csv: column count disagrees with the manifest");
    const auto ll = detail::read_table(dir / "loglik.csv");
    detail::expect_rows(ll, S, dir / "loglik.csv");
    if (ll.header.size() != N + 1) throw ValidationError("loglik.csv: column count disagrees with the manifest");
    s.draws.resize(S);
    for (std::size_t k = 0; k < S; ++k) {
      const auto& row = params.rows[k];
      const std::string ctx = "params.csv row " + std::to_string(k + 2);
      auto& d = s.draws[k];
      d.iteration = static_cast<int>(parse_int(row[0], ctx));
      d.params.sigma_alpha2 = parse_double(row[1], ctx);
      d.params.alpha = Matrix(s.n, s.T);
      d.params.beta = Vector(s.p);
      std::size_t col = 2;
      for (int i = 0; i < s.n; ++i)
        for (int t = 0; t < s.T; ++t) d.params.alpha(i, t) = parse_double(row[col++], ctx);
      for (int j = 0; j < s.p; ++j) d.params.beta(j) = parse_double(row[col++], ctx);
      d.loglik.resize(N);
      for (std::size_t c2 = 0; c2 < N; ++c2) d.loglik[c2] = parse_double(ll.rows[k][c2 + 1], "loglik.csv");
    }
    return s;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("manifest.json: ") + e.what());
  }
}

/// Model tag of a sample directory.
inline std::string sample_model(const fs::path& dir) {
  const json m = read_json(dir / "manifest.json");
  if (!m.contains("model") || !m.contains("schema_version")) throw ValidationError("manifest.json: missing model tag");
  check_schema_version(m.at("schema_version").get<std::string>(), "manifest.json");
  return m.at("model").get<std::string>();
}

}  // namespace lpm
