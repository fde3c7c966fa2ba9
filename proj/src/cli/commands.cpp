#include "commands.hpp"

#include "csv.hpp"
#include "verify.hpp"

#include "bbq/pipeline.hpp"
#include "bbq/signal.hpp"
#include "bbq/theory.hpp"
#include "bbq/transform.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <optional>
#include <sstream>

namespace bbq::cli {

namespace {

using nlohmann::json;

struct Output {
  std::string path;
  std::string format = "csv";
};

void add_output_options(CLI::App* cmd, Output& o) {
  cmd->add_option("--out", o.path, "Output file (stdout when omitted)");
  cmd->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
}

struct AlphaInput {
  std::vector<double> single;
  std::string grid;
};

void add_alpha_options(CLI::App* cmd, AlphaInput& a) {
  cmd->add_option("--alpha", a.single, "Step ratio q2/q1 (repeatable)");
  cmd->add_option("--alphas", a.grid, "Step ratio grid a:b:step");
}

std::vector<double> resolve_alphas(const AlphaInput& a, const std::string& fallback) {
  std::vector<double> alphas = a.single;
  if (!a.grid.empty()) {
    const auto g = parse_alpha_grid(a.grid);
    alphas.insert(alphas.end(), g.begin(), g.end());
  }
  if (alphas.empty()) alphas = parse_alpha_grid(fallback);
  for (double v : alphas) {
    if (!std::isfinite(v) || v < 1.0) throw UsageError("alpha values must be finite and >= 1");
  }
  return alphas;
}

OrthogonalTransform transform_or_usage(const std::string& spec) {
  try {
    return parse_transform(spec);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

// Writes `table` (with a manifest sidecar) or a JSON document, to a file or to `out`.
void emit_table(const CsvTable& table, const json& manifest, const Output& o, std::ostream& out) {
  if (o.format == "json") {
    const std::string text = json{{"manifest", manifest}, {"rows", table.to_json()}}.dump(2) + "\n";
    if (o.path.empty()) {
      out << text;
    } else {
      write_file(o.path, text);
    }
    return;
  }
  std::ostringstream csv;
  table.write(csv);
  if (o.path.empty()) {
    out << csv.str();
    return;
  }
  write_file(o.path, csv.str());
  write_file(output_stem(o.path) + ".manifest.json", manifest.dump(2) + "\n");
}

struct GammaArgs {
  AlphaInput alpha;
  std::string transform = "dct:16";
  std::size_t samples = 100000;
  std::size_t m_range = 1000;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  Output output;
};

GammaOptions gamma_options(std::size_t samples, std::size_t m_range, std::uint64_t seed, unsigned workers) {
  if (samples == 0) throw UsageError("--samples must be positive");
  if (m_range == 0) throw UsageError("--m-range must be positive");
  GammaOptions g;
  g.samples = samples;
  g.m_range = m_range;
  g.seed = seed;
  g.workers = workers;
  return g;
}

int cmd_gamma(const GammaArgs& a, std::ostream& out, std::ostream& err) {
  const auto alphas = resolve_alphas(a.alpha, "1:3:0.1");
  const auto t = transform_or_usage(a.transform);
  GammaCache cache(t, gamma_options(a.samples, a.m_range, a.seed, a.workers));
  CsvTable table({"alpha", "gamma1", "gamma1_se", "gamma12", "gamma12_se"});
  for (double alpha : alphas) {
    const auto& g = cache.get(alpha);
    if (!g.warning.empty()) err << "warning: alpha=" << format_double(alpha) << ": " << g.warning << "\n";
    table.add_row(std::vector<double>{alpha, g.gamma1, g.se_gamma1, g.gamma12, g.se_gamma12});
  }
  const json params = {{"alphas", alphas},      {"transform", t.name()}, {"samples", a.samples},
                       {"m_range", a.m_range},  {"format", a.output.format}};
  emit_table(table, make_manifest("gamma", params, {a.seed}), a.output, out);
  return kExitOk;
}

struct SnrLossArgs {
  AlphaInput alpha;
  std::string scenario = "two_baseband";
  std::string transform = "dct:16";
  std::size_t samples = 100000;
  std::size_t m_range = 1000;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  Output output;
};

int cmd_snrloss(const SnrLossArgs& a, std::ostream& out, std::ostream&) {
  const auto alphas = resolve_alphas(a.alpha, "1:8:0.25");
  const auto t = transform_or_usage(a.transform);
  GammaCache cache(t, gamma_options(a.samples, a.m_range, a.seed, a.workers));
  CsvTable table({"alpha", "snr_loss_db"});
  for (double alpha : alphas) {
    const double loss =
        a.scenario == "one_baseband" ? snr_loss_one_baseband(alpha) : snr_loss_two_baseband(alpha, cache);
    table.add_row(std::vector<double>{alpha, loss});
  }
  json params = {{"alphas", alphas}, {"scenario", a.scenario}, {"format", a.output.format}};
  if (a.scenario == "two_baseband") {
    params["transform"] = t.name();
    params["samples"] = a.samples;
    params["m_range"] = a.m_range;
  }
  emit_table(table, make_manifest("snrloss", params, {a.seed}), a.output, out);
  return kExitOk;
}

struct SimulateArgs {
  std::string case_name = "a";
  std::optional<double> rho;
  std::optional<double> sigma;
  std::optional<std::size_t> block_len;
  std::optional<double> q1;
  std::vector<double> multipliers = {8.0, 4.0, 2.0, 1.0};
  std::size_t blocks = kRecommendedBlocks;
  std::uint64_t seed = 1;
  std::string transform;
  std::string mode = "both";
  std::size_t samples = 100000;
  std::size_t m_range = 1000;
  unsigned workers = 1;
  Output output;
};

CsvTable rd_table(const std::vector<RDPoint>& points) {
  CsvTable t({"bits_per_sample", "mse", "snr_db", "q2"});
  for (const auto& p : points) t.add_row(std::vector<double>{p.bits_per_sample, p.mse, p.snr_db, p.q2});
  return t;
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  double rho = 0.0, sigma = 0.0;
  std::size_t len = 0;
  if (a.case_name == "custom") {
    if (!a.rho || !a.sigma || !a.block_len) throw UsageError("--case custom needs --rho, --sigma and --block-len");
    rho = *a.rho;
    sigma = *a.sigma;
    len = *a.block_len;
  } else {
    if (a.rho || a.sigma || a.block_len) {
      throw UsageError("--rho, --sigma and --block-len only apply to --case custom");
    }
    rho = a.case_name == "a" ? 0.4 : 0.9;
    sigma = 1.0 / std::sqrt(1.0 - rho * rho);
    len = a.case_name == "a" ? 16 : 256;
  }
  if (len == 0) throw UsageError("--block-len must be positive");
  if (a.blocks == 0) throw UsageError("--blocks must be positive");
  if (a.multipliers.empty()) throw UsageError("--q2-multipliers must not be empty");
  const double q1 = a.q1.value_or(sigma / 10.0);
  if (!std::isfinite(q1) || q1 <= 0.0) throw UsageError("--q1 must be positive");
  std::vector<double> q2s;
  for (double m : a.multipliers) {
    if (!std::isfinite(m) || m < 1.0) throw UsageError("q2 multipliers must be >= 1");
    q2s.push_back(q1 * m);
  }
  const auto t = transform_or_usage(a.transform.empty() ? "dct:" + std::to_string(len) : a.transform);
  if (t.size() != len) throw UsageError("transform size does not match the block length");

  Ar1Config src{rho, sigma, len * a.blocks, a.seed};
  try {
    src.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (a.blocks < kRecommendedBlocks) {
    err << "warning: " << a.blocks << " blocks per point is below the recommended " << kRecommendedBlocks
        << "; SNR values will be noisy\n";
  }
  const GammaOptions gopts = gamma_options(a.samples, a.m_range, a.seed, a.workers);

  const auto signal = gen_ar1(src);
  SweepOptions sweep;
  sweep.workers = a.workers;
  std::optional<std::vector<RDPoint>> coarse, negligible;
  if (a.mode != "negligible") coarse = rd_sweep(signal, t, q1, q2s, ReferenceMode::coarse_q1, sweep);
  if (a.mode != "coarse") negligible = rd_sweep(signal, t, q1, q2s, ReferenceMode::negligible_q1, sweep);

  std::optional<CsvTable> gaps;
  if (coarse && negligible) {
    GammaCache cache(t, gopts);
    const auto diff = snr_gaps(*negligible, *coarse);
    gaps.emplace(std::vector<std::string>{"q2", "alpha", "gap_db", "predicted_gap_db"});
    for (std::size_t i = 0; i < q2s.size(); ++i) {
      const double alpha = q2s[i] / q1;
      gaps->add_row(std::vector<double>{q2s[i], alpha, diff[i], snr_loss_two_baseband(alpha, cache)});
    }
  }

  const json params = {{"case", a.case_name}, {"rho", rho},         {"sigma", sigma},
                       {"block_len", len},    {"q1", q1},           {"q2_multipliers", a.multipliers},
                       {"blocks", a.blocks},  {"transform", t.name()}, {"mode", a.mode},
                       {"samples", a.samples}, {"m_range", a.m_range}, {"format", a.output.format}};
  const json manifest = make_manifest("simulate", params, {a.seed});

  if (a.output.format == "json") {
    json doc = {{"manifest", manifest}};
    if (coarse) doc["coarse"] = rd_table(*coarse).to_json();
    if (negligible) doc["negligible"] = rd_table(*negligible).to_json();
    if (gaps) doc["gaps"] = gaps->to_json();
    const std::string text = doc.dump(2) + "\n";
    if (a.output.path.empty()) {
      out << text;
    } else {
      write_file(a.output.path, text);
    }
    return kExitOk;
  }

  auto csv_text = [](const CsvTable& table) {
    std::ostringstream s;
    table.write(s);
    return s.str();
  };
  if (a.output.path.empty()) {
    if (gaps) {
      out << csv_text(*gaps);
    } else {
      out << csv_text(rd_table(coarse ? *coarse : *negligible));
    }
    return kExitOk;
  }
  const std::string stem = output_stem(a.output.path);
  if (coarse) write_file(stem + ".coarse.csv", csv_text(rd_table(*coarse)));
  if (negligible) write_file(stem + ".negligible.csv", csv_text(rd_table(*negligible)));
  if (gaps) write_file(stem + ".gaps.csv", csv_text(*gaps));
  write_file(stem + ".manifest.json", manifest.dump(2) + "\n");
  return kExitOk;
}

struct VerifyArgs {
  std::string suite;
  std::uint64_t seed = 1;
  std::string out_path;
};

int cmd_verify(const VerifyArgs& a, std::ostream& out, std::ostream& err) {
  std::vector<Check> checks;
  try {
    checks = run_suite(a.suite, a.seed);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  json list = json::array();
  std::size_t passed = 0;
  for (const auto& c : checks) {
    list.push_back({{"name", c.name},
                    {"value", c.value},
                    {"reference", c.reference},
                    {"tolerance", c.tolerance},
                    {"pass", c.pass}});
    if (c.pass) {
      ++passed;
    } else {
      err << "FAIL " << c.name << ": value " << format_double(c.value) << ", reference "
          << format_double(c.reference) << ", tolerance " << format_double(c.tolerance) << "\n";
    }
  }
  const json doc = {{"manifest", make_manifest("verify", {{"suite", a.suite}}, {a.seed})}, {"checks", list}};
  const std::string text = doc.dump(2) + "\n";
  if (a.out_path.empty()) {
    out << text;
  } else {
    write_file(a.out_path, text);
  }
  err << a.suite << ": " << passed << "/" << checks.size() << " checks passed\n";
  return passed == checks.size() ? kExitOk : kExitVerifyFailed;
}

}  // namespace

std::vector<double> parse_alpha_grid(const std::string& text) {
  std::vector<double> parts;
  std::size_t start = 0;
  for (;;) {
    const auto colon = text.find(':', start);
    const std::string piece = text.substr(start, colon == std::string::npos ? std::string::npos : colon - start);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(piece, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != piece.size()) throw UsageError("bad alpha grid '" + text + "'");
    parts.push_back(v);
    if (colon == std::string::npos) break;
    start = colon + 1;
  }
  if (parts.size() != 3) throw UsageError("alpha grid must be a:b:step, got '" + text + "'");
  const double lo = parts[0], hi = parts[1], step = parts[2];
  if (!std::isfinite(lo) || !std::isfinite(hi) || !std::isfinite(step) || !(step > 0.0) || hi < lo) {
    throw UsageError("alpha grid needs a <= b and step > 0, got '" + text + "'");
  }
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  if (count > 1000000) throw UsageError("alpha grid has too many points");
  std::vector<double> grid(count);
  // Snap to 1e-12 so that 1 + 7*0.1 prints as 1.7.
  for (std::size_t i = 0; i < count; ++i) grid[i] = std::round((lo + static_cast<double>(i) * step) * 1e12) / 1e12;
  return grid;
}

std::string output_stem(const std::string& path) {
  for (const char* ext : {".csv", ".json"}) {
    const std::string e = ext;
    if (path.size() > e.size() && path.compare(path.size() - e.size(), e.size(), e) == 0) {
      return path.substr(0, path.size() - e.size());
    }
  }
  return path;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Baseband quantizer experiments: coupling statistics, SNR loss, RD simulation, checks", "bbqlab"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  GammaArgs ga;
  auto* gamma = app.add_subcommand("gamma", "Estimate gamma1 and gamma12 over a grid of step ratios");
  add_alpha_options(gamma, ga.alpha);
  gamma->add_option("--transform", ga.transform, "rot2, dct:N, dct2d:K, identity:N, random:N[:SEED]");
  gamma->add_option("--samples", ga.samples, "Monte Carlo samples per alpha");
  gamma->add_option("--m-range", ga.m_range, "Lattice indices drawn from {-M..M}");
  gamma->add_option("--seed", ga.seed);
  gamma->add_option("--workers", ga.workers, "Worker threads (0 = all cores)");
  add_output_options(gamma, ga.output);

  SnrLossArgs sa;
  auto* snrloss = app.add_subcommand("snrloss", "SNR loss against step ratio");
  add_alpha_options(snrloss, sa.alpha);
  snrloss->add_option("--scenario", sa.scenario)->check(CLI::IsMember({"one_baseband", "two_baseband"}));
  snrloss->add_option("--transform", sa.transform, "Transform used for gamma below alpha = 2");
  snrloss->add_option("--samples", sa.samples);
  snrloss->add_option("--m-range", sa.m_range);
  snrloss->add_option("--seed", sa.seed);
  snrloss->add_option("--workers", sa.workers);
  add_output_options(snrloss, sa.output);

  SimulateArgs ma;
  auto* simulate = app.add_subcommand("simulate", "RD curves of an AR(1) source with coarse and negligible q1");
  simulate->add_option("--case", ma.case_name)->check(CLI::IsMember({"a", "b", "custom"}));
  simulate->add_option("--rho", ma.rho);
  simulate->add_option("--sigma", ma.sigma);
  simulate->add_option("--block-len", ma.block_len);
  simulate->add_option("--q1", ma.q1, "Baseband step (default sigma/10)");
  simulate->add_option("--q2-multipliers", ma.multipliers, "q2 = q1 * m")->delimiter(',');
  simulate->add_option("--blocks", ma.blocks, "Blocks per RD point");
  simulate->add_option("--seed", ma.seed);
  simulate->add_option("--transform", ma.transform, "Default dct:<block-len>");
  simulate->add_option("--mode", ma.mode)->check(CLI::IsMember({"both", "coarse", "negligible"}));
  simulate->add_option("--samples", ma.samples, "Gamma samples for the predicted gap");
  simulate->add_option("--m-range", ma.m_range);
  simulate->add_option("--workers", ma.workers);
  add_output_options(simulate, ma.output);

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "Run a verification suite and print a JSON report");
  std::string suites;
  for (const auto& s : suite_names()) suites += (suites.empty() ? "" : ", ") + s;
  verify->add_option("--suite", va.suite, suites)->required();
  verify->add_option("--seed", va.seed);
  verify->add_option("--out", va.out_path, "Report file (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gamma->parsed()) return cmd_gamma(ga, out, err);
    if (snrloss->parsed()) return cmd_snrloss(sa, out, err);
    if (simulate->parsed()) return cmd_simulate(ma, out, err);
    return cmd_verify(va, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace bbq::cli
