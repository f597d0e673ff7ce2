#include "basedlab/cli.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "basedlab/consensus.hpp"
#include "basedlab/defaults.hpp"
#include "basedlab/econ.hpp"
#include "basedlab/errors.hpp"
#include "basedlab/fhe_cost.hpp"
#include "basedlab/quant.hpp"
#include "basedlab/routing.hpp"
#include "basedlab/scenario.hpp"
#include "basedlab/sim.hpp"

namespace basedlab::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

enum class Format { Default, Json, Csv, Text };

std::shared_ptr<spdlog::logger> logger() {
  static std::shared_ptr<spdlog::logger> log = [] {
    auto l = spdlog::stderr_logger_mt("basedlab");
    l->set_pattern("[%l] %v");
    l->set_level(spdlog::level::warn);
    if (const char* env = std::getenv("BASEDLAB_LOG")) l->set_level(spdlog::level::from_str(env));
    return l;
  }();
  return log;
}

// ---------------------------------------------------------------------------
// Output

std::string cell(const ojson& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "";
  if (v.is_array()) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + cell(v[i]);
    return s;
  }
  return v.dump();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

/// Rows are objects sharing the keys of the first one.
void emit(const ojson& data, Format format, std::ostream& out) {
  if (format == Format::Json) {
    out << data.dump(2) << "\n";
    return;
  }
  const ojson rows = data.is_array() ? data : ojson::array({data});
  if (rows.empty()) return;
  std::vector<std::string> keys;
  for (const auto& [k, v] : rows.front().items()) keys.push_back(k);
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows) {
    std::vector<std::string> line;
    for (const auto& k : keys) line.push_back(r.contains(k) ? cell(r[k]) : "");
    cells.push_back(std::move(line));
  }
  if (format == Format::Csv) {
    for (std::size_t i = 0; i < keys.size(); ++i) out << (i ? "," : "") << csv_field(keys[i]);
    out << "\n";
    for (const auto& line : cells) {
      for (std::size_t i = 0; i < line.size(); ++i) out << (i ? "," : "") << csv_field(line[i]);
      out << "\n";
    }
    return;
  }
  std::vector<std::size_t> width(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    width[i] = keys[i].size();
    for (const auto& line : cells) width[i] = std::max(width[i], line[i].size());
  }
  auto print = [&](const std::vector<std::string>& line) {
    for (std::size_t i = 0; i < line.size(); ++i) {
      out << (i ? "  " : "") << line[i];
      if (i + 1 < line.size()) out << std::string(width[i] - line[i].size(), ' ');
    }
    out << "\n";
  };
  print(keys);
  for (const auto& line : cells) print(line);
}

void write_matrix_csv(const Matrix& m, std::ostream& out) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? "," : "") << fmt::format("{}", m(r, c));
    out << "\n";
  }
}

ojson matrix_json(const Matrix& m) {
  ojson rows = ojson::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    ojson row = ojson::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

void emit_matrix(const Matrix& m, Format format, std::ostream& out) {
  if (format == Format::Json)
    out << matrix_json(m).dump(2) << "\n";
  else
    write_matrix_csv(m, out);
}

template <class T>
ojson indices(const std::vector<T>& v) {
  ojson a = ojson::array();
  for (const auto& x : v) a.push_back(x);
  return a;
}

// ---------------------------------------------------------------------------
// Input

bool parse_double(std::string_view s, double& v) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc{} && ptr == s.data() + s.size() && !s.empty();
}

/// Row-major numeric CSV; a first line that does not parse is taken as a header.
Matrix read_csv(const std::string& path, const std::string& field) {
  std::ifstream in(path);
  if (!in) throw ValidationError(field, "cannot open '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r" || line.front() == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string tok;
    bool ok = true;
    while (std::getline(ss, tok, ',')) {
      double v = 0.0;
      if (!parse_double(tok, v)) {
        ok = false;
        break;
      }
      row.push_back(v);
    }
    if (!ok) {
      if (rows.empty() && lineno == 1) continue;
      throw ValidationError(field + ":" + std::to_string(lineno), "non-numeric value '" + tok + "'");
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ValidationError(field + ":" + std::to_string(lineno), "expected " + std::to_string(rows.front().size()) +
                                                                     " columns, found " + std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ValidationError(field, "'" + path + "' holds no data rows");
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return m;
}

nlohmann::json read_json(const std::string& path, const std::string& field) {
  std::ifstream in(path);
  if (!in) throw ValidationError(field, "cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(field, std::string("invalid JSON: ") + e.what());
  }
}

std::vector<routing::Embedding> rows_of(const Matrix& m) {
  std::vector<routing::Embedding> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) out[static_cast<std::size_t>(r)].assign(m.row(r).begin(), m.row(r).end());
  return out;
}

std::vector<routing::PeerHistory> read_peers(const std::string& path) {
  const nlohmann::json doc = read_json(path, "--peers");
  if (!doc.is_array()) throw ValidationError("--peers", "expected an array of {id, history}");
  std::vector<routing::PeerHistory> peers;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const std::string p = "--peers[" + std::to_string(i) + "]";
    const auto& e = doc[i];
    if (!e.is_object() || !e.contains("id") || !e["id"].is_number_integer())
      throw ValidationError(p + ".id", "expected an integer peer id");
    routing::PeerHistory h{e["id"].get<std::int64_t>(), {}};
    if (e.contains("history")) {
      if (!e["history"].is_array()) throw ValidationError(p + ".history", "expected an array of embeddings");
      for (std::size_t k = 0; k < e["history"].size(); ++k) {
        const auto& row = e["history"][k];
        const std::string q = p + ".history[" + std::to_string(k) + "]";
        if (!row.is_array()) throw ValidationError(q, "expected an array of numbers");
        routing::Embedding emb;
        for (const auto& v : row) {
          if (!v.is_number()) throw ValidationError(q, "expected an array of numbers");
          emb.push_back(v.get<double>());
        }
        h.previous_embeddings.push_back(std::move(emb));
      }
    }
    peers.push_back(std::move(h));
  }
  return peers;
}

TokenAmount amount_arg(const std::string& text, const std::string& field) {
  try {
    return TokenAmount::parse(text);
  } catch (const Error& e) {
    throw ValidationError(field, e.what());
  }
}

void require(bool ok, const std::string& field, const std::string& message) {
  if (!ok) throw ValidationError(field, message);
}

consensus::BetaMode beta_mode(const std::string& s) {
  return s == "table-lookup" ? consensus::BetaMode::TableLookup : consensus::BetaMode::TextLinear;
}

const auto kBetaModes = CLI::IsMember({"text-linear", "table-lookup"});

// ---------------------------------------------------------------------------
// econ

ojson emission_rows(int years, std::int64_t blocks_per_year) {
  econ::EmissionSchedule schedule;
  schedule.blocks_per_year = blocks_per_year;
  ojson rows = ojson::array();
  for (int y = 1; y <= years; ++y) {
    const TokenAmount reward = econ::block_reward(schedule, y);
    const TokenAmount annual = econ::annual_emission(schedule, y);
    rows.push_back({{"year", y},
                    {"block_reward", reward.to_string()},
                    {"annual_emission", annual.to_string()},
                    {"tft_enforcer_weight", consensus::beta(y, consensus::BetaMode::TableLookup)},
                    {"block_reward_base_units", reward.base_units()},
                    {"annual_emission_base_units", annual.base_units()}});
  }
  return rows;
}

ojson burn_report(std::int64_t count) {
  const TokenAmount total = econ::cumulative_burn(count);
  ojson r = {{"brains", count},
             {"cumulative_burn", total.to_string()},
             {"next_burn_cost", count < defaults::kMaxBrains ? ojson(econ::burn_cost(count).to_string()) : ojson(nullptr)}};
  if (count == defaults::kMaxBrains) {
    const TokenAmount printed = TokenAmount::from_tokens(defaults::kPrintedTotalBurnPepecoin);
    r["printed_total"] = printed.to_string();
    r["difference"] = (printed - total).to_string();
    r["status"] = printed == total ? "MATCH" : "MISMATCH: the printed total differs from the sum of the cost series";
  }
  return r;
}

// ---------------------------------------------------------------------------
// consensus helpers

std::vector<double> loo_ensemble(const Matrix& predictions, const Matrix& target) {
  require(target.rows() == 1 || target.cols() == 1, "--target", "expected a single row or column");
  const Eigen::VectorXd t = Eigen::Map<const Eigen::VectorXd>(target.data(), target.size());
  require(predictions.cols() == t.size(), "--predictions", "each row must have as many values as the target");
  const auto loss = [&](const std::vector<bool>& present) {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(t.size());
    int n = 0;
    for (std::size_t i = 0; i < present.size(); ++i)
      if (present[i]) {
        mean += predictions.row(static_cast<Eigen::Index>(i)).transpose();
        ++n;
      }
    if (n > 0) mean /= n;
    return (mean - t).squaredNorm() / static_cast<double>(t.size());
  };
  return consensus::loo_contribution_scores(loss, static_cast<std::size_t>(predictions.rows()));
}

// ---------------------------------------------------------------------------
// simulate

void write_summary_csv(const sim::Network& net, std::ostream& out) {
  for (const auto& [k, v] : defaults::table()) out << "# " << k << "=" << v << "\n";
  out << "# seed=" << net.config().seed << "\n";
  out << "year,blocks,minted,distributed,withheld,brain,reward,stake,apy_realized,gigabrain,consensus_set,credits_total\n";
  for (const auto& y : net.years()) {
    const std::string head = fmt::format("{},{},{},{},{}", y.year, y.blocks, y.minted.to_string(),
                                         y.distributed.to_string(), y.withheld.to_string());
    if (y.brains.empty()) out << head << ",,,,,,,\n";
    for (const auto& b : y.brains) {
      std::string members;
      for (std::size_t i = 0; i < b.consensus.size(); ++i) members += (i ? ";" : "") + std::to_string(b.consensus[i]);
      out << head << "," << b.brain << "," << b.reward.to_string() << "," << b.stake.to_string() << ","
          << fmt::format("{}", b.apy_realized) << "," << (b.gigabrain ? "true" : "false") << "," << members << ","
          << fmt::format("{}", b.credits_total) << "\n";
    }
  }
}

ojson simulation_report(const sim::Network& net, const scenario::Scenario& sc, const std::string& digest) {
  ojson defaults_json = ojson::object();
  for (const auto& [k, v] : defaults::table()) defaults_json[k] = v;
  ojson years = ojson::array();
  for (const auto& y : net.years()) {
    ojson brains = ojson::array();
    for (const auto& b : y.brains)
      brains.push_back({{"brain", b.brain},
                        {"reward", b.reward.to_string()},
                        {"stake", b.stake.to_string()},
                        {"apy_realized", b.apy_realized},
                        {"gigabrain", b.gigabrain},
                        {"consensus_set", b.consensus},
                        {"credits_total", b.credits_total}});
    years.push_back({{"year", y.year},
                     {"blocks", y.blocks},
                     {"minted", y.minted.to_string()},
                     {"distributed", y.distributed.to_string()},
                     {"withheld", y.withheld.to_string()},
                     {"brains", brains}});
  }
  const auto giga = net.gigabrain_set();
  return {{"defaults", defaults_json},
          {"seed", net.config().seed},
          {"quant", {{"levels", sc.quant.levels}, {"threshold", sc.quant.threshold}, {"alpha", sc.quant.alpha}}},
          {"blocks", net.height()},
          {"minted", net.minted().to_string()},
          {"distributed", net.distributed().to_string()},
          {"withheld", net.withheld().to_string()},
          {"burned_pepecoin", net.burned_pepecoin().to_string()},
          {"active_brains", net.active_brain_count()},
          {"gigabrains", std::vector<int>(giga.begin(), giga.end())},
          {"years", years},
          {"digest", digest}};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  auto log = logger();
  CLI::App app{"basedlab: emission, consensus, routing, encrypted-cost and quantization lab", "basedlab"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string format_name;
  app.add_option("--format", format_name, "Output format")->check(CLI::IsMember({"json", "csv", "text"}));

  // econ ------------------------------------------------------------------
  auto* econ = app.add_subcommand("econ", "Emission, burn, staking and pricing arithmetic");
  econ->require_subcommand(1);

  int table_years = 10;
  std::int64_t table_bpy = defaults::kBlocksPerYear;
  auto* econ_table = econ->add_subcommand("table", "Emission schedule by year");
  econ_table->add_option("--years", table_years, "Number of years")->check(CLI::Range(1, 64));
  econ_table->add_option("--blocks-per-year", table_bpy, "Blocks per year")->check(CLI::PositiveNumber);

  std::int64_t emission_height = 0;
  auto* econ_emission = econ->add_subcommand("emission", "Reward minted at one block height");
  econ_emission->add_option("--height", emission_height, "Block height")->required()->check(CLI::NonNegativeNumber);

  std::string quote_model;
  std::int64_t quote_prompt = 0, quote_completion = 0;
  auto* econ_quote = econ->add_subcommand("quote", "Compute cost of a prompt/completion on a catalog model");
  econ_quote->add_option("--model", quote_model, "Model name")->required();
  econ_quote->add_option("--prompt", quote_prompt, "Prompt units")->required()->check(CLI::NonNegativeNumber);
  econ_quote->add_option("--completion", quote_completion, "Completion units")->required()->check(CLI::NonNegativeNumber);

  auto* econ_models = econ->add_subcommand("models", "List the pricing catalog");

  std::int64_t burn_count = defaults::kMaxBrains;
  auto* econ_burn = econ->add_subcommand("burn", "Burn-method acquisition cost curve");
  econ_burn->add_option("--count", burn_count, "Brains issued by burning")->check(CLI::Range(0, 1024));

  std::string project_amount;
  double project_apy = 0.0;
  std::int64_t project_years = 1;
  auto* econ_project = econ->add_subcommand("project", "Compound a stake at a fixed APY");
  econ_project->add_option("--amount", project_amount, "Staked $BASED")->required();
  econ_project->add_option("--apy", project_apy, "Annual yield, e.g. 0.19")->required()->check(CLI::Range(0.0, 100.0));
  econ_project->add_option("--years", project_years, "Years")->check(CLI::Range(0, 1000));

  std::string split_total;
  double split_owner = defaults::kOwnerFraction;
  auto* econ_split = econ->add_subcommand("split", "Owner / node split of a reward");
  econ_split->add_option("--total", split_total, "Reward")->required();
  econ_split->add_option("--owner-fraction", split_owner, "Owner share")->check(CLI::Range(0.0, 1.0));

  std::string cap_network;
  double cap_fraction = defaults::kStakeCapFraction;
  auto* econ_cap = econ->add_subcommand("cap", "Per-brain stake cap");
  econ_cap->add_option("--network-stake", cap_network, "Total network stake")->required();
  econ_cap->add_option("--fraction", cap_fraction, "Cap fraction")->check(CLI::Range(0.0, 1.0));

  std::string dist_profiles, dist_reward = "10";
  double dist_bonus = defaults::kBonusPoolFraction, dist_cap = defaults::kStakeCapFraction;
  auto* econ_distribute = econ->add_subcommand("distribute", "Allocate one block reward across brains");
  econ_distribute->add_option("--profiles", dist_profiles, "JSON [{brain, stake, performance, owner_fraction}]")
      ->required();
  econ_distribute->add_option("--reward", dist_reward, "Reward to allocate");
  econ_distribute->add_option("--bonus", dist_bonus, "Top-performer bonus fraction")->check(CLI::Range(0.0, 1.0));
  econ_distribute->add_option("--cap", dist_cap, "Stake cap fraction")->check(CLI::Range(0.0, 1.0));

  std::vector<std::string> active_stakes;
  auto* econ_active = econ->add_subcommand("active", "Validators at or above the 70th stake percentile");
  econ_active->add_option("--stakes", active_stakes, "Validator stakes")->required()->delimiter(',');

  // cost ------------------------------------------------------------------
  std::string cost_expr, cost_file, cost_mode = "all";
  bool cost_plan = false, cost_distinct = false;
  auto* cost = app.add_subcommand("cost", "Step counts of an arithmetic expression");
  cost->add_option("expression", cost_expr, "Expression such as \"(a+b)+(c*d)\"");
  cost->add_option("--file", cost_file, "Read the expression from a file")->excludes("expression");
  cost->add_option("--mode", cost_mode, "Cost mode")->check(CLI::IsMember({"all", "standard", "fhe", "cerberus"}));
  cost->add_flag("--plan", cost_plan, "Include the fused step plan");
  cost->add_flag("--distinct-vars", cost_distinct, "Encrypt each distinct variable once");

  // quantize / qat --------------------------------------------------------
  std::string q_in, q_out;
  quant::SqueezeParams q_params;
  bool q_raw = false;
  auto* quantize = app.add_subcommand("quantize", "Adaptive scaling then per-row quantization of a CSV matrix");
  quantize->add_option("--in", q_in, "Input CSV (rows = samples)")->required();
  quantize->add_option("--levels", q_params.levels, "Quantization levels")->check(CLI::Range(2, 1 << 24));
  quantize->add_option("--threshold", q_params.threshold, "Standard-deviation threshold");
  quantize->add_option("--alpha", q_params.alpha, "Scale factor in (0,1)")->check(CLI::Range(0.0, 1.0));
  quantize->add_flag("--raw", q_raw, "Skip the adaptive scaling step");
  quantize->add_option("--out", q_out, "Write the CSV here instead of stdout");

  std::string qat_in, qat_out;
  quant::QatParams qat_params;
  auto* qat = app.add_subcommand("qat", "Quantize/dequantize round trip error report");
  qat->add_option("--in", qat_in, "Input CSV")->required();
  qat->add_option("--mu", qat_params.mu, "Mean");
  qat->add_option("--sigma", qat_params.sigma, "Standard deviation");
  qat->add_option("--qscale", qat_params.q_scale, "Quantization scale");
  qat->add_option("--qzero", qat_params.q_zero, "Quantization zero point");
  qat->add_option("--out", qat_out, "Write the round-tripped CSV here");

  // heads / attention -----------------------------------------------------
  std::vector<double> heads_scores, heads_costs;
  double heads_budget = 0.0, heads_theta = 0.0;
  std::string heads_method = "auto";
  auto* heads = app.add_subcommand("heads", "Budgeted attention-head selection");
  heads->add_option("--scores", heads_scores, "Significance per head")->required()->delimiter(',');
  heads->add_option("--costs", heads_costs, "Cost per head")->required()->delimiter(',');
  heads->add_option("--budget", heads_budget, "Exclusive cost ceiling")->required();
  heads->add_option("--theta", heads_theta, "Also report heads with significance above theta");
  heads->add_option("--method", heads_method, "Selection method")->check(CLI::IsMember({"auto", "exact", "greedy"}));

  std::size_t att_heads = 8;
  Eigen::Index att_dmodel = 16, att_dhead = 4, att_tokens = 6;
  std::uint64_t att_seed = 1;
  double att_budget = 4.5, att_theta = 0.0;
  auto* attention = app.add_subcommand("attention", "Head significance of a seeded toy attention layer");
  attention->add_option("--heads", att_heads, "Heads")->check(CLI::Range(1, 64));
  attention->add_option("--d-model", att_dmodel, "Model width")->check(CLI::Range(1, 512));
  attention->add_option("--d-head", att_dhead, "Head width")->check(CLI::Range(1, 512));
  attention->add_option("--tokens", att_tokens, "Sequence length")->check(CLI::Range(1, 512));
  attention->add_option("--seed", att_seed, "Seed");
  attention->add_option("--budget", att_budget, "Head budget (unit cost per head)");
  attention->add_option("--theta", att_theta, "Significance threshold");

  // route / radius / covariance / embed ----------------------------------
  std::string route_items, route_peers, route_aggregate = "min";
  bool route_mahalanobis = false;
  auto* route = app.add_subcommand("route", "Assign work items to the peers with the nearest history");
  route->add_option("--items", route_items, "Items CSV, one embedding per row")->required();
  route->add_option("--peers", route_peers, "Peers JSON [{id, history: [[...]]}]")->required();
  route->add_option("--aggregate", route_aggregate, "History aggregate")->check(CLI::IsMember({"min", "mean"}));
  route->add_flag("--mahalanobis", route_mahalanobis, "Use the pooled-covariance metric");

  std::vector<double> radius_current;
  std::string radius_history;
  auto* radius = app.add_subcommand("radius", "Distances from an embedding to a history");
  radius->add_option("--current", radius_current, "Embedding")->required()->delimiter(',');
  radius->add_option("--history", radius_history, "History CSV")->required();

  std::string cov_in;
  auto* covariance = app.add_subcommand("covariance", "Sample covariance of embeddings");
  covariance->add_option("--in", cov_in, "Embeddings CSV")->required();

  std::string embed_data;
  std::size_t embed_dim = 8;
  std::uint64_t embed_seed = 0;
  auto* embed = app.add_subcommand("embed", "Deterministic pseudo-embedding of a string");
  embed->add_option("--data", embed_data, "Input text")->required();
  embed->add_option("--dim", embed_dim, "Dimension")->check(CLI::Range(1, 4096));
  embed->add_option("--seed", embed_seed, "Seed");

  // consensus -------------------------------------------------------------
  auto* cons = app.add_subcommand("consensus", "Trust, consensus, incentives and credits");
  cons->require_subcommand(1);

  std::string score_weights, score_mode = "text-linear";
  std::vector<double> score_stakes, score_base;
  double score_lambda = defaults::kSigmoidLambda, score_accuracy = 0.0, score_t = 0.0;
  auto* cons_score = cons->add_subcommand("score", "Per-peer trust, consensus, incentive and credit delta");
  cons_score->add_option("--weights", score_weights, "Weight matrix CSV (square, entries in [0,1])")->required();
  cons_score->add_option("--stakes", score_stakes, "Stake per peer")->required()->delimiter(',');
  cons_score->add_option("--base-rewards", score_base, "Base reward per peer (default: stakes)")->delimiter(',');
  cons_score->add_option("--lambda", score_lambda, "Sigmoid steepness")->check(CLI::PositiveNumber);
  cons_score->add_option("--accuracy", score_accuracy, "Forecaster accuracy")->check(CLI::Range(0.0, 1.0));
  cons_score->add_option("--t", score_t, "Network age in years")->check(CLI::NonNegativeNumber);
  cons_score->add_option("--beta-mode", score_mode, "Beta schedule")->check(kBetaModes);

  std::vector<double> beta_t;
  std::string beta_mode_name = "both";
  auto* cons_beta = cons->add_subcommand("beta", "Forecaster weight over time");
  cons_beta->add_option("--t", beta_t, "Ages in years")->required()->delimiter(',');
  cons_beta->add_option("--mode", beta_mode_name, "Schedule")->check(CLI::IsMember({"both", "text-linear", "table-lookup"}));

  std::string loo_predictions, loo_target;
  auto* cons_loo = cons->add_subcommand("loo", "Leave-one-out contribution of ensemble members");
  cons_loo->add_option("--predictions", loo_predictions, "CSV, one member's predictions per row")->required();
  cons_loo->add_option("--target", loo_target, "CSV target row")->required();

  std::string rw_weights;
  std::vector<double> rw_credits, rw_contribution;
  double rw_rate = 0.1;
  auto* cons_reweight = cons->add_subcommand("reweight", "Adaptive weight update from credits and contributions");
  cons_reweight->add_option("--weights", rw_weights, "Weight matrix CSV")->required();
  cons_reweight->add_option("--credits", rw_credits, "Credit per peer")->required()->delimiter(',');
  cons_reweight->add_option("--contribution", rw_contribution, "Measured contribution per peer")
      ->required()
      ->delimiter(',');
  cons_reweight->add_option("--rate", rw_rate, "Learning rate")->check(CLI::NonNegativeNumber);

  // simulate / defaults ---------------------------------------------------
  std::string sim_scenario, sim_out;
  std::optional<std::uint64_t> sim_seed;
  std::optional<std::int64_t> sim_blocks;
  auto* simulate = app.add_subcommand("simulate", "Run a scenario through the network simulator");
  simulate->add_option("--scenario", sim_scenario, "Scenario JSON")->required();
  simulate->add_option("--out", sim_out, "Output directory")->required();
  simulate->add_option("--seed", sim_seed, "Override the scenario seed");
  simulate->add_option("--blocks", sim_blocks, "Override the run length in blocks")->check(CLI::NonNegativeNumber);

  auto* defaults_cmd = app.add_subcommand("defaults", "Print the protocol constants");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  Format format = Format::Default;
  if (format_name == "json") format = Format::Json;
  if (format_name == "csv") format = Format::Csv;
  if (format_name == "text") format = Format::Text;
  auto pick = [&](Format fallback) { return format == Format::Default ? fallback : format; };

  try {
    if (econ_table->parsed()) {
      emit(emission_rows(table_years, table_bpy), pick(Format::Csv), out);
    } else if (econ_emission->parsed()) {
      econ::EmissionSchedule s;
      emit(ojson{{"height", emission_height},
                 {"year", econ::year_of_block(s, emission_height)},
                 {"reward", econ::emission_at_block(s, emission_height).to_string()}},
           pick(Format::Text), out);
    } else if (econ_quote->parsed()) {
      const econ::ModelPricing& m = econ::find_model(quote_model);
      emit(ojson{{"model", m.display_name()},
                 {"prompt_units", quote_prompt},
                 {"completion_units", quote_completion},
                 {"cost", econ::quote_compute_cost(m, quote_prompt, quote_completion).to_string()}},
           pick(Format::Text), out);
    } else if (econ_models->parsed()) {
      ojson rows = ojson::array();
      for (const auto& m : econ::model_catalog())
        rows.push_back({{"model", m.display_name()},
                        {"prompt_per_1k", m.prompt_cost_per_1k.to_string()},
                        {"completion_per_1k", m.completion_cost_per_1k.to_string()},
                        {"context_units", m.context_units}});
      emit(rows, pick(Format::Csv), out);
    } else if (econ_burn->parsed()) {
      emit(burn_report(burn_count), pick(Format::Text), out);
    } else if (econ_project->parsed()) {
      const TokenAmount a = amount_arg(project_amount, "--amount");
      emit(ojson{{"amount", a.to_string()},
                 {"apy", project_apy},
                 {"years", project_years},
                 {"projected", econ::project_stake(a, project_apy, project_years).to_string()}},
           pick(Format::Text), out);
    } else if (econ_split->parsed()) {
      const econ::RewardSplit s = econ::split_reward(amount_arg(split_total, "--total"), split_owner);
      emit(ojson{{"nodes", s.nodes.to_string()}, {"owner", s.owner.to_string()}}, pick(Format::Text), out);
    } else if (econ_cap->parsed()) {
      emit(ojson{{"cap", econ::stake_cap(amount_arg(cap_network, "--network-stake"), cap_fraction).to_string()}},
           pick(Format::Text), out);
    } else if (econ_distribute->parsed()) {
      const nlohmann::json doc = read_json(dist_profiles, "--profiles");
      require(doc.is_array(), "--profiles", "expected an array");
      std::vector<econ::BrainStakeProfile> profiles;
      for (std::size_t i = 0; i < doc.size(); ++i) {
        const std::string p = "--profiles[" + std::to_string(i) + "]";
        const auto& e = doc[i];
        require(e.is_object(), p, "expected an object");
        econ::BrainStakeProfile prof;
        prof.brain_id = e.value("brain", static_cast<int>(i));
        const auto stake = e.value("stake", nlohmann::json("0"));
        prof.total_stake = amount_arg(stake.is_string() ? stake.get<std::string>() : stake.dump(), p + ".stake");
        prof.performance = e.value("performance", 1.0);
        prof.owner_fraction = e.value("owner_fraction", defaults::kOwnerFraction);
        profiles.push_back(prof);
      }
      econ::DistributionOptions opts{dist_bonus, dist_cap, std::nullopt};
      const auto alloc = econ::distribute_block_reward(profiles, amount_arg(dist_reward, "--reward"), opts);
      ojson rows = ojson::array();
      for (std::size_t i = 0; i < profiles.size(); ++i) {
        const auto split = econ::split_reward(alloc[i], profiles[i].owner_fraction);
        rows.push_back({{"brain", profiles[i].brain_id},
                        {"allocation", alloc[i].to_string()},
                        {"owner", split.owner.to_string()},
                        {"nodes", split.nodes.to_string()}});
      }
      emit(rows, pick(Format::Csv), out);
    } else if (econ_active->parsed()) {
      std::vector<TokenAmount> stakes;
      for (std::size_t i = 0; i < active_stakes.size(); ++i)
        stakes.push_back(amount_arg(active_stakes[i], "--stakes[" + std::to_string(i) + "]"));
      emit(ojson{{"active", indices(econ::active_validators(stakes))}}, pick(Format::Json), out);
    } else if (cost->parsed()) {
      std::string text = cost_expr;
      if (!cost_file.empty()) {
        std::ifstream in(cost_file);
        require(static_cast<bool>(in), "--file", "cannot open '" + cost_file + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        text = ss.str();
        while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
      }
      require(!text.empty(), "expression", "give an expression or --file");
      fhe::ExprPtr expr;
      try {
        expr = fhe::parse_expression(text);
      } catch (const SyntaxError& e) {
        throw ValidationError("expression", e.what());
      }
      const fhe::CostOptions opts{cost_distinct};
      ojson rec = {{"expression", fhe::render(*expr)}};
      if (cost_mode == "all" || cost_mode == "standard") rec["standard"] = fhe::cost(*expr, fhe::CostMode::Standard, opts);
      if (cost_mode == "all" || cost_mode == "fhe") rec["fhe"] = fhe::cost(*expr, fhe::CostMode::FHE, opts);
      if (cost_mode == "all" || cost_mode == "cerberus")
        rec["cerberus"] = fhe::cost(*expr, fhe::CostMode::CerberusSqueezed, opts);
      const fhe::FusionPlan plan = cost_plan ? fhe::fusion_plan(*expr) : fhe::FusionPlan{};
      if (cost_plan) {
        ojson steps = ojson::array();
        for (const auto& s : plan) steps.push_back(s.describe());
        rec["plan"] = steps;
      }
      const Format f = pick(Format::Text);
      if (f == Format::Text) {
        bool first = true;
        for (const char* k : {"standard", "fhe", "cerberus"})
          if (rec.contains(k)) {
            out << (first ? "" : " ") << k << "=" << rec[k].get<std::int64_t>();
            first = false;
          }
        out << "\n";
        for (const auto& s : plan) out << s.describe() << "\n";
      } else {
        emit(rec, f, out);
      }
    } else if (quantize->parsed()) {
      const Matrix x = read_csv(q_in, "--in");
      require(q_params.alpha > 0.0 && q_params.alpha < 1.0, "--alpha", "must lie in (0,1)");
      require(std::isfinite(q_params.threshold), "--threshold", "must be finite");
      const Matrix y = q_raw ? quant::quantize_rows(x, q_params.levels) : quant::squeeze_forward(x, q_params);
      log->info("quantized {}x{} matrix to {} levels", x.rows(), x.cols(), q_params.levels);
      if (q_out.empty()) {
        emit_matrix(y, pick(Format::Csv), out);
      } else {
        std::ofstream f(q_out);
        require(static_cast<bool>(f), "--out", "cannot write '" + q_out + "'");
        emit_matrix(y, pick(Format::Csv), f);
      }
    } else if (qat->parsed()) {
      require(qat_params.sigma > 0.0 && std::isfinite(qat_params.sigma), "--sigma", "must be positive");
      require(qat_params.q_scale != 0.0 && std::isfinite(qat_params.q_scale), "--qscale", "must be non-zero");
      const Matrix x = read_csv(qat_in, "--in");
      Matrix y(x.rows(), x.cols());
      double max_err = 0.0, sum_sq = 0.0;
      std::int64_t violations = 0;
      const double bound = 0.5 * qat_params.sigma;
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        y.data()[i] = quant::qat_round_trip(x.data()[i], qat_params);
        const double e = std::abs(y.data()[i] - x.data()[i]);
        max_err = std::max(max_err, e);
        sum_sq += e * e;
        if (e > bound * (1.0 + 1e-12)) ++violations;
      }
      if (!qat_out.empty()) {
        std::ofstream f(qat_out);
        require(static_cast<bool>(f), "--out", "cannot write '" + qat_out + "'");
        write_matrix_csv(y, f);
      }
      emit(ojson{{"values", x.size()},
                 {"max_abs_error", max_err},
                 {"rms_error", std::sqrt(sum_sq / static_cast<double>(x.size()))},
                 {"bound", bound},
                 {"violations", violations}},
           pick(Format::Text), out);
    } else if (heads->parsed()) {
      require(heads_scores.size() == heads_costs.size(), "--costs", "needs one cost per score");
      std::vector<std::size_t> chosen;
      if (heads_method == "exact")
        chosen = quant::select_heads_exact(heads_scores, heads_costs, heads_budget);
      else if (heads_method == "greedy")
        chosen = quant::select_heads_greedy(heads_scores, heads_costs, heads_budget);
      else
        chosen = quant::select_heads(heads_scores, heads_costs, heads_budget);
      double score = 0.0, spent = 0.0;
      for (std::size_t h : chosen) {
        score += heads_scores[h];
        spent += heads_costs[h];
      }
      emit(ojson{{"selected", indices(chosen)},
                 {"total_score", score},
                 {"total_cost", spent},
                 {"above_theta", indices(quant::significant_heads(heads_scores, heads_theta))}},
           pick(Format::Json), out);
    } else if (attention->parsed()) {
      const quant::HeadSpec spec = quant::make_toy_spec(att_heads, att_dmodel, att_dhead, att_dmodel, att_seed);
      const Matrix x = quant::random_matrix(att_tokens, att_dmodel, att_seed ^ 0xa77e4710ULL);
      const Matrix reference = quant::mha_forward(spec, x, std::vector<bool>(att_heads, true));
      const std::vector<double> scores = quant::head_significance(spec, x, reference);
      const std::vector<double> costs(att_heads, 1.0);
      const auto chosen = quant::select_heads(scores, costs, att_budget);
      ojson rows = ojson::array();
      for (std::size_t h = 0; h < att_heads; ++h)
        rows.push_back({{"head", h},
                        {"significance", scores[h]},
                        {"above_theta", scores[h] > att_theta},
                        {"selected", std::find(chosen.begin(), chosen.end(), h) != chosen.end()}});
      emit(rows, pick(Format::Csv), out);
    } else if (route->parsed()) {
      const Matrix items = read_csv(route_items, "--items");
      const auto peers = read_peers(route_peers);
      routing::RoutingOptions opts;
      opts.aggregate = route_aggregate == "mean" ? routing::Aggregate::Mean : routing::Aggregate::Min;
      opts.mahalanobis = route_mahalanobis;
      const auto item_rows = rows_of(items);
      const routing::WorkAssignment a = routing::distribute_work(item_rows, peers, opts);
      ojson assignment = ojson::object();
      for (const auto& [peer, idx] : a) assignment[std::to_string(peer)] = indices(idx);
      if (pick(Format::Json) == Format::Json) {
        out << assignment.dump(2) << "\n";
      } else {
        ojson rows = ojson::array();
        for (const auto& [peer, idx] : a)
          for (std::size_t i : idx) rows.push_back({{"item", i}, {"peer", peer}});
        std::sort(rows.begin(), rows.end(), [](const ojson& l, const ojson& r) { return l["item"] < r["item"]; });
        emit(rows, pick(Format::Json), out);
      }
    } else if (radius->parsed()) {
      const auto history = rows_of(read_csv(radius_history, "--history"));
      emit(ojson{{"distances", indices(routing::embedding_radius(radius_current, history))}}, pick(Format::Json), out);
    } else if (covariance->parsed()) {
      emit_matrix(routing::covariance_matrix(rows_of(read_csv(cov_in, "--in"))), pick(Format::Csv), out);
    } else if (embed->parsed()) {
      emit(ojson{{"embedding", indices(routing::hash_embedding(embed_data, embed_dim, embed_seed))}},
           pick(Format::Json), out);
    } else if (cons_score->parsed()) {
      const Matrix w = read_csv(score_weights, "--weights");
      const auto n = static_cast<std::size_t>(w.rows());
      require(w.rows() == w.cols(), "--weights", "matrix must be square");
      require(score_stakes.size() == n, "--stakes", "needs one stake per peer");
      if (score_base.empty()) score_base = score_stakes;
      require(score_base.size() == n, "--base-rewards", "needs one value per peer");
      consensus::validate_weights(w);
      const Matrix t = consensus::trust_from_weights(w);
      const auto c = consensus::trusted_stake_fraction(t, score_stakes);
      const auto in = consensus::consensus_set(t, score_stakes);
      const auto m = consensus::sigmoid_scale(t, score_stakes, score_lambda);
      const auto inc = consensus::incentive(w, score_stakes, score_accuracy, score_t, beta_mode(score_mode),
                                            score_base, score_lambda);
      std::vector<double> s_hat(score_stakes);
      double total = 0.0;
      for (double v : s_hat) total += v;
      for (double& v : s_hat) v /= total;
      const auto delta = consensus::credits_update(w, s_hat);
      ojson rows = ojson::array();
      for (std::size_t i = 0; i < n; ++i)
        rows.push_back({{"peer", i},
                        {"trusted_stake", c[i]},
                        {"in_consensus", static_cast<bool>(in[i])},
                        {"multiplier", m[i]},
                        {"incentive", inc.raw[i]},
                        {"incentive_share", inc.weights[i]},
                        {"credits_delta", delta[i]}});
      emit(rows, pick(Format::Csv), out);
    } else if (cons_beta->parsed()) {
      ojson rows = ojson::array();
      for (double t : beta_t) {
        require(std::isfinite(t) && t >= 0.0, "--t", "ages must be non-negative");
        ojson r = {{"t", t}};
        if (beta_mode_name != "table-lookup") r["text_linear"] = consensus::beta(t, consensus::BetaMode::TextLinear);
        if (beta_mode_name != "text-linear") r["table_lookup"] = consensus::beta(t, consensus::BetaMode::TableLookup);
        rows.push_back(r);
      }
      emit(rows, pick(Format::Csv), out);
    } else if (cons_loo->parsed()) {
      const auto scores = loo_ensemble(read_csv(loo_predictions, "--predictions"), read_csv(loo_target, "--target"));
      ojson rows = ojson::array();
      for (std::size_t i = 0; i < scores.size(); ++i) rows.push_back({{"member", i}, {"contribution", scores[i]}});
      emit(rows, pick(Format::Csv), out);
    } else if (cons_reweight->parsed()) {
      const Matrix w = read_csv(rw_weights, "--weights");
      require(rw_credits.size() == static_cast<std::size_t>(w.rows()), "--credits", "needs one credit per peer");
      require(rw_contribution.size() == rw_credits.size(), "--contribution", "needs one value per peer");
      consensus::CreditsLedger ledger{rw_credits};
      emit_matrix(consensus::adaptive_reweight(w, ledger, rw_contribution, rw_rate), pick(Format::Csv), out);
    } else if (simulate->parsed()) {
      scenario::Scenario sc = scenario::load(sim_scenario);
      if (sim_seed) sc.network.seed = *sim_seed;
      const std::int64_t blocks = sim_blocks ? *sim_blocks : sc.blocks();
      sim::Network net(sc.network);
      log->info("simulating {} blocks (seed {})", blocks, sc.network.seed);
      const auto started = std::chrono::steady_clock::now();
      net.run(blocks);
      net.finish();
      log->info("done in {:.2f} s", std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count());

      std::error_code ec;
      fs::create_directories(sim_out, ec);
      require(!ec, "--out", "cannot create '" + sim_out + "': " + ec.message());
      const std::string digest = net.digest();
      {
        std::ofstream f(fs::path(sim_out) / "events.jsonl");
        for (const auto& e : net.events()) f << e.to_json().dump() << "\n";
      }
      {
        std::ofstream f(fs::path(sim_out) / "summary.csv");
        write_summary_csv(net, f);
      }
      {
        std::ofstream f(fs::path(sim_out) / "report.json");
        f << simulation_report(net, sc, digest).dump(2) << "\n";
      }
      {
        std::ofstream f(fs::path(sim_out) / "digest.txt");
        f << digest << "\n";
      }
      const Format f = pick(Format::Text);
      if (f == Format::Text)
        out << "digest " << digest << "\nblocks " << net.height() << "\nminted " << net.minted().to_string()
            << "\ndistributed " << net.distributed().to_string() << "\nwithheld " << net.withheld().to_string()
            << "\n";
      else
        emit(ojson{{"digest", digest},
                   {"blocks", net.height()},
                   {"minted", net.minted().to_string()},
                   {"distributed", net.distributed().to_string()},
                   {"withheld", net.withheld().to_string()}},
             f, out);
    } else if (defaults_cmd->parsed()) {
      ojson rows = ojson::array();
      for (const auto& [k, v] : defaults::table()) rows.push_back({{"name", k}, {"value", v}});
      emit(rows, pick(Format::Text), out);
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace basedlab::cli
