#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "techtrace/config.hpp"
#include "techtrace/corpus.hpp"
#include "techtrace/ctr.hpp"
#include "techtrace/distribution.hpp"
#include "techtrace/dtt.hpp"
#include "techtrace/error.hpp"
#include "techtrace/eval.hpp"
#include "techtrace/pcr.hpp"
#include "techtrace/stats.hpp"
#include "techtrace/synth.hpp"

#ifndef TECHTRACE_VERSION
#define TECHTRACE_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace techtrace;

namespace {

int exit_code(const std::string& kind) {
  static const std::map<std::string, int> codes{
      {"usage", 2},     {"io", 3},       {"parse", 4},     {"validation", 5}, {"empty_corpus", 6},
      {"index", 7},     {"dimension", 8}, {"argument", 9}, {"numerical", 10}, {"state", 11},
  };
  auto it = codes.find(kind);
  return it == codes.end() ? 1 : it->second;
}

int fail(const std::string& kind, const std::string& message) {
  json line{{"error", kind}, {"message", message}};
  std::cerr << line.dump() << '\n';
  return exit_code(kind);
}

std::string num(double v, int precision = 17) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  return buf;
}

std::string fixed(double v, int decimals = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

// Left-aligned columns separated by two spaces.
void print_table(std::ostream& out, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  }
  auto line = [&](const std::vector<std::string>& r) {
    std::string s;
    for (std::size_t c = 0; c < r.size(); ++c) {
      s += r[c];
      if (c + 1 < r.size()) s += std::string(width[c] - r[c].size() + 2, ' ');
    }
    out << s << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
}

void print_csv(std::ostream& out, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t c = 0; c < r.size(); ++c) out << (c ? "," : "") << r[c];
    out << '\n';
  };
  if (!header.empty()) line(header);
  for (const auto& r : rows) line(r);
}

void check_format(const std::string& format, const std::vector<std::string>& allowed) {
  if (std::find(allowed.begin(), allowed.end(), format) == allowed.end()) {
    std::string list;
    for (const auto& a : allowed) list += (list.empty() ? "" : "|") + a;
    throw ValidationError("--format must be one of " + list + ", got '" + format + "'");
  }
}

std::vector<double> parse_doubles(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw ValidationError(what + " expects comma-separated numbers, got '" + text + "'");
    }
  }
  return out;
}

// Global state shared by all subcommands.
struct Globals {
  std::string config_path;
  std::vector<std::string> overrides;  // key=value
  std::optional<long long> seed;
  std::optional<int> threads;
  std::string format;
  std::vector<std::string> argv;
};

RunConfig resolve_config(const Globals& g, const std::map<std::string, std::string>& flags) {
  RunConfig cfg;
  if (!g.config_path.empty()) cfg.load_file(g.config_path);
  for (const auto& kv : g.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ValidationError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (g.seed) cfg.set("seed", std::to_string(*g.seed));
  if (g.threads) cfg.set("threads", std::to_string(*g.threads));
  for (const auto& [k, v] : flags) cfg.set(k, v);
  return cfg;
}

int resolve_threads(const RunConfig& cfg) {
  const int t = cfg.threads();
  if (t < 0) throw ValidationError("threads must be >= 0");
  if (t > 0) return t;
  return std::max(1u, std::thread::hardware_concurrency());
}

DttConfig resolve_dtt(const RunConfig& cfg) {
  DttConfig d = cfg.dtt();
  d.threads = resolve_threads(cfg);
  return d;
}

// Everything needed to rerun a step: the effective configuration (also
// written as config.conf), its hash, seeds and the command line.
void write_run_manifest(const fs::path& dir, const std::string& command, const RunConfig& cfg, const Globals& g,
                        json extra = json::object()) {
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "config.conf");
    if (!out) throw IoError("cannot write " + (dir / "config.conf").string());
    out << cfg.dump();
  }
  json m;
  m["format"] = "techtrace-run/1";
  m["tool"] = "techtrace";
  m["version"] = TECHTRACE_VERSION;
  m["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
               std::to_string(EIGEN_MINOR_VERSION);
  m["command"] = command;
  m["argv"] = g.argv;
  json values = json::object();
  for (const auto& k : RunConfig::keys()) values[k.name] = cfg.get(k.name);
  m["config"] = values;
  m["config_hash"] = cfg.hash();
  m["seed"] = cfg.seed();
  for (auto& [k, v] : extra.items()) m[k] = v;
  std::ofstream out(dir / "run.json");
  if (!out) throw IoError("cannot write " + (dir / "run.json").string());
  out << m.dump(2) << '\n';
}

SplitSpec resolve_split(const CorpusIndex& index, const RunConfig& cfg, const std::string& period) {
  if (!period.empty()) {
    const auto [y0, y1] = parse_period(period);
    return make_split(index, y0, y1);
  }
  const auto periods = cfg.periods();
  if (!periods.empty()) return make_split(index, periods.front().first, periods.front().second);
  return make_split(index, index.first_year(), index.last_year() - 1);
}

std::vector<SplitSpec> resolve_splits(const CorpusIndex& index, const RunConfig& cfg, const std::string& period) {
  if (!period.empty()) return {resolve_split(index, cfg, period)};
  const auto periods = cfg.periods();
  if (!periods.empty()) return make_splits(index, periods);
  return {resolve_split(index, cfg, "")};
}

std::string period_string(const SplitSpec& s) {
  return std::to_string(s.train_first) + "-" + std::to_string(s.train_target);
}

// ---------------------------------------------------------------------------
// Subcommands

int run_ingest(const Globals& g, const fs::path& input, const std::string& level, std::optional<int> min_patents,
               const fs::path& out) {
  std::map<std::string, std::string> flags;
  if (!level.empty()) flags["corpus.level"] = level;
  if (min_patents) flags["corpus.min_patents"] = std::to_string(*min_patents);
  const RunConfig cfg = resolve_config(g, flags);
  const CorpusIndex index = ingest(input, cfg.level(), cfg.min_patents());
  export_corpus(index, out);
  write_run_manifest(out, "ingest", cfg, g, {{"input", fs::absolute(input).string()}});
  std::cout << "companies " << index.num_companies() << " technologies " << index.num_technologies() << " years "
            << index.first_year() << "-" << index.last_year() << " patents " << index.num_patents() << '\n';
  return 0;
}

int run_synth(const Globals& g, const fs::path& out) {
  const RunConfig cfg = resolve_config(g, {});
  const SynthResult result = synthesize(cfg.synth(), cfg.seed());
  const CorpusIndex index(result.records, CpcLevel::Subclass, 1);
  export_corpus(index, out);
  {
    std::ofstream f(out / "planted.json");
    if (!f) throw IoError("cannot write " + (out / "planted.json").string());
    f << planted_to_json(result.planted) << '\n';
  }
  write_run_manifest(out, "synth", cfg, g);
  std::cout << "companies " << index.num_companies() << " technologies " << index.num_technologies() << " years "
            << index.first_year() << "-" << index.last_year() << " patents " << index.num_patents() << '\n';
  return 0;
}

int run_stats(const Globals& g, const fs::path& corpus) {
  const std::string format = g.format.empty() ? "table" : g.format;
  check_format(format, {"table", "csv"});
  const CorpusIndex index = load_corpus(corpus);
  const StatsReport report = stats(index);
  if (format == "csv") {
    write_stats_csv(std::cout, report);
  } else {
    write_stats_table(std::cout, report);
  }
  return 0;
}

int run_distribution(const Globals& g, const fs::path& corpus, int year, const std::string& company) {
  const std::string format = g.format.empty() ? "csv" : g.format;
  check_format(format, {"csv", "table"});
  const CorpusIndex index = load_corpus(corpus);
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  if (!company.empty()) {
    const Eigen::VectorXd r = distribution(index, index.company_index(company), year);
    header = {"code", "value"};
    for (int j = 0; j < index.num_technologies(); ++j) {
      rows.push_back({index.technologies()[j].to_string(), format == "csv" ? num(r(j)) : fixed(r(j))});
    }
  } else {
    if (!index.has_year(year)) throw IndexError("year " + std::to_string(year) + " is outside the corpus");
    const DistributionMatrix d = distribution_matrix(index, year);
    header = {"company"};
    for (const auto& t : index.technologies()) header.push_back(t.to_string());
    for (int i = 0; i < index.num_companies(); ++i) {
      std::vector<std::string> row{index.companies()[i]};
      for (int j = 0; j < index.num_technologies(); ++j) {
        row.push_back(format == "csv" ? num(d.values(i, j)) : fixed(d.values(i, j), 4));
      }
      rows.push_back(std::move(row));
    }
  }
  if (format == "csv") {
    print_csv(std::cout, header, rows);
  } else {
    print_table(std::cout, header, rows);
  }
  return 0;
}

int run_pcr(const Globals& g, const fs::path& corpus, int year, const std::string& company, std::optional<int> m,
            const std::string& alpha) {
  const std::string format = g.format.empty() ? "table" : g.format;
  check_format(format, {"table", "csv"});
  std::map<std::string, std::string> flags;
  if (m) flags["pcr.m"] = std::to_string(*m);
  if (!alpha.empty()) {
    if (parse_doubles(alpha, "--alpha").size() != 3) throw ValidationError("--alpha expects three weights a1,a2,a3");
    flags["pcr.alpha"] = alpha;
  }
  const RunConfig cfg = resolve_config(g, flags);
  const PcrOptions options = resolve_dtt(cfg).pcr;
  const CorpusIndex index = load_corpus(corpus);
  const CompetitorList list = top_competitors(index, index.company_index(company), year, options);
  std::vector<std::vector<std::string>> rows;
  int rank = 0;
  for (const auto& e : list.entries) {
    const bool csv = format == "csv";
    rows.push_back({std::to_string(++rank), index.companies()[e.company], csv ? num(e.score) : fixed(e.score),
                    csv ? num(e.weight) : fixed(e.weight)});
  }
  const std::vector<std::string> header{"rank", "company", "score", "weight"};
  if (format == "csv") {
    print_csv(std::cout, header, rows);
  } else {
    print_table(std::cout, header, rows);
  }
  return 0;
}

int run_ctr(const Globals& g, const fs::path& corpus, int year, const std::string& tech, std::optional<int> n) {
  const std::string format = g.format.empty() ? "table" : g.format;
  check_format(format, {"table", "csv", "edgelist"});
  std::map<std::string, std::string> flags;
  if (n) flags["ctr.n"] = std::to_string(*n);
  const RunConfig cfg = resolve_config(g, flags);
  const int top = resolve_dtt(cfg).ctr_n;
  const CorpusIndex index = load_corpus(corpus);
  if (!index.has_year(year)) throw IndexError("year " + std::to_string(year) + " is outside the corpus");
  const CollabGraph graph = build_collab_graph(index, year);
  const auto& codes = index.technologies();

  if (format == "edgelist") {
    // Every positive edge once, j1 < j2 (or the edges of --tech).
    const int only = tech.empty() ? -1 : index.technology_index(tech);
    for (int j1 = 0; j1 < index.num_technologies(); ++j1) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(graph.weights, j1); it; ++it) {
        const int j2 = static_cast<int>(it.row());
        const bool keep = only < 0 ? j1 < j2 : j1 == only;
        if (keep) std::cout << codes[j1].to_string() << ' ' << codes[j2].to_string() << ' ' << num(it.value()) << '\n';
      }
    }
    return 0;
  }
  std::vector<int> focus;
  if (!tech.empty()) {
    focus.push_back(index.technology_index(tech));
  } else {
    for (int j = 0; j < index.num_technologies(); ++j) focus.push_back(j);
  }
  std::vector<std::vector<std::string>> rows;
  for (int j : focus) {
    int rank = 0;
    for (const auto& c : top_collaborators(graph, j, top)) {
      rows.push_back({codes[j].to_string(), std::to_string(++rank), codes[c.technology].to_string(),
                      format == "csv" ? num(c.weight) : fixed(c.weight)});
    }
  }
  const std::vector<std::string> header{"technology", "rank", "collaborator", "weight"};
  if (format == "csv") {
    print_csv(std::cout, header, rows);
  } else {
    print_table(std::cout, header, rows);
  }
  return 0;
}

template <typename Scalar>
void train_and_save(const RunConfig& cfg, const DttConfig& dcfg, const CorpusIndex& index, const SplitSpec& split,
                    const fs::path& out, bool verbose) {
  DttModel<Scalar> model(dcfg);
  if (!cfg.embedding_file().empty()) {
    const int n = load_embedding_file(cfg.embedding_file(), dcfg.encoder, model.params().encoder);
    if (verbose) std::cerr << "loaded " << n << " word vectors\n";
  }
  train(model, index, split.train_inputs(), split.train_target, [&](int epoch, double loss) {
    if (verbose) std::cerr << "epoch " << epoch << " loss " << num(loss, 8) << '\n';
  });
  save_model(model, out);
  const auto& h = model.loss_history();
  std::cout << "epochs " << h.size() << " first_loss " << num(h.front(), 8) << " last_loss " << num(h.back(), 8)
            << '\n';
}

int run_train(const Globals& g, const fs::path& corpus, const fs::path& out, const std::string& period,
              std::optional<int> epochs, bool verbose) {
  std::map<std::string, std::string> flags;
  if (epochs) flags["train.epochs"] = std::to_string(*epochs);
  const RunConfig cfg = resolve_config(g, flags);
  const DttConfig dcfg = resolve_dtt(cfg);
  const CorpusIndex index = load_corpus(corpus);
  const SplitSpec split = resolve_split(index, cfg, period);
  if (cfg.float32()) {
    train_and_save<float>(cfg, dcfg, index, split, out, verbose);
  } else {
    train_and_save<double>(cfg, dcfg, index, split, out, verbose);
  }
  write_run_manifest(out, "train", cfg, g,
                     {{"corpus", fs::absolute(corpus).string()},
                      {"corpus_hash", index.ordering_hash()},
                      {"period", period_string(split)},
                      {"train_years", split.train_inputs()},
                      {"train_target", split.train_target}});
  return 0;
}

template <typename Scalar>
Eigen::MatrixXd model_scores(const fs::path& dir, const CorpusIndex& index, const std::vector<int>& years,
                             int threads) {
  DttModel<Scalar> model = load_model<Scalar>(dir);
  if (model.window_length() != static_cast<int>(years.size())) {
    throw ValidationError("model was trained on " + std::to_string(model.window_length()) +
                          "-year windows but the forecast window has " + std::to_string(years.size()) + " years");
  }
  model.mutable_config().threads = threads;
  return forecast_scores(model, index, years);
}

Eigen::MatrixXd load_and_score(const fs::path& dir, const CorpusIndex& index, const std::vector<int>& years,
                               int threads) {
  if (model_scalar_type(dir) == "float32") return model_scores<float>(dir, index, years, threads);
  return model_scores<double>(dir, index, years, threads);
}

int model_window(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw IoError("cannot read " + (dir / "manifest.json").string());
  try {
    return json::parse(in).at("window_length").get<int>();
  } catch (const json::exception& e) {
    throw ParseError("manifest", std::string("bad model manifest: ") + e.what());
  }
}

int run_predict(const Globals& g, const fs::path& model_dir, const fs::path& corpus, const std::string& company,
                int topk) {
  const std::string format = g.format.empty() ? "csv" : g.format;
  check_format(format, {"csv", "table"});
  const RunConfig cfg = resolve_config(g, {});
  const CorpusIndex index = load_corpus(corpus);
  const int i = index.company_index(company);
  if (topk < 1 || topk > index.num_technologies()) {
    throw ArgumentError("--topk must be between 1 and " + std::to_string(index.num_technologies()));
  }
  // Forecast the year after the corpus from the most recent window.
  const int window = model_window(model_dir);
  if (window > index.num_years()) throw ValidationError("corpus is shorter than the model's window");
  const auto years = year_range(index.last_year() - window + 1, index.last_year());
  const Eigen::MatrixXd scores = load_and_score(model_dir, index, years, resolve_threads(cfg));
  const auto ranked = rank_scores(scores.row(i).transpose());
  std::vector<std::vector<std::string>> rows;
  for (int k = 0; k < topk; ++k) {
    const auto& [j, s] = ranked[static_cast<std::size_t>(k)];
    rows.push_back({index.technologies()[j].to_string(), format == "csv" ? num(s) : fixed(s, 8)});
  }
  if (format == "csv") {
    print_csv(std::cout, {}, rows);
  } else {
    print_table(std::cout, {"code", "score"}, rows);
  }
  return 0;
}

int run_evaluate(const Globals& g, const fs::path& corpus, const std::string& method, const std::string& period,
                 const std::string& ks_flag, const fs::path& out) {
  const std::string format = g.format.empty() ? "table" : g.format;
  check_format(format, {"table", "csv", "json"});
  std::map<std::string, std::string> flags;
  if (!ks_flag.empty()) flags["eval.ks"] = ks_flag;
  const RunConfig cfg = resolve_config(g, flags);
  const std::vector<int> ks = cfg.ks();
  for (int k : ks) {
    if (k < 1) throw ValidationError("NDCG cut-offs must be >= 1");
  }
  const CorpusIndex index = load_corpus(corpus);
  const std::vector<SplitSpec> splits = resolve_splits(index, cfg, period);

  Forecaster forecaster;
  if (method == "persistence") {
    forecaster = persistence_scores;
  } else if (method == "lr") {
    const double reg = cfg.lr_reg();
    forecaster = [reg](const CorpusIndex& ix, const SplitSpec& s) { return lr_scores(ix, s, reg); };
  } else if (method == "oracle") {
    forecaster = oracle_scores;
  } else if (method == "random") {
    const auto seed = cfg.seed();
    forecaster = [seed](const CorpusIndex& ix, const SplitSpec& s) { return random_scores(ix, s, seed); };
  } else if (method == "dtt") {
    // Train a fresh model on each split's training window.
    const DttConfig dcfg = resolve_dtt(cfg);
    const bool f32 = cfg.float32();
    const std::string embeddings = cfg.embedding_file();
    forecaster = [dcfg, f32, embeddings](const CorpusIndex& ix, const SplitSpec& s) -> Eigen::MatrixXd {
      auto run = [&](auto tag) {
        using Scalar = decltype(tag);
        DttModel<Scalar> model(dcfg);
        if (!embeddings.empty()) load_embedding_file(embeddings, dcfg.encoder, model.params().encoder);
        train(model, ix, s.train_inputs(), s.train_target);
        return forecast_scores(model, ix, s.test_inputs());
      };
      return f32 ? run(float{}) : run(double{});
    };
  } else if (fs::is_directory(method)) {
    const fs::path dir = method;
    const int threads = resolve_threads(cfg);
    forecaster = [dir, threads](const CorpusIndex& ix, const SplitSpec& s) {
      return load_and_score(dir, ix, s.test_inputs(), threads);
    };
  } else {
    throw ValidationError("--model must be a model directory or one of persistence, lr, oracle, random, dtt; got '" +
                          method + "'");
  }

  json report = json::array();
  std::vector<std::vector<std::string>> rows;
  for (const auto& split : splits) {
    const NdcgReport r = evaluate(forecaster, index, split, ks);
    json entry{{"period", period_string(split)},
               {"test_years", split.test_inputs()},
               {"test_target", split.test_target},
               {"evaluated", r.companies.size()},
               {"excluded", r.excluded}};
    for (std::size_t q = 0; q < ks.size(); ++q) {
      entry["ndcg@" + std::to_string(ks[q])] = r.macro[q];
      rows.push_back({period_string(split), std::to_string(ks[q]),
                      format == "table" ? fixed(r.macro[q]) : num(r.macro[q]), std::to_string(r.companies.size()),
                      std::to_string(r.excluded)});
    }
    report.push_back(entry);
  }
  const std::vector<std::string> header{"period", "k", "ndcg", "evaluated", "excluded"};
  if (format == "json") {
    std::cout << json{{"model", method}, {"results", report}}.dump(2) << '\n';
  } else if (format == "csv") {
    print_csv(std::cout, header, rows);
  } else {
    print_table(std::cout, header, rows);
  }
  if (!out.empty()) {
    fs::create_directories(out);
    std::ofstream f(out / "evaluation.json");
    if (!f) throw IoError("cannot write " + (out / "evaluation.json").string());
    f << json{{"model", method}, {"results", report}}.dump(2) << '\n';
    write_run_manifest(out, "evaluate", cfg, g,
                       {{"corpus", fs::absolute(corpus).string()}, {"corpus_hash", index.ordering_hash()}});
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  Globals g;
  for (int k = 0; k < argc; ++k) g.argv.emplace_back(argv[k]);

  CLI::App app{"techtrace: patent technology distributions, competitor and collaboration relations, and "
               "recurrent technology forecasting"};
  app.set_version_flag("--version", TECHTRACE_VERSION);
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--config", g.config_path, "flat key=value config file")->check(CLI::ExistingFile);
  app.add_option("--set", g.overrides, "override one config key, key=value (repeatable)");
  app.add_option("--seed", g.seed, "base seed");
  app.add_option("--threads", g.threads, "worker threads, 0 = all cores");
  app.add_option("--format", g.format, "output format of the subcommand");

  fs::path input, out, corpus, model_dir;
  std::string level, company, tech, alpha, period, ks, method;
  std::optional<int> min_patents, m, n, epochs;
  int year = 0, topk = 10;
  bool verbose = false;

  auto* ingest_cmd = app.add_subcommand("ingest", "parse a JSON-lines patent file into a corpus directory");
  ingest_cmd->add_option("--input", input, "patent file")->required()->check(CLI::ExistingFile);
  ingest_cmd->add_option("--level", level, "section, class, subclass or group");
  ingest_cmd->add_option("--min-patents", min_patents, "drop companies with fewer patents");
  ingest_cmd->add_option("--out", out, "corpus directory")->required();

  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic corpus with planted structure");
  synth_cmd->add_option("--out", out, "corpus directory")->required();

  auto* stats_cmd = app.add_subcommand("stats", "corpus statistics (--format table|csv)");
  stats_cmd->add_option("--corpus", corpus, "corpus directory")->required();

  auto* dist_cmd = app.add_subcommand("distribution", "technology distributions of one year (--format csv|table)");
  dist_cmd->add_option("--corpus", corpus, "corpus directory")->required();
  dist_cmd->add_option("--year", year, "calendar year")->required();
  dist_cmd->add_option("--company", company, "single company id");

  auto* pcr_cmd = app.add_subcommand("pcr", "closest competitors of a company (--format table|csv)");
  pcr_cmd->add_option("--corpus", corpus, "corpus directory")->required();
  pcr_cmd->add_option("--year", year, "calendar year")->required();
  pcr_cmd->add_option("--company", company, "company id")->required();
  pcr_cmd->add_option("--m", m, "number of competitors");
  pcr_cmd->add_option("--alpha", alpha, "indicator weights a1,a2,a3");

  auto* ctr_cmd = app.add_subcommand("ctr", "collaborating technologies (--format table|csv|edgelist)");
  ctr_cmd->add_option("--corpus", corpus, "corpus directory")->required();
  ctr_cmd->add_option("--year", year, "calendar year")->required();
  ctr_cmd->add_option("--tech", tech, "single technology code");
  ctr_cmd->add_option("--n", n, "collaborators per technology");

  auto* train_cmd = app.add_subcommand("train", "train a forecasting model");
  train_cmd->add_option("--corpus", corpus, "corpus directory")->required();
  train_cmd->add_option("--out", out, "model directory")->required();
  train_cmd->add_option("--period", period, "y0-y1: train on y0..y1-1 with target y1");
  train_cmd->add_option("--epochs", epochs, "training epochs");
  train_cmd->add_flag("--verbose", verbose, "print the loss of every epoch to stderr");

  auto* predict_cmd = app.add_subcommand("predict", "top technologies of a company for the year after the corpus");
  predict_cmd->add_option("--model", model_dir, "model directory")->required()->check(CLI::ExistingDirectory);
  predict_cmd->add_option("--corpus", corpus, "corpus directory")->required();
  predict_cmd->add_option("--company", company, "company id")->required();
  predict_cmd->add_option("--topk", topk, "rows to print");

  auto* eval_cmd = app.add_subcommand("evaluate", "macro NDCG@K of a model or baseline (--format table|csv|json)");
  eval_cmd->add_option("--corpus", corpus, "corpus directory")->required();
  eval_cmd->add_option("--model", method, "model directory or persistence|lr|oracle|random|dtt")->required();
  eval_cmd->add_option("--period", period, "y0-y1: test on y0+1..y1 with target y1+1");
  eval_cmd->add_option("--k", ks, "comma-separated cut-offs");
  eval_cmd->add_option("--out", out, "write evaluation.json and a run manifest here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what());
  }

  try {
    resolve_config(g, {});
    if (*ingest_cmd) return run_ingest(g, input, level, min_patents, out);
    if (*synth_cmd) return run_synth(g, out);
    if (*stats_cmd) return run_stats(g, corpus);
    if (*dist_cmd) return run_distribution(g, corpus, year, company);
    if (*pcr_cmd) return run_pcr(g, corpus, year, company, m, alpha);
    if (*ctr_cmd) return run_ctr(g, corpus, year, tech, n);
    if (*train_cmd) return run_train(g, corpus, out, period, epochs, verbose);
    if (*predict_cmd) return run_predict(g, model_dir, corpus, company, topk);
    if (*eval_cmd) return run_evaluate(g, corpus, method, period, ks, out);
  } catch (const Error& e) {
    return fail(e.kind(), e.what());
  } catch (const fs::filesystem_error& e) {
    return fail("io", e.what());
  } catch (const json::exception& e) {
    return fail("parse", e.what());
  } catch (const std::exception& e) {
    return fail("internal", e.what());
  }
  return fail("usage", "no subcommand");
}
