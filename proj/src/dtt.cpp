#include "techtrace/dtt.hpp"

#include <algorithm>
#include <fstream>

#include "json.hpp"
#include "techtrace/ctr.hpp"
#include "techtrace/distribution.hpp"

namespace techtrace {

using nlohmann::json;

void DttConfig::validate() const {
  encoder.validate();
  if (pcr.m < 1) throw ValidationError("pcr m must be >= 1");
  for (double a : pcr.alpha) {
    if (!(a >= 0.0)) throw ValidationError("pcr alpha weights must be non-negative");
  }
  if (ctr_n < 1) throw ValidationError("ctr n must be >= 1");
  if (epochs < 0) throw ValidationError("epochs must be >= 0");
  if (triples_per_company < 1) throw ValidationError("triples_per_company must be >= 1");
  if (!(lambda >= 0.0)) throw ValidationError("lambda must be >= 0");
  if (!(adadelta.rho > 0.0 && adadelta.rho < 1.0)) throw ValidationError("adadelta rho must be in (0, 1)");
  if (!(adadelta.epsilon > 0.0)) throw ValidationError("adadelta epsilon must be > 0");
  if (!(adadelta.learning_rate > 0.0)) throw ValidationError("learning_rate must be > 0");
  if (!(init_scale >= 0.0)) throw ValidationError("init_scale must be >= 0");
  if (threads < 1) throw ValidationError("threads must be >= 1");
  if (chunk_size < 1) throw ValidationError("chunk_size must be >= 1");
}

std::vector<TrainingTriple> sample_triples(const Eigen::MatrixXd& target, int per_company, std::uint64_t seed) {
  std::vector<TrainingTriple> out;
  const auto N = target.cols();
  std::vector<double> row(static_cast<std::size_t>(N));
  std::vector<int> smaller;
  for (Eigen::Index i = 0; i < target.rows(); ++i) {
    if (N == 0 || target.row(i).maxCoeff() == target.row(i).minCoeff()) continue;
    for (Eigen::Index j = 0; j < N; ++j) row[static_cast<std::size_t>(j)] = target(i, j);
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(i)}));
    for (int k = 0; k < per_company; ++k) {
      const int pos = categorical(rng, row);
      smaller.clear();
      for (Eigen::Index j = 0; j < N; ++j) {
        if (target(i, j) < target(i, pos)) smaller.push_back(static_cast<int>(j));
      }
      // Only the smallest positive value can leave no candidate, and only when it ties the minimum.
      if (smaller.empty()) continue;
      const int neg = smaller[uniform_index(rng, smaller.size())];
      out.push_back({static_cast<int>(i), pos, neg});
    }
  }
  return out;
}

namespace {

void check_years(const CorpusIndex& index, const std::vector<int>& years) {
  if (years.empty()) throw ArgumentError("at least one input year is required");
  for (std::size_t k = 0; k < years.size(); ++k) {
    if (!index.has_year(years[k])) throw IndexError("year " + std::to_string(years[k]) + " is outside the corpus");
    if (k > 0 && years[k] != years[k - 1] + 1) throw ArgumentError("input years must be consecutive");
  }
}

SparseRows from_triplets(Eigen::Index rows, Eigen::Index cols, const std::vector<Eigen::Triplet<double>>& t) {
  SparseRows m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

}  // namespace

RelationWindow build_relations(const CorpusIndex& index, const std::vector<int>& years, const DttConfig& cfg) {
  check_years(index, years);
  const int M = index.num_companies(), N = index.num_technologies();
  RelationWindow w;
  w.years = years;
  for (int year : years) {
    std::vector<Eigen::Triplet<double>> comp, coll;
    if (cfg.use_pcr) {
      for (const auto& list : all_competitors(index, year, cfg.pcr)) {
        for (const auto& e : list.entries) comp.emplace_back(list.company, e.company, e.weight);
      }
    }
    if (cfg.use_ctr) {
      const CollabGraph graph = build_collab_graph(index, year);
      for (int j = 0; j < N; ++j) {
        for (const auto& c : top_collaborators(graph, j, cfg.ctr_n)) coll.emplace_back(j, c.technology, c.weight);
      }
    }
    w.competitors.push_back(from_triplets(M, M, comp));
    w.collaborators.push_back(from_triplets(N, N, coll));
  }
  return w;
}

SamplePlan plan_samples(const CorpusIndex& index, const std::vector<int>& years, int samples, std::uint64_t seed) {
  check_years(index, years);
  const int M = index.num_companies(), N = index.num_technologies();
  // chosen[y][kind][entity]
  std::vector<std::array<std::vector<std::vector<int>>, 2>> chosen(years.size());
  std::vector<int> all;
  for (std::size_t y = 0; y < years.size(); ++y) {
    const int t = index.year_offset(years[y]);
    for (int kind = 0; kind < 2; ++kind) {
      const int count = kind == 0 ? M : N;
      auto& lists = chosen[y][static_cast<std::size_t>(kind)];
      lists.resize(static_cast<std::size_t>(count));
      for (int e = 0; e < count; ++e) {
        lists[static_cast<std::size_t>(e)] = sample_entity_year(index, static_cast<EntityKind>(kind), e, t, samples, seed);
        all.insert(all.end(), lists[static_cast<std::size_t>(e)].begin(), lists[static_cast<std::size_t>(e)].end());
      }
    }
  }
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  std::vector<int> column(static_cast<std::size_t>(index.num_patents()), -1);
  for (std::size_t c = 0; c < all.size(); ++c) column[static_cast<std::size_t>(all[c])] = static_cast<int>(c);

  SamplePlan plan;
  const auto P = static_cast<Eigen::Index>(all.size());
  for (std::size_t y = 0; y < years.size(); ++y) {
    for (int kind = 0; kind < 2; ++kind) {
      std::vector<Eigen::Triplet<double>> t;
      const auto& lists = chosen[y][static_cast<std::size_t>(kind)];
      for (std::size_t e = 0; e < lists.size(); ++e) {
        const double w = lists[e].empty() ? 0.0 : 1.0 / static_cast<double>(lists[e].size());
        for (int k : lists[e]) t.emplace_back(static_cast<int>(e), column[static_cast<std::size_t>(k)], w);
      }
      (kind == 0 ? plan.company_pool : plan.tech_pool).push_back(from_triplets(kind == 0 ? M : N, P, t));
    }
  }
  plan.patents = std::move(all);
  return plan;
}

std::uint64_t epoch_sampling_seed(const DttConfig& cfg, int epoch) {
  return derive_seed(cfg.sampling_seed, {0, cfg.freeze_samples ? 0u : static_cast<std::uint64_t>(epoch)});
}

std::uint64_t forecast_sampling_seed(const DttConfig& cfg) { return derive_seed(cfg.sampling_seed, {1}); }

// ---------------------------------------------------------------------------

template <typename Scalar>
void train(DttModel<Scalar>& model, const CorpusIndex& index, const std::vector<int>& input_years, int target_year,
           const std::function<void(int, double)>& on_epoch) {
  const DttConfig& cfg = model.config();
  cfg.validate();
  check_years(index, input_years);
  if (input_years.size() < 2) throw ArgumentError("training needs at least two input years");
  if (!index.has_year(target_year)) throw IndexError("target year " + std::to_string(target_year) + " is outside the corpus");
  if (target_year <= input_years.back()) throw ArgumentError("target year must follow the input years");

  const TokenMatrix tokens = token_matrix(index, cfg.encoder);
  const Eigen::MatrixXd target = distribution_matrix(index, target_year).values;
  const RelationWindow relations = build_relations(index, input_years, cfg);
  model.set_window_length(static_cast<int>(input_years.size()));

  DttParams<Scalar> grad = DttParams<Scalar>::zeros(cfg);
  for (int e = 0; e < cfg.epochs; ++e) {
    const int epoch = model.epochs_trained();
    const SamplePlan plan = plan_samples(index, input_years, cfg.encoder.samples, epoch_sampling_seed(cfg, epoch));
    const DttObjective<Scalar> objective(
        cfg, tokens, relations, plan,
        sample_triples(target, cfg.triples_per_company, derive_seed(cfg.triple_seed, {static_cast<std::uint64_t>(epoch)})));
    const Scalar loss = objective.loss_and_gradient(model.params(), grad);
    if (!std::isfinite(static_cast<double>(loss))) {
      throw NumericalError("non-finite loss at epoch " + std::to_string(epoch + 1));
    }
    if (const auto bad = first_non_finite(grad); !bad.empty()) {
      throw NumericalError("non-finite gradient in " + bad + " at epoch " + std::to_string(epoch + 1));
    }
    model.optimizer().step(model.params(), grad);
    if (const auto bad = first_non_finite(model.params()); !bad.empty()) {
      throw NumericalError("non-finite parameter " + bad + " after epoch " + std::to_string(epoch + 1));
    }
    model.loss_history().push_back(static_cast<double>(loss));
    if (on_epoch) on_epoch(epoch + 1, static_cast<double>(loss));
  }
}

template <typename Scalar>
YearlyFactors<Scalar> compute_factors(const DttModel<Scalar>& model, const CorpusIndex& index,
                                      const std::vector<int>& input_years, std::uint64_t sampling_seed) {
  const DttConfig& cfg = model.config();
  const TokenMatrix tokens = token_matrix(index, cfg.encoder);
  const RelationWindow relations = build_relations(index, input_years, cfg);
  const SamplePlan plan = plan_samples(index, input_years, cfg.encoder.samples, sampling_seed);
  const DttObjective<Scalar> objective(cfg, tokens, relations, plan, {});
  return objective.forward(model.params(), false).factors;
}

template <typename Scalar>
Eigen::MatrixXd forecast_scores(const DttModel<Scalar>& model, const CorpusIndex& index,
                                const std::vector<int>& input_years) {
  if (!model.trained()) throw StateError("model has not been trained");
  const DttConfig& cfg = model.config();
  const TokenMatrix tokens = token_matrix(index, cfg.encoder);
  const RelationWindow relations = build_relations(index, input_years, cfg);
  const SamplePlan plan = plan_samples(index, input_years, cfg.encoder.samples, forecast_sampling_seed(cfg));
  const DttObjective<Scalar> objective(cfg, tokens, relations, plan, {});
  const auto fw = objective.forward(model.params(), false);
  const Matrix<Scalar> logits = fw.company_state * fw.tech_state.transpose();
  return logits.unaryExpr([](Scalar v) { return sigmoid(v); }).template cast<double>();
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

json config_to_json(const DttConfig& c) {
  const auto& e = c.encoder;
  return json{
      {"encoder",
       {{"embed_dim", e.embed_dim},
        {"max_tokens", e.max_tokens},
        {"samples", e.samples},
        {"output_dim", e.output_dim},
        {"windows", e.windows},
        {"channels", e.channels},
        {"hash_buckets", e.hash_buckets}}},
      {"pcr", {{"m", c.pcr.m}, {"alpha", c.pcr.alpha}, {"standardize_activity", c.pcr.standardize_activity}}},
      {"ctr_n", c.ctr_n},
      {"use_pcr", c.use_pcr},
      {"use_ctr", c.use_ctr},
      {"gru_bias", c.gru_bias},
      {"epochs", c.epochs},
      {"triples_per_company", c.triples_per_company},
      {"lambda", c.lambda},
      {"adadelta", {{"rho", c.adadelta.rho}, {"epsilon", c.adadelta.epsilon}, {"learning_rate", c.adadelta.learning_rate}}},
      {"init", c.init == DttConfig::Init::Scaled ? "scaled" : "uniform"},
      {"init_scale", c.init_scale},
      {"seed", c.seed},
      {"sampling_seed", c.sampling_seed},
      {"triple_seed", c.triple_seed},
      {"freeze_samples", c.freeze_samples},
      {"chunk_size", c.chunk_size},
  };
}

DttConfig config_from_json(const json& j) {
  DttConfig c;
  const auto& e = j.at("encoder");
  c.encoder.embed_dim = e.at("embed_dim");
  c.encoder.max_tokens = e.at("max_tokens");
  c.encoder.samples = e.at("samples");
  c.encoder.output_dim = e.at("output_dim");
  c.encoder.windows = e.at("windows");
  c.encoder.channels = e.at("channels");
  c.encoder.hash_buckets = e.at("hash_buckets");
  c.pcr.m = j.at("pcr").at("m");
  c.pcr.alpha = j.at("pcr").at("alpha");
  c.pcr.standardize_activity = j.at("pcr").at("standardize_activity");
  c.ctr_n = j.at("ctr_n");
  c.use_pcr = j.at("use_pcr");
  c.use_ctr = j.at("use_ctr");
  c.gru_bias = j.at("gru_bias");
  c.epochs = j.at("epochs");
  c.triples_per_company = j.at("triples_per_company");
  c.lambda = j.at("lambda");
  c.adadelta.rho = j.at("adadelta").at("rho");
  c.adadelta.epsilon = j.at("adadelta").at("epsilon");
  c.adadelta.learning_rate = j.at("adadelta").at("learning_rate");
  c.init = j.at("init") == "scaled" ? DttConfig::Init::Scaled : DttConfig::Init::Uniform;
  c.init_scale = j.at("init_scale");
  c.seed = j.at("seed");
  c.sampling_seed = j.at("sampling_seed");
  c.triple_seed = j.at("triple_seed");
  c.freeze_samples = j.at("freeze_samples");
  c.chunk_size = j.at("chunk_size");
  return c;
}

template <typename Scalar>
constexpr const char* scalar_name() {
  return sizeof(Scalar) == 4 ? "float32" : "float64";
}

template <typename Scalar>
void write_tensors(const std::filesystem::path& path, const DttParams<Scalar>& p) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  visit_dtt_tensors(
      [&](const std::string&, const auto& t) {
        out.write(reinterpret_cast<const char*>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(Scalar)));
      },
      p);
  if (!out) throw IoError("failed writing " + path.string());
}

template <typename Scalar>
void read_tensors(const std::filesystem::path& path, DttParams<Scalar>& p) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  visit_dtt_tensors(
      [&](const std::string& name, auto& t) {
        in.read(reinterpret_cast<char*>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(Scalar)));
        if (!in) throw ValidationError(path.filename().string() + " is truncated at tensor " + name);
      },
      p);
  if (in.peek() != std::char_traits<char>::eof()) throw ValidationError(path.filename().string() + " has trailing data");
}

json read_manifest(const std::filesystem::path& dir) {
  const auto path = dir / "manifest.json";
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  try {
    json m = json::parse(in);
    if (m.value("format", "") != "techtrace-model/1") throw ValidationError(path.string() + " is not a model manifest");
    return m;
  } catch (const json::exception& e) {
    throw ValidationError("bad model manifest " + path.string() + ": " + e.what());
  }
}

}  // namespace

std::string config_hash(const DttConfig& cfg) { return hex64(fnv1a64(config_to_json(cfg).dump())); }

template <typename Scalar>
void save_model(const DttModel<Scalar>& model, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  const auto& cfg = model.config();
  json tensors = json::array();
  visit_dtt_tensors(
      [&](const std::string& name, const auto& t) {
        tensors.push_back({{"name", name}, {"rows", t.rows()}, {"cols", t.cols()}});
      },
      model.params());
  const json manifest{
      {"format", "techtrace-model/1"},
      {"scalar", scalar_name<Scalar>()},
      {"config", config_to_json(cfg)},
      {"config_hash", config_hash(cfg)},
      {"seeds", {{"init", cfg.seed}, {"sampling", cfg.sampling_seed}, {"triples", cfg.triple_seed}}},
      {"dims", {{"d0", cfg.encoder.embed_dim}, {"d1", cfg.encoder.max_tokens}, {"d2", cfg.encoder.samples}, {"d", cfg.encoder.output_dim}}},
      {"parameters", parameter_count(model.params())},
      {"tensors", tensors},
      {"window_length", model.window_length()},
      {"epochs_trained", model.epochs_trained()},
      {"loss_history", model.loss_history()},
  };
  write_tensors(dir / "params.bin", model.params());
  // optimizer.bin: squared gradients, then squared updates
  {
    const auto path = dir / "optimizer.bin";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    for (const auto* p : {&model.optimizer().squared_gradients(), &model.optimizer().squared_updates()}) {
      visit_dtt_tensors(
          [&](const std::string&, const auto& t) {
            out.write(reinterpret_cast<const char*>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(Scalar)));
          },
          *p);
    }
    if (!out) throw IoError("failed writing " + path.string());
  }
  std::ofstream out(dir / "manifest.json");
  if (!out) throw IoError("cannot write " + (dir / "manifest.json").string());
  out << manifest.dump(2) << '\n';
}

std::string model_scalar_type(const std::filesystem::path& dir) {
  return read_manifest(dir).value("scalar", "float64");
}

template <typename Scalar>
DttModel<Scalar> load_model(const std::filesystem::path& dir) {
  const json m = read_manifest(dir);
  if (m.value("scalar", "") != scalar_name<Scalar>()) {
    throw ValidationError("model scalar type is " + m.value("scalar", std::string("?")));
  }
  DttConfig cfg;
  try {
    cfg = config_from_json(m.at("config"));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad model config: ") + e.what());
  }
  if (config_hash(cfg) != m.value("config_hash", "")) throw ValidationError("model config hash mismatch");
  DttModel<Scalar> model(cfg);
  read_tensors(dir / "params.bin", model.params());
  {
    const auto path = dir / "optimizer.bin";
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    for (auto* p : {&model.optimizer().squared_gradients(), &model.optimizer().squared_updates()}) {
      visit_dtt_tensors(
          [&](const std::string& name, auto& t) {
            in.read(reinterpret_cast<char*>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(Scalar)));
            if (!in) throw ValidationError("optimizer.bin is truncated at tensor " + name);
          },
          *p);
    }
  }
  model.loss_history() = m.at("loss_history").get<std::vector<double>>();
  model.set_window_length(m.value("window_length", 0));
  return model;
}

template void train<double>(DttModel<double>&, const CorpusIndex&, const std::vector<int>&, int,
                            const std::function<void(int, double)>&);
template void train<float>(DttModel<float>&, const CorpusIndex&, const std::vector<int>&, int,
                           const std::function<void(int, double)>&);
template Eigen::MatrixXd forecast_scores<double>(const DttModel<double>&, const CorpusIndex&, const std::vector<int>&);
template Eigen::MatrixXd forecast_scores<float>(const DttModel<float>&, const CorpusIndex&, const std::vector<int>&);
template YearlyFactors<double> compute_factors<double>(const DttModel<double>&, const CorpusIndex&,
                                                       const std::vector<int>&, std::uint64_t);
template YearlyFactors<float> compute_factors<float>(const DttModel<float>&, const CorpusIndex&,
                                                     const std::vector<int>&, std::uint64_t);
template void save_model<double>(const DttModel<double>&, const std::filesystem::path&);
template void save_model<float>(const DttModel<float>&, const std::filesystem::path&);
template DttModel<double> load_model<double>(const std::filesystem::path&);
template DttModel<float> load_model<float>(const std::filesystem::path&);

}  // namespace techtrace
