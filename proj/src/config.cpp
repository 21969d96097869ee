#include "techtrace/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "techtrace/error.hpp"
#include "techtrace/eval.hpp"

namespace techtrace {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

[[noreturn]] void bad(const std::string& key, const std::string& value, const std::string& expected) {
  throw ValidationError("config key '" + key + "' expects " + expected + ", got '" + value + "'");
}

long long to_int(const std::string& key, const std::string& v) {
  long long x = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (v.empty() || r.ec != std::errc{} || r.ptr != v.data() + v.size()) bad(key, v, "an integer");
  return x;
}

double to_double(const std::string& key, const std::string& v) {
  double x = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (v.empty() || r.ec != std::errc{} || r.ptr != v.data() + v.size()) bad(key, v, "a number");
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad(key, v, "true or false");
}

std::vector<int> to_ints(const std::string& key, const std::string& v) {
  std::vector<int> out;
  for (const auto& p : split(v, ',')) out.push_back(static_cast<int>(to_int(key, p)));
  if (out.empty()) bad(key, v, "a comma-separated list of integers");
  return out;
}

std::vector<double> to_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& p : split(v, ',')) out.push_back(to_double(key, p));
  if (out.empty()) bad(key, v, "a comma-separated list of numbers");
  return out;
}

void check_value(const std::string& key, const std::string& v) {
  static const std::vector<std::string> bools{"pcr.standardize_activity", "train.gru_bias", "train.use_pcr",
                                              "train.use_ctr", "train.freeze_samples"};
  static const std::vector<std::string> doubles{"train.lambda", "train.rho", "train.epsilon", "train.learning_rate",
                                                "train.init_scale", "eval.lr_reg", "synth.focus_mass", "synth.drift",
                                                "synth.collab_prob", "synth.extra_code_prob", "synth.signal_prob",
                                                "synth.group_similarity"};
  static const std::vector<std::string> strings{"encoder.embedding_file", "train.sampling_seed", "train.triple_seed"};
  auto in = [&](const std::vector<std::string>& list) { return std::find(list.begin(), list.end(), key) != list.end(); };

  if (key == "corpus.level") {
    try {
      parse_cpc_level(v);
    } catch (const Error&) {
      bad(key, v, "section, class, subclass or group");
    }
  } else if (key == "pcr.alpha") {
    if (to_doubles(key, v).size() != 3) bad(key, v, "three weights a1,a2,a3");
  } else if (key == "encoder.windows" || key == "encoder.channels") {
    if (to_ints(key, v).size() != 3) bad(key, v, "three integers");
  } else if (key == "eval.ks") {
    to_ints(key, v);
  } else if (key == "eval.periods") {
    try {
      for (const auto& p : split(v, ',')) parse_period(p);
    } catch (const ParseError&) {
      bad(key, v, "a comma-separated list of periods like 1995-2000");
    }
  } else if (key == "train.init") {
    if (v != "uniform" && v != "scaled") bad(key, v, "uniform or scaled");
  } else if (key == "train.scalar") {
    if (v != "float64" && v != "float32") bad(key, v, "float64 or float32");
  } else if (in(bools)) {
    to_bool(key, v);
  } else if (in(doubles)) {
    to_double(key, v);
  } else if (in(strings)) {
    if ((key == "train.sampling_seed" || key == "train.triple_seed") && !v.empty()) to_int(key, v);
  } else {
    to_int(key, v);
  }
}

}  // namespace

const std::vector<RunConfig::Key>& RunConfig::keys() {
  static const std::vector<Key> k{
      {"seed", "11", "base seed; initialization seed of the model"},
      {"threads", "0", "worker threads, 0 = all cores"},
      {"corpus.level", "subclass", "CPC level used as technology: section, class, subclass, group"},
      {"corpus.min_patents", "1", "drop companies with fewer patents in total"},
      {"pcr.m", "5", "competitors per company"},
      {"pcr.alpha", "0,0.5,0.5", "weights of activity, share, emphasis"},
      {"pcr.standardize_activity", "true", "divide activity by the year's largest count"},
      {"ctr.n", "5", "collaborators per technology"},
      {"encoder.d0", "32", "word embedding dimension"},
      {"encoder.d1", "64", "tokens per patent (pad / truncate)"},
      {"encoder.d2", "8", "patents sampled per entity-year"},
      {"encoder.d", "32", "output and hidden dimension"},
      {"encoder.windows", "3,3,3", "convolution window per stage"},
      {"encoder.channels", "32,32,32", "convolution channels per stage"},
      {"encoder.buckets", "4096", "hash buckets of the embedding table"},
      {"encoder.embedding_file", "", "optional word vectors: token followed by d0 numbers per line"},
      {"train.epochs", "50", "training epochs"},
      {"train.triples", "20", "triples per company per epoch"},
      {"train.lambda", "1e-4", "L2 coefficient"},
      {"train.rho", "0.95", "Adadelta decay"},
      {"train.epsilon", "1e-6", "Adadelta epsilon"},
      {"train.learning_rate", "1", "multiplier on the Adadelta update"},
      {"train.init", "uniform", "uniform or scaled"},
      {"train.init_scale", "0.1", "half-width of uniform initialization"},
      {"train.gru_bias", "false", "add bias vectors to both GRUs"},
      {"train.use_pcr", "true", "add competitor factors to company inputs"},
      {"train.use_ctr", "true", "add collaborator factors to technology inputs"},
      {"train.freeze_samples", "false", "reuse one patent sample for every epoch"},
      {"train.sampling_seed", "", "patent sampling seed, default seed + 1"},
      {"train.triple_seed", "", "triple sampling seed, default seed + 2"},
      {"train.scalar", "float64", "float64 or float32"},
      {"train.chunk_size", "64", "patents per encoder work item"},
      {"eval.periods", "", "comma-separated periods y0-y1; default first year to last year - 1"},
      {"eval.ks", "10,20,50,100", "NDCG cut-offs"},
      {"eval.lr_reg", "1e-3", "ridge coefficient of the LR baseline"},
      {"synth.companies", "50", "number of companies M"},
      {"synth.technologies", "40", "number of technologies N"},
      {"synth.years", "10", "number of years T"},
      {"synth.first_year", "2001", "calendar year of the first generated year"},
      {"synth.patents_min", "30", "patents per company-year, lower bound"},
      {"synth.patents_max", "50", "patents per company-year, upper bound"},
      {"synth.groups", "10", "planted competitor groups"},
      {"synth.focus", "3", "focus technologies per group"},
      {"synth.focus_mass", "0.9", "preference mass on the focus technologies"},
      {"synth.drift", "0", "per-year interpolation step toward the second focus set"},
      {"synth.collab_pairs", "4", "planted collaborating technology pairs"},
      {"synth.collab_prob", "0.9", "probability a planted pair's partner code is added"},
      {"synth.extra_code_prob", "0.1", "probability of one extra preference-drawn code"},
      {"synth.doc_min_tokens", "40", "tokens per patent, lower bound"},
      {"synth.doc_max_tokens", "64", "tokens per patent, upper bound"},
      {"synth.words_per_tech", "12", "vocabulary words owned by each technology"},
      {"synth.noise_words", "200", "shared noise vocabulary size"},
      {"synth.signal_prob", "0.6", "probability a token comes from the patent's technology vocabulary"},
      {"synth.group_similarity", "0.9", "minimum pooled-distribution cosine between group mates"},
  };
  return k;
}

RunConfig::RunConfig() {
  for (const auto& k : keys()) values_[k.name] = k.default_value;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw ValidationError("unknown config key '" + key + "'");
  const std::string v = trim(value);
  check_value(key, v);
  it->second = v;
}

const std::string& RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ValidationError("unknown config key '" + key + "'");
  return it->second;
}

bool RunConfig::is_default(const std::string& key) const {
  for (const auto& k : keys()) {
    if (k.name == key) return get(key) == k.default_value;
  }
  throw ValidationError("unknown config key '" + key + "'");
}

void RunConfig::load_string(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  long n = 0;
  while (std::getline(in, line)) {
    ++n;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ParseError("config", "expected key = value", n);
    try {
      set(trim(t.substr(0, eq)), t.substr(eq + 1));
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(n) + ": " + e.what());
    }
  }
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  load_string(ss.str());
}

std::string RunConfig::dump() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
  return out;
}

std::string RunConfig::hash() const { return hex64(fnv1a64(dump())); }

CpcLevel RunConfig::level() const { return parse_cpc_level(get("corpus.level")); }
int RunConfig::min_patents() const { return static_cast<int>(to_int("corpus.min_patents", get("corpus.min_patents"))); }
std::uint64_t RunConfig::seed() const { return static_cast<std::uint64_t>(to_int("seed", get("seed"))); }
int RunConfig::threads() const { return static_cast<int>(to_int("threads", get("threads"))); }
bool RunConfig::float32() const { return get("train.scalar") == "float32"; }
double RunConfig::lr_reg() const { return to_double("eval.lr_reg", get("eval.lr_reg")); }
std::string RunConfig::embedding_file() const { return get("encoder.embedding_file"); }
std::vector<int> RunConfig::ks() const { return to_ints("eval.ks", get("eval.ks")); }

std::vector<std::pair<int, int>> RunConfig::periods() const {
  std::vector<std::pair<int, int>> out;
  for (const auto& p : split(get("eval.periods"), ',')) out.push_back(parse_period(p));
  return out;
}

DttConfig RunConfig::dtt() const {
  auto i = [&](const char* k) { return static_cast<int>(to_int(k, get(k))); };
  auto d = [&](const char* k) { return to_double(k, get(k)); };
  auto b = [&](const char* k) { return to_bool(k, get(k)); };
  DttConfig c;
  c.encoder.embed_dim = i("encoder.d0");
  c.encoder.max_tokens = i("encoder.d1");
  c.encoder.samples = i("encoder.d2");
  c.encoder.output_dim = i("encoder.d");
  const auto w = to_ints("encoder.windows", get("encoder.windows"));
  const auto ch = to_ints("encoder.channels", get("encoder.channels"));
  std::copy(w.begin(), w.end(), c.encoder.windows.begin());
  std::copy(ch.begin(), ch.end(), c.encoder.channels.begin());
  c.encoder.hash_buckets = i("encoder.buckets");
  c.pcr.m = i("pcr.m");
  const auto a = to_doubles("pcr.alpha", get("pcr.alpha"));
  std::copy(a.begin(), a.end(), c.pcr.alpha.begin());
  c.pcr.standardize_activity = b("pcr.standardize_activity");
  c.ctr_n = i("ctr.n");
  c.epochs = i("train.epochs");
  c.triples_per_company = i("train.triples");
  c.lambda = d("train.lambda");
  c.adadelta.rho = d("train.rho");
  c.adadelta.epsilon = d("train.epsilon");
  c.adadelta.learning_rate = d("train.learning_rate");
  c.init = get("train.init") == "scaled" ? DttConfig::Init::Scaled : DttConfig::Init::Uniform;
  c.init_scale = d("train.init_scale");
  c.gru_bias = b("train.gru_bias");
  c.use_pcr = b("train.use_pcr");
  c.use_ctr = b("train.use_ctr");
  c.freeze_samples = b("train.freeze_samples");
  c.chunk_size = i("train.chunk_size");
  c.seed = seed();
  c.sampling_seed = get("train.sampling_seed").empty() ? c.seed + 1
                                                        : static_cast<std::uint64_t>(to_int("", get("train.sampling_seed")));
  c.triple_seed = get("train.triple_seed").empty() ? c.seed + 2
                                                    : static_cast<std::uint64_t>(to_int("", get("train.triple_seed")));
  c.validate();
  return c;
}

SynthConfig RunConfig::synth() const {
  auto i = [&](const char* k) { return static_cast<int>(to_int(k, get(k))); };
  auto d = [&](const char* k) { return to_double(k, get(k)); };
  SynthConfig s;
  s.num_companies = i("synth.companies");
  s.num_technologies = i("synth.technologies");
  s.num_years = i("synth.years");
  s.first_year = i("synth.first_year");
  s.patents_min = i("synth.patents_min");
  s.patents_max = i("synth.patents_max");
  s.num_groups = i("synth.groups");
  s.focus_per_group = i("synth.focus");
  s.focus_mass = d("synth.focus_mass");
  s.drift = d("synth.drift");
  s.collab_pairs = i("synth.collab_pairs");
  s.collab_prob = d("synth.collab_prob");
  s.extra_code_prob = d("synth.extra_code_prob");
  s.doc_min_tokens = i("synth.doc_min_tokens");
  s.doc_max_tokens = i("synth.doc_max_tokens");
  s.words_per_tech = i("synth.words_per_tech");
  s.noise_words = i("synth.noise_words");
  s.signal_prob = d("synth.signal_prob");
  s.group_similarity = d("synth.group_similarity");
  s.validate();
  return s;
}

}  // namespace techtrace
