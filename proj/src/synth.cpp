#include "techtrace/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string_view>

#include "json.hpp"
#include "techtrace/error.hpp"
#include "techtrace/random.hpp"

namespace techtrace {

void SynthConfig::validate() const {
  auto fail = [](const std::string& what) { throw ValidationError("synth config: " + what); };
  if (num_companies < 1) fail("num_companies must be >= 1");
  if (num_technologies < 1) fail("num_technologies must be >= 1");
  if (num_technologies > 891) fail("num_technologies must be <= 891");
  if (num_years < 1) fail("num_years must be >= 1");
  if (patents_min < 0 || patents_max < patents_min) fail("need 0 <= patents_min <= patents_max");
  if (patents_max < 1) fail("patents_max must be >= 1");
  if (num_groups < 1 || num_groups > num_companies) fail("num_groups must be in [1, num_companies]");
  if (focus_per_group < 1 || focus_per_group > num_technologies) {
    fail("focus_per_group must be in [1, num_technologies]");
  }
  if (!(focus_mass >= 0.0 && focus_mass <= 1.0)) fail("focus_mass must be in [0, 1]");
  if (!(drift >= 0.0 && drift <= 1.0)) fail("drift must be in [0, 1]");
  if (collab_pairs < 0 || 2 * collab_pairs > num_technologies) {
    fail("collab_pairs must be in [0, num_technologies / 2]");
  }
  for (double p : {collab_prob, extra_code_prob, signal_prob}) {
    if (!(p >= 0.0 && p <= 1.0)) fail("probabilities must be in [0, 1]");
  }
  if (doc_min_tokens < 0 || doc_max_tokens < doc_min_tokens) {
    fail("need 0 <= doc_min_tokens <= doc_max_tokens");
  }
  if (words_per_tech < 1) fail("words_per_tech must be >= 1");
  if (noise_words < 1) fail("noise_words must be >= 1");
}

namespace {

std::string pad_number(int value, int width) {
  std::string s = std::to_string(value);
  if (static_cast<int>(s.size()) < width) s.insert(0, static_cast<std::size_t>(width) - s.size(), '0');
  return s;
}

// Distinct subclass-level codes: section cycles through the nine sections,
// the class number advances every nine codes.
std::string synthetic_code(int k) {
  std::string code(1, kCpcSections[static_cast<std::size_t>(k % 9)]);
  code += pad_number((k / 9) % 99 + 1, 2);
  code += static_cast<char>('A' + (k * 7 + k / 9) % 26);
  return code;
}

// Pronounceable lowercase pseudo-word for an integer id (three or more syllables).
std::string pseudo_word(int id) {
  static constexpr std::string_view consonants = "bcdfghjklmnprstvwxyz";
  static constexpr std::string_view vowels = "aeiou";
  std::string word;
  int n = id;
  for (int s = 0; s < 3 || n > 0; ++s) {
    const int syl = n % 100;
    n /= 100;
    word += consonants[static_cast<std::size_t>(syl / 5)];
    word += vowels[static_cast<std::size_t>(syl % 5)];
  }
  return word;
}

std::vector<double> focus_vector(const SynthConfig& cfg, Rng& rng) {
  const int n = cfg.num_technologies;
  std::vector<int> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), 0);
  const std::vector<int> focus = sample_without_replacement(all, cfg.focus_per_group, rng);
  std::vector<double> raw(focus.size());
  for (auto& w : raw) w = uniform(rng, 0.5, 1.5);
  const double total = std::accumulate(raw.begin(), raw.end(), 0.0);
  std::vector<double> pref(static_cast<std::size_t>(n), (1.0 - cfg.focus_mass) / n);
  for (std::size_t k = 0; k < focus.size(); ++k) {
    pref[static_cast<std::size_t>(focus[k])] += cfg.focus_mass * raw[k] / total;
  }
  return pref;
}

}  // namespace

SynthResult synthesize(const SynthConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  SynthResult result;
  PlantedStructure& planted = result.planted;

  const int M = cfg.num_companies;
  const int N = cfg.num_technologies;
  const int T = cfg.num_years;
  const int G = cfg.num_groups;

  const int company_width = std::max(3, static_cast<int>(std::to_string(M - 1).size()));
  for (int i = 0; i < M; ++i) {
    planted.companies.push_back("company_" + pad_number(i, company_width));
    planted.company_group.push_back(i % G);
  }
  for (int j = 0; j < N; ++j) planted.technologies.push_back(synthetic_code(j));

  planted.preference.resize(static_cast<std::size_t>(G));
  for (int g = 0; g < G; ++g) {
    const std::vector<double> base = focus_vector(cfg, rng);
    const std::vector<double> dest = focus_vector(cfg, rng);
    for (int t = 0; t < T; ++t) {
      const double s = std::min(1.0, cfg.drift * t);
      std::vector<double> p(static_cast<std::size_t>(N));
      for (int j = 0; j < N; ++j) p[j] = (1.0 - s) * base[j] + s * dest[j];
      planted.preference[g].push_back(std::move(p));
    }
  }

  std::vector<int> partner(static_cast<std::size_t>(N), -1);
  {
    std::vector<int> all(static_cast<std::size_t>(N));
    std::iota(all.begin(), all.end(), 0);
    const std::vector<int> chosen = sample_without_replacement(all, 2 * cfg.collab_pairs, rng);
    for (int p = 0; p < cfg.collab_pairs; ++p) {
      const int a = chosen[2 * p], b = chosen[2 * p + 1];
      partner[a] = b;
      partner[b] = a;
      planted.collab_pairs.emplace_back(planted.technologies[a], planted.technologies[b]);
    }
  }

  std::vector<std::vector<std::string>> tech_words(static_cast<std::size_t>(N));
  int word_id = 0;
  for (int j = 0; j < N; ++j) {
    for (int w = 0; w < cfg.words_per_tech; ++w) tech_words[j].push_back(pseudo_word(word_id++));
  }
  std::vector<std::string> noise;
  for (int w = 0; w < cfg.noise_words; ++w) noise.push_back(pseudo_word(word_id++));

  long serial = 0;
  for (int t = 0; t < T; ++t) {
    for (int i = 0; i < M; ++i) {
      const std::vector<double>& pref = planted.preference[planted.company_group[i]][t];
      const int count = uniform_int(rng, cfg.patents_min, cfg.patents_max);
      for (int p = 0; p < count; ++p) {
        std::vector<int> techs{categorical(rng, pref)};
        if (partner[techs[0]] >= 0 && bernoulli(rng, cfg.collab_prob)) techs.push_back(partner[techs[0]]);
        if (bernoulli(rng, cfg.extra_code_prob)) techs.push_back(categorical(rng, pref));
        std::sort(techs.begin(), techs.end());
        techs.erase(std::unique(techs.begin(), techs.end()), techs.end());

        const int length = uniform_int(rng, cfg.doc_min_tokens, cfg.doc_max_tokens);
        std::vector<std::string> tokens;
        tokens.reserve(static_cast<std::size_t>(length));
        for (int w = 0; w < length; ++w) {
          if (bernoulli(rng, cfg.signal_prob)) {
            const int j = techs[uniform_index(rng, techs.size())];
            tokens.push_back(tech_words[j][uniform_index(rng, tech_words[j].size())]);
          } else {
            tokens.push_back(noise[uniform_index(rng, noise.size())]);
          }
        }

        PatentRecord r;
        r.patent_id = "SYN" + pad_number(static_cast<int>(serial++), 8);
        r.assignee_id = planted.companies[i];
        r.filing_year = cfg.first_year + t;
        for (int j : techs) r.cpc_codes.push_back(CpcCode::parse(planted.technologies[j]));
        std::sort(r.cpc_codes.begin(), r.cpc_codes.end());
        r.tokens = std::move(tokens);
        r.text_missing = r.tokens.empty();
        result.records.push_back(std::move(r));
      }
    }
  }
  return result;
}

CorpusIndex synth_corpus(const SynthConfig& config, std::uint64_t seed) {
  return CorpusIndex(synthesize(config, seed).records, CpcLevel::Subclass, 1);
}

double min_group_cosine(const CorpusIndex& index, const PlantedStructure& planted) {
  const int N = index.num_technologies();
  std::vector<std::vector<double>> pooled;
  std::vector<int> group;
  for (std::size_t c = 0; c < planted.companies.size(); ++c) {
    const int i = index.company_index(planted.companies[c]);
    std::vector<double> v(static_cast<std::size_t>(N), 0.0);
    for (int t = 0; t < index.num_years(); ++t) {
      for (int k : index.company_year_t(i, t)) {
        for (int j : index.patent_technologies(k)) v[j] += 1.0;
      }
    }
    pooled.push_back(std::move(v));
    group.push_back(planted.company_group[c]);
  }
  double worst = 1.0;
  for (std::size_t a = 0; a < pooled.size(); ++a) {
    for (std::size_t b = a + 1; b < pooled.size(); ++b) {
      if (group[a] != group[b]) continue;
      double dot = 0, na = 0, nb = 0;
      for (int j = 0; j < N; ++j) {
        dot += pooled[a][j] * pooled[b][j];
        na += pooled[a][j] * pooled[a][j];
        nb += pooled[b][j] * pooled[b][j];
      }
      const double cos = (na > 0 && nb > 0) ? dot / std::sqrt(na * nb) : 0.0;
      worst = std::min(worst, cos);
    }
  }
  return worst;
}

std::string planted_to_json(const PlantedStructure& planted) {
  nlohmann::json out;
  out["companies"] = planted.companies;
  out["company_group"] = planted.company_group;
  out["technologies"] = planted.technologies;
  out["preference"] = planted.preference;
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& [a, b] : planted.collab_pairs) pairs.push_back({a, b});
  out["collab_pairs"] = pairs;
  return out.dump(1);
}

}  // namespace techtrace
