#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "techtrace/corpus.hpp"

namespace techtrace {

// Generator settings for a corpus with planted competitor groups and planted
// collaborating technology pairs.
//
// Companies are split round-robin into `num_groups` groups. Each group owns a
// preference vector over technologies: `focus_mass` spread over
// `focus_per_group` randomly chosen focus technologies (random weights), the
// rest spread uniformly. With drift > 0 the preference moves linearly toward a
// second, independently drawn focus vector: pref(t) = (1-s) base + s dest with
// s = min(1, drift * t). Every patent draws a primary code from its group's
// preference; a primary code that belongs to a planted pair pulls in its
// partner with probability `collab_prob`, and an extra preference-drawn code is
// added with probability `extra_code_prob`. Text tokens mix per-technology
// vocabulary (probability `signal_prob`) with shared noise words.
struct SynthConfig {
  int num_companies = 50;
  int num_technologies = 40;
  int num_years = 10;
  int first_year = 2001;
  int patents_min = 30;  // per company-year, uniform in [min, max]
  int patents_max = 50;
  int num_groups = 10;
  int focus_per_group = 3;
  double focus_mass = 0.9;
  double drift = 0.0;
  int collab_pairs = 4;
  double collab_prob = 0.9;
  double extra_code_prob = 0.1;
  int doc_min_tokens = 40;
  int doc_max_tokens = 64;
  int words_per_tech = 12;
  int noise_words = 200;
  double signal_prob = 0.6;
  // Minimum pooled-distribution cosine similarity expected between group mates.
  double group_similarity = 0.9;

  void validate() const;
};

struct PlantedStructure {
  std::vector<std::string> companies;        // generation order (== lexicographic)
  std::vector<int> company_group;            // per company
  std::vector<std::string> technologies;     // generation order
  // preference[g][t][j]: expected primary-code distribution of group g in year offset t.
  std::vector<std::vector<std::vector<double>>> preference;
  std::vector<std::pair<std::string, std::string>> collab_pairs;
};

struct SynthResult {
  std::vector<PatentRecord> records;
  PlantedStructure planted;
};

SynthResult synthesize(const SynthConfig& config, std::uint64_t seed);

// Subclass-level index over a fresh synthetic corpus (min_patents = 1).
CorpusIndex synth_corpus(const SynthConfig& config, std::uint64_t seed);

// Smallest cosine similarity between group mates' distributions pooled over all
// years (patent counts per technology). 1.0 when no group has two members.
double min_group_cosine(const CorpusIndex& index, const PlantedStructure& planted);

std::string planted_to_json(const PlantedStructure& planted);

}  // namespace techtrace
