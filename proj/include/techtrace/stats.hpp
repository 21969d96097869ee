#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "techtrace/corpus.hpp"

namespace techtrace {

// Descriptive corpus statistics: yearly section mix, per-company section
// distributions and the fastest-growing technologies.
struct StatsReport {
  std::vector<int> years;
  // [t][s]: patents with at least one code in section kCpcSections[s].
  std::vector<std::vector<int>> section_counts;
  // [t][s]: each patent spreads unit weight evenly over its distinct sections,
  // divided by the year's patent count. Zero for empty years.
  std::vector<std::vector<double>> section_shares;
  std::vector<int> patents_per_year;
  // [i][t][s]: same fractional allocation restricted to company i.
  std::vector<std::vector<std::vector<double>>> company_section_shares;

  struct Growth {
    std::string technology;
    double first_share = 0.0;  // fraction of the first year's patents tagged with it
    double last_share = 0.0;
    double delta = 0.0;
  };
  // Sorted by delta descending, ties by code.
  std::vector<Growth> top_growing;

  std::vector<std::string> companies;
};

StatsReport stats(const CorpusIndex& index, int top_growing = 10);

void write_stats_table(std::ostream& out, const StatsReport& report);
// Long format: table,key columns...,value; one row per datum.
void write_stats_csv(std::ostream& out, const StatsReport& report);

}  // namespace techtrace
