#include "techtrace/stats.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <set>

namespace techtrace {

namespace {

constexpr int kSections = static_cast<int>(kCpcSections.size());

int section_slot(char s) { return static_cast<int>(kCpcSections.find(s)); }

std::vector<int> patent_sections(const PatentRecord& r) {
  std::set<int> s;
  for (const auto& c : r.cpc_codes) s.insert(section_slot(c.section()));
  return {s.begin(), s.end()};
}

}  // namespace

StatsReport stats(const CorpusIndex& index, int top_growing) {
  const int T = index.num_years();
  const int M = index.num_companies();
  const int N = index.num_technologies();
  StatsReport rep;
  rep.companies = index.companies();
  for (int t = 0; t < T; ++t) rep.years.push_back(index.first_year() + t);
  rep.section_counts.assign(T, std::vector<int>(kSections, 0));
  rep.section_shares.assign(T, std::vector<double>(kSections, 0.0));
  rep.patents_per_year.assign(T, 0);
  rep.company_section_shares.assign(M, std::vector<std::vector<double>>(T, std::vector<double>(kSections, 0.0)));

  std::vector<std::vector<int>> tech_counts(T, std::vector<int>(N, 0));
  for (int k = 0; k < index.num_patents(); ++k) {
    const int t = index.patent_year_t(k);
    const int i = index.patent_company(k);
    const auto sections = patent_sections(index.patent(k));
    const double w = 1.0 / static_cast<double>(sections.size());
    ++rep.patents_per_year[t];
    for (int s : sections) {
      ++rep.section_counts[t][s];
      rep.section_shares[t][s] += w;
      rep.company_section_shares[i][t][s] += w;
    }
    for (int j : index.patent_technologies(k)) ++tech_counts[t][j];
  }
  for (int t = 0; t < T; ++t) {
    if (rep.patents_per_year[t] > 0) {
      for (auto& v : rep.section_shares[t]) v /= rep.patents_per_year[t];
    }
    for (int i = 0; i < M; ++i) {
      const auto n = index.company_year_t(i, t).size();
      if (n > 0) {
        for (auto& v : rep.company_section_shares[i][t]) v /= static_cast<double>(n);
      }
    }
  }

  // Growth between the first and last years that have any filings.
  int first = -1, last = -1;
  for (int t = 0; t < T; ++t) {
    if (rep.patents_per_year[t] == 0) continue;
    if (first < 0) first = t;
    last = t;
  }
  if (first >= 0) {
    for (int j = 0; j < N; ++j) {
      StatsReport::Growth g;
      g.technology = index.technologies()[j].to_string();
      g.first_share = static_cast<double>(tech_counts[first][j]) / rep.patents_per_year[first];
      g.last_share = static_cast<double>(tech_counts[last][j]) / rep.patents_per_year[last];
      g.delta = g.last_share - g.first_share;
      rep.top_growing.push_back(g);
    }
    std::stable_sort(rep.top_growing.begin(), rep.top_growing.end(),
                     [](const auto& a, const auto& b) { return a.delta > b.delta; });
    if (static_cast<int>(rep.top_growing.size()) > top_growing) rep.top_growing.resize(top_growing);
  }
  return rep;
}

void write_stats_table(std::ostream& out, const StatsReport& rep) {
  const auto flags = out.flags();
  out << "Patents per year by section (count / share)\n";
  out << std::setw(6) << "year" << std::setw(8) << "total";
  for (char s : kCpcSections) out << std::setw(14) << s;
  out << '\n';
  out << std::fixed << std::setprecision(3);
  for (std::size_t t = 0; t < rep.years.size(); ++t) {
    out << std::setw(6) << rep.years[t] << std::setw(8) << rep.patents_per_year[t];
    for (int s = 0; s < kSections; ++s) {
      out << std::setw(7) << rep.section_counts[t][s] << " " << std::setw(6) << rep.section_shares[t][s];
    }
    out << '\n';
  }

  out << "\nCompany section distribution (share per year)\n";
  for (std::size_t i = 0; i < rep.companies.size(); ++i) {
    out << rep.companies[i] << '\n';
    for (std::size_t t = 0; t < rep.years.size(); ++t) {
      out << "  " << std::setw(6) << rep.years[t];
      for (int s = 0; s < kSections; ++s) out << std::setw(7) << rep.company_section_shares[i][t][s];
      out << '\n';
    }
  }

  out << "\nTop growing technologies\n";
  out << std::setw(10) << "code" << std::setw(10) << "first" << std::setw(10) << "last" << std::setw(10)
      << "delta" << '\n';
  for (const auto& g : rep.top_growing) {
    out << std::setw(10) << g.technology << std::setw(10) << g.first_share << std::setw(10) << g.last_share
        << std::setw(10) << g.delta << '\n';
  }
  out.flags(flags);
}

void write_stats_csv(std::ostream& out, const StatsReport& rep) {
  const auto precision = out.precision(17);
  out << "table,company,year,key,count,value\n";
  for (std::size_t t = 0; t < rep.years.size(); ++t) {
    for (int s = 0; s < kSections; ++s) {
      out << "section_year,," << rep.years[t] << ',' << kCpcSections[s] << ',' << rep.section_counts[t][s]
          << ',' << rep.section_shares[t][s] << '\n';
    }
  }
  for (std::size_t i = 0; i < rep.companies.size(); ++i) {
    for (std::size_t t = 0; t < rep.years.size(); ++t) {
      for (int s = 0; s < kSections; ++s) {
        out << "company_section," << rep.companies[i] << ',' << rep.years[t] << ',' << kCpcSections[s]
            << ",," << rep.company_section_shares[i][t][s] << '\n';
      }
    }
  }
  for (const auto& g : rep.top_growing) {
    out << "top_growing,,," << g.technology << ",," << g.delta << '\n';
  }
  out.precision(precision);
}

}  // namespace techtrace
