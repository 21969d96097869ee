#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "techtrace/corpus.hpp"
#include "techtrace/cpc.hpp"
#include "techtrace/random.hpp"

namespace tt_test {

using techtrace::PatentRecord;
using techtrace::Rng;

// Subclass code number j: section from "ABCDEFGH", class 01, subclass K.
inline std::string micro_code(int j) { return std::string(1, "ABCDEFGH"[j % 8]) + "0" + std::to_string(1 + j / 8) + "K"; }

inline std::string micro_company(int i) { return "co" + std::to_string(i); }

// A small random corpus: up to `max_per_cell` patents per company-year, each
// with 1..3 distinct codes drawn from n codes. Some codes are given at group
// level ("A01K12/34") to exercise truncation.
inline std::vector<PatentRecord> micro_records(Rng& rng, int m, int n, int t, int max_per_cell = 3) {
  std::vector<PatentRecord> out;
  int next_id = 0;
  for (int i = 0; i < m; ++i) {
    for (int y = 0; y < t; ++y) {
      const int count = techtrace::uniform_int(rng, 0, max_per_cell);
      for (int k = 0; k < count; ++k) {
        PatentRecord r;
        r.patent_id = "p" + std::to_string(next_id++);
        r.assignee_id = micro_company(i);
        r.filing_year = 2000 + y;
        std::set<std::string> codes;
        const int c = techtrace::uniform_int(rng, 1, std::min(3, n));
        while (static_cast<int>(codes.size()) < c) {
          std::string code = micro_code(techtrace::uniform_int(rng, 0, n - 1));
          if (techtrace::bernoulli(rng, 0.2)) code += "12";
          codes.insert(code);
        }
        for (const auto& s : codes) r.cpc_codes.push_back(techtrace::parse_cpc(s));
        std::sort(r.cpc_codes.begin(), r.cpc_codes.end());
        r.cpc_codes.erase(std::unique(r.cpc_codes.begin(), r.cpc_codes.end()), r.cpc_codes.end());
        const int words = techtrace::uniform_int(rng, 0, 6);
        for (int w = 0; w < words; ++w) r.tokens.push_back("w" + std::to_string(techtrace::uniform_int(rng, 0, 9)));
        r.text_missing = r.tokens.empty();
        out.push_back(std::move(r));
      }
    }
  }
  // Guarantee every year and at least one patent exist.
  for (int y = 0; y < t; ++y) {
    PatentRecord r;
    r.patent_id = "q" + std::to_string(y);
    r.assignee_id = micro_company(0);
    r.filing_year = 2000 + y;
    r.cpc_codes.push_back(techtrace::parse_cpc(micro_code(y % n)));
    r.tokens = {"w0"};
    out.push_back(std::move(r));
  }
  return out;
}

// Brute-force set views straight from the raw records.
struct SetOracle {
  const std::vector<PatentRecord>& records;

  // Patent ids of a company in a year.
  std::set<std::string> company_set(const std::string& company, int year) const {
    std::set<std::string> s;
    for (const auto& r : records) {
      if (r.assignee_id == company && r.filing_year == year) s.insert(r.patent_id);
    }
    return s;
  }

  // Patent ids carrying a code whose 4-character subclass prefix is `tech`.
  std::set<std::string> tech_set(const std::string& tech, int year) const {
    std::set<std::string> s;
    for (const auto& r : records) {
      if (r.filing_year != year) continue;
      for (const auto& c : r.cpc_codes) {
        const std::string str = c.to_string();
        if (str.size() >= 4 && str.substr(0, 4) == tech) s.insert(r.patent_id);
      }
    }
    return s;
  }

  static std::size_t intersection(const std::set<std::string>& a, const std::set<std::string>& b) {
    std::size_t n = 0;
    for (const auto& x : a) n += b.count(x);
    return n;
  }
  static std::size_t union_size(const std::set<std::string>& a, const std::set<std::string>& b) {
    return a.size() + b.size() - intersection(a, b);
  }
};

// Central difference of f along one coordinate of a scalar array.
template <typename Scalar>
double central_difference(Scalar& x, double h, const std::function<double()>& f) {
  const Scalar saved = x;
  x = saved + Scalar(h);
  const double up = f();
  x = saved - Scalar(h);
  const double down = f();
  x = saved;
  return (up - down) / (2.0 * h);
}

inline double relative_error(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-8});
  return std::abs(a - b) / scale;
}

}  // namespace tt_test
