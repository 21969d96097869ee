#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "techtrace/cpc.hpp"
#include "techtrace/dtt.hpp"
#include "techtrace/synth.hpp"

namespace techtrace {

// Flat key=value run configuration. Every key has a default; files and
// overrides may only set known keys. Lines are "key = value"; blank lines and
// lines starting with '#' are ignored. Later settings win, so apply the file
// first and command-line flags after it.
class RunConfig {
 public:
  struct Key {
    std::string name;
    std::string default_value;
    std::string help;
  };
  static const std::vector<Key>& keys();

  RunConfig();

  // Throws IoError, ParseError (malformed line) or ValidationError (unknown
  // key or bad value, prefixed with the line number).
  void load_file(const std::filesystem::path& path);
  void load_string(const std::string& text);
  // Throws ValidationError for unknown keys or values of the wrong type.
  void set(const std::string& key, const std::string& value);
  const std::string& get(const std::string& key) const;
  bool is_default(const std::string& key) const;

  // Sorted "key=value" lines of the effective configuration.
  std::string dump() const;
  // FNV-1a of dump(), hex.
  std::string hash() const;

  CpcLevel level() const;
  int min_patents() const;
  std::uint64_t seed() const;
  int threads() const;  // 0 = all available cores
  bool float32() const;
  DttConfig dtt() const;
  SynthConfig synth() const;
  std::vector<int> ks() const;
  // Empty when no period is configured.
  std::vector<std::pair<int, int>> periods() const;
  double lr_reg() const;
  std::string embedding_file() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace techtrace
