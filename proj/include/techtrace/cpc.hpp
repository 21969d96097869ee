#pragma once

#include <compare>
#include <string>
#include <string_view>

namespace techtrace {

// Levels of the Cooperative Patent Classification hierarchy.
enum class CpcLevel { Section, Class, Subclass, Group };

CpcLevel parse_cpc_level(std::string_view text);
std::string to_string(CpcLevel level);

// One CPC code, possibly partial. Canonical forms:
//   section  "H"
//   class    "H04"
//   subclass "H04W"
//   group    "H04W72"   (main group; a "/subgroup" suffix is accepted on input and dropped)
class CpcCode {
 public:
  CpcCode() = default;

  static CpcCode parse(std::string_view text);

  char section() const { return section_; }
  // Two-digit class, empty when the code is section-level.
  const std::string& class_digits() const { return class_; }
  // '\0' when absent.
  char subclass() const { return subclass_; }
  const std::string& group() const { return group_; }

  CpcLevel level() const;
  bool has_level(CpcLevel level) const;
  // Prefix truncation. Throws ArgumentError if the code is coarser than level.
  CpcCode truncate(CpcLevel level) const;

  std::string to_string() const;

  friend bool operator==(const CpcCode& a, const CpcCode& b) = default;
  // Ordering is lexicographic over canonical strings.
  friend std::strong_ordering operator<=>(const CpcCode& a, const CpcCode& b) {
    return a.to_string() <=> b.to_string();
  }

 private:
  char section_ = 0;
  std::string class_;
  char subclass_ = 0;
  std::string group_;
};

inline CpcCode parse_cpc(std::string_view text) { return CpcCode::parse(text); }

bool is_cpc_section(char c);

// The nine CPC sections in canonical order.
inline constexpr std::string_view kCpcSections = "ABCDEFGHY";

}  // namespace techtrace
