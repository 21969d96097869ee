#include "techtrace/cpc.hpp"

#include <cctype>

#include "techtrace/error.hpp"

namespace techtrace {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }

std::string quoted(std::string_view s) { return "'" + std::string(s) + "'"; }

}  // namespace

bool is_cpc_section(char c) { return kCpcSections.find(c) != std::string_view::npos; }

CpcLevel parse_cpc_level(std::string_view text) {
  if (text == "section") return CpcLevel::Section;
  if (text == "class") return CpcLevel::Class;
  if (text == "subclass") return CpcLevel::Subclass;
  if (text == "group") return CpcLevel::Group;
  throw ParseError("level", "unknown CPC level " + quoted(text) +
                                " (expected section, class, subclass or group)");
}

std::string to_string(CpcLevel level) {
  switch (level) {
    case CpcLevel::Section:
      return "section";
    case CpcLevel::Class:
      return "class";
    case CpcLevel::Subclass:
      return "subclass";
    case CpcLevel::Group:
      return "group";
  }
  return "?";
}

CpcCode CpcCode::parse(std::string_view text) {
  // Trim surrounding whitespace.
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  const std::string original(text);

  if (text.empty()) throw ParseError("section", "empty CPC code");

  CpcCode code;
  const char section = static_cast<char>(std::toupper(static_cast<unsigned char>(text[0])));
  if (!is_cpc_section(section)) {
    throw ParseError("section", "invalid CPC code " + quoted(original) + ": section " +
                                    quoted(text.substr(0, 1)) + " is not one of A-H, Y");
  }
  code.section_ = section;
  text.remove_prefix(1);
  if (text.empty()) return code;

  if (text.size() < 2 || !is_digit(text[0]) || !is_digit(text[1])) {
    throw ParseError("class", "invalid CPC code " + quoted(original) +
                                  ": class must be two digits");
  }
  code.class_ = std::string(text.substr(0, 2));
  text.remove_prefix(2);
  if (text.empty()) return code;

  const char subclass = static_cast<char>(std::toupper(static_cast<unsigned char>(text[0])));
  if (!is_upper(subclass)) {
    throw ParseError("subclass", "invalid CPC code " + quoted(original) +
                                     ": subclass must be a letter");
  }
  code.subclass_ = subclass;
  text.remove_prefix(1);
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  if (text.empty()) return code;

  std::size_t n = 0;
  while (n < text.size() && is_digit(text[n])) ++n;
  if (n == 0 || n > 4) {
    throw ParseError("group", "invalid CPC code " + quoted(original) +
                                  ": main group must be 1-4 digits");
  }
  code.group_ = std::string(text.substr(0, n));
  text.remove_prefix(n);
  if (text.empty()) return code;

  // Optional "/subgroup"; it sits below the modelled hierarchy and is dropped.
  if (text.front() != '/' || text.size() < 2) {
    throw ParseError("group", "invalid CPC code " + quoted(original) +
                                  ": unexpected trailing characters");
  }
  text.remove_prefix(1);
  for (char c : text) {
    if (!is_digit(c)) {
      throw ParseError("group", "invalid CPC code " + quoted(original) +
                                    ": subgroup must be digits");
    }
  }
  return code;
}

CpcLevel CpcCode::level() const {
  if (!group_.empty()) return CpcLevel::Group;
  if (subclass_ != 0) return CpcLevel::Subclass;
  if (!class_.empty()) return CpcLevel::Class;
  return CpcLevel::Section;
}

bool CpcCode::has_level(CpcLevel level) const {
  return static_cast<int>(this->level()) >= static_cast<int>(level);
}

CpcCode CpcCode::truncate(CpcLevel level) const {
  if (!has_level(level)) {
    throw ArgumentError("CPC code " + to_string() + " is coarser than level " +
                        techtrace::to_string(level));
  }
  CpcCode out;
  out.section_ = section_;
  if (level == CpcLevel::Section) return out;
  out.class_ = class_;
  if (level == CpcLevel::Class) return out;
  out.subclass_ = subclass_;
  if (level == CpcLevel::Subclass) return out;
  out.group_ = group_;
  return out;
}

std::string CpcCode::to_string() const {
  std::string s(1, section_);
  s += class_;
  if (subclass_ != 0) s += subclass_;
  s += group_;
  return s;
}

}  // namespace techtrace
