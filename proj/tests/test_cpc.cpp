#include "doctest.h"
#include "techtrace/cpc.hpp"
#include "techtrace/error.hpp"

using namespace techtrace;

TEST_CASE("codes parse at every level and print canonically") {
  CHECK(parse_cpc("H").level() == CpcLevel::Section);
  CHECK(parse_cpc("H04").level() == CpcLevel::Class);
  CHECK(parse_cpc("H04W").level() == CpcLevel::Subclass);
  CHECK(parse_cpc("H04W72").level() == CpcLevel::Group);

  const CpcCode c = parse_cpc("  h04w 72/04 ");
  CHECK(c.section() == 'H');
  CHECK(c.class_digits() == "04");
  CHECK(c.subclass() == 'W');
  CHECK(c.group() == "72");
  CHECK(c.to_string() == "H04W72");
  CHECK(parse_cpc("Y02E10/50").to_string() == "Y02E10");
}

TEST_CASE("malformed codes name the offending field") {
  auto field_of = [](const char* text) {
    try {
      parse_cpc(text);
    } catch (const ParseError& e) {
      return e.field();
    }
    return std::string("none");
  };
  CHECK(field_of("") == "section");
  CHECK(field_of("Z01B") == "section");
  CHECK(field_of("H4") == "class");
  CHECK(field_of("H0X") == "class");
  CHECK(field_of("H041") == "subclass");
  CHECK(field_of("H04W/12") == "group");
  CHECK(field_of("H04W12345") == "group");
  CHECK(field_of("H04W12-3") == "group");
  CHECK(field_of("H04W12/x") == "group");
}

TEST_CASE("truncation keeps prefixes and refuses to refine") {
  const CpcCode g = parse_cpc("G06F16/30");
  CHECK(g.truncate(CpcLevel::Section).to_string() == "G");
  CHECK(g.truncate(CpcLevel::Class).to_string() == "G06");
  CHECK(g.truncate(CpcLevel::Subclass).to_string() == "G06F");
  CHECK(g.truncate(CpcLevel::Group) == g);
  CHECK(g.has_level(CpcLevel::Subclass));
  CHECK_FALSE(parse_cpc("G06").has_level(CpcLevel::Subclass));
  CHECK_THROWS_AS(parse_cpc("G06").truncate(CpcLevel::Subclass), ArgumentError);
}

TEST_CASE("ordering is lexicographic over canonical strings") {
  CHECK(parse_cpc("A01B") < parse_cpc("A01C"));
  CHECK(parse_cpc("A01") < parse_cpc("A01B"));
  CHECK(parse_cpc("G06F16") < parse_cpc("G06F3"));
  CHECK(parse_cpc("H04W72/1") == parse_cpc("H04W72/99"));
}

TEST_CASE("levels round-trip through their names") {
  for (auto level : {CpcLevel::Section, CpcLevel::Class, CpcLevel::Subclass, CpcLevel::Group}) {
    CHECK(parse_cpc_level(to_string(level)) == level);
  }
  CHECK_THROWS_AS(parse_cpc_level("subgroup"), ParseError);
  CHECK(is_cpc_section('Y'));
  CHECK_FALSE(is_cpc_section('I'));
}
