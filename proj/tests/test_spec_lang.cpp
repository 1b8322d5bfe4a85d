#include "doctest.h"

#include <vector>

#include "lcmdp/spec_lang.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace lcmdp::spec_lang;

namespace {

const std::vector<std::string> kAp4 = {"A", "B", "C", "D"};

// All words of length <= max_len over the given letters, shortest first.
std::vector<std::vector<Letter>> all_words(const std::vector<Letter>& letters, int max_len) {
  std::vector<std::vector<Letter>> out = {{}};
  std::size_t level_start = 0;
  for (int len = 1; len <= max_len; ++len) {
    std::size_t level_end = out.size();
    for (std::size_t i = level_start; i < level_end; ++i)
      for (Letter l : letters) {
        auto w = out[i];
        w.push_back(l);
        out.push_back(std::move(w));
      }
    level_start = level_end;
  }
  return out;
}

const std::vector<Letter> kOneHot4 = {1, 2, 4, 8};

bool dfa_accepts(const Dfa& dfa, const std::vector<Letter>& word) {
  return dfa.is_accepting(dfa.run(word));
}

}  // namespace

TEST_SUITE("spec_lang") {

TEST_CASE("parse_scltl grammar and precedence") {
  std::vector<std::string> ap = {"a", "b", "d"};
  CHECK(formula_key(parse_scltl("F d", ap)) == formula_key(f_eventually(f_atom(2))));
  CHECK(formula_key(parse_scltl("(a | b) U d", ap)) ==
        formula_key(f_until(f_or({f_atom(0), f_atom(1)}), f_atom(2))));
  // U binds tighter than & and |, and is right-associative.
  CHECK(formula_key(parse_scltl("a | b U d", ap)) ==
        formula_key(f_or({f_atom(0), f_until(f_atom(1), f_atom(2))})));
  CHECK(formula_key(parse_scltl("a U b U d", ap)) ==
        formula_key(f_until(f_atom(0), f_until(f_atom(1), f_atom(2)))));
  CHECK(formula_key(parse_scltl("X a & b", ap)) ==
        formula_key(f_and({f_next(f_atom(0)), f_atom(1)})));
  CHECK(formula_key(parse_scltl("!a", ap)) == formula_key(f_neg_atom(0)));
}

TEST_CASE("negating a compound formula is rejected as not co-safe") {
  std::vector<std::string> ap = {"d"};
  CHECK_THROWS_WITH_AS((void)parse_scltl("!(F d)", ap), doctest::Contains("not co-safe"),
                       ParseError);
  CHECK_THROWS_AS((void)parse_scltl("F (d", ap), ParseError);
  CHECK_THROWS_WITH_AS((void)parse_scltl("F q", ap), doctest::Contains("unknown"), ParseError);
}

TEST_CASE("parse_regex shapes") {
  auto r = parse_regex("(A+B+C)*D(D+C)*", kAp4);
  auto expected = r_concat(
      {r_star(r_union({r_guard(f_atom(0)), r_guard(f_atom(1)), r_guard(f_atom(2))})),
       r_guard(f_atom(3)),
       r_star(r_union({r_guard(f_atom(3)), r_guard(f_atom(2))}))});
  CHECK(regex_key(r) == regex_key(expected));

  CHECK(regex_key(parse_regex("A", kAp4)) == regex_key(r_guard(f_atom(0))));
  CHECK(nullable(parse_regex("A*", kAp4)));
  CHECK(!nullable(parse_regex("A", kAp4)));
  CHECK_THROWS_AS((void)parse_regex("A+", kAp4), ParseError);
  CHECK_THROWS_AS((void)parse_regex("", kAp4), ParseError);
  CHECK_THROWS_WITH_AS((void)parse_regex("A+Q", kAp4), doctest::Contains("unknown"),
                       ParseError);
}

TEST_CASE("regex_to_dfa: experiment formula has 3 live states plus a dead state") {
  Dfa dfa = minimize(regex_to_dfa(parse_regex("(A+B+C)*D(D+C)*", kAp4), kAp4));
  CHECK(dfa.num_states() == 4);
  REQUIRE(dfa.dead.has_value());
  int live = 0;
  for (int q = 0; q < dfa.num_states(); ++q)
    if (q != *dfa.dead) ++live;
  CHECK(live == 3);
}

TEST_CASE("regex_to_dfa: single guard gives init, accept and dead") {
  Dfa dfa = minimize(regex_to_dfa(parse_regex("A", kAp4), kAp4));
  CHECK(dfa.num_states() == 3);
  CHECK(dfa.dead.has_value());
}

TEST_CASE("empty regex compiles to a single dead initial state") {
  Dfa dfa = regex_to_dfa(r_empty(), kAp4);
  CHECK(dfa.num_states() == 1);
  CHECK(dfa.initial == 0);
  CHECK(!dfa.is_accepting(0));
  REQUIRE(dfa.dead.has_value());
  CHECK(*dfa.dead == 0);
}

TEST_CASE("regex DFA agrees with the recursive matcher on bounded words") {
  auto words = all_words(kOneHot4, 5);
  for (const char* text : {"(A+B+C)*D(D+C)*", "A", "A*", "AB", "(A+B)(A+B)*", "A*B*C*"}) {
    auto r = parse_regex(text, kAp4);
    Dfa dfa = minimize(regex_to_dfa(r, kAp4));
    for (const auto& w : words) {
      CAPTURE(text);
      CAPTURE(w.size());
      REQUIRE(dfa_accepts(dfa, w) == oracles::regex_matches(r, w));
    }
  }
}

TEST_CASE("scltl_to_dfa: F d") {
  std::vector<std::string> ap = {"d"};
  Dfa dfa = scltl_to_dfa(parse_scltl("F d", ap), ap);
  CHECK(dfa.num_states() == 2);  // pending, true
  CHECK(!dfa.is_accepting(dfa.initial));
  int on_d = dfa.step(dfa.initial, 1);
  CHECK(dfa.is_accepting(on_d));
  CHECK(dfa.step(dfa.initial, 0) == dfa.initial);
  CHECK(dfa.step(on_d, 0) == on_d);  // satisfaction is permanent
}

TEST_CASE("scltl_to_dfa: X d steps through the obligation") {
  std::vector<std::string> ap = {"d"};
  Dfa dfa = scltl_to_dfa(parse_scltl("X d", ap), ap);
  int mid0 = dfa.step(dfa.initial, 0);
  int mid1 = dfa.step(dfa.initial, 1);
  CHECK(mid0 == mid1);  // any first letter leads to the residual d
  CHECK(!dfa.is_accepting(mid0));
  CHECK(dfa.is_accepting(dfa.step(mid0, 1)));
  CHECK(!dfa.is_accepting(dfa.step(mid0, 0)));
}

TEST_CASE("scltl_to_dfa: (a|b) U d has pending, accept and dead states") {
  std::vector<std::string> ap = {"a", "b", "d"};
  Dfa dfa = minimize(scltl_to_dfa(parse_scltl("(a | b) U d", ap), ap));
  CHECK(dfa.num_states() == 3);
  CHECK(dfa.dead.has_value());
}

TEST_CASE("scltl DFAs agree with the residual-evaluation oracle") {
  auto words = all_words(kOneHot4, 5);
  const char* formulas[] = {"F D",        "F (A & B)",      "A U D",  "(A | B) U D",
                            "X X D",      "F A & F D",      "X (A U D)",
                            "A U (B U D)", "F (A | C) & F D", "!A U D"};
  for (const char* text : formulas) {
    auto f = parse_scltl(text, kAp4);
    Dfa dfa = minimize(scltl_to_dfa(f, kAp4));
    for (const auto& w : words) {
      CAPTURE(text);
      REQUIRE(dfa_accepts(dfa, w) == oracles::scltl_good_prefix(f, w));
    }
  }
}

TEST_CASE("minimize never grows and preserves language on random DFAs") {
  auto words = all_words({0, 1, 2, 3}, 6);
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    Dfa dfa = testgen::random_dfa(seed, 2, 30);
    Dfa small = minimize(dfa);
    CHECK(small.num_states() <= dfa.num_states());
    for (const auto& w : words) {
      CAPTURE(seed);
      REQUIRE(dfa_accepts(small, w) == dfa_accepts(dfa, w));
    }
  }
}

TEST_CASE("minimize merges equivalent accepting sinks") {
  // Two accepting sinks reached on different letters; they must merge.
  Dfa dfa;
  dfa.ap = {"a"};
  dfa.initial = 0;
  dfa.accepting = {0, 1, 1};
  dfa.delta = {{1, 2}, {1, 1}, {2, 2}};
  Dfa small = minimize(dfa);
  CHECK(small.num_states() == 2);

  Dfa already;
  already.ap = {"a"};
  already.initial = 0;
  already.accepting = {0, 1};
  already.delta = {{0, 1}, {1, 1}};
  CHECK(minimize(already).num_states() == 2);
}

TEST_CASE("transition tables stay total through every transform") {
  Dfa dfa = regex_to_dfa(parse_regex("(A+B+C)*D(D+C)*", kAp4), kAp4);
  for (const Dfa& d : {dfa, minimize(dfa), make_accepting_absorbing(minimize(dfa))}) {
    REQUIRE(static_cast<int>(d.delta.size()) == d.num_states());
    for (const auto& row : d.delta) {
      REQUIRE(static_cast<int>(row.size()) == d.num_letters());
      for (int t : row) REQUIRE((t >= 0 && t < d.num_states()));
    }
  }
}

TEST_CASE("make_accepting_absorbing") {
  std::vector<std::string> ap = {"d"};
  Dfa fd = minimize(scltl_to_dfa(parse_scltl("F d", ap), ap));
  CHECK(make_accepting_absorbing(fd) == fd);  // accepting state already sinks

  // Exact-match "A": after the transform any word starting with one A-letter
  // is accepted.
  Dfa exact_a = minimize(regex_to_dfa(parse_regex("A", kAp4), kAp4));
  Dfa prefix_a = make_accepting_absorbing(exact_a);
  std::vector<Letter> a_then_b = {1, 2};
  CHECK(!dfa_accepts(exact_a, a_then_b));
  CHECK(dfa_accepts(prefix_a, a_then_b));

  // The experiment DFA: accepting states lose their A/B edges into the dead
  // state and keep everything else.
  Dfa paper = minimize(regex_to_dfa(parse_regex("(A+B+C)*D(D+C)*", kAp4), kAp4));
  Dfa absorbed = make_accepting_absorbing(paper);
  for (int q = 0; q < paper.num_states(); ++q)
    for (int l = 0; l < paper.num_letters(); ++l) {
      if (paper.is_accepting(q))
        CHECK(absorbed.step(q, static_cast<Letter>(l)) == q);
      else
        CHECK(absorbed.step(q, static_cast<Letter>(l)) ==
              paper.step(q, static_cast<Letter>(l)));
    }
}

TEST_CASE("state cap aborts construction") {
  // (A+B)^16-ish obligations blow past a tiny cap.
  CHECK_THROWS_AS((void)regex_to_dfa(parse_regex("ABABABAB", kAp4), kAp4, 3),
                  ConstructionError);
}

TEST_CASE("dot export mentions every state") {
  Dfa dfa = minimize(regex_to_dfa(parse_regex("(A+B+C)*D(D+C)*", kAp4), kAp4));
  std::string dot = to_dot(dfa);
  CHECK(dot.find("digraph") != std::string::npos);
  for (int q = 0; q < dfa.num_states(); ++q)
    CHECK(dot.find("q" + std::to_string(q)) != std::string::npos);
}

TEST_CASE("dfa json round trip") {
  Dfa dfa = minimize(regex_to_dfa(parse_regex("(A+B+C)*D(D+C)*", kAp4), kAp4));
  Dfa back = dfa_from_json(dfa_to_json(dfa));
  CHECK(back == dfa);
}

TEST_CASE("compile_spec applies semantics") {
  Dfa exact = compile_spec("A", SpecKind::Regex, kAp4, Semantics::Exact);
  Dfa prefix = compile_spec("A", SpecKind::Regex, kAp4, Semantics::Prefix);
  std::vector<Letter> w = {1, 2, 2};
  CHECK(!dfa_accepts(exact, w));
  CHECK(dfa_accepts(prefix, w));
}

}  // TEST_SUITE
