#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace lcmdp::spec_lang {

// A letter of the DFA alphabet: a bitmask over the atomic-proposition set,
// i.e. one element of 2^AP.
using Letter = std::uint32_t;

struct ParseError : std::runtime_error {
  int position;
  ParseError(std::string msg, int pos) : std::runtime_error(std::move(msg)), position(pos) {}
};

struct ConstructionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Formulas. Negation appears only directly on atoms, which keeps the fragment
// syntactically co-safe. And/Or keep their operands flattened, sorted and
// deduplicated, with constants folded and absorption applied, so equal
// residuals share one canonical form.

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
  enum class Op { True, False, Atom, NegAtom, And, Or, Next, Eventually, Until };
  Op op;
  int atom = -1;                  // Atom / NegAtom
  std::vector<FormulaPtr> kids;   // And/Or: >=2, Next/Eventually: 1, Until: 2
};

FormulaPtr f_true();
FormulaPtr f_false();
FormulaPtr f_atom(int ap);
FormulaPtr f_neg_atom(int ap);
FormulaPtr f_and(std::vector<FormulaPtr> kids);
FormulaPtr f_or(std::vector<FormulaPtr> kids);
FormulaPtr f_next(FormulaPtr f);
FormulaPtr f_eventually(FormulaPtr f);
FormulaPtr f_until(FormulaPtr lhs, FormulaPtr rhs);

// Canonical key; equal keys mean structurally identical canonical formulas.
std::string formula_key(const FormulaPtr& f);
std::string formula_text(const FormulaPtr& f, const std::vector<std::string>& ap);

// Evaluates a propositional formula (True/False/Atom/NegAtom/And/Or only)
// under a letter.
bool eval_prop(const FormulaPtr& f, Letter letter);

// One derivative step: the residual obligation after reading `letter`.
FormulaPtr formula_derivative(const FormulaPtr& f, Letter letter);

// Grammar: phi ::= true | false | p | !p | (phi) | phi & phi | phi "|" phi
//                | X phi | F phi | phi U phi
// with precedence !, X/F, U, &, | and right-associative U. Negating a
// compound formula is rejected as not co-safe.
FormulaPtr parse_scltl(std::string_view text, const std::vector<std::string>& ap);

// ---------------------------------------------------------------------------
// Label regular expressions over guards. A guard is a propositional formula;
// a letter matches Guard(g) iff g evaluates true under it. `+` is union,
// juxtaposition is concatenation, `*` is star.

struct Regex;
using RegexPtr = std::shared_ptr<const Regex>;

struct Regex {
  enum class Op { Empty, Epsilon, Guard, Concat, Union, Star };
  Op op;
  FormulaPtr guard;            // Guard only
  std::vector<RegexPtr> kids;  // Concat: ordered, Union: canonical set, Star: 1
};

RegexPtr r_empty();
RegexPtr r_epsilon();
RegexPtr r_guard(FormulaPtr prop);
RegexPtr r_concat(std::vector<RegexPtr> kids);
RegexPtr r_union(std::vector<RegexPtr> kids);
RegexPtr r_star(RegexPtr r);

std::string regex_key(const RegexPtr& r);
std::string regex_text(const RegexPtr& r, const std::vector<std::string>& ap);

bool nullable(const RegexPtr& r);
RegexPtr regex_derivative(const RegexPtr& r, Letter letter);

RegexPtr parse_regex(std::string_view text, const std::vector<std::string>& ap);

// ---------------------------------------------------------------------------
// Deterministic finite automaton over the alphabet 2^AP with a total
// transition table.

struct Dfa {
  std::vector<std::string> ap;
  int initial = 0;
  std::vector<char> accepting;           // flag per state
  std::optional<int> dead;               // self-looping non-accepting state
  std::vector<std::vector<int>> delta;   // [state][letter]

  int num_states() const { return static_cast<int>(delta.size()); }
  int num_letters() const { return 1 << static_cast<int>(ap.size()); }
  bool is_accepting(int q) const { return accepting[static_cast<std::size_t>(q)] != 0; }
  int step(int q, Letter letter) const {
    return delta[static_cast<std::size_t>(q)][letter];
  }
  // State after reading a whole word from the initial state.
  int run(const std::vector<Letter>& word) const {
    int q = initial;
    for (Letter l : word) q = step(q, l);
    return q;
  }
  friend bool operator==(const Dfa&, const Dfa&) = default;
};

inline constexpr int kDefaultStateCap = 10000;

Dfa regex_to_dfa(const RegexPtr& r, const std::vector<std::string>& ap,
                 int max_states = kDefaultStateCap);
Dfa scltl_to_dfa(const FormulaPtr& f, const std::vector<std::string>& ap,
                 int max_states = kDefaultStateCap);

// Language-preserving minimization by partition refinement; unreachable
// states are dropped first. Never increases the state count.
Dfa minimize(const Dfa& dfa);

// Replaces every accepting state's outgoing edges with self-loops, giving
// the co-safe prefix reading: once a good prefix is seen, satisfaction is
// permanent.
Dfa make_accepting_absorbing(const Dfa& dfa);

std::string to_dot(const Dfa& dfa);
nlohmann::json dfa_to_json(const Dfa& dfa);
Dfa dfa_from_json(const nlohmann::json& j);

enum class SpecKind { Scltl, Regex, DfaFile };
enum class Semantics { Prefix, Exact };

// Parse + compile + minimize, applying the prefix transform when asked.
Dfa compile_spec(std::string_view text, SpecKind kind, const std::vector<std::string>& ap,
                 Semantics semantics, int max_states = kDefaultStateCap);

}  // namespace lcmdp::spec_lang
