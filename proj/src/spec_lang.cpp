#include "lcmdp/spec_lang.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <map>
#include <queue>
#include <set>
#include <unordered_map>

#include "lcmdp/util.hpp"

namespace lcmdp::spec_lang {

using nlohmann::json;

namespace {

FormulaPtr make_formula(Formula::Op op, int atom, std::vector<FormulaPtr> kids) {
  return std::make_shared<const Formula>(Formula{op, atom, std::move(kids)});
}

// Flatten nested And/And or Or/Or one level; kids are already canonical, so
// one level is enough.
void flatten(Formula::Op op, std::vector<FormulaPtr>& kids) {
  std::vector<FormulaPtr> out;
  for (auto& k : kids) {
    if (k->op == op)
      out.insert(out.end(), k->kids.begin(), k->kids.end());
    else
      out.push_back(std::move(k));
  }
  kids = std::move(out);
}

void sort_dedupe(std::vector<FormulaPtr>& kids) {
  std::sort(kids.begin(), kids.end(), [](const FormulaPtr& a, const FormulaPtr& b) {
    return formula_key(a) < formula_key(b);
  });
  kids.erase(std::unique(kids.begin(), kids.end(),
                         [](const FormulaPtr& a, const FormulaPtr& b) {
                           return formula_key(a) == formula_key(b);
                         }),
             kids.end());
}

// Absorption: inside an Or, drop any And operand that contains another
// operand; dually inside an And for Or operands.
void absorb(Formula::Op inner, std::vector<FormulaPtr>& kids) {
  std::set<std::string> keys;
  for (const auto& k : kids) keys.insert(formula_key(k));
  std::vector<FormulaPtr> out;
  for (const auto& k : kids) {
    bool drop = false;
    if (k->op == inner) {
      for (const auto& sub : k->kids) {
        const std::string sk = formula_key(sub);
        if (sk != formula_key(k) && keys.count(sk)) {
          drop = true;
          break;
        }
      }
    }
    if (!drop) out.push_back(k);
  }
  kids = std::move(out);
}

}  // namespace

FormulaPtr f_true() {
  static FormulaPtr node = make_formula(Formula::Op::True, -1, {});
  return node;
}

FormulaPtr f_false() {
  static FormulaPtr node = make_formula(Formula::Op::False, -1, {});
  return node;
}

FormulaPtr f_atom(int ap) { return make_formula(Formula::Op::Atom, ap, {}); }
FormulaPtr f_neg_atom(int ap) { return make_formula(Formula::Op::NegAtom, ap, {}); }

FormulaPtr f_and(std::vector<FormulaPtr> kids) {
  flatten(Formula::Op::And, kids);
  std::vector<FormulaPtr> live;
  for (auto& k : kids) {
    if (k->op == Formula::Op::False) return f_false();
    if (k->op != Formula::Op::True) live.push_back(std::move(k));
  }
  sort_dedupe(live);
  absorb(Formula::Op::Or, live);
  if (live.empty()) return f_true();
  if (live.size() == 1) return live[0];
  return make_formula(Formula::Op::And, -1, std::move(live));
}

FormulaPtr f_or(std::vector<FormulaPtr> kids) {
  flatten(Formula::Op::Or, kids);
  std::vector<FormulaPtr> live;
  for (auto& k : kids) {
    if (k->op == Formula::Op::True) return f_true();
    if (k->op != Formula::Op::False) live.push_back(std::move(k));
  }
  sort_dedupe(live);
  absorb(Formula::Op::And, live);
  if (live.empty()) return f_false();
  if (live.size() == 1) return live[0];
  return make_formula(Formula::Op::Or, -1, std::move(live));
}

FormulaPtr f_next(FormulaPtr f) { return make_formula(Formula::Op::Next, -1, {std::move(f)}); }

FormulaPtr f_eventually(FormulaPtr f) {
  if (f->op == Formula::Op::True) return f_true();
  if (f->op == Formula::Op::False) return f_false();
  return make_formula(Formula::Op::Eventually, -1, {std::move(f)});
}

FormulaPtr f_until(FormulaPtr lhs, FormulaPtr rhs) {
  if (rhs->op == Formula::Op::True) return f_true();
  if (rhs->op == Formula::Op::False) return f_false();
  return make_formula(Formula::Op::Until, -1, {std::move(lhs), std::move(rhs)});
}

std::string formula_key(const FormulaPtr& f) {
  switch (f->op) {
    case Formula::Op::True: return "tt";
    case Formula::Op::False: return "ff";
    case Formula::Op::Atom: return "a" + std::to_string(f->atom);
    case Formula::Op::NegAtom: return "n" + std::to_string(f->atom);
    case Formula::Op::Next: return "X(" + formula_key(f->kids[0]) + ")";
    case Formula::Op::Eventually: return "E(" + formula_key(f->kids[0]) + ")";
    case Formula::Op::Until:
      return "U(" + formula_key(f->kids[0]) + "," + formula_key(f->kids[1]) + ")";
    case Formula::Op::And:
    case Formula::Op::Or: {
      std::string out = f->op == Formula::Op::And ? "&(" : "|(";
      for (std::size_t i = 0; i < f->kids.size(); ++i) {
        if (i) out += ",";
        out += formula_key(f->kids[i]);
      }
      return out + ")";
    }
  }
  return "?";
}

std::string formula_text(const FormulaPtr& f, const std::vector<std::string>& ap) {
  auto name = [&](int i) {
    return i >= 0 && i < static_cast<int>(ap.size()) ? ap[static_cast<std::size_t>(i)]
                                                     : "p" + std::to_string(i);
  };
  switch (f->op) {
    case Formula::Op::True: return "true";
    case Formula::Op::False: return "false";
    case Formula::Op::Atom: return name(f->atom);
    case Formula::Op::NegAtom: return "!" + name(f->atom);
    case Formula::Op::Next: return "X " + formula_text(f->kids[0], ap);
    case Formula::Op::Eventually: return "F " + formula_text(f->kids[0], ap);
    case Formula::Op::Until:
      return "(" + formula_text(f->kids[0], ap) + " U " + formula_text(f->kids[1], ap) + ")";
    case Formula::Op::And:
    case Formula::Op::Or: {
      const char* sep = f->op == Formula::Op::And ? " & " : " | ";
      std::string out = "(";
      for (std::size_t i = 0; i < f->kids.size(); ++i) {
        if (i) out += sep;
        out += formula_text(f->kids[i], ap);
      }
      return out + ")";
    }
  }
  return "?";
}

bool eval_prop(const FormulaPtr& f, Letter letter) {
  switch (f->op) {
    case Formula::Op::True: return true;
    case Formula::Op::False: return false;
    case Formula::Op::Atom: return (letter >> f->atom) & 1u;
    case Formula::Op::NegAtom: return !((letter >> f->atom) & 1u);
    case Formula::Op::And:
      for (const auto& k : f->kids)
        if (!eval_prop(k, letter)) return false;
      return true;
    case Formula::Op::Or:
      for (const auto& k : f->kids)
        if (eval_prop(k, letter)) return true;
      return false;
    default:
      throw std::logic_error("eval_prop: formula contains a temporal operator");
  }
}

FormulaPtr formula_derivative(const FormulaPtr& f, Letter letter) {
  switch (f->op) {
    case Formula::Op::True: return f_true();
    case Formula::Op::False: return f_false();
    case Formula::Op::Atom: return eval_prop(f, letter) ? f_true() : f_false();
    case Formula::Op::NegAtom: return eval_prop(f, letter) ? f_true() : f_false();
    case Formula::Op::And: {
      std::vector<FormulaPtr> kids;
      for (const auto& k : f->kids) kids.push_back(formula_derivative(k, letter));
      return f_and(std::move(kids));
    }
    case Formula::Op::Or: {
      std::vector<FormulaPtr> kids;
      for (const auto& k : f->kids) kids.push_back(formula_derivative(k, letter));
      return f_or(std::move(kids));
    }
    case Formula::Op::Next: return f->kids[0];
    case Formula::Op::Eventually:
      return f_or({formula_derivative(f->kids[0], letter), f});
    case Formula::Op::Until:
      return f_or({formula_derivative(f->kids[1], letter),
                   f_and({formula_derivative(f->kids[0], letter), f})});
  }
  return f_false();
}

// ---------------------------------------------------------------------------
// sc-LTL parser

namespace {

struct Token {
  enum Kind { End, Ident, True, False, And, Or, Not, Next, Eventually, Until, LParen, RParen };
  Kind kind = End;
  std::string ident;
  int pos = 0;
};

struct Lexer {
  std::string_view text;
  std::size_t at = 0;
  Token peeked;
  bool has_peeked = false;

  Token lex() {
    while (at < text.size() && std::isspace(static_cast<unsigned char>(text[at]))) ++at;
    Token t;
    t.pos = static_cast<int>(at);
    if (at >= text.size()) return t;
    char c = text[at];
    switch (c) {
      case '&': ++at; t.kind = Token::And; return t;
      case '|': ++at; t.kind = Token::Or; return t;
      case '!': ++at; t.kind = Token::Not; return t;
      case '(': ++at; t.kind = Token::LParen; return t;
      case ')': ++at; t.kind = Token::RParen; return t;
      default: break;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = at;
      while (at < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[at])) || text[at] == '_'))
        ++at;
      std::string word(text.substr(start, at - start));
      if (word == "X") t.kind = Token::Next;
      else if (word == "F") t.kind = Token::Eventually;
      else if (word == "U") t.kind = Token::Until;
      else if (word == "true") t.kind = Token::True;
      else if (word == "false") t.kind = Token::False;
      else { t.kind = Token::Ident; t.ident = std::move(word); }
      return t;
    }
    throw ParseError(strf("syntax error: unexpected character '%c' at position %d", c, t.pos),
                     t.pos);
  }

  Token peek() {
    if (!has_peeked) { peeked = lex(); has_peeked = true; }
    return peeked;
  }
  Token next() {
    Token t = peek();
    has_peeked = false;
    return t;
  }
};

struct ScltlParser {
  Lexer lex;
  const std::vector<std::string>& ap;

  int atom_index(const Token& t) const {
    for (std::size_t i = 0; i < ap.size(); ++i)
      if (ap[i] == t.ident) return static_cast<int>(i);
    throw ParseError(strf("unknown atomic proposition '%s' at position %d", t.ident.c_str(),
                          t.pos),
                     t.pos);
  }

  FormulaPtr parse_or() {
    FormulaPtr f = parse_and();
    while (lex.peek().kind == Token::Or) {
      lex.next();
      f = f_or({f, parse_and()});
    }
    return f;
  }

  FormulaPtr parse_and() {
    FormulaPtr f = parse_until();
    while (lex.peek().kind == Token::And) {
      lex.next();
      f = f_and({f, parse_until()});
    }
    return f;
  }

  FormulaPtr parse_until() {
    FormulaPtr f = parse_unary();
    if (lex.peek().kind == Token::Until) {
      lex.next();
      f = f_until(f, parse_until());  // right-associative
    }
    return f;
  }

  FormulaPtr parse_unary() {
    Token t = lex.next();
    switch (t.kind) {
      case Token::Next: return f_next(parse_unary());
      case Token::Eventually: return f_eventually(parse_unary());
      case Token::Not: {
        Token a = lex.next();
        if (a.kind != Token::Ident)
          throw ParseError(strf("negation of a compound formula at position %d is not co-safe",
                                t.pos),
                           t.pos);
        return f_neg_atom(atom_index(a));
      }
      case Token::LParen: {
        FormulaPtr f = parse_or();
        Token close = lex.next();
        if (close.kind != Token::RParen)
          throw ParseError(strf("syntax error: expected ')' at position %d", close.pos),
                           close.pos);
        return f;
      }
      case Token::Ident: return f_atom(atom_index(t));
      case Token::True: return f_true();
      case Token::False: return f_false();
      default:
        throw ParseError(strf("syntax error: unexpected token at position %d", t.pos), t.pos);
    }
  }
};

}  // namespace

FormulaPtr parse_scltl(std::string_view text, const std::vector<std::string>& ap) {
  ScltlParser p{Lexer{text, 0, {}, false}, ap};
  FormulaPtr f = p.parse_or();
  Token t = p.lex.next();
  if (t.kind != Token::End)
    throw ParseError(strf("syntax error: trailing input at position %d", t.pos), t.pos);
  return f;
}

// ---------------------------------------------------------------------------
// Regex

namespace {

RegexPtr make_regex(Regex::Op op, FormulaPtr guard, std::vector<RegexPtr> kids) {
  return std::make_shared<const Regex>(Regex{op, std::move(guard), std::move(kids)});
}

}  // namespace

RegexPtr r_empty() {
  static RegexPtr node = make_regex(Regex::Op::Empty, nullptr, {});
  return node;
}

RegexPtr r_epsilon() {
  static RegexPtr node = make_regex(Regex::Op::Epsilon, nullptr, {});
  return node;
}

RegexPtr r_guard(FormulaPtr prop) {
  if (prop->op == Formula::Op::False) return r_empty();
  return make_regex(Regex::Op::Guard, std::move(prop), {});
}

RegexPtr r_concat(std::vector<RegexPtr> kids) {
  std::vector<RegexPtr> flat;
  for (auto& k : kids) {
    if (k->op == Regex::Op::Empty) return r_empty();
    if (k->op == Regex::Op::Epsilon) continue;
    if (k->op == Regex::Op::Concat)
      flat.insert(flat.end(), k->kids.begin(), k->kids.end());
    else
      flat.push_back(std::move(k));
  }
  if (flat.empty()) return r_epsilon();
  if (flat.size() == 1) return flat[0];
  return make_regex(Regex::Op::Concat, nullptr, std::move(flat));
}

RegexPtr r_union(std::vector<RegexPtr> kids) {
  std::vector<RegexPtr> flat;
  for (auto& k : kids) {
    if (k->op == Regex::Op::Empty) continue;
    if (k->op == Regex::Op::Union)
      flat.insert(flat.end(), k->kids.begin(), k->kids.end());
    else
      flat.push_back(std::move(k));
  }
  std::sort(flat.begin(), flat.end(), [](const RegexPtr& a, const RegexPtr& b) {
    return regex_key(a) < regex_key(b);
  });
  flat.erase(std::unique(flat.begin(), flat.end(),
                         [](const RegexPtr& a, const RegexPtr& b) {
                           return regex_key(a) == regex_key(b);
                         }),
             flat.end());
  if (flat.empty()) return r_empty();
  if (flat.size() == 1) return flat[0];
  return make_regex(Regex::Op::Union, nullptr, std::move(flat));
}

RegexPtr r_star(RegexPtr r) {
  if (r->op == Regex::Op::Star) return r;
  if (r->op == Regex::Op::Epsilon || r->op == Regex::Op::Empty) return r_epsilon();
  return make_regex(Regex::Op::Star, nullptr, {std::move(r)});
}

std::string regex_key(const RegexPtr& r) {
  switch (r->op) {
    case Regex::Op::Empty: return "0";
    case Regex::Op::Epsilon: return "1";
    case Regex::Op::Guard: return "g(" + formula_key(r->guard) + ")";
    case Regex::Op::Star: return "s(" + regex_key(r->kids[0]) + ")";
    case Regex::Op::Concat:
    case Regex::Op::Union: {
      std::string out = r->op == Regex::Op::Concat ? "c(" : "u(";
      for (std::size_t i = 0; i < r->kids.size(); ++i) {
        if (i) out += ",";
        out += regex_key(r->kids[i]);
      }
      return out + ")";
    }
  }
  return "?";
}

std::string regex_text(const RegexPtr& r, const std::vector<std::string>& ap) {
  switch (r->op) {
    case Regex::Op::Empty: return "<empty>";
    case Regex::Op::Epsilon: return "<eps>";
    case Regex::Op::Guard:
      if (r->guard->op == Formula::Op::Atom || r->guard->op == Formula::Op::True ||
          r->guard->op == Formula::Op::False)
        return formula_text(r->guard, ap);
      return "[" + formula_text(r->guard, ap) + "]";
    case Regex::Op::Star: {
      std::string inner = regex_text(r->kids[0], ap);
      if (r->kids[0]->op == Regex::Op::Concat) inner = "(" + inner + ")";
      return inner + "*";
    }
    case Regex::Op::Concat: {
      std::string out;
      for (const auto& k : r->kids) out += regex_text(k, ap);
      return out;
    }
    case Regex::Op::Union: {
      std::string out = "(";
      for (std::size_t i = 0; i < r->kids.size(); ++i) {
        if (i) out += "+";
        out += regex_text(r->kids[i], ap);
      }
      return out + ")";
    }
  }
  return "?";
}

bool nullable(const RegexPtr& r) {
  switch (r->op) {
    case Regex::Op::Empty: return false;
    case Regex::Op::Epsilon: return true;
    case Regex::Op::Guard: return false;
    case Regex::Op::Star: return true;
    case Regex::Op::Concat:
      for (const auto& k : r->kids)
        if (!nullable(k)) return false;
      return true;
    case Regex::Op::Union:
      for (const auto& k : r->kids)
        if (nullable(k)) return true;
      return false;
  }
  return false;
}

RegexPtr regex_derivative(const RegexPtr& r, Letter letter) {
  switch (r->op) {
    case Regex::Op::Empty:
    case Regex::Op::Epsilon:
      return r_empty();
    case Regex::Op::Guard:
      return eval_prop(r->guard, letter) ? r_epsilon() : r_empty();
    case Regex::Op::Star:
      return r_concat({regex_derivative(r->kids[0], letter), r});
    case Regex::Op::Union: {
      std::vector<RegexPtr> kids;
      for (const auto& k : r->kids) kids.push_back(regex_derivative(k, letter));
      return r_union(std::move(kids));
    }
    case Regex::Op::Concat: {
      std::vector<RegexPtr> terms;
      for (std::size_t i = 0; i < r->kids.size(); ++i) {
        std::vector<RegexPtr> tail = {regex_derivative(r->kids[i], letter)};
        tail.insert(tail.end(), r->kids.begin() + static_cast<std::ptrdiff_t>(i) + 1,
                    r->kids.end());
        terms.push_back(r_concat(std::move(tail)));
        if (!nullable(r->kids[i])) break;
      }
      return r_union(std::move(terms));
    }
  }
  return r_empty();
}

RegexPtr parse_regex(std::string_view text, const std::vector<std::string>& ap) {
  // Character-level recursive descent: the regex syntax uses '+' and '*',
  // which the formula lexer does not know.
  struct P {
    std::string_view s;
    std::size_t at = 0;
    const std::vector<std::string>& ap;

    void skip() {
      while (at < s.size() && std::isspace(static_cast<unsigned char>(s[at]))) ++at;
    }
    char peek() {
      skip();
      return at < s.size() ? s[at] : '\0';
    }

    int atom_index(const std::string& word, int pos) const {
      for (std::size_t i = 0; i < ap.size(); ++i)
        if (ap[i] == word) return static_cast<int>(i);
      throw ParseError(strf("unknown identifier '%s' at position %d", word.c_str(), pos), pos);
    }

    RegexPtr parse_union() {
      RegexPtr r = parse_concat();
      while (peek() == '+') {
        ++at;
        r = r_union({r, parse_concat()});
      }
      return r;
    }

    RegexPtr parse_concat() {
      RegexPtr r = parse_star();
      for (char c = peek(); c == '(' || std::isalpha(static_cast<unsigned char>(c)) || c == '_';
           c = peek())
        r = r_concat({r, parse_star()});
      return r;
    }

    RegexPtr parse_star() {
      RegexPtr r = parse_base();
      while (peek() == '*') {
        ++at;
        r = r_star(r);
      }
      return r;
    }

    RegexPtr parse_base() {
      char c = peek();
      int pos = static_cast<int>(at);
      if (c == '(') {
        ++at;
        RegexPtr r = parse_union();
        if (peek() != ')')
          throw ParseError(strf("syntax error: expected ')' at position %d",
                                static_cast<int>(at)),
                           static_cast<int>(at));
        ++at;
        return r;
      }
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t start = at;
        while (at < s.size() &&
               (std::isalnum(static_cast<unsigned char>(s[at])) || s[at] == '_'))
          ++at;
        return r_guard(f_atom(atom_index(std::string(s.substr(start, at - start)), pos)));
      }
      throw ParseError(strf("syntax error: unexpected character at position %d", pos), pos);
    }
  };

  P p{text, 0, ap};
  if (p.peek() == '\0') throw ParseError("syntax error: empty regular expression", 0);
  RegexPtr r = p.parse_union();
  if (p.peek() != '\0')
    throw ParseError(strf("syntax error: trailing input at position %d", static_cast<int>(p.at)),
                     static_cast<int>(p.at));
  return r;
}

// ---------------------------------------------------------------------------
// Derivative DFA construction

namespace {

template <class NodePtr, class KeyFn, class DerivFn, class AcceptFn>
Dfa build_derivative_dfa(NodePtr root, const std::vector<std::string>& ap, int max_states,
                         KeyFn key_of, DerivFn deriv, AcceptFn accept,
                         const std::string& dead_key) {
  if (static_cast<int>(ap.size()) > 16)
    throw ConstructionError("alphabet cap exceeded: more than 16 atomic propositions");
  Dfa dfa;
  dfa.ap = ap;
  const int n_letters = 1 << static_cast<int>(ap.size());

  std::unordered_map<std::string, int> ids;
  std::vector<NodePtr> nodes;
  auto intern = [&](NodePtr n) {
    auto [it, inserted] = ids.try_emplace(key_of(n), static_cast<int>(nodes.size()));
    if (inserted) {
      nodes.push_back(std::move(n));
      if (static_cast<int>(nodes.size()) > max_states)
        throw ConstructionError(strf("state-count cap of %d exceeded", max_states));
    }
    return it->second;
  };

  intern(root);
  dfa.initial = 0;
  for (std::size_t q = 0; q < nodes.size(); ++q) {
    NodePtr cur = nodes[q];
    std::vector<int> row(static_cast<std::size_t>(n_letters));
    for (int l = 0; l < n_letters; ++l)
      row[static_cast<std::size_t>(l)] = intern(deriv(cur, static_cast<Letter>(l)));
    dfa.delta.push_back(std::move(row));
  }
  dfa.accepting.resize(nodes.size());
  for (std::size_t q = 0; q < nodes.size(); ++q) dfa.accepting[q] = accept(nodes[q]) ? 1 : 0;
  if (auto it = ids.find(dead_key); it != ids.end()) dfa.dead = it->second;
  return dfa;
}

// The dead state, when present, is the unique non-accepting total self-loop.
void detect_dead(Dfa& dfa) {
  dfa.dead.reset();
  int found = -1;
  for (int q = 0; q < dfa.num_states(); ++q) {
    if (dfa.is_accepting(q)) continue;
    bool loops = true;
    for (int l = 0; l < dfa.num_letters() && loops; ++l)
      if (dfa.step(q, static_cast<Letter>(l)) != q) loops = false;
    if (loops) {
      if (found >= 0) return;  // ambiguous; leave unset
      found = q;
    }
  }
  if (found >= 0) dfa.dead = found;
}

}  // namespace

Dfa regex_to_dfa(const RegexPtr& r, const std::vector<std::string>& ap, int max_states) {
  return build_derivative_dfa<RegexPtr>(
      r, ap, max_states, [](const RegexPtr& n) { return regex_key(n); },
      [](const RegexPtr& n, Letter l) { return regex_derivative(n, l); },
      [](const RegexPtr& n) { return nullable(n); }, regex_key(r_empty()));
}

Dfa scltl_to_dfa(const FormulaPtr& f, const std::vector<std::string>& ap, int max_states) {
  return build_derivative_dfa<FormulaPtr>(
      f, ap, max_states, [](const FormulaPtr& n) { return formula_key(n); },
      [](const FormulaPtr& n, Letter l) { return formula_derivative(n, l); },
      [](const FormulaPtr& n) { return n->op == Formula::Op::True; }, formula_key(f_false()));
}

Dfa minimize(const Dfa& in) {
  const int n = in.num_states();
  const int n_letters = in.num_letters();

  // Drop unreachable states, keeping discovery order.
  std::vector<int> new_id(static_cast<std::size_t>(n), -1);
  std::vector<int> order;
  std::queue<int> open;
  new_id[static_cast<std::size_t>(in.initial)] = 0;
  order.push_back(in.initial);
  open.push(in.initial);
  while (!open.empty()) {
    int q = open.front();
    open.pop();
    for (int l = 0; l < n_letters; ++l) {
      int t = in.step(q, static_cast<Letter>(l));
      if (new_id[static_cast<std::size_t>(t)] < 0) {
        new_id[static_cast<std::size_t>(t)] = static_cast<int>(order.size());
        order.push_back(t);
        open.push(t);
      }
    }
  }
  const int m = static_cast<int>(order.size());
  std::vector<std::vector<int>> delta(static_cast<std::size_t>(m));
  std::vector<char> accepting(static_cast<std::size_t>(m));
  for (int q = 0; q < m; ++q) {
    accepting[static_cast<std::size_t>(q)] = in.accepting[static_cast<std::size_t>(order[q])];
    auto& row = delta[static_cast<std::size_t>(q)];
    row.resize(static_cast<std::size_t>(n_letters));
    for (int l = 0; l < n_letters; ++l)
      row[static_cast<std::size_t>(l)] =
          new_id[static_cast<std::size_t>(in.step(order[static_cast<std::size_t>(q)],
                                                  static_cast<Letter>(l)))];
  }

  // Moore partition refinement; classes are numbered by first occurrence so
  // the result is deterministic.
  std::vector<int> cls(static_cast<std::size_t>(m));
  {
    std::map<int, int> first;
    for (int q = 0; q < m; ++q) {
      int key = accepting[static_cast<std::size_t>(q)] ? 1 : 0;
      cls[static_cast<std::size_t>(q)] =
          first.try_emplace(key, static_cast<int>(first.size())).first->second;
    }
  }
  for (;;) {
    std::map<std::vector<int>, int> sig_ids;
    std::vector<int> next(static_cast<std::size_t>(m));
    for (int q = 0; q < m; ++q) {
      std::vector<int> sig;
      sig.reserve(static_cast<std::size_t>(n_letters) + 1);
      sig.push_back(cls[static_cast<std::size_t>(q)]);
      for (int l = 0; l < n_letters; ++l)
        sig.push_back(cls[static_cast<std::size_t>(delta[static_cast<std::size_t>(q)]
                                                        [static_cast<std::size_t>(l)])]);
      next[static_cast<std::size_t>(q)] =
          sig_ids.try_emplace(std::move(sig), static_cast<int>(sig_ids.size())).first->second;
    }
    bool stable = sig_ids.size() ==
                  static_cast<std::size_t>(1 + *std::max_element(cls.begin(), cls.end()));
    cls = std::move(next);
    if (stable) break;
  }

  // Renumber classes by first occurrence, then quotient.
  std::vector<int> relabel(static_cast<std::size_t>(m), -1);
  int n_cls = 0;
  for (int q = 0; q < m; ++q) {
    int c = cls[static_cast<std::size_t>(q)];
    if (relabel[static_cast<std::size_t>(c)] < 0) relabel[static_cast<std::size_t>(c)] = n_cls++;
    cls[static_cast<std::size_t>(q)] = relabel[static_cast<std::size_t>(c)];
  }

  Dfa out;
  out.ap = in.ap;
  out.initial = cls[static_cast<std::size_t>(0)];
  out.accepting.assign(static_cast<std::size_t>(n_cls), 0);
  out.delta.assign(static_cast<std::size_t>(n_cls),
                   std::vector<int>(static_cast<std::size_t>(n_letters), 0));
  std::vector<char> done(static_cast<std::size_t>(n_cls), 0);
  for (int q = 0; q < m; ++q) {
    int c = cls[static_cast<std::size_t>(q)];
    if (done[static_cast<std::size_t>(c)]) continue;
    done[static_cast<std::size_t>(c)] = 1;
    out.accepting[static_cast<std::size_t>(c)] = accepting[static_cast<std::size_t>(q)];
    for (int l = 0; l < n_letters; ++l)
      out.delta[static_cast<std::size_t>(c)][static_cast<std::size_t>(l)] =
          cls[static_cast<std::size_t>(delta[static_cast<std::size_t>(q)]
                                            [static_cast<std::size_t>(l)])];
  }
  detect_dead(out);
  return out;
}

Dfa make_accepting_absorbing(const Dfa& in) {
  Dfa out = in;
  for (int q = 0; q < out.num_states(); ++q) {
    if (!out.is_accepting(q)) continue;
    for (int l = 0; l < out.num_letters(); ++l)
      out.delta[static_cast<std::size_t>(q)][static_cast<std::size_t>(l)] = q;
  }
  detect_dead(out);
  return out;
}

// ---------------------------------------------------------------------------
// Exports

namespace {

// Greedy cube merging: express a set of letters as a disjunction of
// conjunctions over the propositions, for readable edge labels.
std::string compress_letters(const std::vector<Letter>& letters, int n_ap,
                             const std::vector<std::string>& ap) {
  const int n_letters = 1 << n_ap;
  if (static_cast<int>(letters.size()) == n_letters) return "true";
  if (n_ap > 6) return strf("%zu letters", letters.size());

  struct Cube {
    Letter bits;
    Letter care;
  };
  std::vector<Cube> cur;
  for (Letter l : letters) cur.push_back({l, static_cast<Letter>(n_letters - 1)});
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<char> used(cur.size(), 0);
    std::vector<Cube> next;
    std::set<std::pair<Letter, Letter>> seen;
    for (std::size_t i = 0; i < cur.size(); ++i)
      for (std::size_t j = i + 1; j < cur.size(); ++j) {
        if (cur[i].care != cur[j].care) continue;
        Letter diff = (cur[i].bits ^ cur[j].bits) & cur[i].care;
        if (std::popcount(diff) != 1) continue;
        Letter care = cur[i].care & ~diff;
        if (seen.insert({cur[i].bits & care, care}).second)
          next.push_back({cur[i].bits & care, care});
        used[i] = used[j] = 1;
        changed = true;
      }
    for (std::size_t i = 0; i < cur.size(); ++i)
      if (!used[i] && seen.insert({cur[i].bits & cur[i].care, cur[i].care}).second)
        next.push_back(cur[i]);
    cur = std::move(next);
  }

  std::string out;
  for (std::size_t i = 0; i < cur.size(); ++i) {
    if (i) out += " | ";
    std::string term;
    for (int p = 0; p < n_ap; ++p) {
      if (!((cur[i].care >> p) & 1u)) continue;
      if (!term.empty()) term += " & ";
      if (!((cur[i].bits >> p) & 1u)) term += "!";
      term += ap[static_cast<std::size_t>(p)];
    }
    out += term.empty() ? "true" : term;
  }
  return out.empty() ? "false" : out;
}

}  // namespace

std::string to_dot(const Dfa& dfa) {
  std::string out = "digraph dfa {\n  rankdir=LR;\n  __init [shape=point];\n";
  for (int q = 0; q < dfa.num_states(); ++q) {
    const char* shape = dfa.is_accepting(q) ? "doublecircle" : "circle";
    std::string extra;
    if (dfa.dead && *dfa.dead == q) extra = ", style=dashed";
    out += strf("  q%d [shape=%s%s];\n", q, shape, extra.c_str());
  }
  out += strf("  __init -> q%d;\n", dfa.initial);
  for (int q = 0; q < dfa.num_states(); ++q) {
    std::map<int, std::vector<Letter>> by_target;
    for (int l = 0; l < dfa.num_letters(); ++l)
      by_target[dfa.step(q, static_cast<Letter>(l))].push_back(static_cast<Letter>(l));
    for (const auto& [target, letters] : by_target)
      out += strf("  q%d -> q%d [label=\"%s\"];\n", q, target,
                  compress_letters(letters, static_cast<int>(dfa.ap.size()), dfa.ap).c_str());
  }
  out += "}\n";
  return out;
}

json dfa_to_json(const Dfa& dfa) {
  json j;
  j["ap"] = dfa.ap;
  j["initial"] = dfa.initial;
  json acc = json::array();
  for (int q = 0; q < dfa.num_states(); ++q)
    if (dfa.is_accepting(q)) acc.push_back(q);
  j["accepting"] = std::move(acc);
  j["dead"] = dfa.dead ? json(*dfa.dead) : json(nullptr);
  j["delta"] = dfa.delta;
  return j;
}

Dfa dfa_from_json(const json& j) {
  Dfa dfa;
  try {
    dfa.ap = j.at("ap").get<std::vector<std::string>>();
    dfa.initial = j.at("initial").get<int>();
    dfa.delta = j.at("delta").get<std::vector<std::vector<int>>>();
    dfa.accepting.assign(dfa.delta.size(), 0);
    for (int q : j.at("accepting").get<std::vector<int>>()) {
      if (q < 0 || q >= dfa.num_states())
        throw ConstructionError(strf("accepting state %d is out of range", q));
      dfa.accepting[static_cast<std::size_t>(q)] = 1;
    }
    if (!j.at("dead").is_null()) dfa.dead = j.at("dead").get<int>();
  } catch (const json::exception& e) {
    throw ConstructionError(strf("DFA file malformed: %s", e.what()));
  }
  const int n_letters = dfa.num_letters();
  for (const auto& row : dfa.delta) {
    if (static_cast<int>(row.size()) != n_letters)
      throw ConstructionError("DFA transition table is not total");
    for (int t : row)
      if (t < 0 || t >= dfa.num_states())
        throw ConstructionError(strf("DFA transition targets out-of-range state %d", t));
  }
  if (dfa.initial < 0 || dfa.initial >= dfa.num_states())
    throw ConstructionError("DFA initial state is out of range");
  return dfa;
}

Dfa compile_spec(std::string_view text, SpecKind kind, const std::vector<std::string>& ap,
                 Semantics semantics, int max_states) {
  Dfa dfa;
  switch (kind) {
    case SpecKind::Scltl:
      dfa = scltl_to_dfa(parse_scltl(text, ap), ap, max_states);
      break;
    case SpecKind::Regex:
      dfa = regex_to_dfa(parse_regex(text, ap), ap, max_states);
      break;
    case SpecKind::DfaFile: {
      dfa = dfa_from_json(json::parse(read_file(std::filesystem::path(std::string(text)))));
      if (dfa.ap != ap)
        throw ConstructionError("DFA file alphabet does not match the model's propositions");
      break;
    }
  }
  dfa = minimize(dfa);
  if (semantics == Semantics::Prefix) dfa = minimize(make_accepting_absorbing(dfa));
  return dfa;
}

}  // namespace lcmdp::spec_lang
