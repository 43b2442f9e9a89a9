#include "lcn/parser.hpp"

#include <cmath>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>

namespace lcn {

namespace {

enum class Tok {
  Ident, Number, LessEq, Equal, LParen, RParen, LBrace, RBrace,
  Comma, Colon, Semicolon, Bar, Bang, Amp, Dot, Newline, End, Bad
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  double value = 0;
  int line = 1, col = 1;
};

struct Lexer {
  const std::string& src;
  std::size_t pos = 0;
  int line = 1, col = 1;

  explicit Lexer(const std::string& s) : src(s) {}

  char peek() const { return pos < src.size() ? src[pos] : '\0'; }

  char advance() {
    char c = src[pos++];
    if (c == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    return c;
  }

  Token next() {
    while (pos < src.size()) {
      char c = peek();
      if (c == ' ' || c == '\t' || c == '\r') {
        advance();
      } else if (c == '#') {
        while (pos < src.size() && peek() != '\n') advance();
      } else {
        break;
      }
    }
    Token t;
    t.line = line;
    t.col = col;
    if (pos >= src.size()) {
      t.kind = Tok::End;
      return t;
    }
    char c = advance();
    switch (c) {
      case '\n': t.kind = Tok::Newline; return t;
      case '(': t.kind = Tok::LParen; return t;
      case ')': t.kind = Tok::RParen; return t;
      case '{': t.kind = Tok::LBrace; return t;
      case '}': t.kind = Tok::RBrace; return t;
      case ',': t.kind = Tok::Comma; return t;
      case ':': t.kind = Tok::Colon; return t;
      case ';': t.kind = Tok::Semicolon; return t;
      case '|': t.kind = Tok::Bar; return t;
      case '!': t.kind = Tok::Bang; return t;
      case '&': t.kind = Tok::Amp; return t;
      case '=': t.kind = Tok::Equal; return t;
      case '<':
        if (peek() == '=') {
          advance();
          t.kind = Tok::LessEq;
          return t;
        }
        t.kind = Tok::Bad;
        t.text = "<";
        return t;
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && std::isdigit(static_cast<unsigned char>(peek())))) {
      std::string num(1, c);
      while (std::isdigit(static_cast<unsigned char>(peek()))) num += advance();
      if (c != '.' && peek() == '.') {
        num += advance();
        while (std::isdigit(static_cast<unsigned char>(peek()))) num += advance();
      }
      t.kind = Tok::Number;
      t.text = num;
      t.value = std::strtod(num.c_str(), nullptr);
      return t;
    }
    if (c == '.') {
      t.kind = Tok::Dot;
      return t;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string id(1, c);
      while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '\'')
        id += advance();
      t.kind = Tok::Ident;
      t.text = id;
      return t;
    }
    t.kind = Tok::Bad;
    t.text = std::string(1, c);
    return t;
  }
};

struct Parser {
  std::vector<Token> toks;
  std::size_t at = 0;
  std::vector<Diagnostic>& diags;
  LCNProgram program;

  Parser(const std::string& text, std::vector<Diagnostic>& d) : diags(d) {
    Lexer lx(text);
    for (;;) {
      Token t = lx.next();
      toks.push_back(t);
      if (t.kind == Tok::End) break;
    }
  }

  const Token& cur() const { return toks[at]; }
  const Token& get() { return toks[at < toks.size() - 1 ? at++ : at]; }
  bool is(Tok k) const { return cur().kind == k; }
  bool is_word(const char* w) const { return is(Tok::Ident) && cur().text == w; }

  bool match(Tok k) {
    if (!is(k)) return false;
    get();
    return true;
  }

  bool match_word(const char* w) {
    if (!is_word(w)) return false;
    get();
    return true;
  }

  void error_at(const Token& t, const std::string& msg) {
    diags.push_back({t.line, t.col, msg});
  }

  void skip_line() {
    while (!is(Tok::Newline) && !is(Tok::End)) get();
    match(Tok::Newline);
  }

  Token expect(Tok k, const std::string& what) {
    if (is(k)) return get();
    error_at(cur(), "expected " + what);
    throw parse_abort{};
  }

  struct parse_abort {};

  // ---- formulas -----------------------------------------------------------

  Formula parse_formula() { return parse_iff(); }

  Formula parse_iff() {
    Formula lhs = parse_implies();
    while (is_word("iff")) {
      get();
      Formula rhs = parse_implies();
      lhs = Formula::make_binary(Connective::Iff, std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  Formula parse_implies() {
    Formula lhs = parse_or();
    if (is_word("implies")) {
      get();
      Formula rhs = parse_implies();  // right associative
      return Formula::make_binary(Connective::Implies, std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  Formula parse_or() { return parse_nary(Connective::Or, "or", [this] { return parse_xor(); }); }
  Formula parse_xor() { return parse_nary(Connective::Xor, "xor", [this] { return parse_and(); }); }

  template <typename Sub>
  Formula parse_nary(Connective kind, const char* word, Sub sub) {
    Formula first = sub();
    if (!is_word(word)) return first;
    std::vector<Formula> children;
    children.push_back(std::move(first));
    while (match_word(word)) children.push_back(sub());
    return Formula::make_nary(kind, std::move(children));
  }

  Formula parse_and() {
    Formula first = parse_unary();
    if (!is_word("and") && !is(Tok::Amp)) return first;
    std::vector<Formula> children;
    children.push_back(std::move(first));
    while (match_word("and") || match(Tok::Amp)) children.push_back(parse_unary());
    return Formula::make_nary(Connective::And, std::move(children));
  }

  Formula parse_unary() {
    if (match_word("not") || match(Tok::Bang)) return Formula::make_not(parse_unary());
    return parse_primary();
  }

  Formula parse_primary() {
    if (match(Tok::LParen)) {
      Formula f = parse_formula();
      expect(Tok::RParen, "')'");
      return f;
    }
    if (is_word("forall") || is_word("exists")) {
      bool universal = cur().text == "forall";
      get();
      Formula f;
      f.kind = universal ? Connective::Forall : Connective::Exists;
      f.distinct = match_word("distinct");
      f.bound_vars.push_back(expect(Tok::Ident, "variable name").text);
      while (match(Tok::Comma)) f.bound_vars.push_back(expect(Tok::Ident, "variable name").text);
      expect(Tok::Colon, "':'");
      f.domain = expect(Tok::Ident, "domain name").text;
      expect(Tok::Dot, "'.' before quantifier body");
      f.children.push_back(parse_formula());
      return f;
    }
    if (is(Tok::Ident)) {
      Token name = get();
      if (is_reserved(name.text))
        error_at(name, "reserved word '" + name.text + "' cannot name an atom");
      std::vector<std::string> args;
      if (match(Tok::LParen)) {
        args.push_back(expect(Tok::Ident, "argument").text);
        while (match(Tok::Comma)) args.push_back(expect(Tok::Ident, "argument").text);
        expect(Tok::RParen, "')'");
      }
      return Formula::make_atom(name.text, std::move(args));
    }
    error_at(cur(), "expected a formula");
    throw parse_abort{};
  }

  static bool is_reserved(const std::string& w) {
    static const std::set<std::string> kReserved = {
        "P", "domain", "predicate", "symmetric", "query", "forall", "exists",
        "distinct", "not", "and", "or", "xor", "implies", "iff", "tau", "true", "false"};
    return kReserved.count(w) > 0;
  }

  // P ( formula [ | formula ] )
  std::pair<Formula, std::optional<Formula>> parse_prob() {
    Token p = expect(Tok::Ident, "'P'");
    if (p.text != "P") {
      error_at(p, "expected 'P'");
      throw parse_abort{};
    }
    expect(Tok::LParen, "'('");
    Formula q = parse_formula();
    std::optional<Formula> r;
    if (match(Tok::Bar)) r = parse_formula();
    expect(Tok::RParen, "')'");
    return {std::move(q), std::move(r)};
  }

  double expect_probability(const char* what) {
    Token t = expect(Tok::Number, what);
    if (t.value < 0.0 || t.value > 1.0) error_at(t, "bound outside [0,1]");
    return t.value;
  }

  // ---- lines --------------------------------------------------------------

  void parse_domain_decl() {
    get();  // 'domain'
    Token name = expect(Tok::Ident, "domain name");
    expect(Tok::Equal, "'='");
    expect(Tok::LBrace, "'{'");
    std::vector<std::string> consts;
    consts.push_back(expect(Tok::Ident, "constant").text);
    while (match(Tok::Comma)) consts.push_back(expect(Tok::Ident, "constant").text);
    expect(Tok::RBrace, "'}'");
    if (program.find_domain(name.text))
      error_at(name, "duplicate domain '" + name.text + "'");
    std::set<std::string> uniq(consts.begin(), consts.end());
    if (uniq.size() != consts.size())
      error_at(name, "duplicate constant in domain '" + name.text + "'");
    program.domains.emplace_back(name.text, std::move(consts));
  }

  void parse_predicate_decl() {
    get();  // 'predicate'
    Token name = expect(Tok::Ident, "predicate name");
    expect(Tok::LParen, "'('");
    PredicateDecl decl;
    decl.name = name.text;
    decl.arg_domains.push_back(expect(Tok::Ident, "domain name").text);
    while (match(Tok::Comma)) decl.arg_domains.push_back(expect(Tok::Ident, "domain name").text);
    expect(Tok::RParen, "')'");
    decl.symmetric = match_word("symmetric");
    if (program.find_predicate(decl.name))
      error_at(name, "duplicate predicate '" + decl.name + "'");
    if (decl.symmetric) {
      for (const auto& d : decl.arg_domains)
        if (d != decl.arg_domains[0]) {
          error_at(name, "symmetric predicate needs one shared argument domain");
          break;
        }
    }
    program.predicates.push_back(std::move(decl));
  }

  void parse_query_line() {
    get();  // 'query'
    auto [q, r] = parse_prob();
    Query query;
    query.conditional = r.has_value();
    query.q = std::move(q);
    query.e = std::move(r);
    program.queries.push_back(std::move(query));
  }

  void parse_sentence_line() {
    Sentence s;
    Token first = cur();
    if (is(Tok::Ident) && !is_reserved(cur().text) && toks[at + 1].kind == Tok::Colon) {
      s.label = get().text;
      get();  // ':'
    }

    Token lower_tok = cur();
    if (is(Tok::Number)) {
      s.lower = expect_probability("lower bound");
      expect(Tok::LessEq, "'<='");
      auto [q, r] = parse_prob();
      s.q = std::move(q);
      s.r = std::move(r);
      expect(Tok::LessEq, "'<='");
      s.upper = expect_probability("upper bound");
    } else if (is_word("P")) {
      auto [q, r] = parse_prob();
      s.q = std::move(q);
      s.r = std::move(r);
      expect(Tok::Equal, "'=' (point probability)");
      s.lower = s.upper = expect_probability("probability");
    } else {
      error_at(first, "expected a declaration or a probability sentence");
      throw parse_abort{};
    }
    if (s.lower > s.upper) error_at(lower_tok, "lower > upper");
    s.conditional = s.r.has_value();

    if (match_word("forall")) {
      s.forall_distinct = match_word("distinct");
      s.forall_vars.push_back(expect(Tok::Ident, "variable name").text);
      while (match(Tok::Comma)) s.forall_vars.push_back(expect(Tok::Ident, "variable name").text);
      expect(Tok::Colon, "':'");
      s.forall_domain = expect(Tok::Ident, "domain name").text;
    }

    if (match(Tok::Semicolon)) {
      Token tword = expect(Tok::Ident, "'tau'");
      if (tword.text != "tau") error_at(tword, "expected 'tau'");
      expect(Tok::Equal, "'='");
      Token v = expect(Tok::Ident, "'true' or 'false'");
      if (v.text == "false")
        s.tau = false;
      else if (v.text != "true")
        error_at(v, "expected 'true' or 'false'");
    }

    program.sentences.push_back(std::move(s));
  }

  void end_of_line() {
    if (!is(Tok::Newline) && !is(Tok::End)) {
      error_at(cur(), "unexpected trailing input");
      throw parse_abort{};
    }
    match(Tok::Newline);
  }

  void run() {
    while (!is(Tok::End)) {
      if (match(Tok::Newline)) continue;
      try {
        if (is_word("domain"))
          parse_domain_decl();
        else if (is_word("predicate"))
          parse_predicate_decl();
        else if (is_word("query"))
          parse_query_line();
        else
          parse_sentence_line();
        end_of_line();
      } catch (const parse_abort&) {
        skip_line();
      }
    }
  }
};

// ---- semantic validation ----------------------------------------------------

struct Validator {
  const LCNProgram& program;
  std::vector<Diagnostic>& diags;
  int line, col;

  void report(const std::string& msg) { diags.push_back({line, col, msg}); }

  void check_formula(const Formula& f, std::set<std::string>& bound) {
    switch (f.kind) {
      case Connective::Atom: {
        const PredicateDecl* pred = program.find_predicate(f.name);
        if (!f.args.empty()) {
          if (!pred) {
            report("undeclared predicate '" + f.name + "'");
            return;
          }
          if (pred->arg_domains.size() != f.args.size()) {
            report("arity mismatch for '" + f.name + "'");
            return;
          }
          for (std::size_t i = 0; i < f.args.size(); ++i) {
            const std::string& a = f.args[i];
            if (bound.count(a)) continue;
            const auto* dom = program.find_domain(pred->arg_domains[i]);
            if (!dom) {
              report("undeclared domain '" + pred->arg_domains[i] + "'");
            } else if (std::find(dom->begin(), dom->end(), a) == dom->end()) {
              report("undeclared identifier '" + a + "' (not a bound variable or a constant of '" +
                     pred->arg_domains[i] + "')");
            }
          }
        } else if (pred) {
          report("predicate '" + f.name + "' used without arguments");
        }
        return;
      }
      case Connective::Forall:
      case Connective::Exists: {
        if (!program.find_domain(f.domain)) report("undeclared domain '" + f.domain + "'");
        std::set<std::string> inner = bound;
        for (const std::string& v : f.bound_vars) inner.insert(v);
        check_formula(f.children[0], inner);
        return;
      }
      default:
        for (const Formula& c : f.children) check_formula(c, bound);
        return;
    }
  }

  void check_sentence(const Sentence& s) {
    if (!s.forall_vars.empty() && !program.find_domain(s.forall_domain))
      report("undeclared domain '" + s.forall_domain + "'");
    std::set<std::string> bound(s.forall_vars.begin(), s.forall_vars.end());
    check_formula(s.q, bound);
    if (s.r) check_formula(*s.r, bound);
  }
};

}  // namespace

ParseResult parse_program(const std::string& text) {
  ParseResult result;
  Parser p(text, result.diagnostics);
  p.run();

  // Assign labels and detect duplicates.
  std::set<std::string> labels;
  for (const Sentence& s : p.program.sentences)
    if (!s.label.empty() && !labels.insert(s.label).second)
      result.diagnostics.push_back({1, 1, "duplicate sentence label '" + s.label + "'"});
  int ordinal = 0;
  for (Sentence& s : p.program.sentences) {
    ++ordinal;
    if (s.label.empty()) {
      std::string auto_label = "s" + std::to_string(ordinal);
      while (labels.count(auto_label)) auto_label += "_";
      labels.insert(auto_label);
      s.label = auto_label;
    }
  }

  Validator v{p.program, result.diagnostics, 1, 1};
  for (const Sentence& s : p.program.sentences) v.check_sentence(s);
  for (const Query& q : p.program.queries) {
    std::set<std::string> bound;
    v.check_formula(q.q, bound);
    if (q.e) v.check_formula(*q.e, bound);
  }

  if (result.diagnostics.empty()) result.program = std::move(p.program);
  return result;
}

QueryParseResult parse_query(const std::string& text, const LCNProgram& program,
                             const GroundProgram& gp) {
  QueryParseResult out;
  Parser p(text, out.diagnostics);
  Query q;
  try {
    auto [qq, rr] = p.parse_prob();
    if (!p.is(Tok::End) && !p.is(Tok::Newline)) {
      p.error_at(p.cur(), "unexpected trailing input");
      throw Parser::parse_abort{};
    }
    q.conditional = rr.has_value();
    q.q = std::move(qq);
    q.e = std::move(rr);
  } catch (const Parser::parse_abort&) {
    return out;
  }

  Validator v{program, out.diagnostics, 1, 1};
  std::set<std::string> bound;
  v.check_formula(q.q, bound);
  if (q.e) v.check_formula(*q.e, bound);
  if (!out.diagnostics.empty()) return out;

  // Ground against the program's declarations and require that every query
  // atom already exists in the ground atom table.
  LCNProgram tmp = program;
  tmp.queries.clear();
  tmp.queries.push_back(q);
  try {
    GroundProgram g2 = ground(tmp);
    if (g2.atoms.size() > gp.atoms.size()) {
      out.diagnostics.push_back(
          {1, 1, "unknown atom '" + g2.atoms[gp.atoms.size()].text + "' in query"});
      return out;
    }
    out.query = g2.queries.at(0);
  } catch (const Error& e) {
    out.diagnostics.push_back({1, 1, e.what()});
  }
  return out;
}

namespace {

std::string format_probability(double v) {
  for (int prec = 1; prec <= 17; ++prec) {
    std::ostringstream os;
    os.precision(prec);
    os << v;
    if (std::strtod(os.str().c_str(), nullptr) == v) return os.str();
  }
  return std::to_string(v);
}

}  // namespace

std::string pretty_print(const LCNProgram& program) {
  std::ostringstream os;
  for (const auto& [name, consts] : program.domains) {
    os << "domain " << name << " = {";
    for (std::size_t i = 0; i < consts.size(); ++i) os << (i ? ", " : "") << consts[i];
    os << "}\n";
  }
  for (const PredicateDecl& p : program.predicates) {
    os << "predicate " << p.name << "(";
    for (std::size_t i = 0; i < p.arg_domains.size(); ++i)
      os << (i ? ", " : "") << p.arg_domains[i];
    os << ")" << (p.symmetric ? " symmetric" : "") << "\n";
  }
  for (const Sentence& s : program.sentences) {
    os << s.label << ": " << format_probability(s.lower) << " <= P(" << to_text(s.q);
    if (s.r) os << " | " << to_text(*s.r);
    os << ") <= " << format_probability(s.upper);
    if (!s.forall_vars.empty()) {
      os << " forall " << (s.forall_distinct ? "distinct " : "");
      for (std::size_t i = 0; i < s.forall_vars.size(); ++i)
        os << (i ? "," : "") << s.forall_vars[i];
      os << " : " << s.forall_domain;
    }
    if (!s.tau) os << " ; tau=false";
    os << "\n";
  }
  for (const Query& q : program.queries) {
    os << "query P(" << to_text(q.q);
    if (q.e) os << " | " << to_text(*q.e);
    os << ")\n";
  }
  return os.str();
}

}  // namespace lcn
