#include "filtan/network.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace filtan {

namespace {

enum class Tok { end, ident, number, semi, eq, plus, minus, star, slash, lparen, rparen, comma, colon, le };

struct Token {
  Tok kind = Tok::end;
  std::string text;
  SourceLoc loc;
};

const std::set<std::string> kReserved = {
    "input", "reset",  "output", "format",   "blocks",   "delay",    "const",   "plus",
    "scale", "wire",   "fanout", "route",    "serial",   "parallel", "feedback"};

class Lexer {
 public:
  explicit Lexer(const std::string& src) : s_(src) { advance(); }

  const Token& peek() const { return tok_; }
  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    skip_space();
    tok_.loc = {line_, col_};
    if (pos_ >= s_.size()) {
      tok_ = {Tok::end, "", tok_.loc};
      return;
    }
    char c = s_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
        bump();
      tok_.kind = Tok::ident;
      tok_.text = s_.substr(start, pos_ - start);
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) bump();
      if (pos_ < s_.size() && s_[pos_] == '.') {
        bump();
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) bump();
      }
      if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
        size_t mark = pos_, mark_col = col_;
        bump();
        if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) bump();
        if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
          while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) bump();
        } else {
          // Not an exponent: an identifier follows the number, back off.
          pos_ = mark;
          col_ = mark_col;
        }
      }
      tok_.kind = Tok::number;
      tok_.text = s_.substr(start, pos_ - start);
      return;
    }
    switch (c) {
      case ';': bump(); tok_ = {Tok::semi, ";", tok_.loc}; return;
      case '=': bump(); tok_ = {Tok::eq, "=", tok_.loc}; return;
      case '+': bump(); tok_ = {Tok::plus, "+", tok_.loc}; return;
      case '-': bump(); tok_ = {Tok::minus, "-", tok_.loc}; return;
      case '*': bump(); tok_ = {Tok::star, "*", tok_.loc}; return;
      case '/': bump(); tok_ = {Tok::slash, "/", tok_.loc}; return;
      case '(': bump(); tok_ = {Tok::lparen, "(", tok_.loc}; return;
      case ')': bump(); tok_ = {Tok::rparen, ")", tok_.loc}; return;
      case ',': bump(); tok_ = {Tok::comma, ",", tok_.loc}; return;
      case ':': bump(); tok_ = {Tok::colon, ":", tok_.loc}; return;
      case '<':
        if (pos_ + 1 < s_.size() && s_[pos_ + 1] == '=') {
          bump();
          bump();
          tok_ = {Tok::le, "<=", tok_.loc};
          return;
        }
        throw ParseError(tok_.loc, "unexpected '<'");
      default:
        throw ParseError(tok_.loc, std::string("unexpected character '") + c + "'");
    }
  }

  void skip_space() {
    for (;;) {
      while (pos_ < s_.size() &&
             std::isspace(static_cast<unsigned char>(s_[pos_])))
        bump();
      if (pos_ < s_.size() && s_[pos_] == '#') {
        while (pos_ < s_.size() && s_[pos_] != '\n') bump();
        continue;
      }
      if (pos_ + 1 < s_.size() && s_[pos_] == '/' && s_[pos_ + 1] == '/') {
        while (pos_ < s_.size() && s_[pos_] != '\n') bump();
        continue;
      }
      break;
    }
  }

  void bump() {
    if (s_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  const std::string& s_;
  size_t pos_ = 0;
  size_t line_ = 1, col_ = 1;
  Token tok_;
};

class Parser {
 public:
  explicit Parser(const std::string& src) : lex_(src) {}

  FilterNetwork parse() {
    while (lex_.peek().kind != Tok::end) statement();
    validate();
    return std::move(net_);
  }

 private:
  // ---- token helpers ----

  Token expect(Tok kind, const std::string& what) {
    if (lex_.peek().kind != kind)
      throw ParseError(lex_.peek().loc, "expected " + what + ", got '" + lex_.peek().text + "'");
    return lex_.take();
  }

  bool accept(Tok kind) {
    if (lex_.peek().kind != kind) return false;
    lex_.take();
    return true;
  }

  std::string expect_name() {
    Token t = expect(Tok::ident, "a name");
    if (kReserved.count(t.text))
      throw ParseError(t.loc, "'" + t.text + "' is a reserved word");
    return t.text;
  }

  bool ident_is(const std::string& kw) const {
    return lex_.peek().kind == Tok::ident && lex_.peek().text == kw;
  }

  Rat parse_number_token(const Token& t) {
    try {
      return Rat::parse(t.text);
    } catch (const std::exception& e) {
      throw ParseError(t.loc, std::string("bad rational literal: ") + e.what());
    }
  }

  // rational := number ['/' number]
  Rat parse_rational() {
    Token t = expect(Tok::number, "a rational constant");
    Rat r = parse_number_token(t);
    if (accept(Tok::slash)) {
      Token d = expect(Tok::number, "a denominator");
      Rat dv = parse_number_token(d);
      if (dv.is_zero()) throw ParseError(d.loc, "rational with zero denominator");
      r /= dv;
    }
    return r;
  }

  Rat parse_signed_rational() {
    bool neg = false;
    if (accept(Tok::minus)) neg = true;
    else accept(Tok::plus);
    Rat r = parse_rational();
    return neg ? -r : r;
  }

  size_t parse_nat(size_t lo, size_t hi, const std::string& what) {
    Token t = expect(Tok::number, what);
    Rat r = parse_number_token(t);
    if (r.den() != 1 || r.sign() < 0)
      throw ParseError(t.loc, what + " must be a natural number");
    if (r.num() < static_cast<long>(lo) || r.num() > static_cast<long>(hi))
      throw ParseError(t.loc, what + " out of range");
    return r.num().get_ui();
  }

  // ---- statements ----

  void statement() {
    Token head = lex_.peek();
    if (head.kind != Tok::ident)
      throw ParseError(head.loc, "expected a statement, got '" + head.text + "'");
    if (head.text == "input") {
      lex_.take();
      InputDecl d;
      d.loc = head.loc;
      d.name = expect_name();
      if (accept(Tok::le)) {
        d.has_bound = true;
        d.bound = parse_signed_rational();
        if (d.bound.sign() < 0) throw ParseError(head.loc, "bound must be nonnegative");
      }
      expect(Tok::semi, "';'");
      net_.inputs.push_back(std::move(d));
    } else if (head.text == "reset") {
      lex_.take();
      ResetDecl d;
      d.loc = head.loc;
      d.name = expect_name();
      if (accept(Tok::le)) {
        d.has_bound = true;
        d.bound = parse_signed_rational();
        if (d.bound.sign() < 0) throw ParseError(head.loc, "bound must be nonnegative");
      }
      expect(Tok::semi, "';'");
      net_.resets.push_back(std::move(d));
    } else if (head.text == "output") {
      lex_.take();
      OutputDecl d;
      d.loc = head.loc;
      d.name = expect_name();
      expect(Tok::semi, "';'");
      net_.outputs.push_back(std::move(d));
    } else if (head.text == "format") {
      lex_.take();
      Token f = expect(Tok::ident, "a format name");
      net_.has_format = true;
      net_.format = f.text;
      expect(Tok::semi, "';'");
    } else if (head.text == "blocks") {
      lex_.take();
      if (net_.has_blocks) throw ParseError(head.loc, "more than one blocks expression");
      net_.blocks = parse_block();
      net_.has_blocks = true;
      expect(Tok::semi, "';'");
    } else if (kReserved.count(head.text)) {
      throw ParseError(head.loc, "'" + head.text + "' is a reserved word");
    } else {
      Equation eq;
      eq.loc = head.loc;
      eq.lhs = expect_name();
      expect(Tok::eq, "'='");
      eq.terms = parse_linexpr();
      expect(Tok::semi, "';'");
      net_.equations.push_back(std::move(eq));
    }
  }

  // ---- linear expressions ----

  std::vector<Term> parse_linexpr() {
    std::vector<Term> terms;
    bool neg = false;
    if (accept(Tok::minus)) neg = true;
    else accept(Tok::plus);
    terms.push_back(parse_term(neg));
    for (;;) {
      if (accept(Tok::plus)) terms.push_back(parse_term(false));
      else if (accept(Tok::minus)) terms.push_back(parse_term(true));
      else break;
    }
    return terms;
  }

  Term parse_term(bool neg) {
    SourceLoc loc = lex_.peek().loc;
    if (lex_.peek().kind == Tok::number) {
      Rat r = parse_rational();
      if (neg) r = -r;
      if (accept(Tok::star)) {
        Term t = parse_ref();
        t.loc = loc;
        if (t.kind == Term::Kind::constant) t.coef = r * t.coef;
        else t.coef = r;
        return t;
      }
      Term t;
      t.kind = Term::Kind::constant;
      t.coef = r;
      t.loc = loc;
      return t;
    }
    Term t = parse_ref();
    t.loc = loc;
    t.coef = neg ? -t.coef : t.coef;
    return t;
  }

  // ref := name | delay(name, nat [, [rational '*'] reset]) | const(rational)
  Term parse_ref() {
    Token head = expect(Tok::ident, "a signal reference");
    Term t;
    if (head.text == "delay") {
      t.kind = Term::Kind::delayed;
      expect(Tok::lparen, "'('");
      Token n = expect(Tok::ident, "a signal name");
      if (kReserved.count(n.text)) throw ParseError(n.loc, "'" + n.text + "' is a reserved word");
      t.name = n.text;
      expect(Tok::comma, "','");
      t.ticks = parse_nat(1, 1000000, "delay length");
      if (accept(Tok::comma)) {
        if (lex_.peek().kind != Tok::ident || kReserved.count(lex_.peek().text)) {
          t.init_scale = parse_signed_rational();
          expect(Tok::star, "'*'");
        }
        Token lbl = expect(Tok::ident, "a reset name");
        if (kReserved.count(lbl.text))
          throw ParseError(lbl.loc, "'" + lbl.text + "' is a reserved word");
        t.init = lbl.text;
      }
      expect(Tok::rparen, "')'");
      return t;
    }
    if (head.text == "const") {
      t.kind = Term::Kind::constant;
      expect(Tok::lparen, "'('");
      t.coef = parse_signed_rational();
      expect(Tok::rparen, "')'");
      return t;
    }
    if (kReserved.count(head.text))
      throw ParseError(head.loc, "'" + head.text + "' is a reserved word");
    t.kind = Term::Kind::node;
    t.name = head.text;
    return t;
  }

  // ---- combinator expressions ----

  Block parse_block() {
    Token head = expect(Tok::ident, "a block");
    Block b;
    b.loc = head.loc;
    if (head.text == "plus") {
      b.kind = Block::Kind::plus;
    } else if (head.text == "scale") {
      b.kind = Block::Kind::scale;
      expect(Tok::lparen, "'('");
      b.value = parse_signed_rational();
      expect(Tok::rparen, "')'");
    } else if (head.text == "delay") {
      b.kind = Block::Kind::delay;
      expect(Tok::lparen, "'('");
      b.n = parse_nat(1, 1000000, "delay length");
      if (accept(Tok::comma)) {
        if (lex_.peek().kind != Tok::ident || kReserved.count(lex_.peek().text)) {
          b.init_scale = parse_signed_rational();
          expect(Tok::star, "'*'");
        }
        Token lbl = expect(Tok::ident, "a reset name");
        if (kReserved.count(lbl.text))
          throw ParseError(lbl.loc, "'" + lbl.text + "' is a reserved word");
        b.init = lbl.text;
      }
      expect(Tok::rparen, "')'");
    } else if (head.text == "const") {
      b.kind = Block::Kind::constant;
      expect(Tok::lparen, "'('");
      b.value = parse_signed_rational();
      expect(Tok::rparen, "')'");
    } else if (head.text == "wire") {
      b.kind = Block::Kind::wire;
      b.n = 1;
      if (accept(Tok::lparen)) {
        b.n = parse_nat(1, 1000000, "wire width");
        expect(Tok::rparen, "')'");
      }
    } else if (head.text == "fanout") {
      b.kind = Block::Kind::fanout;
      expect(Tok::lparen, "'('");
      b.n = parse_nat(1, 1000000, "fanout width");
      expect(Tok::rparen, "')'");
    } else if (head.text == "route") {
      b.kind = Block::Kind::route;
      expect(Tok::lparen, "'('");
      b.n = parse_nat(1, 1000000, "route input count");
      expect(Tok::colon, "':'");
      do {
        bool neg = accept(Tok::minus);
        size_t k = parse_nat(0, 1000000, "route index");
        b.route_map.push_back(neg ? -static_cast<int>(k) : static_cast<int>(k));
      } while (accept(Tok::comma));
      expect(Tok::rparen, "')'");
    } else if (head.text == "serial" || head.text == "parallel") {
      b.kind = head.text == "serial" ? Block::Kind::serial : Block::Kind::parallel;
      expect(Tok::lparen, "'('");
      b.children.push_back(parse_block());
      while (accept(Tok::comma)) b.children.push_back(parse_block());
      expect(Tok::rparen, "')'");
      if (b.children.size() < 2)
        throw ParseError(head.loc, head.text + " needs at least two blocks");
    } else if (head.text == "feedback") {
      b.kind = Block::Kind::feedback;
      expect(Tok::lparen, "'('");
      b.children.push_back(parse_block());
      b.n = 1;
      if (accept(Tok::comma)) b.n = parse_nat(1, 1000000, "feedback count");
      expect(Tok::rparen, "')'");
    } else {
      throw ParseError(head.loc, "expected a block, got '" + head.text + "'");
    }
    return b;
  }

  // ---- validation ----

  void validate() {
    if (net_.outputs.empty()) throw ParseError({1, 1}, "no outputs declared");

    std::set<std::string> names;
    for (auto& d : net_.inputs) {
      if (!names.insert(d.name).second)
        throw ParseError(d.loc, "duplicate declaration of '" + d.name + "'");
      net_.input_index[d.name] = net_.input_index.size();
    }
    for (auto& d : net_.resets) {
      if (!names.insert(d.name).second)
        throw ParseError(d.loc, "duplicate declaration of '" + d.name + "'");
      net_.reset_index[d.name] = net_.reset_index.size();
    }
    for (auto& eq : net_.equations) {
      if (net_.input_index.count(eq.lhs))
        throw ParseError(eq.loc, "assignment to input '" + eq.lhs + "'");
      if (net_.reset_index.count(eq.lhs))
        throw ParseError(eq.loc, "assignment to reset '" + eq.lhs + "'");
      if (!names.insert(eq.lhs).second)
        throw ParseError(eq.loc, "multiple assignment of '" + eq.lhs + "'");
      net_.node_index[eq.lhs] = net_.node_index.size();
    }

    if (net_.has_blocks && !net_.equations.empty())
      throw ParseError(net_.blocks.loc, "blocks form cannot be mixed with node equations");
    if (!net_.has_blocks && net_.equations.empty())
      throw ParseError(net_.outputs.front().loc, "no node equations");

    std::set<std::string> seen_outputs;
    for (auto& d : net_.outputs)
      if (!seen_outputs.insert(d.name).second)
        throw ParseError(d.loc, "duplicate declaration of output '" + d.name + "'");

    if (net_.has_blocks) validate_blocks();
    else validate_equations();
  }

  void validate_equations() {
    for (const auto& eq : net_.equations) {
      for (const auto& t : eq.terms) {
        if (t.kind == Term::Kind::constant) continue;
        if (!net_.input_index.count(t.name) && !net_.node_index.count(t.name))
          throw ParseError(t.loc, "undeclared name '" + t.name + "'");
        if (t.kind == Term::Kind::delayed && !t.init.empty() &&
            !net_.reset_index.count(t.init))
          throw ParseError(t.loc, "undeclared reset '" + t.init + "'");
      }
    }
    for (const auto& d : net_.outputs)
      if (!net_.input_index.count(d.name) && !net_.node_index.count(d.name))
        throw ParseError(d.loc, "undeclared name '" + d.name + "'");

    // Executable order: delay-free references must form a DAG.
    const size_t n = net_.equations.size();
    std::vector<std::vector<size_t>> succ(n);
    std::vector<size_t> indeg(n, 0);
    for (size_t v = 0; v < n; ++v)
      for (const auto& t : net_.equations[v].terms)
        if (t.kind == Term::Kind::node && net_.node_index.count(t.name)) {
          succ[net_.node_index[t.name]].push_back(v);
          ++indeg[v];
        }
    std::vector<size_t> order;
    std::vector<size_t> ready;
    for (size_t v = 0; v < n; ++v)
      if (indeg[v] == 0) ready.push_back(v);
    while (!ready.empty()) {
      std::sort(ready.begin(), ready.end(), std::greater<>());
      size_t v = ready.back();
      ready.pop_back();
      order.push_back(v);
      for (size_t w : succ[v])
        if (--indeg[w] == 0) ready.push_back(w);
    }
    if (order.size() != n) {
      // Recover one cycle for the diagnostic.
      std::vector<int> color(n, 0);
      std::vector<size_t> stack;
      std::string cycle;
      auto dfs = [&](auto&& self, size_t v) -> bool {
        color[v] = 1;
        stack.push_back(v);
        for (const auto& t : net_.equations[v].terms) {
          if (t.kind != Term::Kind::node || !net_.node_index.count(t.name)) continue;
          size_t w = net_.node_index[t.name];
          if (color[w] == 1) {
            auto it = std::find(stack.begin(), stack.end(), w);
            for (; it != stack.end(); ++it)
              cycle += net_.equations[*it].lhs + " -> ";
            cycle += net_.equations[w].lhs;
            return true;
          }
          if (color[w] == 0 && self(self, w)) return true;
        }
        color[v] = 2;
        stack.pop_back();
        return false;
      };
      for (size_t v = 0; v < n && cycle.empty(); ++v)
        if (color[v] == 0) dfs(dfs, v);
      throw ParseError(net_.equations.front().loc, "non-causal: delay-free cycle " + cycle);
    }
    net_.eval_order = std::move(order);
  }

  void validate_blocks() {
    std::set<std::string> labels;
    collect_block_labels(net_.blocks, labels);
    for (const auto& lbl : labels)
      if (!net_.reset_index.count(lbl))
        throw ParseError(net_.blocks.loc, "undeclared reset '" + lbl + "'");
    BlockArity a = block_arity(net_.blocks);
    if (a.n_in != net_.inputs.size())
      throw ParseError(net_.blocks.loc,
                       "blocks expression takes " + std::to_string(a.n_in) + " inputs, " +
                           std::to_string(net_.inputs.size()) + " declared");
    if (a.n_out != net_.outputs.size())
      throw ParseError(net_.blocks.loc,
                       "blocks expression yields " + std::to_string(a.n_out) + " outputs, " +
                           std::to_string(net_.outputs.size()) + " declared");
  }

  static void collect_block_labels(const Block& b, std::set<std::string>& out) {
    if (b.kind == Block::Kind::delay && !b.init.empty()) out.insert(b.init);
    for (const auto& c : b.children) collect_block_labels(c, out);
  }

  Lexer lex_;
  FilterNetwork net_;
};

}  // namespace

BlockArity block_arity(const Block& b) {
  switch (b.kind) {
    case Block::Kind::plus: return {2, 1};
    case Block::Kind::scale:
    case Block::Kind::delay: return {1, 1};
    case Block::Kind::constant: return {0, 1};
    case Block::Kind::wire: return {b.n, b.n};
    case Block::Kind::fanout: return {1, b.n};
    case Block::Kind::route:
      for (int k : b.route_map)
        if (static_cast<size_t>(std::abs(k)) > b.n)
          throw ParseError(b.loc, "route index out of range");
      return {b.n, b.route_map.size()};
    case Block::Kind::serial: {
      BlockArity a = block_arity(b.children.front());
      for (size_t i = 1; i < b.children.size(); ++i) {
        BlockArity c = block_arity(b.children[i]);
        if (c.n_in != a.n_out)
          throw ParseError(b.children[i].loc,
                           "serial stage expects " + std::to_string(c.n_in) + " inputs, gets " +
                               std::to_string(a.n_out));
        a.n_out = c.n_out;
      }
      return a;
    }
    case Block::Kind::parallel: {
      BlockArity a{0, 0};
      for (const auto& c : b.children) {
        BlockArity ca = block_arity(c);
        a.n_in += ca.n_in;
        a.n_out += ca.n_out;
      }
      return a;
    }
    case Block::Kind::feedback: {
      BlockArity a = block_arity(b.children.front());
      if (b.n > a.n_in || b.n > a.n_out)
        throw ParseError(b.loc, "feedback loops more signals than the block has");
      return {a.n_in - b.n, a.n_out};
    }
  }
  throw ParseError(b.loc, "corrupt block");
}

FilterNetwork parse_network(const std::string& source) { return Parser(source).parse(); }

namespace {

void print_term(std::ostream& os, const Term& t, bool first) {
  bool neg = t.coef.sign() < 0;
  Rat mag = abs(t.coef);
  if (first) {
    if (neg) os << "-";
  } else {
    os << (neg ? " - " : " + ");
  }
  switch (t.kind) {
    case Term::Kind::constant:
      os << mag.to_string();
      return;
    case Term::Kind::node:
      if (mag != Rat(1)) os << mag.to_string() << "*";
      os << t.name;
      return;
    case Term::Kind::delayed:
      if (mag != Rat(1)) os << mag.to_string() << "*";
      os << "delay(" << t.name << ", " << t.ticks;
      if (!t.init.empty()) {
        os << ", ";
        if (t.init_scale != Rat(1)) os << t.init_scale.to_string() << "*";
        os << t.init;
      }
      os << ")";
      return;
  }
}

void print_block(std::ostream& os, const Block& b) {
  switch (b.kind) {
    case Block::Kind::plus: os << "plus"; return;
    case Block::Kind::scale: os << "scale(" << b.value.to_string() << ")"; return;
    case Block::Kind::delay:
      os << "delay(" << b.n;
      if (!b.init.empty()) {
        os << ", ";
        if (b.init_scale != Rat(1)) os << b.init_scale.to_string() << "*";
        os << b.init;
      }
      os << ")";
      return;
    case Block::Kind::constant: os << "const(" << b.value.to_string() << ")"; return;
    case Block::Kind::wire: os << "wire(" << b.n << ")"; return;
    case Block::Kind::fanout: os << "fanout(" << b.n << ")"; return;
    case Block::Kind::route: {
      os << "route(" << b.n << " : ";
      for (size_t i = 0; i < b.route_map.size(); ++i)
        os << (i ? ", " : "") << b.route_map[i];
      os << ")";
      return;
    }
    case Block::Kind::serial:
    case Block::Kind::parallel: {
      os << (b.kind == Block::Kind::serial ? "serial(" : "parallel(");
      for (size_t i = 0; i < b.children.size(); ++i) {
        if (i) os << ", ";
        print_block(os, b.children[i]);
      }
      os << ")";
      return;
    }
    case Block::Kind::feedback:
      os << "feedback(";
      print_block(os, b.children.front());
      os << ", " << b.n << ")";
      return;
  }
}

}  // namespace

namespace {

// Emits equations for one block given positional input signal names and
// returns the positional output names.
class BlockExpander {
 public:
  BlockExpander(const FilterNetwork& net, FilterNetwork& out) : out_(out) {
    for (const auto& d : net.inputs) taken_.insert(d.name);
    for (const auto& d : net.resets) taken_.insert(d.name);
    for (const auto& d : net.outputs) taken_.insert(d.name);
  }

  std::vector<std::string> emit(const Block& b, const std::vector<std::string>& in) {
    switch (b.kind) {
      case Block::Kind::plus: {
        std::string o = fresh("sum");
        Equation eq{o, {node_term(in[0]), node_term(in[1])}, b.loc};
        out_.equations.push_back(std::move(eq));
        return {o};
      }
      case Block::Kind::scale: {
        std::string o = fresh("scl");
        Term t = node_term(in[0]);
        t.coef = b.value;
        out_.equations.push_back({o, {t}, b.loc});
        return {o};
      }
      case Block::Kind::delay: {
        std::string o = fresh("dly");
        Term t;
        t.kind = Term::Kind::delayed;
        t.name = in[0];
        t.ticks = b.n;
        t.init = b.init;
        t.init_scale = b.init_scale;
        t.loc = b.loc;
        out_.equations.push_back({o, {t}, b.loc});
        return {o};
      }
      case Block::Kind::constant: {
        std::string o = fresh("cst");
        Term t;
        t.kind = Term::Kind::constant;
        t.coef = b.value;
        t.loc = b.loc;
        out_.equations.push_back({o, {t}, b.loc});
        return {o};
      }
      case Block::Kind::wire:
        return in;
      case Block::Kind::fanout:
        return std::vector<std::string>(b.n, in[0]);
      case Block::Kind::route: {
        std::vector<std::string> outs;
        for (int k : b.route_map) {
          if (k > 0) {
            outs.push_back(in[k - 1]);
          } else {
            std::string o = fresh("rte");
            Term t;
            if (k == 0) {
              t.kind = Term::Kind::constant;
              t.coef = Rat(0);
            } else {
              t = node_term(in[-k - 1]);
              t.coef = Rat(-1);
            }
            t.loc = b.loc;
            out_.equations.push_back({o, {t}, b.loc});
            outs.push_back(o);
          }
        }
        return outs;
      }
      case Block::Kind::serial: {
        std::vector<std::string> sig = in;
        for (const auto& c : b.children) sig = emit(c, sig);
        return sig;
      }
      case Block::Kind::parallel: {
        std::vector<std::string> outs;
        size_t at = 0;
        for (const auto& c : b.children) {
          BlockArity a = block_arity(c);
          std::vector<std::string> sub(in.begin() + at, in.begin() + at + a.n_in);
          at += a.n_in;
          for (auto& o : emit(c, sub)) outs.push_back(std::move(o));
        }
        return outs;
      }
      case Block::Kind::feedback: {
        BlockArity a = block_arity(b.children.front());
        std::vector<std::string> child_in = in;
        std::vector<std::string> loops;
        for (size_t k = 0; k < b.n; ++k) {
          loops.push_back(fresh("fb"));
          child_in.push_back(loops.back());
        }
        std::vector<std::string> outs = emit(b.children.front(), child_in);
        for (size_t k = 0; k < b.n; ++k) {
          Term t;
          t.kind = Term::Kind::delayed;
          t.name = outs[a.n_out - b.n + k];
          t.ticks = 1;
          t.loc = b.loc;
          out_.equations.push_back({loops[k], {t}, b.loc});
        }
        return outs;
      }
    }
    throw ParseError(b.loc, "corrupt block");
  }

 private:
  static Term node_term(const std::string& name) {
    Term t;
    t.kind = Term::Kind::node;
    t.name = name;
    return t;
  }

  std::string fresh(const char* role) {
    for (;;) {
      std::string name = "b" + std::to_string(counter_++) + "_" + role;
      if (taken_.insert(name).second) return name;
    }
  }

  FilterNetwork& out_;
  std::set<std::string> taken_;
  size_t counter_ = 0;
};

}  // namespace

FilterNetwork expand_blocks(const FilterNetwork& net) {
  if (!net.has_blocks) return net;
  FilterNetwork out;
  out.inputs = net.inputs;
  out.resets = net.resets;
  out.outputs = net.outputs;
  out.has_format = net.has_format;
  out.format = net.format;

  std::vector<std::string> in_names;
  for (const auto& d : net.inputs) in_names.push_back(d.name);
  BlockExpander ex(net, out);
  std::vector<std::string> sig = ex.emit(net.blocks, in_names);
  for (size_t i = 0; i < net.outputs.size(); ++i) {
    Term t;
    t.kind = Term::Kind::node;
    t.name = sig[i];
    out.equations.push_back({net.outputs[i].name, {t}, net.outputs[i].loc});
  }
  // Re-validating through the canonical form rebuilds the lookup tables and
  // the executable order.
  return parse_network(print_network(out));
}

std::string print_network(const FilterNetwork& net) {
  std::ostringstream os;
  for (const auto& d : net.inputs) {
    os << "input " << d.name;
    if (d.has_bound) os << " <= " << d.bound.to_string();
    os << ";\n";
  }
  for (const auto& d : net.resets) {
    os << "reset " << d.name;
    if (d.has_bound) os << " <= " << d.bound.to_string();
    os << ";\n";
  }
  if (net.has_format) os << "format " << net.format << ";\n";
  for (const auto& eq : net.equations) {
    os << eq.lhs << " = ";
    for (size_t i = 0; i < eq.terms.size(); ++i) print_term(os, eq.terms[i], i == 0);
    os << ";\n";
  }
  if (net.has_blocks) {
    os << "blocks ";
    print_block(os, net.blocks);
    os << ";\n";
  }
  for (const auto& d : net.outputs) os << "output " << d.name << ";\n";
  return os.str();
}

}  // namespace filtan
