#include "finslervol/expr.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <optional>
#include <utility>
#include <vector>

namespace finslervol {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UnknownIdentifier: return "UnknownIdentifier";
    case ErrorCode::ArityError: return "ArityError";
    case ErrorCode::UnboundVariable: return "UnboundVariable";
    case ErrorCode::NonFiniteResult: return "NonFiniteResult";
    case ErrorCode::InadmissibleInput: return "InadmissibleInput";
    case ErrorCode::DegenerateMetric: return "DegenerateMetric";
    case ErrorCode::NotLorentzian: return "NotLorentzian";
    case ErrorCode::NotTimelike: return "NotTimelike";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::NoTimelikeSeed: return "NoTimelikeSeed";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::UnsupportedDimension: return "UnsupportedDimension";
    case ErrorCode::SingularNodes: return "SingularNodes";
    case ErrorCode::DetNotProlongable: return "DetNotProlongable";
    case ErrorCode::ConsistencyCheck: return "ConsistencyCheck";
    case ErrorCode::UnknownMetric: return "UnknownMetric";
    case ErrorCode::SpecFormat: return "SpecFormat";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += i + 1 == items.size() ? " or " : ", ";
    out += items[i];
  }
  return out;
}

}  // namespace

ParseError::ParseError(ErrorCode code, SourcePos pos, const std::string& detail,
                       std::vector<std::string> expected)
    : Error(code, std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": " + detail +
                      (expected.empty() ? std::string() : "; expected " + join(expected))),
      pos_(pos),
      expected_(std::move(expected)) {}

std::string_view to_string(Func f) {
  switch (f) {
    case Func::Sqrt: return "sqrt";
    case Func::Abs: return "abs";
    case Func::Sgn: return "sgn";
    case Func::Exp: return "exp";
    case Func::Log: return "log";
    case Func::Sin: return "sin";
    case Func::Cos: return "cos";
  }
  return "?";
}

namespace detail {

void throw_unbound(char prefix, int index, std::size_t bound) {
  throw Error(ErrorCode::UnboundVariable, std::string(1, prefix) + std::to_string(index) +
                                              " is not bound (environment has " +
                                              std::to_string(bound) + " values)");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Expr

namespace {

NodePtr make_number(double v) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Number;
  n->number = v;
  return n;
}

NodePtr make_var(NodeKind kind, int index) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->index = index;
  return n;
}

NodePtr make_unary(NodeKind kind, NodePtr a) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->lhs = std::move(a);
  return n;
}

NodePtr make_binary(NodeKind kind, NodePtr a, NodePtr b) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->lhs = std::move(a);
  n->rhs = std::move(b);
  return n;
}

NodePtr make_pow(NodePtr base, double exponent) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Pow;
  n->lhs = std::move(base);
  n->number = exponent;
  return n;
}

NodePtr make_call(Func f, NodePtr a) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Call;
  n->func = f;
  n->lhs = std::move(a);
  return n;
}

int max_index(const Node& n, NodeKind kind) {
  int m = n.kind == kind ? n.index : -1;
  if (n.lhs) m = std::max(m, max_index(*n.lhs, kind));
  if (n.rhs) m = std::max(m, max_index(*n.rhs, kind));
  return m;
}

bool equal_nodes(const Node& a, const Node& b) {
  if (&a == &b) return true;
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case NodeKind::Number:
      return a.number == b.number;
    case NodeKind::VarX:
    case NodeKind::VarY:
      return a.index == b.index;
    case NodeKind::Pow:
      return a.number == b.number && equal_nodes(*a.lhs, *b.lhs);
    case NodeKind::Call:
      return a.func == b.func && equal_nodes(*a.lhs, *b.lhs);
    case NodeKind::Neg:
      return equal_nodes(*a.lhs, *b.lhs);
    default:
      return equal_nodes(*a.lhs, *b.lhs) && equal_nodes(*a.rhs, *b.rhs);
  }
}

}  // namespace

Expr::Expr() : root_(make_number(0.0)) {}
Expr::Expr(NodePtr root) : root_(std::move(root)) {}

Expr Expr::constant(double v) { return Expr(make_number(v)); }
Expr Expr::x(int i) { return Expr(make_var(NodeKind::VarX, i)); }
Expr Expr::y(int i) { return Expr(make_var(NodeKind::VarY, i)); }

int Expr::max_x_index() const { return max_index(*root_, NodeKind::VarX); }
int Expr::max_y_index() const { return max_index(*root_, NodeKind::VarY); }

bool operator==(const Expr& a, const Expr& b) { return equal_nodes(a.root(), b.root()); }

// ---------------------------------------------------------------------------
// Lexer

namespace {

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, End };

struct Token {
  Tok kind = Tok::End;
  std::string_view text;
  double value = 0.0;
  SourcePos pos;
};

std::string describe(const Token& t) {
  if (t.kind == Tok::End) return "end of input";
  return "'" + std::string(t.text) + "'";
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    skip_space();
    Token t;
    t.pos = pos_;
    if (i_ >= src_.size()) {
      t.kind = Tok::End;
      return t;
    }
    const char c = src_[i_];
    const std::size_t start = i_;
    if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && i_ + 1 < src_.size() &&
                                                        std::isdigit(static_cast<unsigned char>(src_[i_ + 1])))) {
      lex_number(t);
      return t;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (i_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[i_])) || src_[i_] == '_')) advance();
      t.kind = Tok::Ident;
      t.text = src_.substr(start, i_ - start);
      return t;
    }
    advance();
    t.text = src_.substr(start, 1);
    switch (c) {
      case '+': t.kind = Tok::Plus; break;
      case '-': t.kind = Tok::Minus; break;
      case '*': t.kind = Tok::Star; break;
      case '/': t.kind = Tok::Slash; break;
      case '^': t.kind = Tok::Caret; break;
      case '(': t.kind = Tok::LParen; break;
      case ')': t.kind = Tok::RParen; break;
      case ',': t.kind = Tok::Comma; break;
      default:
        throw ParseError(ErrorCode::SyntaxError, t.pos, "unexpected character '" + std::string(1, c) + "'",
                         {"number", "identifier", "operator", "'('"});
    }
    return t;
  }

 private:
  void advance() {
    if (src_[i_] == '\n') {
      ++pos_.line;
      pos_.column = 1;
    } else {
      ++pos_.column;
    }
    ++i_;
  }

  void skip_space() {
    while (i_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[i_]))) advance();
  }

  void lex_number(Token& t) {
    const std::size_t start = i_;
    auto digits = [&] {
      while (i_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_]))) advance();
    };
    digits();
    if (i_ < src_.size() && src_[i_] == '.') {
      advance();
      digits();
    }
    if (i_ < src_.size() && (src_[i_] == 'e' || src_[i_] == 'E')) {
      std::size_t save_i = i_;
      SourcePos save_pos = pos_;
      advance();
      if (i_ < src_.size() && (src_[i_] == '+' || src_[i_] == '-')) advance();
      if (i_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_]))) {
        digits();
      } else {
        i_ = save_i;
        pos_ = save_pos;
      }
    }
    t.kind = Tok::Number;
    t.text = src_.substr(start, i_ - start);
    const char* first = t.text.data();
    const char* last = first + t.text.size();
    // from_chars rejects a leading '.', so parse "0" + text in that case.
    std::string buffer;
    if (t.text.front() == '.') {
      buffer = "0" + std::string(t.text);
      first = buffer.data();
      last = first + buffer.size();
    }
    auto [ptr, ec] = std::from_chars(first, last, t.value);
    if (ec == std::errc::result_out_of_range) {
      t.value = std::strtod(std::string(first, last).c_str(), nullptr);
    } else if (ec != std::errc() || ptr != last) {
      throw ParseError(ErrorCode::SyntaxError, t.pos, "malformed number '" + std::string(t.text) + "'");
    }
  }

  std::string_view src_;
  std::size_t i_ = 0;
  SourcePos pos_;
};

// ---------------------------------------------------------------------------
// Parser

std::optional<Func> lookup_func(std::string_view name) {
  static constexpr std::array<std::pair<std::string_view, Func>, 7> table{{
      {"sqrt", Func::Sqrt},
      {"abs", Func::Abs},
      {"sgn", Func::Sgn},
      {"exp", Func::Exp},
      {"log", Func::Log},
      {"sin", Func::Sin},
      {"cos", Func::Cos},
  }};
  for (const auto& [n, f] : table)
    if (n == name) return f;
  return std::nullopt;
}

const std::vector<std::string>& atom_expected() {
  static const std::vector<std::string> v{"number", "identifier", "'('", "'-'"};
  return v;
}

class Parser {
 public:
  Parser(std::string_view src, const ParseOptions& opts) : lex_(src), opts_(opts) { tok_ = lex_.next(); }

  NodePtr parse_all() {
    NodePtr e = expr();
    if (tok_.kind != Tok::End) fail({"operator", "end of input"});
    return e;
  }

 private:
  [[noreturn]] void fail(std::vector<std::string> expected) {
    throw ParseError(ErrorCode::SyntaxError, tok_.pos, "unexpected " + describe(tok_), std::move(expected));
  }

  void bump() { tok_ = lex_.next(); }

  void expect(Tok kind, const char* what) {
    if (tok_.kind != kind) fail({what});
    bump();
  }

  NodePtr expr() {
    NodePtr lhs = term();
    while (tok_.kind == Tok::Plus || tok_.kind == Tok::Minus) {
      NodeKind k = tok_.kind == Tok::Plus ? NodeKind::Add : NodeKind::Sub;
      bump();
      lhs = make_binary(k, std::move(lhs), term());
    }
    return lhs;
  }

  NodePtr term() {
    NodePtr lhs = unary();
    while (tok_.kind == Tok::Star || tok_.kind == Tok::Slash) {
      NodeKind k = tok_.kind == Tok::Star ? NodeKind::Mul : NodeKind::Div;
      bump();
      lhs = make_binary(k, std::move(lhs), unary());
    }
    return lhs;
  }

  NodePtr unary() {
    if (tok_.kind == Tok::Minus) {
      bump();
      return make_unary(NodeKind::Neg, unary());
    }
    return power();
  }

  NodePtr power() {
    NodePtr base = atom();
    if (tok_.kind != Tok::Caret) return base;
    bump();
    double sign = 1.0;
    if (tok_.kind == Tok::Minus) {
      sign = -1.0;
      bump();
    }
    if (tok_.kind != Tok::Number) fail({"number"});
    double exponent = sign * tok_.value;
    bump();
    return make_pow(std::move(base), exponent);
  }

  NodePtr atom() {
    switch (tok_.kind) {
      case Tok::Number: {
        double v = tok_.value;
        bump();
        return make_number(v);
      }
      case Tok::LParen: {
        bump();
        NodePtr e = expr();
        expect(Tok::RParen, "')'");
        return e;
      }
      case Tok::Ident:
        return identifier();
      default:
        fail(atom_expected());
    }
  }

  NodePtr identifier() {
    const Token id = tok_;
    bump();
    if (tok_.kind == Tok::LParen) return call(id);

    if (auto it = opts_.symbols.find(id.text); it != opts_.symbols.end()) return it->second.root_ptr();

    if (id.text.size() >= 2 && (id.text[0] == 'x' || id.text[0] == 'y')) {
      int index = 0;
      auto digits = id.text.substr(1);
      auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), index);
      if (ec == std::errc() && ptr == digits.data() + digits.size()) {
        if (opts_.dim > 0 && index >= opts_.dim) {
          throw ParseError(ErrorCode::UnknownIdentifier, id.pos,
                           "'" + std::string(id.text) + "' exceeds dimension " + std::to_string(opts_.dim));
        }
        return make_var(id.text[0] == 'x' ? NodeKind::VarX : NodeKind::VarY, index);
      }
    }
    if (lookup_func(id.text)) fail({"'('"});
    throw ParseError(ErrorCode::UnknownIdentifier, id.pos, "unknown identifier '" + std::string(id.text) + "'");
  }

  NodePtr call(const Token& id) {
    const bool is_pow = id.text == "pow";
    std::optional<Func> f = lookup_func(id.text);
    if (!is_pow && !f) {
      throw ParseError(ErrorCode::UnknownIdentifier, id.pos, "unknown function '" + std::string(id.text) + "'");
    }
    bump();  // '('
    std::vector<NodePtr> args;
    args.push_back(expr());
    while (tok_.kind == Tok::Comma) {
      bump();
      args.push_back(expr());
    }
    if (tok_.kind != Tok::RParen) fail({"','", "')'"});
    bump();

    const std::size_t want = is_pow ? 2 : 1;
    if (args.size() != want) {
      throw ParseError(ErrorCode::ArityError, id.pos,
                       std::string(id.text) + " takes " + std::to_string(want) + " argument(s), got " +
                           std::to_string(args.size()));
    }
    if (is_pow) {
      Expr exponent(args[1]);
      if (!exponent.is_constant()) {
        throw ParseError(ErrorCode::SyntaxError, id.pos, "pow exponent must be a constant expression");
      }
      double c = evaluate<double>(exponent, Env<double>{});
      return make_pow(std::move(args[0]), c);
    }
    return make_call(*f, std::move(args[0]));
  }

  Lexer lex_;
  const ParseOptions& opts_;
  Token tok_;
};

// ---------------------------------------------------------------------------
// Printer

int precedence(const Node& n) {
  switch (n.kind) {
    case NodeKind::Add:
    case NodeKind::Sub: return 1;
    case NodeKind::Mul:
    case NodeKind::Div: return 2;
    case NodeKind::Neg: return 3;
    case NodeKind::Pow: return 4;
    case NodeKind::Number: return n.number < 0.0 ? 3 : 5;
    default: return 5;
  }
}

std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  (void)ec;
  return std::string(buf.data(), ptr);
}

void print(const Node& n, std::string& out);

void print_child(const Node& child, int min_prec, std::string& out) {
  if (precedence(child) < min_prec) {
    out += '(';
    print(child, out);
    out += ')';
  } else {
    print(child, out);
  }
}

void print(const Node& n, std::string& out) {
  switch (n.kind) {
    case NodeKind::Number:
      out += format_number(n.number);
      return;
    case NodeKind::VarX:
      out += 'x' + std::to_string(n.index);
      return;
    case NodeKind::VarY:
      out += 'y' + std::to_string(n.index);
      return;
    case NodeKind::Neg:
      out += '-';
      print_child(*n.lhs, 3, out);
      return;
    case NodeKind::Pow:
      print_child(*n.lhs, 5, out);
      out += '^';
      out += format_number(n.number);
      return;
    case NodeKind::Call:
      out += to_string(n.func);
      out += '(';
      print(*n.lhs, out);
      out += ')';
      return;
    default: {
      const int p = precedence(n);
      const char* op = n.kind == NodeKind::Add   ? " + "
                       : n.kind == NodeKind::Sub ? " - "
                       : n.kind == NodeKind::Mul ? "*"
                                                 : "/";
      print_child(*n.lhs, p, out);
      out += op;
      print_child(*n.rhs, p + 1, out);
      return;
    }
  }
}

NodePtr substitute_y(const NodePtr& n, const std::vector<NodePtr>& ys) {
  switch (n->kind) {
    case NodeKind::VarY:
      return ys.at(static_cast<std::size_t>(n->index));
    case NodeKind::Number:
    case NodeKind::VarX:
      return n;
    default: {
      auto copy = std::make_shared<Node>(*n);
      if (n->lhs) copy->lhs = substitute_y(n->lhs, ys);
      if (n->rhs) copy->rhs = substitute_y(n->rhs, ys);
      return copy;
    }
  }
}

}  // namespace

Expr parse(std::string_view source, const ParseOptions& options) {
  Parser p(source, options);
  return Expr(p.parse_all());
}

std::string to_string(const Expr& e) {
  std::string out;
  print(e.root(), out);
  return out;
}

Expr substitute_linear_y(const Expr& e, std::span<const double> basis, int n) {
  if (static_cast<int>(basis.size()) != n * n) {
    throw Error(ErrorCode::InvalidArgument, "basis must have n*n entries");
  }
  std::vector<NodePtr> ys;
  for (int i = 0; i < n; ++i) {
    NodePtr sum;
    for (int j = 0; j < n; ++j) {
      NodePtr term = make_binary(NodeKind::Mul, make_number(basis[i * n + j]), make_var(NodeKind::VarY, j));
      sum = sum ? make_binary(NodeKind::Add, sum, term) : term;
    }
    ys.push_back(sum);
  }
  return Expr(substitute_y(e.root_ptr(), ys));
}

}  // namespace finslervol
