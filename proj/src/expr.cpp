#include "conefield/expr.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <unordered_map>
#include <vector>

#include "conefield/error.hpp"

namespace conefield {
namespace detail {

// load/store move a repeated function call through a slot; powi squares
// (exactly what pow(x, 2) returns).
// addc..divc take their constant right operand from the instruction.
enum class Op : unsigned char { constant, variable, neg, add, sub, mul, div, pow, func, load, store, powi, addc, subc, mulc, divc };
enum class Fn : unsigned char { exp, log, sqrt, sin, cos, tanh, abs };

struct Node {
  Op op = Op::constant;
  Fn fn = Fn::exp;
  double value = 0.0;
  int var = 0;
  std::string name;  // for pi / e
  int lhs = -1;
  int rhs = -1;
};

struct Instr {
  Op op;
  Fn fn;
  int var;
  double value;
};

struct Program {
  std::string source;
  std::vector<Node> nodes;
  int root = -1;
  std::vector<Instr> code;
  std::size_t stack_depth = 0;
  std::size_t slots = 0;
  int max_var = 0;
};

}  // namespace detail

namespace {

using detail::Fn;
using detail::Node;
using detail::Op;

struct FnEntry {
  std::string_view name;
  Fn fn;
};
constexpr std::array<FnEntry, 7> kFunctions{{{"exp", Fn::exp},
                                             {"log", Fn::log},
                                             {"sqrt", Fn::sqrt},
                                             {"sin", Fn::sin},
                                             {"cos", Fn::cos},
                                             {"tanh", Fn::tanh},
                                             {"abs", Fn::abs}}};

std::string_view fn_name(Fn f) {
  for (const auto& e : kFunctions)
    if (e.fn == f) return e.name;
  return "?";
}

double apply(Fn f, double x) {
  switch (f) {
    case Fn::exp: return std::exp(x);
    case Fn::log: return std::log(x);
    case Fn::sqrt: return std::sqrt(x);
    case Fn::sin: return std::sin(x);
    case Fn::cos: return std::cos(x);
    case Fn::tanh: return std::tanh(x);
    case Fn::abs: return std::abs(x);
  }
  return x;
}

constexpr int kMaxNesting = 200;

class Parser {
 public:
  Parser(std::string_view text, int max_dim, detail::Program& prog)
      : text_(text), max_dim_(max_dim), prog_(prog) {}

  int parse() {
    skip_ws();
    if (at_end()) fail(Errc::syntax_error, "empty expression");
    const int root = expr();
    skip_ws();
    if (!at_end()) fail(Errc::syntax_error, std::string("unexpected '") + text_[pos_] + "'");
    return root;
  }

 private:
  std::string_view text_;
  int max_dim_;
  detail::Program& prog_;
  std::size_t pos_ = 0;
  int depth_ = 0;

  [[noreturn]] void fail(Errc code, const std::string& what) { fail_at(code, what, pos_); }
  [[noreturn]] void fail_at(Errc code, const std::string& what, std::size_t at) {
    throw Error(code, what + " at byte " + std::to_string(at), at);
  }

  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return at_end() ? '\0' : text_[pos_]; }
  void skip_ws() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip_ws();
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  int add(Node n) {
    prog_.nodes.push_back(std::move(n));
    return static_cast<int>(prog_.nodes.size()) - 1;
  }
  int binary(Op op, int l, int r) {
    Node n;
    n.op = op;
    n.lhs = l;
    n.rhs = r;
    return add(std::move(n));
  }
  int unary_node(Op op, int x) {
    Node n;
    n.op = op;
    n.lhs = x;
    return add(std::move(n));
  }

  struct DepthGuard {
    Parser& p;
    explicit DepthGuard(Parser& parser) : p(parser) {
      if (++p.depth_ > kMaxNesting) p.fail(Errc::syntax_error, "expression nested too deeply");
    }
    ~DepthGuard() { --p.depth_; }
  };

  int expr() {
    DepthGuard guard(*this);
    int lhs = term();
    for (;;) {
      if (accept('+')) lhs = binary(Op::add, lhs, term());
      else if (accept('-')) lhs = binary(Op::sub, lhs, term());
      else return lhs;
    }
  }

  int term() {
    int lhs = unary();
    for (;;) {
      if (accept('*')) lhs = binary(Op::mul, lhs, unary());
      else if (accept('/')) lhs = binary(Op::div, lhs, unary());
      else return lhs;
    }
  }

  int unary() {
    DepthGuard guard(*this);
    if (accept('-')) return unary_node(Op::neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  int exponent() {
    DepthGuard guard(*this);
    if (accept('-')) return unary_node(Op::neg, exponent());
    if (accept('+')) return exponent();
    return power();
  }

  int power() {
    const int base = primary();
    if (accept('^')) return binary(Op::pow, base, exponent());
    return base;
  }

  int primary() {
    skip_ws();
    if (at_end()) fail(Errc::syntax_error, "unexpected end of expression");
    const char c = peek();
    if (c == '(') {
      ++pos_;
      const int inner = expr();
      if (!accept(')')) fail(Errc::syntax_error, "expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail(Errc::syntax_error, std::string("unexpected '") + c + "'");
  }

  int number() {
    const std::size_t start = pos_;
    // Scan [digits][.digits][(e|E)[+-]digits] so that a bare trailing 'e' is left for the identifier rule.
    std::size_t end = pos_;
    while (end < text_.size() && std::isdigit(static_cast<unsigned char>(text_[end]))) ++end;
    if (end < text_.size() && text_[end] == '.') {
      ++end;
      while (end < text_.size() && std::isdigit(static_cast<unsigned char>(text_[end]))) ++end;
    }
    if (end < text_.size() && (text_[end] == 'e' || text_[end] == 'E')) {
      std::size_t e = end + 1;
      if (e < text_.size() && (text_[e] == '+' || text_[e] == '-')) ++e;
      if (e < text_.size() && std::isdigit(static_cast<unsigned char>(text_[e]))) {
        while (e < text_.size() && std::isdigit(static_cast<unsigned char>(text_[e]))) ++e;
        end = e;
      }
    }
    double v = 0.0;
    const auto res = std::from_chars(text_.data() + start, text_.data() + end, v);
    if (res.ec != std::errc() || res.ptr != text_.data() + end)
      fail_at(Errc::syntax_error, "malformed number", start);
    if (!std::isfinite(v)) fail_at(Errc::syntax_error, "number out of range", start);
    pos_ = end;
    Node n;
    n.op = Op::constant;
    n.value = v;
    return add(std::move(n));
  }

  int identifier() {
    const std::size_t start = pos_;
    while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')) ++pos_;
    const std::string_view id = text_.substr(start, pos_ - start);

    if (id == "pi" || id == "e") {
      Node n;
      n.op = Op::constant;
      n.value = id == "pi" ? std::numbers::pi : std::numbers::e;
      n.name = std::string(id);
      return add(std::move(n));
    }
    if (id.size() == 2 && id[0] == 'x' && id[1] >= '1' && id[1] <= '9') {
      const int k = id[1] - '0';
      if (k > max_dim_)
        fail_at(Errc::unknown_identifier, "unknown identifier '" + std::string(id) + "'", start);
      Node n;
      n.op = Op::variable;
      n.var = k;
      prog_.max_var = std::max(prog_.max_var, k);
      return add(std::move(n));
    }
    for (const auto& f : kFunctions) {
      if (f.name != id) continue;
      skip_ws();
      if (peek() != '(') fail(Errc::syntax_error, "expected '(' after " + std::string(id));
      const std::size_t open = pos_;
      ++pos_;
      skip_ws();
      if (peek() == ')') fail_at(Errc::arity_error, std::string(id) + " takes exactly one argument", open);
      const int arg = expr();
      int count = 1;
      while (accept(',')) {
        expr();
        ++count;
      }
      if (!accept(')')) fail(Errc::syntax_error, "expected ')'");
      if (count != 1)
        fail_at(Errc::arity_error,
                std::string(id) + " takes exactly one argument, got " + std::to_string(count), open);
      Node n;
      n.op = Op::func;
      n.fn = f.fn;
      n.lhs = arg;
      return add(std::move(n));
    }
    fail_at(Errc::unknown_identifier, "unknown identifier '" + std::string(id) + "'", start);
  }
};

void render(const detail::Program& prog, int node, std::string& out);

Op with_constant(Op op) {
  switch (op) {
    case Op::add: return Op::addc;
    case Op::sub: return Op::subc;
    case Op::mul: return Op::mulc;
    default: return Op::divc;
  }
}

struct Emitter {
  detail::Program& prog;
  std::unordered_map<std::string, int> calls;  // rendered call -> slot

  // A constant, possibly under negations.
  bool folded(int node, double& value) const {
    const Node& n = prog.nodes[static_cast<std::size_t>(node)];
    if (n.op == Op::constant) {
      value = n.value;
      return true;
    }
    if (n.op == Op::neg && folded(n.lhs, value)) {
      value = -value;
      return true;
    }
    return false;
  }

  std::size_t emit(int node) {
    const Node& n = prog.nodes[static_cast<std::size_t>(node)];
    if (double c; n.op == Op::neg && folded(node, c)) {
      prog.code.push_back({Op::constant, n.fn, 0, c});
      return 1;
    }
    switch (n.op) {
      case Op::constant:
      case Op::variable:
        prog.code.push_back({n.op, n.fn, n.var - 1, n.value});
        return 1;
      case Op::neg: {
        const std::size_t d = emit(n.lhs);
        prog.code.push_back({n.op, n.fn, 0, 0.0});
        return d;
      }
      case Op::func: {
        // Calls are pure, so identical ones are evaluated once.
        std::string key;
        render(prog, node, key);
        if (const auto it = calls.find(key); it != calls.end()) {
          prog.code.push_back({Op::load, n.fn, it->second, 0.0});
          return 1;
        }
        const std::size_t d = emit(n.lhs);
        const int slot = static_cast<int>(prog.slots++);
        prog.code.push_back({n.op, n.fn, 0, 0.0});
        prog.code.push_back({Op::store, n.fn, slot, 0.0});
        calls.emplace(std::move(key), slot);
        return d;
      }
      default: {
        double c = 0.0;
        if (folded(n.rhs, c)) {
          const std::size_t d = emit(n.lhs);
          if (n.op == Op::pow && c == 2.0) {
            prog.code.push_back({Op::powi, n.fn, 2, 0.0});
            return d;
          }
          if (n.op != Op::pow) {
            prog.code.push_back({with_constant(n.op), n.fn, 0, c});
            return d;
          }
          prog.code.push_back({Op::constant, n.fn, 0, c});
          prog.code.push_back({n.op, n.fn, 0, 0.0});
          return std::max<std::size_t>(d, 2);
        }
        if (folded(n.lhs, c) && (n.op == Op::add || n.op == Op::mul)) {
          // IEEE addition and multiplication commute exactly.
          const std::size_t d = emit(n.rhs);
          prog.code.push_back({with_constant(n.op), n.fn, 0, c});
          return d;
        }
        const std::size_t dl = emit(n.lhs);
        const std::size_t dr = emit(n.rhs);
        prog.code.push_back({n.op, n.fn, 0, 0.0});
        return std::max(dl, dr + 1);
      }
    }
  }
};

void render(const detail::Program& prog, int node, std::string& out) {
  const Node& n = prog.nodes[static_cast<std::size_t>(node)];
  switch (n.op) {
    case Op::constant: {
      if (!n.name.empty()) {
        out += n.name;
        return;
      }
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", n.value);
      out += buf;
      return;
    }
    case Op::variable:
      out += "x" + std::to_string(n.var);
      return;
    case Op::neg:
      out += "(-";
      render(prog, n.lhs, out);
      out += ")";
      return;
    case Op::func:
      out += fn_name(n.fn);
      out += "(";
      render(prog, n.lhs, out);
      out += ")";
      return;
    default: {
      const char* sym = n.op == Op::add ? " + " : n.op == Op::sub ? " - " : n.op == Op::mul ? " * "
                        : n.op == Op::div ? " / " : " ^ ";
      out += "(";
      render(prog, n.lhs, out);
      out += sym;
      render(prog, n.rhs, out);
      out += ")";
      return;
    }
  }
}

}  // namespace

ScalarField parse_expr(std::string_view text, int max_dim) {
  if (text.size() > kMaxExpressionBytes)
    throw Error(Errc::syntax_error, "expression exceeds 64 KiB", 0);
  auto prog = std::make_shared<detail::Program>();
  prog->source = std::string(text);
  Parser parser(text, max_dim, *prog);
  prog->root = parser.parse();
  prog->stack_depth = Emitter{*prog, {}}.emit(prog->root);
  return ScalarField(std::move(prog));
}

double ScalarField::operator()(std::span<const double> x) const {
  const auto& prog = *program_;
  constexpr std::size_t kInline = 64;
  double inline_stack[kInline];
  double inline_slots[kInline];
  std::vector<double> heap, heap_slots;
  double* stack = inline_stack;
  double* slots = inline_slots;
  if (prog.stack_depth > kInline) {
    heap.resize(prog.stack_depth);
    stack = heap.data();
  }
  if (prog.slots > kInline) {
    heap_slots.resize(prog.slots);
    slots = heap_slots.data();
  }
  std::size_t top = 0;
  for (const auto& ins : prog.code) {
    switch (ins.op) {
      case Op::constant: stack[top++] = ins.value; break;
      case Op::variable: stack[top++] = x[static_cast<std::size_t>(ins.var)]; break;
      case Op::neg: stack[top - 1] = -stack[top - 1]; break;
      case Op::func: stack[top - 1] = apply(ins.fn, stack[top - 1]); break;
      case Op::add: --top; stack[top - 1] += stack[top]; break;
      case Op::sub: --top; stack[top - 1] -= stack[top]; break;
      case Op::mul: --top; stack[top - 1] *= stack[top]; break;
      case Op::div: --top; stack[top - 1] /= stack[top]; break;
      case Op::pow: --top; stack[top - 1] = std::pow(stack[top - 1], stack[top]); break;
      case Op::load: stack[top++] = slots[ins.var]; break;
      case Op::store: slots[ins.var] = stack[top - 1]; break;
      case Op::powi: stack[top - 1] *= stack[top - 1]; break;
      case Op::addc: stack[top - 1] += ins.value; break;
      case Op::subc: stack[top - 1] -= ins.value; break;
      case Op::mulc: stack[top - 1] *= ins.value; break;
      case Op::divc: stack[top - 1] /= ins.value; break;
    }
  }
  return stack[0];
}

std::string ScalarField::to_string() const {
  std::string out;
  render(*program_, program_->root, out);
  return out;
}

const std::string& ScalarField::source() const { return program_->source; }

int ScalarField::max_variable() const { return program_->max_var; }

}  // namespace conefield
