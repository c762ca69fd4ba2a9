#include "perfmod/kernels.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "perfmod/errors.hpp"

namespace perfmod {

// ---------------------------------------------------------------------------
// Flop expression parsing and evaluation

struct FlopExpr::Node {
  enum Kind { Num, Var, Add, Sub, Mul, Div, Pow } kind;
  Rational value;       // Num
  std::string var;      // Var
  std::shared_ptr<const Node> lhs, rhs;
};

namespace {

class ExprParser {
public:
  explicit ExprParser(const std::string& text) : text_(text) {}

  std::shared_ptr<const FlopExpr::Node> parse() {
    auto e = expr();
    skip_ws();
    if (pos_ != text_.size())
      throw InputError("trailing characters in flop formula: '" + text_.substr(pos_) + "'");
    return e;
  }

private:
  using NodePtr = std::shared_ptr<const FlopExpr::Node>;

  NodePtr make(FlopExpr::Node::Kind k, NodePtr l, NodePtr r) {
    auto n = std::make_shared<FlopExpr::Node>();
    n->kind = k;
    n->lhs = std::move(l);
    n->rhs = std::move(r);
    return n;
  }

  NodePtr expr() {
    auto lhs = term();
    for (;;) {
      skip_ws();
      if (accept('+')) lhs = make(FlopExpr::Node::Add, lhs, term());
      else if (accept('-')) lhs = make(FlopExpr::Node::Sub, lhs, term());
      else return lhs;
    }
  }

  NodePtr term() {
    auto lhs = factor();
    for (;;) {
      skip_ws();
      if (accept('*')) lhs = make(FlopExpr::Node::Mul, lhs, factor());
      else if (accept('/')) lhs = make(FlopExpr::Node::Div, lhs, factor());
      else return lhs;
    }
  }

  NodePtr factor() {
    auto base = atom();
    skip_ws();
    if (accept('^')) return make(FlopExpr::Node::Pow, base, atom());
    return base;
  }

  NodePtr atom() {
    skip_ws();
    if (accept('(')) {
      auto e = expr();
      skip_ws();
      if (!accept(')')) throw InputError("missing ')' in flop formula");
      return e;
    }
    if (accept('-')) {
      auto zero = std::make_shared<FlopExpr::Node>();
      zero->kind = FlopExpr::Node::Num;
      zero->value = Rational(0);
      return make(FlopExpr::Node::Sub, zero, atom());
    }
    if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      long long v = 0;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
        v = v * 10 + (text_[pos_++] - '0');
      auto n = std::make_shared<FlopExpr::Node>();
      n->kind = FlopExpr::Node::Num;
      n->value = Rational(v);
      return n;
    }
    if (pos_ < text_.size() &&
        (std::isalpha(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      std::string name;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        name += text_[pos_++];
      auto n = std::make_shared<FlopExpr::Node>();
      n->kind = FlopExpr::Node::Var;
      n->var = std::move(name);
      return n;
    }
    throw InputError("unexpected character in flop formula: '" + text_.substr(pos_, 1) + "'");
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    if (pos_ < text_.size() && text_[pos_] == c) { ++pos_; return true; }
    return false;
  }

  const std::string& text_;
  size_t pos_{0};
};

Rational eval_node(const FlopExpr::Node& n, const Point& sizes) {
  using K = FlopExpr::Node;
  switch (n.kind) {
    case K::Num: return n.value;
    case K::Var: {
      auto it = sizes.find(n.var);
      if (it == sizes.end())
        throw InputError("flop formula references unbound size '" + n.var + "'");
      return Rational(it->second);
    }
    case K::Add: return eval_node(*n.lhs, sizes) + eval_node(*n.rhs, sizes);
    case K::Sub: return eval_node(*n.lhs, sizes) - eval_node(*n.rhs, sizes);
    case K::Mul: return eval_node(*n.lhs, sizes) * eval_node(*n.rhs, sizes);
    case K::Div: return eval_node(*n.lhs, sizes) / eval_node(*n.rhs, sizes);
    case K::Pow: {
      Rational e = eval_node(*n.rhs, sizes);
      if (!e.is_integer()) throw InputError("non-integer exponent in flop formula");
      return eval_node(*n.lhs, sizes).pow(e.num());
    }
  }
  throw InputError("corrupt flop expression");
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

}  // namespace

FlopExpr FlopExpr::parse(const std::string& text) {
  FlopExpr e;
  e.root_ = ExprParser(text).parse();
  e.text_ = trim(text);
  return e;
}

Rational FlopExpr::eval(const Point& sizes) const {
  if (!root_) throw InputError("empty flop formula");
  return eval_node(*root_, sizes);
}

// ---------------------------------------------------------------------------
// Signatures and registry

bool KernelSignature::has_flag(const std::string& flag, const std::string& value) const {
  for (const auto& f : flag_params)
    if (f.name == flag)
      return std::find(f.values.begin(), f.values.end(), value) != f.values.end();
  return false;
}

void KernelRegistry::add(KernelSignature sig) {
  if (sig.name.empty()) throw InputError("kernel with empty name");
  if (sig.size_params.empty())
    throw InputError("kernel " + sig.name + " declares no size parameters");
  for (const auto& f : sig.flag_params)
    if (f.values.empty())
      throw InputError("kernel " + sig.name + " flag " + f.name + " has empty value set");
  if (sig.flop_rules.empty())
    throw InputError("kernel " + sig.name + " has no flop formula");
  if (kernels_.count(sig.name))
    throw InputError("duplicate kernel name: " + sig.name);
  kernels_.emplace(sig.name, std::move(sig));
}

const KernelSignature& KernelRegistry::get(const std::string& name) const {
  auto it = kernels_.find(name);
  if (it == kernels_.end()) throw InputError("unknown kernel: " + name);
  return it->second;
}

bool KernelRegistry::contains(const std::string& name) const {
  return kernels_.count(name) != 0;
}

std::vector<std::string> KernelRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : kernels_) out.push_back(k);
  return out;
}

KernelRegistry KernelRegistry::parse(std::istream& in, const std::string& origin) {
  KernelRegistry reg;
  KernelSignature cur;
  bool open = false;
  std::string line;
  int lineno = 0;

  auto flush = [&] {
    if (open) reg.add(std::move(cur));
    cur = KernelSignature{};
    open = false;
  };

  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto fail = [&](const std::string& msg) {
      throw InputError(origin + ":" + std::to_string(lineno) + ": " + msg);
    };
    if (t.rfind("kernel ", 0) == 0) {
      flush();
      cur.name = trim(t.substr(7));
      if (cur.name.empty()) fail("kernel record without a name");
      open = true;
    } else if (t.rfind("flag ", 0) == 0) {
      if (!open) fail("flag declaration outside a kernel record");
      size_t brace = t.find('{');
      size_t close = t.find('}');
      if (brace == std::string::npos || close == std::string::npos || close < brace)
        fail("flag declaration needs a {a,b,...} value set");
      FlagDecl f;
      f.name = trim(t.substr(5, brace - 5));
      for (const auto& v : split(t.substr(brace + 1, close - brace - 1), ','))
        if (!v.empty()) f.values.push_back(v);
      if (f.name.empty() || f.values.empty()) fail("malformed flag declaration");
      cur.flag_params.push_back(std::move(f));
    } else if (t.rfind("size ", 0) == 0) {
      if (!open) fail("size declaration outside a kernel record");
      for (const auto& s : split(t.substr(5), ','))
        if (!s.empty()) cur.size_params.push_back(s);
    } else if (t.rfind("flops", 0) == 0) {
      if (!open) fail("flops declaration outside a kernel record");
      std::string rest = trim(t.substr(5));
      FlopRule rule;
      if (!rest.empty() && rest[0] == '[') {
        size_t close = rest.find(']');
        if (close == std::string::npos) fail("unterminated flops guard");
        for (const auto& g : split(rest.substr(1, close - 1), ',')) {
          size_t eq = g.find('=');
          if (eq == std::string::npos) fail("flops guard must be flag=value");
          rule.guard[trim(g.substr(0, eq))] = trim(g.substr(eq + 1));
        }
        rest = trim(rest.substr(close + 1));
      }
      try {
        rule.formula = FlopExpr::parse(rest);
      } catch (const InputError& e) {
        fail(e.what());
      }
      cur.flop_rules.push_back(std::move(rule));
    } else {
      fail("unrecognized registry line: '" + t + "'");
    }
  }
  flush();
  return reg;
}

KernelRegistry KernelRegistry::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open kernel registry: " + path);
  return parse(in, path);
}

namespace {

constexpr const char* kBuiltinRegistry = R"(
kernel GEMM
flag transa {N,T}
flag transb {N,T}
size m, n, k
flops 2*m*n*k

kernel TRMM
flag side {L,R}
flag uplo {L,U}
flag transa {N,T}
flag diag {N,U}
size m, n
flops[side=L] n*m^2
flops[side=R] m*n^2

kernel TRSM
flag side {L,R}
flag uplo {L,U}
flag transa {N,T}
flag diag {N,U}
size m, n
flops[side=L] n*m^2
flops[side=R] m*n^2

kernel TRTRI
flag uplo {L,U}
flag diag {N,U}
size n
flops n^3/3

kernel TRSYL-UNB
flag trana {N,T}
flag tranb {N,T}
size m, n
flops m*n*(m+n)
)";

}  // namespace

KernelRegistry KernelRegistry::builtin() {
  std::istringstream in(kBuiltinRegistry);
  return parse(in, "<builtin>");
}

// ---------------------------------------------------------------------------
// Operations

Rational flops(const KernelSignature& kernel, const FlagBinding& binding,
               const Point& sizes) {
  for (const auto& f : kernel.flag_params) {
    auto it = binding.find(f.name);
    if (it == binding.end())
      throw InputError(kernel.name + ": flag '" + f.name + "' not bound");
    if (std::find(f.values.begin(), f.values.end(), it->second) == f.values.end())
      throw InputError(kernel.name + ": flag " + f.name + "=" + it->second +
                       " not in allowed set");
  }
  for (const auto& s : kernel.size_params) {
    auto it = sizes.find(s);
    if (it == sizes.end())
      throw InputError(kernel.name + ": size '" + s + "' not bound");
    if (it->second < 1)
      throw InputError(kernel.name + ": size " + s + "=" + std::to_string(it->second) +
                       " must be >= 1");
  }
  for (const auto& rule : kernel.flop_rules) {
    bool matches = true;
    for (const auto& [flag, value] : rule.guard) {
      auto it = binding.find(flag);
      if (it == binding.end() || it->second != value) { matches = false; break; }
    }
    if (matches) return rule.formula.eval(sizes);
  }
  throw InputError(kernel.name + ": no flop rule matches flags " + flag_string(binding));
}

double efficiency(double time_seconds, double flop_count,
                  const MachineProfile& profile, int threads, bool* warn_over_peak) {
  if (time_seconds <= 0) throw InputError("efficiency: time must be > 0");
  if (threads < 1 || threads > profile.core_count)
    throw InputError("efficiency: threads out of range for profile " + profile.id);
  double e = flop_count / (time_seconds * profile.peak_flops_per_core * threads);
  if (warn_over_peak) *warn_over_peak = e > 1.0;
  return e;
}

void MachineProfile::validate() const {
  if (id.empty()) throw InputError("machine profile without id");
  if (peak_flops_per_core <= 0) throw InputError("machine profile: peak_flops_per_core must be > 0");
  if (core_count < 1) throw InputError("machine profile: core_count must be >= 1");
  if (timer_floor <= 0) throw InputError("machine profile: timer_floor must be > 0");
}

MachineProfile MachineProfile::parse(std::istream& in, const std::string& origin) {
  MachineProfile p;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw InputError(origin + ":" + std::to_string(lineno) + ": expected key=value");
    std::string key = trim(t.substr(0, eq)), value = trim(t.substr(eq + 1));
    try {
      if (key == "id") p.id = value;
      else if (key == "peak_flops_per_core") p.peak_flops_per_core = std::stod(value);
      else if (key == "core_count") p.core_count = std::stoi(value);
      else if (key == "timer_floor") p.timer_floor = std::stod(value);
      else throw InputError("unknown machine profile key: " + key);
    } catch (const std::invalid_argument&) {
      throw InputError(origin + ":" + std::to_string(lineno) + ": bad value for " + key);
    }
  }
  p.validate();
  return p;
}

MachineProfile MachineProfile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open machine profile: " + path);
  return parse(in, path);
}

std::string flag_string(const FlagBinding& binding, char sep) {
  std::string out;
  for (const auto& [k, v] : binding) {  // std::map iterates sorted
    if (!out.empty()) out += sep;
    out += k + "=" + v;
  }
  return out;
}

FlagBinding parse_flag_string(const std::string& text) {
  FlagBinding b;
  if (trim(text).empty()) return b;
  for (const auto& part : split(text, ',')) {
    size_t eq = part.find('=');
    if (eq == std::string::npos)
      throw InputError("flag binding must be name=value: '" + part + "'");
    b[trim(part.substr(0, eq))] = trim(part.substr(eq + 1));
  }
  return b;
}

std::string point_string(const Point& p) {
  std::string out;
  for (const auto& [k, v] : p) {
    if (!out.empty()) out += ",";
    out += k + "=" + std::to_string(v);
  }
  return out;
}

}  // namespace perfmod
