#ifndef VTOL_MODEL_HPP_
#define VTOL_MODEL_HPP_

#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace vtol {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class VarKind { kContinuous, kBinary };
enum class Relation { kLessEqual, kEqual, kGreaterEqual };

struct Variable {
  std::string name;
  VarKind kind = VarKind::kContinuous;
  double lower = 0.0;
  double upper = kInfinity;
};

struct Term {
  int var = 0;
  double coef = 0.0;
};

struct Constraint {
  std::string name;
  std::vector<Term> terms;
  Relation relation = Relation::kLessEqual;
  double rhs = 0.0;
};

// A minimization problem with linear rows and per-variable bounds.
struct MilpModel {
  std::vector<Variable> variables;
  std::vector<Constraint> constraints;
  std::vector<double> objective;  // one coefficient per variable

  int add_variable(std::string name, VarKind kind, double lower, double upper) {
    if (kind == VarKind::kBinary) {
      lower = 0.0;
      upper = 1.0;
    }
    variables.push_back({std::move(name), kind, lower, upper});
    objective.push_back(0.0);
    return static_cast<int>(variables.size()) - 1;
  }

  void add_constraint(std::string name, std::vector<Term> terms, Relation rel, double rhs) {
    constraints.push_back({std::move(name), std::move(terms), rel, rhs});
  }

  int num_variables() const { return static_cast<int>(variables.size()); }
  int num_constraints() const { return static_cast<int>(constraints.size()); }

  int count(VarKind kind) const {
    int n = 0;
    for (const auto& v : variables) n += v.kind == kind;
    return n;
  }

  double evaluate_objective(const std::vector<double>& x) const {
    double z = 0.0;
    for (std::size_t j = 0; j < objective.size(); ++j) z += objective[j] * x[j];
    return z;
  }

  // Largest violation of any row or bound at point x.
  double max_violation(const std::vector<double>& x) const {
    double worst = 0.0;
    for (const auto& c : constraints) {
      double lhs = 0.0;
      for (const auto& t : c.terms) lhs += t.coef * x[t.var];
      double viol = 0.0;
      switch (c.relation) {
        case Relation::kLessEqual: viol = lhs - c.rhs; break;
        case Relation::kGreaterEqual: viol = c.rhs - lhs; break;
        case Relation::kEqual: viol = std::abs(lhs - c.rhs); break;
      }
      worst = std::max(worst, viol);
    }
    for (std::size_t j = 0; j < variables.size(); ++j) {
      worst = std::max(worst, variables[j].lower - x[j]);
      worst = std::max(worst, x[j] - variables[j].upper);
    }
    return worst;
  }

  // Every row references declared variables; binaries have integral bounds
  // inside [0, 1] (a binary may be fixed).
  void check() const {
    if (objective.size() != variables.size()) {
      throw std::logic_error("objective size does not match variable count");
    }
    for (const auto& c : constraints) {
      for (const auto& t : c.terms) {
        if (t.var < 0 || t.var >= num_variables()) {
          throw std::logic_error("constraint " + c.name + " references an undeclared variable");
        }
      }
    }
    for (const auto& v : variables) {
      bool ok = (v.lower == 0.0 || v.lower == 1.0) && (v.upper == 0.0 || v.upper == 1.0) &&
                v.lower <= v.upper;
      if (v.kind == VarKind::kBinary && !ok) {
        throw std::logic_error("binary " + v.name + " must have bounds within [0, 1]");
      }
    }
  }
};

// ---------------------------------------------------------------------------
// LP text format (CPLEX-style subset): Minimize / Subject To / Bounds /
// Binaries / End. Numbers are written with 17 significant digits so a model
// survives a write/read cycle bit for bit.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string lp_number(double v) {
  if (v == kInfinity) return "+inf";
  if (v == -kInfinity) return "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_linear(std::ostream& os, const MilpModel& m, const std::vector<Term>& terms) {
  bool first = true;
  int on_line = 0;
  for (const auto& t : terms) {
    if (!first) os << (std::signbit(t.coef) ? " - " : " + ");
    else if (std::signbit(t.coef)) os << "-";
    os << lp_number(std::abs(t.coef)) << ' ' << m.variables[t.var].name;
    first = false;
    if (++on_line == 6) {
      os << "\n   ";
      on_line = 0;
    }
  }
  if (first) os << "0 " << m.variables.front().name;
}

}  // namespace detail

inline void write_lp(std::ostream& os, const MilpModel& m) {
  os << "\\ mixed-integer linear program\n";
  os << "Minimize\n obj: ";
  // Every variable is listed (zeros included) so that a reader declares them
  // in the original order.
  std::vector<Term> obj;
  for (int j = 0; j < m.num_variables(); ++j) obj.push_back({j, m.objective[j]});
  detail::write_linear(os, m, obj);
  os << "\nSubject To\n";
  for (const auto& c : m.constraints) {
    os << ' ' << c.name << ": ";
    detail::write_linear(os, m, c.terms);
    const char* rel = c.relation == Relation::kLessEqual      ? "<="
                      : c.relation == Relation::kGreaterEqual ? ">="
                                                              : "=";
    os << ' ' << rel << ' ' << detail::lp_number(c.rhs) << '\n';
  }
  os << "Bounds\n";
  for (const auto& v : m.variables) {
    if (v.kind == VarKind::kBinary && v.lower == 0.0 && v.upper == 1.0) continue;
    if (v.lower == -kInfinity && v.upper == kInfinity) {
      os << ' ' << v.name << " free\n";
    } else {
      os << ' ' << detail::lp_number(v.lower) << " <= " << v.name
         << " <= " << detail::lp_number(v.upper) << '\n';
    }
  }
  os << "Binaries\n";
  for (const auto& v : m.variables) {
    if (v.kind == VarKind::kBinary) os << ' ' << v.name << '\n';
  }
  os << "End\n";
}

namespace detail {

inline double parse_lp_number(const std::string& tok) {
  if (tok == "+inf" || tok == "inf" || tok == "+infinity" || tok == "infinity") return kInfinity;
  if (tok == "-inf" || tok == "-infinity") return -kInfinity;
  std::size_t used = 0;
  double v = std::stod(tok, &used);
  if (used != tok.size()) throw std::invalid_argument("bad number '" + tok + "'");
  return v;
}

inline bool is_number_token(const std::string& tok) {
  if (tok.empty()) return false;
  char c = tok[0];
  return std::isdigit(static_cast<unsigned char>(c)) || c == '.' ||
         ((c == '-' || c == '+') && tok.size() > 1);
}

}  // namespace detail

// Reads the subset written by write_lp. Variables are declared in order of
// first appearance: objective, rows, bounds, binaries.
inline MilpModel read_lp(std::istream& is) {
  enum class Section { kNone, kObjective, kRows, kBounds, kBinaries, kEnd };
  MilpModel m;
  std::map<std::string, int> index;
  std::vector<char> bounded;
  auto var = [&](const std::string& name) {
    auto it = index.find(name);
    if (it != index.end()) return it->second;
    int j = m.add_variable(name, VarKind::kContinuous, 0.0, kInfinity);
    index.emplace(name, j);
    bounded.push_back(0);
    return j;
  };

  // Gather the token stream per section; rows may span several lines.
  Section section = Section::kNone;
  std::vector<std::string> objective_tokens;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> current;
  std::vector<std::vector<std::string>> bound_lines;
  std::vector<std::string> binary_names;
  std::string line;
  auto flush_row = [&] {
    if (!current.empty()) rows.push_back(current);
    current.clear();
  };
  while (std::getline(is, line)) {
    auto bs = line.find('\\');
    if (bs != std::string::npos) line.erase(bs);
    std::istringstream ls(line);
    std::vector<std::string> toks;
    for (std::string t; ls >> t;) toks.push_back(t);
    if (toks.empty()) continue;
    const std::string& head = toks[0];
    if (head == "Minimize") { section = Section::kObjective; continue; }
    if (head == "Subject" || head == "st") { section = Section::kRows; continue; }
    if (head == "Bounds") { flush_row(); section = Section::kBounds; continue; }
    if (head == "Binaries" || head == "Binary") { flush_row(); section = Section::kBinaries; continue; }
    if (head == "End") { flush_row(); section = Section::kEnd; break; }
    switch (section) {
      case Section::kObjective:
        objective_tokens.insert(objective_tokens.end(), toks.begin(), toks.end());
        break;
      case Section::kRows:
        if (head.back() == ':') flush_row();
        current.insert(current.end(), toks.begin(), toks.end());
        break;
      case Section::kBounds:
        bound_lines.push_back(toks);
        break;
      case Section::kBinaries:
        binary_names.insert(binary_names.end(), toks.begin(), toks.end());
        break;
      default:
        throw std::invalid_argument("LP text outside of any section: " + line);
    }
  }
  if (section != Section::kEnd) throw std::invalid_argument("LP text lacks End");

  // "[-]coef name (+|-) coef name ..." into terms.
  auto parse_terms = [&](const std::vector<std::string>& toks, std::size_t from,
                         std::size_t to) {
    std::vector<Term> terms;
    double sign = 1.0;
    for (std::size_t i = from; i < to; ++i) {
      const std::string& t = toks[i];
      if (t == "+") { sign = 1.0; continue; }
      if (t == "-") { sign = -1.0; continue; }
      double coef = 1.0;
      std::string name = t;
      if (detail::is_number_token(t)) {
        coef = detail::parse_lp_number(t);
        if (++i >= to) throw std::invalid_argument("coefficient without variable");
        name = toks[i];
      } else if (t[0] == '-') {
        coef = -1.0;
        name = t.substr(1);
      }
      terms.push_back({var(name), sign * coef});
      sign = 1.0;
    }
    return terms;
  };

  if (objective_tokens.empty()) throw std::invalid_argument("missing objective");
  std::size_t start = objective_tokens[0].back() == ':' ? 1 : 0;
  std::vector<Term> obj = parse_terms(objective_tokens, start, objective_tokens.size());

  for (const auto& toks : rows) {
    if (toks.size() < 4 || toks[0].back() != ':') {
      throw std::invalid_argument("row without a name");
    }
    std::size_t rel_pos = toks.size() - 2;
    const std::string& rel = toks[rel_pos];
    Relation r;
    if (rel == "<=") r = Relation::kLessEqual;
    else if (rel == ">=") r = Relation::kGreaterEqual;
    else if (rel == "=") r = Relation::kEqual;
    else throw std::invalid_argument("bad relation '" + rel + "'");
    std::vector<Term> terms = parse_terms(toks, 1, rel_pos);
    m.add_constraint(toks[0].substr(0, toks[0].size() - 1), std::move(terms), r,
                     detail::parse_lp_number(toks.back()));
  }
  for (const auto& toks : bound_lines) {
    if (toks.size() == 2 && toks[1] == "free") {
      int j = var(toks[0]);
      m.variables[j].lower = -kInfinity;
      m.variables[j].upper = kInfinity;
      bounded[j] = 1;
    } else if (toks.size() == 5 && toks[1] == "<=" && toks[3] == "<=") {
      int j = var(toks[2]);
      m.variables[j].lower = detail::parse_lp_number(toks[0]);
      m.variables[j].upper = detail::parse_lp_number(toks[4]);
      bounded[j] = 1;
    } else {
      throw std::invalid_argument("unsupported bound line for " + toks[0]);
    }
  }
  for (const auto& name : binary_names) {
    int j = var(name);
    m.variables[j].kind = VarKind::kBinary;
    if (!bounded[j]) {
      m.variables[j].lower = 0.0;
      m.variables[j].upper = 1.0;
    }
  }
  for (const auto& t : obj) m.objective[t.var] += t.coef;
  return m;
}

}  // namespace vtol

#endif  // VTOL_MODEL_HPP_
