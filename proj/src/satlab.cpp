#include "carvelab/satlab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "carvelab/error.hpp"
#include "carvelab/parallel.hpp"

namespace carvelab {

void validate(const CnfFormula& f) {
  for (const auto& c : f.clauses) {
    if (c.empty()) throw InvalidSize("empty clause");
    for (int lit : c)
      if (lit == 0 || static_cast<std::size_t>(std::abs(lit)) > f.n)
        throw InvalidSize("literal " + std::to_string(lit) + " outside 1.." + std::to_string(f.n));
  }
}

CnfFormula random_3sat(std::size_t n, std::size_t m, Rng& rng) {
  if (n < 3) throw InvalidSize("random 3-SAT needs at least 3 variables");
  CnfFormula f;
  f.n = n;
  f.clauses.reserve(m);
  for (std::size_t k = 0; k < m; ++k) {
    std::vector<int> clause;
    while (clause.size() < 3) {
      const int v = static_cast<int>(rng() % n) + 1;
      if (std::any_of(clause.begin(), clause.end(), [&](int l) { return std::abs(l) == v; })) continue;
      clause.push_back(v);
    }
    for (auto& l : clause)
      if (rng() >> 63) l = -l;
    f.clauses.push_back(std::move(clause));
  }
  return f;
}

std::string_view status_name(SatStatus s) {
  switch (s) {
    case SatStatus::Sat: return "SAT";
    case SatStatus::Unsat: return "UNSAT";
    case SatStatus::Timeout: return "TIMEOUT";
  }
  return "?";
}

namespace {

struct BudgetExhausted {};

class Dpll {
 public:
  Dpll(const CnfFormula& f, std::uint64_t budget)
      : f_(f), budget_(budget), value_(f.n + 1, 0), occurs_(2 * (f.n + 1)) {
    sat_count_.assign(f.clauses.size(), 0);
    free_count_.resize(f.clauses.size());
    for (std::size_t c = 0; c < f.clauses.size(); ++c) {
      // Duplicate literals inside a clause count once.
      auto lits = f.clauses[c];
      std::sort(lits.begin(), lits.end());
      lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
      clauses_.push_back(lits);
      free_count_[c] = lits.size();
      for (int l : lits) occurs_[slot(l)].push_back(c);
    }
  }

  SatResult run() {
    SatResult r;
    try {
      bool ok = true;
      for (std::size_t c = 0; c < clauses_.size() && ok; ++c)
        if (clauses_[c].size() == 1) ok = assign(clauses_[c][0]);
      r.status = ok && search() ? SatStatus::Sat : SatStatus::Unsat;
    } catch (const BudgetExhausted&) {
      r.status = SatStatus::Timeout;
    }
    r.nodes = nodes_;
    if (r.status == SatStatus::Sat) {
      r.assignment.assign(f_.n + 1, false);
      // Unconstrained variables default to true.
      for (std::size_t v = 1; v <= f_.n; ++v) r.assignment[v] = value_[v] >= 0;
    }
    return r;
  }

 private:
  std::size_t slot(int lit) const { return 2 * static_cast<std::size_t>(std::abs(lit)) + (lit < 0); }
  int lit_value(int lit) const { return lit > 0 ? value_[lit] : -value_[-lit]; }

  // Sets lit true, queueing newly unit clauses; false on conflict.
  bool assign(int lit) {
    const int v = std::abs(lit);
    if (value_[v] != 0) return lit_value(lit) > 0;
    value_[v] = lit > 0 ? 1 : -1;
    trail_.push_back(lit);
    bool ok = true;
    for (auto c : occurs_[slot(lit)]) {
      ++sat_count_[c];
      --free_count_[c];
    }
    for (auto c : occurs_[slot(-lit)]) {
      --free_count_[c];
      if (sat_count_[c] == 0) {
        if (free_count_[c] == 0) ok = false;
        else if (free_count_[c] == 1) units_.push_back(c);
      }
    }
    return ok;
  }

  void undo(std::size_t mark) {
    while (trail_.size() > mark) {
      const int lit = trail_.back();
      trail_.pop_back();
      for (auto c : occurs_[slot(lit)]) {
        --sat_count_[c];
        ++free_count_[c];
      }
      for (auto c : occurs_[slot(-lit)]) ++free_count_[c];
      value_[std::abs(lit)] = 0;
    }
  }

  bool propagate() {
    while (!units_.empty()) {
      const auto c = units_.back();
      units_.pop_back();
      if (sat_count_[c] > 0) continue;
      if (free_count_[c] == 0) {
        units_.clear();
        return false;
      }
      for (int l : clauses_[c])
        if (value_[std::abs(l)] == 0) {
          if (!assign(l)) {
            units_.clear();
            return false;
          }
          break;
        }
    }
    return true;
  }

  void eliminate_pure() {
    for (std::size_t v = 1; v <= f_.n; ++v) {
      if (value_[v] != 0) continue;
      const int lv = static_cast<int>(v);
      bool pos = false, neg = false;
      for (auto c : occurs_[slot(lv)])
        if (sat_count_[c] == 0) {
          pos = true;
          break;
        }
      for (auto c : occurs_[slot(-lv)])
        if (sat_count_[c] == 0) {
          neg = true;
          break;
        }
      if (pos != neg) assign(pos ? lv : -lv);  // a pure literal never conflicts
    }
  }

  bool search() {
    if (++nodes_ > budget_) throw BudgetExhausted{};
    if (!propagate()) return false;
    eliminate_pure();
    if (!propagate()) return false;

    // Branch on the literal occurring most often in the shortest open clauses.
    std::size_t shortest = std::numeric_limits<std::size_t>::max();
    for (std::size_t c = 0; c < clauses_.size(); ++c)
      if (sat_count_[c] == 0) shortest = std::min(shortest, free_count_[c]);
    if (shortest == std::numeric_limits<std::size_t>::max()) return true;
    std::vector<std::size_t> score(2 * (f_.n + 1), 0);
    for (std::size_t c = 0; c < clauses_.size(); ++c) {
      if (sat_count_[c] != 0 || free_count_[c] != shortest) continue;
      for (int l : clauses_[c])
        if (value_[std::abs(l)] == 0) ++score[slot(l)];
    }
    int best = 0;
    std::size_t best_score = 0;
    for (std::size_t v = 1; v <= f_.n; ++v) {
      const int lv = static_cast<int>(v);
      const std::size_t s = score[slot(lv)] + score[slot(-lv)];
      if (s > best_score) {
        best_score = s;
        best = score[slot(lv)] >= score[slot(-lv)] ? lv : -lv;
      }
    }
    const std::size_t mark = trail_.size();
    for (int lit : {best, -best}) {
      if (assign(lit) && search()) return true;
      units_.clear();
      undo(mark);
    }
    return false;
  }

  const CnfFormula& f_;
  std::uint64_t budget_;
  std::uint64_t nodes_ = 0;
  std::vector<int> value_;
  std::vector<std::vector<std::size_t>> occurs_;
  std::vector<std::vector<int>> clauses_;
  std::vector<std::size_t> sat_count_, free_count_;
  std::vector<int> trail_;
  std::vector<std::size_t> units_;
};

}  // namespace

SatResult dpll_solve(const CnfFormula& f, std::uint64_t budget) {
  validate(f);
  return Dpll(f, budget).run();
}

bool satisfies(const CnfFormula& f, const std::vector<bool>& assignment) {
  if (assignment.size() != f.n + 1) return false;
  for (const auto& c : f.clauses) {
    bool ok = false;
    for (int l : c)
      if (assignment[std::abs(l)] == (l > 0)) {
        ok = true;
        break;
      }
    if (!ok) return false;
  }
  return true;
}

bool brute_force_satisfiable(const CnfFormula& f) {
  validate(f);
  if (f.n > 20) throw InvalidSize("brute force is limited to 20 variables");
  std::vector<std::uint32_t> pos(f.clauses.size(), 0), neg(f.clauses.size(), 0);
  for (std::size_t c = 0; c < f.clauses.size(); ++c)
    for (int l : f.clauses[c]) (l > 0 ? pos[c] : neg[c]) |= 1u << (std::abs(l) - 1);
  for (std::uint32_t bits = 0; bits < (1u << f.n); ++bits) {
    bool all = true;
    for (std::size_t c = 0; c < f.clauses.size() && all; ++c) all = (bits & pos[c]) || (~bits & neg[c]);
    if (all) return true;
  }
  return false;
}

std::string to_dimacs(const CnfFormula& f) {
  std::ostringstream os;
  os << "p cnf " << f.n << ' ' << f.clauses.size() << '\n';
  for (const auto& c : f.clauses) {
    for (int l : c) os << l << ' ';
    os << "0\n";
  }
  return os.str();
}

CnfFormula parse_dimacs(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  CnfFormula f;
  bool header = false;
  std::size_t declared = 0;
  std::vector<int> clause;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == 'c' || line[0] == '%') continue;
    std::istringstream ls(line);
    if (line[0] == 'p') {
      std::string p, cnf;
      if (!(ls >> p >> cnf >> f.n >> declared) || cnf != "cnf") throw ParseError("bad DIMACS header: " + line);
      header = true;
      continue;
    }
    if (!header) throw ParseError("clause before the 'p cnf' header");
    int lit = 0;
    while (ls >> lit) {
      if (lit == 0) {
        f.clauses.push_back(std::move(clause));
        clause.clear();
      } else {
        clause.push_back(lit);
      }
    }
    if (!ls.eof()) throw ParseError("non-integer token in clause line: " + line);
  }
  if (!header) throw ParseError("missing 'p cnf' header");
  if (!clause.empty()) f.clauses.push_back(std::move(clause));
  if (f.clauses.size() != declared)
    throw ParseError("header declares " + std::to_string(declared) + " clauses, found " +
                     std::to_string(f.clauses.size()));
  try {
    validate(f);
  } catch (const InvalidSize& e) {
    throw ParseError(e.what());
  }
  return f;
}

std::vector<SweepRow> phase_sweep(std::size_t n, const std::vector<double>& alphas, std::size_t trials,
                                  std::uint64_t seed, std::uint64_t budget) {
  std::vector<SweepRow> rows;
  for (std::size_t a = 0; a < alphas.size(); ++a) {
    if (!(alphas[a] > 0.0)) throw PreconditionViolation("alpha values must be positive");
    SweepRow row;
    row.alpha = alphas[a];
    row.m = static_cast<std::size_t>(std::llround(alphas[a] * static_cast<double>(n)));
    const Rng root(seed, a);
    std::vector<SatResult> results(trials);
    parallel_for(trials, [&](std::size_t t) {
      Rng rng = root.substream(t);
      const auto f = random_3sat(n, row.m, rng);
      results[t] = dpll_solve(f, budget);
      if (results[t].status == SatStatus::Sat && !satisfies(f, results[t].assignment))
        throw Error("solver returned an assignment that does not satisfy the formula");
    });
    std::vector<double> nodes;
    for (const auto& r : results) {
      if (r.status == SatStatus::Sat) ++row.sat;
      else if (r.status == SatStatus::Unsat) ++row.unsat;
      else ++row.timeouts;
      nodes.push_back(static_cast<double>(r.nodes));
    }
    const std::size_t decided = row.sat + row.unsat;
    row.fraction = decided == 0 ? std::nan("") : static_cast<double>(row.sat) / static_cast<double>(decided);
    if (!nodes.empty()) {
      std::sort(nodes.begin(), nodes.end());
      const std::size_t mid = nodes.size() / 2;
      row.median_nodes = nodes.size() % 2 ? nodes[mid] : 0.5 * (nodes[mid - 1] + nodes[mid]);
    }
    rows.push_back(row);
  }
  return rows;
}

double crossing_alpha(const std::vector<SweepRow>& rows) {
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    const double f0 = rows[i].fraction, f1 = rows[i + 1].fraction;
    if (f0 >= 0.5 && f1 < 0.5) {
      if (f0 == f1) return rows[i].alpha;
      return rows[i].alpha + (f0 - 0.5) / (f0 - f1) * (rows[i + 1].alpha - rows[i].alpha);
    }
  }
  return std::nan("");
}

}  // namespace carvelab
