#include "attrcat/boolean.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace attrcat {

std::string GroundAtom::to_string() const {
  std::ostringstream out;
  out << pred << "(";
  for (size_t i = 0; i < args.size(); ++i) {
    if (i) out << ",";
    out << args[i];
  }
  out << ")";
  return out.str();
}

int AtomSet::index_of(const GroundAtom& atom) const {
  auto it = std::lower_bound(atoms.begin(), atoms.end(), atom);
  if (it != atoms.end() && *it == atom) return static_cast<int>(it - atoms.begin());
  return -1;
}

AtomSetPtr make_atom_set(std::vector<GroundAtom> atoms) {
  std::sort(atoms.begin(), atoms.end());
  atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
  if (static_cast<int>(atoms.size()) > AtomSet::kMaxAtoms) {
    throw BooleanError("atom budget exceeded: " + std::to_string(atoms.size()) + " > " +
                       std::to_string(AtomSet::kMaxAtoms));
  }
  auto set = std::make_shared<AtomSet>();
  set->atoms = std::move(atoms);
  return set;
}

AtomSetPtr atoms_for(const std::vector<TypedPred>& preds, const std::vector<TypedObj>& objs) {
  std::vector<GroundAtom> atoms;
  for (const auto& pred : preds) {
    std::vector<std::vector<std::string>> candidates(pred.arg_types.size());
    for (size_t i = 0; i < pred.arg_types.size(); ++i) {
      for (const auto& obj : objs) {
        if (obj.type == pred.arg_types[i]) candidates[i].push_back(obj.name);
      }
    }
    std::vector<size_t> idx(pred.arg_types.size(), 0);
    bool any_empty = false;
    for (const auto& c : candidates) {
      if (c.empty()) any_empty = true;
    }
    if (any_empty && !pred.arg_types.empty()) continue;
    while (true) {
      GroundAtom atom;
      atom.pred = pred.name;
      for (size_t i = 0; i < idx.size(); ++i) atom.args.push_back(candidates[i][idx[i]]);
      atoms.push_back(std::move(atom));
      size_t k = idx.size();
      while (k > 0) {
        if (++idx[k - 1] < candidates[k - 1].size()) break;
        idx[k - 1] = 0;
        k--;
      }
      if (k == 0) break;
    }
  }
  return make_atom_set(std::move(atoms));
}

std::vector<GroundAtom> Valuation::true_atoms() const {
  std::vector<GroundAtom> out;
  for (int i = 0; i < atoms->size(); ++i) {
    if (get(i)) out.push_back(atoms->atoms[i]);
  }
  return out;
}

namespace {

size_t word_count(int n_atoms) {
  uint64_t n = 1ull << n_atoms;
  return static_cast<size_t>((n + 63) / 64);
}

uint64_t tail_mask(int n_atoms) {
  uint64_t n = 1ull << n_atoms;
  return n % 64 == 0 ? ~0ull : (1ull << (n % 64)) - 1;
}

}  // namespace

Proposition::Proposition(AtomSetPtr atoms, bool all) : atoms_(std::move(atoms)) {
  models_.assign(word_count(atoms_->size()), all ? ~0ull : 0ull);
  if (all) models_.back() &= tail_mask(atoms_->size());
}

Proposition Proposition::atom(AtomSetPtr atoms, const GroundAtom& a) {
  return literal(std::move(atoms), a, true);
}

Proposition Proposition::literal(AtomSetPtr atoms, const GroundAtom& a, bool positive) {
  int idx = atoms->index_of(a);
  if (idx < 0) throw BooleanError("atom not in atom set: " + a.to_string());
  Proposition p(atoms, false);
  if (idx < 6) {
    // Period shorter than a word: one repeated bit pattern.
    uint64_t pattern = 0;
    for (int b = 0; b < 64; ++b) {
      if ((((b >> idx) & 1) != 0) == positive) pattern |= 1ull << b;
    }
    for (auto& w : p.models_) w = pattern;
  } else {
    for (size_t i = 0; i < p.models_.size(); ++i) {
      bool bit = (i >> (idx - 6)) & 1u;
      p.models_[i] = bit == positive ? ~0ull : 0ull;
    }
  }
  p.models_.back() &= tail_mask(atoms->size());
  return p;
}

void Proposition::check_same(const Proposition& o) const {
  if (!atoms_ || !o.atoms_ || !(*atoms_ == *o.atoms_)) {
    throw BooleanError("operation on propositions over different atom sets");
  }
}

Proposition Proposition::operator&(const Proposition& o) const {
  check_same(o);
  Proposition out = *this;
  for (size_t i = 0; i < models_.size(); ++i) out.models_[i] &= o.models_[i];
  return out;
}

Proposition Proposition::operator|(const Proposition& o) const {
  check_same(o);
  Proposition out = *this;
  for (size_t i = 0; i < models_.size(); ++i) out.models_[i] |= o.models_[i];
  return out;
}

Proposition Proposition::operator!() const {
  Proposition out = *this;
  for (auto& w : out.models_) w = ~w;
  out.models_.back() &= tail_mask(atoms_->size());
  return out;
}

bool Proposition::operator==(const Proposition& o) const {
  if (!atoms_ || !o.atoms_ || !(*atoms_ == *o.atoms_)) return false;
  return models_ == o.models_;
}

bool Proposition::is_top() const { return (!*this).is_bot(); }

bool Proposition::is_bot() const {
  for (uint64_t w : models_) {
    if (w) return false;
  }
  return true;
}

bool Proposition::model(uint32_t valuation_bits) const {
  return (models_[valuation_bits / 64] >> (valuation_bits % 64)) & 1ull;
}

long Proposition::model_count() const {
  long n = 0;
  for (uint64_t w : models_) n += __builtin_popcountll(w);
  return n;
}

bool entails(const Valuation& s, const Proposition& q) {
  if (!(*s.atoms == *q.atoms())) throw BooleanError("valuation and proposition atom sets differ");
  return q.model(s.bits);
}

bool prop_entails(const Proposition& p, const Proposition& q) {
  return (p & !q).is_bot();
}

Valuation apply_action(const BoolAction& a, const Valuation& s, UpdateRule rule) {
  if (!entails(s, a.pre)) {
    throw BooleanError("precondition of '" + a.name + "' violated");
  }
  Valuation out = s;
  const Proposition& q1 = a.post;
  for (int i = 0; i < s.atoms->size(); ++i) {
    Proposition p = Proposition::atom(s.atoms, s.atoms->atoms[i]);
    if (rule == UpdateRule::MinimalModification) {
      if (((!p) & q1).is_bot()) {
        out.set(i, true);  // q1 entails p
      } else if ((p & q1).is_bot()) {
        out.set(i, false);  // q1 entails !p
      }
    } else {
      if ((p & q1).is_bot()) out.set(i, !s.get(i));
    }
  }
  return out;
}

namespace {

// Enumerates parameter tuples mapping local atoms onto global atoms.
struct AtomImage {
  std::vector<std::pair<int, int>> pairs;  // (local index, global index)
};

AtomImage atom_image(const BoolAction& a, const Binding& j, const AtomSetPtr& global) {
  AtomImage img;
  for (int li = 0; li < a.local_atoms->size(); ++li) {
    GroundAtom g = a.local_atoms->atoms[li];
    for (auto& arg : g.args) {
      auto it = j.find(arg);
      if (it == j.end()) throw BooleanError("binding missing parameter '" + arg + "'");
      arg = it->second;
    }
    int gi = global->index_of(g);
    if (gi < 0) throw BooleanError("bound atom not in global atom set: " + g.to_string());
    img.pairs.push_back({li, gi});
  }
  return img;
}

}  // namespace

Valuation pullback_valuation(const Binding& j, const std::vector<TypedObj>& params,
                             const std::vector<TypedObj>& objs, const Valuation& s,
                             const AtomSetPtr& local_atoms) {
  for (const auto& p : params) {
    auto it = j.find(p.name);
    if (it == j.end()) throw BooleanError("binding missing parameter '" + p.name + "'");
    bool found = false;
    for (const auto& o : objs) {
      if (o.name == it->second) {
        if (o.type != p.type) {
          throw BooleanError("binding maps " + p.name + " : " + p.type + " to " + o.name + " : " +
                             o.type);
        }
        found = true;
      }
    }
    if (!found) throw BooleanError("binding target '" + it->second + "' not among objects");
  }
  Valuation local;
  local.atoms = local_atoms;
  for (int li = 0; li < local_atoms->size(); ++li) {
    GroundAtom g = local_atoms->atoms[li];
    for (auto& arg : g.args) arg = j.at(arg);
    int gi = s.atoms->index_of(g);
    if (gi < 0) throw BooleanError("pullback atom not in global atom set: " + g.to_string());
    local.set(li, s.get(gi));
  }
  return local;
}

Valuation lift_action(const BoolAction& a, const Binding& j, const std::vector<TypedObj>& objs,
                      const Valuation& s, UpdateRule rule) {
  Valuation local = pullback_valuation(j, a.params, objs, s, a.local_atoms);
  if (!entails(local, a.pre)) {
    throw BooleanError("precondition of '" + a.name + "' violated under binding");
  }
  Valuation local_next = apply_action(a, local, rule);
  AtomImage img = atom_image(a, j, s.atoms);
  Valuation out = s;
  std::map<int, bool> assigned;
  for (auto [li, gi] : img.pairs) {
    bool v = local_next.get(li);
    auto it = assigned.find(gi);
    if (it != assigned.end() && it->second != v) {
      throw BooleanError("lift of '" + a.name + "' is ambiguous at atom " +
                         s.atoms->atoms[gi].to_string());
    }
    assigned[gi] = v;
    out.set(gi, v);
  }
  return out;
}

}  // namespace attrcat
