#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace attrcat {

class BooleanError : public std::runtime_error {
 public:
  explicit BooleanError(const std::string& message) : std::runtime_error(message) {}
};

struct TypedPred {
  std::string name;
  std::vector<std::string> arg_types;
};

struct TypedObj {
  std::string name;
  std::string type;
};

struct GroundAtom {
  std::string pred;
  std::vector<std::string> args;
  std::string to_string() const;
  auto tied() const { return std::tie(pred, args); }
  bool operator<(const GroundAtom& o) const { return tied() < o.tied(); }
  bool operator==(const GroundAtom& o) const { return tied() == o.tied(); }
};

/// Ground atoms over typed predicates and objects; at most 24 atoms so that
/// valuations enumerate exhaustively.
struct AtomSet {
  static constexpr int kMaxAtoms = 24;

  std::vector<GroundAtom> atoms;  // lexicographically ordered

  int size() const { return static_cast<int>(atoms.size()); }
  int index_of(const GroundAtom& atom) const;  // -1 if absent
  bool operator==(const AtomSet& o) const { return atoms == o.atoms; }
};

using AtomSetPtr = std::shared_ptr<const AtomSet>;

/// All type-respecting ground instances, lexicographically ordered.
AtomSetPtr atoms_for(const std::vector<TypedPred>& preds, const std::vector<TypedObj>& objs);

/// Builds an AtomSet from an explicit atom list (sorted and deduplicated).
AtomSetPtr make_atom_set(std::vector<GroundAtom> atoms);

/// One truth assignment, encoded as a bit per atom.
struct Valuation {
  AtomSetPtr atoms;
  uint32_t bits = 0;

  bool get(int atom_index) const { return (bits >> atom_index) & 1u; }
  void set(int atom_index, bool value) {
    if (value) {
      bits |= 1u << atom_index;
    } else {
      bits &= ~(1u << atom_index);
    }
  }
  std::vector<GroundAtom> true_atoms() const;
};

/// Canonical element of the free Boolean algebra over an AtomSet: the set of
/// satisfying valuations as a bitset over 2^|atoms|.
class Proposition {
 public:
  Proposition() = default;
  Proposition(AtomSetPtr atoms, bool all);

  static Proposition top(AtomSetPtr atoms) { return Proposition(std::move(atoms), true); }
  static Proposition bot(AtomSetPtr atoms) { return Proposition(std::move(atoms), false); }
  static Proposition atom(AtomSetPtr atoms, const GroundAtom& a);
  static Proposition literal(AtomSetPtr atoms, const GroundAtom& a, bool positive);

  Proposition operator&(const Proposition& o) const;
  Proposition operator|(const Proposition& o) const;
  Proposition operator!() const;
  bool operator==(const Proposition& o) const;

  bool is_top() const;
  bool is_bot() const;
  bool model(uint32_t valuation_bits) const;
  const AtomSetPtr& atoms() const { return atoms_; }
  long model_count() const;

 private:
  void check_same(const Proposition& o) const;
  AtomSetPtr atoms_;
  std::vector<uint64_t> models_;  // 2^n bits
};

bool entails(const Valuation& s, const Proposition& q);
bool prop_entails(const Proposition& p, const Proposition& q);

/// PDDL-style action: typed parameters with pre/post conditions over the
/// local atom set.
struct BoolAction {
  std::string name;
  std::vector<TypedObj> params;
  AtomSetPtr local_atoms;
  Proposition pre;
  Proposition post;
};

enum class UpdateRule {
  /// Entailed-true atoms become true, entailed-false become false, all other
  /// atoms keep their value.
  MinimalModification,
  /// The literal update: flip an atom exactly when it is inconsistent with
  /// the post-condition (never sets a false-but-required atom).
  LiteralFlip,
};

/// State update by the principle of minimal modification. Throws if s does
/// not satisfy the precondition.
Valuation apply_action(const BoolAction& a, const Valuation& s,
                       UpdateRule rule = UpdateRule::MinimalModification);

/// Typed variable binding X_a -> O.
using Binding = std::map<std::string, std::string>;

/// Restriction of a global valuation along a binding.
Valuation pullback_valuation(const Binding& j, const std::vector<TypedObj>& params,
                             const std::vector<TypedObj>& objs, const Valuation& s,
                             const AtomSetPtr& local_atoms);

/// Lifts the local transformation to the global state: atoms in the image
/// of the binding follow the local update, everything else is unchanged.
/// Throws if the pulled-back state violates the precondition, or if a
/// non-injective binding makes the lift ambiguous.
Valuation lift_action(const BoolAction& a, const Binding& j, const std::vector<TypedObj>& objs,
                      const Valuation& s, UpdateRule rule = UpdateRule::MinimalModification);

}  // namespace attrcat
