#include <doctest.h>

#include <memory>

#include "attrcat/boolean.hpp"
#include "support/testutil.hpp"

using namespace attrcat;
using namespace attrcat::testutil;

namespace {

// Independent formula oracle: a random formula tree evaluated per valuation.
struct Formula {
  enum class Op { Atom, Not, And, Or, Top, Bot } op;
  int atom = 0;
  std::unique_ptr<Formula> a, b;

  bool eval(uint32_t bits) const {
    switch (op) {
      case Op::Atom: return (bits >> atom) & 1u;
      case Op::Not: return !a->eval(bits);
      case Op::And: return a->eval(bits) && b->eval(bits);
      case Op::Or: return a->eval(bits) || b->eval(bits);
      case Op::Top: return true;
      case Op::Bot: return false;
    }
    return false;
  }
};

std::unique_ptr<Formula> random_formula(uint64_t& state, int n_atoms, int depth) {
  auto f = std::make_unique<Formula>();
  int pick = depth == 0 ? static_cast<int>(splitmix(state) % 2)
                        : static_cast<int>(splitmix(state) % 6);
  switch (pick) {
    case 0:
    case 5:
      f->op = Formula::Op::Atom;
      f->atom = static_cast<int>(splitmix(state) % n_atoms);
      break;
    case 1:
      f->op = splitmix(state) % 2 ? Formula::Op::Top : Formula::Op::Bot;
      break;
    case 2:
      f->op = Formula::Op::Not;
      f->a = random_formula(state, n_atoms, depth - 1);
      break;
    case 3:
      f->op = Formula::Op::And;
      f->a = random_formula(state, n_atoms, depth - 1);
      f->b = random_formula(state, n_atoms, depth - 1);
      break;
    default:
      f->op = Formula::Op::Or;
      f->a = random_formula(state, n_atoms, depth - 1);
      f->b = random_formula(state, n_atoms, depth - 1);
      break;
  }
  return f;
}

Proposition to_prop(const Formula& f, const AtomSetPtr& atoms) {
  switch (f.op) {
    case Formula::Op::Atom: return Proposition::atom(atoms, atoms->atoms[f.atom]);
    case Formula::Op::Not: return !to_prop(*f.a, atoms);
    case Formula::Op::And: return to_prop(*f.a, atoms) & to_prop(*f.b, atoms);
    case Formula::Op::Or: return to_prop(*f.a, atoms) | to_prop(*f.b, atoms);
    case Formula::Op::Top: return Proposition::top(atoms);
    case Formula::Op::Bot: return Proposition::bot(atoms);
  }
  return Proposition::bot(atoms);
}

AtomSetPtr small_atoms(int n) {
  std::vector<GroundAtom> atoms;
  for (int i = 0; i < n; ++i) atoms.push_back({"p" + std::to_string(i), {"o"}});
  return make_atom_set(std::move(atoms));
}

}  // namespace

TEST_CASE("atoms_for enumerates type-respecting instances in order") {
  std::vector<TypedPred> preds = {{"at", {"Robot", "Loc"}}};
  std::vector<TypedObj> objs = {{"r", "Robot"}, {"l1", "Loc"}, {"l2", "Loc"}};
  auto atoms = atoms_for(preds, objs);
  REQUIRE(atoms->size() == 2);
  CHECK(atoms->atoms[0].to_string() == "at(r,l1)");
  CHECK(atoms->atoms[1].to_string() == "at(r,l2)");

  CHECK(atoms_for(preds, {})->size() == 0);

  std::vector<TypedObj> many = {{"a", "Robot"}, {"b", "Robot"}, {"c", "Robot"},
                                {"x", "Loc"},   {"y", "Loc"},   {"z", "Loc"}};
  auto nine = atoms_for(preds, many);
  CHECK(nine->size() == 9);
  for (int i = 1; i < nine->size(); ++i) {
    CHECK(nine->atoms[i - 1] < nine->atoms[i]);  // lexicographic
  }
}

TEST_CASE("atom budget is enforced") {
  std::vector<TypedPred> preds = {{"rel", {"T", "T"}}};
  std::vector<TypedObj> objs;
  for (int i = 0; i < 6; ++i) objs.push_back({"o" + std::to_string(i), "T"});
  CHECK_THROWS_AS(atoms_for(preds, objs), BooleanError);  // 36 > 24
}

TEST_CASE("basic propositional identities") {
  auto atoms = small_atoms(3);
  Proposition a = Proposition::atom(atoms, atoms->atoms[0]);
  CHECK((a & !a).is_bot());
  CHECK((a | !a).is_top());
  CHECK((Proposition::top(atoms) | a) == Proposition::top(atoms));
  // atom over 2 atoms has exactly 2 models
  auto two = small_atoms(2);
  CHECK(Proposition::atom(two, two->atoms[0]).model_count() == 2);
}

TEST_CASE("property: boolean algebra laws against the formula oracle") {
  uint64_t state = 42;
  for (int trial = 0; trial < 300; ++trial) {
    int n = 1 + static_cast<int>(splitmix(state) % 10);
    auto atoms = small_atoms(n);
    auto f = random_formula(state, n, 3);
    auto g = random_formula(state, n, 3);
    Proposition pf = to_prop(*f, atoms);
    Proposition pg = to_prop(*g, atoms);
    // Bitset semantics agree with direct evaluation on every valuation.
    for (uint32_t v = 0; v < (1u << n); ++v) {
      CHECK(pf.model(v) == f->eval(v));
    }
    // Laws on random instances.
    CHECK((pf & pg) == (pg & pf));
    CHECK((pf | pg) == (pg | pf));
    CHECK(!(!pf) == pf);
    CHECK((pf & (pf | pg)) == pf);                    // absorption
    CHECK(!(pf & pg) == (!pf | !pg));                 // de Morgan
    CHECK((pf & !pf).is_bot());
    CHECK(prop_entails(pf & pg, pf));
  }
}

TEST_CASE("entails examples") {
  auto atoms = small_atoms(2);
  Valuation s;
  s.atoms = atoms;
  s.set(0, true);
  CHECK(entails(s, Proposition::top(atoms)));
  CHECK(entails(s, Proposition::atom(atoms, atoms->atoms[0])));
  CHECK_FALSE(entails(s, Proposition::atom(atoms, atoms->atoms[1])));
}

TEST_CASE("apply_action: minimal modification on the two-atom example") {
  // atoms {at(x,l), at(x,l')}; q1 = at(x,l) and not at(x,l'); s = {at(x,l')}
  std::vector<TypedPred> preds = {{"at", {"X", "L"}}};
  std::vector<TypedObj> params = {{"x", "X"}, {"l", "L"}, {"lp", "L"}};
  auto atoms = atoms_for(preds, params);
  REQUIRE(atoms->size() == 2);
  BoolAction a;
  a.name = "move";
  a.params = params;
  a.local_atoms = atoms;
  a.pre = Proposition::top(atoms);
  a.post = Proposition::atom(atoms, {"at", {"x", "l"}}) &
           !Proposition::atom(atoms, {"at", {"x", "lp"}});
  Valuation s;
  s.atoms = atoms;
  s.set(atoms->index_of({"at", {"x", "lp"}}), true);

  // Brute-force oracle: the unique valuation satisfying q1 at minimal
  // Hamming distance from s (here q1 pins both atoms).
  Valuation out = apply_action(a, s);
  CHECK(out.get(atoms->index_of({"at", {"x", "l"}})));
  CHECK_FALSE(out.get(atoms->index_of({"at", {"x", "lp"}})));

  // s already satisfying a literal conjunction stays unchanged.
  Valuation t = out;
  CHECK(apply_action(a, t).bits == t.bits);

  // An unconstrained atom keeps its bit.
  BoolAction b = a;
  b.post = Proposition::atom(atoms, {"at", {"x", "l"}});
  Valuation u;
  u.atoms = atoms;
  u.set(atoms->index_of({"at", {"x", "lp"}}), true);
  Valuation v = apply_action(b, u);
  CHECK(v.get(atoms->index_of({"at", {"x", "l"}})));
  CHECK(v.get(atoms->index_of({"at", {"x", "lp"}})));  // preserved
}

TEST_CASE("apply_action: post = top leaves the state unchanged") {
  auto atoms = small_atoms(4);
  BoolAction a;
  a.name = "noop";
  a.local_atoms = atoms;
  a.pre = Proposition::top(atoms);
  a.post = Proposition::top(atoms);
  Valuation s;
  s.atoms = atoms;
  s.bits = 0b1010;
  CHECK(apply_action(a, s).bits == s.bits);
}

TEST_CASE("apply_action: precondition violation throws") {
  auto atoms = small_atoms(1);
  BoolAction a;
  a.name = "guarded";
  a.local_atoms = atoms;
  a.pre = Proposition::atom(atoms, atoms->atoms[0]);
  a.post = Proposition::top(atoms);
  Valuation s;
  s.atoms = atoms;
  CHECK_THROWS_AS(apply_action(a, s), BooleanError);
}

TEST_CASE("property: idempotence, frame, and literal-post satisfaction") {
  uint64_t state = 20240809;
  int trials = 0;
  while (trials < 2000) {
    int n = 1 + static_cast<int>(splitmix(state) % 10);
    auto atoms = small_atoms(n);
    BoolAction a;
    a.name = "rand";
    a.local_atoms = atoms;
    a.pre = Proposition::top(atoms);
    // Random literal conjunction post.
    Proposition post = Proposition::top(atoms);
    std::vector<std::pair<int, bool>> literals;
    for (int i = 0; i < n; ++i) {
      int r = static_cast<int>(splitmix(state) % 3);
      if (r == 2) continue;
      literals.push_back({i, r == 0});
      post = post & Proposition::literal(atoms, atoms->atoms[i], r == 0);
    }
    a.post = post;
    Valuation s;
    s.atoms = atoms;
    s.bits = static_cast<uint32_t>(splitmix(state)) & ((1u << n) - 1);

    Valuation once = apply_action(a, s);
    // Literal-conjunction posts are always satisfied afterwards.
    CHECK(entails(once, post));
    // Idempotence.
    CHECK(apply_action(a, once).bits == once.bits);
    // Frame property: only atoms entailed one way or the other change.
    for (int i = 0; i < n; ++i) {
      bool pinned = false;
      for (auto [idx, val] : literals) pinned |= idx == i;
      if (!pinned) CHECK(once.get(i) == s.get(i));
    }
    trials++;
  }
}

TEST_CASE("property: frame holds for arbitrary posts") {
  uint64_t state = 7;
  for (int trial = 0; trial < 500; ++trial) {
    int n = 1 + static_cast<int>(splitmix(state) % 8);
    auto atoms = small_atoms(n);
    auto f = random_formula(state, n, 3);
    BoolAction a;
    a.name = "rand";
    a.local_atoms = atoms;
    a.pre = Proposition::top(atoms);
    a.post = to_prop(*f, atoms);
    Valuation s;
    s.atoms = atoms;
    s.bits = static_cast<uint32_t>(splitmix(state)) & ((1u << n) - 1);
    Valuation out = apply_action(a, s);
    for (int i = 0; i < n; ++i) {
      if (out.get(i) == s.get(i)) continue;
      Proposition p = Proposition::atom(atoms, atoms->atoms[i]);
      bool entailed_true = ((!p) & a.post).is_bot();
      bool entailed_false = (p & a.post).is_bot();
      CHECK((entailed_true || entailed_false));
    }
  }
}

TEST_CASE("literal-flip compatibility rule never sets required atoms") {
  // The displayed update flips p only when p & q1 = bot; a false-but-required
  // atom stays false.
  auto atoms = small_atoms(2);
  BoolAction a;
  a.name = "flip";
  a.local_atoms = atoms;
  a.pre = Proposition::top(atoms);
  a.post = Proposition::atom(atoms, atoms->atoms[0]);
  Valuation s;
  s.atoms = atoms;  // atom 0 false
  Valuation flip = apply_action(a, s, UpdateRule::LiteralFlip);
  CHECK_FALSE(flip.get(0));  // the literal reading leaves it false
  Valuation minimal = apply_action(a, s, UpdateRule::MinimalModification);
  CHECK(minimal.get(0));
}

TEST_CASE("pullback and lift") {
  std::vector<TypedPred> preds = {{"at", {"X", "L"}}};
  std::vector<TypedObj> objs = {{"r", "X"}, {"l1", "L"}, {"l2", "L"}};
  auto global_atoms = atoms_for(preds, objs);
  std::vector<TypedObj> params = {{"x", "X"}, {"l", "L"}};
  auto local_atoms = atoms_for(preds, params);
  REQUIRE(local_atoms->size() == 1);

  Valuation s;
  s.atoms = global_atoms;
  s.set(global_atoms->index_of({"at", {"r", "l1"}}), true);

  SUBCASE("pullback maps global truth to local truth") {
    Binding j = {{"x", "r"}, {"l", "l1"}};
    Valuation local = pullback_valuation(j, params, objs, s, local_atoms);
    CHECK(local.get(0));
    Binding j2 = {{"x", "r"}, {"l", "l2"}};
    CHECK_FALSE(pullback_valuation(j2, params, objs, s, local_atoms).get(0));
  }

  SUBCASE("identity binding is bit-identical") {
    std::vector<TypedObj> id_params = objs;
    auto id_atoms = atoms_for(preds, id_params);
    Binding j;
    for (const auto& o : objs) j[o.name] = o.name;
    Valuation local = pullback_valuation(j, id_params, objs, s, id_atoms);
    CHECK(local.bits == s.bits);
  }

  SUBCASE("type-violating binding throws") {
    Binding j = {{"x", "l1"}, {"l", "r"}};
    CHECK_THROWS_AS(pullback_valuation(j, params, objs, s, local_atoms), BooleanError);
  }

  SUBCASE("lift updates exactly the image atoms") {
    BoolAction a;
    a.name = "moveto";
    a.params = params;
    a.local_atoms = local_atoms;
    a.pre = Proposition::top(local_atoms);
    a.post = Proposition::atom(local_atoms, {"at", {"x", "l"}});
    Binding j = {{"x", "r"}, {"l", "l2"}};
    Valuation out = lift_action(a, j, objs, s);
    CHECK(out.get(global_atoms->index_of({"at", {"r", "l2"}})));
    CHECK(out.get(global_atoms->index_of({"at", {"r", "l1"}})));  // untouched
    // Lift-then-pullback equals pullback-then-apply on the image.
    Valuation local_after = pullback_valuation(j, params, objs, out, local_atoms);
    Valuation local_direct = apply_action(a, pullback_valuation(j, params, objs, s, local_atoms));
    CHECK(local_after.bits == local_direct.bits);
  }

  SUBCASE("invalid application names the failing precondition") {
    BoolAction a;
    a.name = "guarded";
    a.params = params;
    a.local_atoms = local_atoms;
    a.pre = Proposition::atom(local_atoms, {"at", {"x", "l"}});
    a.post = Proposition::top(local_atoms);
    Binding j = {{"x", "r"}, {"l", "l2"}};
    CHECK_THROWS_WITH_AS(lift_action(a, j, objs, s),
                         "precondition of 'guarded' violated under binding", BooleanError);
  }
}
