#pragma once

#include <optional>
#include <string>
#include <vector>

#include "attrcat/diagram.hpp"
#include "attrcat/signature.hpp"

namespace attrcat {

/// A rewrite rule between two diagram patterns with equal boundaries.
/// Equality rules apply in both directions; leq-only rules apply
/// left-to-right in inequality proofs.
struct RewriteRule {
  std::string name;
  Diagram lhs;
  Diagram rhs;
  bool leq_only = false;
  bool split_move = false;  // well-behavedness spider split (no fixed pattern)
  std::string data_object;  // for split moves
};

/// Rule set for a signature: data-service laws, attribute action laws,
/// the phi expansion, well-behavedness, lax homomorphism laws for
/// data-to-data generators, and the user axioms.
std::vector<RewriteRule> build_rules(const Signature& sig);

struct ProofStep {
  std::string rule;
  int location = 0;  // index into the deterministic match enumeration
  bool l2r = true;
  bool from_end = false;  // valley proofs: step applies on the end side
};

/// A valley proof: the forward steps rewrite `start` and the from-end steps
/// rewrite `end`, and the two legs arrive at the same diagram. For leq
/// proofs, leq-only rules appear l2r on the forward leg and r2l on the
/// from-end leg, so every inequality points from start towards end.
struct Proof {
  std::vector<ProofStep> steps;
  Diagram start;  // normalized
  Diagram end;    // normalized
};

std::string proof_to_text(const Proof& proof);

struct Budget {
  long max_states = 100000;
  double max_seconds = 10.0;
};

/// Canonical spider form of the pure-data fragment: every connected,
/// convex subgraph of Mu/Delta/Eps/Spider nodes over one data object is
/// fused into a single spider; parallel wires between data nodes collapse
/// (special law); one-in one-out spiders become plain wires. `order_seed`
/// permutes the fusion order (the result is order-independent; tests
/// exercise this).
Diagram normalize_data(const Diagram& d, unsigned order_seed = 0);

/// The unique action map M (x) D -> M induced by gamma (as a raw 3-node
/// composite: gamma, mu, eps).
Diagram derive_phi(const std::string& attr, const Signature& sig);

/// The filter equating the shared-service attributes of two entities.
Diagram build_chi(const std::string& attr1, const std::string& attr2, const Signature& sig);

/// Applies `rule` at the `at`-th match (deterministic enumeration order)
/// in direction `dir`. Does not normalize the result. Throws on no match
/// at the location or an r2l application of a leq-only rule.
Diagram apply_axiom(const Diagram& d, const std::string& rule, int at, bool l2r,
                    const std::vector<RewriteRule>& rules);

/// Number of matches of `rule` on `d` in direction `dir`.
int count_matches(const Diagram& d, const std::string& rule, bool l2r,
                  const std::vector<RewriteRule>& rules);

/// Bounded bidirectional proof search; sound by construction, returns
/// nullopt when the budget is exhausted.
std::optional<Proof> prove_equal(const Diagram& d1, const Diagram& d2, const Budget& budget,
                                 const Signature& sig);
std::optional<Proof> prove_leq(const Diagram& d1, const Diagram& d2, const Budget& budget,
                               const Signature& sig);

/// Replays a proof: applies the forward steps (with normalization, as in
/// the search) from `start` and the from-end steps from `end`; both legs
/// must arrive at the same diagram, which is returned. Throws on a proof
/// that does not replay.
Diagram replay_proof(const Proof& proof, const std::vector<RewriteRule>& rules);

}  // namespace attrcat
