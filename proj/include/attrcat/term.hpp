#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace attrcat {

/// Error raised by the DSL and term parsers, with 1-based source position.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string message, int line, int col)
      : std::runtime_error(std::move(message)), line(line), col(col) {}
  int line;
  int col;
};

struct Term;
using TermPtr = std::shared_ptr<const Term>;

/// Abstract syntax for the shared diagram-term grammar:
///   id[A], swap[A,B], mu[D], delta[D], eps[D], get[attr], set[attr],
///   chi[a1,a2], generator names; `f ; g` sequential, `f * g` parallel.
struct Term {
  enum class Kind { Id, Swap, Mu, Delta, Eps, Get, Set, Chi, Gen, Seq, Par };

  Kind kind;
  std::vector<std::string> args;  // object / attribute / generator names
  TermPtr left, right;            // children for Seq and Par
  int line = 0;
  int col = 0;
};

TermPtr parse_term(std::string_view text);
std::string print_term(const Term& term);

}  // namespace attrcat
