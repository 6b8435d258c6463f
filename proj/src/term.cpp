#include "attrcat/term.hpp"

#include <cctype>
#include <map>

namespace attrcat {

namespace {

struct Lexer {
  std::string_view text;
  size_t pos = 0;
  int line = 1;
  int col = 1;

  void advance() {
    if (pos < text.size()) {
      if (text[pos] == '\n') {
        line++;
        col = 1;
      } else {
        col++;
      }
      pos++;
    }
  }

  void skip_space() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) advance();
  }

  bool eof() {
    skip_space();
    return pos >= text.size();
  }

  char peek() {
    skip_space();
    return pos < text.size() ? text[pos] : '\0';
  }

  bool accept(char c) {
    if (peek() == c) {
      advance();
      return true;
    }
    return false;
  }

  void expect(char c, const char* what) {
    if (!accept(c)) {
      throw ParseError(std::string("expected '") + c + "' " + what, line, col);
    }
  }

  static bool ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
  }
  static bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
  }

  std::string ident() {
    skip_space();
    if (pos >= text.size() || !ident_start(text[pos])) {
      throw ParseError("expected identifier", line, col);
    }
    std::string out;
    while (pos < text.size() && ident_char(text[pos])) {
      out.push_back(text[pos]);
      advance();
    }
    return out;
  }
};

struct Parser {
  Lexer lex;

  TermPtr make(Term::Kind kind, std::vector<std::string> args, int line, int col) {
    auto t = std::make_shared<Term>();
    t->kind = kind;
    t->args = std::move(args);
    t->line = line;
    t->col = col;
    return t;
  }

  TermPtr atom() {
    int line = lex.line, col = lex.col;
    if (lex.accept('(')) {
      TermPtr inner = seq();
      lex.expect(')', "to close group");
      return inner;
    }
    std::string name = lex.ident();
    static const std::map<std::string, std::pair<Term::Kind, int>> keywords = {
        {"id", {Term::Kind::Id, 1}},     {"swap", {Term::Kind::Swap, 2}},
        {"mu", {Term::Kind::Mu, 1}},     {"delta", {Term::Kind::Delta, 1}},
        {"eps", {Term::Kind::Eps, 1}},   {"get", {Term::Kind::Get, 1}},
        {"set", {Term::Kind::Set, 1}},   {"chi", {Term::Kind::Chi, 2}},
    };
    auto it = keywords.find(name);
    if (it == keywords.end()) {
      return make(Term::Kind::Gen, {name}, line, col);
    }
    lex.expect('[', "after keyword");
    std::vector<std::string> args;
    args.push_back(lex.ident());
    for (int i = 1; i < it->second.second; ++i) {
      lex.expect(',', "between arguments");
      args.push_back(lex.ident());
    }
    lex.expect(']', "to close arguments");
    return make(it->second.first, std::move(args), line, col);
  }

  TermPtr par() {
    TermPtr t = atom();
    while (lex.peek() == '*') {
      int line = lex.line, col = lex.col;
      lex.accept('*');
      auto node = std::make_shared<Term>();
      node->kind = Term::Kind::Par;
      node->left = t;
      node->right = atom();
      node->line = line;
      node->col = col;
      t = node;
    }
    return t;
  }

  TermPtr seq() {
    TermPtr t = par();
    while (lex.peek() == ';') {
      int line = lex.line, col = lex.col;
      lex.accept(';');
      auto node = std::make_shared<Term>();
      node->kind = Term::Kind::Seq;
      node->left = t;
      node->right = par();
      node->line = line;
      node->col = col;
      t = node;
    }
    return t;
  }
};

const char* keyword_of(Term::Kind kind) {
  switch (kind) {
    case Term::Kind::Id: return "id";
    case Term::Kind::Swap: return "swap";
    case Term::Kind::Mu: return "mu";
    case Term::Kind::Delta: return "delta";
    case Term::Kind::Eps: return "eps";
    case Term::Kind::Get: return "get";
    case Term::Kind::Set: return "set";
    case Term::Kind::Chi: return "chi";
    default: return "";
  }
}

void print_rec(const Term& t, std::string& out, bool parent_seq) {
  switch (t.kind) {
    case Term::Kind::Gen:
      out += t.args[0];
      return;
    case Term::Kind::Seq: {
      if (!parent_seq) out += '(';
      print_rec(*t.left, out, true);
      out += " ; ";
      print_rec(*t.right, out, true);
      if (!parent_seq) out += ')';
      return;
    }
    case Term::Kind::Par: {
      out += '(';
      print_rec(*t.left, out, false);
      out += " * ";
      print_rec(*t.right, out, false);
      out += ')';
      return;
    }
    default: {
      out += keyword_of(t.kind);
      out += '[';
      for (size_t i = 0; i < t.args.size(); ++i) {
        if (i) out += ',';
        out += t.args[i];
      }
      out += ']';
      return;
    }
  }
}

}  // namespace

TermPtr parse_term(std::string_view text) {
  Parser p{Lexer{text}};
  TermPtr t = p.seq();
  if (!p.lex.eof()) {
    throw ParseError("unexpected trailing input in term", p.lex.line, p.lex.col);
  }
  return t;
}

std::string print_term(const Term& term) {
  std::string out;
  print_rec(term, out, true);
  return out;
}

}  // namespace attrcat
