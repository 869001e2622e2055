#include "valarena/game.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <set>
#include <sstream>

namespace valarena {
namespace {

bool is_label_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

bool is_atom_char(char c) { return is_label_char(c) || c == '.' || c == '-' || c == '+'; }

struct Token {
  enum Kind { kLParen, kRParen, kAtom, kEnd } kind = kEnd;
  std::string text;
  std::size_t offset = 0;
  int line = 1;
  int col = 1;
};

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) {}

  const Token& peek() {
    if (!has_) {
      tok_ = lex();
      has_ = true;
    }
    return tok_;
  }

  Token next() {
    Token t = peek();
    has_ = false;
    return t;
  }

  [[noreturn]] void fail(const std::string& msg, const Token& at) const {
    throw ParseError(msg, at.offset, at.line, at.col);
  }

 private:
  Token lex() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
        continue;
      }
      break;
    }
    Token t;
    t.offset = pos_;
    t.line = line_;
    t.col = col_;
    if (pos_ >= text_.size()) {
      t.kind = Token::kEnd;
      return t;
    }
    char c = text_[pos_];
    if (c == '(') {
      advance();
      t.kind = Token::kLParen;
      t.text = "(";
      return t;
    }
    if (c == ')') {
      advance();
      t.kind = Token::kRParen;
      t.text = ")";
      return t;
    }
    if (!is_atom_char(c)) {
      throw ParseError(std::string("unexpected character '") + c + "'", pos_, line_, col_);
    }
    t.kind = Token::kAtom;
    while (pos_ < text_.size() && is_atom_char(text_[pos_])) {
      t.text.push_back(text_[pos_]);
      advance();
    }
    return t;
  }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  Token tok_;
  bool has_ = false;
};

double parse_real(Lexer& lx, const Token& t) {
  double value = 0;
  // chars_format::fixed rejects exponent forms, keeping the grammar to plain
  // decimal literals.
  auto [ptr, ec] =
      std::from_chars(t.text.data(), t.text.data() + t.text.size(), value, std::chars_format::fixed);
  if (ec != std::errc() || ptr != t.text.data() + t.text.size() || !std::isfinite(value)) {
    lx.fail("expected decimal payoff, got '" + t.text + "'", t);
  }
  return value;
}

int parse_player_index(Lexer& lx, const Token& t) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), value);
  if (ec != std::errc() || ptr != t.text.data() + t.text.size() || value < 1) {
    lx.fail("expected positive player index, got '" + t.text + "'", t);
  }
  return value;
}

struct Parser {
  Lexer lx;
  std::vector<Node> nodes;
  int payoff_arity = 0;  // set by the first terminal

  explicit Parser(const std::string& text) : lx(text) {}

  Token expect(Token::Kind kind, const std::string& what) {
    Token t = lx.next();
    if (t.kind != kind) lx.fail("expected " + what + ", got '" + (t.kind == Token::kEnd ? std::string("end of input") : t.text) + "'", t);
    return t;
  }

  NodeId parse_node() {
    expect(Token::kLParen, "'('");
    Token head = lx.next();
    if (head.kind != Token::kAtom) lx.fail("expected 'payoffs' or 'player'", head);
    NodeId id = static_cast<NodeId>(nodes.size());
    nodes.emplace_back();
    if (head.text == "payoffs") {
      std::vector<double> payoffs;
      while (lx.peek().kind == Token::kAtom) {
        Token t = lx.next();
        payoffs.push_back(parse_real(lx, t));
      }
      Token close = expect(Token::kRParen, "')'");
      if (payoffs.empty()) lx.fail("terminal needs at least one payoff", close);
      if (payoff_arity == 0) {
        payoff_arity = static_cast<int>(payoffs.size());
      } else if (static_cast<int>(payoffs.size()) != payoff_arity) {
        lx.fail("inconsistent payoff arity: expected " + std::to_string(payoff_arity) + ", got " +
                    std::to_string(payoffs.size()),
                close);
      }
      nodes[static_cast<std::size_t>(id)].payoffs = std::move(payoffs);
      return id;
    }
    if (head.text == "player") {
      Token pt = lx.next();
      if (pt.kind != Token::kAtom) lx.fail("expected player index", pt);
      int player = parse_player_index(lx, pt);
      std::vector<Move> moves;
      std::set<std::string> labels;
      while (lx.peek().kind == Token::kLParen) {
        lx.next();
        Token mv = lx.next();
        if (mv.kind != Token::kAtom || mv.text != "move") lx.fail("expected 'move'", mv);
        Token lbl = lx.next();
        if (lbl.kind != Token::kAtom) lx.fail("expected move label", lbl);
        for (char c : lbl.text) {
          if (!is_label_char(c)) lx.fail("invalid move label '" + lbl.text + "'", lbl);
        }
        if (!labels.insert(lbl.text).second) {
          lx.fail("duplicate sibling move label '" + lbl.text + "'", lbl);
        }
        NodeId child = parse_node();
        nodes[static_cast<std::size_t>(child)].parent = id;
        moves.push_back(Move{lbl.text, child});
        expect(Token::kRParen, "')' closing move");
      }
      Token close = expect(Token::kRParen, "')'");
      if (moves.empty()) lx.fail("decision node has no moves", close);
      nodes[static_cast<std::size_t>(id)].player = player;
      nodes[static_cast<std::size_t>(id)].moves = std::move(moves);
      return id;
    }
    lx.fail("expected 'payoffs' or 'player', got '" + head.text + "'", head);
  }
};

std::uint64_t bits_of(double x) { return std::bit_cast<std::uint64_t>(x); }

}  // namespace

GameTree::GameTree(std::vector<Node> nodes, int player_count)
    : nodes_(std::move(nodes)), player_count_(player_count) {
  if (nodes_.empty()) throw ValidationError("game has no nodes");
  if (player_count_ < 1) throw ValidationError("game needs at least one player");
  const std::size_t n = nodes_.size();
  if (nodes_[0].parent != kNoNode) throw ValidationError("root must not have a parent");

  // Structural pass: child ids in range and strictly increasing past their
  // parent (pre-order), parent links consistent, each non-root entered once.
  std::vector<int> indegree(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const Node& nd = nodes_[i];
    if (nd.is_terminal()) {
      if (static_cast<int>(nd.payoffs.size()) != player_count_) {
        throw ValidationError("terminal payoff arity mismatch at node " + std::to_string(i));
      }
      for (double& p : nodes_[i].payoffs) {
        if (!std::isfinite(p)) throw ValidationError("non-finite payoff at node " + std::to_string(i));
        if (p == 0.0) p = 0.0;  // normalize -0.0
      }
    } else {
      if (nd.player < 1 || nd.player > player_count_) {
        throw ValidationError("player index out of range at node " + std::to_string(i));
      }
      std::set<std::string> labels;
      for (const Move& m : nd.moves) {
        if (m.child <= static_cast<NodeId>(i) || m.child >= static_cast<NodeId>(n)) {
          throw ValidationError("child id out of pre-order range at node " + std::to_string(i));
        }
        if (nodes_[static_cast<std::size_t>(m.child)].parent != static_cast<NodeId>(i)) {
          throw ValidationError("parent link mismatch at node " + std::to_string(m.child));
        }
        if (m.label.empty()) throw ValidationError("empty move label at node " + std::to_string(i));
        for (char c : m.label) {
          if (!is_label_char(c)) throw ValidationError("invalid move label '" + m.label + "'");
        }
        if (!labels.insert(m.label).second) {
          throw ValidationError("duplicate sibling move label '" + m.label + "'");
        }
        ++indegree[static_cast<std::size_t>(m.child)];
      }
    }
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (indegree[i] != 1) throw ValidationError("node " + std::to_string(i) + " is not reached exactly once");
  }
  if (indegree[0] != 0) throw ValidationError("root has an incoming edge");

  move_slot_.assign(n, -1);
  move_owner_.assign(n, 0);
  sibling_index_.assign(n, -1);
  moves_by_player_.assign(static_cast<std::size_t>(player_count_), {});
  for (std::size_t i = 0; i < n; ++i) {
    const Node& nd = nodes_[i];
    if (nd.is_terminal()) {
      terminal_nodes_.push_back(static_cast<NodeId>(i));
      continue;
    }
    decision_nodes_.push_back(static_cast<NodeId>(i));
    for (std::size_t k = 0; k < nd.moves.size(); ++k) {
      NodeId child = nd.moves[k].child;
      auto& list = moves_by_player_[static_cast<std::size_t>(nd.player - 1)];
      move_slot_[static_cast<std::size_t>(child)] = static_cast<int>(list.size());
      move_owner_[static_cast<std::size_t>(child)] = nd.player;
      sibling_index_[static_cast<std::size_t>(child)] = static_cast<int>(k);
      list.push_back(child);
    }
  }
}

const std::vector<NodeId>& GameTree::moves_of(PlayerId player) const {
  if (player < 1 || player > player_count_) throw ValidationError("player index out of range");
  return moves_by_player_[static_cast<std::size_t>(player - 1)];
}

std::string GameTree::label_path(NodeId id) const {
  std::vector<const std::string*> parts;
  for (NodeId cur = id; cur != 0; cur = node(cur).parent) {
    parts.push_back(&node(node(cur).parent).moves[static_cast<std::size_t>(sibling_index(cur))].label);
  }
  std::string out;
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
    if (!out.empty()) out.push_back('/');
    out += **it;
  }
  return out;
}

NodeId GameTree::node_at_path(const std::string& path) const {
  NodeId cur = 0;
  std::size_t pos = 0;
  while (pos < path.size()) {
    std::size_t end = path.find('/', pos);
    if (end == std::string::npos) end = path.size();
    std::string label = path.substr(pos, end - pos);
    const Node& nd = node(cur);
    NodeId next = kNoNode;
    for (const Move& m : nd.moves) {
      if (m.label == label) {
        next = m.child;
        break;
      }
    }
    if (next == kNoNode) {
      throw ValidationError("no move '" + label + "' under '" + path.substr(0, pos) + "'");
    }
    cur = next;
    pos = end + 1;
  }
  return cur;
}

PathRecord GameTree::path_to(NodeId terminal) const {
  if (terminal < 0 || terminal >= node_count() || !node(terminal).is_terminal()) {
    throw ValidationError("path_to requires a terminal node");
  }
  PathRecord path;
  path.terminal = terminal;
  for (NodeId cur = terminal; cur != 0; cur = node(cur).parent) {
    path.moves.push_back(cur);
  }
  std::reverse(path.moves.begin(), path.moves.end());
  return path;
}

GameTree parse_game(const std::string& text) {
  Parser p(text);
  p.parse_node();
  Token trailing = p.lx.next();
  if (trailing.kind != Token::kEnd) p.lx.fail("trailing input after game", trailing);
  return GameTree(std::move(p.nodes), p.payoff_arity);
}

namespace {

void serialize_node(const GameTree& g, NodeId id, std::string& out) {
  const Node& nd = g.node(id);
  if (nd.is_terminal()) {
    out += "(payoffs";
    for (double p : nd.payoffs) {
      out.push_back(' ');
      out += format_real(p);
    }
    out.push_back(')');
    return;
  }
  out += "(player ";
  out += std::to_string(nd.player);
  for (const Move& m : nd.moves) {
    out += " (move ";
    out += m.label;
    out.push_back(' ');
    serialize_node(g, m.child, out);
    out.push_back(')');
  }
  out.push_back(')');
}

}  // namespace

std::string serialize_game(const GameTree& g) {
  std::string out;
  serialize_node(g, g.root(), out);
  return out;
}

int depth(const GameTree& g) {
  std::vector<std::pair<NodeId, int>> stack{{g.root(), 0}};
  int best = 0;
  while (!stack.empty()) {
    auto [id, d] = stack.back();
    stack.pop_back();
    const Node& nd = g.node(id);
    if (nd.is_terminal()) {
      best = std::max(best, d);
      continue;
    }
    for (const Move& m : nd.moves) stack.emplace_back(m.child, d + 1);
  }
  return best;
}

bool is_generic(const GameTree& g) {
  for (PlayerId i = 1; i <= g.player_count(); ++i) {
    std::vector<std::uint64_t> vals;
    vals.reserve(g.terminal_nodes().size());
    for (NodeId z : g.terminal_nodes()) {
      vals.push_back(bits_of(g.node(z).payoffs[static_cast<std::size_t>(i - 1)]));
    }
    std::sort(vals.begin(), vals.end());
    if (std::adjacent_find(vals.begin(), vals.end()) != vals.end()) return false;
  }
  return true;
}

bool is_win_lose_for(const GameTree& g, PlayerId i) {
  if (i < 1 || i > g.player_count()) throw ValidationError("player index out of range");
  for (NodeId z : g.terminal_nodes()) {
    double p = g.node(z).payoffs[static_cast<std::size_t>(i - 1)];
    if (p != 0.0 && p != 1.0) return false;
  }
  return true;
}

GameTree subgame(const GameTree& g, NodeId n) {
  if (n < 0 || n >= g.node_count()) throw ValidationError("subgame root out of range");
  std::vector<Node> nodes;
  // Recursive pre-order copy with id remapping.
  struct Copier {
    const GameTree& g;
    std::vector<Node>& out;
    NodeId copy(NodeId id, NodeId parent) {
      NodeId nid = static_cast<NodeId>(out.size());
      out.emplace_back();
      const Node& src = g.node(id);
      out[static_cast<std::size_t>(nid)].player = src.player;
      out[static_cast<std::size_t>(nid)].payoffs = src.payoffs;
      out[static_cast<std::size_t>(nid)].parent = parent;
      for (const Move& m : src.moves) {
        NodeId child = copy(m.child, nid);
        out[static_cast<std::size_t>(nid)].moves.push_back(Move{m.label, child});
      }
      return nid;
    }
  } copier{g, nodes};
  copier.copy(n, kNoNode);
  return GameTree(std::move(nodes), g.player_count());
}

std::string format_real(double x) {
  if (x == 0.0) x = 0.0;  // never print -0
  double r = std::rint(x);
  if (r == x && std::abs(x) < 9.007199254740992e15) {
    return std::to_string(static_cast<long long>(r));
  }
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::fixed);
  if (ec != std::errc()) throw Error("payoff formatting failed");
  return std::string(buf, ptr);
}

}  // namespace valarena
