#pragma once

#include <string>
#include <vector>

#include "valarena/errors.hpp"

namespace valarena {

using NodeId = int;
using PlayerId = int;  // 1-based

inline constexpr NodeId kNoNode = -1;

struct Move {
  std::string label;
  NodeId child = kNoNode;
};

// A node is terminal iff `moves` is empty; then `payoffs` holds one entry per
// player. Otherwise it is a decision node owned by `player`.
struct Node {
  PlayerId player = 0;
  std::vector<Move> moves;
  std::vector<double> payoffs;
  NodeId parent = kNoNode;
  bool is_terminal() const { return moves.empty(); }
};

// One complete traversal: the nodes visited after the root, in order. The
// last entry equals `terminal`. For a bare-terminal game (the root itself is
// terminal) `moves` is empty and `terminal` is the root.
struct PathRecord {
  std::vector<NodeId> moves;
  NodeId terminal = kNoNode;
  bool operator==(const PathRecord& o) const {
    return moves == o.moves && terminal == o.terminal;
  }
};

// Immutable finite perfect-information game tree. Node ids are dense
// pre-order indices with the root at 0, so every child id exceeds its
// parent's. Construction validates the whole structure.
class GameTree {
 public:
  GameTree(std::vector<Node> nodes, int player_count);

  NodeId root() const { return 0; }
  int node_count() const { return static_cast<int>(nodes_.size()); }
  const Node& node(NodeId id) const { return nodes_[static_cast<std::size_t>(id)]; }
  int player_count() const { return player_count_; }

  // A player's moves are the child nodes of their decision nodes, in
  // ascending id order. `move_slot` is the index of a move within its owner's
  // move list (-1 for the root), `move_owner` the player who chooses it.
  const std::vector<NodeId>& moves_of(PlayerId player) const;
  int move_slot(NodeId id) const { return move_slot_[static_cast<std::size_t>(id)]; }
  PlayerId move_owner(NodeId id) const { return move_owner_[static_cast<std::size_t>(id)]; }
  // Index of `id` among its parent's children (-1 for the root).
  int sibling_index(NodeId id) const { return sibling_index_[static_cast<std::size_t>(id)]; }

  const std::vector<NodeId>& decision_nodes() const { return decision_nodes_; }
  const std::vector<NodeId>& terminal_nodes() const { return terminal_nodes_; }

  // Move labels from the root down to `id`, joined with '/'; "" for the root.
  std::string label_path(NodeId id) const;
  // Inverse of label_path. Throws ValidationError for unknown paths.
  NodeId node_at_path(const std::string& path) const;

  PathRecord path_to(NodeId terminal) const;

 private:
  std::vector<Node> nodes_;
  int player_count_ = 0;
  std::vector<std::vector<NodeId>> moves_by_player_;
  std::vector<int> move_slot_;
  std::vector<PlayerId> move_owner_;
  std::vector<int> sibling_index_;
  std::vector<NodeId> decision_nodes_;
  std::vector<NodeId> terminal_nodes_;
};

// Parses the s-expression game grammar:
//   node     := terminal | decision
//   terminal := "(" "payoffs" REAL+ ")"
//   decision := "(" "player" INT move+ ")"
//   move     := "(" "move" LABEL node ")"
// LABEL is [A-Za-z0-9_]+; REAL is a decimal literal (no exponents). Errors
// carry byte offset, line, and column.
GameTree parse_game(const std::string& text);

// Canonical form: single spaces, no trailing whitespace, payoffs formatted by
// format_real. parse_game(serialize_game(g)) reproduces g exactly.
std::string serialize_game(const GameTree& g);

// Longest root-to-terminal edge count; 0 for a bare terminal.
int depth(const GameTree& g);

// True iff for every player all terminal payoffs are pairwise distinct.
bool is_generic(const GameTree& g);

// True iff player i's terminal payoffs all lie in {0, 1}.
bool is_win_lose_for(const GameTree& g, PlayerId i);

// The subtree rooted at n as a standalone game (ids renumbered, same player
// count).
GameTree subgame(const GameTree& g, NodeId n);

// Integers print without a decimal point; other values as the shortest
// fixed-notation string that round-trips.
std::string format_real(double x);

}  // namespace valarena
