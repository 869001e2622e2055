#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace valarena {

// Base class for everything thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed game text. Carries the byte offset and 1-based line/column.
struct ParseError : Error {
  ParseError(const std::string& what, std::size_t offset, int line, int col)
      : Error(what + " (at " + std::to_string(line) + ":" + std::to_string(col) + ")"),
        offset(offset),
        line(line),
        col(col) {}
  std::size_t offset;
  int line;
  int col;
};

// Invalid configuration, argument, or precondition. CLI exit code 1.
struct ValidationError : Error {
  using Error::Error;
};

// Backward induction hit a payoff tie: the game has no unique perfect
// equilibrium. Carries the offending node id.
struct TieError : Error {
  TieError(const std::string& what, int node_id) : Error(what), node(node_id) {}
  int node;
};

// Markov-chain analysis cannot proceed (reducible chain, no absorbing state,
// state cap exceeded, singular system). CLI exit code 2.
struct ChainError : Error {
  using Error::Error;
};

}  // namespace valarena
