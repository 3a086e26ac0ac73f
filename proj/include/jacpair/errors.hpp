#pragma once

#include <stdexcept>
#include <string>

namespace jacpair {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularMatrix : public Error {
 public:
  SingularMatrix() : Error("matrix is singular") {}
};

class DisconnectedGraph : public Error {
 public:
  DisconnectedGraph() : Error("graph is not connected") {}
};

class DegeneratePairing : public Error {
 public:
  explicit DegeneratePairing(const std::string& what)
      : Error("degenerate pairing: " + what) {}
};

class OrderExceedsBound : public Error {
 public:
  OrderExceedsBound(const std::string& order, const std::string& bound)
      : Error("group order " + order + " exceeds bound " + bound) {}
};

class NoCatalogMatch : public Error {
 public:
  NoCatalogMatch() : Error("no catalog class matches the pairing") {}
};

class RankExceedsN : public Error {
 public:
  RankExceedsN(int rank, int n)
      : Error("p-rank " + std::to_string(rank) + " exceeds matrix size " +
              std::to_string(n)) {}
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace jacpair
