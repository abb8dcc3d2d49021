#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace qpath {

// Invalid argument to a public operation (bad id, shape mismatch, ...).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A move exceeded the visiting cap of the active coverage mode.
class CoverageViolation : public std::runtime_error {
 public:
  enum class Entity { kEdge, kNode };
  CoverageViolation(Entity entity, int id, const std::string& what)
      : std::runtime_error(what), entity_(entity), id_(id) {}
  Entity entity() const { return entity_; }
  int id() const { return id_; }

 private:
  Entity entity_;
  int id_;
};

// LSG does not fit into the fixed m x m state.
class StateOverflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Action on a zero state entry.
class IllegalAction : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite loss or gradient during training.
class TrainingDivergence : public std::runtime_error {
 public:
  TrainingDivergence(const std::string& what, int episode = -1)
      : std::runtime_error(what), episode_(episode) {}
  int episode() const { return episode_; }

 private:
  int episode_;
};

// Operation used out of order (e.g. backward without a forward cache).
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// FEA system is singular or contains struts not connected to the ground.
class StructuralError : public std::runtime_error {
 public:
  StructuralError(const std::string& what, std::vector<int> unsupported)
      : std::runtime_error(what), unsupported_(std::move(unsupported)) {}
  const std::vector<int>& unsupported_nodes() const { return unsupported_; }

 private:
  std::vector<int> unsupported_;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed input file. `location` is "line N" or a JSON field path.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::string location = {})
      : std::runtime_error(location.empty() ? what : location + ": " + what),
        location_(std::move(location)) {}
  const std::string& location() const { return location_; }

 private:
  std::string location_;
};

class PlanningFailure : public std::runtime_error {
 public:
  PlanningFailure(const std::string& what, std::vector<int> uncovered_edges,
                  std::vector<int> uncovered_nodes)
      : std::runtime_error(what),
        uncovered_edges_(std::move(uncovered_edges)),
        uncovered_nodes_(std::move(uncovered_nodes)) {}
  const std::vector<int>& uncovered_edges() const { return uncovered_edges_; }
  const std::vector<int>& uncovered_nodes() const { return uncovered_nodes_; }

 private:
  std::vector<int> uncovered_edges_;
  std::vector<int> uncovered_nodes_;
};

}  // namespace qpath
