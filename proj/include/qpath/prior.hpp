#pragma once

#include "qpath/qnet.hpp"
#include "qpath/random.hpp"
#include "qpath/state.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace qpath {

struct PriorEntry {
  MovingState state;
  QNetwork net;
};

class PriorStore {
 public:
  explicit PriorStore(int capacity = 10);

  int capacity() const { return capacity_; }
  int size() const { return static_cast<int>(entries_.size()); }
  const std::vector<PriorEntry>& entries() const { return entries_; }

  // Index of the most similar stored state (first on ties), or -1 if empty.
  int most_similar(const MovingState& s) const;
  // Copy of the most similar entry's network; a fresh network drawn from
  // rng when the store is empty.
  QNetwork select(const MovingState& s, const NetShape& shape, Rng& rng) const;

  // Appends while below capacity. Otherwise finds the most similar pair
  // among the stored entries and the new one, and evicts whichever member
  // is more similar to the rest. Returns the evicted candidate index
  // (size() meaning the new entry itself), or -1 for a plain append.
  int insert(PriorEntry entry);

  void write(std::ostream& out) const;
  static PriorStore read(std::istream& in);
  void save(const std::string& path) const;
  static PriorStore load(const std::string& path);

 private:
  int capacity_;
  std::vector<PriorEntry> entries_;
};

}  // namespace qpath
