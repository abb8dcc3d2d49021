#include "qpath/prior.hpp"

#include "qpath/errors.hpp"

#include "binary_io.hpp"

#include <cstring>
#include <fstream>

namespace qpath {

namespace {

constexpr char kMagic[8] = {'Q', 'P', 'A', 'T', 'H', 'P', 'R', 'I'};
constexpr std::uint32_t kVersion = 1;
constexpr const char* kWhat = "prior store";

}  // namespace

PriorStore::PriorStore(int capacity) : capacity_(capacity) {
  if (capacity < 1) throw ArgumentError("prior store capacity must be positive");
}

int PriorStore::most_similar(const MovingState& s) const {
  int best = -1;
  double best_rho = -1.0;
  for (int k = 0; k < size(); ++k) {
    const double rho = similarity(s, entries_[k].state);
    if (rho > best_rho) {
      best_rho = rho;
      best = k;
    }
  }
  return best;
}

QNetwork PriorStore::select(const MovingState& s, const NetShape& shape, Rng& rng) const {
  const int k = most_similar(s);
  if (k < 0) return QNetwork::initialized(shape, rng);
  return entries_[k].net;
}

int PriorStore::insert(PriorEntry entry) {
  if (!entries_.empty() && entry.state.m() != entries_.front().state.m()) {
    throw ArgumentError("prior store: state dimension differs from stored entries");
  }
  if (size() < capacity_) {
    entries_.push_back(std::move(entry));
    return -1;
  }
  const int n = size() + 1;
  auto state_of = [&](int k) -> const MovingState& {
    return k < size() ? entries_[k].state : entry.state;
  };
  std::vector<double> rho(static_cast<std::size_t>(n) * n, 0.0);
  int a = 0, b = 1;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double r = similarity(state_of(i), state_of(j));
      rho[i * n + j] = rho[j * n + i] = r;
      if (r > rho[a * n + b]) {
        a = i;
        b = j;
      }
    }
  }
  auto max_to_rest = [&](int x) {
    double best = 0.0;
    for (int k = 0; k < n; ++k) {
      if (k != a && k != b) best = std::max(best, rho[x * n + k]);
    }
    return best;
  };
  const int evict = max_to_rest(a) > max_to_rest(b) ? a : b;
  if (evict < size()) {
    entries_.erase(entries_.begin() + evict);
    entries_.push_back(std::move(entry));
  }
  return evict;
}

void PriorStore::write(std::ostream& out) const {
  using binio::put;
  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kVersion);
  put<std::int32_t>(out, capacity_);
  const NetShape shape = entries_.empty() ? NetShape{} : entries_.front().net.shape();
  for (int v : {shape.m, shape.e2e1, shape.e2e2, shape.e2n, shape.hidden}) put<std::int32_t>(out, v);
  put<std::int32_t>(out, size());
  for (const auto& e : entries_) {
    put<std::int32_t>(out, e.state.m());
    put<std::int32_t>(out, e.state.size());
    for (int c = 0; c < 3; ++c) {
      put<std::int32_t>(out, static_cast<std::int32_t>(e.state.channel(c).size()));
      for (const auto& x : e.state.channel(c)) {
        put<std::int32_t>(out, x.i);
        put<std::int32_t>(out, x.j);
        binio::put_f64(out, x.value);
      }
    }
    e.net.write(out);
  }
}

PriorStore PriorStore::read(std::istream& in) {
  using binio::get;
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw ParseError("not a prior store (bad magic tag)");
  }
  if (get<std::uint32_t>(in, kWhat) != kVersion) throw ParseError("unsupported prior store version");
  const int capacity = get<std::int32_t>(in, kWhat);
  if (capacity < 1) throw ParseError("prior store has an invalid capacity");
  NetShape shape;
  shape.m = get<std::int32_t>(in, kWhat);
  shape.e2e1 = get<std::int32_t>(in, kWhat);
  shape.e2e2 = get<std::int32_t>(in, kWhat);
  shape.e2n = get<std::int32_t>(in, kWhat);
  shape.hidden = get<std::int32_t>(in, kWhat);
  const int count = get<std::int32_t>(in, kWhat);
  if (count < 0 || count > capacity) throw ParseError("prior store entry count out of range");
  PriorStore store(capacity);
  for (int k = 0; k < count; ++k) {
    const int m = get<std::int32_t>(in, kWhat);
    const int size = get<std::int32_t>(in, kWhat);
    if (m != shape.m || size < 0 || size > m) throw ParseError("prior store state header mismatch");
    MovingState s(m, size);
    for (int c = 0; c < 3; ++c) {
      const int len = get<std::int32_t>(in, kWhat);
      if (len < 0) throw ParseError("prior store channel length is negative");
      auto& ch = s.channel(c);
      ch.reserve(static_cast<std::size_t>(len));
      for (int t = 0; t < len; ++t) {
        MovingState::Entry x;
        x.i = get<std::int32_t>(in, kWhat);
        x.j = get<std::int32_t>(in, kWhat);
        x.value = binio::get_f64(in, kWhat);
        if (x.i < 0 || x.i >= x.j || x.j >= size) throw ParseError("prior store entry out of range");
        ch.push_back(x);
      }
    }
    QNetwork net = QNetwork::read(in);
    if (!(net.shape() == shape)) throw ParseError("prior store network shape mismatch");
    store.entries_.push_back({std::move(s), std::move(net)});
  }
  return store;
}

void PriorStore::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot write prior store to " + path);
  write(out);
  if (!out) throw ArgumentError("failed writing prior store to " + path);
}

PriorStore PriorStore::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open prior store", path);
  return read(in);
}

}  // namespace qpath
