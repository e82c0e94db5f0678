#pragma once

// Binary snapshot of bulk fields.
//
// Layout (all little-endian):
//   char[4]  magic "ESLB"
//   u32      version (1)
//   u32      n1, n2, levels, degree, components
//   u64      map_hash
//   f64      t
//   f64      data[components][levels][n1][n2]
//
// An interface snapshot uses levels = 1, degree = 0 and one component.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "elastoslab/dynamics.hpp"

namespace elastoslab {

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");

inline constexpr char kSnapshotMagic[4] = {'E', 'S', 'L', 'B'};
inline constexpr std::uint32_t kSnapshotVersion = 1;

struct Snapshot {
  std::uint32_t n1 = 0, n2 = 0, levels = 0, degree = 0, components = 0;
  std::uint64_t map_hash = 0;
  double t = 0.0;
  std::vector<double> data;

  std::size_t points() const { return std::size_t(n1) * n2 * levels; }
};

namespace snapshot_detail {

template <class T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
void get(std::istream& is, T& v, const std::string& path) {
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) throw Error(ErrorKind::Io, "truncated snapshot '" + path + "'");
}

}  // namespace snapshot_detail

inline void write_snapshot(const std::string& path, const Snapshot& s) {
  if (s.data.size() != s.points() * s.components) throw Error(ErrorKind::PreconditionViolated, "snapshot size mismatch");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
  using snapshot_detail::put;
  os.write(kSnapshotMagic, 4);
  for (auto v : {kSnapshotVersion, s.n1, s.n2, s.levels, s.degree, s.components}) put(os, v);
  put(os, s.map_hash);
  put(os, s.t);
  os.write(reinterpret_cast<const char*>(s.data.data()), static_cast<std::streamsize>(s.data.size() * sizeof(double)));
  if (!os) throw Error(ErrorKind::Io, "write failed for '" + path + "'");
}

inline Snapshot read_snapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::Io, "cannot read '" + path + "'");
  using snapshot_detail::get;
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kSnapshotMagic, 4) != 0)
    throw Error(ErrorKind::Io, "'" + path + "' is not a snapshot");
  std::uint32_t version = 0;
  get(is, version, path);
  if (version != kSnapshotVersion) throw Error(ErrorKind::Io, "unsupported snapshot version " + std::to_string(version));
  Snapshot s;
  for (auto* v : {&s.n1, &s.n2, &s.levels, &s.degree, &s.components}) get(is, *v, path);
  get(is, s.map_hash, path);
  get(is, s.t, path);
  s.data.resize(s.points() * s.components);
  const auto bytes = static_cast<std::streamsize>(s.data.size() * sizeof(double));
  if (!is.read(reinterpret_cast<char*>(s.data.data()), bytes)) throw Error(ErrorKind::Io, "truncated snapshot '" + path + "'");
  if (is.peek() != std::char_traits<char>::eof()) throw Error(ErrorKind::Io, "trailing bytes in '" + path + "'");
  return s;
}

/// Bulk fields of one grid, in the given order, sharing a map.
inline Snapshot bulk_snapshot(const std::vector<const BulkField*>& fields, double t) {
  const auto& g = fields.at(0)->grid();
  Snapshot s{std::uint32_t(g.n1), std::uint32_t(g.n2), std::uint32_t(g.levels()), std::uint32_t(g.degree),
             std::uint32_t(fields.size()), fields[0]->map_hash, t, {}};
  s.data.reserve(s.points() * s.components);
  for (const auto* f : fields) {
    BulkField::require_same(*fields[0], *f);
    s.data.insert(s.data.end(), f->data().begin(), f->data().end());
  }
  return s;
}

/// u1, u2, u3, then F columns F_1, F_2, F_3 with components 1..3 each (12 components).
inline Snapshot state_snapshot(const FlowState& st) {
  std::vector<const BulkField*> fs = {&st.u[0], &st.u[1], &st.u[2]};
  for (const auto& col : st.F)
    for (const auto& c : col) fs.push_back(&c);
  return bulk_snapshot(fs, st.t);
}

inline Snapshot interface_snapshot(const FlowState& st) {
  Snapshot s{std::uint32_t(st.f.n1()), std::uint32_t(st.f.n2()), 1, 0, 1, st.map->hash(), st.t, st.f.values()};
  return s;
}

/// Rebuilds component c of a bulk snapshot on grid g.
inline BulkField snapshot_component(const Snapshot& s, const SlabGrid& g, std::uint32_t c) {
  if (std::uint32_t(g.n1) != s.n1 || std::uint32_t(g.n2) != s.n2 || std::uint32_t(g.levels()) != s.levels ||
      std::uint32_t(g.degree) != s.degree)
    throw Error(ErrorKind::GridMismatch, "snapshot grid does not match");
  if (c >= s.components) throw Error(ErrorKind::PreconditionViolated, "snapshot component out of range");
  BulkField v(g);
  std::copy_n(s.data.begin() + static_cast<std::ptrdiff_t>(c * s.points()), s.points(), v.data().begin());
  v.map_hash = s.map_hash;
  return v;
}

}  // namespace elastoslab
