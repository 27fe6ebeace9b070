#include "convint/snapshot.hpp"

#include <zlib.h>

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "convint/errors.hpp"

namespace convint {

namespace {

constexpr char kMagic[5] = {'W', 'F', 'L', 'D', '1'};

class Writer {
 public:
  void bytes(const void* p, std::size_t n) { out.append(static_cast<const char*>(p), n); }
  template <class T>
  void le(T x) {
    unsigned char b[sizeof(T)];
    std::uint64_t u = 0;
    if constexpr (std::is_floating_point_v<T>) u = std::bit_cast<std::uint64_t>(double(x));
    else u = std::uint64_t(x);
    for (std::size_t i = 0; i < sizeof(T); ++i) b[i] = static_cast<unsigned char>(u >> (8 * i));
    bytes(b, sizeof(T));
  }
  std::string out;
};

class Reader {
 public:
  explicit Reader(const std::string& s) : s_(s) {}
  void need(std::size_t n) const {
    if (pos + n > s_.size()) fail(ErrorKind::checksum, "snapshot: truncated data");
  }
  template <class T>
  T le() {
    need(sizeof(T));
    std::uint64_t u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) u |= std::uint64_t(static_cast<unsigned char>(s_[pos + i])) << (8 * i);
    pos += sizeof(T);
    if constexpr (std::is_floating_point_v<T>) return std::bit_cast<double>(u);
    else return T(u);
  }
  std::string str(std::size_t n) {
    need(n);
    std::string r = s_.substr(pos, n);
    pos += n;
    return r;
  }
  std::uint32_t crc_since(std::size_t start) const {
    return std::uint32_t(crc32(0L, reinterpret_cast<const Bytef*>(s_.data() + start), uInt(pos - start)));
  }
  std::size_t pos = 0;

 private:
  const std::string& s_;
};

std::uint32_t crc_of(const std::string& s, std::size_t start) {
  return std::uint32_t(crc32(0L, reinterpret_cast<const Bytef*>(s.data() + start), uInt(s.size() - start)));
}

}  // namespace

void Snapshot::add(const std::string& name, Field f) {
  if (has(name)) fail(ErrorKind::invalid_input, "snapshot: duplicate field " + name);
  fields.emplace_back(name, std::move(f));
}

const Field& Snapshot::get(const std::string& name) const {
  for (const auto& [k, f] : fields)
    if (k == name) return f;
  fail(ErrorKind::invalid_input, "snapshot: no field " + name);
}

bool Snapshot::has(const std::string& name) const {
  for (const auto& kv : fields)
    if (kv.first == name) return true;
  return false;
}

std::vector<std::string> Snapshot::roster() const {
  std::vector<std::string> r;
  for (const auto& kv : fields) r.push_back(kv.first);
  return r;
}

std::string encode_snapshot(const Snapshot& s) {
  const Grid& g = s.grid;
  g.validate();
  std::set<std::string> seen;
  for (const auto& [name, f] : s.fields) {
    if (name.empty() || name.size() > 65535) fail(ErrorKind::invalid_input, "snapshot: bad field name");
    if (!seen.insert(name).second) fail(ErrorKind::invalid_input, "snapshot: duplicate field " + name);
    if (f.points() != g.points() && f.points() != g.spatial_points())
      fail(ErrorKind::invalid_input, "snapshot: field " + name + " does not match the grid");
  }
  Writer w;
  w.bytes(kMagic, 5);
  w.le<std::uint32_t>(std::uint32_t(g.n));
  for (int a = 0; a < 3; ++a) w.le<std::uint32_t>(std::uint32_t(g.N[a]));
  w.le<std::uint32_t>(std::uint32_t(g.Nt));
  w.le<std::uint8_t>(static_cast<std::uint8_t>(g.layout));
  w.le<double>(g.t0);
  w.le<double>(g.t1);
  for (int a = 0; a < 3; ++a) w.le<double>(g.lo[a]);
  for (int a = 0; a < 3; ++a) w.le<double>(g.len[a]);
  w.le<double>(s.gamma);
  w.le<std::uint32_t>(std::uint32_t(s.fields.size()));
  for (const auto& [name, f] : s.fields) {
    w.le<std::uint16_t>(std::uint16_t(name.size()));
    w.bytes(name.data(), name.size());
    w.le<std::uint32_t>(std::uint32_t(f.comps));
    w.le<std::uint8_t>(f.points() == g.points() ? 1 : 0);
  }
  w.le<std::uint32_t>(crc_of(w.out, 0));
  for (const auto& kv : s.fields) {
    std::size_t start = w.out.size();
    for (double x : kv.second.v) w.le<double>(x);
    w.le<std::uint32_t>(crc_of(w.out, start));
  }
  return w.out;
}

Snapshot decode_snapshot(const std::string& bytes) {
  Reader r(bytes);
  if (bytes.size() < 5 || std::memcmp(bytes.data(), kMagic, 5) != 0)
    fail(ErrorKind::checksum, "snapshot: bad magic or version");
  r.pos = 5;
  Snapshot s;
  Grid& g = s.grid;
  g.n = int(r.le<std::uint32_t>());
  for (int a = 0; a < 3; ++a) g.N[a] = int(r.le<std::uint32_t>());
  g.Nt = int(r.le<std::uint32_t>());
  std::uint8_t lay = r.le<std::uint8_t>();
  if (lay > 1) fail(ErrorKind::checksum, "snapshot: bad time layout");
  g.layout = static_cast<TimeLayout>(lay);
  g.t0 = r.le<double>();
  g.t1 = r.le<double>();
  for (int a = 0; a < 3; ++a) g.lo[a] = r.le<double>();
  for (int a = 0; a < 3; ++a) g.len[a] = r.le<double>();
  s.gamma = r.le<double>();
  std::uint32_t nf = r.le<std::uint32_t>();
  if (nf > 4096) fail(ErrorKind::checksum, "snapshot: implausible field count");
  struct Entry {
    std::string name;
    int comps;
    bool full;
  };
  std::vector<Entry> roster;
  for (std::uint32_t i = 0; i < nf; ++i) {
    std::uint16_t len = r.le<std::uint16_t>();
    Entry e;
    e.name = r.str(len);
    e.comps = int(r.le<std::uint32_t>());
    e.full = r.le<std::uint8_t>() != 0;
    roster.push_back(e);
  }
  std::uint32_t want = r.crc_since(0);
  if (r.le<std::uint32_t>() != want) fail(ErrorKind::checksum, "snapshot: header checksum mismatch");
  try {
    g.validate();
  } catch (const Error& e) {
    fail(ErrorKind::checksum, std::string("snapshot: header describes an invalid grid: ") + e.what());
  }
  for (const auto& e : roster) {
    if (e.comps < 1 || e.comps > 64) fail(ErrorKind::checksum, "snapshot: bad component count");
    std::size_t pts = e.full ? g.points() : g.spatial_points();
    std::size_t start = r.pos;
    r.need(pts * e.comps * 8 + 4);
    Field f(pts, e.comps);
    for (double& x : f.v) x = r.le<double>();
    std::uint32_t c = r.crc_since(start);
    if (r.le<std::uint32_t>() != c) fail(ErrorKind::checksum, "snapshot: data checksum mismatch in " + e.name);
    s.add(e.name, std::move(f));
  }
  if (r.pos != bytes.size()) fail(ErrorKind::checksum, "snapshot: trailing bytes");
  return s;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::invalid_input, "cannot open " + path);
  std::ostringstream o;
  o << in.rdbuf();
  return o.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::invalid_input, "cannot write " + path);
  out.write(bytes.data(), std::streamsize(bytes.size()));
  if (!out) fail(ErrorKind::invalid_input, "write failed for " + path);
}

void write_snapshot(const std::string& path, const Snapshot& s) { write_file(path, encode_snapshot(s)); }

Snapshot read_snapshot(const std::string& path) { return decode_snapshot(read_file(path)); }

}  // namespace convint
