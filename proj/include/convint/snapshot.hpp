#pragma once
#include <string>
#include <utility>
#include <vector>

#include "convint/grid.hpp"

namespace convint {

// A field holds either one value set per space-time point or one spatial slice.
struct Snapshot {
  Grid grid;
  double gamma = 0.0;
  std::vector<std::pair<std::string, Field>> fields;

  void add(const std::string& name, Field f);
  const Field& get(const std::string& name) const;
  bool has(const std::string& name) const;
  std::vector<std::string> roster() const;
};

// little-endian bytes: magic, header, header crc32, then per field data + crc32
std::string encode_snapshot(const Snapshot& s);
Snapshot decode_snapshot(const std::string& bytes);

void write_snapshot(const std::string& path, const Snapshot& s);
Snapshot read_snapshot(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& bytes);

}  // namespace convint
