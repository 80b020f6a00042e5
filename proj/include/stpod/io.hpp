#pragma once

// Snapshot files: one header line of key=value tokens,
//   stpod-snapshot version=1 encoding=binary kind=velocity rows=242 cols=7 param=0.5 units=mm/s
// followed by the row-major body, either little-endian float64 (binary) or
// one line per row with 17 significant digits (text).
//
// A ROM database is a directory holding manifest.json and three factor files
// per training node.

#include <filesystem>
#include <string>

#include "stpod/interp.hpp"
#include "stpod/snapshot.hpp"

namespace stpod::io {

inline constexpr int kSnapshotVersion = 1;

enum class Encoding { Binary, Text };

/// Atomic: the file is written next to `path` and renamed into place.
void write_snapshot(const std::filesystem::path& path, const SnapshotMatrix& s,
                    Encoding enc = Encoding::Binary);

/// Throws ParseError on a malformed file (including a body whose length does
/// not match the header) and UnsupportedVersionError on another version.
SnapshotMatrix read_snapshot(const std::filesystem::path& path);

/// Serialized form used by write_snapshot; exposed for tests.
std::string encode_snapshot(const SnapshotMatrix& s, Encoding enc);
SnapshotMatrix decode_snapshot(const std::string& bytes, const std::string& source = "<memory>");

/// Replaces `path` atomically with `contents`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

void write_database(const std::filesystem::path& dir, const RomDatabase& db);
RomDatabase read_database(const std::filesystem::path& dir);

}  // namespace stpod::io
