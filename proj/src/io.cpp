#include "stpod/io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>
#include <unistd.h>

#include "stpod/errors.hpp"

namespace stpod::io {

namespace fs = std::filesystem;

namespace {

constexpr const char* kMagic = "stpod-snapshot";
constexpr const char* kDbFormat = "stpod-rom-db";

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void put_le(std::string& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  char raw[8];
  std::memcpy(raw, &bits, 8);
  out.append(raw, 8);
}

double get_le(const char* p) {
  std::uint64_t bits;
  std::memcpy(&bits, p, 8);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  return std::bit_cast<double>(bits);
}

std::string read_all(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

long parse_long(const std::string& v, const std::string& key, const std::string& source) {
  try {
    std::size_t used = 0;
    const long out = std::stol(v, &used);
    if (used == v.size()) return out;
  } catch (const std::logic_error&) {
  }
  throw ParseError(source + ": bad integer '" + v + "' for " + key);
}

double parse_double(const std::string& v, const std::string& key, const std::string& source) {
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used == v.size()) return out;
  } catch (const std::logic_error&) {
  }
  throw ParseError(source + ": bad number '" + v + "' for " + key);
}

}  // namespace

std::string encode_snapshot(const SnapshotMatrix& s, Encoding enc) {
  if (!std::isfinite(s.parameter)) throw InvalidArgumentError("snapshot parameter must be finite");
  const std::string units = s.units.empty() ? std::string(default_units(s.kind)) : s.units;
  if (units.find_first_of(" \t\r\n=") != std::string::npos) {
    throw InvalidArgumentError("snapshot units must not contain whitespace or '='");
  }
  std::string out = std::string(kMagic) + " version=" + std::to_string(kSnapshotVersion) +
                    " encoding=" + (enc == Encoding::Binary ? "binary" : "text") +
                    " kind=" + std::string(to_string(s.kind)) +
                    " rows=" + std::to_string(s.values.rows()) +
                    " cols=" + std::to_string(s.values.cols()) +
                    " param=" + format_double(s.parameter) + " units=" + units;
  if (s.mode) out += " mode=" + std::to_string(*s.mode);
  out += '\n';
  if (enc == Encoding::Binary) {
    out.reserve(out.size() + 8 * static_cast<std::size_t>(s.values.size()));
    for (Eigen::Index i = 0; i < s.values.rows(); ++i) {
      for (Eigen::Index j = 0; j < s.values.cols(); ++j) put_le(out, s.values(i, j));
    }
  } else {
    for (Eigen::Index i = 0; i < s.values.rows(); ++i) {
      for (Eigen::Index j = 0; j < s.values.cols(); ++j) {
        if (j) out += ' ';
        out += format_double(s.values(i, j));
      }
      out += '\n';
    }
  }
  return out;
}

SnapshotMatrix decode_snapshot(const std::string& bytes, const std::string& source) {
  const auto eol = bytes.find('\n');
  if (eol == std::string::npos) throw ParseError(source + ": missing header line");
  std::istringstream header(bytes.substr(0, eol));
  std::string magic;
  header >> magic;
  if (magic != kMagic) throw ParseError(source + ": not a snapshot file");
  std::map<std::string, std::string> kv;
  for (std::string tok; header >> tok;) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw ParseError(source + ": malformed header token '" + tok + "'");
    kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  auto need = [&](const std::string& key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw ParseError(source + ": header lacks '" + key + "'");
    return it->second;
  };
  const long version = parse_long(need("version"), "version", source);
  if (version != kSnapshotVersion) {
    throw UnsupportedVersionError(source + ": unsupported snapshot format version " +
                                  std::to_string(version) + " (expected " +
                                  std::to_string(kSnapshotVersion) + ")");
  }
  SnapshotMatrix s;
  s.kind = field_kind_from_string(need("kind"));
  s.parameter = parse_double(need("param"), "param", source);
  if (!std::isfinite(s.parameter)) throw ParseError(source + ": parameter is not finite");
  s.units = need("units");
  if (kv.count("mode")) s.mode = static_cast<int>(parse_long(kv["mode"], "mode", source));
  const long rows = parse_long(need("rows"), "rows", source);
  const long cols = parse_long(need("cols"), "cols", source);
  if (rows < 0 || cols < 0) throw ParseError(source + ": negative dimensions");
  s.values.resize(rows, cols);

  const std::string& enc = need("encoding");
  const std::size_t body = eol + 1;
  if (enc == "binary") {
    const std::size_t expected = 8 * static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
    if (bytes.size() - body != expected) {
      throw ParseError(source + ": body has " + std::to_string(bytes.size() - body) +
                       " bytes, header promises " + std::to_string(expected));
    }
    const char* p = bytes.data() + body;
    for (long i = 0; i < rows; ++i) {
      for (long j = 0; j < cols; ++j, p += 8) s.values(i, j) = get_le(p);
    }
  } else if (enc == "text") {
    std::istringstream in(bytes.substr(body));
    std::string line;
    for (long i = 0; i < rows; ++i) {
      if (!std::getline(in, line)) {
        throw ParseError(source + ": body has " + std::to_string(i) + " rows, header promises " +
                         std::to_string(rows));
      }
      std::istringstream row(line);
      long j = 0;
      for (std::string tok; row >> tok; ++j) {
        if (j >= cols) throw ParseError(source + ": row " + std::to_string(i + 1) + " has too many values");
        s.values(i, j) = parse_double(tok, "row " + std::to_string(i + 1), source);
      }
      if (j != cols) throw ParseError(source + ": row " + std::to_string(i + 1) + " has too few values");
    }
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") != std::string::npos) {
        throw ParseError(source + ": body has more rows than the header promises");
      }
    }
  } else {
    throw ParseError(source + ": unknown encoding '" + enc + "'");
  }
  return s;
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error("failed writing " + path.string());
    }
  }
  fs::rename(tmp, path);
}

void write_snapshot(const fs::path& path, const SnapshotMatrix& s, Encoding enc) {
  write_file_atomic(path, encode_snapshot(s, enc));
}

SnapshotMatrix read_snapshot(const fs::path& path) {
  return decode_snapshot(read_all(path), path.string());
}

void write_database(const fs::path& dir, const RomDatabase& db) {
  db.validate();
  fs::create_directories(dir);
  nlohmann::json manifest;
  manifest["format"] = kDbFormat;
  manifest["format_version"] = db.format_version;
  manifest["field_kind"] = std::string(to_string(db.field_kind));
  manifest["mode"] = db.mode;
  manifest["ref_index"] = db.ref_index;
  manifest["rows"] = db.rows();
  manifest["cols"] = db.cols();
  manifest["params"] = db.params;
  manifest["created_by"] = "stpod rom build";
  nlohmann::json nodes = nlohmann::json::array();
  for (std::size_t k = 0; k < db.factors.size(); ++k) {
    const PodFactors& f = db.factors[k];
    const std::string stem = "node" + std::to_string(k);
    auto factor = [&](const Eigen::MatrixXd& m) {
      SnapshotMatrix s;
      s.kind = FieldKind::Factor;
      s.parameter = db.params[k];
      s.values = m;
      s.units = std::string(default_units(FieldKind::Factor));
      s.mode = static_cast<int>(db.mode);
      return s;
    };
    write_snapshot(dir / (stem + "_phi.bin"), factor(f.phi_p.matrix()));
    write_snapshot(dir / (stem + "_sigma.bin"), factor(f.sigma_p));
    write_snapshot(dir / (stem + "_psi.bin"), factor(f.psi_p.matrix()));
    nodes.push_back({{"param", db.params[k]},
                     {"phi", stem + "_phi.bin"},
                     {"sigma", stem + "_sigma.bin"},
                     {"psi", stem + "_psi.bin"}});
  }
  manifest["nodes"] = nodes;
  write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
}

RomDatabase read_database(const fs::path& dir) {
  const fs::path mpath = dir / "manifest.json";
  if (!fs::exists(mpath)) throw ParseError("no manifest.json in database directory " + dir.string());
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(read_all(mpath));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(mpath.string() + ": " + e.what());
  }
  RomDatabase db;
  try {
    if (m.at("format").get<std::string>() != kDbFormat) throw ParseError(mpath.string() + ": not a ROM database manifest");
    db.format_version = m.at("format_version").get<int>();
    if (db.format_version != RomDatabase::kFormatVersion) {
      throw UnsupportedVersionError(mpath.string() + ": unsupported database format version " +
                                    std::to_string(db.format_version));
    }
    db.field_kind = field_kind_from_string(m.at("field_kind").get<std::string>());
    db.mode = m.at("mode").get<Eigen::Index>();
    db.ref_index = m.at("ref_index").get<std::size_t>();
    db.params = m.at("params").get<std::vector<double>>();
    const auto& nodes = m.at("nodes");
    if (nodes.size() != db.params.size()) throw ParseError(mpath.string() + ": node list does not match params");
    for (const auto& node : nodes) {
      const auto load = [&](const char* key) {
        const fs::path p = dir / node.at(key).get<std::string>();
        if (!fs::exists(p)) throw ParseError("missing factor file " + p.string());
        return read_snapshot(p).values;
      };
      const Eigen::MatrixXd sigma = load("sigma");
      if (sigma.cols() != 1) throw ParseError(mpath.string() + ": singular value file is not a column");
      db.factors.push_back(PodFactors{StiefelPoint(load("phi")), sigma.col(0), StiefelPoint(load("psi"))});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(mpath.string() + ": " + e.what());
  }
  db.validate();
  return db;
}

}  // namespace stpod::io
