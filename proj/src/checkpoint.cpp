#include "routediff/checkpoint.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "binio.hpp"

namespace routediff {

namespace {
constexpr char kMagic[6] = {'R', 'D', 'C', 'K', 'P', 'T'};
constexpr std::uint16_t kVersion = 1;
}  // namespace

void save_checkpoint(const std::string& path, const std::vector<NamedParam>& params) {
  for (const NamedParam& p : params) {
    for (double v : p.tensor.data()) {
      if (!std::isfinite(v)) {
        throw std::runtime_error("save_checkpoint: parameter '" + p.name +
                                 "' contains non-finite values");
      }
    }
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("save_checkpoint: cannot open " + path);
  os.write(kMagic, sizeof(kMagic));
  binio::write_u16(os, kVersion);
  binio::write_u32(os, static_cast<std::uint32_t>(params.size()));
  for (const NamedParam& p : params) {
    binio::write_string(os, p.name);
    const Shape& s = p.tensor.shape();
    binio::write_u8(os, static_cast<std::uint8_t>(s.size()));
    for (int d : s) binio::write_u32(os, static_cast<std::uint32_t>(d));
  }
  for (const NamedParam& p : params) {
    for (double v : p.tensor.data()) binio::write_f64(os, v);
  }
  if (!os) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

void load_checkpoint(const std::string& path, std::vector<NamedParam>& params) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_checkpoint: cannot open " + path);
  char magic[6];
  if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("load_checkpoint: bad magic header in " + path);
  }
  const std::uint16_t version = binio::read_u16(is, "checkpoint version");
  if (version != kVersion) {
    throw std::runtime_error("load_checkpoint: unsupported format version " +
                             std::to_string(version) + " (expected " +
                             std::to_string(kVersion) + ")");
  }
  const std::uint32_t count = binio::read_u32(is, "parameter count");

  struct Entry {
    std::string name;
    Shape shape;
  };
  std::vector<Entry> manifest;
  manifest.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    Entry e;
    e.name = binio::read_string(is, "parameter name");
    const std::uint8_t ndim = binio::read_u8(is, "parameter rank");
    for (std::uint8_t d = 0; d < ndim; ++d) {
      e.shape.push_back(static_cast<int>(binio::read_u32(is, "parameter dimension")));
    }
    manifest.push_back(std::move(e));
  }

  // Compare the whole manifest before loading payloads so the error reports
  // every divergent field at once.
  std::ostringstream diff;
  if (manifest.size() != params.size()) {
    diff << "  parameter count: checkpoint has " << manifest.size() << ", model expects "
         << params.size() << "\n";
  }
  const std::size_t common = std::min(manifest.size(), params.size());
  for (std::size_t i = 0; i < common; ++i) {
    if (manifest[i].name != params[i].name) {
      diff << "  entry " << i << ": name '" << manifest[i].name << "' vs expected '"
           << params[i].name << "'\n";
    } else if (manifest[i].shape != params[i].tensor.shape()) {
      diff << "  entry " << i << " ('" << params[i].name << "'): shape "
           << shape_str(manifest[i].shape) << " vs expected "
           << shape_str(params[i].tensor.shape()) << "\n";
    }
  }
  if (const std::string d = diff.str(); !d.empty()) {
    throw std::runtime_error("load_checkpoint: manifest mismatch in " + path + ":\n" + d);
  }

  for (NamedParam& p : params) {
    auto data = p.tensor.data_mut();
    for (double& v : data) v = binio::read_f64(is, "parameter payload");
  }
}

}  // namespace routediff
