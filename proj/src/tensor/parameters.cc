#include "blockgnn/tensor/parameters.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "blockgnn/error.h"

namespace blockgnn::tensor {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

size_t ParameterSet::Add(std::string name, Tensor value) {
  if (Contains(name)) {
    throw Error(ErrorCode::kInvalidConfig, "duplicate parameter name '" + name + "'");
  }
  entries_.push_back({std::move(name), std::move(value)});
  return entries_.size() - 1;
}

size_t ParameterSet::IndexOf(const std::string& name) const {
  for (size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name == name) return i;
  }
  throw Error(ErrorCode::kIndexOutOfRange, "no parameter named '" + name + "'");
}

bool ParameterSet::Contains(const std::string& name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return true;
  }
  return false;
}

size_t ParameterSet::NumScalars() const {
  size_t n = 0;
  for (const auto& e : entries_) n += e.value.size();
  return n;
}

bool ParameterSet::operator==(const ParameterSet& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name != other.entries_[i].name) return false;
    if (!(entries_[i].value == other.entries_[i].value)) return false;
  }
  return true;
}

std::string SerializeCheckpoint(const Checkpoint& checkpoint) {
  nlohmann::json manifest = nlohmann::json::array();
  size_t offset = 0;
  for (const auto& e : checkpoint.parameters.entries()) {
    manifest.push_back({{"name", e.name}, {"shape", e.value.shape()}, {"offset", offset}});
    offset += e.value.size() * sizeof(double);
  }
  nlohmann::json header = {
      {"format_version", kCheckpointFormatVersion},
      {"metadata", checkpoint.metadata.is_null() ? nlohmann::json::object()
                                                 : checkpoint.metadata},
      {"parameters", manifest},
  };
  std::string out = header.dump();
  out.push_back('\n');
  const size_t data_start = out.size();
  out.resize(data_start + offset);
  char* dst = out.data() + data_start;
  for (const auto& e : checkpoint.parameters.entries()) {
    const size_t bytes = e.value.size() * sizeof(double);
    if (bytes > 0) std::memcpy(dst, e.value.data(), bytes);
    dst += bytes;
  }
  return out;
}

Checkpoint DeserializeCheckpoint(const std::string& bytes) {
  const size_t newline = bytes.find('\n');
  if (newline == std::string::npos) {
    throw Error(ErrorCode::kBadCheckpoint, "missing header terminator");
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(0, newline));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kBadCheckpoint, std::string("header is not JSON: ") + e.what());
  }
  if (!header.is_object() || !header.contains("format_version") ||
      !header.contains("parameters") || !header["parameters"].is_array()) {
    throw Error(ErrorCode::kBadCheckpoint, "header lacks format_version/parameters");
  }
  if (header["format_version"] != kCheckpointFormatVersion) {
    throw Error(ErrorCode::kBadCheckpoint,
                "unsupported format_version " + header["format_version"].dump());
  }
  const size_t data_start = newline + 1;
  const size_t data_size = bytes.size() - data_start;
  Checkpoint cp;
  cp.metadata = header.value("metadata", nlohmann::json::object());
  size_t expected_offset = 0;
  try {
    for (const auto& p : header["parameters"]) {
      const std::string name = p.at("name").get<std::string>();
      const auto shape = p.at("shape").get<std::vector<size_t>>();
      const size_t offset = p.at("offset").get<size_t>();
      const size_t n = NumElements(shape);
      if (offset != expected_offset || offset + n * sizeof(double) > data_size) {
        throw Error(ErrorCode::kBadCheckpoint, "parameter '" + name + "' out of bounds");
      }
      std::vector<double> values(n);
      if (n > 0) std::memcpy(values.data(), bytes.data() + data_start + offset, n * sizeof(double));
      cp.parameters.Add(name, Tensor(shape, std::move(values)));
      expected_offset = offset + n * sizeof(double);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kBadCheckpoint, std::string("bad manifest: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kBadCheckpoint) throw;
    throw Error(ErrorCode::kBadCheckpoint, e.what());
  }
  if (expected_offset != data_size) {
    throw Error(ErrorCode::kBadCheckpoint, "trailing or missing parameter data");
  }
  return cp;
}

void WriteCheckpoint(const std::string& path, const Checkpoint& checkpoint) {
  const std::string bytes = SerializeCheckpoint(checkpoint);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed for '" + path + "'");
}

Checkpoint ReadCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return DeserializeCheckpoint(ss.str());
}

}  // namespace blockgnn::tensor
