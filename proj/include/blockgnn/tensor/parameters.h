#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "blockgnn/tensor/tensor.h"
#include "json.hpp"

namespace blockgnn::tensor {

// Ordered, named collection of parameter tensors. Order is part of the
// checkpoint format and of the optimizer state layout.
class ParameterSet {
 public:
  struct Entry {
    std::string name;
    Tensor value;
  };

  // Throws Error(kInvalidConfig) on duplicate names.
  size_t Add(std::string name, Tensor value);

  size_t size() const { return entries_.size(); }
  const Entry& entry(size_t i) const { return entries_[i]; }
  Tensor& value(size_t i) { return entries_[i].value; }
  const Tensor& value(size_t i) const { return entries_[i].value; }

  // Throws Error(kIndexOutOfRange) if absent.
  size_t IndexOf(const std::string& name) const;
  bool Contains(const std::string& name) const;
  Tensor& operator[](const std::string& name) { return value(IndexOf(name)); }
  const Tensor& operator[](const std::string& name) const { return value(IndexOf(name)); }

  size_t NumScalars() const;
  const std::vector<Entry>& entries() const { return entries_; }

  bool operator==(const ParameterSet& other) const;

 private:
  std::vector<Entry> entries_;
};

// Checkpoint file layout:
//   line 1: JSON header terminated by '\n'; contains the caller's metadata
//           under "metadata" plus "format_version" and a "parameters"
//           manifest of {name, shape, offset} with offsets in bytes
//           relative to the start of the data section;
//   rest:   raw little-endian IEEE-754 doubles for each parameter in
//           manifest order.
inline constexpr int kCheckpointFormatVersion = 1;

struct Checkpoint {
  nlohmann::json metadata;
  ParameterSet parameters;
};

std::string SerializeCheckpoint(const Checkpoint& checkpoint);
// Throws Error(kBadCheckpoint).
Checkpoint DeserializeCheckpoint(const std::string& bytes);

void WriteCheckpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint ReadCheckpoint(const std::string& path);

}  // namespace blockgnn::tensor
