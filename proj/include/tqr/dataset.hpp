#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tqr/tensor.hpp"

namespace tqr {

struct DatasetRecord {
  Tensor features;
  int label = 0;
};

// Labeled sample collection with a uniform per-sample feature shape.
struct Dataset {
  std::vector<DatasetRecord> records;
  std::vector<int> shape; // per-sample feature shape
  int classes = 0;

  long size() const { return long(records.size()); }

  // stacked (B, shape...) features and (B, classes) one-hot labels
  std::pair<Tensor, Tensor> batch(const std::vector<long>& indices) const;
  std::pair<Tensor, Tensor> full_batch() const;
};

// CIFAR-10 binary records: repeating 3073-byte blocks, one label byte then
// 32x32 channel-planar R,G,B pixels. Returned features are (32,32,3) tensors
// holding the raw byte values; labels keep their original class ids.
// Keeps only labels in class_subset (empty = all), at most cap records
// (cap <= 0 = unlimited).
std::vector<DatasetRecord> load_cifar10_binary(const std::string& path,
                                               const std::vector<int>& class_subset = {},
                                               long cap = 0);

// Inverse of the loader, for round-trip tests and synthetic corpora. Features
// must be (32,32,3) with integral values in [0,255].
void write_cifar10_binary(const std::string& path, const std::vector<DatasetRecord>& records);

// [0,255] RGB -> luminance (0.299R + 0.587G + 0.114B on [0,1] pixels), then
// gray*255 - 128 into [-128,127], then block-average downsample.
// downsample must divide the side length and be one of {1,2,4}.
DatasetRecord preprocess_grayscale(const DatasetRecord& raw, int downsample = 1);

// Grayscale-preprocess every record and remap labels to their position in
// class_subset (subset order = class id order of the result).
Dataset preprocess_cifar(const std::vector<DatasetRecord>& raw,
                         const std::vector<int>& class_subset, int downsample = 1);

enum class SyntheticKind { Gaussians, Checkerboard };

SyntheticKind synthetic_kind_from_name(const std::string& name);
std::string synthetic_kind_name(SyntheticKind k);

// gaussians: `classes` unit-variance clusters in 2-D with centers `separation`
// apart, labels assigned round-robin. checkerboard: uniform points on
// [-2,2)^2 labeled by XOR of unit-cell parity (always 2 classes).
Dataset synthesize_dataset(SyntheticKind kind, long n, std::uint64_t seed,
                           double separation = 8.0, int classes = 2);

} // namespace tqr
