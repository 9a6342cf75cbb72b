#include "tqr/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "tqr/rng.hpp"

namespace tqr {

std::pair<Tensor, Tensor> Dataset::batch(const std::vector<long>& indices) const {
  if (indices.empty()) throw std::invalid_argument("empty dataset");
  std::vector<int> xshape = shape;
  xshape.insert(xshape.begin(), int(indices.size()));
  Tensor x(xshape);
  Tensor y({int(indices.size()), classes});
  const std::int64_t stride = shape_product(shape);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const DatasetRecord& r = records.at(std::size_t(indices[i]));
    if (r.features.size() != stride)
      throw std::invalid_argument("dataset record feature shape mismatch");
    std::copy(r.features.data(), r.features.data() + stride, x.data() + std::int64_t(i) * stride);
    if (r.label < 0 || r.label >= classes)
      throw std::invalid_argument("dataset record label out of range");
    y[std::int64_t(i) * classes + r.label] = 1.0;
  }
  return {std::move(x), std::move(y)};
}

std::pair<Tensor, Tensor> Dataset::full_batch() const {
  std::vector<long> idx(records.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = long(i);
  return batch(idx);
}

namespace {

constexpr std::int64_t kCifarRecordBytes = 3073; // label byte + 32*32*3 pixels
constexpr int kCifarSide = 32;

} // namespace

std::vector<DatasetRecord> load_cifar10_binary(const std::string& path,
                                               const std::vector<int>& class_subset, long cap) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open dataset file: " + path);
  is.seekg(0, std::ios::end);
  const std::int64_t bytes = is.tellg();
  is.seekg(0, std::ios::beg);
  if (bytes % kCifarRecordBytes != 0)
    throw std::runtime_error("corrupt record stream: " + path + " holds " +
                             std::to_string(bytes) + " bytes, not a multiple of 3073");
  const std::int64_t n = bytes / kCifarRecordBytes;
  std::vector<DatasetRecord> out;
  std::vector<unsigned char> buf(kCifarRecordBytes);
  for (std::int64_t rec = 0; rec < n; ++rec) {
    if (!is.read(reinterpret_cast<char*>(buf.data()), kCifarRecordBytes))
      throw std::runtime_error("corrupt record stream: short read in " + path);
    const int label = buf[0];
    if (label >= 10)
      throw std::runtime_error("record " + std::to_string(rec) + " has label byte " +
                               std::to_string(label) + ", expected < 10");
    if (!class_subset.empty() &&
        std::find(class_subset.begin(), class_subset.end(), label) == class_subset.end())
      continue;
    DatasetRecord r;
    r.label = label;
    r.features = Tensor({kCifarSide, kCifarSide, 3});
    for (int c = 0; c < 3; ++c)
      for (int yx = 0; yx < kCifarSide * kCifarSide; ++yx)
        r.features[std::int64_t(yx) * 3 + c] = double(buf[1 + c * kCifarSide * kCifarSide + yx]);
    out.push_back(std::move(r));
    if (cap > 0 && long(out.size()) >= cap) break;
  }
  return out;
}

void write_cifar10_binary(const std::string& path, const std::vector<DatasetRecord>& records) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open dataset file for writing: " + path);
  std::vector<unsigned char> buf(kCifarRecordBytes);
  for (const DatasetRecord& r : records) {
    if (r.features.shape() != std::vector<int>{kCifarSide, kCifarSide, 3})
      throw std::invalid_argument("record features must be (32,32,3) to serialize");
    if (r.label < 0 || r.label >= 10) throw std::invalid_argument("record label must be in [0,10)");
    buf[0] = static_cast<unsigned char>(r.label);
    for (int c = 0; c < 3; ++c)
      for (int yx = 0; yx < kCifarSide * kCifarSide; ++yx) {
        const double v = r.features[std::int64_t(yx) * 3 + c];
        if (v < 0.0 || v > 255.0 || v != std::floor(v))
          throw std::invalid_argument("record pixels must be integral bytes in [0,255]");
        buf[1 + c * kCifarSide * kCifarSide + yx] = static_cast<unsigned char>(v);
      }
    os.write(reinterpret_cast<const char*>(buf.data()), kCifarRecordBytes);
  }
  if (!os) throw std::runtime_error("failed writing dataset file: " + path);
}

DatasetRecord preprocess_grayscale(const DatasetRecord& raw, int downsample) {
  if (raw.features.ndim() != 3 || raw.features.dim(2) != 3)
    throw std::invalid_argument("grayscale preprocessing expects (h,w,3) raw features");
  if (downsample != 1 && downsample != 2 && downsample != 4)
    throw std::invalid_argument("downsample factor must be 1, 2, or 4");
  const int h = raw.features.dim(0), w = raw.features.dim(1);
  if (h % downsample != 0 || w % downsample != 0)
    throw std::invalid_argument("downsample factor must divide the image side");
  Tensor gray({h, w});
  for (int i = 0; i < h * w; ++i) {
    const double r = raw.features[std::int64_t(i) * 3 + 0] / 255.0;
    const double g = raw.features[std::int64_t(i) * 3 + 1] / 255.0;
    const double b = raw.features[std::int64_t(i) * 3 + 2] / 255.0;
    const double lum = 0.299 * r + 0.587 * g + 0.114 * b;
    gray[i] = lum * 255.0 - 128.0;
  }
  const int oh = h / downsample, ow = w / downsample;
  DatasetRecord out;
  out.label = raw.label;
  out.features = Tensor({oh, ow, 1});
  const double inv_block = 1.0 / (double(downsample) * downsample);
  for (int oy = 0; oy < oh; ++oy)
    for (int ox = 0; ox < ow; ++ox) {
      double acc = 0.0;
      for (int dy = 0; dy < downsample; ++dy)
        for (int dx = 0; dx < downsample; ++dx)
          acc += gray[std::int64_t(oy * downsample + dy) * w + ox * downsample + dx];
      out.features[std::int64_t(oy) * ow + ox] = acc * inv_block;
    }
  return out;
}

Dataset preprocess_cifar(const std::vector<DatasetRecord>& raw,
                         const std::vector<int>& class_subset, int downsample) {
  if (class_subset.empty()) throw std::invalid_argument("class subset must be non-empty");
  Dataset d;
  d.classes = int(class_subset.size());
  d.shape = {kCifarSide / downsample, kCifarSide / downsample, 1};
  for (const DatasetRecord& r : raw) {
    auto pos = std::find(class_subset.begin(), class_subset.end(), r.label);
    if (pos == class_subset.end()) continue;
    DatasetRecord p = preprocess_grayscale(r, downsample);
    p.label = int(pos - class_subset.begin());
    d.records.push_back(std::move(p));
  }
  return d;
}

SyntheticKind synthetic_kind_from_name(const std::string& name) {
  if (name == "gaussians") return SyntheticKind::Gaussians;
  if (name == "checkerboard") return SyntheticKind::Checkerboard;
  throw std::invalid_argument("unknown synthetic dataset kind: " + name);
}

std::string synthetic_kind_name(SyntheticKind k) {
  return k == SyntheticKind::Gaussians ? "gaussians" : "checkerboard";
}

Dataset synthesize_dataset(SyntheticKind kind, long n, std::uint64_t seed, double separation,
                           int classes) {
  if (n < 2) throw std::invalid_argument("synthetic dataset needs at least two samples");
  RngStream rng(seed);
  Dataset d;
  d.shape = {2};
  if (kind == SyntheticKind::Gaussians) {
    if (classes < 2) throw std::invalid_argument("gaussians need at least two classes");
    d.classes = classes;
    std::vector<std::pair<double, double>> centers;
    centers.resize(std::size_t(classes));
    if (classes == 2) {
      centers[0] = {-separation / 2.0, 0.0};
      centers[1] = {separation / 2.0, 0.0};
    } else {
      // centers on a circle sized so neighbours sit `separation` apart
      const double radius = separation / (2.0 * std::sin(M_PI / classes));
      for (int k = 0; k < classes; ++k) {
        const double a = 2.0 * M_PI * k / classes;
        centers[std::size_t(k)] = {radius * std::cos(a), radius * std::sin(a)};
      }
    }
    for (long i = 0; i < n; ++i) {
      DatasetRecord r;
      r.label = int(i % classes);
      r.features = Tensor({2});
      r.features[0] = centers[std::size_t(r.label)].first + rng.normal();
      r.features[1] = centers[std::size_t(r.label)].second + rng.normal();
      d.records.push_back(std::move(r));
    }
  } else {
    d.classes = 2;
    for (long i = 0; i < n; ++i) {
      DatasetRecord r;
      r.features = Tensor({2});
      r.features[0] = rng.uniform(-2.0, 2.0);
      r.features[1] = rng.uniform(-2.0, 2.0);
      const long cx = long(std::floor(r.features[0])), cy = long(std::floor(r.features[1]));
      r.label = int(((cx + cy) % 2 + 2) % 2);
      d.records.push_back(std::move(r));
    }
  }
  return d;
}

} // namespace tqr
