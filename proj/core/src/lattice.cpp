#include "hmrf/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "hmrf/errors.hpp"

namespace hmrf {

void LatticeDims::validate() const {
  if (rows < 1 || cols < 1 || frames < 1) {
    throw ArgumentError("lattice dimensions must be positive, got " + std::to_string(rows) + "x" +
                        std::to_string(cols) + "x" + std::to_string(frames));
  }
}

SpinField::SpinField(LatticeDims dims, Spin fill) : dims_(dims) {
  dims_.validate();
  if (fill != 1 && fill != -1) throw ArgumentError("spin fill must be +1 or -1");
  values_.assign(static_cast<std::size_t>(dims_.site_count()), fill);
}

SpinField::SpinField(LatticeDims dims, std::vector<Spin> values) : dims_(dims), values_(std::move(values)) {
  dims_.validate();
  if (values_.size() != static_cast<std::size_t>(dims_.site_count())) {
    throw ArgumentError("spin count " + std::to_string(values_.size()) + " does not match lattice size " +
                        std::to_string(dims_.site_count()));
  }
  for (Spin s : values_) {
    if (s != 1 && s != -1) throw ArgumentError("spin values must be +1 or -1");
  }
}

SpinField SpinField::random(LatticeDims dims, Rng& rng) {
  SpinField z(dims);
  for (auto& s : z.values_) s = rng.uniform() < 0.5 ? Spin{1} : Spin{-1};
  return z;
}

std::span<const Spin> SpinField::frame(int t) const {
  if (t < 0 || t >= dims_.frames) throw ArgumentError("frame index out of range");
  const auto n = static_cast<std::size_t>(dims_.frame_size());
  return {values_.data() + static_cast<std::size_t>(t) * n, n};
}

SpinField SpinField::frame_copy(int t) const {
  auto f = frame(t);
  return SpinField(dims_.frame_dims(), std::vector<Spin>(f.begin(), f.end()));
}

double SpinField::mean_spin() const {
  long sum = 0;
  for (Spin s : values_) sum += s;
  return static_cast<double>(sum) / static_cast<double>(values_.size());
}

ObservedField::ObservedField(LatticeDims dims, std::vector<double> values)
    : dims_(dims), values_(std::move(values)) {
  dims_.validate();
  if (values_.size() != static_cast<std::size_t>(dims_.site_count())) {
    throw ArgumentError("observation count " + std::to_string(values_.size()) +
                        " does not match lattice size " + std::to_string(dims_.site_count()));
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw ArgumentError("observations must be finite");
  }
}

double ObservedField::mean() const {
  return std::accumulate(values_.begin(), values_.end(), 0.0) / static_cast<double>(values_.size());
}

double ObservedField::variance() const {
  const double m = mean();
  double ss = 0.0;
  for (double v : values_) ss += (v - m) * (v - m);
  return ss / static_cast<double>(values_.size());
}

std::vector<int> neighbors(int site, const LatticeDims& dims) {
  dims.validate();
  if (site < 0 || site >= dims.frame_size()) {
    throw ArgumentError("site " + std::to_string(site) + " outside a " + std::to_string(dims.rows) + "x" +
                        std::to_string(dims.cols) + " frame");
  }
  const int r = site / dims.cols;
  const int c = site % dims.cols;
  std::vector<int> out;
  out.reserve(4);
  if (r > 0) out.push_back(site - dims.cols);
  if (r + 1 < dims.rows) out.push_back(site + dims.cols);
  if (c > 0) out.push_back(site - 1);
  if (c + 1 < dims.cols) out.push_back(site + 1);
  return out;
}

NeighborTable::NeighborTable(const LatticeDims& dims) {
  const int n = dims.frame_size();
  ids_.assign(4 * static_cast<std::size_t>(n), -1);
  count_.assign(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    auto nb = neighbors(i, dims);
    std::copy(nb.begin(), nb.end(), ids_.begin() + 4 * static_cast<std::ptrdiff_t>(i));
    count_[static_cast<std::size_t>(i)] = static_cast<int>(nb.size());
  }
}

int edge_count(const LatticeDims& dims) { return dims.rows * (dims.cols - 1) + dims.cols * (dims.rows - 1); }

int temporal_edge_count(const LatticeDims& dims) { return (dims.frames - 1) * dims.frame_size(); }

int neighbor_sum(const SpinField& z, int frame, int site) {
  const auto& d = z.dims();
  const int base = frame * d.frame_size();
  const int r = site / d.cols;
  const int c = site % d.cols;
  int sum = 0;
  if (r > 0) sum += z[base + site - d.cols];
  if (r + 1 < d.rows) sum += z[base + site + d.cols];
  if (c > 0) sum += z[base + site - 1];
  if (c + 1 < d.cols) sum += z[base + site + 1];
  return sum;
}

int spatial_stat(const SpinField& z, int frame) {
  const auto& d = z.dims();
  const int base = frame * d.frame_size();
  int s = 0;
  for (int r = 0; r < d.rows; ++r) {
    const int row = base + r * d.cols;
    for (int c = 0; c < d.cols; ++c) {
      const int v = z[row + c];
      if (c + 1 < d.cols) s += v * z[row + c + 1];
      if (r + 1 < d.rows) s += v * z[row + c + d.cols];
    }
  }
  return s;
}

int disagree_count(const SpinField& z, int frame) {
  return (edge_count(z.dims()) - spatial_stat(z, frame)) / 2;
}

long spatial_stat(const SpinField& z) {
  long total = 0;
  for (int t = 0; t < z.dims().frames; ++t) total += spatial_stat(z, t);
  return total;
}

long temporal_stat(const SpinField& z) {
  const auto& d = z.dims();
  const int n = d.frame_size();
  long total = 0;
  for (int t = 1; t < d.frames; ++t) {
    for (int i = 0; i < n; ++i) total += z[t * n + i] * z[(t - 1) * n + i];
  }
  return total;
}

std::vector<Block> block_partition(const LatticeDims& dims) {
  dims.validate();
  std::vector<Block> blocks;
  blocks.reserve(static_cast<std::size_t>(((dims.rows + 1) / 2) * ((dims.cols + 1) / 2)));
  for (int r0 = 0; r0 < dims.rows; r0 += 2) {
    for (int c0 = 0; c0 < dims.cols; c0 += 2) {
      Block b;
      const int h = std::min(2, dims.rows - r0);
      const int w = std::min(2, dims.cols - c0);
      for (int dr = 0; dr < h; ++dr) {
        for (int dc = 0; dc < w; ++dc) b.sites[static_cast<std::size_t>(b.size++)] = (r0 + dr) * dims.cols + c0 + dc;
      }
      auto position = [&](int site) {
        for (int k = 0; k < b.size; ++k) {
          if (b.sites[static_cast<std::size_t>(k)] == site) return k;
        }
        return -1;
      };
      for (int k = 0; k < b.size; ++k) {
        const int site = b.sites[static_cast<std::size_t>(k)];
        for (int nb : neighbors(site, dims)) {
          const int pos = position(nb);
          if (pos < 0) {
            auto& cnt = b.boundary_count[static_cast<std::size_t>(k)];
            b.boundary[static_cast<std::size_t>(k)][static_cast<std::size_t>(cnt++)] = nb;
          } else if (pos > k) {
            b.inner_edges[static_cast<std::size_t>(b.edge_count++)] = {k, pos};
          }
        }
      }
      blocks.push_back(b);
    }
  }
  return blocks;
}

}  // namespace hmrf
