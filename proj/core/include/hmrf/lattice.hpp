#pragma once

// Lattice geometry, spin fields and the sufficient statistics shared by every
// sampler and estimator.
//
// Sites are indexed row-major inside a frame (site = row * cols + col) and
// frames are stacked outermost (global index = frame * rows * cols + site).
// The boundary is free: border sites simply have fewer neighbors.

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "hmrf/rng.hpp"

namespace hmrf {

struct LatticeDims {
  int rows = 1;
  int cols = 1;
  int frames = 1;

  int frame_size() const noexcept { return rows * cols; }
  int site_count() const noexcept { return rows * cols * frames; }

  /// Throws ArgumentError unless rows, cols, frames are all >= 1.
  void validate() const;

  LatticeDims frame_dims() const noexcept { return {rows, cols, 1}; }

  friend bool operator==(const LatticeDims&, const LatticeDims&) = default;
};

using Spin = std::int8_t;

/// Spins in {-1, +1} over a (possibly multi-frame) lattice.
///
/// A single-frame field is the hidden state of the spatial model; a
/// multi-frame field is the spatio-temporal hidden state.
class SpinField {
 public:
  SpinField() = default;
  explicit SpinField(LatticeDims dims, Spin fill = 1);
  SpinField(LatticeDims dims, std::vector<Spin> values);

  static SpinField random(LatticeDims dims, Rng& rng);

  const LatticeDims& dims() const noexcept { return dims_; }
  std::size_t size() const noexcept { return values_.size(); }

  Spin operator[](int index) const { return values_[static_cast<std::size_t>(index)]; }
  Spin& operator[](int index) { return values_[static_cast<std::size_t>(index)]; }

  Spin at(int frame, int site) const { return (*this)[frame * dims_.frame_size() + site]; }
  void set(int frame, int site, Spin value) { (*this)[frame * dims_.frame_size() + site] = value; }
  void flip(int index) { (*this)[index] = static_cast<Spin>(-(*this)[index]); }

  std::span<const Spin> values() const noexcept { return values_; }
  std::span<const Spin> frame(int t) const;
  SpinField frame_copy(int t) const;

  double mean_spin() const;

  friend bool operator==(const SpinField&, const SpinField&) = default;

 private:
  LatticeDims dims_{};
  std::vector<Spin> values_;
};

/// Real-valued observations laid out like the hidden field.
class ObservedField {
 public:
  ObservedField() = default;
  ObservedField(LatticeDims dims, std::vector<double> values);

  const LatticeDims& dims() const noexcept { return dims_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](int index) const { return values_[static_cast<std::size_t>(index)]; }
  std::span<const double> values() const noexcept { return values_; }

  double mean() const;
  /// Population variance (divides by the site count).
  double variance() const;

  friend bool operator==(const ObservedField&, const ObservedField&) = default;

 private:
  LatticeDims dims_{};
  std::vector<double> values_;
};

/// First-order neighbors of an in-frame site, in the order up, down, left,
/// right with out-of-lattice entries dropped.
std::vector<int> neighbors(int site, const LatticeDims& dims);

/// Precomputed neighbor lists for every in-frame site.
class NeighborTable {
 public:
  explicit NeighborTable(const LatticeDims& dims);

  std::span<const int> of(int site) const {
    return {ids_.data() + 4 * static_cast<std::size_t>(site),
            static_cast<std::size_t>(count_[static_cast<std::size_t>(site)])};
  }
  int frame_size() const noexcept { return static_cast<int>(count_.size()); }

 private:
  std::vector<int> ids_;
  std::vector<int> count_;
};

/// Number of unordered first-order edges in one frame.
int edge_count(const LatticeDims& dims);

/// Number of temporal edges (pairs (t-1, t) at the same site).
int temporal_edge_count(const LatticeDims& dims);

/// Sum of the spatial neighbors of `site` in frame `frame`.
int neighbor_sum(const SpinField& z, int frame, int site);

/// Disagreeing unordered edges in one frame.
int disagree_count(const SpinField& z, int frame = 0);

/// S(z) = sum over unordered edges of z_i z_j in one frame.
int spatial_stat(const SpinField& z, int frame);

/// T1(z): S summed over all frames (equals S for a single frame).
long spatial_stat(const SpinField& z);

/// T2(z) = sum_{t>=2} sum_w z_{t,w} z_{t-1,w}; zero for a single frame.
long temporal_stat(const SpinField& z);

/// A group of at most four sites updated jointly by the block sampler.
///
/// `inner_edges` holds positions into `sites`; `boundary[k]` lists the
/// in-frame neighbors of `sites[k]` that lie outside the block.
struct Block {
  int size = 0;
  std::array<int, 4> sites{};
  int edge_count = 0;
  std::array<std::pair<int, int>, 4> inner_edges{};
  std::array<int, 4> boundary_count{};
  std::array<std::array<int, 4>, 4> boundary{};

  std::span<const int> site_span() const { return {sites.data(), static_cast<std::size_t>(size)}; }
  std::span<const int> boundary_of(int k) const {
    return {boundary[static_cast<std::size_t>(k)].data(),
            static_cast<std::size_t>(boundary_count[static_cast<std::size_t>(k)])};
  }
};

/// Tiles one frame with non-overlapping 2x2 blocks anchored at even offsets.
/// An odd trailing row or column yields 2x1, 1x2 and 1x1 remainder blocks.
/// Blocks are returned in row-major order of their anchors.
std::vector<Block> block_partition(const LatticeDims& dims);

}  // namespace hmrf
