#pragma once

// Internal: coordinate hashing used to identify coincident points.

#include "nestlab/geometry.hpp"

#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

namespace nestlab::detail {

class PointHash {
public:
  PointHash(int dim, double bucket) : dim_(dim), bucket_(bucket) {}

  /// Nearest stored point within `radius` (radius must be below the bucket side).
  /// Returns -1 when none.
  Index nearest(const double* p, double radius, double* dist_out = nullptr) const {
    std::int64_t lo[8], hi[8];
    for (int k = 0; k < dim_; ++k) {
      lo[k] = static_cast<std::int64_t>(std::floor((p[k] - radius) / bucket_));
      hi[k] = static_cast<std::int64_t>(std::floor((p[k] + radius) / bucket_));
    }
    Index best = -1;
    double best_d = radius;
    std::int64_t cur[8];
    const int combos = 1 << dim_;
    for (int c = 0; c < combos; ++c) {
      bool skip = false;
      for (int k = 0; k < dim_; ++k) {
        const bool up = (c >> k) & 1;
        if (up && hi[k] == lo[k]) {
          skip = true;
          break;
        }
        cur[k] = up ? hi[k] : lo[k];
      }
      if (skip) continue;
      auto it = buckets_.find(key(cur));
      if (it == buckets_.end()) continue;
      for (Index id : it->second) {
        const double* q = &coords_[static_cast<std::size_t>(slot_.at(id)) * dim_];
        double s = 0.0;
        for (int k = 0; k < dim_; ++k) s += (p[k] - q[k]) * (p[k] - q[k]);
        const double d = std::sqrt(s);
        if (d <= best_d) {
          if (best < 0 || d < best_d || id < best) best = id;
          best_d = d;
        }
      }
    }
    if (dist_out) *dist_out = best < 0 ? radius : best_d;
    return best;
  }

  void insert(const double* p, Index id) {
    std::int64_t cur[8];
    for (int k = 0; k < dim_; ++k) cur[k] = static_cast<std::int64_t>(std::floor(p[k] / bucket_));
    buckets_[key(cur)].push_back(id);
    slot_[id] = static_cast<Index>(coords_.size() / dim_);
    coords_.insert(coords_.end(), p, p + dim_);
  }

private:
  std::uint64_t key(const std::int64_t* c) const {
    std::uint64_t h = 1469598103934665603ULL;
    for (int k = 0; k < dim_; ++k) {
      h ^= static_cast<std::uint64_t>(c[k]) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
      h *= 1099511628211ULL;
    }
    return h;
  }

  int dim_;
  double bucket_;
  std::unordered_map<std::uint64_t, std::vector<Index>> buckets_;
  std::unordered_map<Index, Index> slot_;
  std::vector<double> coords_;
};

/// Deduplicated point set of level-`level` vertices of K (Psi^level(V0)).
Mat level_vertex_cloud(const FractalSpec& spec, int level);

}  // namespace nestlab::detail
