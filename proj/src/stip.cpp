/*
 * Copyright 2026 The FlyAct Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "flyact/stip.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "flyact/format.hpp"
#include "flyact/parallel.hpp"

namespace flyact {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Mirror without repeating the edge sample (..., v[2], v[1] | v[0], v[1], ...).
int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i = std::abs(i) % period;
  return i < n ? i : period - i;
}

Plane filter_x(const Plane& in, const std::vector<double>& sym_half,
               const std::vector<double>& anti_half, bool derivative) {
  Plane out(in.width, in.height);
  const int r = derivative ? static_cast<int>(anti_half.size())
                           : static_cast<int>(sym_half.size()) - 1;
  for (int y = 0; y < in.height; ++y) {
    const double* row = in.values.data() + in.index(0, y);
    double* out_row = out.values.data() + out.index(0, y);
    for (int x = 0; x < in.width; ++x) {
      double acc = derivative ? 0.0 : sym_half[0] * row[x];
      for (int k = 1; k <= r; ++k) {
        const double right = row[reflect_index(x + k, in.width)];
        const double left = row[reflect_index(x - k, in.width)];
        acc += derivative ? anti_half[k - 1] * (right - left)
                          : sym_half[k] * (right + left);
      }
      out_row[x] = acc;
    }
  }
  return out;
}

Plane filter_y(const Plane& in, const std::vector<double>& sym_half,
               const std::vector<double>& anti_half, bool derivative) {
  Plane out(in.width, in.height);
  const int r = derivative ? static_cast<int>(anti_half.size())
                           : static_cast<int>(sym_half.size()) - 1;
  for (int y = 0; y < in.height; ++y) {
    for (int x = 0; x < in.width; ++x) {
      double acc = derivative ? 0.0 : sym_half[0] * in.at(x, y);
      for (int k = 1; k <= r; ++k) {
        const double below = in.at(x, reflect_index(y + k, in.height));
        const double above = in.at(x, reflect_index(y - k, in.height));
        acc += derivative ? anti_half[k - 1] * (below - above)
                          : sym_half[k] * (below + above);
      }
      out.at(x, y) = acc;
    }
  }
  return out;
}

Plane smooth_xy(const Plane& in, const std::vector<double>& kernel) {
  return filter_y(filter_x(in, kernel, {}, false), kernel, {}, false);
}

struct GradientPair {
  Plane ix;
  Plane iy;
};

GradientPair scaled_gradients(const Plane& frame, double c) {
  if (frame.width < 4.0 * c || frame.height < 4.0 * c) {
    throw FrameTooSmall("frame " + std::to_string(frame.width) + "x" +
                        std::to_string(frame.height) + " is smaller than 4c = " +
                        std::to_string(4.0 * c));
  }
  const auto g = gaussian_kernel(c);
  const auto d = gaussian_deriv_kernel(c);
  GradientPair out;
  out.ix = filter_x(filter_y(frame, g, {}, false), {}, d, true);
  out.iy = filter_y(filter_x(frame, g, {}, false), {}, d, true);
  return out;
}

// Annulus offsets with inner <= |(dx, dy)| <= outer.
std::vector<std::pair<int, int>> annulus_offsets(double inner, double outer) {
  std::vector<std::pair<int, int>> offsets;
  const int r = static_cast<int>(std::floor(outer));
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      const double dist = std::sqrt(static_cast<double>(dx) * dx + static_cast<double>(dy) * dy);
      if (dist >= inner && dist <= outer) offsets.emplace_back(dx, dy);
    }
  }
  return offsets;
}

void check_same_shape(const Plane& a, const Plane& b, const char* what) {
  if (a.width != b.width || a.height != b.height) {
    throw DimensionMismatch(std::string(what) + ": maps are " + std::to_string(a.width) + "x" +
                            std::to_string(a.height) + " vs " + std::to_string(b.width) + "x" +
                            std::to_string(b.height));
  }
}

}  // namespace

DetectorConfig DetectorConfig::resolved() const {
  DetectorConfig out = *this;
  if (out.mask_inner_radius < 0.0) out.mask_inner_radius = out.spatial_scale_c;
  if (out.mask_outer_radius < 0.0) out.mask_outer_radius = 4.0 * out.spatial_scale_c;
  return out;
}

void DetectorConfig::validate() const {
  const DetectorConfig cfg = resolved();
  if (cfg.spatial_scale_c <= 0.0) throw DataError("spatial_scale_c must be > 0");
  if (cfg.suppression_strength_rho < 0.0) throw DataError("suppression strength must be >= 0");
  if (!(cfg.mask_inner_radius < cfg.mask_outer_radius)) {
    throw DataError("mask_inner_radius must be < mask_outer_radius");
  }
  if (cfg.temporal_scale_tau < 1) throw DataError("temporal_scale_tau must be >= 1");
  if (cfg.nms_block < 3 || cfg.nms_block % 2 == 0) {
    throw BadBlockSize("nms_block must be odd and >= 3");
  }
  if (cfg.temporal_threshold_frac < 0.0 || cfg.temporal_threshold_frac > 1.0 ||
      cfg.response_threshold_frac < 0.0 || cfg.response_threshold_frac > 1.0) {
    throw DataError("threshold fractions must lie in [0, 1]");
  }
}

std::vector<double> gaussian_kernel(double sigma) {
  const int r = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> half(r + 1);
  for (int i = 0; i <= r; ++i) half[i] = std::exp(-(i * i) / (2.0 * sigma * sigma));
  double sum = half[0];
  for (int i = 1; i <= r; ++i) sum += 2.0 * half[i];
  for (double& w : half) w /= sum;
  return half;
}

std::vector<double> gaussian_deriv_kernel(double sigma) {
  const int r = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> taps(r);
  double ramp = 0.0;
  for (int i = 1; i <= r; ++i) {
    taps[i - 1] = i * std::exp(-(i * i) / (2.0 * sigma * sigma));
    ramp += 2.0 * i * taps[i - 1];
  }
  for (double& t : taps) t /= ramp;
  return taps;
}

ResponseMap harris_response(const Plane& frame, double c, double kappa) {
  const auto [ix, iy] = scaled_gradients(frame, c);

  Plane a(frame.width, frame.height), b(frame.width, frame.height),
      cross(frame.width, frame.height);
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    a.values[i] = ix.values[i] * ix.values[i];
    b.values[i] = iy.values[i] * iy.values[i];
    cross.values[i] = ix.values[i] * iy.values[i];
  }
  const auto window = gaussian_kernel(2.0 * c);
  const Plane as = smooth_xy(a, window);
  const Plane bs = smooth_xy(b, window);
  const Plane cs = smooth_xy(cross, window);

  ResponseMap response(frame.width, frame.height);
  for (std::size_t i = 0; i < response.values.size(); ++i) {
    const double det = as.values[i] * bs.values[i] - cs.values[i] * cs.values[i];
    const double trace = as.values[i] + bs.values[i];
    response.values[i] = std::max(0.0, det - kappa * trace * trace);
  }
  return response;
}

OrientationMap orientation_map(const Plane& frame, double c) {
  const auto [ix, iy] = scaled_gradients(frame, c);
  OrientationMap angles(frame.width, frame.height);
  for (std::size_t i = 0; i < angles.values.size(); ++i) {
    angles.values[i] = (ix.values[i] == 0.0 && iy.values[i] == 0.0)
                           ? kNaN
                           : std::atan2(iy.values[i], ix.values[i]);
  }
  return angles;
}

ResponseMap suppression_term(const ResponseMap& s, const OrientationMap& o,
                             const DetectorConfig& cfg) {
  check_same_shape(s, o, "suppression_term");
  const DetectorConfig rc = cfg.resolved();
  const auto offsets = annulus_offsets(rc.mask_inner_radius, rc.mask_outer_radius);

  ResponseMap term(s.width, s.height);
  for (int y = 0; y < s.height; ++y) {
    for (int x = 0; x < s.width; ++x) {
      const double center = o.at(x, y);
      if (std::isnan(center)) continue;  // no orientation, no weights
      double acc = 0.0;
      for (const auto& [dx, dy] : offsets) {
        const int sx = x - dx;
        const int sy = y - dy;
        if (sx < 0 || sx >= s.width || sy < 0 || sy >= s.height) continue;
        const double neighbor = o.at(sx, sy);
        if (std::isnan(neighbor)) continue;
        const double weight = std::cos(center - neighbor);
        if (weight > 0.0) acc += s.at(sx, sy) * weight;
      }
      term.at(x, y) = acc;
    }
  }
  return term;
}

ResponseMap apply_suppression(const ResponseMap& s, const ResponseMap& t, double rho) {
  check_same_shape(s, t, "apply_suppression");
  if (rho < 0.0) throw DataError("suppression strength must be >= 0");
  ResponseMap c(s.width, s.height);
  for (std::size_t i = 0; i < c.values.size(); ++i) {
    c.values[i] = std::max(0.0, s.values[i] - rho * t.values[i]);
  }
  return c;
}

Volume temporal_energy(const FrameVolume& vol, int tau) {
  if (tau < 1) throw DataError("temporal scale must be >= 1");
  if (vol.num_frames < 2 * tau + 1) {
    throw TooFewFrames("temporal energy needs >= " + std::to_string(2 * tau + 1) +
                       " frames, volume has " + std::to_string(vol.num_frames));
  }
  const int w = vol.width, h = vol.height, n = vol.num_frames;

  Volume diff(w, h, n);
  for (int t = 1; t + 1 < n; ++t) {
    const auto prev = vol.frame(t - 1);
    const auto next = vol.frame(t + 1);
    double* out = diff.values.data() + diff.index(0, 0, t);
    for (std::size_t i = 0; i < prev.size(); ++i) {
      const double d = (next[i] - prev[i]) / 2.0;
      out[i] = d * d;
    }
  }

  const auto kernel = gaussian_kernel(static_cast<double>(tau));
  const int r = static_cast<int>(kernel.size()) - 1;
  Volume energy(w, h, n);
  const std::size_t plane = static_cast<std::size_t>(w) * h;
  for (int t = 1; t + 1 < n; ++t) {
    double* out = energy.values.data() + energy.index(0, 0, t);
    for (std::size_t i = 0; i < plane; ++i) {
      double acc = kernel[0] * diff.values[diff.index(0, 0, t) + i];
      for (int k = 1; k <= r; ++k) {
        const int fwd = reflect_index(t + k, n);
        const int back = reflect_index(t - k, n);
        acc += kernel[k] * (diff.values[diff.index(0, 0, fwd) + i] +
                            diff.values[diff.index(0, 0, back) + i]);
      }
      out[i] = acc;
    }
  }
  // frames 0 and n-1 (the difference stencil never fits there) stay 0
  return energy;
}

std::vector<InterestPoint> non_maxima_suppress(const Volume& c_volume, int block,
                                               double scale) {
  if (block < 3 || block % 2 == 0) throw BadBlockSize("NMS block must be odd and >= 3");
  const int r = block / 2;
  const int w = c_volume.width, h = c_volume.height, n = c_volume.num_frames;

  std::vector<InterestPoint> points;
  for (int t = 0; t < n; ++t) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double v = c_volume.at(x, y, t);
        if (v <= 0.0) continue;
        bool is_max = true;
        for (int dt = -r; dt <= r && is_max; ++dt) {
          const int tt = t + dt;
          if (tt < 0 || tt >= n) continue;
          for (int dy = -r; dy <= r && is_max; ++dy) {
            const int yy = y + dy;
            if (yy < 0 || yy >= h) continue;
            for (int dx = -r; dx <= r; ++dx) {
              const int xx = x + dx;
              if (xx < 0 || xx >= w) continue;
              if (dx == 0 && dy == 0 && dt == 0) continue;
              if (c_volume.at(xx, yy, tt) >= v) {
                is_max = false;
                break;
              }
            }
          }
        }
        if (is_max) points.push_back({x, y, t, scale, v});
      }
    }
  }
  return points;  // (t, y, x) iteration order is already the required sort
}

namespace {

// Detected corners are the frame-local maxima of the response map; the
// surround suppression counts detected corners around a candidate, not the
// candidate's own response skirt (which would drown every isolated corner).
ResponseMap corner_candidates(const ResponseMap& s) {
  ResponseMap sparse(s.width, s.height);
  for (int y = 0; y < s.height; ++y) {
    for (int x = 0; x < s.width; ++x) {
      const double v = s.at(x, y);
      if (v <= 0.0) continue;
      bool is_max = true;
      for (int dy = -1; dy <= 1 && is_max; ++dy) {
        const int yy = y + dy;
        if (yy < 0 || yy >= s.height) continue;
        for (int dx = -1; dx <= 1; ++dx) {
          const int xx = x + dx;
          if (xx < 0 || xx >= s.width || (dx == 0 && dy == 0)) continue;
          if (s.at(xx, yy) >= v) {
            is_max = false;
            break;
          }
        }
      }
      if (is_max) sparse.at(x, y) = v;
    }
  }
  return sparse;
}

}  // namespace

std::vector<InterestPoint> detect_sstip(const FrameVolume& vol, const DetectorConfig& cfg,
                                        int threads) {
  cfg.validate();
  const DetectorConfig rc = cfg.resolved();

  Volume suppressed(vol.width, vol.height, vol.num_frames);
  parallel_for(static_cast<std::size_t>(vol.num_frames), threads, [&](std::size_t ti) {
    const int t = static_cast<int>(ti);
    Plane frame(vol.width, vol.height);
    const auto src = vol.frame(t);
    std::copy(src.begin(), src.end(), frame.values.begin());

    const ResponseMap corners = corner_candidates(
        harris_response(frame, rc.spatial_scale_c, rc.kappa));
    const OrientationMap o = orientation_map(frame, rc.spatial_scale_c);
    const ResponseMap term = suppression_term(corners, o, rc);
    const ResponseMap c = apply_suppression(corners, term, rc.suppression_strength_rho);
    std::copy(c.values.begin(), c.values.end(),
              suppressed.values.begin() + static_cast<std::ptrdiff_t>(suppressed.index(0, 0, t)));
  });

  const Volume energy = temporal_energy(vol, rc.temporal_scale_tau);
  const double energy_max = *std::max_element(energy.values.begin(), energy.values.end());
  if (energy_max <= 0.0) return {};  // nothing moves anywhere
  const double energy_floor = rc.temporal_threshold_frac * energy_max;
  for (std::size_t i = 0; i < suppressed.values.size(); ++i) {
    if (energy.values[i] < energy_floor) suppressed.values[i] = 0.0;
  }

  const double response_max =
      *std::max_element(suppressed.values.begin(), suppressed.values.end());
  if (response_max <= 0.0) return {};
  const double response_floor = rc.response_threshold_frac * response_max;
  for (double& v : suppressed.values) {
    if (v < response_floor) v = 0.0;
  }

  return non_maxima_suppress(suppressed, rc.nms_block, rc.spatial_scale_c);
}

void write_points_csv(const std::filesystem::path& file,
                      const std::vector<InterestPoint>& points) {
  std::ofstream out(file);
  if (!out) throw DataError("cannot write " + file.string());
  out << "x,y,t,scale,response\n";
  for (const auto& p : points) {
    out << p.x << ',' << p.y << ',' << p.t << ',' << format_double(p.scale) << ','
        << format_double(p.response) << '\n';
  }
}

std::vector<InterestPoint> read_points_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw DataError("cannot open " + file.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty point file", 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "x,y,t,scale,response") throw ParseError("bad point CSV header", 1);

  std::vector<InterestPoint> points;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    InterestPoint p;
    std::stringstream ss(line);
    char c1, c2, c3, c4;
    ss >> p.x >> c1 >> p.y >> c2 >> p.t >> c3 >> p.scale >> c4 >> p.response;
    if (!ss || c1 != ',' || c2 != ',' || c3 != ',' || c4 != ',') {
      throw ParseError("bad point row", line_no);
    }
    points.push_back(p);
  }
  return points;
}

}  // namespace flyact
