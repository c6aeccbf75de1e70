#include "vigil/saliency.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <tuple>

namespace vigil::saliency {

Heatmap combine_feature_maps(std::span<const double> weights,
                             std::span<const Grid> maps, int source_frame) {
  if (maps.empty() || weights.size() != maps.size()) {
    throw ShapeMismatch("weights and feature maps must pair up, at least one");
  }
  for (std::size_t k = 1; k < maps.size(); ++k) {
    if (!maps[k].same_shape(maps[0])) {
      throw ShapeMismatch("feature maps must share dimensions");
    }
  }
  Heatmap h{Grid(maps[0].rows(), maps[0].cols()), source_frame};
  for (int r = 0; r < h.grid.rows(); ++r) {
    for (int c = 0; c < h.grid.cols(); ++c) {
      double acc = 0.0;
      for (std::size_t k = 0; k < maps.size(); ++k) {
        acc += weights[k] * maps[k].at(r, c);
      }
      h.grid.at(r, c) = acc > 0.0 ? acc : 0.0;
    }
  }
  return h;
}

namespace {

std::string render_summary_text(const HeatmapSummary& s) {
  if (s.regions.empty()) return "no salient regions";
  const Region& top = s.regions.front();
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "%d salient region(s); strongest at (%lld,%lld) covering %.1f%% of frame",
                s.total_regions, static_cast<long long>(std::llround(top.centroid_row)),
                static_cast<long long>(std::llround(top.centroid_col)),
                top.area_fraction * 100.0);
  return buf;
}

}  // namespace

HeatmapSummary summarize_heatmap(const Heatmap& h, double activation_threshold,
                                 int max_regions) {
  if (h.grid.empty()) throw ShapeMismatch("heatmap grid must be non-empty");
  if (!(activation_threshold > 0.0) || activation_threshold > 1.0) {
    throw DomainError("activation threshold must lie in (0,1]");
  }
  if (max_regions < 1) throw DomainError("max_regions must be >= 1");

  HeatmapSummary summary;
  const double peak = h.grid.max_value();
  if (peak <= 0.0) {
    summary.text = render_summary_text(summary);
    return summary;
  }

  const double cut = activation_threshold * peak;
  const int rows = h.grid.rows();
  const int cols = h.grid.cols();
  std::vector<int> label(static_cast<std::size_t>(rows) * cols, -1);
  auto idx = [cols](int r, int c) {
    return static_cast<std::size_t>(r) * cols + c;
  };
  auto hot = [&](int r, int c) { return h.grid.at(r, c) >= cut; };

  std::vector<Region> regions;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (!hot(r, c) || label[idx(r, c)] != -1) continue;
      const int id = static_cast<int>(regions.size());
      // flood fill, 4-connectivity
      std::deque<std::pair<int, int>> queue{{r, c}};
      label[idx(r, c)] = id;
      double sum_r = 0.0, sum_c = 0.0, sum_act = 0.0;
      int count = 0;
      while (!queue.empty()) {
        auto [cr, cc] = queue.front();
        queue.pop_front();
        ++count;
        sum_r += cr;
        sum_c += cc;
        sum_act += h.grid.at(cr, cc);
        const int dr[] = {1, -1, 0, 0};
        const int dc[] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
          int nr = cr + dr[k], nc = cc + dc[k];
          if (nr < 0 || nr >= rows || nc < 0 || nc >= cols) continue;
          if (!hot(nr, nc) || label[idx(nr, nc)] != -1) continue;
          label[idx(nr, nc)] = id;
          queue.emplace_back(nr, nc);
        }
      }
      Region region;
      region.cell_count = count;
      region.centroid_row = sum_r / count;
      region.centroid_col = sum_c / count;
      region.area_fraction = static_cast<double>(count) / h.grid.size();
      region.mean_activation = sum_act / count;
      regions.push_back(region);
    }
  }

  std::sort(regions.begin(), regions.end(), [](const Region& a, const Region& b) {
    if (a.mean_activation != b.mean_activation) {
      return a.mean_activation > b.mean_activation;
    }
    return std::tie(a.centroid_row, a.centroid_col) <
           std::tie(b.centroid_row, b.centroid_col);
  });

  summary.total_regions = static_cast<int>(regions.size());
  if (regions.size() > static_cast<std::size_t>(max_regions)) {
    regions.resize(static_cast<std::size_t>(max_regions));
  }
  summary.regions = std::move(regions);
  summary.text = render_summary_text(summary);
  return summary;
}

}  // namespace vigil::saliency
