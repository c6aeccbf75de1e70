#pragma once

#include <span>
#include <string>
#include <vector>

#include "vigil/core.hpp"

namespace vigil::saliency {

// Non-negative activation grid from the weighted, rectified combination of
// feature maps.
struct Heatmap {
  Grid grid;
  int source_frame = -1;
};

struct Region {
  double centroid_row = 0.0;
  double centroid_col = 0.0;
  int cell_count = 0;
  double area_fraction = 0.0;   // cell_count / grid size, in (0,1]
  double mean_activation = 0.0;
};

struct HeatmapSummary {
  std::vector<Region> regions;  // sorted by mean activation descending
  int total_regions = 0;        // components found before truncation
  std::string text;             // one-line description, prompt-ready
};

// out[i,j] = max(0, sum_k weights[k] * maps[k][i,j]).
// Throws ShapeMismatch when counts differ, maps are missing, or shapes vary.
Heatmap combine_feature_maps(std::span<const double> weights,
                             std::span<const Grid> maps, int source_frame = -1);

// Connected components (4-connectivity) of cells at or above
// activation_threshold * max(h), keeping the top max_regions by mean
// activation. Ties order by centroid (row, col). An all-zero heatmap yields
// the text "no salient regions".
HeatmapSummary summarize_heatmap(const Heatmap& h,
                                 double activation_threshold = 0.5,
                                 int max_regions = 3);

}  // namespace vigil::saliency
