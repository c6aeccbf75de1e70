#pragma once

namespace vigil {

// Per-stage delays injected by a scenario (or measured in remote mode).
struct StageDelays {
  double camera_s = 0.0;
  double blip_s = 0.0;
  double heatmap_s = 0.0;
  double llm_s = 0.0;
};

// Per-stage timing of one detection. The total is always the stage sum,
// accumulated camera -> blip -> heatmap -> llm so it is bit-reproducible.
struct StageLatencyTrace {
  double t_camera_s = 0.0;
  double t_blip_s = 0.0;
  double t_heatmap_s = 0.0;
  double t_llm_s = 0.0;
  double t_network_s = 0.0;     // remote backend only
  double t_processing_s = 0.0;  // remote backend only
  double t_total_s = 0.0;

  static StageLatencyTrace make(double camera_s, double blip_s, double heatmap_s,
                                double llm_s, double network_s = 0.0,
                                double processing_s = 0.0) {
    StageLatencyTrace t;
    t.t_camera_s = camera_s;
    t.t_blip_s = blip_s;
    t.t_heatmap_s = heatmap_s;
    t.t_llm_s = llm_s;
    t.t_network_s = network_s;
    t.t_processing_s = processing_s;
    t.t_total_s = ((camera_s + blip_s) + heatmap_s) + llm_s;
    return t;
  }
};

}  // namespace vigil
