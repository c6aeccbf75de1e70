#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>

#include "vigil/clock.hpp"
#include "vigil/core.hpp"
#include "vigil/mitigation.hpp"
#include "vigil/saliency.hpp"

namespace vigil::perception {

enum class BackendKind { Scripted, Remote };

struct Caption {
  std::string text;  // never empty
  int source_frame = -1;
  BackendKind backend = BackendKind::Scripted;
};

// tag -> phrase. The empty tag "" overrides the phrase used for frames with
// no scene tags (default "an empty scene").
using Lexicon = std::map<std::string, std::string>;

// Deterministic captioner: "a view of " + comma-joined phrases in tag order.
// Throws UnknownTag when a tag is missing from the lexicon.
Caption scripted_caption(const WorldFrame& frame, const Lexicon& lexicon);

struct PromptContext {
  std::string caption;
  std::string heatmap_summary;
  std::string rendered;  // contains both inputs verbatim exactly once
};

// Fills the classification prompt's {caption} and {heatmap_summary} slots.
// Byte-stable across runs.
PromptContext render_prompt(const Caption& caption,
                            const saliency::HeatmapSummary& summary);

// Grammar: optional whitespace, HAZARDOUS:/CONFLICT:/CLEAR: (class token
// case-insensitive), description up to the first directive token, directive
// one of REPORT/AVOID/RESUME (uppercase whole word). Only the pairings
// HAZARDOUS/REPORT, CONFLICT/AVOID, CLEAR/RESUME are accepted; anything else
// comes back as UnparsedResponse. Never throws.
ParseResult parse_response(std::string_view raw);

struct RemoteEndpointConfig {
  std::string base_url;         // e.g. "http://127.0.0.1:8080"
  std::string api_key_env_var;  // bearer token read from this env var
  double timeout_s = 5.0;
  int retries = 0;
};

struct RemoteReply {
  std::string raw;
  double t_network_s = 0.0;
  double t_processing_s = 0.0;  // server-reported, 0 if absent
};

// POST {base_url}/classify with {"prompt": ..., "image_b64": optional}.
// Expects {"text": ..., "processing_ms": optional}. Retries timeouts up to
// cfg.retries times, then throws RemoteTimeout; malformed transport payloads
// throw RemoteProtocolError.
RemoteReply remote_classify(const PromptContext& ctx,
                            const RemoteEndpointConfig& cfg, const Clock& clock,
                            const std::optional<std::string>& image_b64 = {});

// POST {base_url}/caption with {"image_b64": ...} -> {"text": ...}.
std::string remote_caption(const std::string& image_b64,
                           const RemoteEndpointConfig& cfg);

// Deterministic classifier stand-in: scans the caption for rulebook keywords
// (tie rules as in mitigation::match_rule) and emits a grammar-conformant
// response; no match defaults to "CLEAR: <caption> RESUME".
std::string scripted_classify(const PromptContext& ctx,
                              std::span<const mitigation::KeywordRule> rulebook);

}  // namespace vigil::perception
