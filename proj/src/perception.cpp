#include "vigil/perception.hpp"

#include <array>
#include <cctype>

namespace vigil::perception {

namespace {

constexpr std::string_view kEmptyScenePhrase = "an empty scene";

constexpr std::string_view kPromptPrefix =
    "You are a mobile robot that monitors your environment for potential "
    "hazards and conflicts. The image caption is: '";
constexpr std::string_view kPromptMiddle =
    "'. The heatmap analysis shows: '";
constexpr std::string_view kPromptSuffix =
    "'. Analyze this information and classify any detected anomalies. If you "
    "detect a hazard (e.g., dangerous objects, environmental threats, safety "
    "violations), respond with 'HAZARDOUS: [brief description]' and 'REPORT'. "
    "If you detect a conflict (e.g., navigation conflicts, operational "
    "disruptions, rule violations), respond with 'CONFLICT: [brief "
    "description]' and 'AVOID'. If no anomalies are detected, respond with "
    "'CLEAR: [brief description of normal conditions]' and 'RESUME'.";

}  // namespace

Caption scripted_caption(const WorldFrame& frame, const Lexicon& lexicon) {
  std::string text = "a view of ";
  if (frame.scene_tags().empty()) {
    auto it = lexicon.find("");
    text += it != lexicon.end() ? it->second : std::string(kEmptyScenePhrase);
  } else {
    bool first = true;
    for (const auto& tag : frame.scene_tags()) {
      auto it = lexicon.find(tag);
      if (it == lexicon.end()) {
        throw UnknownTag("scene tag not in lexicon: " + tag);
      }
      if (!first) text += ", ";
      text += it->second;
      first = false;
    }
  }
  return Caption{std::move(text), frame.frame_id(), BackendKind::Scripted};
}

PromptContext render_prompt(const Caption& caption,
                            const saliency::HeatmapSummary& summary) {
  PromptContext ctx;
  ctx.caption = caption.text;
  ctx.heatmap_summary = summary.text;
  ctx.rendered.reserve(kPromptPrefix.size() + kPromptMiddle.size() +
                       kPromptSuffix.size() + ctx.caption.size() +
                       ctx.heatmap_summary.size());
  ctx.rendered.append(kPromptPrefix);
  ctx.rendered.append(ctx.caption);
  ctx.rendered.append(kPromptMiddle);
  ctx.rendered.append(ctx.heatmap_summary);
  ctx.rendered.append(kPromptSuffix);
  return ctx;
}

namespace {

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

// Case-insensitive match of `token` at position i, immediately followed by a
// colon.
bool class_token_at(std::string_view s, std::size_t i, std::string_view token) {
  if (i + token.size() + 1 > s.size()) return false;
  for (std::size_t k = 0; k < token.size(); ++k) {
    if (std::toupper(static_cast<unsigned char>(s[i + k])) != token[k]) {
      return false;
    }
  }
  return s[i + token.size()] == ':';
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

struct DirectiveHit {
  std::size_t pos = std::string_view::npos;
  std::size_t len = 0;
  Directive directive = Directive::Resume;
};

// First uppercase whole-word REPORT/AVOID/RESUME at or after `from`.
DirectiveHit find_directive(std::string_view s, std::size_t from) {
  static constexpr std::array<std::pair<std::string_view, Directive>, 3> kTokens{
      {{"REPORT", Directive::Report},
       {"AVOID", Directive::Avoid},
       {"RESUME", Directive::Resume}}};
  DirectiveHit hit;
  for (std::size_t i = from; i < s.size(); ++i) {
    if (i > 0 && is_word_char(s[i - 1])) continue;
    for (const auto& [token, directive] : kTokens) {
      if (s.compare(i, token.size(), token) != 0) continue;
      std::size_t end = i + token.size();
      if (end < s.size() && is_word_char(s[end])) continue;
      if (i < hit.pos) {
        hit = {i, token.size(), directive};
      }
    }
    if (hit.pos != std::string_view::npos) break;
  }
  return hit;
}

}  // namespace

ParseResult parse_response(std::string_view raw) {
  const auto unparsed = [&] { return UnparsedResponse{std::string(raw)}; };

  std::size_t i = 0;
  while (i < raw.size() && std::isspace(static_cast<unsigned char>(raw[i]))) {
    ++i;
  }

  AnomalyClass cls;
  std::size_t body;
  if (class_token_at(raw, i, "HAZARDOUS")) {
    cls = AnomalyClass::Hazardous;
    body = i + 10;
  } else if (class_token_at(raw, i, "CONFLICT")) {
    cls = AnomalyClass::Conflict;
    body = i + 9;
  } else if (class_token_at(raw, i, "CLEAR")) {
    cls = AnomalyClass::Clear;
    body = i + 6;
  } else {
    return unparsed();
  }

  DirectiveHit hit = find_directive(raw, body);
  if (hit.pos == std::string_view::npos) return unparsed();
  if (hit.directive != directive_for_class(cls)) return unparsed();

  ParsedClassification parsed;
  parsed.anomaly_class = cls;
  parsed.description = std::string(trim(raw.substr(body, hit.pos - body)));
  parsed.directive = hit.directive;
  return parsed;
}

std::string scripted_classify(
    const PromptContext& ctx,
    std::span<const mitigation::KeywordRule> rulebook) {
  if (rulebook.empty()) {
    throw DomainError("scripted classifier needs a non-empty rulebook");
  }
  const mitigation::KeywordRule* rule =
      mitigation::match_rule(ctx.caption, rulebook);
  if (rule == nullptr) {
    return "CLEAR: " + ctx.caption + " RESUME";
  }
  std::string out;
  switch (rule->anomaly_class) {
    case AnomalyClass::Hazardous:
      out = "HAZARDOUS: " + rule->keyword + " detected REPORT";
      break;
    default:
      out = "CONFLICT: " + rule->keyword + " detected AVOID";
      break;
  }
  return out;
}

}  // namespace vigil::perception
