#pragma once

#include <span>
#include <string>
#include <string_view>

namespace reagent::cli {

enum class HeatmapFormat { kAnsi, kHtml };

/// Accepts "ansi" or "html"; throws ConfigError otherwise.
HeatmapFormat parse_heatmap_format(const std::string& name);

/// Intensity of each token is score / max(scores), linear in [0, 1].
/// `target`, when non-empty, is appended unshaded after an arrow.
/// Throws LengthMismatchError if tokens and scores differ in length.
std::string render_heatmap(std::span<const std::string> tokens, std::span<const double> scores,
                           HeatmapFormat format, std::string_view target = {});

/// Wraps HTML fragments in a standalone page with no external resources.
std::string html_document(std::string_view title, std::span<const std::string> fragments);

std::string html_escape(std::string_view text);

}  // namespace reagent::cli
