#include "reagent/cli/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "reagent/errors.hpp"

namespace reagent::cli {

HeatmapFormat parse_heatmap_format(const std::string& name) {
  if (name == "ansi") return HeatmapFormat::kAnsi;
  if (name == "html") return HeatmapFormat::kHtml;
  throw ConfigError("unknown heatmap format '" + name + "'");
}

std::string html_escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out += c;
    }
  }
  return out;
}

namespace {

std::string ansi_token(const std::string& token, double intensity) {
  // White (0) to saturated red (1) background, black text.
  const int fade = 255 - static_cast<int>(std::lround(255.0 * intensity));
  char prefix[48];
  std::snprintf(prefix, sizeof(prefix), "\x1b[38;2;0;0;0;48;2;255;%d;%dm", fade, fade);
  return std::string(prefix) + token + "\x1b[0m";
}

std::string html_token(const std::string& token, double intensity) {
  char style[96];
  std::snprintf(style, sizeof(style),
                "background-color:rgba(220,30,30,%.3f);padding:1px 2px;border-radius:2px",
                intensity);
  return "<span style=\"" + std::string(style) + "\">" + html_escape(token) + "</span>";
}

}  // namespace

std::string render_heatmap(std::span<const std::string> tokens, std::span<const double> scores,
                           HeatmapFormat format, std::string_view target) {
  if (tokens.size() != scores.size()) {
    throw LengthMismatchError("heatmap needs one score per token");
  }
  const double peak = scores.empty() ? 0.0 : *std::max_element(scores.begin(), scores.end());
  std::string out;
  if (format == HeatmapFormat::kHtml) out += "<div style=\"font-family:monospace;line-height:1.8\">";
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const double intensity = peak > 0.0 ? std::clamp(scores[i] / peak, 0.0, 1.0) : 0.0;
    if (i > 0) out += ' ';
    out += format == HeatmapFormat::kAnsi ? ansi_token(tokens[i], intensity)
                                          : html_token(tokens[i], intensity);
  }
  if (!target.empty()) {
    if (format == HeatmapFormat::kAnsi) {
      out += " -> [" + std::string(target) + "]";
    } else {
      out += " &rarr; <b style=\"border:1px solid #333;padding:1px 2px\">" + html_escape(target) +
             "</b>";
    }
  }
  if (format == HeatmapFormat::kHtml) out += "</div>";
  return out;
}

std::string html_document(std::string_view title, std::span<const std::string> fragments) {
  std::string out =
      "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>" + html_escape(title) +
      "</title></head>\n<body style=\"font-family:sans-serif;margin:1.5em\">\n";
  for (const auto& f : fragments) out += f + "\n";
  out += "</body></html>\n";
  return out;
}

}  // namespace reagent::cli
