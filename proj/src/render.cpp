#include "arg/render.hpp"

#include <array>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace arg {

namespace {

constexpr std::array<const char*, 8> kPalette = {
    "#e6194b", "#3cb44b", "#4363d8", "#f58231",
    "#911eb4", "#46f0f0", "#f032e6", "#9a6324"};

std::string esc(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace

std::string render_svg(const ClipSample& clip, const Prediction& pred,
                       const std::vector<std::string>& action_names,
                       const std::vector<std::string>& activity_names) {
  if (pred.action_class.size() != clip.actors.size())
    throw std::invalid_argument("render_svg: prediction actor count " +
                                std::to_string(pred.action_class.size()) +
                                " != clip actor count " +
                                std::to_string(clip.actors.size()));
  if (pred.activity_class < 0 ||
      pred.activity_class >= static_cast<int>(activity_names.size()))
    throw std::invalid_argument("render_svg: activity class out of range");

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\""
      << num(clip.frame_width) << "\" height=\"" << num(clip.frame_height)
      << "\" viewBox=\"0 0 " << num(clip.frame_width) << ' '
      << num(clip.frame_height) << "\">\n";

  svg << "  <text x=\"4\" y=\"16\" font-size=\"16\" fill=\"black\">"
      << esc(clip.clip_id) << ": " << esc(activity_names[pred.activity_class])
      << "</text>\n";

  for (std::size_t i = 0; i < clip.actors.size(); ++i) {
    const BoundingBox& b = clip.actors[i].box;
    const int action = pred.action_class[i];
    if (action < 0 || action >= static_cast<int>(action_names.size()))
      throw std::invalid_argument("render_svg: action class out of range");
    const char* color = kPalette[static_cast<std::size_t>(action) % kPalette.size()];
    svg << "  <rect x=\"" << num(b.x_min) << "\" y=\"" << num(b.y_min)
        << "\" width=\"" << num(b.x_max - b.x_min) << "\" height=\""
        << num(b.y_max - b.y_min) << "\" fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    svg << "  <text x=\"" << num(b.x_min) << "\" y=\"" << num(b.y_min)
        << "\" font-size=\"12\" fill=\"" << color << "\">"
        << esc(action_names[static_cast<std::size_t>(action)]) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace arg
