#include "morphalign/landmarks.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "morphalign/error.hpp"

namespace morphalign {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool next_number(std::string_view& s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  const char* begin = s.data();
  if (*begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, s.data() + s.size(), out);
  if (ec != std::errc{} || !std::isfinite(out)) return false;
  if (ptr != s.data() + s.size() && *ptr != ' ' && *ptr != '\t') return false;
  s.remove_prefix(static_cast<std::size_t>(ptr - s.data()));
  return true;
}

}  // namespace

LandmarkSet parse_landmarks(std::string_view text, std::string_view source) {
  LandmarkSet lm;
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    Point2 p;
    std::string_view rest = line;
    if (!next_number(rest, p.x) || !next_number(rest, p.y) || !trim(rest).empty())
      throw FormatError(std::string(source) + ":" + std::to_string(line_no) +
                        ": expected \"x y\", got \"" + std::string(line) + "\"");
    lm.points.push_back(p);
  }
  if (lm.size() < 3)
    throw FormatError(std::string(source) + ": need at least 3 landmarks, got " +
                      std::to_string(lm.size()));
  return lm;
}

LandmarkSet load_landmarks(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open landmark file: " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_landmarks(ss.str(), path.string());
}

void save_landmarks(const std::filesystem::path& path, const LandmarkSet& lm) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path.string());
  os << std::setprecision(17);
  for (const auto& p : lm.points) os << p.x << ' ' << p.y << '\n';
  if (!os) throw IoError("write failed: " + path.string());
}

LandmarkSet average_landmarks(const LandmarkSet& a, const LandmarkSet& b, double alpha) {
  if (a.size() != b.size())
    throw ParameterError("landmark count mismatch: " + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()));
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ParameterError("alpha must be in [0,1]");
  LandmarkSet out;
  out.points.resize(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out.points[i] = {(1.0 - alpha) * a[i].x + alpha * b[i].x,
                     (1.0 - alpha) * a[i].y + alpha * b[i].y};
  }
  return out;
}

bool inside_image(const Point2& p, int width, int height) noexcept {
  return p.x >= 0.0 && p.y >= 0.0 && p.x <= width - 1 && p.y <= height - 1;
}

}  // namespace morphalign
