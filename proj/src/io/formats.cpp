#include "otpl/io/formats.hpp"

#include <bit>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "otpl/common/errors.hpp"

namespace otpl {

namespace {

constexpr std::size_t kFmapHeaderBytes = 20;

// Splits text into whitespace-separated tokens per line, remembering where
// each line starts so errors can point at it.
struct TextLine {
  int number = 0;
  std::size_t offset = 0;
  std::string text;
  std::vector<std::string> tokens;
};

std::vector<TextLine> split_lines(const std::string& text, bool keep_comments = false) {
  std::vector<TextLine> lines;
  std::size_t pos = 0;
  int number = 0;
  while (pos < text.size()) {
    const auto end = text.find('\n', pos);
    const std::string line = text.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
    ++number;
    TextLine tl{number, pos, line, {}};
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) tl.tokens.push_back(tok);
    const bool comment = !tl.tokens.empty() && tl.tokens.front().front() == '#';
    if (!tl.tokens.empty() && (keep_comments || !comment)) lines.push_back(std::move(tl));
    if (end == std::string::npos) break;
    pos = end + 1;
  }
  return lines;
}

[[noreturn]] void fail(const TextLine& line, const std::string& what) {
  throw FormatError("line " + std::to_string(line.number) + " (byte offset " +
                    std::to_string(line.offset) + "): " + what);
}

void expect_tokens(const TextLine& line, std::size_t n) {
  if (line.tokens.size() != n) {
    fail(line, "expected " + std::to_string(n) + " fields, got " +
                   std::to_string(line.tokens.size()));
  }
}

double number(const TextLine& line, std::size_t i) {
  try {
    return parse_double(line.tokens.at(i));
  } catch (const FormatError& e) {
    fail(line, e.what());
  }
}

long long integer(const TextLine& line, std::size_t i) {
  try {
    return parse_int(line.tokens.at(i));
  } catch (const FormatError& e) {
    fail(line, e.what());
  }
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xffu));
}

std::uint32_t get_u32(const std::string& in, std::size_t at) {
  std::uint32_t v = 0;
  for (int k = 0; k < 4; ++k) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + k])) << (8 * k);
  }
  return v;
}

void put_f32(std::string& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }
float get_f32(const std::string& in, std::size_t at) { return std::bit_cast<float>(get_u32(in, at)); }

Eye eye_from_token(const TextLine& line, const std::string& tok) {
  if (tok == "L") return Eye::Left;
  if (tok == "R") return Eye::Right;
  fail(line, "expected eye L or R, got '" + tok + "'");
}

const char* eye_token(Eye eye) { return eye == Eye::Left ? "L" : "R"; }

std::vector<int> parse_index_list(const TextLine& line, std::size_t from) {
  std::vector<int> out;
  for (std::size_t i = from; i < line.tokens.size(); ++i) out.push_back(static_cast<int>(integer(line, i)));
  return out;
}

}  // namespace

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

double parse_double(const std::string& text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw FormatError("invalid number '" + text + "'");
  return v;
}

long long parse_int(const std::string& text) {
  long long v = 0;
  const char* first = text.data();
  const char* last = first + text.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw FormatError("invalid integer '" + text + "'");
  return v;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string encode_feature_map(const FeatureMap& map) {
  std::string out = "FMAP";
  put_u32(out, static_cast<std::uint32_t>(map.depth()));
  put_u32(out, static_cast<std::uint32_t>(map.height()));
  put_u32(out, static_cast<std::uint32_t>(map.width()));
  put_f32(out, static_cast<float>(map.scale()));
  out.reserve(out.size() + 4 * map.data().size());
  for (double v : map.data()) put_f32(out, static_cast<float>(v));
  return out;
}

FeatureMap decode_feature_map(const std::string& bytes) {
  if (bytes.size() < kFmapHeaderBytes) {
    throw FormatError("feature map header: expected " + std::to_string(kFmapHeaderBytes) +
                      " bytes, got " + std::to_string(bytes.size()));
  }
  if (bytes.compare(0, 4, "FMAP") != 0) throw FormatError("feature map: bad magic at byte offset 0");
  const std::uint32_t d = get_u32(bytes, 4);
  const std::uint32_t h = get_u32(bytes, 8);
  const std::uint32_t w = get_u32(bytes, 12);
  const float scale = get_f32(bytes, 16);
  const std::uint64_t count = static_cast<std::uint64_t>(d) * h * w;
  const std::uint64_t expected = kFmapHeaderBytes + 4 * count;
  if (bytes.size() != expected) {
    throw FormatError("feature map length: expected " + std::to_string(expected) +
                      " bytes, got " + std::to_string(bytes.size()));
  }
  std::vector<double> data(count);
  for (std::uint64_t k = 0; k < count; ++k) data[k] = get_f32(bytes, kFmapHeaderBytes + 4 * k);
  try {
    return FeatureMap(static_cast<int>(d), static_cast<int>(h), static_cast<int>(w), scale,
                      std::move(data));
  } catch (const InvalidInput& e) {
    throw FormatError(std::string("feature map header: ") + e.what());
  }
}

void write_feature_map(const std::filesystem::path& path, const FeatureMap& map) {
  write_text_file(path, encode_feature_map(map));
}

FeatureMap read_feature_map(const std::filesystem::path& path) {
  try {
    return decode_feature_map(read_text_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::string format_segments(const std::vector<LineSegment2D>& segments) {
  std::string out;
  for (const LineSegment2D& s : segments) {
    out += std::to_string(s.track_id().value_or(-1)) + " " + format_double(s.start().x()) + " " +
           format_double(s.start().y()) + " " + format_double(s.end().x()) + " " +
           format_double(s.end().y()) + "\n";
  }
  return out;
}

std::vector<LineSegment2D> parse_segments(const std::string& text) {
  std::vector<LineSegment2D> out;
  for (const TextLine& line : split_lines(text)) {
    expect_tokens(line, 5);
    const Id id = integer(line, 0);
    out.emplace_back(Vec2(number(line, 1), number(line, 2)), Vec2(number(line, 3), number(line, 4)),
                     id < 0 ? std::nullopt : std::optional<Id>(id));
  }
  return out;
}

std::string format_keypoints(const std::vector<Keypoint>& keypoints) {
  std::string out;
  for (const Keypoint& k : keypoints) {
    out += std::to_string(k.id) + " " + format_double(k.pixel.x()) + " " +
           format_double(k.pixel.y()) + "\n";
  }
  return out;
}

std::vector<Keypoint> parse_keypoints(const std::string& text) {
  std::vector<Keypoint> out;
  for (const TextLine& line : split_lines(text)) {
    expect_tokens(line, 3);
    out.push_back({integer(line, 0), Vec2(number(line, 1), number(line, 2))});
  }
  return out;
}

std::string format_matches(const MatchSet& matches, const std::vector<double>& weights) {
  if (!weights.empty() && weights.size() != matches.pairs.size()) {
    throw InvalidInput("format_matches: one weight per match required");
  }
  std::string out;
  for (std::size_t k = 0; k < matches.pairs.size(); ++k) {
    const Match& m = matches.pairs[k];
    out += std::to_string(m.i) + " " + std::to_string(m.j) + " " + format_double(m.confidence);
    if (!weights.empty()) out += " " + format_double(weights[k]);
    out += "\n";
  }
  out += "# unmatched_a:";
  for (int i : matches.unmatched_a) out += " " + std::to_string(i);
  out += "\n# unmatched_b:";
  for (int j : matches.unmatched_b) out += " " + std::to_string(j);
  out += "\n";
  return out;
}

ParsedMatches parse_matches(const std::string& text) {
  ParsedMatches out;
  bool weighted = false;
  for (const TextLine& line : split_lines(text, true)) {
    const std::string& head = line.tokens.front();
    if (head.front() == '#') {
      if (head == "#" && line.tokens.size() >= 2 && line.tokens[1] == "unmatched_a:") {
        out.matches.unmatched_a = parse_index_list(line, 2);
      } else if (head == "#" && line.tokens.size() >= 2 && line.tokens[1] == "unmatched_b:") {
        out.matches.unmatched_b = parse_index_list(line, 2);
      }
      continue;
    }
    if (out.matches.pairs.empty()) weighted = line.tokens.size() == 4;
    expect_tokens(line, weighted ? 4 : 3);
    out.matches.pairs.push_back(
        {static_cast<int>(integer(line, 0)), static_cast<int>(integer(line, 1)), number(line, 2)});
    if (weighted) out.weights.push_back(number(line, 3));
  }
  return out;
}

std::string format_tracks(const TrackTable& tracks) {
  std::string out;
  for (const auto& [id, t] : tracks) out += std::to_string(id) + " " + std::to_string(t.n_obs) + "\n";
  return out;
}

TrackTable parse_tracks(const std::string& text) {
  TrackTable out;
  for (const TextLine& line : split_lines(text)) {
    expect_tokens(line, 2);
    const Id id = integer(line, 0);
    out[id] = LineTrack{id, static_cast<int>(integer(line, 1)), Vec2::Zero(), Vec2::Zero()};
  }
  return out;
}

std::string format_tum(const Trajectory& trajectory) {
  std::string out;
  for (const StampedPose& p : trajectory.poses()) {
    const Vec3& t = p.pose.translation();
    const Eigen::Quaterniond q = p.pose.quaternion();
    out += format_double(p.timestamp) + " " + format_double(t.x()) + " " + format_double(t.y()) +
           " " + format_double(t.z()) + " " + format_double(q.x()) + " " + format_double(q.y()) +
           " " + format_double(q.z()) + " " + format_double(q.w()) + "\n";
  }
  return out;
}

Trajectory parse_tum(const std::string& text) {
  Trajectory out;
  for (const TextLine& line : split_lines(text)) {
    expect_tokens(line, 8);
    const double stamp = number(line, 0);
    const Vec3 t(number(line, 1), number(line, 2), number(line, 3));
    const Eigen::Quaterniond q(number(line, 7), number(line, 4), number(line, 5), number(line, 6));
    if (!(q.norm() > 0.0)) fail(line, "zero quaternion");
    if (!out.empty() && !(stamp > out.poses().back().timestamp)) {
      fail(line, "timestamps must be strictly increasing");
    }
    try {
      out.push_back(stamp, PoseSE3::from_quaternion(q, t));
    } catch (const InvalidInput& e) {
      fail(line, e.what());
    }
  }
  return out;
}

std::string format_graph(const FactorGraph& graph) {
  const CameraModel& c = graph.camera;
  auto f = [](double v) { return " " + format_double(v); };
  std::string out = "CAMERA" + f(c.fx) + f(c.fy) + f(c.cx) + f(c.cy) + f(c.baseline) + " " +
                    std::to_string(c.width) + " " + std::to_string(c.height) + "\n";
  for (const auto& [id, v] : graph.poses) {
    const Vec3& t = v.pose.translation();
    const Eigen::Quaterniond q = v.pose.quaternion();
    out += "POSE " + std::to_string(id) + " " + (v.fixed ? "1" : "0") + f(t.x()) + f(t.y()) +
           f(t.z()) + f(q.x()) + f(q.y()) + f(q.z()) + f(q.w()) + "\n";
  }
  for (const auto& [id, v] : graph.points) {
    out += "POINT " + std::to_string(id) + " " + (v.fixed ? "1" : "0") + f(v.position.x()) +
           f(v.position.y()) + f(v.position.z()) + "\n";
  }
  for (const auto& [id, v] : graph.lines) {
    const PluckerLine& l = v.line;
    out += "LINE " + std::to_string(id) + " " + (v.fixed ? "1" : "0") + f(l.n.x()) + f(l.n.y()) +
           f(l.n.z()) + f(l.d.x()) + f(l.d.y()) + f(l.d.z()) + f(v.anchor.x()) + f(v.anchor.y()) +
           f(v.anchor.z()) + "\n";
  }
  for (const PointFactor& p : graph.point_factors) {
    out += "PF " + std::to_string(p.pose_id) + " " + std::to_string(p.point_id) + " " +
           eye_token(p.eye) + f(p.observed.x()) + f(p.observed.y()) + f(p.sigma) +
           f(p.robust_delta) + "\n";
  }
  for (const LineFactor& l : graph.line_factors) {
    out += "LF " + std::to_string(l.pose_id) + " " + std::to_string(l.line_id) + " " +
           eye_token(l.eye) + f(l.observed.start().x()) + f(l.observed.start().y()) +
           f(l.observed.end().x()) + f(l.observed.end().y()) + f(l.weight) + f(l.robust_delta) +
           "\n";
  }
  return out;
}

FactorGraph parse_graph(const std::string& text) {
  FactorGraph g;
  auto flag = [](const TextLine& line, std::size_t i) {
    const long long v = integer(line, i);
    if (v != 0 && v != 1) fail(line, "fixed flag must be 0 or 1");
    return v == 1;
  };
  for (const TextLine& line : split_lines(text)) {
    const std::string& tag = line.tokens.front();
    if (tag == "CAMERA") {
      expect_tokens(line, 8);
      g.camera = {number(line, 1), number(line, 2),  number(line, 3),
                  number(line, 4), number(line, 5),  static_cast<int>(integer(line, 6)),
                  static_cast<int>(integer(line, 7))};
    } else if (tag == "POSE") {
      expect_tokens(line, 10);
      const Eigen::Quaterniond q(number(line, 9), number(line, 6), number(line, 7), number(line, 8));
      if (!(q.norm() > 0.0)) fail(line, "zero quaternion");
      const Vec3 t(number(line, 3), number(line, 4), number(line, 5));
      g.poses[integer(line, 1)] = {PoseSE3::from_quaternion(q, t), flag(line, 2)};
    } else if (tag == "POINT") {
      expect_tokens(line, 6);
      g.points[integer(line, 1)] = {Vec3(number(line, 3), number(line, 4), number(line, 5)),
                                    flag(line, 2)};
    } else if (tag == "LINE") {
      expect_tokens(line, 12);
      const PluckerLine l{Vec3(number(line, 3), number(line, 4), number(line, 5)),
                          Vec3(number(line, 6), number(line, 7), number(line, 8))};
      if (!(l.d.norm() > 0.0)) fail(line, "line direction is zero");
      g.lines[integer(line, 1)] = {l.normalized(), flag(line, 2),
                                   Vec3(number(line, 9), number(line, 10), number(line, 11))};
    } else if (tag == "PF") {
      expect_tokens(line, 8);
      g.point_factors.push_back({integer(line, 1), integer(line, 2), eye_from_token(line, line.tokens[3]),
                                 Vec2(number(line, 4), number(line, 5)), number(line, 6),
                                 number(line, 7)});
    } else if (tag == "LF") {
      expect_tokens(line, 10);
      g.line_factors.push_back({integer(line, 1), integer(line, 2),
                                eye_from_token(line, line.tokens[3]),
                                LineSegment2D(Vec2(number(line, 4), number(line, 5)),
                                              Vec2(number(line, 6), number(line, 7))),
                                number(line, 8), number(line, 9)});
    } else {
      fail(line, "unknown record '" + tag + "'");
    }
  }
  try {
    g.validate();
  } catch (const InvalidInput& e) {
    throw FormatError(std::string("graph: ") + e.what());
  }
  return g;
}

std::string format_descriptors(const std::vector<LineSegment2D>& segments,
                               const std::vector<LineDescriptor>& descriptors) {
  std::string out;
  for (std::size_t k = 0; k < descriptors.size(); ++k) {
    out += std::to_string(segments[k].track_id().value_or(-1)) + " " +
           format_double(descriptors[k].gamma_line) + " " + format_double(descriptors[k].gamma_pt);
    for (Eigen::Index c = 0; c < descriptors[k].vector.size(); ++c) {
      out += " " + format_double(descriptors[k].vector[c]);
    }
    out += "\n";
  }
  return out;
}

}  // namespace otpl
