#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "otpl/common/errors.hpp"
#include "otpl/io/commands.hpp"
#include "otpl/io/formats.hpp"

namespace {

namespace fs = std::filesystem;

enum ExitCode { kOk = 0, kConfig = 1, kIo = 2, kNumerical = 3 };

otpl::Eye parse_eye(const std::string& eye) {
  if (eye == "left") return otpl::Eye::Left;
  if (eye == "right") return otpl::Eye::Right;
  throw otpl::ConfigError("eye must be 'left' or 'right', got '" + eye + "'");
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
  } else {
    otpl::write_text_file(out, text);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Point-line association and estimation harness"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  app.add_option("--config", config_path, "Config file of 'key = value' lines");
  app.add_option("--seed", seed, "Run seed (overrides scene.seed)");
  app.add_option("--out", out, "Output directory or file");
  app.footer("Environment overrides: OTPL_<SECTION>__<KEY>=value, e.g. OTPL_OT__EPSILON=0.05");

  auto* simulate = app.add_subcommand("simulate", "Render a synthetic stereo sequence");

  std::string frame_dir, frame_b, eye = "left";
  auto* describe = app.add_subcommand("describe", "Dump line descriptors of one frame");
  describe->add_option("frame", frame_dir, "Frame directory")->required();
  describe->add_option("--eye", eye, "left or right");

  std::string matcher;
  auto* match = app.add_subcommand("match", "Associate the lines of two frames");
  match->add_option("frame_a", frame_dir, "First frame directory")->required();
  match->add_option("frame_b", frame_b, "Second frame directory")->required();
  match->add_option("--eye", eye, "left or right");
  match->add_option("--matcher", matcher, "ot or nn");

  std::string matches_path, segments_path, tracks_path;
  auto* weight = app.add_subcommand("weight", "Append reliability weights to a match file");
  weight->add_option("matches", matches_path, "Match file")->required();
  weight->add_option("segments", segments_path, "Segment file of frame A")->required();
  weight->add_option("--tracks", tracks_path, "Track file 'track_id n_obs'");

  std::string graph_path;
  auto* optimize = app.add_subcommand("optimize", "Optimize a factor graph file");
  optimize->add_option("graph", graph_path, "Graph file")->required();

  std::string weights_kind;
  auto* run = app.add_subcommand("run", "Run the full pipeline on a simulated scene");
  run->add_option("--weights", weights_kind, "adaptive or uniform");
  run->add_option("--matcher", matcher, "ot or nn");

  std::string est_path, ref_path;
  auto* evaluate = app.add_subcommand("evaluate", "ATE RMSE in cm after rigid alignment");
  evaluate->add_option("estimate", est_path, "Estimated TUM trajectory")->required();
  evaluate->add_option("reference", ref_path, "Reference TUM trajectory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    otpl::RunConfig cfg;
    if (!config_path.empty()) otpl::apply_config_text(cfg, otpl::read_text_file(config_path));
    otpl::apply_env_overrides(cfg, otpl::otpl_environment());
    if (seed) cfg.scene.seed = *seed;
    if (!matcher.empty()) cfg.pipeline.matcher = otpl::matcher_kind_from_string(matcher);
    if (!weights_kind.empty()) cfg.pipeline.weighting = otpl::weighting_kind_from_string(weights_kind);
    cfg.validate();

    if (*simulate) {
      if (out.empty()) throw otpl::ConfigError("simulate requires --out");
      otpl::simulate_to_directory(cfg, out);
    } else if (*describe) {
      emit(otpl::describe_frame(frame_dir, parse_eye(eye), cfg), out);
    } else if (*match) {
      emit(otpl::match_frames(frame_dir, frame_b, parse_eye(eye), cfg), out);
    } else if (*weight) {
      std::optional<std::string> tracks;
      if (!tracks_path.empty()) tracks = otpl::read_text_file(tracks_path);
      emit(otpl::weight_matches(otpl::read_text_file(matches_path), otpl::read_text_file(segments_path),
                                tracks ? &*tracks : nullptr, cfg),
           out);
    } else if (*optimize) {
      std::string graph = otpl::read_text_file(graph_path);
      const std::string report = otpl::optimize_graph_text(graph, cfg);
      std::cerr << report << "\n";
      emit(graph, out);
    } else if (*run) {
      if (out.empty()) throw otpl::ConfigError("run requires --out");
      const otpl::RunSummary s = otpl::run_to_directory(cfg, out);
      std::cout << otpl::metrics_csv(s, cfg);
    } else if (*evaluate) {
      std::cout << otpl::evaluate_files(est_path, ref_path) << "\n";
    }
  } catch (const otpl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const otpl::InvalidInput& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const otpl::FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return kIo;
  } catch (const otpl::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kIo;
  } catch (const otpl::MissingTrack& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return kIo;
  } catch (const otpl::Error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumerical;
  }
  return kOk;
}
