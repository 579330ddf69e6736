// Command-line driver: solve expander networks for prescribed rays, scale
// them along the flow, validate self-similarity, and render figures.

#include <cstdio>
#include <exception>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "steinerflow/io.hpp"

namespace {

std::vector<double> parse_reals(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      double v = std::stod(item, &used);
      while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw std::invalid_argument(std::string(what) + ": cannot parse '" + item + "'");
    }
  }
  if (out.empty()) throw std::invalid_argument(std::string(what) + ": empty list");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"steinerflow: self-similarly expanding networks of curve shortening flow"};
  app.set_version_flag("--version", std::string(steinerflow::kToolVersion));
  app.require_subcommand(1);

  // solve ------------------------------------------------------------------
  auto* solve = app.add_subcommand("solve", "compute all expander networks for given rays");
  std::string rays_text;
  std::string mode_text = "connected";
  std::string schedule_text;
  double tol = -1.0;
  std::string solve_out = "out";
  solve->add_option("--rays", rays_text, "boundary ray angles in radians, comma separated")
      ->required();
  solve->add_option("--mode", mode_text, "topology family")
      ->check(CLI::IsMember({"connected", "matchings", "forests"}));
  solve->add_option("--tol", tol, "regularity gate for the balance defect");
  solve->add_option("--R-schedule", schedule_text, "continuation radii, comma separated");
  solve->add_option("--out-dir", solve_out, "output directory");

  // flow -------------------------------------------------------------------
  auto* flow = app.add_subcommand("flow", "evolve a solved network along the flow");
  std::string flow_network;
  std::string times_text = "0.5,1,2";
  bool check = false;
  double check_h = 0.02;
  std::string flow_out = "out";
  flow->add_option("--network", flow_network, "network document produced by solve")
      ->required()
      ->check(CLI::ExistingFile);
  flow->add_option("--times", times_text, "frame times, comma separated");
  flow->add_flag("--check", check, "run the front-tracking self-similarity check");
  flow->add_option("--check-h", check_h, "mesh spacing for --check");
  flow->add_option("--out-dir", flow_out, "output directory");

  // render -----------------------------------------------------------------
  auto* render = app.add_subcommand("render", "draw a solved network as SVG");
  std::string render_network;
  std::string chart_text = "plane";
  std::string render_out = "network.svg";
  render->add_option("--network", render_network, "network document produced by solve")
      ->required()
      ->check(CLI::ExistingFile);
  render->add_option("--chart", chart_text, "chart to draw")
      ->check(CLI::IsMember({"plane", "ball", "blowup"}));
  render->add_option("--out", render_out, "output SVG file");

  CLI11_PARSE(app, argc, argv);

  try {
    steinerflow::CommandOutcome outcome;
    if (solve->parsed()) {
      steinerflow::RunConfig config;
      config.rays = parse_reals(rays_text, "--rays");
      if (mode_text == "matchings") config.mode = steinerflow::TopologyMode::matchings;
      if (mode_text == "forests") config.mode = steinerflow::TopologyMode::forests;
      if (tol > 0.0) config.relax.regular_defect_tol = tol;
      if (!schedule_text.empty()) {
        config.relax.r_schedule = parse_reals(schedule_text, "--R-schedule");
      }
      outcome = steinerflow::cmd_solve(config, solve_out);
    } else if (flow->parsed()) {
      outcome = steinerflow::cmd_flow(flow_network, parse_reals(times_text, "--times"), check,
                                      check_h, flow_out);
    } else {
      steinerflow::Chart chart = steinerflow::Chart::plane;
      if (chart_text == "ball") chart = steinerflow::Chart::ball;
      if (chart_text == "blowup") chart = steinerflow::Chart::blowup;
      outcome = steinerflow::cmd_render(render_network, chart, render_out);
    }
    std::printf("%s\n", outcome.summary.c_str());
    for (const auto& f : outcome.files) std::printf("  %s\n", f.string().c_str());
    return outcome.exit_code;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
