#ifndef STEINERFLOW_IO_HPP_
#define STEINERFLOW_IO_HPP_

// Serialization, rendering, and the command surface: turns solver output
// into reproducible artifacts (structured network documents, SVG figures,
// deviation tables, run manifests).  Everything here is deterministic —
// no randomness, no timestamps — so config + version fix the bytes.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "steinerflow/flow.hpp"
#include "steinerflow/steiner.hpp"
#include "steinerflow/topology.hpp"

namespace steinerflow {

inline constexpr const char* kToolName = "steinerflow";
inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kDocumentSchema = 1;

// Full configuration of a solve run.
struct RunConfig {
  std::vector<double> rays;  // boundary angles, radians
  TopologyMode mode = TopologyMode::connected;
  RelaxOptions relax;
};

// Canonical textual rendering of a config (full-precision reals, fixed
// field order); the manifest records it together with its hash.
std::string canonical_config(const RunConfig& config);
std::uint64_t fnv1a_hash(std::string_view text);

// --- network documents ----------------------------------------------------
// A document stores the boundary, the topology, the vertex coordinates,
// and the per-edge sample arrays as full-precision JSON, together with a
// verification block (vertex count, max soliton residual, max balance
// defect, embeddedness, hull check).  Loading re-derives the block from
// the geometry fields and fails hard on any mismatch, so a document can
// never claim a regularity its geometry does not earn.  Only regular
// networks are serialized.

std::string network_document_string(const Network& net);
Network network_from_document_string(const std::string& text);
void save_network_document(const std::filesystem::path& file, const Network& net);
Network load_network_document(const std::filesystem::path& file);

// --- rendering --------------------------------------------------------------
enum class Chart { plane, ball, blowup };

// Radial profile of the stereographic compactification onto the unit
// disk: rho = r / (1 + sqrt(1 + r^2)), increasing from 0 to 1.
double ball_chart_radius(double r);
Vec2 ball_chart_point(Vec2 p);

// Deterministic standalone SVG.  The plane chart draws the truncated
// network in Cartesian coordinates; the ball chart draws it in the
// stereographic compactification with the ideal points on the rim; the
// blowup chart draws the faces F (the network, in orbit coordinates) and
// T (the initial rays) side by side with the corner points marked.
std::string render_svg(const Network& net, Chart chart);

// --- tables -----------------------------------------------------------------
// CSV with a header row: t, deviation, then junction coordinates.
std::string deviation_csv(const FlowDeviationReport& report);
// One flow frame as a JSON document (time, scale, vertices, edge samples).
std::string frame_document_string(const FlowFrame& frame);

// --- commands ---------------------------------------------------------------
// Library bodies of the CLI subcommands (tested directly; the executable
// only parses flags).  They write artifacts under out_dir and return the
// intended process exit code: 0 on success, 1 when a solve produces no
// solution.  Invalid inputs throw std::invalid_argument; unverifiable
// documents throw std::runtime_error.

struct CommandOutcome {
  int exit_code = 0;
  std::vector<std::filesystem::path> files;
  std::string summary;  // one human-readable line
};

// Writes one NetworkDocument per solution plus manifest.json.
CommandOutcome cmd_solve(const RunConfig& config, const std::filesystem::path& out_dir);

// Writes one frame document per requested time; with check also runs
// direct_flow_check to max(times) at mesh size check_h and writes
// deviation.csv.
CommandOutcome cmd_flow(const std::filesystem::path& network_file,
                        const std::vector<double>& times, bool check, double check_h,
                        const std::filesystem::path& out_dir);

CommandOutcome cmd_render(const std::filesystem::path& network_file, Chart chart,
                          const std::filesystem::path& out_svg);

}  // namespace steinerflow

#endif  // STEINERFLOW_IO_HPP_
