#pragma once

// End-to-end stages. Each stage consumes and produces the JSON documents that
// are written to disk, so `run` and the individual subcommands produce
// identical artifacts.
//
//   portfolio.csv --infer--> network.json --embed--> embedding.json
//   embedding.json (+ annotations.csv) --analyze--> analysis.json
//   network.json + embedding.json --render--> figure.svg
//   embedding.json x 2 --longitudinal--> analysis-delta.json

#include "hypfin/embed.hpp"
#include "hypfin/io.hpp"
#include "hypfin/netinfer.hpp"
#include "hypfin/stats.hpp"
#include "hypfin/svg.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace hypfin::pipeline {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

struct RunConfig {
  std::filesystem::path portfolio;
  std::optional<std::filesystem::path> annotations;
  std::optional<std::filesystem::path> regions; ///< defaults to the built-in map
  std::string year;
  int dim = 2;
  embed::DescentOptions descent;
  netinfer::NormMode norm = netinfer::NormMode::OffDiagonal;
  double decile = 0.1; ///< backbone share of strongest links
  bool refine_euclidean = true;
  bool chords = false;
  bool centered_figure = false;
  std::filesystem::path out_dir = ".";

  /// Throws ContractViolation for dim < 1 or decile outside (0, 1).
  void validate() const;
};

json to_json(const stats::TestResult &result);

/// network.json: banks, depths, LWPO, weights, dissimilarities, capital and
/// decile statistics of the weights.
json infer_stage(const netinfer::PortfolioMatrix &portfolio, const std::string &year,
                 netinfer::NormMode norm, double decile);

/// embedding.json: hyperbolic and Euclidean embeddings of network.json, the
/// capital-weighted center and the centered polar coordinates.
json embed_stage(const json &network, int dim, const embed::DescentOptions &opts,
                 bool refine_euclidean);

/// Centered coordinates listed in embedding.json.
std::vector<stats::CenteredCoordinates> centered_coordinates(const json &embedding);

/// Hyperboloid coordinates stored under embedding["hyperbolic"]["coordinates"]
/// (or another key holding an array of ambient vectors).
std::vector<geometry::HyperboloidPoint> hyperboloid_points(const json &coordinates);

/// Dissimilarity matrix stored in network.json.
embed::DissimilarityMatrix dissimilarities(const json &network);

/// analysis.json: stresses, radial ranking, and (when annotations are given)
/// the G-SIB rank test and the regional circular ANOVA.
json analyze_stage(const json &embedding,
                   const std::optional<std::vector<io::NodeAnnotation>> &annotations);

/// Figure of the embedding with the top `decile` links of the network.
svg::FigureSpec figure_stage(const json &network, const json &embedding,
                             const std::optional<std::vector<io::NodeAnnotation>> &annotations,
                             double decile, bool chords, bool centered);

/// analysis-delta.json: matched sample, Pearson correlation of r', circular
/// correlation of theta' and the largest |delta r'| movers.
json longitudinal_stage(const json &embedding_a, const json &embedding_b,
                        std::size_t outliers = 5);

struct YearArtifacts {
  json network;
  json embedding;
  json analysis;
  std::string figure;
};

/// Runs every stage for one year and writes network.json, embedding.json,
/// analysis.json and figure.svg into config.out_dir.
YearArtifacts run_year(const RunConfig &config);

json read_json(const std::filesystem::path &path);
/// Pretty-printed with a trailing newline. Throws IoError.
void write_json(const json &doc, const std::filesystem::path &path);
void write_text(const std::string &text, const std::filesystem::path &path);

} // namespace hypfin::pipeline
