// hypfin: infer overlap networks from portfolio CSVs, embed them in the
// hyperbolic plane and analyze the embedding.
//
// Exit codes: 0 success, 1 usage or internal error, 2 malformed input,
// 3 degenerate data, 4 I/O failure.

#include "hypfin/errors.hpp"
#include "hypfin/io.hpp"
#include "hypfin/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace hypfin;
namespace fs = std::filesystem;

struct Args {
  std::string portfolio;
  std::string network;
  std::string embedding;
  std::string embedding_b;
  std::string annotations;
  std::string regions;
  std::string out;
  std::string out_dir = ".";
  std::string year = "unlabelled";
  std::string norm = "offdiag";
  int dim = 2;
  double decile = 0.1;
  bool refine_euclidean = true;
  bool chords = false;
  bool centered = false;
  std::size_t outliers = 5;
  embed::DescentOptions descent;
};

void add_descent_options(CLI::App *cmd, Args &args) {
  cmd->add_option("--dim", args.dim, "embedding dimension")->capture_default_str();
  cmd->add_option("--seed", args.descent.seed, "seed for restart perturbations")
      ->capture_default_str();
  cmd->add_option("--max-iter", args.descent.max_iter, "descent iteration cap")
      ->capture_default_str();
  cmd->add_option("--tol", args.descent.tolerance, "relative stress decrease to stop at")
      ->capture_default_str();
  cmd->add_option("--restarts", args.descent.restarts, "number of descents (best kept)")
      ->capture_default_str();
  cmd->add_flag("--refine-euclidean,!--no-refine-euclidean", args.refine_euclidean,
                "refine classical MDS by stress descent (default on)");
}

std::optional<std::vector<io::NodeAnnotation>> load_annotations(const Args &args) {
  if (args.annotations.empty())
    return std::nullopt;
  const auto regions = args.regions.empty() ? io::RegionMap::defaults()
                                            : io::RegionMap::from_json_file(args.regions);
  return io::read_annotations_csv(fs::path(args.annotations), regions);
}

void emit(const pipeline::json &doc, const std::string &out) {
  if (out.empty())
    std::cout << doc.dump(2) << "\n";
  else
    pipeline::write_json(doc, out);
}

int run(int argc, char **argv) {
  CLI::App app{"hypfin - hyperbolic embedding of fire-sale contagion networks"};
  app.require_subcommand(1);
  app.footer(std::string("\nInput format\n") + io::kPortfolioCsvSchema +
             "\n\nannotations.csv: header bank_id,gsib,region; gsib in 1/0/true/false/yes/no;"
             "\nregion one of ES, DE, FR, IT, UK/IE, Nordic, Benelux, Southern,"
             "\nCentral/Eastern, unassigned, or empty (derived from the bank id prefix)."
             "\n\nExit codes: 0 ok, 1 usage error, 2 malformed input, 3 degenerate data,"
             "\n4 I/O failure.");

  Args args;

  auto *infer = app.add_subcommand("infer", "portfolio.csv -> network.json");
  infer->add_option("--portfolio", args.portfolio, "portfolio CSV")->required();
  infer->add_option("--year", args.year, "free-form year label")->capture_default_str();
  infer->add_option("--norm", args.norm, "normalization maximum: offdiag | all")
      ->capture_default_str();
  infer->add_option("--decile", args.decile, "backbone share of strongest links")
      ->capture_default_str();
  infer->add_option("-o,--out", args.out, "output path (stdout if omitted)");

  auto *embed_cmd = app.add_subcommand("embed", "network.json -> embedding.json");
  embed_cmd->add_option("--network", args.network, "network.json")->required();
  add_descent_options(embed_cmd, args);
  embed_cmd->add_option("-o,--out", args.out, "output path (stdout if omitted)");

  auto *analyze = app.add_subcommand("analyze", "embedding.json -> analysis.json");
  analyze->add_option("--embedding", args.embedding, "embedding.json")->required();
  analyze->add_option("--annotations", args.annotations, "annotations CSV");
  analyze->add_option("--regions", args.regions, "region map JSON");
  analyze->add_option("-o,--out", args.out, "output path (stdout if omitted)");

  auto *render = app.add_subcommand("render", "network.json + embedding.json -> figure.svg");
  render->add_option("--network", args.network, "network.json")->required();
  render->add_option("--embedding", args.embedding, "embedding.json")->required();
  render->add_option("--annotations", args.annotations, "annotations CSV");
  render->add_option("--regions", args.regions, "region map JSON");
  render->add_option("--decile", args.decile, "backbone share of strongest links")
      ->capture_default_str();
  render->add_flag("--chords", args.chords, "draw straight chords instead of geodesic arcs");
  render->add_flag("--centered", args.centered, "draw centered coordinates");
  render->add_option("-o,--out", args.out, "output SVG path")->required();

  auto *run_cmd = app.add_subcommand("run", "all stages for one year");
  run_cmd->add_option("--portfolio", args.portfolio, "portfolio CSV")->required();
  run_cmd->add_option("--annotations", args.annotations, "annotations CSV");
  run_cmd->add_option("--regions", args.regions, "region map JSON");
  run_cmd->add_option("--year", args.year, "free-form year label")->capture_default_str();
  run_cmd->add_option("--norm", args.norm, "normalization maximum: offdiag | all")
      ->capture_default_str();
  run_cmd->add_option("--decile", args.decile, "backbone share of strongest links")
      ->capture_default_str();
  add_descent_options(run_cmd, args);
  run_cmd->add_flag("--chords", args.chords, "draw straight chords instead of geodesic arcs");
  run_cmd->add_flag("--centered", args.centered, "draw centered coordinates");
  run_cmd->add_option("--out-dir", args.out_dir, "output directory")->capture_default_str();

  auto *longitudinal =
      app.add_subcommand("longitudinal", "two embedding.json -> analysis-delta.json");
  longitudinal->add_option("--a", args.embedding, "earlier embedding.json")->required();
  longitudinal->add_option("--b", args.embedding_b, "later embedding.json")->required();
  longitudinal->add_option("--outliers", args.outliers, "number of largest movers listed")
      ->capture_default_str();
  longitudinal->add_option("-o,--out", args.out, "output path (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  if (*infer) {
    const auto portfolio = io::read_portfolio_csv(fs::path(args.portfolio));
    emit(pipeline::infer_stage(portfolio, args.year, netinfer::parse_norm_mode(args.norm),
                               args.decile),
         args.out);
  } else if (*embed_cmd) {
    emit(pipeline::embed_stage(pipeline::read_json(args.network), args.dim, args.descent,
                               args.refine_euclidean),
         args.out);
  } else if (*analyze) {
    emit(pipeline::analyze_stage(pipeline::read_json(args.embedding), load_annotations(args)),
         args.out);
  } else if (*render) {
    const auto spec = pipeline::figure_stage(
        pipeline::read_json(args.network), pipeline::read_json(args.embedding),
        load_annotations(args), args.decile, args.chords, args.centered);
    svg::write_svg(spec, args.out);
  } else if (*run_cmd) {
    pipeline::RunConfig config;
    config.portfolio = args.portfolio;
    if (!args.annotations.empty())
      config.annotations = args.annotations;
    if (!args.regions.empty())
      config.regions = args.regions;
    config.year = args.year;
    config.dim = args.dim;
    config.descent = args.descent;
    config.norm = netinfer::parse_norm_mode(args.norm);
    config.decile = args.decile;
    config.refine_euclidean = args.refine_euclidean;
    config.chords = args.chords;
    config.centered_figure = args.centered;
    config.out_dir = args.out_dir;
    const auto result = pipeline::run_year(config);
    std::cout << "n = " << result.analysis["n_banks"] << ", hyperbolic stress "
              << result.analysis["stress"]["hyperbolic"] << ", euclidean stress "
              << result.analysis["stress"]["euclidean"] << "\n";
  } else if (*longitudinal) {
    emit(pipeline::longitudinal_stage(pipeline::read_json(args.embedding),
                                      pipeline::read_json(args.embedding_b), args.outliers),
         args.out);
  }
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  try {
    return run(argc, argv);
  } catch (const SchemaError &e) {
    std::cerr << "error: malformed input: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception &e) {
    std::cerr << "error: malformed input: " << e.what() << "\n";
    return 2;
  } catch (const DegenerateInput &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const IoError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
