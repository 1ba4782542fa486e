#include "hypfin/pipeline.hpp"

#include "hypfin/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace hypfin::pipeline {

namespace {

json matrix_json(const Eigen::MatrixXd &m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_json(const Eigen::VectorXd &v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i)
    out.push_back(v[i]);
  return out;
}

const json &field(const json &doc, const char *key) {
  if (!doc.is_object() || !doc.contains(key))
    throw SchemaError(std::string("missing field '") + key + "'");
  return doc.at(key);
}

Eigen::MatrixXd parse_matrix(const json &rows, const char *what) {
  if (!rows.is_array() || rows.empty())
    throw SchemaError(std::string(what) + " must be a non-empty array of rows");
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto m = static_cast<Eigen::Index>(rows.front().size());
  Eigen::MatrixXd out(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto &row = rows.at(static_cast<std::size_t>(i));
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != m)
      throw SchemaError(std::string(what) + " has ragged rows");
    for (Eigen::Index j = 0; j < m; ++j)
      out(i, j) = row.at(static_cast<std::size_t>(j)).get<double>();
  }
  return out;
}

Eigen::VectorXd parse_vector(const json &arr, const char *what) {
  if (!arr.is_array())
    throw SchemaError(std::string(what) + " must be an array");
  Eigen::VectorXd out(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = arr.at(i).get<double>();
  return out;
}

json polar_json(const geometry::PoincarePolar &p) { return {{"r", p.r}, {"theta", p.theta}}; }

geometry::PoincarePolar parse_polar(const json &p) {
  return {field(p, "r").get<double>(), field(p, "theta").get<double>()};
}

json points_json(std::span<const geometry::HyperboloidPoint> points) {
  json out = json::array();
  for (const auto &p : points)
    out.push_back(vector_json(p.coords()));
  return out;
}

void require_schema(const json &doc, const char *kind) {
  if (field(doc, "schema_version").get<int>() != kSchemaVersion)
    throw SchemaError(std::string(kind) + ": unsupported schema_version");
}

std::map<std::string, const io::NodeAnnotation *>
annotation_index(const std::optional<std::vector<io::NodeAnnotation>> &annotations) {
  std::map<std::string, const io::NodeAnnotation *> index;
  if (annotations)
    for (const auto &a : *annotations)
      index.emplace(a.bank_id, &a);
  return index;
}

std::vector<std::string> string_list(const json &arr) {
  return arr.get<std::vector<std::string>>();
}

} // namespace

void RunConfig::validate() const {
  if (dim < 1)
    throw ContractViolation("embedding dimension must be >= 1");
  if (!(decile > 0.0 && decile < 1.0))
    throw ContractViolation("backbone decile must lie in (0, 1)");
}

json to_json(const stats::TestResult &result) {
  json out;
  out["method"] = stats::to_string(result.method);
  out["statistic"] = std::isfinite(result.statistic) ? json(result.statistic) : json("inf");
  out["p_value"] = result.p_value;
  out["n_effective"] = result.n_effective;
  out["warnings"] = result.warnings;
  return out;
}

json infer_stage(const netinfer::PortfolioMatrix &portfolio, const std::string &year,
                 netinfer::NormMode norm, double decile) {
  const netinfer::OverlapNetwork net = netinfer::infer_network(portfolio, norm);
  const netinfer::DecileSummary deciles = netinfer::weight_deciles(net.weights, decile);

  json backbone = json::array();
  for (const auto &e : deciles.backbone)
    backbone.push_back({{"source", net.banks[static_cast<std::size_t>(e.i)]},
                        {"target", net.banks[static_cast<std::size_t>(e.j)]},
                        {"i", e.i},
                        {"j", e.j},
                        {"weight", e.weight}});

  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["year"] = year;
  doc["normalization"] = netinfer::to_string(norm);
  doc["banks"] = net.banks;
  doc["assets"] = net.assets;
  doc["dropped_assets"] = net.dropped_assets;
  doc["isolated_banks"] = net.isolated_banks;
  doc["depths"] = vector_json(net.depths);
  doc["capital"] = vector_json(net.capital);
  doc["lwpo"] = matrix_json(net.lwpo);
  doc["weights"] = matrix_json(net.weights);
  doc["dissimilarities"] = matrix_json(net.dissimilarities);
  doc["deciles"] = {{"quantiles", deciles.deciles},
                    {"inter_decile_range", deciles.inter_decile_range},
                    {"top_fraction", deciles.top_fraction},
                    {"top_threshold", deciles.top_threshold},
                    {"backbone", std::move(backbone)}};
  json warnings = json::array();
  if (!net.dropped_assets.empty())
    warnings.push_back("removed " + std::to_string(net.dropped_assets.size()) +
                       " asset class(es) held by no bank");
  if (!net.isolated_banks.empty())
    warnings.push_back(std::to_string(net.isolated_banks.size()) +
                       " bank(s) with zero holdings kept as isolated nodes");
  doc["warnings"] = std::move(warnings);
  return doc;
}

embed::DissimilarityMatrix dissimilarities(const json &network) {
  require_schema(network, "network.json");
  auto banks = string_list(field(network, "banks"));
  if (banks.size() < 3)
    throw DegenerateInput("degenerate network: embedding needs at least 3 banks");
  return embed::DissimilarityMatrix(std::move(banks),
                                    parse_matrix(field(network, "dissimilarities"),
                                                 "dissimilarities"));
}

std::vector<geometry::HyperboloidPoint> hyperboloid_points(const json &coordinates) {
  if (!coordinates.is_array())
    throw SchemaError("hyperboloid coordinates must be an array");
  std::vector<geometry::HyperboloidPoint> points;
  points.reserve(coordinates.size());
  for (const auto &c : coordinates)
    points.emplace_back(parse_vector(c, "hyperboloid point"));
  return points;
}

json embed_stage(const json &network, int dim, const embed::DescentOptions &opts,
                 bool refine_euclidean) {
  const embed::DissimilarityMatrix target = dissimilarities(network);
  const Eigen::VectorXd capital = parse_vector(field(network, "capital"), "capital");
  if (capital.size() != target.size())
    throw SchemaError("network.json: capital does not match banks");
  const double total = capital.sum();
  if (!(total > 0.0))
    throw DegenerateInput("degenerate network: no capital to weight the center");
  const Eigen::VectorXd weights = capital / total;

  const embed::HyperboloidEmbedding hyp = embed::embed_hyperbolic(target, dim, opts);
  const embed::EuclideanEmbedding euc =
      embed::embed_euclidean(target, dim, opts, refine_euclidean);

  const std::vector<double> w(weights.data(), weights.data() + weights.size());
  const geometry::HyperbolicCenter center = geometry::hyperbolic_mean(hyp.points, w);
  const std::vector<geometry::HyperboloidPoint> centered =
      geometry::center_points(hyp.points, center.mean);

  const auto &labels = target.labels();
  json polar = json::array();
  for (std::size_t i = 0; i < centered.size(); ++i) {
    const auto &p = centered[i];
    json entry;
    entry["bank_id"] = labels[i];
    // Radius in the Poincare ball; equals the disc radius of to_poincare for d = 2.
    entry["r_prime"] = p.spatial().norm() / (p.x0() + 1.0);
    entry["theta_prime"] = dim == 2 ? json(geometry::to_poincare(p).theta) : json(nullptr);
    entry["geodesic_radius"] = std::acosh(std::max(1.0, p.x0()));
    polar.push_back(std::move(entry));
  }

  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["year"] = field(network, "year");
  doc["labels"] = labels;
  doc["dim"] = dim;
  doc["options"] = {{"max_iter", opts.max_iter},
                    {"tolerance", opts.tolerance},
                    {"initial_step", opts.initial_step},
                    {"curvature", opts.curvature},
                    {"restarts", opts.restarts},
                    {"seed", opts.seed},
                    {"perturbation", opts.perturbation},
                    {"refine_euclidean", refine_euclidean}};

  json h;
  h["stress"] = hyp.stress;
  h["iterations"] = hyp.iterations;
  h["converged"] = hyp.converged;
  h["warnings"] = hyp.warnings;
  h["coordinates"] = points_json(hyp.points);
  if (dim == 2) {
    json disc = json::array();
    for (const auto &p : hyp.points)
      disc.push_back(polar_json(geometry::to_poincare(p)));
    h["poincare"] = std::move(disc);
  }
  doc["hyperbolic"] = std::move(h);

  doc["euclidean"] = {{"stress", euc.stress},
                      {"iterations", euc.iterations},
                      {"converged", euc.converged},
                      {"refined", refine_euclidean},
                      {"warnings", euc.warnings},
                      {"coordinates", matrix_json(euc.points)}};

  json c;
  c["coordinates"] = vector_json(center.mean.coords());
  c["resultant_length"] = center.resultant_length;
  c["weights"] = vector_json(weights);
  if (dim == 2)
    c["poincare"] = polar_json(geometry::to_poincare(center.mean));
  doc["center"] = std::move(c);

  doc["centered"] = {{"coordinates", points_json(centered)}, {"polar", std::move(polar)}};
  return doc;
}

std::vector<stats::CenteredCoordinates> centered_coordinates(const json &embedding) {
  require_schema(embedding, "embedding.json");
  std::vector<stats::CenteredCoordinates> out;
  for (const auto &e : field(field(embedding, "centered"), "polar")) {
    stats::CenteredCoordinates c;
    c.bank_id = field(e, "bank_id").get<std::string>();
    c.r_prime = field(e, "r_prime").get<double>();
    const auto &theta = field(e, "theta_prime");
    c.theta_prime = theta.is_null() ? 0.0 : theta.get<double>();
    out.push_back(std::move(c));
  }
  return out;
}

json analyze_stage(const json &embedding,
                   const std::optional<std::vector<io::NodeAnnotation>> &annotations) {
  const auto coords = centered_coordinates(embedding);
  const int dim = field(embedding, "dim").get<int>();
  const auto index = annotation_index(annotations);

  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["year"] = field(embedding, "year");
  doc["n_banks"] = coords.size();
  doc["dim"] = dim;
  const double hyp = field(field(embedding, "hyperbolic"), "stress").get<double>();
  const double euc = field(field(embedding, "euclidean"), "stress").get<double>();
  doc["stress"] = {{"hyperbolic", hyp},
                   {"euclidean", euc},
                   {"hyperbolic_below_euclidean", hyp < euc}};

  json notes = json::array();
  const auto ranked = stats::radial_ranking(coords);
  json ranking = json::array();
  json top = json::array();
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    json entry = {{"rank", k + 1},
                  {"bank_id", ranked[k].bank_id},
                  {"r_prime", ranked[k].r_prime}};
    if (dim == 2)
      entry["theta_prime"] = ranked[k].theta_prime;
    if (const auto it = index.find(ranked[k].bank_id); it != index.end()) {
      entry["gsib"] = it->second->gsib;
      entry["region"] = it->second->region;
    }
    ranking.push_back(std::move(entry));
    if (k < 5)
      top.push_back(ranked[k].bank_id);
  }
  doc["ranking"] = std::move(ranking);
  doc["top5"] = std::move(top);

  json tests = {{"gsib_radial", nullptr}, {"region_angular", nullptr}};
  if (!annotations) {
    notes.push_back("no annotations supplied; association tests skipped");
  } else {
    std::vector<double> gsib_r;
    std::vector<double> other_r;
    std::vector<std::string> unannotated;
    std::map<std::string, std::vector<double>> by_region;
    for (const auto &c : coords) {
      const auto it = index.find(c.bank_id);
      if (it == index.end()) {
        unannotated.push_back(c.bank_id);
        continue;
      }
      (it->second->gsib ? gsib_r : other_r).push_back(c.r_prime);
      if (it->second->region != io::kUnassigned)
        by_region[it->second->region].push_back(c.theta_prime);
    }
    doc["unannotated_banks"] = unannotated;

    if (gsib_r.empty() || other_r.empty())
      notes.push_back("G-SIB test skipped: one of the groups is empty");
    else
      tests["gsib_radial"] = to_json(stats::wilcoxon_mann_whitney(gsib_r, other_r));

    if (dim != 2) {
      notes.push_back("regional test skipped: angular coordinate requires dim = 2");
    } else {
      std::vector<double> angles;
      std::vector<std::string> labels;
      json excluded = json::array();
      for (const auto &[region, thetas] : by_region) {
        if (thetas.size() < 2) {
          excluded.push_back(region);
          continue;
        }
        for (double t : thetas) {
          angles.push_back(t);
          labels.push_back(region);
        }
      }
      doc["regions_excluded"] = std::move(excluded);
      const auto groups = std::set<std::string>(labels.begin(), labels.end()).size();
      if (groups < 2)
        notes.push_back("regional test skipped: fewer than 2 regions with >= 2 banks");
      else
        tests["region_angular"] = to_json(stats::circular_anova(angles, labels));
    }
  }
  doc["tests"] = std::move(tests);
  doc["notes"] = std::move(notes);
  return doc;
}

svg::FigureSpec figure_stage(const json &network, const json &embedding,
                             const std::optional<std::vector<io::NodeAnnotation>> &annotations,
                             double decile, bool chords, bool centered) {
  require_schema(network, "network.json");
  require_schema(embedding, "embedding.json");
  if (field(embedding, "dim").get<int>() != 2)
    throw ContractViolation("figures require a 2-dimensional embedding");

  const auto banks = string_list(field(network, "banks"));
  const auto labels = string_list(field(embedding, "labels"));
  if (banks != labels)
    throw SchemaError("network.json and embedding.json list different banks");

  const auto index = annotation_index(annotations);
  const auto regions = io::RegionMap::defaults();

  svg::FigureSpec spec;
  spec.title = "Hyperbolic embedding " + field(embedding, "year").get<std::string>();
  spec.chords = chords;
  const auto coords = centered_coordinates(embedding);
  const auto &raw = field(field(embedding, "hyperbolic"), "poincare");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    svg::FigureNode node;
    node.label = labels[i];
    node.position = centered ? geometry::PoincarePolar{coords[i].r_prime, coords[i].theta_prime}
                             : parse_polar(raw.at(i));
    if (const auto it = index.find(labels[i]); it != index.end()) {
      node.gsib = it->second->gsib;
      node.region = it->second->region;
    } else {
      node.region = regions.region_of_bank(labels[i]);
    }
    spec.nodes.push_back(std::move(node));
  }
  spec.center = centered ? geometry::PoincarePolar{0.0, 0.0}
                         : parse_polar(field(field(embedding, "center"), "poincare"));

  const Eigen::MatrixXd weights = parse_matrix(field(network, "weights"), "weights");
  for (const auto &e : netinfer::weight_deciles(weights, decile).backbone)
    spec.edges.emplace_back(e.i, e.j);
  return spec;
}

json longitudinal_stage(const json &embedding_a, const json &embedding_b,
                        std::size_t outliers) {
  const auto a = centered_coordinates(embedding_a);
  const auto b = centered_coordinates(embedding_b);
  const stats::MatchedSamples matched = stats::match_samples(a, b);

  std::vector<double> ra;
  std::vector<double> rb;
  std::vector<double> ta;
  std::vector<double> tb;
  for (std::size_t i = 0; i < matched.bank_ids.size(); ++i) {
    ra.push_back(matched.a[i].r_prime);
    rb.push_back(matched.b[i].r_prime);
    ta.push_back(matched.a[i].theta_prime);
    tb.push_back(matched.b[i].theta_prime);
  }

  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["year_a"] = field(embedding_a, "year");
  doc["year_b"] = field(embedding_b, "year");
  doc["n_a"] = a.size();
  doc["n_b"] = b.size();
  doc["matched"] = matched.bank_ids.size();
  doc["bank_ids"] = matched.bank_ids;
  doc["only_in_a"] = matched.only_in_a;
  doc["only_in_b"] = matched.only_in_b;

  json notes = json::array();
  doc["pearson_r_prime"] = nullptr;
  doc["circular_theta_prime"] = nullptr;
  try {
    doc["pearson_r_prime"] = to_json(stats::pearson_correlation(ra, rb));
  } catch (const std::exception &e) {
    notes.push_back(std::string("Pearson correlation skipped: ") + e.what());
  }
  const bool angular = field(embedding_a, "dim").get<int>() == 2 &&
                       field(embedding_b, "dim").get<int>() == 2;
  if (!angular) {
    notes.push_back("circular correlation skipped: angular coordinate requires dim = 2");
  } else {
    try {
      doc["circular_theta_prime"] = to_json(stats::circular_correlation(ta, tb));
    } catch (const std::exception &e) {
      notes.push_back(std::string("circular correlation skipped: ") + e.what());
    }
  }

  std::vector<std::size_t> order(matched.bank_ids.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    const double dx = std::abs(rb[x] - ra[x]);
    const double dy = std::abs(rb[y] - ra[y]);
    if (dx != dy)
      return dx > dy;
    return matched.bank_ids[x] < matched.bank_ids[y];
  });
  json movers = json::array();
  for (std::size_t k = 0; k < std::min(outliers, order.size()); ++k) {
    const std::size_t i = order[k];
    movers.push_back({{"bank_id", matched.bank_ids[i]},
                      {"r_prime_a", ra[i]},
                      {"r_prime_b", rb[i]},
                      {"delta_r_prime", rb[i] - ra[i]}});
  }
  doc["outliers"] = std::move(movers);
  doc["notes"] = std::move(notes);
  return doc;
}

YearArtifacts run_year(const RunConfig &config) {
  config.validate();
  const io::RegionMap regions =
      config.regions ? io::RegionMap::from_json_file(*config.regions) : io::RegionMap::defaults();
  std::optional<std::vector<io::NodeAnnotation>> annotations;
  if (config.annotations)
    annotations = io::read_annotations_csv(*config.annotations, regions);

  YearArtifacts out;
  out.network = infer_stage(io::read_portfolio_csv(config.portfolio), config.year, config.norm,
                            config.decile);
  out.embedding = embed_stage(out.network, config.dim, config.descent, config.refine_euclidean);
  out.analysis = analyze_stage(out.embedding, annotations);

  std::error_code ec;
  std::filesystem::create_directories(config.out_dir, ec);
  if (ec)
    throw IoError("cannot create output directory '" + config.out_dir.string() + "'");
  write_json(out.network, config.out_dir / "network.json");
  write_json(out.embedding, config.out_dir / "embedding.json");
  write_json(out.analysis, config.out_dir / "analysis.json");
  if (config.dim == 2) {
    out.figure = svg::render_svg(figure_stage(out.network, out.embedding, annotations,
                                              config.decile, config.chords,
                                              config.centered_figure));
    write_text(out.figure, config.out_dir / "figure.svg");
  }
  return out;
}

json read_json(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open '" + path.string() + "' for reading");
  try {
    return json::parse(in);
  } catch (const json::parse_error &e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

void write_json(const json &doc, const std::filesystem::path &path) {
  write_text(doc.dump(2) + "\n", path);
}

void write_text(const std::string &text, const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text) || !out.flush())
    throw IoError("cannot write '" + path.string() + "'");
}

} // namespace hypfin::pipeline
