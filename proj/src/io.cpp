#include "fracneu/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <system_error>

#include <nlohmann/json.hpp>

#include "fracneu/error.hpp"

namespace fracneu {

using nlohmann::json;

namespace {

double parse_double(std::string_view text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && last[-1] == ' ') --last;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw ParameterError("not a number: '" + std::string(text) + "'");
  }
  return v;
}

std::vector<double> parse_list(std::string_view text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::size_t end = comma == std::string_view::npos ? text.size() : comma;
    out.push_back(parse_double(text.substr(start, end - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::size_t as_count(double v, const char* what) {
  if (!(v >= 1.0) || v != std::floor(v) || v > 1e7) {
    throw ParameterError(std::string(what) + " must be a positive integer");
  }
  return static_cast<std::size_t>(v);
}

const char* shape_name(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::Interval:
      return "interval";
    case ShapeKind::Rectangle:
      return "rectangle";
    case ShapeKind::LShape:
      return "lshape";
    case ShapeKind::PointCloud:
      break;
  }
  return "points";
}

json optional_number(const std::optional<double>& v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

json number_or_null(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

std::string csv_optional(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string();
}

std::string xml_escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

MetricKind parse_metric(std::string_view text) {
  if (text == "euclidean") return MetricKind::Euclidean;
  if (text == "geodesic") return MetricKind::Geodesic;
  throw ParameterError("metric must be 'euclidean' or 'geodesic'");
}

const char* to_string(MetricKind metric) noexcept {
  return metric == MetricKind::Geodesic ? "geodesic" : "euclidean";
}

DomainSpec DomainSpec::parse(std::string_view text) {
  const std::size_t colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw ParameterError("domain must look like shape:params, got '" + std::string(text) + "'");
  }
  const std::string_view name = text.substr(0, colon);
  DomainSpec spec;
  spec.params = parse_list(text.substr(colon + 1));
  std::size_t want = 0;
  if (name == "interval") {
    spec.shape = ShapeKind::Interval;
    want = 3;
  } else if (name == "rectangle") {
    spec.shape = ShapeKind::Rectangle;
    want = 6;
  } else if (name == "lshape") {
    spec.shape = ShapeKind::LShape;
    want = 2;
  } else {
    throw ParameterError("unknown shape '" + std::string(name) + "'");
  }
  if (spec.params.size() != want) {
    throw ParameterError(std::string(name) + " takes " + std::to_string(want) + " parameters");
  }
  for (double v : spec.params) {
    if (!std::isfinite(v)) throw ParameterError("domain parameters must be finite");
  }
  return spec;
}

std::string DomainSpec::to_string() const {
  std::string out = shape_name(shape);
  out += ':';
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (i) out += ',';
    out += format_number(params[i]);
  }
  return out;
}

Domain DomainSpec::build() const {
  Domain d = [&] {
    switch (shape) {
      case ShapeKind::Interval:
        return build_interval(params.at(0), params.at(1), as_count(params.at(2), "N"));
      case ShapeKind::Rectangle:
        return build_rectangle(params.at(0), params.at(1), params.at(2), params.at(3),
                               as_count(params.at(4), "nx"), as_count(params.at(5), "ny"));
      case ShapeKind::LShape:
        return build_lshape(params.at(0), as_count(params.at(1), "N"));
      case ShapeKind::PointCloud:
        break;
    }
    throw ParameterError("point clouds cannot be built from a spec");
  }();
  if (metric == MetricKind::Geodesic) {
    d = geodesic_distances(d, k ? k : default_geodesic_k(d.dim()));
  }
  return d;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParameterError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

std::string eigenpair_json(const DomainSpec& spec, const Domain& domain,
                           const EigenPair& pair, double weak_residual) {
  json j;
  j["domain"] = spec.to_string();
  j["metric"] = to_string(spec.metric);
  j["k"] = domain.geodesic_k();
  j["s"] = pair.s;
  j["p"] = pair.p;
  j["lambda"] = pair.lambda;
  j["converged"] = pair.converged;
  j["iterations"] = pair.iterations;
  j["constraint_residual"] = pair.constraint_residual;
  j["stationarity"] = pair.stationarity;
  j["weak_residual"] = number_or_null(weak_residual);
  j["final_step"] = pair.final_step;
  j["viscosity_regime"] = pair.viscosity_regime();
  j["nodes"] = domain.size();
  j["u"] = pair.u;
  return j.dump(2) + "\n";
}

std::string eigenfunction_csv(const Domain& domain, const EigenPair& pair) {
  std::string out = domain.dim() == 2 ? "x,y,u\n" : "x,u\n";
  for (std::size_t i = 0; i < domain.size(); ++i) {
    out += format_number(domain.nodes()[i][0]);
    if (domain.dim() == 2) out += ',' + format_number(domain.nodes()[i][1]);
    out += ',' + format_number(pair.u[i]) + '\n';
  }
  return out;
}

StoredEigenPair parse_eigenpair_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    StoredEigenPair out;
    out.spec = DomainSpec::parse(j.at("domain").get<std::string>());
    out.spec.metric = parse_metric(j.value("metric", std::string("euclidean")));
    out.spec.k = j.value("k", std::size_t{0});
    EigenPair& e = out.pair;
    e.s = j.at("s").get<double>();
    e.p = j.at("p").get<double>();
    e.lambda = j.at("lambda").get<double>();
    e.converged = j.value("converged", false);
    e.iterations = j.value("iterations", std::size_t{0});
    e.constraint_residual = j.value("constraint_residual", 0.0);
    e.stationarity = j.value("stationarity", 0.0);
    e.final_step = j.value("final_step", 0.0);
    e.u = j.at("u").get<std::vector<double>>();
    return out;
  } catch (const json::exception& ex) {
    throw ParameterError(std::string("malformed eigenpair JSON: ") + ex.what());
  }
}

std::string sweep_json(const DomainSpec& spec, const SweepResult& result) {
  json j;
  j["kind"] = to_string(result.kind);
  j["domain"] = spec.to_string();
  j["metric"] = to_string(spec.metric);
  j[result.kind == SweepKind::S ? "p" : "s"] = result.fixed;
  j["extrapolated"] = number_or_null(result.extrapolated);
  j["reference"] = optional_number(result.reference);
  j["rel_error"] = optional_number(result.rel_error);
  if (result.kind == SweepKind::S) {
    j["order_estimate"] = optional_number(result.order_estimate);
    j["consistent"] = result.consistent();
    j["monotone_tail"] = result.monotone_tail();
  }
  if (result.fit) {
    const FitDiagnostics& f = *result.fit;
    j["fit_diagnostics"] = {{"slope", f.slope},
                            {"intercept", f.intercept},
                            {"residual", f.residual},
                            {"points", f.points},
                            {"p_min", f.p_min},
                            {"p_max", f.p_max},
                            {"convex_or_linear", f.convex_or_linear}};
  } else {
    j["fit_diagnostics"] = nullptr;
  }
  json records = json::array();
  for (const auto& r : result.records) {
    records.push_back({{"param", r.param},
                       {"lambda", r.lambda},
                       {"log_lambda", r.log_lambda},
                       {"scaled", r.scaled},
                       {"grid_N", r.grid_n},
                       {"reference", optional_number(r.reference)},
                       {"rel_error", optional_number(r.rel_error)},
                       {"upper_bound", optional_number(r.upper_bound)},
                       {"iterations", r.iterations},
                       {"weak_residual", r.weak_residual}});
  }
  j["records"] = records;
  json gaps = json::array();
  for (const auto& g : result.gaps) gaps.push_back({{"param", g.param}, {"error", g.message}});
  j["gaps"] = gaps;
  return j.dump(2) + "\n";
}

std::string sweep_csv(const SweepResult& result) {
  std::string out = "param,N,lambda,scaled,reference,rel_error\n";
  for (const auto& r : result.records) {
    out += format_number(r.param) + ',' + std::to_string(r.grid_n) + ',' +
           format_number(r.lambda) + ',' + format_number(r.scaled) + ',' +
           csv_optional(r.reference) + ',' + csv_optional(r.rel_error) + '\n';
  }
  return out;
}

std::string sweep_svg(const SweepResult& result) {
  constexpr double W = 640;
  constexpr double H = 400;
  constexpr double L = 70;
  constexpr double R = 20;
  constexpr double T = 30;
  constexpr double B = 50;
  double x0 = std::numeric_limits<double>::infinity();
  double x1 = -x0;
  double y0 = x0;
  double y1 = -x0;
  for (const auto& r : result.records) {
    x0 = std::min(x0, r.param);
    x1 = std::max(x1, r.param);
    y0 = std::min(y0, r.scaled);
    y1 = std::max(y1, r.scaled);
  }
  if (result.reference && std::isfinite(*result.reference)) {
    y0 = std::min(y0, *result.reference);
    y1 = std::max(y1, *result.reference);
  }
  if (result.records.empty()) {
    x0 = y0 = 0.0;
    x1 = y1 = 1.0;
  }
  if (x1 == x0) x1 = x0 + 1.0;
  if (y1 == y0) y1 = y0 + 1.0;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

  const std::string xlabel = result.kind == SweepKind::S ? "s" : "p";
  const std::string ylabel =
      result.kind == SweepKind::S ? "K (1-s) lambda" : "lambda^(1/p)";
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
    << "\" stroke=\"black\"/>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B
    << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4.0;
    const double yv = y0 + (y1 - y0) * k / 4.0;
    o << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">"
      << format_number(std::round(xv * 1e4) / 1e4) << "</text>\n";
    o << "<text x=\"" << L - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">"
      << format_number(std::round(yv * 1e4) / 1e4) << "</text>\n";
  }
  o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">"
    << xml_escape(xlabel) << "</text>\n";
  o << "<text x=\"14\" y=\"" << (T + H - B) / 2 << "\" transform=\"rotate(-90 14 "
    << (T + H - B) / 2 << ")\" text-anchor=\"middle\">" << xml_escape(ylabel) << "</text>\n";
  if (result.reference && std::isfinite(*result.reference)) {
    o << "<line x1=\"" << L << "\" y1=\"" << py(*result.reference) << "\" x2=\"" << W - R
      << "\" y2=\"" << py(*result.reference)
      << "\" stroke=\"gray\" stroke-dasharray=\"6 4\"/>\n";
  }
  if (!result.records.empty()) {
    o << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
    for (const auto& r : result.records) o << px(r.param) << ',' << py(r.scaled) << ' ';
    o << "\"/>\n";
    for (const auto& r : result.records) {
      o << "<circle cx=\"" << px(r.param) << "\" cy=\"" << py(r.scaled)
        << "\" r=\"3\" fill=\"steelblue\"/>\n";
    }
  }
  o << "</svg>\n";
  return o.str();
}

std::string viscosity_json(const DomainSpec& spec, const ViscosityReport& report) {
  json j;
  j["domain"] = spec.to_string();
  j["metric"] = to_string(spec.metric);
  j["s"] = report.s;
  j["lambda"] = report.lambda;
  j["dead_band"] = report.dead_band;
  j["tolerance"] = report.tolerance;
  j["max_residual"] = report.max_residual;
  j["fraction_within_tol"] = report.fraction_within_tol;
  json nodes = json::array();
  for (const auto& r : report.per_node) {
    nodes.push_back({{"node", r.node}, {"class", to_string(r.sign)}, {"residual", r.residual}});
  }
  j["per_node"] = nodes;
  return j.dump(2) + "\n";
}

std::string viscosity_csv(const Domain& domain, std::span<const double> u,
                          const ViscosityReport& report) {
  std::string out = domain.dim() == 2 ? "node,x,y,u,class,residual\n" : "node,x,u,class,residual\n";
  for (const auto& r : report.per_node) {
    out += std::to_string(r.node) + ',' + format_number(domain.nodes()[r.node][0]);
    if (domain.dim() == 2) out += ',' + format_number(domain.nodes()[r.node][1]);
    out += ',' + format_number(u[r.node]) + ',' + to_string(r.sign) + ',' +
           format_number(r.residual) + '\n';
  }
  return out;
}

}  // namespace fracneu
