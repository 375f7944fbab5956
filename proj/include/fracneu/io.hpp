#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fracneu/asymptotics.hpp"
#include "fracneu/eigensolve.hpp"
#include "fracneu/geometry.hpp"
#include "fracneu/holder_infinity.hpp"

namespace fracneu {

/// Textual domain description, e.g. "interval:0,1,256",
/// "rectangle:0,1,0,1,24,24", "lshape:2,24", plus the metric.
struct DomainSpec {
  ShapeKind shape = ShapeKind::Interval;
  std::vector<double> params;  ///< bounds followed by cell counts
  MetricKind metric = MetricKind::Euclidean;
  std::size_t k = 0;  ///< geodesic neighbour count; 0 = default

  /// Throws ParameterError on malformed text.
  static DomainSpec parse(std::string_view text);
  /// Canonical "shape:a,b,..." form; parse(to_string()) gives back an equal DomainSpec.
  std::string to_string() const;
  Domain build() const;
};

MetricKind parse_metric(std::string_view text);
const char* to_string(MetricKind metric) noexcept;

/// Writes to a temporary sibling and renames it over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

/// Formats with up to 17 significant digits, independent of the locale.
std::string format_number(double x);

std::string eigenpair_json(const DomainSpec& spec, const Domain& domain,
                           const EigenPair& pair, double weak_residual);
/// Columns x (and y in 2D), u.
std::string eigenfunction_csv(const Domain& domain, const EigenPair& pair);

struct StoredEigenPair {
  DomainSpec spec;
  EigenPair pair;
};
/// Reads the JSON written by eigenpair_json. Throws ParameterError.
StoredEigenPair parse_eigenpair_json(std::string_view text);

std::string sweep_json(const DomainSpec& spec, const SweepResult& result);
/// Columns param, N, lambda, scaled, reference, rel_error.
std::string sweep_csv(const SweepResult& result);
/// Line plot of scaled against param with the reference as a horizontal rule.
std::string sweep_svg(const SweepResult& result);

std::string viscosity_json(const DomainSpec& spec, const ViscosityReport& report);
/// Columns node, x (and y in 2D), u, class, residual.
std::string viscosity_csv(const Domain& domain, std::span<const double> u,
                          const ViscosityReport& report);

}  // namespace fracneu
