#pragma once
// Batch verification pipelines shared by the command-line tool and the
// acceptance driver.  Every pipeline is a pure function of its configuration:
// all sampling is seeded, and reports carry no timing.

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ellwb/elliptic.hpp"

namespace ellwb {

struct CheckResult {
  std::string name;
  std::string description;
  double residual = 0;
  double tolerance = 0;
  bool negative = false;  // a control that must fail: passes iff residual >= tolerance
  bool pass = false;
  std::vector<cplx> worst_point;
};

CheckResult make_check(std::string name, std::string description, double residual, double tolerance,
                       std::vector<cplx> worst_point = {});
CheckResult make_control(std::string name, std::string description, double residual, double threshold);

// Real-valued table; complex quantities occupy (re, im) column pairs.
struct DataTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct PipelineReport {
  std::string command;
  std::vector<CheckResult> checks;
  std::optional<DataTable> trajectory;
  bool pass() const;
};

class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& field, const std::string& msg)
      : std::invalid_argument(field + ": " + msg), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct RunConfig {
  std::string command = "identities";
  cplx tau{0.2, 1.0};
  std::uint64_t seed = 42;
  double tol = 0;  // 0: the command's own tolerances
  int samples = 0;  // 0: the command's default sample count
  std::array<cplx, 4> nu{cplx(0.3, 0.1), cplx(0.25, -0.2), cplx(-0.4, 0.15), cplx(0.35, 0.3)};
  std::array<cplx, 3> S{cplx(0.3, 0.2), cplx(-0.5, 0.1), cplx(0.7, -0.4)};
  std::array<cplx, 3> nu_tilde{cplx(0.25, -0.1), cplx(0.4, 0.3), cplx(-0.3, 0.2)};
  cplx u{0.21, 0.17}, v{0.3, -0.2};
  cplx kappa = 1.0;
  cplx hbar{0.17, 0.05};
  int sites = 2;
  std::string flow = "ZVG";
  double s_end = 1.0;
  cplx direction{0.1, 0.05};  // tau path direction for isomonodromic flows
};

const std::vector<std::string>& pipeline_commands();
// ConfigError naming the offending field.
void validate(const RunConfig& c);
PipelineReport run_pipeline(const RunConfig& c);

// ---------------------------------------------------------------------------
// Individual pipelines with explicit tolerances.

// Adaptive theta evaluator against the fixed-window series on a 200-point grid.
CheckResult oracle_gate(double tol = 1e-12);

PipelineReport identities_pipeline(std::uint64_t seed, int samples, double tol, const std::vector<cplx>& taus);

struct LaxTolerances {
  double autonomous = 1e-9;
  double isomonodromic = 1e-8;
};
PipelineReport lax_pipeline(std::uint64_t seed, int samples, cplx kappa, const LaxTolerances& tol = {});

struct ConservationTolerances {
  double hamiltonian = 1e-8;  // H and tr L^2(z0)
  double casimir = 1e-10;
};
PipelineReport conservation_pipeline(const ConservationTolerances& tol = {}, double s_end = 1.0);

// Single flow from explicit data, with a trajectory table.
PipelineReport integrate_pipeline(const RunConfig& c);

PipelineReport pvi_pipeline(const std::array<cplx, 4>& nu, cplx u0, cplx v0, cplx tau0, cplx direction,
                            double s_end, double tol = 1e-5);

struct HeckeTolerances {
  double autonomous = 1e-6;
  double isomonodromic = 1e-5;
};
PipelineReport hecke_pipeline(const std::array<cplx, 4>& nu, cplx tau, const HeckeTolerances& tol = {});

struct PoissonTolerances {
  double jacobi = 1e-10;
  double casimir = 1e-10;
  double reflection = 1e-9;
  double bihamiltonian = 1e-10;
  double pencil = 1e-10;
};
PipelineReport poisson_pipeline(std::uint64_t seed, cplx tau, const PoissonTolerances& tol = {});

struct ReflectionTolerances {
  double reflection = 1e-9;
  double central = 1e-9;
  double determinant = 1e-8;
  double classical_limit = 1e-6;
};
PipelineReport reflection_pipeline(std::uint64_t seed, cplx tau, cplx hbar, const std::array<cplx, 3>& nu_tilde,
                                   const ReflectionTolerances& tol = {});

struct ChainTolerances {
  double commutativity = 1e-7;
  double hamiltonian = 1e-6;
  double control_ratio = 1e3;
};
PipelineReport chain_pipeline(std::uint64_t seed, cplx tau, int max_sites, const ChainTolerances& tol = {});

}  // namespace ellwb
