// ellwb: batch verification runner.
//
// Exit status: 0 all checks pass, 1 a check failed, 2 usage or configuration
// error, 3 numerical failure (the report is still written).

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "ellwb/pipelines.hpp"
#include "json.hpp"

using namespace ellwb;
using nlohmann::ordered_json;

namespace {

// "re" or "re,im"
cplx parse_complex(const std::string& field, const std::string& text) {
  std::istringstream in(text);
  double re = 0, im = 0;
  char comma = 0;
  in >> re;
  if (in.fail()) throw ConfigError(field, "expected 're' or 're,im', got '" + text + "'");
  if (in >> comma) {
    if (comma != ',' || !(in >> im)) throw ConfigError(field, "expected 're' or 're,im', got '" + text + "'");
    std::string rest;
    if (in >> rest) throw ConfigError(field, "trailing characters in '" + text + "'");
  }
  return {re, im};
}

ordered_json to_json(cplx c) { return ordered_json::array({c.real(), c.imag()}); }

ordered_json config_json(const RunConfig& c) {
  ordered_json j;
  j["command"] = c.command;
  j["tau"] = to_json(c.tau);
  j["seed"] = c.seed;
  j["tol"] = c.tol;
  j["samples"] = c.samples;
  j["nu"] = ordered_json::array();
  for (cplx x : c.nu) j["nu"].push_back(to_json(x));
  j["S"] = ordered_json::array();
  for (cplx x : c.S) j["S"].push_back(to_json(x));
  j["nu_tilde"] = ordered_json::array();
  for (cplx x : c.nu_tilde) j["nu_tilde"].push_back(to_json(x));
  j["u"] = to_json(c.u);
  j["v"] = to_json(c.v);
  j["kappa"] = to_json(c.kappa);
  j["hbar"] = to_json(c.hbar);
  j["sites"] = c.sites;
  j["flow"] = c.flow;
  j["s_end"] = c.s_end;
  j["direction"] = to_json(c.direction);
  return j;
}

std::string sci(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

std::string render(const RunConfig& c, const PipelineReport* r, const std::string& error, const std::string& format,
                   std::optional<double> seconds) {
  if (format == "csv") {
    std::string out = "check,description,residual,tolerance,negative_control,pass\n";
    if (r)
      for (const CheckResult& k : r->checks)
        out += csv_field(k.name) + "," + csv_field(k.description) + "," + sci(k.residual) + "," + sci(k.tolerance) +
               "," + (k.negative ? "1" : "0") + "," + (k.pass ? "1" : "0") + "\n";
    if (!error.empty()) out += "error," + csv_field(error) + ",,,,0\n";
    return out;
  }
  ordered_json j;
  j["command"] = c.command;
  j["config"] = config_json(c);
  j["checks"] = ordered_json::array();
  if (r)
    for (const CheckResult& k : r->checks) {
      ordered_json e;
      e["name"] = k.name;
      e["description"] = k.description;
      e["residual"] = k.residual;
      e["tolerance"] = k.tolerance;
      e["negative_control"] = k.negative;
      e["pass"] = k.pass;
      e["worst_point"] = ordered_json::array();
      for (cplx p : k.worst_point) e["worst_point"].push_back(to_json(p));
      j["checks"].push_back(e);
    }
  if (!error.empty()) j["error"] = error;
  if (seconds) j["seconds"] = *seconds;
  j["pass"] = r && error.empty() && r->pass();
  return j.dump(2) + "\n";
}

std::string render_table(const DataTable& t) {
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + t.columns[i];
  out += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + sci(row[i]);
    out += "\n";
  }
  return out;
}

void write_to(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("out", "cannot open '" + path + "' for writing");
  f << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Elliptic integrable systems verification runner"};
  app.set_config("--config", "", "TOML or INI file with the same keys as the long options");

  RunConfig c;
  std::string out = "-", format = "json", trajectory;
  double tau_re = c.tau.real(), tau_im = c.tau.imag(), hbar_re = c.hbar.real(), hbar_im = c.hbar.imag();
  double tol = -1;
  bool with_timing = false;
  std::array<std::string, 4> nu;
  std::array<std::string, 3> S, nt;
  std::string kappa, u, v, direction;

  app.add_option("--command", c.command, "identities | integrate | lax-check | hecke-map | poisson-check | "
                                         "reflection-check | chain-check | crosscheck-pvi");
  app.add_option("--tau-re", tau_re, "Re tau");
  app.add_option("--tau-im", tau_im, "Im tau (> 0)");
  app.add_option("--seed", c.seed, "seed for all sampling");
  app.add_option("--tol", tol, "override the command's tolerances (> 0)");
  app.add_option("--samples", c.samples, "samples per case (identities, lax-check)");
  app.add_option("--out", out, "report path, '-' for stdout");
  app.add_option("--format", format, "report format")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--trajectory", trajectory, "CSV path for the trajectory (integrate, crosscheck-pvi)");
  for (int a = 0; a < 4; ++a) app.add_option("--nu" + std::to_string(a), nu[a], "CI coupling nu_a, 're' or 're,im'");
  for (int a = 0; a < 3; ++a) {
    app.add_option("--s" + std::to_string(a + 1), S[a], "initial gyrostat spin S_a");
    app.add_option("--nt" + std::to_string(a + 1), nt[a], "gyrostat constant nu~_a");
  }
  app.add_option("--kappa", kappa, "isomonodromic level");
  app.add_option("--u", u, "initial position (integrate, crosscheck-pvi)");
  app.add_option("--v", v, "initial momentum (integrate, crosscheck-pvi)");
  app.add_option("--direction", direction, "tau path direction of isomonodromic flows");
  app.add_option("--sites", c.sites, "largest chain length (chain-check)");
  app.add_option("--hbar-re", hbar_re, "Re hbar");
  app.add_option("--hbar-im", hbar_im, "Im hbar");
  app.add_option("--flow", c.flow, "ZVG | NAZVG | CI | EPVI (integrate)");
  app.add_option("--s-end", c.s_end, "path length in units of |direction|");
  app.add_flag("--with-timing", with_timing, "add wall-clock seconds to the report (breaks byte-identity)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    c.tau = {tau_re, tau_im};
    c.hbar = {hbar_re, hbar_im};
    if (app.count("--tol")) {
      if (!(tol > 0)) throw ConfigError("tol", "tolerance must be positive");
      c.tol = tol;
    }
    for (int a = 0; a < 4; ++a)
      if (!nu[a].empty()) c.nu[a] = parse_complex("nu" + std::to_string(a), nu[a]);
    for (int a = 0; a < 3; ++a) {
      if (!S[a].empty()) c.S[a] = parse_complex("s" + std::to_string(a + 1), S[a]);
      if (!nt[a].empty()) c.nu_tilde[a] = parse_complex("nt" + std::to_string(a + 1), nt[a]);
    }
    if (!kappa.empty()) c.kappa = parse_complex("kappa", kappa);
    if (!u.empty()) c.u = parse_complex("u", u);
    if (!v.empty()) c.v = parse_complex("v", v);
    if (!direction.empty()) c.direction = parse_complex("direction", direction);
    validate(c);
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }

  const auto start = std::chrono::steady_clock::now();
  std::optional<PipelineReport> report;
  std::string error;
  try {
    report = run_pipeline(c);
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    error = e.what();
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cerr << c.command << ": " << seconds << " s\n";

  try {
    write_to(out, render(c, report ? &*report : nullptr, error, format,
                         with_timing ? std::optional<double>(seconds) : std::nullopt));
    if (!trajectory.empty() && report && report->trajectory) write_to(trajectory, render_table(*report->trajectory));
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }
  if (!error.empty()) {
    std::cerr << "numerical failure: " << error << "\n";
    return 3;
  }
  return report->pass() ? 0 : 1;
}
