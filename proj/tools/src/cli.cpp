#include "destripe_cli/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include "destripe/fourier_filter.hpp"
#include "destripe/gabor.hpp"
#include "destripe/gsr.hpp"
#include "destripe/image_io.hpp"
#include "destripe/metrics.hpp"
#include "destripe/parallel.hpp"
#include "destripe/synth.hpp"
#include "destripe/vsnr.hpp"

namespace destripe::cli {
namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Report = std::vector<std::pair<std::string, std::string>>;

const std::map<std::string, NormalizeMode> kNormalizeModes{
    {"auto", NormalizeMode::Auto},
    {"bitdepth", NormalizeMode::BitDepth},
    {"minmax", NormalizeMode::MinMax},
    {"identity", NormalizeMode::Identity},
};

const std::map<std::string, Dimensionality> kDimensionality{
    {"auto", Dimensionality::Auto},
    {"2d", Dimensionality::TwoD},
    {"3d", Dimensionality::ThreeD},
};

const std::vector<std::string> kMethods{"gsr", "gsr-oblique", "vsnr", "fourier"};

std::string join_numbers(const std::vector<double>& values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) s += ' ';
    s += format_number(values[i]);
  }
  return s;
}

void print_report(std::ostream& out, const Report& report) {
  for (const auto& [k, v] : report) out << k << '=' << v << '\n';
}

// Config files: flat `key = value` lines (keys are long option names without
// dashes), optionally inside one section named after the subcommand or,
// for `destripe`, after a method. Values from the file only fill options that
// were not given on the command line.
struct ConfigEntry {
  std::string section;
  std::string key;
  std::vector<std::string> values;
};

std::vector<ConfigEntry> load_config(const std::string& path) {
  if (!fs::exists(path)) throw UsageError("config file not found: " + path);
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigINI().from_file(path);
  } catch (const CLI::Error& e) {
    throw UsageError(path + ": " + e.what());
  }
  std::vector<ConfigEntry> entries;
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;  // section markers
    std::string section;
    for (const auto& p : item.parents) section += section.empty() ? p : "." + p;
    entries.push_back({section, item.name, item.inputs});
  }
  return entries;
}

void apply_entry(CLI::App& app, const ConfigEntry& entry, const std::string& path) {
  if (entry.key == "config") throw UsageError(path + ": config files cannot include other config files");
  CLI::Option* opt = app.get_option_no_throw("--" + entry.key);
  if (opt == nullptr) throw UsageError(path + ": unknown key '" + entry.key + "'");
  if (opt->count() > 0) return;  // command line wins
  try {
    opt->add_result(entry.values);
    opt->run_callback();
  } catch (const CLI::Error& e) {
    throw UsageError(path + ": " + e.what());
  }
}

// -------------------------------------------------------------------------
// destripe

struct DestripeArgs {
  std::string input;
  std::string output;
  std::string stripes_output;
  std::string report_path;
  std::string method = "gsr";
  double mu1 = 1.0 / 3.0;
  double mu2 = 1.0 / 300.0;
  double rho_z = 1.0;
  std::string dim = "auto";
  std::vector<double> theta;
  double sigma = 12.0;
  double sigma_a = 0.3;
  std::size_t n_dir = 8;
  double alpha1 = 3.0;
  double alpha2 = 5.0;
  double alpha3 = 10.0;
  double epsilon = 1e-2;
  std::size_t iters = 25000;
  double tol = 0.0;
  std::uint64_t seed = 0;
  std::string reference;
  bool metrics = false;
  std::string sweep;
  bool float_out = false;
  bool unclipped = false;
  int bits = 16;
  std::string normalize = "auto";
  std::string config;
};

// Options that only make sense for some methods.
const std::map<std::string, std::set<std::string>> kMethodOptions{
    {"mu1", {"gsr", "gsr-oblique"}},     {"mu2", {"gsr", "gsr-oblique"}},
    {"rho-z", {"gsr", "gsr-oblique"}},   {"dim", {"gsr", "gsr-oblique"}},
    {"sweep", {"gsr", "gsr-oblique"}},   {"sigma", {"fourier"}},
    {"sigma-a", {"fourier"}},            {"n-dir", {"fourier"}},
    {"alpha1", {"vsnr"}},                {"alpha2", {"vsnr"}},
    {"alpha3", {"vsnr"}},                {"epsilon", {"vsnr"}},
    {"iters", {"gsr", "gsr-oblique", "vsnr"}}, {"tol", {"gsr", "gsr-oblique", "vsnr"}},
};

void register_destripe(CLI::App& sub, DestripeArgs& a) {
  sub.add_option("input", a.input, "Input image (.tif, .png, .raw)")->required()->check(CLI::ExistingFile);
  sub.add_option("-o,--output", a.output, "Clean image output path");
  sub.add_option("--stripes-out", a.stripes_output, "Stripe field output path (default <output>_stripes)");
  sub.add_option("--report", a.report_path, "Also write the run report to this file");
  sub.add_option("--method", a.method, "Destriping method")->check(CLI::IsMember(kMethods));
  sub.add_option("--mu1", a.mu1, "GSR smoothness weight")->check(CLI::PositiveNumber);
  sub.add_option("--mu2", a.mu2, "GSR stripe-mass weight")->check(CLI::PositiveNumber);
  sub.add_option("--rho-z", a.rho_z, "Weight of the z difference in 3D total variation")->check(CLI::Range(0.0, 1.0));
  sub.add_option("--dim", a.dim, "Total variation dimensionality")->check(CLI::IsMember({"auto", "2d", "3d"}));
  sub.add_option("--theta", a.theta, "Stripe direction(s) in radians (pi/2 = y axis)");
  sub.add_option("--sigma", a.sigma, "Fourier notch width (bins)")->check(CLI::NonNegativeNumber);
  sub.add_option("--sigma-a", a.sigma_a, "Fourier angular fall-off (radians)")->check(CLI::PositiveNumber);
  sub.add_option("--n-dir", a.n_dir, "Number of Fourier wedges")->check(CLI::Range(1, 1024));
  sub.add_option("--alpha1", a.alpha1, "VSNR weight, short pattern")->check(CLI::PositiveNumber);
  sub.add_option("--alpha2", a.alpha2, "VSNR weight, medium pattern")->check(CLI::PositiveNumber);
  sub.add_option("--alpha3", a.alpha3, "VSNR weight, long pattern")->check(CLI::PositiveNumber);
  sub.add_option("--epsilon", a.epsilon, "VSNR Huber threshold")->check(CLI::PositiveNumber);
  sub.add_option("--iters", a.iters, "Solver iterations");
  sub.add_option("--tol", a.tol, "Relative-change early stop (0 disables)")->check(CLI::NonNegativeNumber);
  sub.add_option("--seed", a.seed, "Run seed (recorded in the report)");
  sub.add_option("--reference", a.reference, "Clean reference for PSNR and MS-SSIM")->check(CLI::ExistingFile);
  sub.add_flag("--metrics", a.metrics, "Append quality metrics to the report");
  sub.add_option("--sweep", a.sweep, "Grid search mu1=a:b:n,mu2=c:d:m (prints a metric table)");
  sub.add_flag("--float", a.float_out, "Write 32-bit float images");
  sub.add_flag("--unclipped", a.unclipped, "With --float: write values without clipping or shifting");
  sub.add_option("--bits", a.bits, "Integer output depth")->check(CLI::IsMember({8, 16}));
  sub.add_option("--normalize", a.normalize, "Input normalisation")
      ->check(CLI::IsMember({"auto", "bitdepth", "minmax", "identity"}));
  sub.add_option("--config", a.config, "key = value config file (flags take precedence)");
}

void apply_destripe_config(CLI::App& sub, DestripeArgs& a) {
  if (a.config.empty()) return;
  const auto entries = load_config(a.config);
  std::set<std::string> method_sections;
  for (const auto& e : entries) {
    if (e.section.empty() || e.section == "destripe") continue;
    if (std::find(kMethods.begin(), kMethods.end(), e.section) == kMethods.end()) {
      throw UsageError(a.config + ": unknown section [" + e.section + "]");
    }
    method_sections.insert(e.section);
  }
  CLI::Option* method_opt = sub.get_option("--method");
  if (method_opt->count() == 0) {
    for (const auto& e : entries) {
      if ((e.section.empty() || e.section == "destripe") && e.key == "method") apply_entry(sub, e, a.config);
    }
    if (method_opt->count() == 0 && method_sections.size() == 1) {
      apply_entry(sub, {"", "method", {*method_sections.begin()}}, a.config);
    }
  }
  for (const auto& e : entries) {
    if (e.key == "method") continue;
    if (e.section.empty() || e.section == "destripe" || e.section == a.method) apply_entry(sub, e, a.config);
  }
}

std::vector<double> grid(double lo, double hi, std::size_t n) {
  if (n == 1) return {lo};
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

struct SweepGrid {
  std::vector<double> mu1;
  std::vector<double> mu2;
};

SweepGrid parse_sweep(const std::string& text, double mu1, double mu2) {
  SweepGrid g{{mu1}, {mu2}};
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    const auto eq = part.find('=');
    if (eq == std::string::npos) throw UsageError("--sweep: expected name=lo:hi:n, got '" + part + "'");
    const std::string name = part.substr(0, eq);
    std::stringstream rs(part.substr(eq + 1));
    std::string lo_s;
    std::string hi_s;
    std::string n_s;
    if (!std::getline(rs, lo_s, ':') || !std::getline(rs, hi_s, ':') || !std::getline(rs, n_s)) {
      throw UsageError("--sweep: expected name=lo:hi:n, got '" + part + "'");
    }
    double lo = 0.0;
    double hi = 0.0;
    long n = 0;
    try {
      std::size_t used = 0;
      lo = std::stod(lo_s, &used);
      if (used != lo_s.size()) throw std::invalid_argument(lo_s);
      hi = std::stod(hi_s, &used);
      if (used != hi_s.size()) throw std::invalid_argument(hi_s);
      n = std::stol(n_s, &used);
      if (used != n_s.size()) throw std::invalid_argument(n_s);
    } catch (const std::exception&) {
      throw UsageError("--sweep: malformed range '" + part + "'");
    }
    if (n < 1 || !(lo > 0.0) || !(hi > 0.0)) throw UsageError("--sweep: needs positive bounds and n >= 1 in '" + part + "'");
    if (name == "mu1") {
      g.mu1 = grid(lo, hi, static_cast<std::size_t>(n));
    } else if (name == "mu2") {
      g.mu2 = grid(lo, hi, static_cast<std::size_t>(n));
    } else {
      throw UsageError("--sweep: unknown parameter '" + name + "' (expected mu1 or mu2)");
    }
  }
  return g;
}

fs::path default_stripes_path(const fs::path& output) {
  fs::path p = output;
  p.replace_filename(output.stem().string() + "_stripes" + output.extension().string());
  return p;
}

ExportOptions export_options(const DestripeArgs& a, FieldKind kind, const std::string& description) {
  ExportOptions o;
  o.sample = a.float_out ? SampleFormat::Float32 : (a.bits == 8 ? SampleFormat::UInt8 : SampleFormat::UInt16);
  o.unclipped_float = a.unclipped;
  o.kind = kind;
  o.description = description;
  return o;
}

GsrParams gsr_params(const DestripeArgs& a) {
  GsrParams p;
  p.mu1 = a.mu1;
  p.mu2 = a.mu2;
  p.rho_z = a.rho_z;
  p.dimensionality = kDimensionality.at(a.dim);
  if (a.method == "gsr") {
    if (a.theta.size() > 1) throw UsageError("method gsr takes one --theta; use gsr-oblique for several");
    p.directions = {a.theta.empty() ? StripeDirection::vertical() : StripeDirection(a.theta.front())};
  } else {
    if (a.theta.empty()) throw UsageError("method gsr-oblique needs at least one --theta");
    p.directions.clear();
    for (double t : a.theta) p.directions.emplace_back(t);
  }
  return p;
}

StripeDirection single_direction(const DestripeArgs& a) {
  if (a.theta.size() > 1) throw UsageError("method " + a.method + " takes a single --theta");
  return a.theta.empty() ? StripeDirection::vertical() : StripeDirection(a.theta.front());
}

void add_solve_report(Report& r, const SolveReport& s) {
  r.emplace_back("iterations", std::to_string(s.iterations));
  r.emplace_back("initial_objective", format_number(s.initial_objective));
  r.emplace_back("final_objective", format_number(s.final_objective));
  r.emplace_back("tau", format_number(s.tau));
  r.emplace_back("sigma", format_number(s.sigma));
  r.emplace_back("operator_norm", format_number(s.operator_norm));
  r.emplace_back("constraint_residual", format_number(s.constraint_residual));
  r.emplace_back("stopped_early", s.stopped_early ? "true" : "false");
  r.emplace_back("fell_back_to_input", s.fell_back_to_input ? "true" : "false");
  r.emplace_back("wall_time_seconds", format_number(s.wall_time_seconds));
}

void add_metric_report(Report& r, const MetricReport& m) {
  std::stringstream ss(to_key_value(m));
  std::string line;
  while (std::getline(ss, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) r.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
}

int run_sweep(const DestripeArgs& a, const Volume& u0, const Volume* reference, std::ostream& out) {
  const SweepGrid g = parse_sweep(a.sweep, a.mu1, a.mu2);
  struct Cell {
    double mu1, mu2;
    MetricReport metrics;
    double objective;
  };
  std::vector<Cell> cells;
  for (double m1 : g.mu1) {
    for (double m2 : g.mu2) cells.push_back({m1, m2, {}, 0.0});
  }
  const GsrParams base = gsr_params(a);
  SolverSettings settings;
  settings.max_iters = a.iters;
  settings.tolerance = a.tol;
  CurtainingParams cp;
  cp.direction = base.directions.front();
  parallel_for(cells.size(), [&](std::size_t i) {
    GsrParams p = base;
    p.mu1 = cells[i].mu1;
    p.mu2 = cells[i].mu2;
    const auto [dec, rep] = solve_gsr(u0, p, settings);
    cells[i].metrics = evaluate(dec.clean, reference, cp);
    cells[i].objective = rep.final_objective;
  });
  std::ostringstream table;
  table << "mu1,mu2," << csv_header() << ",final_objective\n";
  for (const auto& c : cells) {
    table << format_number(c.mu1) << ',' << format_number(c.mu2) << ',' << to_csv_row(c.metrics) << ','
          << format_number(c.objective) << '\n';
  }
  out << table.str();
  if (!a.output.empty()) {
    std::ofstream f(a.output, std::ios::trunc);
    f << table.str();
    if (!f) throw Error(a.output + ": cannot write sweep table");
  }
  return kSuccess;
}

int run_destripe(CLI::App& sub, DestripeArgs& a, std::ostream& out) {
  apply_destripe_config(sub, a);
  for (const auto& [name, methods] : kMethodOptions) {
    if (sub.get_option("--" + name)->count() > 0 && !methods.contains(a.method)) {
      throw UsageError("option --" + name + " does not apply to method " + a.method);
    }
  }
  if (a.unclipped && !a.float_out) throw UsageError("--unclipped requires --float");
  if (a.sweep.empty() && a.output.empty()) throw UsageError("an output path (-o) is required");

  // Parameter domains are checked before any file is read.
  GsrParams gp;
  VsnrParams vp;
  FourierFilterParams fp;
  try {
    if (a.method == "gsr" || a.method == "gsr-oblique") {
      gp = gsr_params(a);
      gp.validate();
    } else if (a.method == "vsnr") {
      vp.alphas = {a.alpha1, a.alpha2, a.alpha3};
      vp.epsilon = a.epsilon;
      vp.max_iters = a.iters;
      vp.tolerance = a.tol;
      vp.validate(3);
    } else {
      fp.sigma = a.sigma;
      fp.sigma_a = a.sigma_a;
      fp.n_dir = a.n_dir;
      fp.direction = single_direction(a);
      fp.validate();
    }
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  if (!a.sweep.empty()) (void)parse_sweep(a.sweep, a.mu1, a.mu2);

  const NormalizeMode mode = kNormalizeModes.at(a.normalize);
  const LoadedImage input = read_image(a.input, mode);
  std::optional<LoadedImage> reference;
  if (!a.reference.empty()) reference = read_image(a.reference, mode);
  const Volume* ref = reference ? &reference->volume : nullptr;

  if (!a.sweep.empty()) return run_sweep(a, input.volume, ref, out);

  Report report;
  report.emplace_back("method", a.method);
  report.emplace_back("input", a.input);
  report.emplace_back("dims", to_string(input.volume.dims()));
  report.emplace_back("seed", std::to_string(a.seed));
  std::string params;
  StripeDecomposition result;
  StripeDirection metric_direction = StripeDirection::vertical();

  if (a.method == "gsr" || a.method == "gsr-oblique") {
    SolverSettings s;
    s.max_iters = a.iters;
    s.tolerance = a.tol;
    std::vector<double> thetas;
    for (const auto& d : gp.directions) thetas.push_back(d.radians());
    params = "mu1=" + format_number(gp.mu1) + " mu2=" + format_number(gp.mu2) + " rho_z=" + format_number(gp.rho_z) +
             " theta=" + join_numbers(thetas);
    report.emplace_back("mu1", format_number(gp.mu1));
    report.emplace_back("mu2", format_number(gp.mu2));
    report.emplace_back("rho_z", format_number(gp.rho_z));
    report.emplace_back("theta", join_numbers(thetas));
    metric_direction = gp.directions.front();
    auto [dec, rep] = a.method == "gsr" ? solve_gsr(input.volume, gp, s) : solve_gsr_oblique(input.volume, gp, s);
    result = std::move(dec);
    add_solve_report(report, rep);
  } else if (a.method == "vsnr") {
    const StripeDirection dir = single_direction(a);
    const auto patterns = make_gabor_patterns(dir);
    params = "alpha=" + join_numbers(vp.alphas) + " epsilon=" + format_number(vp.epsilon) +
             " theta=" + format_number(dir.radians());
    report.emplace_back("alphas", join_numbers(vp.alphas));
    report.emplace_back("epsilon", format_number(vp.epsilon));
    report.emplace_back("theta", format_number(dir.radians()));
    metric_direction = dir;
    auto res = solve_vsnr(input.volume, patterns, vp);
    result = std::move(res.decomposition);
    add_solve_report(report, res.report);
  } else {
    params = "sigma=" + format_number(fp.sigma) + " sigma_a=" + format_number(fp.sigma_a) +
             " n_dir=" + std::to_string(fp.n_dir) + " theta=" + format_number(fp.direction.radians());
    report.emplace_back("sigma", format_number(fp.sigma));
    report.emplace_back("sigma_a", format_number(fp.sigma_a));
    report.emplace_back("n_dir", std::to_string(fp.n_dir));
    report.emplace_back("theta", format_number(fp.direction.radians()));
    metric_direction = fp.direction;
    FilterReport fr;
    result = filter_volume(input.volume, fp, &fr);
    report.emplace_back("max_imag_residue", format_number(fr.max_imag_residue));
  }

  const fs::path clean_path = a.output;
  const fs::path stripes_path = a.stripes_output.empty() ? default_stripes_path(clean_path) : fs::path(a.stripes_output);
  const std::string description = "destripe method=" + a.method + " " + params;
  write_image(result.clean, clean_path, export_options(a, FieldKind::Image, description));
  write_image(result.stripes, stripes_path, export_options(a, FieldKind::Stripes, description));
  report.emplace_back("clean_output", clean_path.string());
  report.emplace_back("stripes_output", stripes_path.string());

  if (a.metrics || ref != nullptr) {
    CurtainingParams cp;
    cp.direction = metric_direction;
    add_metric_report(report, evaluate(result.clean, ref, cp));
  }
  print_report(out, report);
  if (!a.report_path.empty()) {
    std::ofstream f(a.report_path, std::ios::trunc);
    print_report(f, report);
    if (!f) throw Error(a.report_path + ": cannot write report");
  }
  return kSuccess;
}

// -------------------------------------------------------------------------
// metrics

struct MetricsArgs {
  std::string image;
  std::string reference;
  double theta = std::numbers::pi / 2;
  double band = 2.0;
  double exclude = 5.0;
  std::string csv;
  std::string normalize = "auto";
};

void register_metrics(CLI::App& sub, MetricsArgs& a) {
  sub.add_option("image", a.image, "Image to score")->required()->check(CLI::ExistingFile);
  sub.add_option("--reference", a.reference, "Clean reference for PSNR and MS-SSIM")->check(CLI::ExistingFile);
  sub.add_option("--theta", a.theta, "Stripe direction in radians for the curtaining score");
  sub.add_option("--band", a.band, "Curtaining band half-width (bins)")->check(CLI::PositiveNumber);
  sub.add_option("--exclude", a.exclude, "Curtaining low-frequency exclusion radius (bins)")
      ->check(CLI::NonNegativeNumber);
  sub.add_option("--csv", a.csv, "Also write the report as a one-row CSV table");
  sub.add_option("--normalize", a.normalize, "Input normalisation")
      ->check(CLI::IsMember({"auto", "bitdepth", "minmax", "identity"}));
}

int run_metrics(const MetricsArgs& a, std::ostream& out) {
  const NormalizeMode mode = kNormalizeModes.at(a.normalize);
  const LoadedImage image = read_image(a.image, mode);
  std::optional<LoadedImage> reference;
  if (!a.reference.empty()) reference = read_image(a.reference, mode);
  CurtainingParams cp;
  cp.direction = StripeDirection(a.theta);
  cp.band_halfwidth = a.band;
  cp.exclude_radius = a.exclude;
  const MetricReport m = evaluate(image.volume, reference ? &reference->volume : nullptr, cp);
  out << to_key_value(m);
  if (!a.csv.empty()) {
    std::ofstream f(a.csv, std::ios::trunc);
    f << csv_header() << '\n' << to_csv_row(m) << '\n';
    if (!f) throw Error(a.csv + ": cannot write CSV");
  }
  return kSuccess;
}

// -------------------------------------------------------------------------
// synth

struct SynthArgs {
  PhantomSpec phantom;
  StripeSpec stripes;
  std::string structure = "blobs";
  double theta = std::numbers::pi / 2;
  bool segmented = false;
  bool unipolar = false;
  std::uint64_t seed = 0;
  std::string clean_out;
  std::string striped_out;
  std::string stripes_out;
  bool float_out = false;
  int bits = 16;
  std::string config;
};

void register_synth(CLI::App& sub, SynthArgs& a) {
  auto& p = a.phantom;
  auto& s = a.stripes;
  sub.add_option("--nx", p.dims.nx, "Width")->check(CLI::PositiveNumber);
  sub.add_option("--ny", p.dims.ny, "Height")->check(CLI::PositiveNumber);
  sub.add_option("--nz", p.dims.nz, "Slices")->check(CLI::PositiveNumber);
  sub.add_option("--structure", a.structure, "Phantom content")->check(CLI::IsMember({"spheres", "blobs", "cells"}));
  sub.add_option("--count", p.count, "Number of objects");
  sub.add_option("--radius-min", p.radius_min, "Smallest object radius (pixels)");
  sub.add_option("--radius-max", p.radius_max, "Largest object radius (pixels)");
  sub.add_option("--intensity-min", p.intensity_min, "Smallest object intensity");
  sub.add_option("--intensity-max", p.intensity_max, "Largest object intensity");
  sub.add_option("--background", p.background, "Background level");
  sub.add_option("--blur", p.blur_sigma, "Gaussian smoothing of the phantom (pixels)");
  sub.add_option("--theta", a.theta, "Stripe direction in radians (pi/2 = y axis)");
  sub.add_option("--width-min", s.width_min, "Narrowest stripe (pixels)");
  sub.add_option("--width-max", s.width_max, "Widest stripe (pixels)");
  sub.add_option("--edge-width", s.edge_width, "Edge softness across stripes (pixels)");
  sub.add_flag("--segmented", a.segmented, "Split stripes into segments");
  sub.add_option("--length-min", s.length_min, "Shortest segment (pixels)");
  sub.add_option("--length-max", s.length_max, "Longest segment (pixels)");
  sub.add_option("--amp-min", s.amplitude_min, "Smallest stripe amplitude");
  sub.add_option("--amp-max", s.amplitude_max, "Largest stripe amplitude");
  sub.add_flag("--unipolar", a.unipolar, "Positive stripes only");
  sub.add_option("--density", s.density, "Expected covered fraction");
  sub.add_option("--depth-min", s.depth_min, "Fewest slices sharing a stripe layout");
  sub.add_option("--depth-max", s.depth_max, "Most slices sharing a stripe layout");
  sub.add_option("--seed", a.seed, "Generator seed");
  sub.add_option("-o,--clean", a.clean_out, "Clean phantom output path")->required();
  sub.add_option("--striped", a.striped_out, "Corrupted image output path")->required();
  sub.add_option("--stripes-out", a.stripes_out, "Stripe field output path");
  sub.add_flag("--float", a.float_out, "Write 32-bit float images");
  sub.add_option("--bits", a.bits, "Integer output depth")->check(CLI::IsMember({8, 16}));
  sub.add_option("--config", a.config, "key = value config file (flags take precedence)");
}

// Stripe layouts use a seed stream separate from the phantom's.
std::uint64_t stripe_seed(std::uint64_t seed) { return seed ^ 0x9e3779b97f4a7c15ULL; }

int run_synth(CLI::App& sub, SynthArgs& a, std::ostream& out) {
  if (!a.config.empty()) {
    for (const auto& e : load_config(a.config)) {
      if (!e.section.empty() && e.section != "synth") throw UsageError(a.config + ": unknown section [" + e.section + "]");
      apply_entry(sub, e, a.config);
    }
  }
  a.phantom.structure = phantom_structure_from_string(a.structure);
  a.stripes.direction = StripeDirection(a.theta);
  a.stripes.full_length = !a.segmented;
  a.stripes.bipolar = !a.unipolar;
  try {
    a.phantom.validate();
    a.stripes.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }

  const Volume clean = make_phantom(a.phantom, a.seed);
  const Volume stripes = make_stripes(a.stripes, a.phantom.dims, stripe_seed(a.seed));
  const CorruptedImage corrupted = corrupt(clean, stripes);

  const auto& p = a.phantom;
  const auto& s = a.stripes;
  Report r{
      {"rng", kSynthRng},
      {"seed", std::to_string(a.seed)},
      {"dims", to_string(p.dims)},
      {"structure", to_string(p.structure)},
      {"count", std::to_string(p.count)},
      {"radius", format_number(p.radius_min) + ":" + format_number(p.radius_max)},
      {"intensity", format_number(p.intensity_min) + ":" + format_number(p.intensity_max)},
      {"background", format_number(p.background)},
      {"blur", format_number(p.blur_sigma)},
      {"theta", format_number(s.direction.radians())},
      {"width", format_number(s.width_min) + ":" + format_number(s.width_max)},
      {"edge_width", format_number(s.edge_width)},
      {"segmented", s.full_length ? "false" : "true"},
      {"length", format_number(s.length_min) + ":" + format_number(s.length_max)},
      {"amplitude", format_number(s.amplitude_min) + ":" + format_number(s.amplitude_max)},
      {"bipolar", s.bipolar ? "true" : "false"},
      {"density", format_number(s.density)},
      {"depth", std::to_string(s.depth_min) + ":" + std::to_string(s.depth_max)},
      {"clamped_fraction", format_number(corrupted.clamped_fraction)},
      {"exact_ground_truth", corrupted.clamped_fraction == 0.0 ? "true" : "false"},
      {"unsuitable_for_ground_truth", corrupted.unsuitable_for_ground_truth() ? "true" : "false"},
  };
  std::string description;
  for (const auto& [k, v] : r) description += (description.empty() ? "" : " ") + k + "=" + v;

  ExportOptions o;
  o.sample = a.float_out ? SampleFormat::Float32 : (a.bits == 8 ? SampleFormat::UInt8 : SampleFormat::UInt16);
  o.description = "synth clean " + description;
  write_image(clean, a.clean_out, o);
  o.description = "synth striped " + description;
  write_image(corrupted.image, a.striped_out, o);
  if (!a.stripes_out.empty()) {
    o.kind = FieldKind::Stripes;
    o.unclipped_float = a.float_out;
    o.description = "synth stripes " + description;
    write_image(stripes, a.stripes_out, o);
  }
  r.emplace_back("clean_output", a.clean_out);
  r.emplace_back("striped_output", a.striped_out);
  if (!a.stripes_out.empty()) r.emplace_back("stripes_output", a.stripes_out);
  print_report(out, r);
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stripe artifact removal for microscopy images and volumes", "destripe"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "destripe 0.1.0");

  DestripeArgs destripe_args;
  MetricsArgs metrics_args;
  SynthArgs synth_args;
  CLI::App* destripe = app.add_subcommand("destripe", "Remove stripes from an image or volume");
  CLI::App* metrics = app.add_subcommand("metrics", "Score an image (PSNR and MS-SSIM need --reference)");
  CLI::App* synth = app.add_subcommand("synth", "Generate a clean phantom and a striped copy");
  register_destripe(*destripe, destripe_args);
  register_metrics(*metrics, metrics_args);
  register_synth(*synth, synth_args);

  try {
    // CLI11 consumes the vector from the back.
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::CallForVersion&) {
    out << app.version() << '\n';
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    err << "run with --help for usage\n";
    return kUsageError;
  }

  try {
    if (destripe->parsed()) return run_destripe(*destripe, destripe_args, out);
    if (metrics->parsed()) return run_metrics(metrics_args, out);
    return run_synth(*synth, synth_args, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}

}  // namespace destripe::cli
