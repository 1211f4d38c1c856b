#include "spinsq/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "spinsq/dicke.hpp"
#include "spinsq/errors.hpp"
#include "spinsq/interferometer.hpp"
#include "spinsq/metrology.hpp"
#include "spinsq/parallel.hpp"
#include "spinsq/physical.hpp"
#include "spinsq/squeezers.hpp"
#include "spinsq/wigner.hpp"

namespace spinsq {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

SqueezerKind parse_kind(const std::string& s) {
  if (s == "none") return SqueezerKind::none;
  if (s == "interaction") return SqueezerKind::interaction;
  if (s == "measurement") return SqueezerKind::measurement;
  throw DomainError("unknown squeezer kind: " + s);
}

std::string kind_name(SqueezerKind k) {
  switch (k) {
    case SqueezerKind::none: return "none";
    case SqueezerKind::interaction: return "interaction";
    case SqueezerKind::measurement: return "measurement";
  }
  return "?";
}

// "lo:hi:count" log-spaced inclusive.
std::vector<double> parse_chi_range(const std::string& s) {
  double lo = 0.0, hi = 0.0;
  long count = 0;
  char extra = 0;
  if (std::sscanf(s.c_str(), "%lf:%lf:%ld%c", &lo, &hi, &count, &extra) != 3) {
    throw DomainError("--chi-range expects lo:hi:count");
  }
  if (!(lo > 0.0) || !(hi >= lo) || count < 1) {
    throw DomainError("--chi-range requires 0 < lo <= hi and count >= 1");
  }
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  if (count == 1) {
    out.push_back(lo);
    return out;
  }
  double llo = std::log(lo), lhi = std::log(hi);
  for (long i = 0; i < count; ++i) {
    out.push_back(std::exp(llo + (lhi - llo) * i / (count - 1)));
  }
  return out;
}

std::vector<double> resolve_chis(std::vector<double> chis,
                                 const std::string& range) {
  if (!range.empty()) {
    std::vector<double> r = parse_chi_range(range);
    chis.insert(chis.end(), r.begin(), r.end());
  }
  if (chis.empty()) throw DomainError("no chi values given (--chi/--chi-range)");
  for (double c : chis) {
    if (c < 0.0 || !std::isfinite(c)) throw DomainError("chi must be >= 0");
  }
  std::sort(chis.begin(), chis.end());
  chis.erase(std::unique(chis.begin(), chis.end()), chis.end());
  return chis;
}

std::vector<int> resolve_ns(std::vector<int> ns) {
  if (ns.empty()) throw DomainError("no N values given (--n)");
  for (int n : ns) {
    if (n < 1) throw DomainError("N must be >= 1");
  }
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  return ns;
}

// Output sink: file when a path is given, stdout otherwise.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw DomainError("cannot open output file: " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

struct SweepOptions {
  std::vector<int> ns;
  std::vector<double> chis;
  std::string chi_range;
  std::string kind = "interaction";
  std::string out;
  std::string format = "csv";
  int workers = 0;
};

json row_to_json(const MetricsRow& row) {
  return json{{"n", row.n_electrons},
              {"chi", row.chi},
              {"kind", kind_name(row.kind)},
              {"delta_phi_w", row.delta_phi_w},
              {"delta_phi_f", row.delta_phi_f},
              {"xi2", row.xi2},
              {"fisher", row.fisher},
              {"sql", row.sql},
              {"heisenberg", row.heisenberg}};
}

void run_sweep(const SweepOptions& opts) {
  const SqueezerKind kind = parse_kind(opts.kind);
  const std::vector<int> ns = resolve_ns(opts.ns);
  const std::vector<double> chis = resolve_chis(opts.chis, opts.chi_range);

  struct Task {
    int n;
    double chi;
  };
  std::vector<Task> tasks;
  for (int n : ns) {
    for (double chi : chis) tasks.push_back({n, chi});
  }
  std::vector<MetricsRow> rows(tasks.size());
  std::vector<MeasDetail> details(tasks.size());

  const bool single = tasks.size() == 1;
  const int outer = single ? 1 : opts.workers;
  const int inner = single ? opts.workers : 1;
  parallel_for(tasks.size(), outer, [&](std::size_t i) {
    const Task& t = tasks[i];
    switch (kind) {
      case SqueezerKind::none:
        rows[i] = baseline_metrics(t.n);
        rows[i].chi = t.chi;
        break;
      case SqueezerKind::interaction:
        rows[i] = oat_metrics(t.n, t.chi);
        break;
      case SqueezerKind::measurement:
        rows[i] = meas_metrics(t.n, t.chi, &details[i], inner);
        break;
    }
  });

  Sink sink(opts.out);
  std::ostream& os = sink.stream();
  if (opts.format == "csv") {
    os << "N,chi,kind,delta_phi_w,delta_phi_f,xi2,fisher,sql,heisenberg\n";
    for (const MetricsRow& row : rows) {
      os << row.n_electrons << ',' << fmt(row.chi) << ','
         << kind_name(row.kind) << ',' << fmt(row.delta_phi_w) << ','
         << fmt(row.delta_phi_f) << ',' << fmt(row.xi2) << ','
         << fmt(row.fisher) << ',' << fmt(row.sql) << ','
         << fmt(row.heisenberg) << '\n';
    }
  } else {
    json arr = json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      json r = row_to_json(rows[i]);
      if (kind == SqueezerKind::measurement) {
        r["f_avg"] = details[i].f_avg;
        r["delta_phi_f_mean_bound"] = details[i].delta_phi_f_mean_bound;
        r["delta_phi_f_mean_fisher"] = details[i].delta_phi_f_mean_fisher;
        r["jensen_gap"] = details[i].jensen_gap;
        r["quadrature_mass"] = details[i].quadrature_mass;
      }
      arr.push_back(std::move(r));
    }
    os << arr.dump(2) << '\n';
  }
}

struct OptimalOptions {
  std::vector<int> ns;
  std::string kind = "interaction";
  std::string out;
  std::string format = "csv";
  int workers = 0;
};

void run_optimal(const OptimalOptions& opts) {
  const SqueezerKind kind = parse_kind(opts.kind);
  if (kind == SqueezerKind::none) {
    throw DomainError("optimal-chi requires --kind interaction|measurement");
  }
  const std::vector<int> ns = resolve_ns(opts.ns);
  std::vector<OptimumReport> reports(ns.size());
  const bool single = ns.size() == 1;
  const int outer = single ? 1 : opts.workers;
  const int inner = single ? opts.workers : 1;
  parallel_for(ns.size(), outer, [&](std::size_t i) {
    reports[i] = optimize_chi(ns[i], kind, inner);
  });

  Sink sink(opts.out);
  std::ostream& os = sink.stream();
  if (opts.format == "csv") {
    os << "N,kind,chi_opt,delta_phi_w_min,evaluations,bracket_lo,bracket_hi\n";
    for (std::size_t i = 0; i < ns.size(); ++i) {
      const OptimumReport& r = reports[i];
      os << ns[i] << ',' << kind_name(kind) << ',' << fmt(r.chi_opt) << ','
         << fmt(r.delta_phi_w_min) << ',' << r.evaluations << ','
         << fmt(r.bracket[0]) << ',' << fmt(r.bracket[1]) << '\n';
    }
  } else {
    json arr = json::array();
    for (std::size_t i = 0; i < ns.size(); ++i) {
      const OptimumReport& r = reports[i];
      arr.push_back(json{{"n", ns[i]},
                         {"kind", kind_name(kind)},
                         {"chi_opt", r.chi_opt},
                         {"delta_phi_w_min", r.delta_phi_w_min},
                         {"evaluations", r.evaluations},
                         {"bracket_lo", r.bracket[0]},
                         {"bracket_hi", r.bracket[1]}});
    }
    os << arr.dump(2) << '\n';
  }
}

struct WignerOptions {
  int n = 20;
  double chi = 0.0;
  std::string kind = "interaction";
  std::optional<double> h;
  int n_theta = 61;
  int n_phi = 121;
  std::string out;
  std::string format = "csv";
};

void run_wigner(const WignerOptions& opts) {
  const SqueezerKind kind = parse_kind(opts.kind);
  DickeState st = coherent_state(opts.n);
  if (kind == SqueezerKind::interaction && opts.chi > 0.0) {
    st = oat_apply(st, OATConfig{opts.chi});
  } else if (kind == SqueezerKind::measurement && opts.chi > 0.0) {
    if (!opts.h) {
      throw DomainError("wigner with measurement kind requires --h");
    }
    st = kraus_apply(st, MeasConfig{opts.chi}, *opts.h).post_state;
  }
  SphereGrid grid = make_sphere_grid(opts.n_theta, opts.n_phi);
  std::vector<double> field = wigner_function(st, grid);

  Sink sink(opts.out);
  std::ostream& os = sink.stream();
  if (opts.format == "csv") {
    os << "theta,phi_az,w\n";
    for (std::size_t it = 0; it < grid.theta.size(); ++it) {
      for (std::size_t ip = 0; ip < grid.phi_az.size(); ++ip) {
        os << fmt(grid.theta[it]) << ',' << fmt(grid.phi_az[ip]) << ','
           << fmt(field[it * grid.phi_az.size() + ip]) << '\n';
      }
    }
  } else {
    json obj{{"n", opts.n},
             {"chi", opts.chi},
             {"kind", kind_name(kind)},
             {"theta", grid.theta},
             {"phi_az", grid.phi_az},
             {"w", field}};
    if (opts.h) obj["h"] = *opts.h;
    os << obj.dump(2) << '\n';
  }
}

struct MonteCarloOptions {
  int n = 20;
  double chi = 0.0;
  std::string kind = "none";
  double phi = 0.01;
  long long shots = 100000;
  std::uint64_t seed = 12345;
  bool no_align = false;
  std::string out;
  std::string shots_out;
  int workers = 0;
};

void run_montecarlo(const MonteCarloOptions& opts) {
  MZISpec spec;
  spec.n_electrons = opts.n;
  spec.squeezer = {parse_kind(opts.kind), opts.chi};
  spec.true_phase = opts.phi;
  spec.apply_alignment = !opts.no_align;

  std::vector<ShotRecord> records;
  std::vector<ShotRecord>* rec_ptr =
      opts.shots_out.empty() ? nullptr : &records;
  MonteCarloReport rep =
      monte_carlo(spec, opts.shots, opts.seed, opts.workers, rec_ptr);

  if (rec_ptr) {
    Sink shot_sink(opts.shots_out);
    std::ostream& ss = shot_sink.stream();
    ss << "shot_index,h,n_L,n_R,phi_hat\n";
    for (std::size_t i = 0; i < records.size(); ++i) {
      const ShotRecord& r = records[i];
      ss << i << ',' << (r.h ? fmt(*r.h) : std::string()) << ',' << r.n_left
         << ',' << r.n_right << ',' << fmt(r.phi_hat) << '\n';
    }
  }

  json obj{{"n", opts.n},
           {"kind", opts.kind},
           {"chi", opts.chi},
           {"phi", opts.phi},
           {"shots", rep.shots},
           {"seed", opts.seed},
           {"apply_alignment", spec.apply_alignment},
           {"rms_error", rep.rms_error},
           {"bias", rep.bias},
           {"std_error", rep.std_error}};
  Sink sink(opts.out);
  sink.stream() << obj.dump(2) << '\n';
}

struct DesignOptions {
  std::optional<double> energy_kev;
  std::optional<double> d_over_r;
  std::optional<double> current_na;
  std::optional<double> path_m;
  std::optional<double> dose;
  std::optional<double> pixel_angstrom;
  std::optional<double> thickness_nm;
  std::optional<double> mfp_nm;
  std::optional<double> length_m;
  std::optional<double> separation_m;
  std::optional<double> radius_m;
  std::optional<double> coupling_re;
  std::optional<double> coupling_im;
  std::optional<int> n_right;
  std::optional<int> n_left;
  std::string out;
};

void run_design(const DesignOptions& o) {
  json d;
  std::optional<double> capacitance;
  if (o.energy_kev) {
    double beta = beta_from_energy(*o.energy_kev);
    d["beta"] = beta;
    d["velocity_m_s"] = beta * constants::light_speed_m_s;
  }
  if (o.energy_kev && o.d_over_r) {
    d["chi_int"] = chi_int_cylindrical(*o.d_over_r, *o.energy_kev);
  }
  if (o.current_na && o.energy_kev) {
    double spacing = mean_electron_spacing(*o.current_na, *o.energy_kev);
    d["mean_spacing_m"] = spacing;
    double path = o.path_m.value_or(1.0);
    d["pair_coulomb_phase_rad"] =
        pair_coulomb_phase(spacing, path, *o.energy_kev);
    d["path_m"] = path;
  }
  if (o.dose && o.pixel_angstrom) {
    d["batch_size"] = batch_size(*o.dose, *o.pixel_angstrom);
  }
  if (o.thickness_nm && o.mfp_nm) {
    d["inelastic_loss_share"] = inelastic_loss_share(*o.thickness_nm, *o.mfp_nm);
  }
  if (o.length_m && o.separation_m && o.radius_m) {
    ChannelGeometry geom{*o.length_m, *o.separation_m, *o.radius_m};
    capacitance = mutual_capacitance(geom);
    d["capacitance_f"] = *capacitance;
    if (o.energy_kev) {
      d["chi_int_general"] =
          chi_int_general(*o.length_m, *o.energy_kev, *capacitance);
    }
  }
  if (capacitance && o.n_right && o.n_left) {
    d["capacitor_energy_ev"] =
        capacitor_energy_ev(*o.n_right, *o.n_left, *capacitance);
    d["capacitor_voltage_v"] =
        capacitor_voltage_v(*o.n_right, *o.n_left, *capacitance);
  }
  if (o.coupling_re || o.coupling_im) {
    std::complex<double> g(o.coupling_re.value_or(0.0),
                           o.coupling_im.value_or(0.0));
    double chi = chi_from_coupling(g);
    d["chi_meas"] = chi;
    if (o.n_right) d["cavity_amplitude"] = cavity_amplitude(*o.n_right, chi);
  }
  if (d.empty()) {
    throw DomainError(
        "design: no computable quantities; see `design --help` for inputs");
  }
  Sink sink(o.out);
  sink.stream() << d.dump(2) << '\n';
}

void add_output_flags(CLI::App* sub, std::string* out, std::string* format) {
  sub->add_option("--out", *out, "Output file path (default: stdout)");
  if (format) {
    sub->add_option("--format", *format, "Output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{
      "spinsq: spin-squeezed electron interferometry sweeps and design "
      "calculators"};
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "Read defaults from a key=value config file (flags override)");

  SweepOptions sweep_chi, sweep_n;
  for (auto [sub_name, opts, help] :
       {std::make_tuple("sweep-chi", &sweep_chi,
                        "Metrics over a chi grid at fixed N values"),
        std::make_tuple("sweep-n", &sweep_n,
                        "Metrics over N values at fixed chi series")}) {
    CLI::App* sub = app.add_subcommand(sub_name, help);
    sub->add_option("--n", opts->ns, "Electron numbers N")
        ->delimiter(',')
        ->required();
    sub->add_option("--chi", opts->chis, "Squeezing strengths")->delimiter(',');
    sub->add_option("--chi-range", opts->chi_range,
                    "Log-spaced strengths lo:hi:count");
    sub->add_option("--kind", opts->kind,
                    "Squeezer kind: none|interaction|measurement")
        ->check(CLI::IsMember({"none", "interaction", "measurement"}))
        ->capture_default_str();
    sub->add_option("--workers", opts->workers,
                    "Worker threads (0 = SPINSQ_WORKERS env or hardware)");
    add_output_flags(sub, &opts->out, &opts->format);
    sub->callback([opts]() { run_sweep(*opts); });
  }

  OptimalOptions optimal;
  {
    CLI::App* sub = app.add_subcommand(
        "optimal-chi", "Optimal squeezing strength per N (golden section)");
    sub->add_option("--n", optimal.ns, "Electron numbers N")
        ->delimiter(',')
        ->required();
    sub->add_option("--kind", optimal.kind,
                    "Squeezer kind: interaction|measurement")
        ->check(CLI::IsMember({"interaction", "measurement"}))
        ->capture_default_str();
    sub->add_option("--workers", optimal.workers,
                    "Worker threads (0 = SPINSQ_WORKERS env or hardware)");
    add_output_flags(sub, &optimal.out, &optimal.format);
    sub->callback([&optimal]() { run_optimal(optimal); });
  }

  WignerOptions wig;
  double wig_h = 0.0;
  {
    CLI::App* sub = app.add_subcommand(
        "wigner", "Spherical Wigner field of the squeezed state");
    // Free the short -h so the outcome flag --h can exist on this subcommand.
    sub->set_help_flag("--help", "Print this help message and exit");
    sub->add_option("--n", wig.n, "Electron number N (<= 100)")
        ->capture_default_str();
    sub->add_option("--chi", wig.chi, "Squeezing strength")
        ->capture_default_str();
    sub->add_option("--kind", wig.kind,
                    "Squeezer kind: none|interaction|measurement")
        ->check(CLI::IsMember({"none", "interaction", "measurement"}))
        ->capture_default_str();
    CLI::Option* h_opt = sub->add_option(
        "--h", wig_h, "Measurement outcome (measurement kind)");
    sub->add_option("--n-theta", wig.n_theta, "Polar grid points")
        ->capture_default_str();
    sub->add_option("--n-phi", wig.n_phi, "Azimuthal grid points")
        ->capture_default_str();
    add_output_flags(sub, &wig.out, &wig.format);
    sub->callback([&wig, &wig_h, h_opt]() {
      if (h_opt->count() > 0) wig.h = wig_h;
      run_wigner(wig);
    });
  }

  MonteCarloOptions mc;
  {
    CLI::App* sub = app.add_subcommand(
        "montecarlo", "Shot-by-shot phase estimation versus theory");
    sub->add_option("--n", mc.n, "Electron number N")->capture_default_str();
    sub->add_option("--chi", mc.chi, "Squeezing strength")
        ->capture_default_str();
    sub->add_option("--kind", mc.kind,
                    "Squeezer kind: none|interaction|measurement")
        ->check(CLI::IsMember({"none", "interaction", "measurement"}))
        ->capture_default_str();
    sub->add_option("--phi", mc.phi, "True sample phase (rad)")
        ->capture_default_str();
    sub->add_option("--shots", mc.shots, "Number of shots")
        ->capture_default_str();
    sub->add_option("--seed", mc.seed, "RNG seed")->capture_default_str();
    sub->add_flag("--no-align", mc.no_align,
                  "Skip the squeezed-axis alignment rotation");
    sub->add_option("--shots-out", mc.shots_out,
                    "Write per-shot CSV to this path");
    sub->add_option("--workers", mc.workers,
                    "Worker threads (0 = SPINSQ_WORKERS env or hardware)");
    add_output_flags(sub, &mc.out, nullptr);
    sub->callback([&mc]() { run_montecarlo(mc); });
  }

  DesignOptions des;
  struct DesignRaw {
    double energy_kev = 0.0, d_over_r = 0.0, current_na = 0.0, path_m = 0.0;
    double dose = 0.0, pixel_angstrom = 0.0, thickness_nm = 0.0, mfp_nm = 0.0;
    double length_m = 0.0, separation_m = 0.0, radius_m = 0.0;
    double coupling_re = 0.0, coupling_im = 0.0;
    int n_right = 0, n_left = 0;
  } draw;
  std::vector<std::function<void()>> design_binds;
  {
    CLI::App* sub = app.add_subcommand(
        "design", "Physical design calculators (JSON output)");
    auto opt = [sub, &design_binds](const char* name, auto& raw, auto& slot,
                                    const char* help) {
      CLI::Option* o = sub->add_option(name, raw, help);
      design_binds.push_back([o, &raw, &slot]() {
        if (o->count() > 0) slot = raw;
      });
    };
    opt("--energy-kev", draw.energy_kev, des.energy_kev,
        "Beam kinetic energy (keV)");
    opt("--d-over-r", draw.d_over_r, des.d_over_r,
        "Channel separation over radius");
    opt("--current-na", draw.current_na, des.current_na, "Beam current (nA)");
    opt("--path-m", draw.path_m, des.path_m,
        "Propagation path for the pair phase (m)");
    opt("--dose", draw.dose, des.dose,
        "Dose budget (electrons per square angstrom)");
    opt("--pixel-angstrom", draw.pixel_angstrom, des.pixel_angstrom,
        "Pixel size (angstrom)");
    opt("--thickness-nm", draw.thickness_nm, des.thickness_nm,
        "Sample thickness (nm)");
    opt("--mfp-nm", draw.mfp_nm, des.mfp_nm, "Inelastic mean free path (nm)");
    opt("--length-m", draw.length_m, des.length_m, "Channel length (m)");
    opt("--separation-m", draw.separation_m, des.separation_m,
        "Channel separation (m)");
    opt("--radius-m", draw.radius_m, des.radius_m, "Channel radius (m)");
    opt("--coupling-re", draw.coupling_re, des.coupling_re,
        "Electron-photon coupling, real");
    opt("--coupling-im", draw.coupling_im, des.coupling_im,
        "Electron-photon coupling, imag");
    opt("--n-right", draw.n_right, des.n_right,
        "Electron count in the right arm");
    opt("--n-left", draw.n_left, des.n_left,
        "Electron count in the left arm");
    sub->add_option("--out", des.out, "Output file path (default: stdout)");
    sub->callback([&des, &design_binds]() {
      for (const auto& bind : design_binds) bind();
      run_design(des);
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}

}  // namespace spinsq
