// gyrad: build long-range step kernels, evolve/sample the three lattice
// models, and compare measured gyration statistics against the closed-form
// predictions.  One subcommand per operation; CSV in, CSV out.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gyrad/asymptotics.hpp"
#include "gyrad/csv.hpp"
#include "gyrad/errors.hpp"
#include "gyrad/op_engine.hpp"
#include "gyrad/power_series.hpp"
#include "gyrad/rw_engine.hpp"
#include "gyrad/saw_engine.hpp"
#include "gyrad/step_distribution.hpp"
#include "gyrad/version.hpp"

namespace {

using namespace gyrad;

double now_seconds() {
  using clock = std::chrono::steady_clock;
  static const auto t0 = clock::now();
  return std::chrono::duration<double>(clock::now() - t0).count();
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t next = s.find(',', pos);
    if (next == std::string::npos) next = s.size();
    out.push_back(std::stod(s.substr(pos, next - pos)));
    pos = next + 1;
  }
  if (out.empty()) throw invalid_parameter("empty list '" + s + "'");
  return out;
}

std::vector<long long> parse_int_list(const std::string& s) {
  std::vector<long long> out;
  for (double v : parse_double_list(s)) out.push_back(static_cast<long long>(v));
  return out;
}

// "kmin:kmax:n[:log|lin]"
std::vector<double> parse_grid(const std::string& s) {
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t next = s.find(':', pos);
    if (next == std::string::npos) next = s.size();
    parts.push_back(s.substr(pos, next - pos));
    pos = next + 1;
  }
  if (parts.size() < 3 || parts.size() > 4)
    throw invalid_parameter("grid spec must be kmin:kmax:n[:log|lin]");
  const double lo = std::stod(parts[0]);
  const double hi = std::stod(parts[1]);
  const int n = std::stoi(parts[2]);
  const bool log_spaced = parts.size() < 4 || parts[3] == "log";
  if (n < 2 || lo <= 0.0 || hi <= lo)
    throw invalid_parameter("grid spec requires 0 < kmin < kmax and n >= 2");
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) {
    const double f = static_cast<double>(i) / (n - 1);
    g[i] = log_spaced ? lo * std::pow(hi / lo, f) : lo + f * (hi - lo);
  }
  return g;
}

rw::BoxPolicy parse_box_policy(const std::string& s, double leak_tol) {
  if (s == "grow") return rw::BoxPolicy::grow();
  if (s.rfind("fixed:", 0) == 0)
    return rw::BoxPolicy::fixed(std::stoll(s.substr(6)), leak_tol);
  if (s.rfind("cap:", 0) == 0)
    return rw::BoxPolicy::grow_capped(std::stoll(s.substr(4)), leak_tol);
  throw invalid_parameter("box policy must be grow, fixed:<R> or cap:<R>");
}

rw::Backend parse_backend(const std::string& s) {
  if (s == "auto") return rw::Backend::automatic;
  if (s == "direct") return rw::Backend::direct;
  if (s == "fft") return rw::Backend::fft;
  throw invalid_parameter("backend must be auto, direct or fft");
}

int resolve_threads(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("GYRAD_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

void reject_divergent_orders(const kern::StepDistribution& D,
                             std::span<const double> rs) {
  for (double r : rs) {
    if (r < 0.0) throw invalid_parameter("moment order r must be >= 0");
    if (r >= D.alpha)
      throw invalid_parameter(
          "moment order r = " + std::to_string(r) + " >= alpha = " +
          std::to_string(D.alpha) +
          ": the r-th moment diverges for this kernel");
  }
}

std::vector<std::string> standard_comments(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return {std::string("gyrad ") + kVersion + " config=" +
          csv::config_hash(args)};
}

// Prediction for the ratio column: the moment-ratio law with the RW preset.
struct Predictor {
  bool available = false;
  asympt::AsymptoticParams params;

  static Predictor from_kernel(const kern::StepDistribution& D) {
    Predictor p;
    try {
      p.params = asympt::AsymptoticParams::rw(D.alpha, kern::v_alpha_closed_form(D));
      p.available = true;
    } catch (const error&) {
      p.available = false;  // e.g. alpha < 2 in d > 3
    }
    return p;
  }

  double ratio(double r, double t) const {
    if (!available || t < 1.0) return std::nan("");
    if (r == 0.0) return 1.0;
    return asympt::moment_ratio_prediction(params, r, t);
  }
};

struct TrendVerdict {
  bool computed = false;
  bool decreasing = false;
};

// rel_err monotone decreasing over the last 4 halvings of t.
TrendVerdict trend_over_doublings(const std::vector<std::pair<double, double>>& t_err) {
  TrendVerdict v;
  if (t_err.size() < 4) return v;
  double t_max = 0.0;
  for (auto& [t, e] : t_err) t_max = std::max(t_max, t);
  std::vector<double> errs;
  for (int k = 3; k >= 0; --k) {
    const double target = t_max / std::pow(2.0, k);
    double best_t = -1.0, best_err = 0.0;
    for (auto& [t, e] : t_err) {
      if (best_t < 0.0 || std::abs(t - target) < std::abs(best_t - target)) {
        best_t = t;
        best_err = e;
      }
    }
    if (!errs.empty() && best_t >= 0 && errs.size() >= 1 && best_err == errs.back())
      continue;  // duplicate row (coarse time grid)
    errs.push_back(best_err);
  }
  if (errs.size() < 2) return v;
  v.computed = true;
  v.decreasing = true;
  for (std::size_t i = 1; i < errs.size(); ++i)
    v.decreasing = v.decreasing && errs[i] < errs[i - 1];
  return v;
}

struct CommonMcArgs {
  std::string kernel_path;
  std::string out;
  std::string r_list = "1";
  long long T = 10;
  long long N = 10000;
  std::uint64_t seed = 1;
  int threads = 0;
};

void write_mc_csv(const mc::McSeries& series, const std::string& out,
                  const std::vector<std::string>& comments,
                  std::uint64_t seed) {
  std::vector<std::string> all_comments = comments;
  all_comments.push_back("seed=" + std::to_string(seed) +
                         (series.rows.empty() || series.rows[0].mass.scheme.empty()
                              ? ""
                              : " scheme=" + series.rows[0].mass.scheme));
  csv::Writer w(out,
                {"t", "mass", "mass_stderr", "r", "moment", "moment_stderr",
                 "ratio", "ratio_stderr"},
                all_comments);
  for (const auto& row : series.rows) {
    for (std::size_t ri = 0; ri < series.r_list.size(); ++ri) {
      w.row(std::vector<double>{
          static_cast<double>(row.t), row.mass.mean, row.mass.stderr_,
          series.r_list[ri], row.moment[ri].mean, row.moment[ri].stderr_,
          row.ratio[ri].mean, row.ratio[ri].stderr_});
    }
  }
  w.close();
}

int run_cli(int argc, char** argv) {
  CLI::App app{"long-range random walk / SAW / oriented percolation toolkit"};
  app.require_subcommand(1);
  argv = app.ensure_utf8(argv);

  // ---- kernel ----
  auto* kernel_cmd = app.add_subcommand("kernel", "step-distribution tools");
  kernel_cmd->require_subcommand(1);

  struct {
    int d = 1;
    double L = 1.0;
    double alpha = 0.0;
    long long radius = 0;
    double tail_tol = 1e-3;
    std::string out;
  } kb;
  auto* kbuild = kernel_cmd->add_subcommand("build", "build a Kac kernel");
  kbuild->add_option("--d", kb.d)->required();
  kbuild->add_option("--L", kb.L)->required();
  kbuild->add_option("--alpha", kb.alpha)->required();
  kbuild->add_option("--radius", kb.radius)->required();
  kbuild->add_option("--tail-tol", kb.tail_tol);
  kbuild->add_option("--out", kb.out)->required();

  struct {
    std::string path;
    std::string grid;
    std::string out;
  } ki;
  auto* kinspect = kernel_cmd->add_subcommand("inspect", "tabulate the Fourier transform");
  kinspect->add_option("kernel", ki.path)->required();
  kinspect->add_option("--fourier-grid", ki.grid)->required();
  kinspect->add_option("--out", ki.out);

  // ---- rw ----
  auto* rw_cmd = app.add_subcommand("rw", "random-walk evolution");
  rw_cmd->require_subcommand(1);
  struct {
    std::string kernel_path;
    long long T = 10;
    std::string r_list = "1,2";
    std::string out;
    std::string box = "grow";
    double leak_tol = 1e-4;
    std::string backend = "auto";
    std::string t_list;
  } re;
  auto* revolve = rw_cmd->add_subcommand("evolve", "exact phi_t by convolution");
  revolve->add_option("--kernel", re.kernel_path)->required();
  revolve->add_option("--T", re.T)->required();
  revolve->add_option("--r-list", re.r_list);
  revolve->add_option("--out", re.out)->required();
  revolve->add_option("--box", re.box);
  revolve->add_option("--leak-tol", re.leak_tol);
  revolve->add_option("--backend", re.backend);
  revolve->add_option("--t-list", re.t_list);

  // ---- saw ----
  auto* saw_cmd = app.add_subcommand("saw", "self-avoiding walk");
  saw_cmd->require_subcommand(1);
  struct {
    std::string kernel_path;
    long long T = 6;
    std::string out;
  } se;
  auto* senum = saw_cmd->add_subcommand("enumerate", "exact small-t enumeration");
  senum->add_option("--kernel", se.kernel_path)->required();
  senum->add_option("--T", se.T)->required();
  senum->add_option("--out", se.out)->required();

  CommonMcArgs ss;
  int ss_tcap = 40;
  auto* ssample = saw_cmd->add_subcommand("sample", "indicator-weighted MC");
  ssample->add_option("--kernel", ss.kernel_path)->required();
  ssample->add_option("--T", ss.T)->required();
  ssample->add_option("--N", ss.N)->required();
  ssample->add_option("--seed", ss.seed)->required();
  ssample->add_option("--r-list", ss.r_list);
  ssample->add_option("--out", ss.out)->required();
  ssample->add_option("--threads", ss.threads);
  ssample->add_option("--t-cap", ss_tcap);

  // ---- op ----
  auto* op_cmd = app.add_subcommand("op", "oriented percolation");
  op_cmd->require_subcommand(1);
  CommonMcArgs os;
  double op_p = 0.5;
  std::string op_scheme = "direct";
  auto* osample = op_cmd->add_subcommand("sample", "frontier-growth MC");
  osample->add_option("--kernel", os.kernel_path)->required();
  osample->add_option("--p", op_p)->required();
  osample->add_option("--T", os.T)->required();
  osample->add_option("--N", os.N)->required();
  osample->add_option("--seed", os.seed)->required();
  osample->add_option("--r-list", os.r_list);
  osample->add_option("--out", os.out)->required();
  osample->add_option("--threads", os.threads);
  osample->add_option("--scheme", op_scheme);

  // ---- series ----
  auto* series_cmd = app.add_subcommand("series", "power-series analysis");
  series_cmd->require_subcommand(1);
  struct {
    double beta = 0.0;
    int gamma = 0;
    long long T = 1000;
    std::string out;
  } sf;
  auto* sfo = series_cmd->add_subcommand("fo90", "singularity-transfer coefficients");
  sfo->add_option("--beta", sf.beta)->required();
  sfo->add_option("--gamma", sf.gamma)->required();
  sfo->add_option("--T", sf.T)->required();
  sfo->add_option("--out", sf.out)->required();

  struct {
    std::string phi_path;
    std::string model = "saw";
    std::string out;
  } sd;
  auto* sdec = series_cmd->add_subcommand("deconvolve", "lace kernel extraction");
  sdec->add_option("--phi", sd.phi_path)->required();
  sdec->add_option("--model", sd.model)->check(CLI::IsMember({"rw", "saw"}));
  sdec->add_option("--out", sd.out)->required();

  struct {
    std::string coeffs_path;
    double m_c = 1.0;
    double alpha = 0.0;
    double r = 0.0;
    double eps_min = 1e-3;
    double eps_max = 1e-1;
    double tail_max = 0.01;
    int points = 25;
    std::string out;
  } sfit;
  auto* sfit_cmd = series_cmd->add_subcommand("fit", "generating-function blowup fit");
  sfit_cmd->add_option("--coeffs", sfit.coeffs_path)->required();
  sfit_cmd->add_option("--m-c", sfit.m_c)->required();
  sfit_cmd->add_option("--alpha", sfit.alpha)->required();
  sfit_cmd->add_option("--r", sfit.r)->required();
  sfit_cmd->add_option("--eps-min", sfit.eps_min);
  sfit_cmd->add_option("--eps-max", sfit.eps_max);
  sfit_cmd->add_option("--tail-max", sfit.tail_max);
  sfit_cmd->add_option("--points", sfit.points);
  sfit_cmd->add_option("--out", sfit.out);

  // ---- asym ----
  auto* asym_cmd = app.add_subcommand("asym", "closed-form predictions");
  asym_cmd->require_subcommand(1);
  struct {
    double alpha = 0.0;
    double r = 0.0;
    std::string t_list;
    double C_II = 1.0;
    double v_alpha = 0.0;
    bool log2 = false;
    std::string out;
  } ap;
  auto* apred = asym_cmd->add_subcommand("predict", "predicted moment-ratio curve");
  apred->add_option("--alpha", ap.alpha)->required();
  apred->add_option("--r", ap.r)->required();
  apred->add_option("--t-list", ap.t_list)->required();
  apred->add_option("--C-II", ap.C_II);
  apred->add_option("--v-alpha", ap.v_alpha)->required();
  apred->add_flag("--log2", ap.log2, "alpha = 2 log-corrected branch");
  apred->add_option("--out", ap.out);

  struct {
    double r = 0.0;
  } akr;
  auto* akr_cmd = asym_cmd->add_subcommand("kr", "K_r closed form vs quadrature");
  akr_cmd->add_option("--r", akr.r)->required();

  // ---- compare ----
  struct {
    std::string measured;
    double alpha = 0.0;
    double v_alpha = 0.0;
    double C_II = 1.0;
    double m_c = 1.0;
    std::string out;
  } cmp;
  auto* ccmd = app.add_subcommand("compare", "annotate measurements with predictions");
  ccmd->add_option("measured", cmp.measured)->required();
  ccmd->add_option("--alpha", cmp.alpha)->required();
  ccmd->add_option("--v-alpha", cmp.v_alpha)->required();
  ccmd->add_option("--C-II", cmp.C_II);
  ccmd->add_option("--m-c", cmp.m_c);
  ccmd->add_option("--out", cmp.out)->required();

  CLI11_PARSE(app, argc, argv);
  const auto comments = standard_comments(argc, argv);
  const double t_start = now_seconds();

  if (kbuild->parsed()) {
    auto D = kern::build_kac_kernel(kb.d, kb.L, kb.alpha, kb.radius, kb.tail_tol);
    kern::save_json(D, kb.out);
    std::printf("kernel d=%d L=%g alpha=%g radius=%lld tail_bound=%.3g wall=%.2fs -> %s\n",
                kb.d, kb.L, kb.alpha, kb.radius, D.tail_bound,
                now_seconds() - t_start, kb.out.c_str());
    return 0;
  }

  if (kinspect->parsed()) {
    auto D = kern::load_json(ki.path);
    auto grid = parse_grid(ki.grid);
    std::vector<double> kvec(D.d, 0.0);
    std::vector<std::vector<double>> rows;
    for (double k : grid) {
      kvec[0] = k;
      const double omf = kern::one_minus_fourier(D, kvec);
      rows.push_back({k, 1.0 - omf, omf});
    }
    if (!ki.out.empty()) {
      csv::Writer w(ki.out, {"k", "Dhat", "one_minus_Dhat"}, comments);
      for (auto& r : rows) w.row(r);
      w.close();
    } else {
      std::printf("k,Dhat,one_minus_Dhat\n");
      for (auto& r : rows) std::printf("%.15g,%.15g,%.15g\n", r[0], r[1], r[2]);
    }
    return 0;
  }

  if (revolve->parsed()) {
    auto D = kern::load_json(re.kernel_path);
    auto rs = parse_double_list(re.r_list);
    reject_divergent_orders(D, rs);
    rw::EvolveOptions opt;
    opt.box = parse_box_policy(re.box, re.leak_tol);
    opt.backend = parse_backend(re.backend);
    std::vector<long long> emit;
    if (!re.t_list.empty()) emit = parse_int_list(re.t_list);
    auto series = rw::compute_moments(D, re.T, rs, opt, emit);
    const Predictor pred = Predictor::from_kernel(D);

    csv::Writer w(re.out,
                  {"t", "mass", "r", "moment_axis", "ratio", "gyration",
                   "predicted_ratio", "rel_err"},
                  comments);
    double max_rel_err = 0.0;
    for (const auto& row : series.rows) {
      for (std::size_t ri = 0; ri < series.r_list.size(); ++ri) {
        const double p = pred.ratio(series.r_list[ri], static_cast<double>(row.t));
        const double rel =
            std::isnan(p) || p == 0.0 ? std::nan("")
                                      : std::abs(row.ratio[ri] - p) / p;
        if (!std::isnan(rel)) max_rel_err = std::max(max_rel_err, rel);
        w.row(std::vector<double>{static_cast<double>(row.t), row.mass,
                                  series.r_list[ri], row.moment_axis[ri],
                                  row.ratio[ri], row.gyration[ri], p, rel});
      }
    }
    w.close();
    std::printf("model=rw T=%lld rows=%zu wall=%.2fs max_rel_err=%.4g -> %s\n",
                re.T, series.rows.size(), now_seconds() - t_start, max_rel_err,
                re.out.c_str());
    return 0;
  }

  if (senum->parsed()) {
    auto D = kern::load_json(se.kernel_path);
    auto e = saw::enumerate(D, static_cast<int>(se.T));
    std::vector<std::string> cols{"t"};
    for (int i = 1; i <= D.d; ++i) cols.push_back("x" + std::to_string(i));
    cols.push_back("phi");
    csv::Writer w(se.out, cols, comments);
    std::vector<double> row(cols.size());
    for (const auto& f : e.fields) {
      std::vector<long long> x(D.d, -f.box_radius);
      while (true) {
        row[0] = static_cast<double>(f.t);
        for (int i = 0; i < D.d; ++i) row[1 + i] = static_cast<double>(x[i]);
        row[D.d + 1] = f.at(x);
        w.row(row);
        int axis = 0;
        while (axis < D.d) {
          if (++x[axis] <= f.box_radius) break;
          x[axis] = -f.box_radius;
          ++axis;
        }
        if (axis == D.d) break;
      }
    }
    w.close();
    std::printf("model=saw-enum T=%lld wall=%.2fs -> %s\n", se.T,
                now_seconds() - t_start, se.out.c_str());
    return 0;
  }

  if (ssample->parsed()) {
    auto D = kern::load_json(ss.kernel_path);
    auto rs = parse_double_list(ss.r_list);
    reject_divergent_orders(D, rs);
    saw::SampleOptions opt;
    opt.n_threads = resolve_threads(ss.threads);
    opt.t_cap = ss_tcap;
    auto series = saw::sample_saw_moments(D, static_cast<int>(ss.T), rs, ss.N,
                                          ss.seed, opt);
    write_mc_csv(series, ss.out, comments, ss.seed);
    std::printf("model=saw N=%lld T=%lld wall=%.2fs -> %s\n", ss.N, ss.T,
                now_seconds() - t_start, ss.out.c_str());
    return 0;
  }

  if (osample->parsed()) {
    auto D = kern::load_json(os.kernel_path);
    auto rs = parse_double_list(os.r_list);
    reject_divergent_orders(D, rs);
    op::SampleOptions opt;
    opt.n_threads = resolve_threads(os.threads);
    if (op_scheme == "thinned")
      opt.scheme = op::BondScheme::thinned;
    else if (op_scheme != "direct")
      throw invalid_parameter("scheme must be direct or thinned");
    auto series = op::estimate_op_moments(D, op_p, static_cast<int>(os.T), rs,
                                          os.N, os.seed, opt);
    write_mc_csv(series, os.out, comments, os.seed);
    std::printf("model=op p=%g N=%lld T=%lld wall=%.2fs -> %s\n", op_p, os.N,
                os.T, now_seconds() - t_start, os.out.c_str());
    return 0;
  }

  if (sfo->parsed()) {
    auto coeffs = series::singular_coefficients(
        sf.beta, sf.gamma, static_cast<std::size_t>(sf.T));
    csv::Writer w(sf.out, {"t", "coefficient"}, comments);
    for (std::size_t t = 0; t < coeffs.size(); ++t)
      w.row(std::vector<double>{static_cast<double>(t), coeffs[t]});
    w.close();
    std::printf("series=fo90 beta=%g gamma=%d T=%lld wall=%.2fs -> %s\n",
                sf.beta, sf.gamma, sf.T, now_seconds() - t_start, sf.out.c_str());
    return 0;
  }

  if (sdec->parsed()) {
    auto table = csv::read(sd.phi_path);
    const int t_col = table.column_index("t");
    const int phi_col = table.column_index("phi");
    if (t_col < 0 || phi_col < 0)
      throw invalid_parameter("phi csv must have columns t, x1.., phi");
    const int d = phi_col - t_col - 1;
    if (d < 1) throw invalid_parameter("phi csv must have coordinate columns");

    std::map<long long, std::vector<const std::vector<double>*>> by_t;
    for (const auto& row : table.rows)
      by_t[static_cast<long long>(row[t_col])].push_back(&row);
    std::vector<LatticeField> phi;
    for (auto& [t, rows] : by_t) {
      if (t != static_cast<long long>(phi.size()))
        throw invalid_parameter("phi csv must cover t = 0..T contiguously");
      long long radius = 0;
      for (auto* row : rows)
        for (int i = 0; i < d; ++i)
          radius = std::max(radius, std::llabs(static_cast<long long>((*row)[t_col + 1 + i])));
      LatticeField f = LatticeField::delta(d, radius);
      std::fill(f.values.begin(), f.values.end(), 0.0);
      f.t = t;
      std::vector<long long> x(d);
      for (auto* row : rows) {
        for (int i = 0; i < d; ++i)
          x[i] = static_cast<long long>((*row)[t_col + 1 + i]);
        f.ref(x) = (*row)[phi_col];
      }
      f.recompute_mass();
      phi.push_back(std::move(f));
    }

    auto I = series::delta_identity_series(d, phi.size() - 1);
    auto lace = series::deconvolve_lace(phi, I);

    std::vector<std::string> cols{"t"};
    for (int i = 1; i <= d; ++i) cols.push_back("x" + std::to_string(i));
    cols.push_back("J_value");
    csv::Writer w(sd.out, cols, comments);
    std::vector<double> row(cols.size());
    for (std::size_t t = 1; t < lace.J.size(); ++t) {
      const auto& f = lace.J[t];
      std::vector<long long> x(d, -f.box_radius);
      while (true) {
        row[0] = static_cast<double>(t);
        for (int i = 0; i < d; ++i) row[1 + i] = static_cast<double>(x[i]);
        row[d + 1] = f.at(x);
        w.row(row);
        int axis = 0;
        while (axis < d) {
          if (++x[axis] <= f.box_radius) break;
          x[axis] = -f.box_radius;
          ++axis;
        }
        if (axis == d) break;
      }
    }
    w.close();
    std::printf("series=deconvolve model=%s residual=%.3g wall=%.2fs -> %s\n",
                sd.model.c_str(), lace.reconstruction_residual,
                now_seconds() - t_start, sd.out.c_str());
    return 0;
  }

  if (sfit_cmd->parsed()) {
    auto table = csv::read(sfit.coeffs_path);
    const int c_col = table.column_index("coefficient") >= 0
                          ? table.column_index("coefficient")
                          : table.column_index("moment_axis");
    if (c_col < 0)
      throw invalid_parameter("coeffs csv needs a coefficient or moment_axis column");
    std::vector<double> coeffs(table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i)
      coeffs[i] = table.rows[i][c_col];

    std::vector<series::BlowupPoint> pts;
    for (int i = 0; i < sfit.points; ++i) {
      const double f = static_cast<double>(i) / (sfit.points - 1);
      const double eps = sfit.eps_min * std::pow(sfit.eps_max / sfit.eps_min, f);
      pts.push_back(series::partial_sum_point(coeffs, sfit.m_c * (1.0 - eps)));
    }
    series::BlowupWindow window{sfit.eps_min * 0.999, sfit.eps_max * 1.001,
                                sfit.tail_max};
    const double a2 = std::min(sfit.alpha, 2.0);
    const double expected = 1.0 + sfit.r / a2;
    auto fit = series::fit_generating_blowup(pts, sfit.m_c, expected, window);
    if (!sfit.out.empty()) {
      csv::Writer w(sfit.out, {"m", "value", "tail_fraction"}, comments);
      for (auto& p : pts)
        w.row(std::vector<double>{p.m, p.value, p.tail_fraction});
      w.close();
    }
    std::printf(
        "fit exponent=%.6f expected=%.6f amplitude=%.6g rms_residual=%.3g "
        "points=%d wall=%.2fs\n",
        fit.exponent, expected, fit.amplitude, fit.rms_residual,
        fit.points_used, now_seconds() - t_start);
    return 0;
  }

  if (apred->parsed()) {
    if (ap.log2 && ap.alpha != 2.0)
      throw invalid_parameter("--log2 applies only to alpha = 2");
    auto params = asympt::AsymptoticParams::rw(ap.alpha, ap.v_alpha);
    params.C_II = ap.C_II;
    auto ts = parse_int_list(ap.t_list);
    std::vector<std::vector<double>> rows;
    for (long long t : ts)
      rows.push_back({static_cast<double>(t),
                      asympt::moment_ratio_prediction(params, ap.r, static_cast<double>(t))});
    if (!ap.out.empty()) {
      csv::Writer w(ap.out, {"t", "prediction"}, comments);
      for (auto& r : rows) w.row(r);
      w.close();
    } else {
      std::printf("t,prediction\n");
      for (auto& r : rows) std::printf("%.15g,%.15g\n", r[0], r[1]);
    }
    return 0;
  }

  if (akr_cmd->parsed()) {
    const double closed = asympt::K_r_closed(akr.r);
    const double quadv = asympt::K_r_quadrature(akr.r);
    std::printf("method,value\nclosed,%.15g\nquadrature,%.15g\nrel_diff,%.3g\n",
                closed, quadv, std::abs(closed - quadv) / closed);
    return 0;
  }

  if (ccmd->parsed()) {
    auto table = csv::read(cmp.measured);
    const int t_col = table.column_index("t");
    const int r_col = table.column_index("r");
    const int ratio_col = table.column_index("ratio");
    if (t_col < 0 || r_col < 0 || ratio_col < 0)
      throw invalid_parameter("measured csv needs columns t, r and ratio");

    asympt::AsymptoticParams params;
    params.alpha = cmp.alpha;
    params.v_alpha = cmp.v_alpha;
    params.C_II = cmp.C_II;
    params.m_c = cmp.m_c;

    std::vector<std::string> cols = table.columns;
    cols.push_back("predicted_ratio");
    cols.push_back("rel_err");
    csv::Writer w(cmp.out, cols, comments);
    std::map<double, std::vector<std::pair<double, double>>> per_r;
    for (const auto& row : table.rows) {
      const double t = row[t_col];
      const double r = row[r_col];
      double p = std::nan("");
      if (t >= 1.0)
        p = (r == 0.0) ? 1.0 : asympt::moment_ratio_prediction(params, r, t);
      const double rel =
          std::isnan(p) || p == 0.0 ? std::nan("")
                                    : std::abs(row[ratio_col] - p) / p;
      std::vector<double> out_row = row;
      out_row.push_back(p);
      out_row.push_back(rel);
      w.row(out_row);
      if (!std::isnan(rel)) per_r[r].emplace_back(t, rel);
    }
    w.close();
    for (auto& [r, series_err] : per_r) {
      const TrendVerdict v = trend_over_doublings(series_err);
      std::printf("trend r=%g: %s\n", r,
                  !v.computed ? "insufficient-data"
                              : (v.decreasing ? "decreasing" : "not-decreasing"));
    }
    std::printf("compare rows=%zu wall=%.2fs -> %s\n", table.rows.size(),
                now_seconds() - t_start, cmp.out.c_str());
    return 0;
  }

  return 0;
}

void print_error_json(const char* type, const std::string& message) {
  std::fprintf(stderr, "{\"error\":{\"type\":\"%s\",\"message\":\"%s\"}}\n",
               type, message.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const invalid_parameter& e) {
    print_error_json("invalid-parameter", e.what());
    return 2;
  } catch (const resource_limit& e) {
    print_error_json("resource-limit", e.what());
    return 3;
  } catch (const numeric_failure& e) {
    print_error_json("numeric-failure", e.what());
    return 4;
  } catch (const error& e) {
    print_error_json("error", e.what());
    return 4;
  } catch (const std::exception& e) {
    print_error_json("invalid-parameter", e.what());
    return 2;
  }
}
