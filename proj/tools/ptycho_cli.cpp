#include "ptycho/ptycho.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

using namespace ptycho;
using nlohmann::json;

namespace {

void log(const std::string& msg) { std::cerr << "ptycho: " << msg << '\n'; }

double parse_snr(const std::string& s) {
  if (s == "inf" || s == "Inf" || s == "INF") return std::numeric_limits<double>::infinity();
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos == s.size() && v > 0.0) return v;
  } catch (const std::exception&) {
  }
  throw ValidationError("--snr: expected a positive number or 'inf', got '" + s + "'");
}

// ---- worker pool ----

unsigned worker_count(std::size_t tasks) {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("PTYCHO_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) throw ValidationError("PTYCHO_THREADS must be a positive integer");
    n = unsigned(v);
  }
  return unsigned(std::min<std::size_t>(n, std::max<std::size_t>(tasks, 1)));
}

// Results land at their task index, so output order never depends on scheduling.
template <class R, class F>
std::vector<R> parallel_map(std::size_t n, F fn) {
  std::vector<R> out(n);
  std::vector<std::exception_ptr> err(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next++) < n;) {
      try {
        out[i] = fn(i);
      } catch (...) {
        err[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  unsigned k = worker_count(n);
  for (unsigned t = 1; t < k; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (auto& e : err)
    if (e) std::rethrow_exception(e);
  return out;
}

// ---- output ----

json num(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

std::string csv_cell(const json& v) {
  if (v.is_string()) {
    std::string s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  }
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number_float()) return fmt_real(v.get<double>());
  if (v.is_null()) return "";
  return v.dump();
}

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;
};

class Sink {
 public:
  explicit Sink(const std::string& path, bool append = false) : path_(path) {
    if (path == "-") return;
    file_.open(path, append ? std::ios::app : std::ios::trunc);
    if (!file_) throw ValidationError("cannot write output file '" + path + "' (check the directory exists and is writable)");
  }
  std::ostream& os() { return path_ == "-" ? std::cout : file_; }
  void close() {
    if (path_ == "-") {
      std::cout.flush();
      return;
    }
    file_.close();
    if (!file_) throw ValidationError("failed writing '" + path_ + "'");
  }

 private:
  std::string path_;
  std::ofstream file_;
};

std::string header_text(const json& cfg) {
  return std::string("ptycho ") + kVersion + "\nconfig " + cfg.dump();
}

void write_header(std::ostream& os, const json& cfg) {
  std::istringstream is(header_text(cfg));
  for (std::string line; std::getline(is, line);) os << "# " << line << '\n';
}

void emit_table(const Table& t, const std::string& format, const std::string& path, const json& cfg) {
  Sink sink(path);
  auto& os = sink.os();
  if (format == "json") {
    json rows = json::array();
    for (const auto& r : t.rows) {
      json o;
      for (std::size_t c = 0; c < t.columns.size(); ++c) o[t.columns[c]] = r[c];
      rows.push_back(o);
    }
    json doc{{"version", kVersion}, {"config", cfg}, {"rows", rows}};
    os << doc.dump(1) << '\n';
  } else {
    write_header(os, cfg);
    for (std::size_t c = 0; c < t.columns.size(); ++c) os << (c ? "," : "") << t.columns[c];
    os << '\n';
    for (const auto& r : t.rows) {
      for (std::size_t c = 0; c < r.size(); ++c) os << (c ? "," : "") << csv_cell(r[c]);
      os << '\n';
    }
  }
  sink.close();
}

json cvec_json(const CVec& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back({v(i).real(), v(i).imag()});
  return a;
}

CVec read_signal(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open signal file '" + path + "'");
  try {
    json j = json::parse(in);
    const json& a = j.contains("x") ? j["x"] : j;
    CVec v(Index(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) v(Index(i)) = cplx(a[i].at(0).get<double>(), a[i].at(1).get<double>());
    return v;
  } catch (const json::exception& e) {
    throw ValidationError("signal file '" + path + "': " + e.what());
  }
}

// ---- option groups ----

struct Problem {
  std::string mask = "flat";
  Index d = 32;
  Index delta = 8;
  Index s = 1;

  void add(CLI::App* app) {
    app->add_option("--mask", mask, "exp[:a=..] | expdecay[:a=..] | flat[:a=..] | const | rand[:seed=..,D=..] | file:path")
        ->capture_default_str();
    app->add_option("--d", d, "signal length")->capture_default_str();
    app->add_option("--delta", delta, "mask support size")->capture_default_str();
    app->add_option("--s", s, "shift stride")->capture_default_str();
  }
  json config() const { return {{"mask", mask}, {"d", d}, {"delta", delta}, {"s", s}}; }
  MaskFamily family() const {
    BandSpec{d, delta, s}.validate();
    return family_from_descriptor(mask, d, delta, s);
  }
};

struct Output {
  std::string path = "-";
  std::string format = "csv";

  void add(CLI::App* app) {
    app->add_option("-o,--output", path, "output file, '-' for stdout")->capture_default_str();
    app->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  }
  json config() const { return {{"output", path}, {"format", format}}; }
};

json merge(json a, const json& b) {
  a.update(b);
  return a;
}

std::vector<json> cond_row(const Problem& p, const MaskFamily& f) {
  BlockSpectrum bs = block_spectrum(f, p.s);
  return {p.d, p.delta, p.s, p.mask, num(bs.kappa), num(bs.sigmaMin), num(bs.sigmaMax), bs.spanning};
}

const std::vector<std::string> kCondColumns{"d", "delta", "s", "mask", "kappa", "sigma_min", "sigma_max", "spanning"};

// ---- subcommands ----

int cmd_cond(const Problem& p, const Output& o) {
  MaskFamily f = p.family();
  Table t{kCondColumns, {cond_row(p, f)}};
  emit_table(t, o.format, o.path, merge(merge({{"command", "cond"}}, p.config()), o.config()));
  return 0;
}

struct SweepOpts {
  std::vector<Index> d_list{12, 16, 24, 32};
  std::vector<Index> delta_list{3, 4};
  std::vector<Index> s_list{1, 2};
};

int cmd_cond_sweep(const std::string& mask, const SweepOpts& g, const Output& o) {
  std::vector<std::pair<Problem, MaskFamily>> points;
  for (Index d : g.d_list)
    for (Index delta : g.delta_list)
      for (Index s : g.s_list) {
        Problem p{mask, d, delta, s};
        try {
          MaskFamily f = p.family();
          points.emplace_back(p, std::move(f));
        } catch (const std::invalid_argument& e) {
          std::ostringstream os;
          os << "skip d=" << d << " delta=" << delta << " s=" << s << ": " << e.what();
          log(os.str());
        }
      }
  Table t{kCondColumns, {}};
  t.rows = parallel_map<std::vector<json>>(points.size(), [&](std::size_t i) {
    return cond_row(points[i].first, points[i].second);
  });
  json cfg{{"command", "cond-sweep"}, {"mask", mask}, {"d_list", g.d_list}, {"delta_list", g.delta_list},
           {"s_list", g.s_list}};
  emit_table(t, o.format, o.path, merge(cfg, o.config()));
  return 0;
}

int cmd_span_check(const Problem& p, const Output& o) {
  SpanResult r = spanning_check(p.family(), p.s);
  Table t{{"d", "delta", "s", "mask", "spanning", "witness"},
          {{p.d, p.delta, p.s, p.mask, r.spanning, r.witness ? json(*r.witness) : json(nullptr)}}};
  if (!r.spanning) log("not spanning; rank-deficient block at frequency " + std::to_string(*r.witness));
  emit_table(t, o.format, o.path, merge(merge({{"command", "span-check"}}, p.config()), o.config()));
  return 0;
}

struct NoiseOpts {
  std::string snr = "inf";
  std::uint64_t noise_seed = 1;
  std::uint64_t seed = 0;

  void add(CLI::App* app) {
    app->add_option("--snr", snr, "target SNR |y|/|noise|, or inf")->capture_default_str();
    app->add_option("--noise-seed", noise_seed, "noise seed")->capture_default_str();
    app->add_option("--seed", seed, "signal seed")->capture_default_str();
  }
  json config() const { return {{"snr", snr}, {"noise_seed", noise_seed}, {"seed", seed}}; }
};

MeasurementGrid simulate(const MaskFamily& f, Index s, const CVec& x0, const NoiseOpts& n) {
  MeasurementGrid y0 = forward(f, x0, s);
  NoiseSpec ns{NoiseModel::Gaussian, parse_snr(n.snr), n.noise_seed};
  return add_noise(y0, ns, y0);
}

int cmd_forward(const Problem& p, const NoiseOpts& n, const Output& o, const std::string& truth_out) {
  MaskFamily f = p.family();
  CVec x0 = random_signal(p.d, n.seed);
  MeasurementGrid y = simulate(f, p.s, x0, n);
  json cfg = merge(merge(merge({{"command", "forward"}}, p.config()), n.config()), o.config());
  Sink sink(o.path);
  if (o.format == "json") {
    json j = json::parse(grid_to_json(y));
    j["version"] = kVersion;
    j["config"] = cfg;
    sink.os() << j.dump(1) << '\n';
  } else {
    write_grid_csv(sink.os(), y, header_text(cfg));
  }
  sink.close();
  if (!truth_out.empty()) {
    Sink ts(truth_out);
    ts.os() << json{{"version", kVersion}, {"config", cfg}, {"x", cvec_json(x0)}}.dump(1) << '\n';
    ts.close();
  }
  return 0;
}

int cmd_invert(const Problem& p, const std::string& input, const Output& o) {
  MaskFamily f = p.family();
  InversePlan plan = plan_inverse(f, p.s);
  MeasurementGrid y = read_grid_file(input);
  InverseDiagnostics diag;
  BandedHermitian X = invert(plan, y, &diag);
  log("mode " + to_string(plan.mode) + ", asymmetry " + fmt_real(diag.asymmetry));
  json cfg = merge(merge({{"command", "invert"}, {"input", input}}, p.config()), o.config());
  if (o.format == "json") {
    Sink sink(o.path);
    json j = json::parse(banded_to_json(X));
    j["version"] = kVersion;
    j["config"] = cfg;
    j["mode"] = to_string(plan.mode);
    sink.os() << j.dump(1) << '\n';
    sink.close();
    return 0;
  }
  Table t{{"m", "i", "re", "im"}, {}};
  for (Index m = 0; m < p.delta; ++m)
    for (Index i = 0; i < p.d; ++i)
      if (X.spec().in_band(i, m)) t.rows.push_back({m, i, X.stored(m)(i).real(), X.stored(m)(i).imag()});
  emit_table(t, o.format, o.path, cfg);
  return 0;
}

int cmd_bench(const std::string& mask, Index delta, const std::vector<Index>& sizes, int reps, const Output& o) {
  BenchResult b = invert_benchmark(mask, delta, sizes, reps);
  Table t{{"d", "delta", "mode", "median_ms"}, {}};
  for (const auto& r : b.rows) t.rows.push_back({r.d, r.delta, to_string(r.mode), r.median_ms});
  log("fitted exponent " + fmt_real(b.exponent) + " (against d log d: " + fmt_real(b.exponent_dlogd) + ")");
  json cfg{{"command", "bench-invert"}, {"mask", mask}, {"delta", delta}, {"d_list", sizes}, {"reps", reps}};
  emit_table(t, o.format, o.path, merge(cfg, o.config()));
  return 0;
}

std::optional<Covering> parse_covering(const std::string& c, const BandSpec& spec) {
  if (c.empty()) return std::nullopt;
  if (c == "partition") return make_partition_covering(spec);
  if (c.rfind("m=", 0) == 0) {
    try {
      std::size_t pos = 0;
      long m = std::stol(c.substr(2), &pos);
      if (pos == c.size() - 2) return make_interval_covering(spec, Index(m));
    } catch (const std::logic_error&) {
    }
  }
  throw ValidationError("--covering: expected m=<int> or partition, got '" + c + "'");
}

struct RecoverOpts {
  std::string covering;
  std::string input;
  std::string truth;
  std::string csv_row;
};

int cmd_recover(const Problem& p, const NoiseOpts& n, const RecoverOpts& r, const Output& o) {
  MaskFamily f = p.family();
  BandSpec spec{p.d, p.delta, p.s};
  RecoveryConfig rc;
  rc.covering = parse_covering(r.covering, spec);
  InversePlan plan = plan_inverse(f, p.s);

  std::optional<CVec> x0;
  MeasurementGrid y;
  if (r.input.empty()) {
    x0 = random_signal(p.d, n.seed);
    y = simulate(f, p.s, *x0, n);
  } else {
    y = read_grid_file(r.input);
    if (!r.truth.empty()) x0 = read_signal(r.truth);
  }
  if (x0) require_dims(x0->size() == p.d, "truth signal length does not match --d");

  RecoveryReport rep = recover(y, plan, rc, x0 ? &*x0 : nullptr);
  if (rep.degenerate) log("warning: leading eigenvalue is degenerate; phase is not identifiable");

  json cfg = merge(merge(merge({{"command", "recover"}, {"covering", r.covering.empty() ? "default" : r.covering},
                                {"input", r.input}, {"truth", r.truth}},
                               p.config()),
                         n.config()),
                   o.config());
  json rj{{"version", kVersion},
          {"config", cfg},
          {"mode", to_string(rep.mode)},
          {"degenerate", rep.degenerate},
          {"asymmetry", num(rep.asymmetry)},
          {"spectralGapTau", rep.spectralGapTau ? num(*rep.spectralGapTau) : json(nullptr)},
          {"alignedError", rep.alignedError ? num(*rep.alignedError) : json(nullptr)},
          {"alignedRelError", rep.alignedRelError ? num(*rep.alignedRelError) : json(nullptr)},
          {"x", cvec_json(rep.x)},
          {"magnitude", std::vector<double>(rep.magnitude.data(), rep.magnitude.data() + rep.magnitude.size())},
          {"phase", cvec_json(rep.phase)}};
  Sink sink(o.path);
  sink.os() << rj.dump(1) << '\n';
  sink.close();

  if (!r.csv_row.empty()) {
    if (!x0) throw ValidationError("--csv-row needs a known truth: simulate, or pass --truth with --input");
    SweepRow e = score_recovery(rep, *x0);
    bool fresh = true;
    {
      std::ifstream probe(r.csv_row);
      fresh = !probe || probe.peek() == std::ifstream::traits_type::eof();
    }
    Sink rs(r.csv_row, true);
    if (fresh) {
      write_header(rs.os(), cfg);
      rs.os() << "d,delta,s,mask,snr,seed,noise_seed,covering,aligned_rel_error,mag_error,phase_error,degenerate\n";
    }
    std::vector<json> row{p.d, p.delta, p.s, p.mask, n.snr, n.seed, n.noise_seed, cfg["covering"],
                          e.aligned_rel_error, e.mag_error, e.phase_error, rep.degenerate};
    for (std::size_t c = 0; c < row.size(); ++c) rs.os() << (c ? "," : "") << csv_cell(row[c]);
    rs.os() << '\n';
    rs.close();
  }
  return 0;
}

int cmd_snr_sweep(const Problem& p, const std::vector<std::string>& snr_list, int trials, std::uint64_t seed,
                  const std::string& covering, const Output& o) {
  require(trials >= 1, "--trials must be at least 1");
  std::vector<double> snrs;
  for (const auto& s : snr_list) snrs.push_back(parse_snr(s));
  MaskFamily f = p.family();
  RecoveryConfig rc;
  rc.covering = parse_covering(covering, BandSpec{p.d, p.delta, p.s});
  InversePlan plan = plan_inverse(f, p.s);
  // each SNR point reuses the same trial seeds, so splitting by point is exact
  auto rows = parallel_map<SweepRow>(snrs.size(), [&](std::size_t i) {
    return snr_sweep(plan, {snrs[i]}, trials, seed, rc).front();
  });
  Table t{{"snr", "aligned_rel_error", "mag_error", "phase_error"}, {}};
  for (const auto& r : rows) t.rows.push_back({num(r.snr), r.aligned_rel_error, r.mag_error, r.phase_error});
  json cfg = merge(merge({{"command", "snr-sweep"}, {"snr_list", snr_list}, {"trials", trials}, {"seed", seed},
                          {"covering", covering.empty() ? "default" : covering}},
                         p.config()),
                   o.config());
  emit_table(t, o.format, o.path, cfg);
  return 0;
}

int cmd_selftest() {
  auto results = run_selftest();
  std::vector<std::string> modules;
  std::map<std::string, bool> ok;
  for (const auto& r : results) {
    if (!ok.count(r.module)) modules.push_back(r.module), ok[r.module] = true;
    ok[r.module] = ok[r.module] && r.pass;
    std::cout << (r.pass ? "  pass " : "  FAIL ") << r.module << ": " << r.detail << std::setprecision(3)
              << " (err " << r.error << ", tol " << r.tolerance << ")\n";
  }
  bool all = true;
  for (const auto& m : modules) {
    std::cout << (ok[m] ? "PASS " : "FAIL ") << m << '\n';
    all = all && ok[m];
  }
  std::cout << (all ? "selftest passed" : "selftest FAILED") << '\n';
  return all ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Banded ptychographic measurement, inversion and phase retrieval experiments"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  Problem cond_p;
  Output cond_o;
  auto* cond = app.add_subcommand("cond", "condition number of one configuration");
  cond_p.add(cond);
  cond_o.add(cond);

  std::string sweep_mask = "flat";
  SweepOpts sweep_g;
  Output sweep_o;
  auto* sweep = app.add_subcommand("cond-sweep", "condition numbers over a (d, delta, s) grid");
  sweep->add_option("--mask", sweep_mask, "mask descriptor")->capture_default_str();
  sweep->add_option("--d-list", sweep_g.d_list, "comma-separated d values")->delimiter(',')->capture_default_str();
  sweep->add_option("--delta-list", sweep_g.delta_list, "comma-separated delta values")
      ->delimiter(',')
      ->capture_default_str();
  sweep->add_option("--s-list", sweep_g.s_list, "comma-separated s values")->delimiter(',')->capture_default_str();
  sweep_o.add(sweep);

  Problem span_p;
  Output span_o;
  auto* span = app.add_subcommand("span-check", "whether the family determines every banded matrix");
  span_p.add(span);
  span_o.add(span);

  Problem fwd_p;
  NoiseOpts fwd_n;
  Output fwd_o;
  std::string truth_out;
  auto* fwd = app.add_subcommand("forward", "simulate measurements of a random signal");
  fwd_p.add(fwd);
  fwd_n.add(fwd);
  fwd_o.add(fwd);
  fwd->add_option("--truth-out", truth_out, "also write the signal as JSON");

  Problem inv_p;
  Output inv_o;
  inv_o.format = "json";
  std::string inv_in;
  auto* inv = app.add_subcommand("invert", "recover the banded matrix from measurements");
  inv_p.add(inv);
  inv_o.add(inv);
  inv->add_option("-i,--input", inv_in, "measurement CSV or JSON")->required();

  std::string bench_mask = "flat";
  Index bench_delta = 8;
  std::vector<Index> bench_sizes{1024, 2048, 4096, 8192};
  int bench_reps = 5;
  Output bench_o;
  auto* bench = app.add_subcommand("bench-invert", "time the inverse against d");
  bench->add_option("--mask", bench_mask, "mask descriptor")->capture_default_str();
  bench->add_option("--delta", bench_delta, "mask support size")->capture_default_str();
  bench->add_option("--d-list", bench_sizes, "comma-separated d values")->delimiter(',')->capture_default_str();
  bench->add_option("--reps", bench_reps, "repetitions per size")->capture_default_str();
  bench_o.add(bench);

  Problem rec_p;
  rec_p.mask = "rand";
  rec_p.d = 24;
  rec_p.delta = 6;
  rec_p.s = 3;
  NoiseOpts rec_n;
  RecoverOpts rec_r;
  Output rec_o;
  auto* rec = app.add_subcommand("recover", "end-to-end signal recovery");
  rec_p.add(rec);
  rec_n.add(rec);
  rec->add_option("--covering", rec_r.covering, "m=<int> or partition");
  rec->add_option("-i,--input", rec_r.input, "measurement file; otherwise simulated from --seed");
  rec->add_option("--truth", rec_r.truth, "signal JSON for error reporting with --input");
  rec->add_option("--csv-row", rec_r.csv_row, "append an error row to this CSV");
  rec->add_option("-o,--output", rec_o.path, "report JSON, '-' for stdout")->capture_default_str();

  Problem snr_p;
  snr_p.mask = "rand";
  snr_p.d = 24;
  snr_p.delta = 6;
  snr_p.s = 3;
  std::vector<std::string> snr_list{"1e2", "1e3", "1e4", "1e5", "1e6"};
  int snr_trials = 20;
  std::uint64_t snr_seed = 0;
  std::string snr_cov;
  Output snr_o;
  auto* snr = app.add_subcommand("snr-sweep", "mean recovery errors against SNR");
  snr_p.add(snr);
  snr->add_option("--snr-list", snr_list, "comma-separated SNR values")->delimiter(',')->capture_default_str();
  snr->add_option("--trials", snr_trials, "signals per SNR")->capture_default_str();
  snr->add_option("--seed", snr_seed, "base seed")->capture_default_str();
  snr->add_option("--covering", snr_cov, "m=<int> or partition");
  snr_o.add(snr);

  auto* self = app.add_subcommand("selftest", "dense-oracle checks for every module");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*cond) return cmd_cond(cond_p, cond_o);
    if (*sweep) return cmd_cond_sweep(sweep_mask, sweep_g, sweep_o);
    if (*span) return cmd_span_check(span_p, span_o);
    if (*fwd) return cmd_forward(fwd_p, fwd_n, fwd_o, truth_out);
    if (*inv) return cmd_invert(inv_p, inv_in, inv_o);
    if (*bench) return cmd_bench(bench_mask, bench_delta, bench_sizes, bench_reps, bench_o);
    if (*rec) return cmd_recover(rec_p, rec_n, rec_r, rec_o);
    if (*snr) return cmd_snr_sweep(snr_p, snr_list, snr_trials, snr_seed, snr_cov, snr_o);
    if (*self) return cmd_selftest();
  } catch (const std::invalid_argument& e) {
    log(std::string("error: ") + e.what());
    return 1;
  } catch (const std::exception& e) {
    log(std::string("error: ") + e.what());
    return 1;
  }
  return 1;
}
