// Experiment front end.
//
//   train      one run per (algorithm, seed): per-run metrics CSV and final
//              checkpoint, plus a per-algorithm mean/std summary across seeds
//   sweep-eta  trains per reward weight, evaluates 100 fixed episodes per
//              point, emits an ascending table and monotone-trend verdicts
//   sweep-mus  the same over MU counts, with capacity arithmetic per point
//   verify     runs the registered oracle/property suites in-process
//   plotdata   distills a run directory into per-figure CSV and SVG files
//
// Exit codes: 0 success, 1 usage/config error, 2 verification failure,
// 3 runtime abort (non-finite loss or corrupt checkpoint). All output files
// are written atomically (temp + rename); runs with identical inputs and
// seeds produce byte-identical files. WDTN_MAX_PARALLEL caps how many runs
// execute concurrently (default 1).

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "wdtn/config.hpp"
#include "wdtn/env.hpp"
#include "wdtn/marl/checkpoint.hpp"
#include "wdtn/marl/train.hpp"

int run_verify(bool grad_only);  // verify_embed.cpp

namespace fs = std::filesystem;
using namespace wdtn;

namespace {

// ---------------------------------------------------------------------------
// Small utilities
// ---------------------------------------------------------------------------

std::string num(double v) {
  char b[40];
  std::snprintf(b, sizeof(b), "%.12g", v);
  return b;
}

void atomic_write(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    f << content;
    if (!f) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& s) {
  std::vector<std::uint64_t> out;
  for (const std::string& tok : split_list(s)) {
    try {
      size_t pos = 0;
      out.push_back(std::stoull(tok, &pos));
      if (pos != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ConfigError("--seeds entry '" + tok + "' is not an unsigned integer");
    }
  }
  if (out.empty()) throw ConfigError("--seeds must name at least one seed");
  return out;
}

std::vector<double> parse_double_list(const std::string& s, const char* flag) {
  std::vector<double> out;
  for (const std::string& tok : split_list(s)) {
    try {
      size_t pos = 0;
      out.push_back(std::stod(tok, &pos));
      if (pos != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ConfigError(std::string(flag) + " entry '" + tok + "' is not a number");
    }
  }
  if (out.empty()) throw ConfigError(std::string(flag) + " must name at least one value");
  return out;
}

std::vector<std::string> parse_algo_list(const std::string& s) {
  std::vector<std::string> out = split_list(s);
  for (const std::string& a : out) {
    bool known = false;
    for (const char* k : kAlgoNames) known = known || a == k;
    if (!known)
      throw ConfigError("unknown algorithm '" + a +
                        "' (expected beta-happo, gaussian-happo, beta-mappo, "
                        "or maddpg)");
  }
  if (out.empty()) throw ConfigError("--algo must name at least one algorithm");
  return out;
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n-1); 0 when n < 2
};

MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd r;
  if (xs.empty()) return r;
  for (double x : xs) r.mean += x;
  r.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - r.mean) * (x - r.mean);
    r.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return r;
}

int max_parallel() {
  const char* env = std::getenv("WDTN_MAX_PARALLEL");
  if (!env) return 1;
  const int v = std::atoi(env);
  return v < 1 ? 1 : v;
}

// Runs independent jobs with at most WDTN_MAX_PARALLEL worker threads; the
// first captured exception is rethrown after all workers finish.
void run_jobs(std::vector<std::function<void()>>& jobs) {
  const int workers = std::min<int>(max_parallel(), static_cast<int>(jobs.size()));
  if (workers <= 1) {
    for (auto& j : jobs) j();
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::exception_ptr> errs(jobs.size());
  auto worker = [&] {
    for (size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1)) {
      try {
        jobs[i]();
      } catch (...) {
        errs[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
}

// ---------------------------------------------------------------------------
// Training runs and summaries
// ---------------------------------------------------------------------------

struct RunOut {
  TrainRunResult res;
  double wall_s = 0.0;
  fs::path csv_path;
  fs::path ckpt_path;
};

// One full training run; writes train_<algo>_seed<k>.csv and the final
// checkpoint into out_dir.
RunOut do_run(const ScenarioConfig& scn, TrainConfig tc, const std::string& algo,
              std::uint64_t seed, const fs::path& out_dir) {
  tc.algo = algo;
  const std::string stem = "train_" + algo + "_seed" + std::to_string(seed);
  RunOut r;
  r.csv_path = out_dir / (stem + ".csv");
  r.ckpt_path = out_dir / (stem + ".ckpt");
  std::ostringstream csv;
  const auto t0 = std::chrono::steady_clock::now();
  r.res = train_run(scn, tc, seed, &csv, r.ckpt_path.string());
  r.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                 .count();
  atomic_write(r.csv_path, csv.str());
  return r;
}

// Rebuilds the trainer exactly as train_run constructs it, restores the final
// checkpoint, and evaluates the deterministic policy on fresh fixed episodes.
EvalMetrics eval_from_checkpoint(const ScenarioConfig& scn, const TrainConfig& tc,
                                 const std::string& algo, std::uint64_t run_seed,
                                 const fs::path& ckpt, int episodes) {
  const std::uint64_t eval_seed = child_seed(run_seed, "sweep-eval");
  const std::uint64_t init_seed = child_seed(run_seed, "trainer");
  if (algo == "maddpg") {
    MaddpgOptions opt;
    opt.hidden = tc.hidden;
    MaddpgTrainer t(agent_specs(scn), global_state_dim(scn), opt, init_seed);
    load_into(t, ckpt.string());
    return evaluate_policy(t, scn, eval_seed, episodes);
  }
  PgOptions opt;
  opt.hidden = tc.hidden;
  opt.log_std_init = tc.log_std_init;
  const PgTrainer::Mode mode = algo == "beta-mappo" ? PgTrainer::Mode::Shared
                                                    : PgTrainer::Mode::Sequential;
  const HeadKind head = algo == "gaussian-happo" ? HeadKind::Gauss : HeadKind::Beta;
  PgTrainer t(scn, mode, head, opt, init_seed);
  load_into(t, ckpt.string());
  return evaluate_policy(t, scn, eval_seed, episodes);
}

// Per-algorithm mean/std across seeds at every evaluation step.
std::string summarize_runs(const std::vector<const TrainRunResult*>& runs) {
  size_t n_points = runs.empty() ? 0 : runs[0]->points.size();
  for (const TrainRunResult* r : runs) n_points = std::min(n_points, r->points.size());
  std::ostringstream out;
  out << "step,energy_mean,energy_std,failratio_mean,failratio_std,"
         "reward_mean,reward_std\n";
  for (size_t p = 0; p < n_points; ++p) {
    std::vector<double> e, f, w;
    for (const TrainRunResult* r : runs) {
      e.push_back(r->points[p].avg_energy);
      f.push_back(r->points[p].fail_ratio);
      w.push_back(r->points[p].reward);
    }
    const MeanStd me = mean_std(e), mf = mean_std(f), mw = mean_std(w);
    out << runs[0]->points[p].step << ',' << num(me.mean) << ',' << num(me.std)
        << ',' << num(mf.mean) << ',' << num(mf.std) << ',' << num(mw.mean)
        << ',' << num(mw.std) << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

int cmd_train(const ScenarioConfig& scn, const TrainConfig& tc,
              const std::vector<std::string>& algos,
              const std::vector<std::uint64_t>& seeds, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  struct Slot {
    std::string algo;
    std::uint64_t seed = 0;
    RunOut out;
  };
  std::vector<Slot> slots;
  for (const std::string& a : algos)
    for (std::uint64_t s : seeds) slots.push_back({a, s, {}});

  std::vector<std::function<void()>> jobs;
  for (Slot& sl : slots)
    jobs.push_back([&sl, &scn, &tc, &out_dir] {
      sl.out = do_run(scn, tc, sl.algo, sl.seed, out_dir);
    });
  run_jobs(jobs);

  for (const Slot& sl : slots) {
    const EvalPoint& last = sl.out.res.points.back();
    std::cout << "train " << sl.algo << " seed " << sl.seed
              << ": final energy " << num(last.avg_energy) << " J/MU/slot, "
              << "failure ratio " << num(last.fail_ratio) << ", wall "
              << num(sl.out.wall_s) << " s -> " << sl.out.csv_path.string()
              << "\n";
  }
  for (const std::string& a : algos) {
    std::vector<const TrainRunResult*> runs;
    for (const Slot& sl : slots)
      if (sl.algo == a) runs.push_back(&sl.out.res);
    const fs::path p = out_dir / ("summary_" + a + ".csv");
    atomic_write(p, summarize_runs(runs));
    std::cout << "wrote " << p.string() << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// sweeps
// ---------------------------------------------------------------------------

struct SweepPoint {
  double value = 0.0;      // eta or n_mus
  bool evaluated = false;  // false only for the n_mus=0 guard row
  MeanStd energy, fail;
};

// Trains per (value, seed) with the given scenario mutation, then evaluates
// 100 fixed episodes from the final checkpoint. Returns one row per value.
std::vector<SweepPoint> run_sweep(
    const ScenarioConfig& base, const TrainConfig& tc, const std::string& algo,
    const std::vector<std::uint64_t>& seeds, const fs::path& out_dir,
    const std::vector<double>& values, const std::string& dir_prefix,
    const std::function<void(ScenarioConfig&, double)>& apply,
    int eval_episodes) {
  struct Cell {
    ScenarioConfig scn;
    std::uint64_t seed = 0;
    fs::path dir;
    EvalMetrics m;
  };
  std::vector<SweepPoint> rows;
  std::vector<std::vector<Cell>> cells;  // [value][seed]
  for (double v : values) {
    SweepPoint row;
    row.value = v;
    rows.push_back(row);
    std::vector<Cell> per_seed;
    if (dir_prefix == "mus" && static_cast<int>(v) == 0) {
      cells.push_back(per_seed);  // guard row: nothing to run
      continue;
    }
    for (std::uint64_t s : seeds) {
      Cell c;
      c.scn = base;
      apply(c.scn, v);
      c.seed = s;
      std::ostringstream name;
      name << dir_prefix << '_' << num(v);
      c.dir = out_dir / name.str();
      per_seed.push_back(c);
    }
    cells.push_back(per_seed);
  }

  std::vector<std::function<void()>> jobs;
  for (auto& per_seed : cells)
    for (Cell& c : per_seed)
      jobs.push_back([&c, &tc, &algo, eval_episodes] {
        fs::create_directories(c.dir);
        const RunOut r = do_run(c.scn, tc, algo, c.seed, c.dir);
        c.m = eval_from_checkpoint(c.scn, tc, algo, c.seed, r.ckpt_path,
                                   eval_episodes);
      });
  run_jobs(jobs);

  for (size_t i = 0; i < rows.size(); ++i) {
    if (cells[i].empty()) continue;  // guard row keeps defaults
    std::vector<double> e, f;
    for (const Cell& c : cells[i]) {
      e.push_back(c.m.avg_energy);
      f.push_back(c.m.fail_ratio);
    }
    rows[i].energy = mean_std(e);
    rows[i].fail = mean_std(f);
    rows[i].evaluated = true;
  }
  return rows;
}

// Monotone-trend verdict over adjacent pairs of a sweep table. `increasing`
// states the expected direction; one adjacent violation is tolerated when it
// stays within one standard deviation of the larger of the two points.
std::string trend_verdict(const std::vector<SweepPoint>& rows, bool energy_col,
                          bool increasing, const std::string& label) {
  int violations = 0;
  bool within_std = true;
  for (size_t i = 0; i + 1 < rows.size(); ++i) {
    if (!rows[i].evaluated || !rows[i + 1].evaluated) continue;
    const MeanStd& a = energy_col ? rows[i].energy : rows[i].fail;
    const MeanStd& b = energy_col ? rows[i + 1].energy : rows[i + 1].fail;
    const double delta = increasing ? a.mean - b.mean : b.mean - a.mean;
    if (delta > 0.0) {  // wrong direction
      ++violations;
      if (delta > std::max(a.std, b.std)) within_std = false;
    }
  }
  std::ostringstream out;
  out << label << ": ";
  if (violations == 0)
    out << "PASS (0 violations)";
  else if (violations == 1 && within_std)
    out << "PASS (1 adjacent violation within 1 std)";
  else
    out << "FAIL (" << violations << " adjacent violations"
        << (within_std ? "" : ", exceeding 1 std") << ")";
  return out.str();
}

int cmd_sweep_eta(const ScenarioConfig& scn, const TrainConfig& tc,
                  const std::string& algo,
                  const std::vector<std::uint64_t>& seeds,
                  const fs::path& out_dir, std::vector<double> values) {
  for (double v : values)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw ConfigError("--values: reward weights must be finite and >= 0");
  std::sort(values.begin(), values.end());
  fs::create_directories(out_dir);

  const std::vector<SweepPoint> rows = run_sweep(
      scn, tc, algo, seeds, out_dir, values, "eta",
      [](ScenarioConfig& c, double v) { c.eta = v; }, 100);

  std::ostringstream table;
  table << "eta,energy_mean,energy_std,failratio_mean,failratio_std\n";
  for (const SweepPoint& r : rows)
    table << num(r.value) << ',' << num(r.energy.mean) << ','
          << num(r.energy.std) << ',' << num(r.fail.mean) << ','
          << num(r.fail.std) << '\n';
  atomic_write(out_dir / "sweep_eta.csv", table.str());
  std::cout << table.str();

  const std::string verdict =
      trend_verdict(rows, true, true, "energy non-decreasing in eta") + "\n" +
      trend_verdict(rows, false, false, "failure non-increasing in eta") + "\n";
  atomic_write(out_dir / "sweep_eta_trend.txt", verdict);
  std::cout << verdict << "wrote " << (out_dir / "sweep_eta.csv").string()
            << "\n";
  return 0;
}

// Worst-case concurrent-compute arithmetic: one request costs
// sync_data_size*cycles_per_bit cycles; a server can finish k concurrent
// requests within the deadline iff k <= capacity*deadline / cost. Halving the
// budget leaves the other half of the deadline for uploads, giving a load
// that is under-loaded no matter how twins are hosted.
struct CapacityReport {
  double request_cycles = 0.0;
  double deadline_cycles = 0.0;
  long k_fit = 0;       // concurrent requests whose compute alone fits
  long k_provable = 0;  // ... using at most half the deadline
};

CapacityReport capacity_report(const ScenarioConfig& scn) {
  CapacityReport r;
  r.request_cycles = scn.sync_data_size * scn.cycles_per_bit;
  r.deadline_cycles = scn.server_capacity * scn.latency_deadline;
  r.k_fit = static_cast<long>(r.deadline_cycles / r.request_cycles);
  r.k_provable = static_cast<long>(0.5 * r.deadline_cycles / r.request_cycles);
  return r;
}

std::string classify_load(const CapacityReport& cap, int n, int n_bss) {
  if (n == 0) return "empty";
  const long balanced = (n + n_bss - 1) / n_bss;  // ceil(n / n_bss)
  if (n <= cap.k_provable) return "provably-underloaded";
  if (balanced <= cap.k_provable) return "underloaded-balanced";
  if (balanced <= cap.k_fit) return "tight";
  return "overloaded";
}

int cmd_sweep_mus(const ScenarioConfig& scn, const TrainConfig& tc,
                  const std::string& algo,
                  const std::vector<std::uint64_t>& seeds,
                  const fs::path& out_dir, std::vector<double> values) {
  for (double v : values)
    if (v < 0.0 || v != std::floor(v))
      throw ConfigError("--values: MU counts must be non-negative integers");
  std::sort(values.begin(), values.end());
  fs::create_directories(out_dir);

  const CapacityReport cap = capacity_report(scn);
  std::ostringstream capout;
  capout << "capacity arithmetic: one request needs " << num(cap.request_cycles)
         << " cycles; one server finishes " << cap.k_fit
         << " concurrent requests within the " << num(scn.latency_deadline)
         << " s deadline (" << num(cap.deadline_cycles) << " cycles), "
         << cap.k_provable << " when half the deadline is reserved for uploads\n";
  for (double v : values) {
    const int n = static_cast<int>(v);
    capout << "  n_mus=" << n << ": " << classify_load(cap, n, scn.n_bss)
           << "\n";
  }
  atomic_write(out_dir / "sweep_mus_capacity.txt", capout.str());
  std::cout << capout.str();

  const std::vector<SweepPoint> rows = run_sweep(
      scn, tc, algo, seeds, out_dir, values, "mus",
      [](ScenarioConfig& c, double v) { c.n_mus = static_cast<int>(v); }, 100);

  std::ostringstream table;
  table << "n_mus,energy_mean,energy_std,failratio_mean,failratio_std\n";
  for (const SweepPoint& r : rows) {
    table << static_cast<int>(r.value) << ',';
    if (r.evaluated)
      table << num(r.energy.mean) << ',' << num(r.energy.std) << ','
            << num(r.fail.mean) << ',' << num(r.fail.std) << '\n';
    else  // no MUs: zero energy by definition, failure ratio undefined
      table << "0,0,NA,NA\n";
  }
  atomic_write(out_dir / "sweep_mus.csv", table.str());
  std::cout << table.str() << "wrote " << (out_dir / "sweep_mus.csv").string()
            << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// plotdata
// ---------------------------------------------------------------------------

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  int col(const std::string& name) const {
    for (size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  }
};

bool read_csv(const fs::path& path, CsvTable& out) {
  std::ifstream f(path);
  if (!f) return false;
  std::string line;
  bool first = true;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
      if (c == ',') {
        fields.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    fields.push_back(cur);
    if (first) {
      out.header = fields;
      first = false;
    } else {
      out.rows.push_back(fields);
    }
  }
  return !out.header.empty();
}

using Series = std::pair<std::string, std::vector<std::pair<double, double>>>;

// Minimal self-contained line chart: one linear y axis, one polyline with
// point markers per series, four ticks per axis, legend down the right edge.
std::string svg_chart(const std::string& title, const std::string& x_label,
                      const std::string& y_label,
                      const std::vector<Series>& series) {
  const double W = 760, H = 440;
  const double L = 80, R = 620, T = 48, B = 384;  // plot rectangle
  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                   "#9467bd", "#ff7f0e", "#8c564b"};
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  bool any = false;
  for (const Series& s : series)
    for (const auto& [x, y] : s.second) {
      if (!any) {
        xmin = xmax = x;
        ymin = ymax = y;
        any = true;
      }
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  if (xmax - xmin < 1e-12) {
    xmin -= 1.0;
    xmax += 1.0;
  }
  if (ymax - ymin < 1e-12) {
    ymin -= 1.0;
    ymax += 1.0;
  }
  const double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;
  auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (R - L); };
  auto py = [&](double y) { return B - (y - ymin) / (ymax - ymin) * (B - T); };
  auto fmt = [](double v) {
    char b[32];
    std::snprintf(b, sizeof(b), "%.4g", v);
    return std::string(b);
  };
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
    << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << ' ' << H
    << "\" font-family=\"sans-serif\">\n"
    << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n"
    << "<text x=\"" << (L + R) / 2 << "\" y=\"24\" text-anchor=\"middle\" "
       "font-size=\"15\">"
    << title << "</text>\n";
  // axes and ticks
  s << "<line x1=\"" << L << "\" y1=\"" << B << "\" x2=\"" << R << "\" y2=\""
    << B << "\" stroke=\"black\"/>\n"
    << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\""
    << B << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 3; ++t) {
    const double fx = xmin + (xmax - xmin) * t / 3.0;
    const double fy = ymin + (ymax - ymin) * t / 3.0;
    s << "<text x=\"" << px(fx) << "\" y=\"" << B + 18
      << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt(fx)
      << "</text>\n"
      << "<text x=\"" << L - 8 << "\" y=\"" << py(fy) + 4
      << "\" text-anchor=\"end\" font-size=\"11\">" << fmt(fy) << "</text>\n"
      << "<line x1=\"" << L << "\" y1=\"" << py(fy) << "\" x2=\"" << R
      << "\" y2=\"" << py(fy)
      << "\" stroke=\"#dddddd\" stroke-width=\"0.5\"/>\n";
  }
  s << "<text x=\"" << (L + R) / 2 << "\" y=\"" << B + 38
    << "\" text-anchor=\"middle\" font-size=\"12\">" << x_label << "</text>\n"
    << "<text x=\"20\" y=\"" << (T + B) / 2
    << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 20 "
    << (T + B) / 2 << ")\">" << y_label << "</text>\n";
  for (size_t i = 0; i < series.size(); ++i) {
    const char* color = kPalette[i % 6];
    s << "<polyline fill=\"none\" stroke=\"" << color
      << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : series[i].second)
      s << px(x) << ',' << py(y) << ' ';
    s << "\"/>\n";
    for (const auto& [x, y] : series[i].second)
      s << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y)
        << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
    const double ly = T + 16 + 18 * static_cast<double>(i);
    s << "<rect x=\"" << R + 12 << "\" y=\"" << ly - 9
      << "\" width=\"12\" height=\"12\" fill=\"" << color << "\"/>\n"
      << "<text x=\"" << R + 30 << "\" y=\"" << ly + 2
      << "\" font-size=\"11\">" << series[i].first << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

int cmd_plotdata(const fs::path& dir) {
  std::vector<std::string> warnings;
  int written = 0;

  // Figure A: evaluated energy vs training step, one series per algorithm.
  {
    std::ostringstream out;
    out << "step,algorithm,energy_mean,energy_std\n";
    std::vector<Series> series;
    bool got = false;
    for (const char* algo : kAlgoNames) {
      CsvTable t;
      if (!read_csv(dir / ("summary_" + std::string(algo) + ".csv"), t)) {
        warnings.push_back("missing summary_" + std::string(algo) +
                           ".csv (train --algo " + algo + ")");
        continue;
      }
      got = true;
      const int cs = t.col("step"), ce = t.col("energy_mean"),
                cd = t.col("energy_std");
      Series ser{algo, {}};
      for (const auto& row : t.rows) {
        out << row[cs] << ',' << algo << ',' << row[ce] << ',' << row[cd]
            << '\n';
        ser.second.emplace_back(std::stod(row[cs]), std::stod(row[ce]));
      }
      series.push_back(std::move(ser));
    }
    if (got) {
      atomic_write(dir / "fig3a.csv", out.str());
      atomic_write(dir / "fig3a.svg",
                   svg_chart("Evaluated energy vs training step",
                             "environment steps", "energy (J/MU/slot)",
                             series));
      std::cout << "wrote " << (dir / "fig3a.csv").string() << " and .svg\n";
      ++written;
    }
  }

  // Figure B: energy and failure ratio vs reward weight.
  {
    CsvTable t;
    if (read_csv(dir / "sweep_eta.csv", t)) {
      std::ostringstream out;
      out << "eta,energy_mean,energy_std,failratio_mean,failratio_std\n";
      Series se{"energy", {}};
      for (const auto& row : t.rows) {
        out << row[0] << ',' << row[1] << ',' << row[2] << ',' << row[3] << ','
            << row[4] << '\n';
        se.second.emplace_back(std::stod(row[0]), std::stod(row[1]));
      }
      atomic_write(dir / "fig3b.csv", out.str());
      atomic_write(dir / "fig3b.svg",
                   svg_chart("Energy vs reliability weight", "reward weight",
                             "energy (J/MU/slot)", {se}));
      std::cout << "wrote " << (dir / "fig3b.csv").string() << " and .svg\n";
      ++written;
    } else {
      warnings.push_back("missing sweep_eta.csv (sweep-eta)");
    }
  }

  // Figures C and D: energy / failure ratio vs MU count.
  {
    CsvTable t;
    if (read_csv(dir / "sweep_mus.csv", t)) {
      std::ostringstream oc, od;
      oc << "n_mus,energy_mean,energy_std\n";
      od << "n_mus,failratio_mean,failratio_std\n";
      Series se{"energy", {}}, sf{"failure ratio", {}};
      for (const auto& row : t.rows) {
        oc << row[0] << ',' << row[1] << ',' << row[2] << '\n';
        od << row[0] << ',' << row[3] << ',' << row[4] << '\n';
        se.second.emplace_back(std::stod(row[0]), std::stod(row[1]));
        if (row[3] != "NA")
          sf.second.emplace_back(std::stod(row[0]), std::stod(row[3]));
      }
      atomic_write(dir / "fig3c.csv", oc.str());
      atomic_write(dir / "fig3c.svg",
                   svg_chart("Energy vs MU count", "MUs", "energy (J/MU/slot)",
                             {se}));
      atomic_write(dir / "fig3d.csv", od.str());
      atomic_write(dir / "fig3d.svg",
                   svg_chart("Failure ratio vs MU count", "MUs",
                             "failure ratio", {sf}));
      std::cout << "wrote " << (dir / "fig3c.csv").string() << ", "
                << (dir / "fig3d.csv").string() << " and .svg files\n";
      written += 2;
    } else {
      warnings.push_back("missing sweep_mus.csv (sweep-mus)");
    }
  }

  for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
  if (written == 0)
    std::cerr << "warning: no figure inputs found in " << dir.string() << "\n";
  return 0;
}

}  // namespace

// ---------------------------------------------------------------------------
// entry point
// ---------------------------------------------------------------------------

int main(int argc, char** argv) {
  CLI::App app{"wireless digital-twin network: training and experiment harness"};
  app.require_subcommand(1);

  std::string config_path, algo_arg = "beta-happo", seeds_arg = "1,2,3";
  std::string out_arg = "runs", train_config_path, values_arg;
  bool grad_only = false;

  CLI::App* train = app.add_subcommand(
      "train", "train one run per (algorithm, seed) and summarize");
  CLI::App* sweep_eta = app.add_subcommand(
      "sweep-eta", "train per reward weight and tabulate final metrics");
  CLI::App* sweep_mus = app.add_subcommand(
      "sweep-mus", "train per MU count and tabulate final metrics");
  CLI::App* verify = app.add_subcommand(
      "verify", "run the oracle and property suites in-process");
  CLI::App* plotdata = app.add_subcommand(
      "plotdata", "distill a run directory into per-figure CSV/SVG files");

  for (CLI::App* c : {train, sweep_eta, sweep_mus}) {
    c->add_option("--config", config_path, "scenario JSON file")->required();
    c->add_option("--algo", algo_arg,
                  "algorithm (train accepts a comma-separated list)");
    c->add_option("--seeds", seeds_arg, "comma-separated run seeds");
    c->add_option("--out", out_arg, "output directory");
    c->add_option("--train-config", train_config_path,
                  "training hyper-parameter JSON file");
  }
  sweep_eta->add_option("--values", values_arg,
                        "comma-separated reward weights (default 0.7,0.9,1.1,1.3)");
  sweep_mus->add_option("--values", values_arg,
                        "comma-separated MU counts (default 0,2,8,16)");
  verify->add_flag("--grad-only", grad_only,
                   "run only the gradient-vs-finite-difference checks");
  plotdata->add_option("--out", out_arg, "run directory to read and write");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (verify->parsed()) return run_verify(grad_only);
    if (plotdata->parsed()) return cmd_plotdata(fs::path(out_arg));

    const ScenarioConfig scn = load_scenario_file(config_path);
    validate(scn);
    TrainConfig tc;
    if (!train_config_path.empty()) tc = load_train_file(train_config_path);
    const std::vector<std::uint64_t> seeds = parse_seed_list(seeds_arg);
    const fs::path out_dir(out_arg);

    if (train->parsed()) {
      return cmd_train(scn, tc, parse_algo_list(algo_arg), seeds, out_dir);
    }
    const std::vector<std::string> algos = parse_algo_list(algo_arg);
    if (algos.size() != 1)
      throw ConfigError("sweeps take exactly one --algo");
    if (sweep_eta->parsed()) {
      std::vector<double> values =
          values_arg.empty() ? std::vector<double>{0.7, 0.9, 1.1, 1.3}
                             : parse_double_list(values_arg, "--values");
      return cmd_sweep_eta(scn, tc, algos[0], seeds, out_dir, values);
    }
    std::vector<double> values =
        values_arg.empty() ? std::vector<double>{0, 2, 8, 16}
                           : parse_double_list(values_arg, "--values");
    return cmd_sweep_mus(scn, tc, algos[0], seeds, out_dir, values);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const CheckpointError& e) {
    std::cerr << "checkpoint error: " << e.what() << "\n";
    return 3;
  } catch (const TrainAbort& e) {
    std::cerr << "runtime abort: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
