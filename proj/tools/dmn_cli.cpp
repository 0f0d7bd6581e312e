// Command-line front end: dataset generation, training, evaluation,
// online simulation, treemap export, microstructure generation and a
// timing sweep. Exit codes: 0 ok, 2 config error, 3 numerical failure,
// 4 I/O error.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "dmn/compression.hpp"
#include "dmn/errors.hpp"
#include "dmn/network.hpp"
#include "dmn/online_solver.hpp"
#include "dmn/oracle.hpp"
#include "dmn/sampling.hpp"
#include "dmn/trainer.hpp"
#include "dmn/treemap.hpp"

namespace {

using namespace dmn;

constexpr int kOk = 0, kConfigError = 2, kNumericalError = 3, kIoError = 4;

void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot open " + tmp + " for writing");
    out << content;
    if (!out) throw Error("write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error("rename to " + path + " failed: " + ec.message());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

LoadPath path_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad path json: ") + e.what());
  }
  LoadPath p;
  p.finite = j.value("finite", false);
  if (!j.contains("steps") || !j["steps"].is_array())
    throw FormatError("path json needs a steps array");
  const int nc = p.finite ? 4 : 3;
  for (const auto& js : j["steps"]) {
    if (!js.is_array() || int(js.size()) != nc)
      throw FormatError("each step needs " + std::to_string(nc) + " constraints");
    LoadStep step;
    for (int i = 0; i < nc; ++i) {
      const auto& jc = js[i];
      const std::string mode = jc.value("mode", "strain");
      if (mode != "strain" && mode != "stress") throw FormatError("constraint mode must be strain or stress");
      step.c[i].strain = (mode == "strain");
      step.c[i].target = jc.value("target", 0.0);
    }
    p.steps.push_back(step);
  }
  if (p.steps.empty()) throw FormatError("path has no steps");
  return p;
}

struct BenchRow {
  int n_active = 0;
  double seconds = 0;
};

MaterialNetwork net_with_active(int depth, int n_active, std::uint64_t seed) {
  MaterialNetwork net = init_random(depth, seed);
  for (int j = 0; j < net.n_leaves(); ++j)
    net.z[j] = (j < n_active) ? 0.5 + 0.5 * net.z[j] : -0.5;
  return net;
}

double time_path(const MaterialNetwork& net, const MaterialRegistry& reg) {
  SmallStrainSolver solver(net, reg.small.at("p1-hard"), reg.small.at("p2-plastic"));
  const auto t0 = std::chrono::steady_clock::now();
  solver.run_path(uniaxial_tension_path(25, 0.01));
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count();
}

void linear_fit(const std::vector<BenchRow>& rows, double& slope, double& intercept,
                double& r2) {
  const double n = double(rows.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& r : rows) {
    sx += r.n_active;
    sy += r.seconds;
    sxx += double(r.n_active) * r.n_active;
    sxy += r.n_active * r.seconds;
  }
  slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  intercept = (sy - slope * sx) / n;
  double ss_res = 0, ss_tot = 0;
  const double ybar = sy / n;
  for (const auto& r : rows) {
    const double fit = slope * r.n_active + intercept;
    ss_res += (r.seconds - fit) * (r.seconds - fit);
    ss_tot += (r.seconds - ybar) * (r.seconds - ybar);
  }
  r2 = (ss_tot > 0) ? 1.0 - ss_res / ss_tot : 1.0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical two-phase material network toolkit"};
  app.set_config("--config", "", "TOML-style config file; flags override file values");
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  int threads = 1;
  app.add_option("--seed", seed, "Root random seed")->capture_default_str();
  app.add_option("--threads", threads, "Worker thread count")->capture_default_str();

  // ------------------------------------------------------------- micro
  auto* c_micro = app.add_subcommand("micro", "Generate a pixel microstructure");
  std::string m_kind = "stripes", m_out = "micro.json";
  int m_n = 64, m_period = 8;
  double m_vf1 = 0.5;
  c_micro->add_option("--kind", m_kind, "stripes|checkerboard|inclusion|blobs")
      ->check(CLI::IsMember({"stripes", "checkerboard", "inclusion", "blobs"}))
      ->capture_default_str();
  c_micro->add_option("--n", m_n, "Grid side (power of two)")->capture_default_str();
  c_micro->add_option("--vf1", m_vf1, "Phase-1 volume fraction")->capture_default_str();
  c_micro->add_option("--period", m_period, "Checkerboard tile size")->capture_default_str();
  c_micro->add_option("--out", m_out, "Output file")->capture_default_str();

  // ---------------------------------------------------------- generate
  auto* c_gen = app.add_subcommand("generate", "Sample phase pairs and query an oracle");
  std::string g_oracle = "laminate", g_micro, g_train_out = "train.jsonl",
              g_valid_out = "valid.jsonl";
  double g_f1 = 0.5, g_theta = 0;
  int g_train = 200, g_valid = 100;
  c_gen->add_option("--oracle", g_oracle, "laminate|fft")
      ->check(CLI::IsMember({"laminate", "fft"}))
      ->capture_default_str();
  c_gen->add_option("--f1", g_f1, "Laminate phase-1 fraction")->capture_default_str();
  c_gen->add_option("--theta", g_theta, "Laminate rotation, radians")->capture_default_str();
  c_gen->add_option("--micro", g_micro, "Microstructure JSON (fft oracle)");
  c_gen->add_option("--train", g_train, "Training sample count")->capture_default_str();
  c_gen->add_option("--valid", g_valid, "Validation sample count")->capture_default_str();
  c_gen->add_option("--out-train", g_train_out, "Training output")->capture_default_str();
  c_gen->add_option("--out-valid", g_valid_out, "Validation output")->capture_default_str();

  // ------------------------------------------------------------- train
  auto* c_train = app.add_subcommand("train", "Fit a network to a dataset");
  std::string t_data = "train.jsonl", t_valid = "valid.jsonl", t_out = "net.json",
              t_history = "history.csv", t_resume;
  int t_depth = 5, t_batch = 20, t_realizations = 1;
  long t_epochs = 10000;
  double t_eta0 = 0.02, t_eta_min = -1, t_lambda = -1;
  int t_compress = 10;
  c_train->add_option("--data", t_data, "Training JSONL")->capture_default_str();
  c_train->add_option("--valid", t_valid, "Validation JSONL")->capture_default_str();
  c_train->add_option("--depth", t_depth, "Tree depth N")->capture_default_str();
  c_train->add_option("--epochs", t_epochs)->capture_default_str();
  c_train->add_option("--batch", t_batch, "Mini-batch size")->capture_default_str();
  c_train->add_option("--eta0", t_eta0, "Initial learning rate")->capture_default_str();
  c_train->add_option("--eta-min", t_eta_min, "Learning-rate floor (<0: eta0/100)")
      ->capture_default_str();
  c_train->add_option("--lambda", t_lambda, "Weight regularizer (<0: auto)")
      ->capture_default_str();
  c_train->add_option("--compress-every", t_compress, "Compression period, epochs (0: off)")
      ->capture_default_str();
  c_train->add_option("--realizations", t_realizations, "Independent runs, best kept")
      ->capture_default_str();
  c_train->add_option("--resume", t_resume, "Continue from a checkpoint");
  c_train->add_option("--out", t_out, "Checkpoint output")->capture_default_str();
  c_train->add_option("--history", t_history, "History CSV output")->capture_default_str();

  // -------------------------------------------------------------- eval
  auto* c_eval = app.add_subcommand("eval", "Per-sample error report");
  std::string e_net = "net.json", e_data = "valid.jsonl", e_out;
  c_eval->add_option("--net", e_net, "Checkpoint")->capture_default_str();
  c_eval->add_option("--data", e_data, "Dataset JSONL")->capture_default_str();
  c_eval->add_option("--out", e_out, "Report JSON (optional)");

  // ---------------------------------------------------------- simulate
  auto* c_sim = app.add_subcommand("simulate", "Run an online load path");
  std::string s_net = "net.json", s_phase1 = "p1-hard", s_phase2 = "p2-plastic",
              s_path = "uniaxial-tension", s_out = "response.csv";
  int s_steps = 25;
  double s_to = 0.01;
  c_sim->add_option("--net", s_net, "Checkpoint")->capture_default_str();
  c_sim->add_option("--phase1", s_phase1, "Material for phase 1")->capture_default_str();
  c_sim->add_option("--phase2", s_phase2, "Material for phase 2")->capture_default_str();
  c_sim->add_option("--path", s_path,
                    "uniaxial-tension|loading-unloading|finite-uniaxial|<file.json>")
      ->capture_default_str();
  c_sim->add_option("--steps", s_steps, "Steps for built-in paths")->capture_default_str();
  c_sim->add_option("--to", s_to, "Final eps11 or F11 for built-in paths")
      ->capture_default_str();
  c_sim->add_option("--out", s_out, "Response CSV")->capture_default_str();

  // ----------------------------------------------------------- treemap
  auto* c_tree = app.add_subcommand("treemap", "Render leaf weights as nested rectangles");
  std::string r_net = "net.json", r_svg, r_json;
  c_tree->add_option("--net", r_net, "Checkpoint")->capture_default_str();
  c_tree->add_option("--svg", r_svg, "SVG output (optional)");
  c_tree->add_option("--json", r_json, "JSON output (optional)");

  // ------------------------------------------------------------- bench
  auto* c_bench = app.add_subcommand("bench", "Wall time of the online solver vs leaf count");
  std::string b_out;
  c_bench->add_option("--out", b_out, "Table CSV (optional)");

  for (CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; }))
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (*c_micro) {
      PixelMicrostructure m;
      if (m_kind == "stripes") m = stripes_micro(m_n, m_vf1);
      else if (m_kind == "checkerboard") m = checkerboard_micro(m_n, m_period);
      else if (m_kind == "inclusion") m = inclusion_micro(m_n, 1.0 - m_vf1);
      else m = blob_micro(m_n, m_vf1, seed);
      atomic_write(m_out, micro_to_json(m) + "\n");
      std::cout << m_out << ": " << m.label << " " << m.n << "x" << m.n
                << " vf1=" << m.vf1() << "\n";
      return kOk;
    }

    if (*c_gen) {
      HomogenizationOracle oracle;
      std::string micro_label = "laminate";
      PixelMicrostructure micro;
      if (g_oracle == "laminate") {
        oracle = [g_f1, g_theta](const Mat3& d1, const Mat3& d2) {
          return laminate_exact(d1, d2, g_f1, g_theta);
        };
      } else {
        if (g_micro.empty()) throw CLI::ValidationError("--micro is required for the fft oracle");
        micro = load_micro(g_micro);
        micro_label = micro.label;
        oracle = [&micro](const Mat3& d1, const Mat3& d2) {
          return fft_homogenize(micro, d1, d2);
        };
      }
      auto [train_ds, valid_ds] = build_dataset(oracle, g_train, g_valid, seed);
      train_ds.oracle = valid_ds.oracle = g_oracle;
      train_ds.microstructure = valid_ds.microstructure = micro_label;
      atomic_write(g_train_out, dataset_to_jsonl(train_ds));
      atomic_write(g_valid_out, dataset_to_jsonl(valid_ds));
      std::cout << g_train_out << ": " << train_ds.samples.size() << " samples\n"
                << g_valid_out << ": " << valid_ds.samples.size() << " samples\n";
      return kOk;
    }

    if (*c_train) {
      const Dataset train_ds = load_dataset(t_data);
      const Dataset valid_ds = load_dataset(t_valid);
      TrainerConfig cfg;
      cfg.batch_size = t_batch;
      cfg.epochs = t_epochs;
      cfg.lambda = t_lambda;
      cfg.eta0 = t_eta0;
      cfg.eta_min = t_eta_min;
      cfg.compression_period = t_compress;
      cfg.threads = threads;

      MaterialNetwork best;
      TrainingHistory best_hist;
      double best_score = -1;
      for (int r = 0; r < t_realizations; ++r) {
        cfg.seed = seed + std::uint64_t(r);
        MaterialNetwork net = t_resume.empty() ? init_random(t_depth, cfg.seed)
                                               : load_file(t_resume);
        auto [trained, hist] = train(std::move(net), train_ds.samples, valid_ds.samples, cfg);
        const double score = hist.best_valid_error;
        std::cout << "realization " << r << ": best validation error " << score << " (epoch "
                  << hist.best_epoch << ", active " << count_active(trained) << ")\n";
        if (best_score < 0 || score < best_score) {
          best_score = score;
          best = std::move(trained);
          best_hist = std::move(hist);
        }
      }
      save_file(best, t_out);
      atomic_write(t_history, best_hist.to_csv());
      std::cout << t_out << ": kept validation error " << best_score << "\n";
      return kOk;
    }

    if (*c_eval) {
      const MaterialNetwork net = load_file(e_net);
      const Dataset ds = load_dataset(e_data);
      std::vector<double> errs;
      errs.reserve(ds.samples.size());
      double mean = 0, mx = 0;
      for (const auto& s : ds.samples) {
        const double e = sample_error(net, s);
        errs.push_back(e);
        mean += e;
        mx = std::max(mx, e);
      }
      mean /= double(ds.samples.size());
      // decade histogram of relative errors, 1e-6 .. 1
      std::array<int, 7> hist{};
      for (double e : errs) {
        int bin = (e <= 1e-6) ? 0 : int(std::floor(std::log10(e))) + 7;
        hist[std::size_t(std::clamp(bin, 0, 6))]++;
      }
      std::cout << "samples " << errs.size() << " mean " << mean << " max " << mx << "\n";
      if (!e_out.empty()) {
        nlohmann::json j;
        j["mean"] = mean;
        j["max"] = mx;
        j["errors"] = errs;
        j["decade_histogram"] = hist;
        atomic_write(e_out, j.dump(2) + "\n");
      }
      return kOk;
    }

    if (*c_sim) {
      const MaterialNetwork net = load_file(s_net);
      const MaterialRegistry reg = make_reference_materials();
      LoadPath path;
      if (s_path == "uniaxial-tension") path = uniaxial_tension_path(s_steps, s_to);
      else if (s_path == "loading-unloading") path = loading_unloading_path(s_steps, s_to);
      else if (s_path == "finite-uniaxial") path = finite_uniaxial_path(s_steps, s_to);
      else path = path_from_json(read_file(s_path));

      PathResult res;
      if (path.finite) {
        if (!reg.finite.count(s_phase1) || !reg.finite.count(s_phase2))
          throw CLI::ValidationError("unknown finite-strain material name");
        FiniteStrainSolver solver(net, reg.finite.at(s_phase1), reg.finite.at(s_phase2));
        res = solver.run_path(path, true);
      } else {
        if (!reg.small.count(s_phase1) || !reg.small.count(s_phase2))
          throw CLI::ValidationError("unknown small-strain material name");
        SmallStrainSolver solver(net, reg.small.at(s_phase1), reg.small.at(s_phase2));
        res = solver.run_path(path);
      }
      atomic_write(s_out, res.to_csv());
      std::cout << s_out << ": " << res.records.size() << " steps\n";
      return kOk;
    }

    if (*c_tree) {
      const MaterialNetwork net = load_file(r_net);
      const Treemap tm = to_treemap(net);
      if (!r_svg.empty()) atomic_write(r_svg, treemap_svg(tm));
      if (!r_json.empty()) atomic_write(r_json, treemap_json(tm));
      std::cout << "active " << count_active(net) << " vf1 " << phase_volume_fraction(net)
                << "\n";
      return kOk;
    }

    if (*c_bench) {
      const MaterialRegistry reg = make_reference_materials();
      std::vector<BenchRow> rows;
      for (int na : {8, 16, 32, 64, 128}) {
        const MaterialNetwork net = net_with_active(7, na, seed + std::uint64_t(na));
        time_path(net, reg);  // warm up
        double best = 1e300;
        for (int rep = 0; rep < 3; ++rep) best = std::min(best, time_path(net, reg));
        rows.push_back({na, best});
      }
      double slope, intercept, r2;
      linear_fit(rows, slope, intercept, r2);
      std::ostringstream csv;
      csv << "n_active,seconds\n";
      for (const auto& r : rows) {
        csv << r.n_active << "," << r.seconds << "\n";
        std::cout << "N_a " << r.n_active << ": " << r.seconds << " s\n";
      }
      std::cout << "fit: t = " << slope << " * N_a + " << intercept << ", R^2 = " << r2
                << "\n";
      if (!b_out.empty()) atomic_write(b_out, csv.str());
      return kOk;
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const NewtonDivergence& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumericalError;
  } catch (const NoConvergence& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumericalError;
  } catch (const OracleFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumericalError;
  } catch (const DeadNetwork& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumericalError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumericalError;
  }
  return kOk;
}
