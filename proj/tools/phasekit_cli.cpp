#include <cstdio>
#include <exception>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "phasekit/data.hpp"
#include "phasekit/experiment.hpp"
#include "phasekit/generator.hpp"
#include "phasekit/metrics.hpp"

namespace {

struct GridOptions {
  std::string config_path;
  std::map<std::string, std::string> values;
  std::vector<std::pair<std::string, CLI::Option *>> options;
};

// Every experiment setting is exposed as --<key> with dashes; values stay
// strings until apply_setting parses them, so a config file and the command
// line go through the same code path.
void add_grid_options(CLI::App &cmd, GridOptions &opts) {
  cmd.add_option("--config", opts.config_path, "key=value file; command-line flags override it")
      ->check(CLI::ExistingFile);
  const std::vector<std::pair<std::string, std::string>> keys = {
      {"dataset", "mnist, shepplogan or generator"},
      {"mnist-images", "IDX image file (optionally gzipped)"},
      {"mnist-labels", "IDX label file"},
      {"algorithm", "WF, TWF, RK, DRGD or DeepInit"},
      {"sensing", "gaussian or diffraction"},
      {"rates", "comma-separated sampling rates m/n"},
      {"standoffs", "comma-separated modulator-to-scene distances in meters"},
      {"images", "number of ground-truth images"},
      {"seed", "master seed"},
      {"weights", "generator weight file, or 'synthetic'"},
      {"out-csv", "results CSV path"},
      {"dump-dir", "directory for reconstructed PGM images"},
      {"k-max", "classical / Kaczmarz iteration budget"},
      {"i-max", "DRGD iteration budget"},
      {"eta", "DRGD step size"},
      {"lambda", "TV regularization weight"},
      {"twf-lb", "TWF lower truncation threshold"},
      {"twf-ub", "TWF upper truncation threshold"},
      {"init", "classical initialization: spectral or random"},
      {"optimizer", "DRGD latent optimizer: adam or subgradient"},
      {"wavelength", "illumination wavelength in meters"},
      {"pixel-pitch", "pixel pitch in meters"},
      {"mask-density", "Bernoulli probability of an open mask pixel"},
      {"threads", "worker threads (0 = hardware concurrency)"},
  };
  for (const auto &[key, help] : keys) {
    auto *opt = cmd.add_option("--" + key, opts.values[key], help);
    opts.options.emplace_back(key, opt);
  }
}

phasekit::ExperimentConfig resolve(const GridOptions &opts) {
  phasekit::ExperimentConfig cfg;
  if (!opts.config_path.empty()) {
    phasekit::apply_config_file(cfg, opts.config_path);
  }
  for (const auto &[key, opt] : opts.options) {
    if (opt->count() > 0) {
      phasekit::apply_setting(cfg, key, opts.values.at(key));
    }
  }
  return cfg;
}

void report(const std::vector<phasekit::ResultRow> &rows, const phasekit::ExperimentConfig &cfg) {
  phasekit::write_csv(rows, cfg.out_csv);
  phasekit::write_resolved_config(cfg, cfg.out_csv + ".config");
  for (const auto &r : rows) {
    std::printf("%-12s rate=%-6g %s img=%zu ssim=%.4f psnr=%s err=%.3e t=%.2fs\n",
                r.algorithm.c_str(), r.sampling_rate,
                r.standoff_m ? ("d=" + std::to_string(*r.standoff_m)).c_str() : "",
                r.image_index, r.ssim, phasekit::format_psnr(r.psnr).c_str(),
                r.aligned_rel_error, r.wall_time_s);
  }
  std::printf("wrote %zu rows to %s\n", rows.size(), cfg.out_csv.c_str());
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"phasekit: phase retrieval experiments"};
  app.require_subcommand(1);

  GridOptions run_opts;
  auto *run = app.add_subcommand("run", "rate x image grid for one algorithm");
  add_grid_options(*run, run_opts);

  GridOptions sweep_opts;
  auto *sweep = app.add_subcommand("sweep", "stand-off x rate x image grid (diffraction sensing)");
  add_grid_options(*sweep, sweep_opts);

  GridOptions cmp_opts;
  auto *cmp = app.add_subcommand("compare-init", "spectral vs DRGD start for Kaczmarz");
  add_grid_options(*cmp, cmp_opts);

  std::string phantom_out = "shepplogan-images.idx";
  std::size_t phantom_count = 100;
  std::uint64_t phantom_seed = 0;
  auto *phantoms = app.add_subcommand("phantoms", "write randomized Shepp-Logan phantoms as IDX");
  phantoms->add_option("--out", phantom_out, "output IDX path");
  phantoms->add_option("--count", phantom_count, "number of phantoms");
  phantoms->add_option("--seed", phantom_seed, "phantom seed");

  std::string synth_out = "synthetic.dgpr";
  auto *synth = app.add_subcommand("export-synthetic", "write the built-in generator as DGPR");
  synth->add_option("--out", synth_out, "output weight file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const auto cfg = resolve(run_opts);
      report(phasekit::run_experiment(cfg), cfg);
    } else if (*sweep) {
      auto cfg = resolve(sweep_opts);
      if (sweep_opts.values["sensing"].empty() && cfg.sensing == phasekit::SensingModel::Gaussian) {
        cfg.sensing = phasekit::SensingModel::Diffraction;
      }
      report(phasekit::run_standoff_sweep(cfg), cfg);
    } else if (*cmp) {
      const auto cfg = resolve(cmp_opts);
      report(phasekit::compare_initializations(cfg), cfg);
    } else if (*phantoms) {
      phasekit::PhantomSpec spec;
      spec.seed = phantom_seed;
      phasekit::save_idx(phasekit::synthesize_shepp_logan(spec, phantom_count), phantom_out);
      std::printf("wrote %zu phantoms to %s\n", phantom_count, phantom_out.c_str());
    } else if (*synth) {
      phasekit::save_generator(phasekit::synthetic_generator(), synth_out);
      std::printf("wrote %s\n", synth_out.c_str());
    }
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
