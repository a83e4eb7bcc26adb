#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "phasekit/classical.hpp"
#include "phasekit/drgd.hpp"

namespace phasekit {

enum class DatasetKind { Mnist, SheppLogan, GeneratorSamples };
enum class Algorithm { WF, TWF, RK, DRGD, DeepInit };
enum class SensingModel { Gaussian, Diffraction };

/// Value passed as generator_weights to select the built-in synthetic generator.
inline constexpr const char *kSyntheticWeights = "synthetic";

struct ExperimentConfig {
  DatasetKind dataset = DatasetKind::SheppLogan;
  std::string mnist_images; ///< IDX image file for DatasetKind::Mnist
  std::string mnist_labels;
  Algorithm algorithm = Algorithm::DeepInit;
  SensingModel sensing = SensingModel::Gaussian;
  std::vector<double> sampling_rates{0.125, 0.25, 0.5, 1.0, 2.0, 4.0};
  /// Modulator-to-scene distances; a plain run uses the first entry.
  std::vector<double> standoffs{kDefaultStandoff};
  std::size_t num_images = 5;
  std::uint64_t seed = 0;
  std::string generator_weights; ///< path, kSyntheticWeights, or empty
  std::string out_csv = "results.csv";
  std::string dump_dir; ///< empty: no image dumps

  std::optional<std::size_t> k_max; ///< default depends on the algorithm
  std::size_t i_max = 200;
  double eta = 0.1;
  double lambda = 0.1;
  std::optional<double> twf_lb; ///< default depends on the sensing model
  std::optional<double> twf_ub;
  InitKind classical_init = InitKind::Spectral;
  LatentOptimizer optimizer = LatentOptimizer::Adam;
  double wavelength = 0.856e-3;
  double pixel_pitch = 0.5e-3;
  double mask_density = 0.5;
  std::size_t threads = 1;

  std::size_t resolved_k_max() const;
  double resolved_twf_lb() const;
  double resolved_twf_ub() const;
  bool needs_generator() const;

  void validate() const;
};

/// Applies one key=value setting (keys as written by resolved_settings).
/// Throws std::invalid_argument on unknown keys or malformed values.
void apply_setting(ExperimentConfig &cfg, const std::string &key, const std::string &value);

/// Reads a key=value file ('#' starts a comment) into cfg.
void apply_config_file(ExperimentConfig &cfg, const std::filesystem::path &path);

/// Every setting with defaults materialized, in a fixed order.
std::vector<std::pair<std::string, std::string>> resolved_settings(const ExperimentConfig &cfg);

void write_resolved_config(const ExperimentConfig &cfg, const std::filesystem::path &path);

/// Names used on the command line and in CSV output.
std::string to_string(DatasetKind d);
std::string to_string(Algorithm a);
std::string to_string(SensingModel s);

struct ResultRow {
  std::string dataset;
  std::string algorithm;
  double sampling_rate = 0.0;
  std::optional<double> standoff_m;
  std::size_t image_index = 0;
  std::uint64_t seed = 0;
  double ssim = 0.0;
  double psnr = 0.0;
  double aligned_rel_error = 0.0;
  double wall_time_s = 0.0;
  double init_time_s = 0.0;
};

inline constexpr const char *kCsvHeader =
    "dataset,algorithm,sampling_rate,standoff_m,image_index,seed,ssim,psnr,aligned_rel_error,"
    "wall_time_s,init_time_s";

std::string csv_line(const ResultRow &row);
void write_csv(const std::vector<ResultRow> &rows, const std::filesystem::path &path);

/// m = round(rate * n), halves away from zero. Throws for non-positive or
/// non-finite rates and for rates that round to zero rows.
std::size_t measurement_count(double rate, std::size_t n);

/// Ground-truth images selected for cfg (first num_images of a seeded
/// shuffle for MNIST; seeded synthesis otherwise).
std::vector<Signal> select_images(const ExperimentConfig &cfg, std::size_t &width,
                                  std::size_t &height);

/// Rate x image grid for cfg.algorithm with the first stand-off distance.
std::vector<ResultRow> run_experiment(const ExperimentConfig &cfg);

/// Stand-off x rate x image grid; requires Diffraction sensing.
std::vector<ResultRow> run_standoff_sweep(const ExperimentConfig &cfg);

/// Spectral versus DRGD initialization, each followed by the same Kaczmarz
/// run: two rows per (rate, image), labelled "spectral+RK" and "drgd+RK".
std::vector<ResultRow> compare_initializations(const ExperimentConfig &cfg);

} // namespace phasekit
