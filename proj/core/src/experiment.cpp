#include "phasekit/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

#include "phasekit/data.hpp"
#include "phasekit/metrics.hpp"

namespace phasekit {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

double parse_double(const std::string &key, const std::string &v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) {
      throw std::invalid_argument(v);
    }
    return d;
  } catch (const std::exception &) {
    throw std::invalid_argument(key + ": expected a number, got '" + v + "'");
  }
}

std::uint64_t parse_u64(const std::string &key, const std::string &v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw std::invalid_argument(key + ": expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

std::vector<double> parse_list(const std::string &key, const std::string &v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) {
      out.push_back(parse_double(key, item));
    }
  }
  return out;
}

std::string format_list(const std::vector<double> &v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out += (i ? "," : "") + fmt::format("{}", v[i]);
  }
  return out;
}

DatasetKind parse_dataset(const std::string &v) {
  const std::string s = lower(v);
  if (s == "mnist") {
    return DatasetKind::Mnist;
  }
  if (s == "shepplogan" || s == "shepp-logan") {
    return DatasetKind::SheppLogan;
  }
  if (s == "generator" || s == "generatorsamples") {
    return DatasetKind::GeneratorSamples;
  }
  throw std::invalid_argument("dataset: unknown value '" + v + "'");
}

Algorithm parse_algorithm(const std::string &v) {
  const std::string s = lower(v);
  if (s == "wf") {
    return Algorithm::WF;
  }
  if (s == "twf") {
    return Algorithm::TWF;
  }
  if (s == "rk") {
    return Algorithm::RK;
  }
  if (s == "drgd") {
    return Algorithm::DRGD;
  }
  if (s == "deepinit") {
    return Algorithm::DeepInit;
  }
  throw std::invalid_argument("algorithm: unknown value '" + v + "'");
}

SensingModel parse_sensing(const std::string &v) {
  const std::string s = lower(v);
  if (s == "gaussian") {
    return SensingModel::Gaussian;
  }
  if (s == "diffraction") {
    return SensingModel::Diffraction;
  }
  throw std::invalid_argument("sensing: unknown value '" + v + "'");
}

} // namespace

std::string to_string(DatasetKind d) {
  switch (d) {
  case DatasetKind::Mnist:
    return "mnist";
  case DatasetKind::SheppLogan:
    return "shepplogan";
  case DatasetKind::GeneratorSamples:
    return "generator";
  }
  return "?";
}

std::string to_string(Algorithm a) {
  switch (a) {
  case Algorithm::WF:
    return "WF";
  case Algorithm::TWF:
    return "TWF";
  case Algorithm::RK:
    return "RK";
  case Algorithm::DRGD:
    return "DRGD";
  case Algorithm::DeepInit:
    return "DeepInit";
  }
  return "?";
}

std::string to_string(SensingModel s) {
  return s == SensingModel::Gaussian ? "gaussian" : "diffraction";
}

std::size_t ExperimentConfig::resolved_k_max() const {
  if (k_max) {
    return *k_max;
  }
  switch (algorithm) {
  case Algorithm::WF:
    return 50;
  case Algorithm::TWF:
    return 200;
  case Algorithm::RK:
  case Algorithm::DeepInit:
    return 100000;
  case Algorithm::DRGD:
    return 0;
  }
  return 0;
}

double ExperimentConfig::resolved_twf_lb() const {
  return twf_lb.value_or(sensing == SensingModel::Diffraction ? 0.001 : 0.3);
}

double ExperimentConfig::resolved_twf_ub() const {
  return twf_ub.value_or(sensing == SensingModel::Diffraction ? 500.0 : 5.0);
}

bool ExperimentConfig::needs_generator() const {
  return algorithm == Algorithm::DRGD || algorithm == Algorithm::DeepInit ||
         dataset == DatasetKind::GeneratorSamples;
}

void ExperimentConfig::validate() const {
  if (sampling_rates.empty()) {
    throw std::invalid_argument("rates: at least one sampling rate is required");
  }
  for (double r : sampling_rates) {
    if (!(r > 0.0) || !std::isfinite(r)) {
      throw std::invalid_argument(fmt::format("rates: invalid sampling rate {}", r));
    }
  }
  if (num_images < 1) {
    throw std::invalid_argument("images: must be >= 1");
  }
  if (standoffs.empty()) {
    throw std::invalid_argument("standoffs: at least one distance is required");
  }
  for (double d : standoffs) {
    if (!(d > 0.0)) {
      throw std::invalid_argument(fmt::format("standoffs: invalid distance {}", d));
    }
  }
  if (dataset == DatasetKind::Mnist && mnist_images.empty()) {
    throw std::invalid_argument("dataset mnist requires --mnist-images");
  }
  if (needs_generator() && generator_weights.empty()) {
    throw std::invalid_argument(to_string(algorithm) +
                                " needs a generator: pass --weights <file> or --weights " +
                                kSyntheticWeights);
  }
  if (!(resolved_twf_lb() < resolved_twf_ub())) {
    throw std::invalid_argument("twf_lb must be < twf_ub");
  }
  if (!(eta > 0.0) || !(lambda >= 0.0)) {
    throw std::invalid_argument("eta must be > 0 and lambda >= 0");
  }
  if (!(mask_density > 0.0 && mask_density < 1.0)) {
    throw std::invalid_argument("mask_density must lie in (0, 1)");
  }
}

void apply_setting(ExperimentConfig &cfg, const std::string &raw_key, const std::string &raw) {
  std::string key = trim(raw_key);
  std::replace(key.begin(), key.end(), '-', '_');
  const std::string v = trim(raw);
  if (key == "dataset") {
    cfg.dataset = parse_dataset(v);
  } else if (key == "mnist_images") {
    cfg.mnist_images = v;
  } else if (key == "mnist_labels") {
    cfg.mnist_labels = v;
  } else if (key == "algorithm") {
    cfg.algorithm = parse_algorithm(v);
  } else if (key == "sensing") {
    cfg.sensing = parse_sensing(v);
  } else if (key == "rates") {
    cfg.sampling_rates = parse_list(key, v);
  } else if (key == "standoffs") {
    cfg.standoffs = parse_list(key, v);
  } else if (key == "images") {
    cfg.num_images = parse_u64(key, v);
  } else if (key == "seed") {
    cfg.seed = parse_u64(key, v);
  } else if (key == "weights") {
    cfg.generator_weights = v;
  } else if (key == "out_csv") {
    cfg.out_csv = v;
  } else if (key == "dump_dir") {
    cfg.dump_dir = v;
  } else if (key == "k_max") {
    cfg.k_max = parse_u64(key, v);
  } else if (key == "i_max") {
    cfg.i_max = parse_u64(key, v);
  } else if (key == "eta") {
    cfg.eta = parse_double(key, v);
  } else if (key == "lambda") {
    cfg.lambda = parse_double(key, v);
  } else if (key == "twf_lb") {
    cfg.twf_lb = parse_double(key, v);
  } else if (key == "twf_ub") {
    cfg.twf_ub = parse_double(key, v);
  } else if (key == "init") {
    const std::string s = lower(v);
    if (s == "spectral") {
      cfg.classical_init = InitKind::Spectral;
    } else if (s == "random") {
      cfg.classical_init = InitKind::RandomUnit;
    } else {
      throw std::invalid_argument("init: expected spectral or random, got '" + v + "'");
    }
  } else if (key == "optimizer") {
    const std::string s = lower(v);
    if (s == "adam") {
      cfg.optimizer = LatentOptimizer::Adam;
    } else if (s == "subgradient" || s == "plain") {
      cfg.optimizer = LatentOptimizer::PlainSubgradient;
    } else {
      throw std::invalid_argument("optimizer: expected adam or subgradient, got '" + v + "'");
    }
  } else if (key == "wavelength") {
    cfg.wavelength = parse_double(key, v);
  } else if (key == "pixel_pitch") {
    cfg.pixel_pitch = parse_double(key, v);
  } else if (key == "mask_density") {
    cfg.mask_density = parse_double(key, v);
  } else if (key == "threads") {
    cfg.threads = parse_u64(key, v);
  } else {
    throw std::invalid_argument("unknown setting '" + raw_key + "'");
  }
}

void apply_config_file(ExperimentConfig &cfg, const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open config file " + path.string());
  }
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(
          fmt::format("{}:{}: expected key=value", path.string(), lineno));
    }
    apply_setting(cfg, line.substr(0, eq), line.substr(eq + 1));
  }
}

std::vector<std::pair<std::string, std::string>> resolved_settings(const ExperimentConfig &cfg) {
  return {
      {"dataset", to_string(cfg.dataset)},
      {"mnist_images", cfg.mnist_images},
      {"mnist_labels", cfg.mnist_labels},
      {"algorithm", to_string(cfg.algorithm)},
      {"sensing", to_string(cfg.sensing)},
      {"rates", format_list(cfg.sampling_rates)},
      {"standoffs", format_list(cfg.standoffs)},
      {"images", std::to_string(cfg.num_images)},
      {"seed", std::to_string(cfg.seed)},
      {"weights", cfg.generator_weights},
      {"out_csv", cfg.out_csv},
      {"dump_dir", cfg.dump_dir},
      {"k_max", std::to_string(cfg.resolved_k_max())},
      {"i_max", std::to_string(cfg.i_max)},
      {"eta", fmt::format("{}", cfg.eta)},
      {"lambda", fmt::format("{}", cfg.lambda)},
      {"twf_lb", fmt::format("{}", cfg.resolved_twf_lb())},
      {"twf_ub", fmt::format("{}", cfg.resolved_twf_ub())},
      {"init", cfg.classical_init == InitKind::RandomUnit ? "random" : "spectral"},
      {"optimizer", cfg.optimizer == LatentOptimizer::Adam ? "adam" : "subgradient"},
      {"wavelength", fmt::format("{}", cfg.wavelength)},
      {"pixel_pitch", fmt::format("{}", cfg.pixel_pitch)},
      {"mask_density", fmt::format("{}", cfg.mask_density)},
      {"scene_to_detector", fmt::format("{}", kSceneToDetectorDistance)},
      {"threads", std::to_string(cfg.threads)},
  };
}

void write_resolved_config(const ExperimentConfig &cfg, const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << "# resolved experiment configuration\n";
  for (const auto &[k, v] : resolved_settings(cfg)) {
    if (k == "scene_to_detector") {
      out << "# " << k << "=" << v << "\n";
    } else {
      out << k << "=" << v << "\n";
    }
  }
}

std::string csv_line(const ResultRow &row) {
  return fmt::format("{},{},{},{},{},{},{:.6f},{},{:.6e},{:.6f},{:.6f}", row.dataset,
                     row.algorithm, row.sampling_rate,
                     row.standoff_m ? fmt::format("{}", *row.standoff_m) : std::string(),
                     row.image_index, row.seed, row.ssim, format_psnr(row.psnr),
                     row.aligned_rel_error, row.wall_time_s, row.init_time_s);
}

void write_csv(const std::vector<ResultRow> &rows, const std::filesystem::path &path) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << kCsvHeader << '\n';
  for (const auto &r : rows) {
    out << csv_line(r) << '\n';
  }
}

std::size_t measurement_count(double rate, std::size_t n) {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw std::invalid_argument(fmt::format("invalid sampling rate {}", rate));
  }
  const long long m = std::llround(rate * static_cast<double>(n));
  if (m < 1) {
    throw std::invalid_argument(
        fmt::format("sampling rate {} gives no measurements for n = {}", rate, n));
  }
  return static_cast<std::size_t>(m);
}

namespace {

GeneratorNet load_configured_generator(const ExperimentConfig &cfg, std::size_t width,
                                       std::size_t height) {
  if (cfg.generator_weights.empty() || cfg.generator_weights == kSyntheticWeights) {
    return synthetic_generator(width, height);
  }
  return load_generator(cfg.generator_weights);
}

} // namespace

std::vector<Signal> select_images(const ExperimentConfig &cfg, std::size_t &width,
                                  std::size_t &height) {
  switch (cfg.dataset) {
  case DatasetKind::Mnist: {
    const auto data = load_mnist(cfg.mnist_images);
    if (data.size() < cfg.num_images) {
      throw std::invalid_argument(fmt::format("dataset has {} images, {} requested", data.size(),
                                              cfg.num_images));
    }
    width = data.width;
    height = data.height;
    const auto order = seeded_shuffle(data.size(), derive_seed(cfg.seed, 0x1d5));
    std::vector<Signal> out;
    for (std::size_t i = 0; i < cfg.num_images; ++i) {
      out.push_back(data.images[order[i]]);
    }
    return out;
  }
  case DatasetKind::SheppLogan: {
    PhantomSpec spec;
    spec.seed = derive_seed(cfg.seed, 0x5e99);
    width = spec.width;
    height = spec.height;
    return synthesize_shepp_logan(spec, cfg.num_images).images;
  }
  case DatasetKind::GeneratorSamples: {
    width = 28;
    height = 28;
    const GeneratorNet g = load_configured_generator(cfg, width, height);
    if (g.output_dim() != width * height) {
      throw std::invalid_argument("generator output does not match 28x28 images");
    }
    SeededRng rng(derive_seed(cfg.seed, 0x9e4));
    std::vector<Signal> out;
    for (std::size_t i = 0; i < cfg.num_images; ++i) {
      LatentVector z(g.latent_dim());
      for (auto &v : z) {
        v = rng.normal();
      }
      out.push_back(generator_forward(g, z));
    }
    return out;
  }
  }
  return {};
}

namespace {

enum class GridMode { Single, Sweep, CompareInit };

struct Cell {
  std::size_t standoff_index;
  std::size_t rate_index;
  std::size_t image_index;
};

struct Shared {
  const ExperimentConfig *cfg;
  std::vector<Signal> images;
  std::size_t width = 0;
  std::size_t height = 0;
  std::optional<GeneratorNet> generator;
  std::vector<double> standoffs;
  std::vector<ComplexMatrix> modulator_to_scene;
  std::optional<ComplexMatrix> scene_to_detector;
};

SensingOperator build_operator(const Shared &sh, const Cell &cell, std::uint64_t cell_seed,
                               std::size_t m) {
  const std::size_t n = sh.width * sh.height;
  if (sh.cfg->sensing == SensingModel::Gaussian) {
    SeededRng rng(derive_seed(cell_seed, 1));
    return {gaussian_complex(rng, m, n), SensingKind::Gaussian};
  }
  SeededRng rng(derive_seed(cell_seed, 2));
  const MaskSet masks = generate_masks(rng, m, n, sh.cfg->mask_density);
  return effective_rows(masks, sh.modulator_to_scene[cell.standoff_index], *sh.scene_to_detector);
}

DrgdConfig drgd_config(const ExperimentConfig &cfg, std::uint64_t cell_seed) {
  DrgdConfig d;
  d.i_max = cfg.i_max;
  d.step_size = cfg.eta;
  d.reg_weight = cfg.lambda;
  d.seed = derive_seed(cell_seed, 4);
  d.optimizer = cfg.optimizer;
  return d;
}

Signal starting_point(const SensingOperator &a, const Measurements &y, InitKind kind,
                      std::uint64_t seed) {
  ClassicalConfig cc;
  cc.init = kind;
  cc.seed = seed;
  return initial_estimate(a, y, cc);
}

struct Outcome {
  Signal estimate;
  double wall = 0.0;
  double init = 0.0;
};

Outcome solve(const Shared &sh, const SensingOperator &a, const Measurements &y,
              std::uint64_t cell_seed) {
  const ExperimentConfig &cfg = *sh.cfg;
  const auto start = Clock::now();
  Outcome out;
  switch (cfg.algorithm) {
  case Algorithm::WF:
  case Algorithm::TWF: {
    ClassicalConfig cc;
    cc.k_max = cfg.resolved_k_max();
    cc.twf_lb = cfg.resolved_twf_lb();
    cc.twf_ub = cfg.resolved_twf_ub();
    cc.seed = derive_seed(cell_seed, 5);
    const auto t0 = Clock::now();
    cc.provided_init = starting_point(a, y, cfg.classical_init, cc.seed);
    out.init = elapsed(t0);
    cc.init = InitKind::Provided;
    const SolverReport r = cfg.algorithm == Algorithm::WF ? wirtinger_flow(a, y, cc)
                                                          : truncated_wirtinger_flow(a, y, cc);
    out.estimate = r.reconstruction;
    break;
  }
  case Algorithm::RK: {
    const auto t0 = Clock::now();
    const Signal x0 = starting_point(a, y, cfg.classical_init, derive_seed(cell_seed, 5));
    out.init = elapsed(t0);
    SeededRng rng(derive_seed(cell_seed, 3));
    out.estimate = randomized_kaczmarz(a, y, x0, cfg.resolved_k_max(), rng).reconstruction;
    break;
  }
  case Algorithm::DRGD: {
    const DrgdResult r = drgd(a, y, *sh.generator, drgd_config(cfg, cell_seed), sh.width, sh.height);
    out.estimate = r.report.reconstruction;
    break;
  }
  case Algorithm::DeepInit: {
    SeededRng rng(derive_seed(cell_seed, 3));
    const DeepInitReport r = deepinit(a, y, *sh.generator, drgd_config(cfg, cell_seed),
                                      cfg.resolved_k_max(), rng, sh.width, sh.height);
    out.init = r.init.report.wall_time;
    out.estimate = r.reconstruction();
    break;
  }
  }
  out.wall = elapsed(start);
  return out;
}

double median_of_three(double a, double b, double c) {
  return std::max(std::min(a, b), std::min(std::max(a, b), c));
}

ResultRow make_row(const Shared &sh, const Cell &cell, std::uint64_t cell_seed,
                   std::string algorithm, const Signal &estimate, const Signal &truth,
                   bool with_standoff) {
  const ExperimentConfig &cfg = *sh.cfg;
  ResultRow row;
  row.dataset = to_string(cfg.dataset);
  row.algorithm = std::move(algorithm);
  row.sampling_rate = cfg.sampling_rates[cell.rate_index];
  if (with_standoff) {
    row.standoff_m = sh.standoffs[cell.standoff_index];
  }
  row.image_index = cell.image_index;
  row.seed = cell_seed;
  const QualityScore q = score(estimate, truth, sh.width, sh.height);
  row.ssim = q.ssim;
  row.psnr = q.psnr;
  row.aligned_rel_error = q.aligned_rel_error;
  return row;
}

void dump(const Shared &sh, const ResultRow &row, const Signal &estimate, const Signal &truth) {
  if (sh.cfg->dump_dir.empty()) {
    return;
  }
  const std::filesystem::path dir(sh.cfg->dump_dir);
  std::filesystem::create_directories(dir);
  const std::string stem =
      fmt::format("{}_{}_rate{}_{}img{}", row.algorithm, row.dataset, row.sampling_rate,
                  row.standoff_m ? fmt::format("d{}_", *row.standoff_m) : std::string(),
                  row.image_index);
  write_pgm(sign_align(estimate, truth), sh.width, sh.height, dir / (stem + ".pgm"));
}

std::vector<ResultRow> run_cell(const Shared &sh, const Cell &cell, GridMode mode) {
  const ExperimentConfig &cfg = *sh.cfg;
  const std::size_t n = sh.width * sh.height;
  const std::uint64_t cell_seed = derive_seed(cfg.seed, cell.rate_index, cell.image_index);
  const std::size_t m = measurement_count(cfg.sampling_rates[cell.rate_index], n);
  const Signal &truth = sh.images[cell.image_index];
  const SensingOperator a = build_operator(sh, cell, cell_seed, m);
  const Measurements y = intensity_forward(a, truth);
  const bool with_standoff = cfg.sensing == SensingModel::Diffraction;

  if (mode != GridMode::CompareInit) {
    const Outcome o = solve(sh, a, y, cell_seed);
    ResultRow row =
        make_row(sh, cell, cell_seed, to_string(cfg.algorithm), o.estimate, truth, with_standoff);
    row.wall_time_s = o.wall;
    row.init_time_s = o.init;
    dump(sh, row, o.estimate, truth);
    return {row};
  }

  // Both starting points feed an identically seeded Kaczmarz run.
  std::array<double, 3> spectral_times{};
  Signal spectral;
  for (auto &t : spectral_times) {
    const auto t0 = Clock::now();
    spectral = spectral_init(a, y);
    t = elapsed(t0);
  }
  std::array<double, 3> drgd_times{};
  Signal learned;
  for (auto &t : drgd_times) {
    const auto t0 = Clock::now();
    learned = drgd(a, y, *sh.generator, drgd_config(cfg, cell_seed), sh.width, sh.height)
                  .report.reconstruction;
    t = elapsed(t0);
  }
  const std::size_t k_max = cfg.k_max.value_or(100000);
  std::vector<ResultRow> rows;
  for (const auto &[label, x0, times] :
       {std::tuple{"spectral+RK", &spectral, &spectral_times},
        std::tuple{"drgd+RK", &learned, &drgd_times}}) {
    SeededRng rng(derive_seed(cell_seed, 3));
    const SolverReport rk = randomized_kaczmarz(a, y, *x0, k_max, rng);
    ResultRow row = make_row(sh, cell, cell_seed, label, rk.reconstruction, truth, with_standoff);
    row.init_time_s = median_of_three((*times)[0], (*times)[1], (*times)[2]);
    row.wall_time_s = row.init_time_s + rk.wall_time;
    dump(sh, row, rk.reconstruction, truth);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ResultRow> run_grid(const ExperimentConfig &cfg, GridMode mode) {
  cfg.validate();
  if (mode == GridMode::Sweep && cfg.sensing != SensingModel::Diffraction) {
    throw std::invalid_argument("stand-off sweep requires --sensing diffraction");
  }
  if (mode == GridMode::CompareInit && cfg.generator_weights.empty()) {
    throw std::invalid_argument(
        std::string("compare-init needs a generator: pass --weights <file> or --weights ") +
        kSyntheticWeights);
  }

  Shared sh;
  sh.cfg = &cfg;
  sh.images = select_images(cfg, sh.width, sh.height);
  const std::size_t n = sh.width * sh.height;
  for (double rate : cfg.sampling_rates) {
    measurement_count(rate, n);
  }
  if (cfg.needs_generator() || mode == GridMode::CompareInit) {
    sh.generator = load_configured_generator(cfg, sh.width, sh.height);
    if (sh.generator->output_dim() != n) {
      throw std::invalid_argument(fmt::format("generator emits {} pixels, images have {}",
                                              sh.generator->output_dim(), n));
    }
  }
  sh.standoffs = mode == GridMode::Sweep ? cfg.standoffs
                                         : std::vector<double>{cfg.standoffs.front()};
  if (cfg.sensing == SensingModel::Diffraction) {
    if (sh.width != sh.height) {
      throw std::invalid_argument("diffraction sensing needs square images");
    }
    DiffractionSpec spec{cfg.wavelength, kSceneToDetectorDistance, cfg.pixel_pitch, sh.width};
    sh.scene_to_detector = build_diffraction_matrix(spec);
    for (double d : sh.standoffs) {
      spec.distance = d;
      sh.modulator_to_scene.push_back(build_diffraction_matrix(spec));
    }
  }

  std::vector<Cell> cells;
  for (std::size_t s = 0; s < sh.standoffs.size(); ++s) {
    for (std::size_t r = 0; r < cfg.sampling_rates.size(); ++r) {
      for (std::size_t i = 0; i < sh.images.size(); ++i) {
        cells.push_back({s, r, i});
      }
    }
  }

  std::vector<std::vector<ResultRow>> results(cells.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto worker = [&] {
    for (std::size_t idx = next++; idx < cells.size(); idx = next++) {
      try {
        results[idx] = run_cell(sh, cells[idx], mode);
      } catch (...) {
        const std::lock_guard lock(failure_mutex);
        if (!failure) {
          failure = std::current_exception();
        }
        next = cells.size();
      }
    }
  };
  std::size_t threads = cfg.threads == 0 ? std::thread::hardware_concurrency() : cfg.threads;
  threads = std::clamp<std::size_t>(threads, 1, cells.size());
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back(worker);
    }
  }
  if (failure) {
    std::rethrow_exception(failure);
  }

  std::vector<ResultRow> rows;
  for (auto &r : results) {
    for (auto &row : r) {
      rows.push_back(std::move(row));
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const ResultRow &a, const ResultRow &b) {
    const double sa = a.standoff_m.value_or(0.0);
    const double sb = b.standoff_m.value_or(0.0);
    if (sa != sb) {
      return sa < sb;
    }
    if (a.sampling_rate != b.sampling_rate) {
      return a.sampling_rate < b.sampling_rate;
    }
    if (a.image_index != b.image_index) {
      return a.image_index < b.image_index;
    }
    return a.algorithm < b.algorithm;
  });
  return rows;
}

} // namespace

std::vector<ResultRow> run_experiment(const ExperimentConfig &cfg) {
  return run_grid(cfg, GridMode::Single);
}

std::vector<ResultRow> run_standoff_sweep(const ExperimentConfig &cfg) {
  return run_grid(cfg, GridMode::Sweep);
}

std::vector<ResultRow> compare_initializations(const ExperimentConfig &cfg) {
  return run_grid(cfg, GridMode::CompareInit);
}

} // namespace phasekit
