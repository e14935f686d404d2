#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <string>

#include "kdviss/kdviss.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kGateFailure = 3;
constexpr int kCertificationFailure = 4;

void print_files(const std::vector<std::string>& files, const std::filesystem::path& dir) {
  for (const auto& f : files) std::cout << (dir / f).string() << '\n';
  std::cout << (dir / "manifest.txt").string() << '\n';
}

template <typename F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const kdviss::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const kdviss::ParameterError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const kdviss::DissipativityGateFailed& e) {
    std::cerr << "gate failure: " << e.what() << '\n';
    return kGateFailure;
  } catch (const kdviss::InfeasibleParameters& e) {
    std::cerr << "gate failure: " << e.what() << '\n';
    return kGateFailure;
  } catch (const kdviss::CertificationFailure& e) {
    std::cerr << "certification failure: " << e.what() << '\n';
    return kCertificationFailure;
  } catch (const kdviss::FitFailure& e) {
    std::cerr << "certification failure: " << e.what() << '\n';
    return kCertificationFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Saturated-feedback KdV simulator and ISS verification suite"};
  app.require_subcommand(1);

  std::string run_config;
  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("config", run_config, "Config file")->required();

  std::string fig_dir;
  auto* fig = app.add_subcommand("figure1", "Reproduce the two-run figure-1 experiment");
  fig->add_option("outdir", fig_dir, "Output directory")->required();

  std::string ax_kind;
  double ax_level = 1.0;
  long ax_samples = 10000;
  std::size_t ax_n = 127;
  double ax_length = 2.0 * std::numbers::pi;
  double ax_amplitude = 0.0;
  unsigned long long ax_seed = 1;
  auto* ax = app.add_subcommand("axioms", "Randomized check of the saturation axioms");
  ax->add_option("kind", ax_kind, "pointwise | hilbert")
      ->required()
      ->check(CLI::IsMember({"pointwise", "hilbert"}));
  ax->add_option("level", ax_level, "Saturation level")->required();
  ax->add_option("--samples", ax_samples, "Number of sample pairs");
  ax->add_option("--n", ax_n, "Interior grid nodes");
  ax->add_option("--length", ax_length, "Domain length");
  ax->add_option("--amplitude", ax_amplitude, "Sample sup-norm amplitude (default 2*level)");
  ax->add_option("--seed", ax_seed, "RNG seed");

  std::string cert_config;
  auto* cert = app.add_subcommand("certify", "Build an ISS certificate for a config");
  cert->add_option("config", cert_config, "Config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  if (*run) {
    return guarded([&] {
      const auto cfg = kdviss::parse_config_file(run_config);
      const auto summary = kdviss::run_experiment(cfg);
      print_files(summary.files, kdviss::resolve_output_dir(cfg.output_dir));
      return kOk;
    });
  }
  if (*fig) {
    return guarded([&] {
      const auto dir = kdviss::resolve_output_dir(fig_dir);
      const auto r = kdviss::reproduce_figure1(dir);
      print_files(r.files, dir);
      return kOk;
    });
  }
  if (*ax) {
    return guarded([&] {
      const kdviss::Grid grid(ax_length, ax_n);
      const auto kind = ax_kind == "hilbert" ? kdviss::SaturationKind::HilbertNorm
                                             : kdviss::SaturationKind::PointwiseLinf;
      const auto sigma = kdviss::SaturationMap::make(kind, ax_level, ax_length);
      const double amp = ax_amplitude > 0.0 ? ax_amplitude : 2.0 * ax_level;
      const auto rep = kdviss::check_axioms(sigma, grid, ax_samples, amp, ax_seed);
      kdviss::write_key_values(std::cout, rep);
      std::cout << "declared_k=" << sigma.lipschitz_k() << '\n'
                << "declared_C0=" << sigma.item5_c0() << '\n';
      return rep.total_violations() == 0 ? kOk : kGateFailure;
    });
  }
  if (*cert) {
    return guarded([&] {
      auto cfg = kdviss::parse_config_file(cert_config);
      cfg.certificate = true;
      const auto summary = kdviss::run_experiment(cfg);
      kdviss::write_key_values(std::cout, *summary.certificate);
      return kOk;
    });
  }
  return kOk;
}
