// qrng: simulate, characterize, extract and test the balanced-detection QRNG twin.

#include "qrng/commands.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

namespace {

constexpr int kExitError = 1;
constexpr int kExitTestFailed = 3;

}  // namespace

int main(int argc, char** argv) {
    using namespace qrng::cli;

    CLI::App app{"Software twin of an LED balanced-detection quantum random number generator"};
    app.require_subcommand(1);

    const std::string default_config = qrng::default_config_path().string();

    SimulateOptions sim;
    sim.config = default_config;
    auto* simulate = app.add_subcommand("simulate", "Simulate a run and write a raw ADC code file");
    simulate->add_option("--config", sim.config, "Config file")->capture_default_str();
    simulate->add_option("--n", sim.n_codes, "Number of ADC codes")->capture_default_str();
    simulate->add_option("--seed", sim.seed, "64-bit seed")->capture_default_str();
    simulate->add_flag("--led-on,!--led-off", sim.led_on, "LED current source on (default) or off");
    simulate->add_option("--out", sim.out, "Output raw file")->required();

    std::string on_file, off_file, char_out;
    double clearance = qrng::entropy::kDefaultClearanceBits;
    auto* characterize = app.add_subcommand("characterize", "QCNR, min-entropy and extraction ratio");
    characterize->add_option("on", on_file, "LED-on raw file")->required();
    characterize->add_option("off", off_file, "LED-off raw file")->required();
    characterize->add_option("--out", char_out, "Report CSV")->required();
    characterize->add_option("--clearance", clearance, "Clearance bits below min-entropy")->capture_default_str();

    SweepOptions sweep;
    sweep.config = default_config;
    auto* sweep_cmd = app.add_subcommand("sweep", "Output variance versus LED drive current");
    sweep_cmd->add_option("--config", sweep.config, "Config file")->capture_default_str();
    sweep_cmd->add_option("--steps", sweep.steps, "Current steps from 0 to drive_current")->capture_default_str();
    sweep_cmd->add_option("--n", sweep.codes_per_step, "Codes per step")->capture_default_str();
    sweep_cmd->add_option("--runs", sweep.runs, "Repetitions")->capture_default_str();
    sweep_cmd->add_option("--seed", sweep.seed, "64-bit seed")->capture_default_str();
    sweep_cmd->add_option("--out", sweep.out, "Sweep CSV")->required();

    ExtractOptions ext;
    ext.config = default_config;
    auto* extract = app.add_subcommand("extract", "Toeplitz-hash raw codes into conditioned bits");
    extract->add_option("raw", ext.raw_files, "Raw code files, concatenated in order")->required();
    extract->add_option("--seed-file", ext.seed_file, "32-byte Toeplitz seed key")->required();
    extract->add_option("--config", ext.config, "Config file")->capture_default_str();
    extract->add_option("--out", ext.out, "Output bit file (raw packed bytes)")->required();

    TestOptions test;
    auto* test_cmd = app.add_subcommand("test", "Native statistical battery and autocorrelation");
    test_cmd->add_option("bits", test.bits_file, "Raw packed bit file")->required();
    test_cmd->add_option("--out", test.out_csv, "p-value CSV")->required();
    test_cmd->add_option("--autocorr-out", test.autocorr_csv, "Autocorrelation CSV");
    test_cmd->add_option("--max-lag", test.max_lag, "Largest autocorrelation lag")->capture_default_str();
    test_cmd->add_option("--substreams", test.substreams, "Disjoint sub-streams")->capture_default_str();
    test_cmd->add_option("--alpha", test.alpha, "KS significance level")->capture_default_str();

    std::uint64_t key_seed = 1;
    std::string key_out;
    auto* make_seed = app.add_subcommand("make-seed", "Derive a 32-byte Toeplitz seed file from a 64-bit seed");
    make_seed->add_option("--seed", key_seed, "64-bit seed")->capture_default_str();
    make_seed->add_option("--out", key_out, "Seed file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*simulate) {
            const auto n = cmd_simulate(sim);
            std::cout << "wrote " << n << " codes to " << sim.out.string() << '\n';
        } else if (*characterize) {
            const auto r = cmd_characterize(on_file, off_file, char_out, clearance);
            std::printf("qcnr_20log10 %.3f dB\nqcnr_10log10 %.3f dB\nmin_entropy %.4f bits/sample\n"
                        "extraction_ratio %d bits/sample\n",
                        r.qcnr_db, r.qcnr_power_db, r.min_entropy, r.extraction_ratio);
        } else if (*sweep_cmd) {
            const auto runs = cmd_sweep(sweep);
            for (std::size_t i = 0; i < runs.size(); ++i) {
                const auto& f = runs[i].fit;
                std::printf("run %zu slope %.6g intercept %.6g r2 %.6f quad %.6g quad_t %.3f%s\n", i, f.slope,
                            f.intercept, f.r_squared, f.quadratic_coeff, f.quadratic_t_stat,
                            f.super_poissonian() ? " super-poissonian" : "");
            }
        } else if (*extract) {
            const auto bits = cmd_extract(ext);
            std::cout << "wrote " << bits << " bits to " << ext.out.string() << '\n';
        } else if (*test_cmd) {
            const auto s = cmd_test(test);
            for (const auto& t : s.per_test)
                std::printf("%-18s KS D=%.5f p=%.4g %s\n", t.test.c_str(), t.ks.d, t.ks.p, t.pass ? "PASS" : "FAIL");
            std::printf("autocorrelation    rho0=%.1f exceedances=%zu/%zu bound=%.3g %s\n",
                        s.autocorr.coefficients[0], s.autocorr_exceedances, test.max_lag,
                        s.autocorr.three_sigma_bound, s.autocorr_pass ? "PASS" : "FAIL");
            std::printf("overall %s\n", s.pass ? "PASS" : "FAIL");
            if (!s.pass) return kExitTestFailed;
        } else if (*make_seed) {
            cmd_make_seed(key_seed, key_out);
        }
    } catch (const std::exception& e) {
        std::cerr << "qrng: " << e.what() << '\n';
        return kExitError;
    }
    return 0;
}
