#pragma once

#include "qrng/config.hpp"
#include "qrng/entropy.hpp"
#include "qrng/stats.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace qrng::cli {

namespace fs = std::filesystem;

/// Provenance record written next to each subcommand's primary output as
/// `<output>.manifest.json`.
struct RunManifest {
    std::string subcommand;
    std::string config_path;
    std::uint64_t seed = 0;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::string started_utc;
    std::string finished_utc;
    std::uint64_t config_digest = 0;
};

void write_manifest(const RunManifest& manifest, const fs::path& path);
RunManifest read_manifest(const fs::path& path);
fs::path manifest_path_for(const fs::path& output);

/// UTC ISO-8601 time; honours SOURCE_DATE_EPOCH for reproducible manifests.
std::string utc_timestamp();

struct SimulateOptions {
    fs::path config;
    std::size_t n_codes = 1'000'000;
    bool led_on = true;
    std::uint64_t seed = 1;
    fs::path out;
};
/// Returns the number of codes written.
std::size_t cmd_simulate(const SimulateOptions& opt);

struct CharacterizeReport {
    entropy::NoiseStats on;
    entropy::NoiseStats off;
    double qcnr_db = 0.0;        // 20 log10 form
    double qcnr_power_db = 0.0;  // 10 log10 form
    double min_entropy = 0.0;    // of the LED-on block, bits/sample
    double clearance = entropy::kDefaultClearanceBits;
    int extraction_ratio = 0;
    int adc_bits = 12;
};
CharacterizeReport characterize(const RawCodeBlock& on, const RawCodeBlock& off,
                                double clearance = entropy::kDefaultClearanceBits);
CharacterizeReport cmd_characterize(const fs::path& on_file, const fs::path& off_file, const fs::path& out_csv,
                                    double clearance = entropy::kDefaultClearanceBits);
std::string characterize_csv(const CharacterizeReport& report);

struct SweepOptions {
    fs::path config;
    std::size_t steps = 20;
    std::size_t codes_per_step = 100'000;
    std::size_t runs = 3;
    std::uint64_t seed = 1;
    fs::path out;
};
struct SweepRun {
    std::vector<sim::SweepPoint> points;
    entropy::LinearFitResult fit;
};
std::vector<SweepRun> cmd_sweep(const SweepOptions& opt);

struct ExtractOptions {
    std::vector<fs::path> raw_files;
    fs::path seed_file;
    fs::path config;
    fs::path out;
};
/// Returns the number of output bits.
std::size_t cmd_extract(const ExtractOptions& opt);

struct TestOptions {
    fs::path bits_file;
    fs::path out_csv;
    fs::path autocorr_csv;  // defaults to <out_csv stem>_autocorr.csv
    std::size_t max_lag = 1000;
    std::size_t substreams = 100;
    double alpha = 0.01;
};
struct TestKs {
    std::string test;
    stats::KsResult ks;
    bool pass = false;
};
struct TestSummary {
    std::vector<TestKs> per_test;
    stats::AutocorrResult autocorr;
    std::size_t autocorr_exceedances = 0;
    bool autocorr_pass = false;
    bool pass = false;
};
TestSummary evaluate_bits(const BitStream& bits, std::size_t max_lag, std::size_t substreams, double alpha,
                          stats::PValueSet* pvalues_out = nullptr);
TestSummary cmd_test(const TestOptions& opt);

void cmd_make_seed(std::uint64_t seed, const fs::path& out);

}  // namespace qrng::cli
