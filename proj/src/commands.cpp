#include "qrng/commands.hpp"

#include "qrng/bitstream.hpp"
#include "qrng/raw_block.hpp"
#include "qrng/sim_core.hpp"
#include "qrng/toeplitz.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

namespace qrng::cli {

namespace {

using nlohmann::json;

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string hex64(std::uint64_t v) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw IoError("write failed: " + path.string());
}

Config load_and_check(const fs::path& path) {
    const Config cfg = load_config(path);
    cfg.physics.validate();
    for (const auto& w : cfg.acquisition.validate()) std::cerr << "warning: " << w << '\n';
    cfg.extractor.validate();
    return cfg;
}

}  // namespace

std::string utc_timestamp() {
    std::time_t t = 0;
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch != nullptr && *epoch != '\0') {
        t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
    } else {
        t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    }
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

fs::path manifest_path_for(const fs::path& output) {
    fs::path p = output;
    p += ".manifest.json";
    return p;
}

void write_manifest(const RunManifest& m, const fs::path& path) {
    const json j = {
        {"subcommand", m.subcommand},
        {"config_path", m.config_path},
        {"seed", m.seed},
        {"inputs", m.inputs},
        {"outputs", m.outputs},
        {"started_utc", m.started_utc},
        {"finished_utc", m.finished_utc},
        {"config_digest", hex64(m.config_digest)},
    };
    write_text(path, j.dump(2) + "\n");
}

RunManifest read_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest " + path.string());
    const json j = json::parse(in);
    RunManifest m;
    m.subcommand = j.at("subcommand").get<std::string>();
    m.config_path = j.at("config_path").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.inputs = j.at("inputs").get<std::vector<std::string>>();
    m.outputs = j.at("outputs").get<std::vector<std::string>>();
    m.started_utc = j.at("started_utc").get<std::string>();
    m.finished_utc = j.at("finished_utc").get<std::string>();
    m.config_digest = std::stoull(j.at("config_digest").get<std::string>(), nullptr, 16);
    return m;
}

// ---------------------------------------------------------------------------

std::size_t cmd_simulate(const SimulateOptions& opt) {
    RunManifest manifest{"simulate", opt.config.string(), opt.seed, {}, {opt.out.string()}, utc_timestamp(), {}, 0};
    const Config cfg = load_and_check(opt.config);
    const auto block = sim::simulate_run(cfg.physics, cfg.acquisition, opt.n_codes, opt.led_on, opt.seed);
    write_raw_block(block, opt.out);
    manifest.config_digest = block.config_digest;
    manifest.finished_utc = utc_timestamp();
    write_manifest(manifest, manifest_path_for(opt.out));
    return block.size();
}

// ---------------------------------------------------------------------------

CharacterizeReport characterize(const RawCodeBlock& on, const RawCodeBlock& off, double clearance) {
    CharacterizeReport r;
    r.on = entropy::noise_stats(on);
    r.off = entropy::noise_stats(off);
    r.qcnr_db = entropy::qcnr(r.on, r.off);
    r.qcnr_power_db = entropy::qcnr_power_db(r.on, r.off);
    r.min_entropy = entropy::min_entropy(entropy::histogram(on));
    r.clearance = clearance;
    r.extraction_ratio = entropy::extraction_ratio(r.min_entropy, clearance);
    r.adc_bits = on.adc_bits;
    return r;
}

std::string characterize_csv(const CharacterizeReport& r) {
    std::ostringstream out;
    out << "metric,value,units\n";
    auto row = [&](const char* metric, const std::string& value, const char* units) {
        out << metric << ',' << value << ',' << units << '\n';
    };
    row("led_on_mean", fmt_double(r.on.mean), "codes");
    row("led_on_variance", fmt_double(r.on.variance), "codes^2");
    row("led_off_mean", fmt_double(r.off.mean), "codes");
    row("led_off_variance", fmt_double(r.off.variance), "codes^2");
    row("qcnr_20log10", fmt_double(r.qcnr_db), "dB");
    row("qcnr_10log10", fmt_double(r.qcnr_power_db), "dB");
    row("min_entropy", fmt_double(r.min_entropy), "bits/sample");
    row("min_entropy_rate", fmt_double(r.min_entropy / r.adc_bits), "bits/bit");
    row("clearance", fmt_double(r.clearance), "bits/sample");
    row("extraction_ratio", std::to_string(r.extraction_ratio), "bits/sample");
    return out.str();
}

CharacterizeReport cmd_characterize(const fs::path& on_file, const fs::path& off_file, const fs::path& out_csv,
                                    double clearance) {
    RunManifest manifest{"characterize", "", 0, {on_file.string(), off_file.string()}, {out_csv.string()},
                         utc_timestamp(), {}, 0};
    const auto on = read_raw_block(on_file);
    const auto off = read_raw_block(off_file);
    if (!on.led_on) std::cerr << "warning: " << on_file.string() << " is flagged LED-off\n";
    if (off.led_on) std::cerr << "warning: " << off_file.string() << " is flagged LED-on\n";
    if (on.config_digest != off.config_digest)
        std::cerr << "warning: LED-on and LED-off blocks come from different configurations\n";

    const auto report = characterize(on, off, clearance);
    write_text(out_csv, characterize_csv(report));
    manifest.seed = on.rng_seed;
    manifest.config_digest = on.config_digest;
    manifest.finished_utc = utc_timestamp();
    write_manifest(manifest, manifest_path_for(out_csv));
    return report;
}

// ---------------------------------------------------------------------------

std::vector<SweepRun> cmd_sweep(const SweepOptions& opt) {
    if (opt.runs < 1) throw UsageError("sweep: runs must be >= 1");
    RunManifest manifest{"sweep", opt.config.string(), opt.seed, {}, {opt.out.string()}, utc_timestamp(), {}, 0};
    const Config cfg = load_and_check(opt.config);

    std::vector<SweepRun> runs;
    std::ostringstream csv;
    csv << "current_mA,variance,run_index\n";
    for (std::size_t run = 0; run < opt.runs; ++run) {
        SweepRun r;
        r.points = sim::current_sweep(cfg.physics, cfg.acquisition, opt.steps, opt.codes_per_step,
                                      derive_seed(opt.seed, run));
        r.fit = entropy::linearity_fit(r.points);
        for (const auto& p : r.points)
            csv << fmt_double(p.drive_current) << ',' << fmt_double(p.variance) << ',' << run << '\n';
        runs.push_back(std::move(r));
    }
    write_text(opt.out, csv.str());
    manifest.config_digest = config_digest(cfg.physics, cfg.acquisition);
    manifest.finished_utc = utc_timestamp();
    write_manifest(manifest, manifest_path_for(opt.out));
    return runs;
}

// ---------------------------------------------------------------------------

std::size_t cmd_extract(const ExtractOptions& opt) {
    RunManifest manifest{"extract", opt.config.string(), 0, {}, {opt.out.string()}, utc_timestamp(), {}, 0};
    const Config cfg = load_and_check(opt.config);
    const auto key = toeplitz::read_seed_file(opt.seed_file);
    const auto seed = toeplitz::expand_seed(key, cfg.extractor.n, cfg.extractor.m);

    std::vector<RawCodeBlock> blocks;
    for (const auto& path : opt.raw_files) {
        blocks.push_back(read_raw_block(path));
        manifest.inputs.push_back(path.string());
    }
    manifest.inputs.push_back(opt.seed_file.string());
    if (!blocks.empty()) {
        manifest.seed = blocks.front().rng_seed;
        manifest.config_digest = blocks.front().config_digest;
    }

    const BitStream out = toeplitz::stream_extract(blocks, cfg.extractor, seed);
    export_raw(out, opt.out);
    manifest.finished_utc = utc_timestamp();
    write_manifest(manifest, manifest_path_for(opt.out));
    return out.size();
}

// ---------------------------------------------------------------------------

TestSummary evaluate_bits(const BitStream& bits, std::size_t max_lag, std::size_t substreams, double alpha,
                          stats::PValueSet* pvalues_out) {
    if (substreams == 0) throw UsageError("test: substreams must be >= 1");
    const std::size_t len = bits.size() / substreams;
    const std::size_t block_len = std::min(stats::kBlockFrequencyLen, len / 100);
    if (block_len == 0) throw UsageError("test: substreams too short for the block frequency test");

    TestSummary s;
    const auto pvalues = stats::run_battery(bits, substreams, block_len);
    s.pass = true;
    for (const auto& name : stats::battery_test_names()) {
        TestKs t{name, stats::ks_uniformity(stats::select(pvalues, name)), false};
        t.pass = t.ks.p >= alpha;
        s.pass = s.pass && t.pass;
        s.per_test.push_back(t);
    }
    s.autocorr = stats::autocorrelation(bits, max_lag);
    s.autocorr_exceedances = s.autocorr.exceedances();
    s.autocorr_pass = s.autocorr.coefficients[0] == 1.0 && 100 * s.autocorr_exceedances <= max_lag;
    s.pass = s.pass && s.autocorr_pass;
    if (pvalues_out != nullptr) *pvalues_out = pvalues;
    return s;
}

TestSummary cmd_test(const TestOptions& opt) {
    fs::path autocorr_csv = opt.autocorr_csv;
    if (autocorr_csv.empty()) {
        autocorr_csv = opt.out_csv;
        autocorr_csv.replace_filename(opt.out_csv.stem().string() + "_autocorr.csv");
    }
    RunManifest manifest{"test", "", 0, {opt.bits_file.string()}, {opt.out_csv.string(), autocorr_csv.string()},
                         utc_timestamp(), {}, 0};

    const BitStream bits = import_raw(opt.bits_file);
    stats::PValueSet pvalues;
    const auto summary = evaluate_bits(bits, opt.max_lag, opt.substreams, opt.alpha, &pvalues);

    std::ostringstream pcsv;
    pcsv << "test,substream,p_value\n";
    for (const auto& p : pvalues) pcsv << p.test << ',' << p.substream << ',' << fmt_double(p.p) << '\n';
    write_text(opt.out_csv, pcsv.str());

    std::ostringstream acsv;
    acsv << "lag,rho,bound\n";
    for (std::size_t k = 0; k < summary.autocorr.coefficients.size(); ++k)
        acsv << k << ',' << fmt_double(summary.autocorr.coefficients[k]) << ','
             << fmt_double(summary.autocorr.three_sigma_bound) << '\n';
    write_text(autocorr_csv, acsv.str());

    manifest.finished_utc = utc_timestamp();
    write_manifest(manifest, manifest_path_for(opt.out_csv));
    return summary;
}

void cmd_make_seed(std::uint64_t seed, const fs::path& out) {
    toeplitz::write_seed_file(toeplitz::key_from_u64(seed), out);
}

}  // namespace qrng::cli
