// latentmark: embed and recover latent-space watermarks with an exactly
// invertible coupled sampler. Verbs: keygen, generate, extract, evaluate,
// dump-schedule. Exit codes: 0 success, 2 config error, 3 I/O error,
// 4 verification failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "latentmark/config.hpp"
#include "latentmark/detection.hpp"
#include "latentmark/io.hpp"
#include "latentmark/pipeline.hpp"
#include "latentmark/toy_denoiser.hpp"

namespace lm = latentmark;
namespace fs = std::filesystem;

namespace {

// thrown when --verify finds the payload below the detection threshold
struct VerifyFailure {
    std::string message;
};

struct ConfigOpts {
    std::string path;
    std::vector<std::string> overrides;  // key=value, applied after the file
};

void add_config_opts(CLI::App* cmd, ConfigOpts& opts) {
    cmd->add_option("--config", opts.path, "run configuration file (key = value lines)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--set", opts.overrides, "override a config key, e.g. --set T=50");
}

lm::RunConfig load_config(const ConfigOpts& opts) {
    std::string text;
    if (!opts.path.empty()) text = lm::read_text_file(opts.path);
    for (const auto& kv : opts.overrides) {
        text += '\n';
        text += kv;
    }
    return lm::RunConfig::parse(text);
}

std::string hash_hex(std::uint64_t h) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", (unsigned long long)h);
    return buf;
}

int cmd_keygen(const std::string& out, std::optional<std::uint64_t> seed, bool force) {
    if (fs::exists(out) && !force) {
        throw lm::IoError("refusing to overwrite " + out + " (pass --force)");
    }
    lm::KeyMaterial km;
    if (seed) {
        lm::SeededRng rng(*seed);
        for (auto& b : km.key) b = std::uint8_t(rng.next_u64() & 0xff);
        for (auto& b : km.nonce) b = std::uint8_t(rng.next_u64() & 0xff);
    } else {
        std::random_device rd;
        for (auto& b : km.key) b = std::uint8_t(rd() & 0xff);
        for (auto& b : km.nonce) b = std::uint8_t(rd() & 0xff);
    }
    lm::write_key_file(out, km);
    std::cout << "wrote " << out << '\n';
    return 0;
}

int cmd_generate(const ConfigOpts& copts, const std::string& key_path, const std::string& out,
                 const std::string& wm_hex, const std::string& latent_out) {
    const lm::RunConfig cfg = load_config(copts);
    const lm::KeyMaterial km = lm::read_key_file(key_path);
    const lm::WatermarkConfig wc = cfg.make_watermark_config(km);
    const lm::DiffusionSchedule schedule = cfg.make_schedule();
    const lm::ToyDenoiser denoiser(wc.latent_shape, cfg.gamma, cfg.toy_seed);

    lm::SeededRng rng(cfg.seed_rng);
    const lm::Watermark wm = wm_hex.empty() ? lm::Watermark::random(wc, rng)
                                            : lm::Watermark::from_hex(wm_hex, wc);
    const lm::Generated gen =
        lm::generate_watermarked(wm, wc, denoiser, schedule, cfg.p, rng);

    lm::write_pgm(out, gen.image);
    if (!latent_out.empty()) lm::write_latent(latent_out, gen.z_T);

    nlohmann::ordered_json sidecar;
    sidecar["image"] = fs::path(out).filename().string();
    sidecar["watermark"] = wm.to_hex();
    sidecar["capacity_bits"] = lm::capacity(wc);
    sidecar["config_hash"] = hash_hex(cfg.hash());
    sidecar["seed_rng"] = cfg.seed_rng;
    sidecar["toy_seed"] = cfg.toy_seed;
    lm::write_text_file(out + ".json", sidecar.dump(2) + "\n");

    std::cout << "wrote " << out << " and " << out << ".json\n"
              << "watermark " << wm.to_hex() << " (" << lm::capacity(wc) << " bits)\n";
    return 0;
}

int cmd_extract(const ConfigOpts& copts, const std::string& key_path, const std::string& image,
                const std::string& mode_name, std::string expect_hex, bool verify) {
    const lm::RunConfig cfg = load_config(copts);
    const lm::KeyMaterial km = lm::read_key_file(key_path);
    const lm::WatermarkConfig wc = cfg.make_watermark_config(km);
    const lm::DiffusionSchedule schedule = cfg.make_schedule();
    const lm::ToyDenoiser denoiser(wc.latent_shape, cfg.gamma, cfg.toy_seed);
    const lm::RecoverMode mode = lm::parse_recover_mode(mode_name);

    const lm::ImageTensor img = lm::read_pgm(image);
    const lm::Recovery rec =
        lm::recover_from_image(img, wc, denoiser, schedule, cfg.p, mode);
    std::cout << "recovered " << rec.watermark.to_hex() << '\n';

    // a sidecar written by generate supplies the reference payload unless
    // --expect overrides it
    const std::string sidecar_path = image + ".json";
    if (expect_hex.empty() && fs::exists(sidecar_path)) {
        const auto sidecar = nlohmann::json::parse(lm::read_text_file(sidecar_path));
        expect_hex = sidecar.value("watermark", std::string());
        const std::string recorded = sidecar.value("config_hash", std::string());
        if (!recorded.empty() && recorded != hash_hex(cfg.hash())) {
            std::cerr << "warning: config hash " << hash_hex(cfg.hash())
                      << " does not match sidecar " << recorded << '\n';
        }
    }
    if (expect_hex.empty()) {
        if (verify) {
            throw lm::ConfigError("--verify needs --expect or a sidecar next to the image");
        }
        return 0;
    }

    const lm::Watermark expected = lm::Watermark::from_hex(expect_hex, wc);
    const double acc = lm::bit_accuracy(rec.watermark, expected);
    const auto n = std::uint32_t(lm::capacity(wc));
    const std::uint32_t tau = lm::threshold_bits(n, cfg.fpr);
    const bool ok = lm::detect(acc, n, cfg.fpr);
    std::printf("bit accuracy %.6f (%u/%u bits, threshold %u at fpr %g): %s\n", acc,
                unsigned(std::llround(acc * n)), n, tau, cfg.fpr,
                ok ? "detected" : "not detected");
    if (verify && !ok) {
        throw VerifyFailure{"watermark not detected at fpr " + std::to_string(cfg.fpr)};
    }
    return 0;
}

int cmd_evaluate(const ConfigOpts& copts, const std::string& key_path,
                 const std::string& out_dir) {
    const lm::RunConfig cfg = load_config(copts);
    const lm::KeyMaterial km = lm::read_key_file(key_path);
    const lm::CampaignConfig campaign = cfg.make_campaign(km);

    const lm::DetectionReport report = lm::evaluate(campaign);

    fs::create_directories(out_dir);
    {
        std::ofstream csv(fs::path(out_dir) / "report.csv", std::ios::binary);
        if (!csv) throw lm::IoError("cannot write report.csv in " + out_dir);
        lm::write_csv(csv, report);
    }
    lm::write_text_file(fs::path(out_dir) / "report.json",
                        lm::report_json(report, cfg.hash()));

    std::printf("%u bits, detect >= %u bits, trace >= %u bits (fpr %g, %u users)\n",
                report.capacity_bits, report.tau_detect, report.tau_trace, report.fpr,
                report.user_count);
    std::printf("%-22s %-6s %8s %8s %8s\n", "distortion", "mode", "tpr", "trace", "bitacc");
    for (const auto& a : report.aggregates) {
        std::printf("%-22s %-6s %8.3f %8.3f %8.4f\n", a.distortion.c_str(), a.mode.c_str(),
                    a.detect_tpr, a.trace_rate, a.mean_bit_acc);
    }
    std::cout << "wrote " << (fs::path(out_dir) / "report.csv").string() << " and "
              << (fs::path(out_dir) / "report.json").string() << '\n';
    return 0;
}

int cmd_dump_schedule(const ConfigOpts& copts, const std::string& out) {
    const lm::RunConfig cfg = load_config(copts);
    const lm::DiffusionSchedule schedule = cfg.make_schedule();
    if (out.empty()) {
        schedule.dump(std::cout);
    } else {
        std::ofstream os(out, std::ios::binary);
        if (!os) throw lm::IoError("cannot open for writing: " + out);
        schedule.dump(os);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"latent-space watermarking with exactly invertible sampling"};
    app.require_subcommand(1);

    // keygen
    auto* keygen = app.add_subcommand("keygen", "create a key/nonce file");
    std::string keygen_out;
    std::optional<std::uint64_t> keygen_seed;
    bool keygen_force = false;
    keygen->add_option("--out", keygen_out, "output key file")->required();
    keygen->add_option("--seed", keygen_seed, "derive the key deterministically");
    keygen->add_flag("--force", keygen_force, "overwrite an existing file");

    // generate
    auto* generate = app.add_subcommand("generate", "produce a watermarked image + sidecar");
    ConfigOpts gen_cfg;
    std::string gen_key, gen_out, gen_wm, gen_latent;
    add_config_opts(generate, gen_cfg);
    generate->add_option("--key", gen_key, "key file from keygen")->required();
    generate->add_option("--out", gen_out, "output image (PGM)")->required();
    generate->add_option("--watermark", gen_wm, "payload as hex (default: random)");
    generate->add_option("--save-latent", gen_latent, "also write the watermarked latent (.lat)");

    // extract
    auto* extract = app.add_subcommand("extract", "recover the payload from an image");
    ConfigOpts ext_cfg;
    std::string ext_key, ext_image, ext_mode = "edict", ext_expect;
    bool ext_verify = false;
    add_config_opts(extract, ext_cfg);
    extract->add_option("--key", ext_key, "key file from keygen")->required();
    extract->add_option("--image", ext_image, "image to read (PGM)")->required();
    extract->add_option("--mode", ext_mode, "inversion path: edict or ddim")
        ->check(CLI::IsMember({"edict", "ddim"}));
    extract->add_option("--expect", ext_expect, "reference payload as hex");
    extract->add_flag("--verify", ext_verify,
                      "exit 4 unless the payload clears the detection threshold");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "run the distortion campaign");
    ConfigOpts eval_cfg;
    std::string eval_key, eval_out = "results";
    add_config_opts(evaluate, eval_cfg);
    evaluate->add_option("--key", eval_key, "key file from keygen")->required();
    evaluate->add_option("--out-dir", eval_out, "directory for report.csv / report.json");

    // dump-schedule
    auto* dump = app.add_subcommand("dump-schedule", "print the alpha_bar sequence");
    ConfigOpts dump_cfg;
    std::string dump_out;
    add_config_opts(dump, dump_cfg);
    dump->add_option("--out", dump_out, "write to a file instead of stdout");

    try {
        app.parse(argc, argv);
        if (*keygen) return cmd_keygen(keygen_out, keygen_seed, keygen_force);
        if (*generate) return cmd_generate(gen_cfg, gen_key, gen_out, gen_wm, gen_latent);
        if (*extract)
            return cmd_extract(ext_cfg, ext_key, ext_image, ext_mode, ext_expect, ext_verify);
        if (*evaluate) return cmd_evaluate(eval_cfg, eval_key, eval_out);
        if (*dump) return cmd_dump_schedule(dump_cfg, dump_out);
        return 2;
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    } catch (const VerifyFailure& e) {
        std::cerr << "verification failed: " << e.message << '\n';
        return 4;
    } catch (const lm::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
