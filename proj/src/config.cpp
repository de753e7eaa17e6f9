#include "latentmark/config.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <sstream>

#include "latentmark/errors.hpp"

namespace latentmark {

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : data) {
        h ^= ch;
        h *= 0x00000100000001b3ULL;
    }
    return h;
}

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace((unsigned char)s[b])) ++b;
    while (e > b && std::isspace((unsigned char)s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::istringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

template <typename T>
T parse_int(const std::string& key, const std::string& value) {
    T v{};
    const auto* first = value.data();
    const auto* last = value.data() + value.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last) {
        throw ConfigError("config key '" + key + "': not an integer: " + value);
    }
    return v;
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': not a number: " + value);
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("config key '" + key + "': expected true/false: " + value);
}

std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ",";
        out += items[i];
    }
    return out;
}

}  // namespace

RunConfig RunConfig::parse(std::string_view text) {
    RunConfig cfg;
    std::istringstream ss{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line.erase(hash_pos);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw ConfigError("config line " + std::to_string(lineno) + ": empty key or value");
        }

        if (key == "latent_c") cfg.latent_c = parse_int<std::uint32_t>(key, value);
        else if (key == "latent_h") cfg.latent_h = parse_int<std::uint32_t>(key, value);
        else if (key == "latent_w") cfg.latent_w = parse_int<std::uint32_t>(key, value);
        else if (key == "f_c") cfg.f_c = parse_int<std::uint32_t>(key, value);
        else if (key == "f_hw") cfg.f_hw = parse_int<std::uint32_t>(key, value);
        else if (key == "l") cfg.l = parse_int<std::uint32_t>(key, value);
        else if (key == "T") cfg.T = parse_int<int>(key, value);
        else if (key == "schedule_base_steps") cfg.schedule_base_steps = parse_int<int>(key, value);
        else if (key == "beta_start") cfg.beta_start = parse_double(key, value);
        else if (key == "beta_end") cfg.beta_end = parse_double(key, value);
        else if (key == "p") cfg.p = parse_double(key, value);
        else if (key == "gamma") cfg.gamma = parse_double(key, value);
        else if (key == "toy_seed") cfg.toy_seed = parse_int<std::uint64_t>(key, value);
        else if (key == "seed_rng") cfg.seed_rng = parse_int<std::uint64_t>(key, value);
        else if (key == "seed_userdb") cfg.seed_userdb = parse_int<std::uint64_t>(key, value);
        else if (key == "seed_distortion") cfg.seed_distortion = parse_int<std::uint64_t>(key, value);
        else if (key == "distortions") cfg.distortions = split_list(value);
        else if (key == "modes") cfg.modes = split_list(value);
        else if (key == "images") cfg.images = parse_int<std::uint32_t>(key, value);
        else if (key == "users") cfg.users = parse_int<std::uint32_t>(key, value);
        else if (key == "fpr") cfg.fpr = parse_double(key, value);
        else if (key == "quantize") cfg.quantize = parse_bool(key, value);
        else if (key == "threads") cfg.threads = parse_int<int>(key, value);
        else throw ConfigError("unknown config key '" + key + "'");
    }
    cfg.validate();
    return cfg;
}

RunConfig RunConfig::parse_file(const std::filesystem::path& path) {
    return parse(read_text_file(path));
}

void RunConfig::validate() const {
    Shape shape = latent_shape();
    if (shape.size() == 0) throw ConfigError("latent dimensions must be positive");
    if (f_c == 0 || f_hw == 0 || l == 0) throw ConfigError("f_c, f_hw, l must be positive");
    if (T < 0) throw ConfigError("T must be >= 0");
    if (schedule_base_steps < 0) throw ConfigError("schedule_base_steps must be >= 0");
    if (!(p > 0.0 && p <= 1.0)) throw ConfigError("p must be in (0, 1]");
    if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must be in (0, 1)");
    if (!(fpr > 0.0 && fpr < 1.0)) throw ConfigError("fpr must be in (0, 1)");
    if (threads < 0) throw ConfigError("threads must be >= 0");
    if (modes.empty()) throw ConfigError("modes must not be empty");
    for (const auto& m : modes) parse_recover_mode(m);     // throws on bad names
    for (const auto& d : distortions) Distortion::parse(d);
}

std::string RunConfig::canonical() const {
    std::ostringstream out;
    out << "latent_c = " << latent_c << '\n'
        << "latent_h = " << latent_h << '\n'
        << "latent_w = " << latent_w << '\n'
        << "f_c = " << f_c << '\n'
        << "f_hw = " << f_hw << '\n'
        << "l = " << l << '\n'
        << "T = " << T << '\n'
        << "schedule_base_steps = " << schedule_base_steps << '\n'
        << "beta_start = " << fmt_g17(beta_start) << '\n'
        << "beta_end = " << fmt_g17(beta_end) << '\n'
        << "p = " << fmt_g17(p) << '\n'
        << "gamma = " << fmt_g17(gamma) << '\n'
        << "toy_seed = " << toy_seed << '\n'
        << "seed_rng = " << seed_rng << '\n'
        << "seed_userdb = " << seed_userdb << '\n'
        << "seed_distortion = " << seed_distortion << '\n'
        << "distortions = " << join(distortions) << '\n'
        << "modes = " << join(modes) << '\n'
        << "images = " << images << '\n'
        << "users = " << users << '\n'
        << "fpr = " << fmt_g17(fpr) << '\n'
        << "quantize = " << (quantize ? "true" : "false") << '\n'
        << "threads = " << threads << '\n';
    return out.str();
}

std::uint64_t RunConfig::hash() const { return fnv1a64(canonical()); }

DiffusionSchedule RunConfig::make_schedule() const {
    return DiffusionSchedule::linear_beta(T, schedule_base_steps, beta_start, beta_end);
}

WatermarkConfig RunConfig::make_watermark_config(const KeyMaterial& km) const {
    WatermarkConfig wc;
    wc.f_c = f_c;
    wc.f_hw = f_hw;
    wc.l = l;
    wc.key = km.key;
    wc.nonce = km.nonce;
    wc.latent_shape = latent_shape();
    wc.validate();
    return wc;
}

CampaignConfig RunConfig::make_campaign(const KeyMaterial& km) const {
    CampaignConfig cc;
    cc.wm = make_watermark_config(km);
    cc.schedule = make_schedule();
    cc.p = p;
    cc.gamma = gamma;
    cc.toy_seed = toy_seed;
    cc.seed_rng = seed_rng;
    cc.seed_userdb = seed_userdb;
    cc.seed_distortion = seed_distortion;
    for (const auto& d : distortions) cc.distortions.push_back(Distortion::parse(d));
    for (const auto& m : modes) cc.modes.push_back(parse_recover_mode(m));
    cc.image_count = images;
    cc.user_count = users;
    cc.fpr = fpr;
    cc.quantize = quantize;
    cc.threads = threads;
    return cc;
}

}  // namespace latentmark
