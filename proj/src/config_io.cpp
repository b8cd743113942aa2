#include "adaptisent/config_io.hpp"

#include <fstream>
#include <sstream>

#include "adaptisent/data.hpp"

namespace adaptisent {

std::map<std::string, std::string> parse_key_values(const std::string& text) {
    std::map<std::string, std::string> out;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    auto trim = [](std::string s) {
        const auto first = s.find_first_not_of(" \t\r");
        const auto last = s.find_last_not_of(" \t\r");
        if (first == std::string::npos) return std::string{};
        return s.substr(first, last - first + 1);
    };
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw IoError("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw IoError("config line " + std::to_string(line_no) + ": empty key or value");
        out[key] = value;
    }
    return out;
}

bool parse_bool(const std::string& value, const std::string& key) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw IoError("config key " + key + ": expected true/false, got " + value);
}

namespace {

double parse_double(const std::string& value, const std::string& key) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw IoError("config key " + key + ": expected a number, got " + value);
    }
}

int parse_int(const std::string& value, const std::string& key) {
    try {
        std::size_t used = 0;
        const long v = std::stol(value, &used);
        if (used != value.size()) throw std::invalid_argument("trailing");
        return static_cast<int>(v);
    } catch (const std::exception&) {
        throw IoError("config key " + key + ": expected an integer, got " + value);
    }
}

std::uint64_t parse_u64(const std::string& value, const std::string& key) {
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(value, &used);
        if (used != value.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw IoError("config key " + key + ": expected an unsigned integer, got " + value);
    }
}

} // namespace

RunConfig parse_run_config(const std::string& text) {
    RunConfig cfg;
    for (const auto& [key, value] : parse_key_values(text)) {
        if (key == "gamma") cfg.gamma = parse_double(value, key);
        else if (key == "lambda") cfg.lambda = parse_double(value, key);
        else if (key == "d") cfg.d = parse_int(value, key);
        else if (key == "d_t") cfg.d_t = parse_int(value, key);
        else if (key == "d_v") cfg.d_v = parse_int(value, key);
        else if (key == "d_p") cfg.d_p = parse_int(value, key);
        else if (key == "d_d") cfg.d_d = parse_int(value, key);
        else if (key == "d_n") cfg.d_n = parse_int(value, key);
        else if (key == "heads") cfg.heads = parse_int(value, key);
        else if (key == "lr") cfg.lr = parse_double(value, key);
        else if (key == "batch_size") cfg.batch_size = parse_int(value, key);
        else if (key == "epochs") cfg.epochs = parse_int(value, key);
        else if (key == "seed") cfg.seed = parse_u64(value, key);
        else if (key == "tau_coherence") cfg.tau_coherence = parse_double(value, key);
        else if (key == "vocab_words") cfg.vocab_words = parse_int(value, key);
        else if (key == "vocab_pos") cfg.vocab_pos = parse_int(value, key);
        else if (key == "vocab_dep") cfg.vocab_dep = parse_int(value, key);
        else if (key == "vocab_ner") cfg.vocab_ner = parse_int(value, key);
        else if (key == "no_captions") cfg.no_captions = parse_bool(value, key);
        else if (key == "no_alignment") cfg.no_alignment = parse_bool(value, key);
        else if (key == "no_balancing") cfg.no_balancing = parse_bool(value, key);
        else if (key == "no_augmentation") cfg.no_augmentation = parse_bool(value, key);
        else if (key == "no_masking") cfg.no_masking = parse_bool(value, key);
        else if (key == "weight_decay") cfg.weight_decay = parse_double(value, key);
        else if (key == "augment_rate") cfg.augment_rate = parse_double(value, key);
        else if (key == "mask_ste") cfg.mask_ste = parse_bool(value, key);
        else if (key == "ste_temp") cfg.ste_temp = parse_double(value, key);
        else throw IoError("unknown config key: " + key);
    }
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_run_config(buf.str());
}

SyntheticSpec parse_synthetic_spec(const std::string& text) {
    SyntheticSpec spec;
    for (const auto& [key, value] : parse_key_values(text)) {
        if (key == "n_instances") spec.n_instances = parse_int(value, key);
        else if (key == "vocab_words") spec.vocab_words = parse_int(value, key);
        else if (key == "vocab_pos") spec.vocab_pos = parse_int(value, key);
        else if (key == "vocab_dep") spec.vocab_dep = parse_int(value, key);
        else if (key == "vocab_ner") spec.vocab_ner = parse_int(value, key);
        else if (key == "len_min") spec.len_min = parse_int(value, key);
        else if (key == "len_max") spec.len_max = parse_int(value, key);
        else if (key == "k_min") spec.k_min = parse_int(value, key);
        else if (key == "k_max") spec.k_max = parse_int(value, key);
        else if (key == "d_v") spec.d_v = parse_int(value, key);
        else if (key == "rho") spec.rho = parse_double(value, key);
        else if (key == "max_aspects") spec.max_aspects = parse_int(value, key);
        else if (key == "distractor_prob") spec.distractor_prob = parse_double(value, key);
        else if (key == "seed") spec.seed = parse_u64(value, key);
        else if (key == "train_frac") spec.train_frac = parse_double(value, key);
        else if (key == "dev_frac") spec.dev_frac = parse_double(value, key);
        else throw IoError("unknown spec key: " + key);
    }
    return spec;
}

SyntheticSpec load_synthetic_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open spec file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_synthetic_spec(buf.str());
}

std::string run_config_to_string(const RunConfig& c) {
    std::ostringstream o;
    o.precision(17);
    o << "gamma = " << c.gamma << "\n";
    o << "lambda = " << c.lambda << "\n";
    o << "d = " << c.d << "\n";
    o << "d_t = " << c.d_t << "\n";
    o << "d_v = " << c.d_v << "\n";
    o << "d_p = " << c.d_p << "\n";
    o << "d_d = " << c.d_d << "\n";
    o << "d_n = " << c.d_n << "\n";
    o << "heads = " << c.heads << "\n";
    o << "lr = " << c.lr << "\n";
    o << "batch_size = " << c.batch_size << "\n";
    o << "epochs = " << c.epochs << "\n";
    o << "seed = " << c.seed << "\n";
    o << "tau_coherence = " << c.tau_coherence << "\n";
    o << "vocab_words = " << c.vocab_words << "\n";
    o << "vocab_pos = " << c.vocab_pos << "\n";
    o << "vocab_dep = " << c.vocab_dep << "\n";
    o << "vocab_ner = " << c.vocab_ner << "\n";
    o << "no_captions = " << (c.no_captions ? "true" : "false") << "\n";
    o << "no_alignment = " << (c.no_alignment ? "true" : "false") << "\n";
    o << "no_balancing = " << (c.no_balancing ? "true" : "false") << "\n";
    o << "no_augmentation = " << (c.no_augmentation ? "true" : "false") << "\n";
    o << "no_masking = " << (c.no_masking ? "true" : "false") << "\n";
    o << "weight_decay = " << c.weight_decay << "\n";
    o << "augment_rate = " << c.augment_rate << "\n";
    o << "mask_ste = " << (c.mask_ste ? "true" : "false") << "\n";
    o << "ste_temp = " << c.ste_temp << "\n";
    return o.str();
}

} // namespace adaptisent
