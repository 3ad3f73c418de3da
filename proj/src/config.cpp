#include "fogopt/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace fogopt::config {

namespace {
std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}
}  // namespace

ConfigMap ConfigMap::parse(const std::string& text) {
    ConfigMap map;
    std::istringstream is(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::runtime_error("config line " + std::to_string(lineno) +
                                         ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(lineno) +
                                     ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::runtime_error("config line " + std::to_string(lineno) + ": empty key");
        map.entries_[section.empty() ? key : section + "." + key] = value;
    }
    return map;
}

ConfigMap ConfigMap::parse_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read config file " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse(ss.str());
}

bool ConfigMap::has(const std::string& key) const { return entries_.count(key) > 0; }

std::string ConfigMap::get_string(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) throw ValidationError(key, "missing required field");
    return it->second;
}

std::string ConfigMap::get_string(const std::string& key, const std::string& fallback) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? fallback : it->second;
}

double ConfigMap::get_double(const std::string& key) const {
    const std::string v = get_string(key);
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ValidationError(key, "not a number: " + v);
    }
}

double ConfigMap::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

long ConfigMap::get_long(const std::string& key) const {
    const std::string v = get_string(key);
    try {
        std::size_t pos = 0;
        const long d = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ValidationError(key, "not an integer: " + v);
    }
}

long ConfigMap::get_long(const std::string& key, long fallback) const {
    return has(key) ? get_long(key) : fallback;
}

bool ConfigMap::get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string v = get_string(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ValidationError(key, "not a boolean: " + v);
}

std::vector<double> ConfigMap::get_doubles(const std::string& key) const {
    std::istringstream is(get_string(key));
    std::vector<double> out;
    double v;
    while (is >> v) out.push_back(v);
    if (!is.eof()) throw ValidationError(key, "not a list of numbers");
    return out;
}

std::vector<long> ConfigMap::get_longs(const std::string& key) const {
    std::istringstream is(get_string(key));
    std::vector<long> out;
    long v;
    while (is >> v) out.push_back(v);
    if (!is.eof()) throw ValidationError(key, "not a list of integers");
    return out;
}

void ConfigMap::set(const std::string& key, const std::string& value) { entries_[key] = value; }

std::string ConfigMap::canonical() const {
    std::ostringstream os;
    for (const auto& [k, v] : entries_) os << k << "=" << v << "\n";
    return os.str();
}

std::string ConfigMap::hash() const {
    const std::string c = canonical();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : c) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string to_string(AlgoKind a) {
    switch (a) {
        case AlgoKind::Mosp: return "mosp";
        case AlgoKind::BanspOnePoint: return "bansp1";
        case AlgoKind::BanspMultiPoint: return "banspM";
        case AlgoKind::Exp3sp: return "exp3sp";
        case AlgoKind::Saga: return "saga";
        case AlgoKind::SgdDual: return "sgd-dual";
        case AlgoKind::LaSaga: return "la-saga";
        case AlgoKind::QueuePrice: return "queue-price";
        case AlgoKind::QLearn: return "qlearn";
    }
    return "?";
}

std::string to_string(EnvKind e) {
    switch (e) {
        case EnvKind::Fog: return "fog";
        case EnvKind::Arms: return "arms";
        case EnvKind::ArmsFogGrid: return "arms-fog-grid";
        case EnvKind::QueueNet: return "queue-net";
        case EnvKind::Mdp: return "mdp";
        case EnvKind::Erm: return "erm";
    }
    return "?";
}

AlgoKind algo_from_string(const std::string& s) {
    if (s == "mosp") return AlgoKind::Mosp;
    if (s == "bansp1") return AlgoKind::BanspOnePoint;
    if (s == "banspM") return AlgoKind::BanspMultiPoint;
    if (s == "exp3sp") return AlgoKind::Exp3sp;
    if (s == "saga") return AlgoKind::Saga;
    if (s == "sgd-dual") return AlgoKind::SgdDual;
    if (s == "la-saga") return AlgoKind::LaSaga;
    if (s == "queue-price") return AlgoKind::QueuePrice;
    if (s == "qlearn") return AlgoKind::QLearn;
    throw ValidationError("algorithm.id", "unknown algorithm: " + s);
}

EnvKind env_from_string(const std::string& s) {
    if (s == "fog") return EnvKind::Fog;
    if (s == "arms") return EnvKind::Arms;
    if (s == "arms-fog-grid") return EnvKind::ArmsFogGrid;
    if (s == "queue-net") return EnvKind::QueueNet;
    if (s == "mdp") return EnvKind::Mdp;
    if (s == "erm") return EnvKind::Erm;
    throw ValidationError("environment.id", "unknown environment: " + s);
}

env::FeedbackMode algo_feedback(AlgoKind a) {
    switch (a) {
        case AlgoKind::Mosp: return env::FeedbackMode::FullInfo;
        case AlgoKind::BanspOnePoint: return env::FeedbackMode::OnePoint;
        case AlgoKind::BanspMultiPoint: return env::FeedbackMode::MultiPoint;
        case AlgoKind::Exp3sp: return env::FeedbackMode::ArmValue;
        default: return env::FeedbackMode::FullInfo;  // state-based algorithms
    }
}

namespace {

void validate_pairing(const ExperimentConfig& cfg) {
    const EnvKind e = cfg.environment;
    const AlgoKind a = cfg.algo;
    auto fail = [&] {
        throw ValidationError("algorithm.feedback",
                              to_string(a) + " cannot run against the " + to_string(e) +
                                  " environment (feedback mismatch)");
    };
    switch (a) {
        case AlgoKind::Mosp:
        case AlgoKind::BanspOnePoint:
        case AlgoKind::BanspMultiPoint:
            if (e != EnvKind::Fog) fail();
            break;
        case AlgoKind::Exp3sp:
            if (e != EnvKind::Arms && e != EnvKind::ArmsFogGrid) fail();
            break;
        case AlgoKind::Saga:
        case AlgoKind::SgdDual:
            if (e != EnvKind::Erm) fail();
            break;
        case AlgoKind::LaSaga:
        case AlgoKind::QueuePrice:
            if (e != EnvKind::QueueNet) fail();
            break;
        case AlgoKind::QLearn:
            if (e != EnvKind::Mdp) fail();
            break;
    }
}

}  // namespace

std::string ExperimentConfig::hash() const {
    ConfigMap filtered = raw;
    filtered.set("experiment.output_dir", "");
    filtered.set("experiment.workers", "");
    filtered.set("experiment.plots", "");
    return filtered.hash();
}

ExperimentConfig load_experiment(const ConfigMap& map) {
    ExperimentConfig cfg;
    cfg.raw = map;
    cfg.name = map.get_string("experiment.name", "experiment");
    for (long s : map.get_longs("experiment.seeds")) {
        if (s < 0) throw ValidationError("experiment.seeds", "seeds must be nonnegative");
        cfg.seeds.push_back(static_cast<std::uint64_t>(s));
    }
    if (cfg.seeds.empty()) throw ValidationError("experiment.seeds", "need at least one seed");
    cfg.horizons = map.get_longs("experiment.horizons");
    if (cfg.horizons.empty())
        throw ValidationError("experiment.horizons", "need at least one horizon");
    for (long t : cfg.horizons)
        if (t < 1) throw ValidationError("experiment.horizons", "horizons must be >= 1");
    cfg.output_dir = map.get_string("experiment.output_dir", "out");
    cfg.benchmark = map.get_bool("experiment.benchmark", true);
    cfg.plots = map.get_bool("experiment.plots", false);
    cfg.workers = static_cast<int>(map.get_long("experiment.workers", 0));
    if (cfg.workers < 0) throw ValidationError("experiment.workers", "must be >= 0");

    cfg.algo = algo_from_string(map.get_string("algorithm.id"));
    cfg.environment = env_from_string(map.get_string("environment.id"));
    if (map.has("environment.feedback")) {
        // optional explicit declaration, cross-checked against the algorithm
        const std::string fb = map.get_string("environment.feedback");
        if (fb != to_string(algo_feedback(cfg.algo)))
            throw ValidationError("environment.feedback",
                                  "declared feedback `" + fb + "` does not match " +
                                      to_string(cfg.algo));
    }
    validate_pairing(cfg);
    return cfg;
}

ExperimentConfig load_experiment_file(const std::string& path) {
    return load_experiment(ConfigMap::parse_file(path));
}

}  // namespace fogopt::config
