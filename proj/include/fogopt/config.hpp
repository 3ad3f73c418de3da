#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fogopt/core.hpp"
#include "fogopt/env.hpp"

namespace fogopt::config {

// Flat view of an INI-style file: `[section.sub]` headers, `key = value`
// lines, `#` comments. Keys are stored fully qualified and sorted, so the
// canonical form (and its hash) does not depend on the order fields appear.
class ConfigMap {
  public:
    static ConfigMap parse(const std::string& text);
    static ConfigMap parse_file(const std::string& path);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    long get_long(const std::string& key) const;
    long get_long(const std::string& key, long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_doubles(const std::string& key) const;
    std::vector<long> get_longs(const std::string& key) const;

    void set(const std::string& key, const std::string& value);
    std::string canonical() const;
    std::string hash() const;  // FNV-1a over the canonical form, hex

    const std::map<std::string, std::string>& entries() const { return entries_; }

  private:
    std::map<std::string, std::string> entries_;
};

// Raised by validation with the offending field name in what().
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& field, const std::string& msg)
        : std::runtime_error("config field `" + field + "`: " + msg), field_name(field) {}
    std::string field_name;
};

enum class AlgoKind {
    Mosp,
    BanspOnePoint,
    BanspMultiPoint,
    Exp3sp,
    Saga,
    SgdDual,
    LaSaga,
    QueuePrice,
    QLearn,
};

enum class EnvKind { Fog, Arms, ArmsFogGrid, QueueNet, Mdp, Erm };

std::string to_string(AlgoKind a);
std::string to_string(EnvKind e);
AlgoKind algo_from_string(const std::string& s);
EnvKind env_from_string(const std::string& s);

// Feedback the algorithm consumes / the environment serves; used to reject
// mismatched pairs at validation time.
env::FeedbackMode algo_feedback(AlgoKind a);

struct ExperimentConfig {
    ConfigMap raw;
    std::string name;
    std::vector<std::uint64_t> seeds;
    std::vector<long> horizons;
    std::string output_dir;
    bool benchmark = true;
    bool plots = false;
    int workers = 0;  // 0 = hardware concurrency

    AlgoKind algo = AlgoKind::Mosp;
    EnvKind environment = EnvKind::Fog;

    // Hash of the experiment-defining fields; output placement and worker
    // count do not change what a run computes, so they stay out of the hash.
    std::string hash() const;
};

// Parses and validates; throws ValidationError naming the field on failure.
ExperimentConfig load_experiment(const ConfigMap& map);
ExperimentConfig load_experiment_file(const std::string& path);

}  // namespace fogopt::config
