#pragma once

#include <map>
#include <string>
#include <vector>

#include "core/nets.hpp"
#include "core/synth.hpp"

namespace bseg {

// Flat key=value run configuration. Every key is validated against the
// registry; unknown keys are rejected before any work happens.
class RunConfig {
public:
    RunConfig();  // registry defaults

    void load_file(const std::string& path);
    void set(const std::string& key, const std::string& value);
    std::string get(const std::string& key) const;

    double get_double(const std::string& key) const;
    int get_int(const std::string& key) const;
    uint64_t get_u64(const std::string& key) const;

    TrainConfig train_config() const;
    ShapeParams shape_params() const;

    // "key = default  # description" lines for --help output
    static std::string registry_help();

private:
    std::map<std::string, std::string> values_;
};

}  // namespace bseg
