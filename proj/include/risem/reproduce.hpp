#pragma once

// Figure presets: scenario text for each published figure, the sweeps that
// regenerate its data, and the checks recorded next to the output.

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "risem/scenario.hpp"

namespace risem {

const char* library_version();

struct Preset {
    std::string name;  // also the output file stem
    std::string yaml;
};

std::vector<std::string> figure_ids();

/// Scenario documents behind a figure. Throws ValidationError for an
/// unknown id.
std::vector<Preset> figure_presets(std::string_view figure);

struct Check {
    enum class Kind { near, at_least, at_most };

    std::string name;
    Kind kind = Kind::near;
    double value = 0.0;
    double expected = 0.0;   // bound for at_least / at_most
    double tolerance = 0.0;  // |value - expected| for near
    bool pass = false;
};

Check make_check(std::string name, Check::Kind kind, double value, double expected, double tolerance = 0.0);

struct ReproduceReport {
    std::string figure;
    std::vector<std::filesystem::path> files;
    std::vector<Check> checks;
    nlohmann::json manifest;

    bool all_passed() const;
};

/// Writes the figure's CSV/JSON files and manifest.json into out_dir.
ReproduceReport reproduce(std::string_view figure, const std::filesystem::path& out_dir, unsigned threads = 1);

// -------------------------------------------------------------- analysis ---

struct Peak {
    double theta_deg = 0.0;
    double value = 0.0;
};

/// Interior grid points strictly above both neighbours, largest first.
std::vector<Peak> local_maxima(const SweepResult& result);

/// Golden-section maximisation of f on [lo, hi] down to width tol.
double golden_max(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-9);

}  // namespace risem
