#include "certagg/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace certagg::harness {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: key '" + key + "' has non-numeric value '" + v + "'");
    }
}

std::int64_t parse_int(const std::string& key, const std::string& v) {
    std::int64_t x = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
        throw std::invalid_argument("config: key '" + key + "' has non-integer value '" + v + "'");
    }
    return x;
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
    std::uint64_t x = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
        throw std::invalid_argument("config: key '" + key + "' has non-integer value '" + v + "'");
    }
    return x;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::invalid_argument("config: key '" + key + "' has non-boolean value '" + v + "'");
}

std::vector<double> parse_double_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
    if (out.empty()) throw std::invalid_argument("config: key '" + key + "' has an empty list");
    return out;
}

std::vector<std::int64_t> parse_int_list(const std::string& key, const std::string& v) {
    std::vector<std::int64_t> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_int(key, trim(item)));
    if (out.empty()) throw std::invalid_argument("config: key '" + key + "' has an empty list");
    return out;
}

}  // namespace

void ExperimentConfig::validate() const {
    partition.validate();
    estimator.validate();
    grouping.validate();
    if (grid_steps < 1) throw std::invalid_argument("config: grid.steps must be >= 1");
    if (!(grid_max > 0.0)) throw std::invalid_argument("config: grid.max_radius must be positive");
    if (!(oracle.accuracy_min >= 0.0 && oracle.accuracy_max <= 1.0 &&
          oracle.accuracy_min <= oracle.accuracy_max)) {
        throw std::invalid_argument("config: oracle accuracy range must lie in [0,1]");
    }
    if (!(oracle.scale_min > 0.0 && oracle.scale_min <= oracle.scale_max)) {
        throw std::invalid_argument("config: oracle scale range must be positive");
    }
    if (target.mode == TargetSpec::Mode::Explicit) {
        if (target.explicit_probs.size() != partition.class_totals.size()) {
            throw std::invalid_argument(
                "config: target.explicit length must match the class count");
        }
    }
    if (target.mode == TargetSpec::Mode::Gap) {
        if (!(target.gap >= 0.0)) throw std::invalid_argument("config: target.gap must be >= 0");
        if (!(target.gap_tolerance > 0.0)) {
            throw std::invalid_argument("config: target.gap_tolerance must be positive");
        }
        if (!(target.concentration > 0.0)) {
            throw std::invalid_argument("config: target.concentration must be positive");
        }
        if (target.max_attempts < 1) {
            throw std::invalid_argument("config: target.max_attempts must be >= 1");
        }
    }
    if (smoothing.enabled) {
        smoothing.params.validate();
        if (smoothing.dim < 2) throw std::invalid_argument("config: smoothing.dim must be >= 2");
        if (!(smoothing.spread > 0.0)) {
            throw std::invalid_argument("config: smoothing.spread must be positive");
        }
        if (smoothing.blob_noise < 0.0) {
            throw std::invalid_argument("config: smoothing.blob_noise must be >= 0");
        }
        if (smoothing.holdout < 1) {
            throw std::invalid_argument("config: smoothing.holdout must be >= 1");
        }
    }
}

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::int64_t num_classes = 0;
    std::int64_t samples_per_class = 0;
    bool have_class_totals = false;

    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config: line " + std::to_string(line_no) +
                                        " is not of the form key = value");
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw std::invalid_argument("config: line " + std::to_string(line_no) +
                                        " has an empty key or value");
        }

        if (key == "seed") {
            cfg.seed = parse_uint(key, value);
        } else if (key == "out") {
            cfg.out_dir = value;
        } else if (key == "grid.steps") {
            cfg.grid_steps = static_cast<std::size_t>(parse_int(key, value));
        } else if (key == "grid.max_radius") {
            cfg.grid_max = parse_double(key, value);
        } else if (key == "partition.scheme") {
            if (value == "dirichlet") {
                cfg.partition.scheme = synth::PartitionScheme::Dirichlet;
            } else if (value == "pareto") {
                cfg.partition.scheme = synth::PartitionScheme::Pareto;
            } else {
                throw std::invalid_argument("config: partition.scheme must be dirichlet or pareto");
            }
        } else if (key == "partition.beta") {
            cfg.partition.beta = parse_double(key, value);
        } else if (key == "partition.x_m") {
            cfg.partition.x_m = parse_double(key, value);
        } else if (key == "partition.clients") {
            cfg.partition.num_clients = static_cast<std::size_t>(parse_int(key, value));
        } else if (key == "partition.class_totals") {
            cfg.partition.class_totals = parse_int_list(key, value);
            have_class_totals = true;
        } else if (key == "partition.num_classes") {
            num_classes = parse_int(key, value);
        } else if (key == "partition.samples_per_class") {
            samples_per_class = parse_int(key, value);
        } else if (key == "oracle.accuracy_min") {
            cfg.oracle.accuracy_min = parse_double(key, value);
        } else if (key == "oracle.accuracy_max") {
            cfg.oracle.accuracy_max = parse_double(key, value);
        } else if (key == "oracle.scale_min") {
            cfg.oracle.scale_min = parse_double(key, value);
        } else if (key == "oracle.scale_max") {
            cfg.oracle.scale_max = parse_double(key, value);
        } else if (key == "smoothing.enabled") {
            cfg.smoothing.enabled = parse_bool(key, value);
        } else if (key == "smoothing.sigma") {
            cfg.smoothing.params.sigma = parse_double(key, value);
        } else if (key == "smoothing.n0") {
            cfg.smoothing.params.n0 = static_cast<int>(parse_int(key, value));
        } else if (key == "smoothing.n") {
            cfg.smoothing.params.n = static_cast<int>(parse_int(key, value));
        } else if (key == "smoothing.alpha") {
            cfg.smoothing.params.alpha_conf = parse_double(key, value);
        } else if (key == "smoothing.dim") {
            cfg.smoothing.dim = static_cast<int>(parse_int(key, value));
        } else if (key == "smoothing.spread") {
            cfg.smoothing.spread = parse_double(key, value);
        } else if (key == "smoothing.blob_noise") {
            cfg.smoothing.blob_noise = parse_double(key, value);
        } else if (key == "smoothing.holdout") {
            cfg.smoothing.holdout = parse_int(key, value);
        } else if (key == "estimator.T") {
            cfg.estimator.T = static_cast<int>(parse_int(key, value));
        } else if (key == "estimator.E") {
            cfg.estimator.E = static_cast<int>(parse_int(key, value));
        } else if (key == "grouping.tau") {
            cfg.grouping.tau = parse_int(key, value);
            cfg.estimator.tau = cfg.grouping.tau;
        } else if (key == "grouping.merge_trailing") {
            cfg.grouping.merge_trailing = parse_bool(key, value);
        } else if (key == "target.mode") {
            if (value == "union") {
                cfg.target.mode = TargetSpec::Mode::Union;
            } else if (value == "explicit") {
                cfg.target.mode = TargetSpec::Mode::Explicit;
            } else if (value == "gap") {
                cfg.target.mode = TargetSpec::Mode::Gap;
            } else {
                throw std::invalid_argument("config: target.mode must be union, explicit or gap");
            }
        } else if (key == "target.explicit") {
            cfg.target.explicit_probs = parse_double_list(key, value);
        } else if (key == "target.gap") {
            cfg.target.gap = parse_double(key, value);
        } else if (key == "target.gap_tolerance") {
            cfg.target.gap_tolerance = parse_double(key, value);
        } else if (key == "target.concentration") {
            cfg.target.concentration = parse_double(key, value);
        } else if (key == "target.max_attempts") {
            cfg.target.max_attempts = parse_int(key, value);
        } else {
            throw std::invalid_argument("config: unknown key '" + key + "' (line " +
                                        std::to_string(line_no) + ")");
        }
    }

    if (!have_class_totals) {
        if (num_classes < 2 || samples_per_class < 1) {
            throw std::invalid_argument(
                "config: set partition.class_totals, or partition.num_classes (>= 2) together "
                "with partition.samples_per_class (>= 1)");
        }
        cfg.partition.class_totals.assign(static_cast<std::size_t>(num_classes),
                                          samples_per_class);
    } else if (num_classes != 0 || samples_per_class != 0) {
        throw std::invalid_argument(
            "config: partition.class_totals conflicts with partition.num_classes / "
            "partition.samples_per_class");
    }

    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

}  // namespace certagg::harness
