#include "dpglmb/config.hpp"

#include "dpglmb/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>

namespace dpglmb {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    // Symbolic angles such as "pi/180" are common in tracking configs.
    if (v.rfind("pi", 0) == 0) {
        if (v == "pi") return std::numbers::pi;
        if (v.size() > 3 && v[2] == '/') return std::numbers::pi / to_double(key, v.substr(3));
        if (v.size() > 3 && v[2] == '*') return std::numbers::pi * to_double(key, v.substr(3));
    }
    double out = 0.0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
    if (r.ec != std::errc{} || r.ptr != v.data() + v.size() || !std::isfinite(out)) {
        throw ConfigError("key '" + key + "': expected a number, got '" + value + "'");
    }
    return out;
}

long long to_integer(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    long long out = 0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
    if (r.ec != std::errc{} || r.ptr != v.data() + v.size()) {
        throw ConfigError("key '" + key + "': expected an integer, got '" + value + "'");
    }
    return out;
}

bool to_bool(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("key '" + key + "': expected a boolean, got '" + value + "'");
}

std::vector<double> to_vector(const std::string& key, const std::string& value) {
    std::vector<double> out;
    std::istringstream in(value);
    std::string tok;
    while (in >> tok) out.push_back(to_double(key, tok));
    return out;
}

std::string format_double(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string format_vector(const VectorXd& v) {
    std::string s;
    for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? " " : "") + format_double(v(i));
    return s;
}

// Values whose defaults depend on the scenario kind; resolved after parsing.
struct Deferred {
    std::optional<std::vector<double>> birth_covariance;
    std::optional<double> max_existence;
    std::optional<double> sigma_omega;
    std::optional<double> sigma_bearing;
    std::optional<int> num_tracks;
    std::optional<int> birth_spacing;
    std::optional<double> max_turn_rate;
    std::optional<double> ideal_detection_probability;
    std::optional<double> ideal_clutter_rate;
};

ExperimentConfig from_tree(const boost::property_tree::ptree& tree) {
    ExperimentConfig cfg;
    Deferred deferred;
    auto& sc = cfg.scenario;
    auto& pl = cfg.pipeline;

    using Setter = std::function<void(const std::string& key, const std::string& value)>;
    auto num = [](double& field) -> Setter { return [&field](const auto& k, const auto& v) { field = to_double(k, v); }; };
    auto count = [](auto& field) -> Setter {
        return [&field](const auto& k, const auto& v) {
            const long long x = to_integer(k, v);
            if (x < 0) throw ConfigError("key '" + k + "' must be non-negative");
            field = static_cast<std::remove_reference_t<decltype(field)>>(x);
        };
    };
    auto opt_num = [](auto& field) -> Setter { return [&field](const auto& k, const auto& v) { field = to_double(k, v); }; };
    auto opt_int = [](std::optional<int>& field) -> Setter {
        return [&field](const auto& k, const auto& v) { field = static_cast<int>(to_integer(k, v)); };
    };

    const std::map<std::string, Setter> setters = {
        {"scenario.kind",
         [&](const auto& k, const auto& v) {
             const std::string t = trim(v);
             if (t == "linear") {
                 sc.kind = ScenarioKind::Linear;
             } else if (t == "ct" || t == "constant-turn") {
                 sc.kind = ScenarioKind::ConstantTurn;
             } else {
                 throw ConfigError("key '" + k + "': unknown scenario kind '" + t + "'");
             }
         }},
        {"scenario.seed", count(sc.seed)},
        {"scenario.num_tracks", opt_int(deferred.num_tracks)},
        {"scenario.initial_births", count(sc.shape.initial_births)},
        {"scenario.birth_spacing", opt_int(deferred.birth_spacing)},
        {"scenario.birth_jitter", count(sc.shape.birth_jitter)},
        {"scenario.min_lifetime", count(sc.shape.min_lifetime)},
        {"scenario.max_lifetime", count(sc.shape.max_lifetime)},
        {"scenario.min_speed", num(sc.shape.min_speed)},
        {"scenario.max_speed", num(sc.shape.max_speed)},
        {"scenario.max_turn_rate", opt_num(deferred.max_turn_rate)},
        {"scenario.margin", num(sc.shape.margin)},
        {"scenario.min_range", num(sc.shape.min_range)},
        {"scenario.dt", num(sc.dt)},
        {"scenario.survival_probability", num(sc.survival_probability)},
        {"scenario.sigma_v", num(sc.sigma_v)},
        {"scenario.sigma_omega", opt_num(deferred.sigma_omega)},
        {"scenario.detection_probability", num(sc.detection_probability)},
        {"scenario.clutter_rate", num(sc.clutter_rate)},
        {"scenario.sigma_position", num(sc.sigma_position)},
        {"scenario.x_min", num(sc.rectangle.x_min)},
        {"scenario.x_max", num(sc.rectangle.x_max)},
        {"scenario.y_min", num(sc.rectangle.y_min)},
        {"scenario.y_max", num(sc.rectangle.y_max)},
        {"scenario.sigma_bearing", opt_num(deferred.sigma_bearing)},
        {"scenario.sigma_range", num(sc.sigma_range)},
        {"scenario.max_range", num(sc.max_range)},

        {"filter.variant", [&](const auto&, const auto& v) { cfg.variant = parse_filter_variant(trim(v)); }},
        {"filter.max_hypotheses", count(pl.glmb.max_hypotheses)},
        {"filter.gibbs_iterations", count(pl.glmb.gibbs_iterations)},
        {"filter.gate_threshold",
         [&](const auto& k, const auto& v) {
             pl.glmb.gate_threshold = to_double(k, v);
             pl.cphd.gate_threshold = pl.glmb.gate_threshold;
         }},
        {"filter.hypothesis_prune", num(pl.glmb.hypothesis_prune)},
        {"filter.initial_beta_s", num(pl.initial_beta.s)},
        {"filter.initial_beta_t", num(pl.initial_beta.t)},
        {"filter.beta_inflation", num(pl.beta_inflation)},
        {"filter.smoothing", num(pl.smoothing)},
        {"filter.cphd_max_cardinality", count(pl.cphd.max_cardinality)},
        {"filter.cphd_max_components", count(pl.cphd.reduction.max_components)},
        {"filter.cphd_prune", num(pl.cphd.reduction.prune_threshold)},
        {"filter.cphd_merge", num(pl.cphd.reduction.merge_threshold)},
        {"filter.cphd_beta_merge_tolerance", num(pl.cphd.object_beta_merge_tolerance)},
        {"filter.cphd_extraction_weight", num(pl.cphd.object_extraction_weight)},
        {"filter.ideal_detection_probability", opt_num(deferred.ideal_detection_probability)},
        {"filter.ideal_clutter_rate", opt_num(deferred.ideal_clutter_rate)},
        {"filter.ideal_static_births", [&](const auto& k, const auto& v) { cfg.ideal_static_births = to_bool(k, v); }},
        {"filter.ideal_static_existence", num(cfg.ideal_static_existence)},

        {"birth.max_existence", opt_num(deferred.max_existence)},
        {"birth.expected_births", num(pl.birth.expected_births)},
        {"birth.covariance", [&](const auto& k, const auto& v) { deferred.birth_covariance = to_vector(k, v); }},

        {"clutter.survival_probability", num(pl.clutter.survival_probability)},
        {"clutter.birth_rate", num(pl.clutter.birth_rate)},
        {"clutter.birth_beta_s", num(pl.clutter.birth_beta.s)},
        {"clutter.birth_beta_t", num(pl.clutter.birth_beta.t)},

        {"metrics.cutoff", num(cfg.metrics.cutoff)},
        {"metrics.order", num(cfg.metrics.order)},
        {"metrics.window", [&](const auto& k, const auto& v) { cfg.metrics.window = static_cast<int>(to_integer(k, v)); }},

        {"experiment.runs", [&](const auto& k, const auto& v) { cfg.runs = static_cast<int>(to_integer(k, v)); }},
        {"experiment.base_seed", count(cfg.base_seed)},
        {"experiment.workers", [&](const auto& k, const auto& v) { cfg.workers = static_cast<int>(to_integer(k, v)); }},
        {"experiment.output_dir", [&](const auto&, const auto& v) { cfg.output_dir = trim(v); }},
    };

    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty()) throw ConfigError("key '" + section + "' outside any section");
        for (const auto& [key, node] : body) {
            const std::string full = section + "." + key;
            const std::string value = node.get_value<std::string>();
            if (full == "scenario.duration") {
                const long long d = to_integer(full, value);
                if (d < 1) throw ConfigError("scenario.duration must be at least 1");
                sc.shape.duration = static_cast<int>(d);
                continue;
            }
            if (section == "scenario" && key.rfind("track", 0) == 0 && key != "tracks") {
                const auto vals = to_vector(full, value);
                if (vals.size() != 6 && vals.size() != 7) {
                    throw ConfigError("key '" + full + "': expected 'birth death p_h p_v v_h v_v [omega]'");
                }
                TruthTrack t;
                t.birth = static_cast<int>(vals[0]);
                t.death = static_cast<int>(vals[1]);
                t.initial_state = Eigen::Map<const VectorXd>(vals.data() + 2, static_cast<Eigen::Index>(vals.size() - 2));
                t.label = Label{t.birth, static_cast<int>(sc.tracks.size()) + 1};
                sc.tracks.push_back(std::move(t));
                continue;
            }
            const auto it = setters.find(full);
            if (it == setters.end()) throw ConfigError("unknown configuration key '" + full + "'");
            it->second(full, value);
        }
    }

    // Kind-dependent defaults.
    const bool ct = sc.kind == ScenarioKind::ConstantTurn;
    sc.shape.num_tracks = deferred.num_tracks.value_or(ct ? 10 : 12);
    sc.shape.birth_spacing = deferred.birth_spacing.value_or(ct ? 10 : 8);
    sc.shape.max_turn_rate = deferred.max_turn_rate.value_or(ct ? 6.0 * std::numbers::pi / 180.0 : 0.0);
    sc.sigma_omega = deferred.sigma_omega.value_or(ct ? std::numbers::pi / 180.0 : 0.0);
    sc.sigma_bearing = deferred.sigma_bearing.value_or(std::numbers::pi / 180.0);
    pl.birth.max_existence = deferred.max_existence.value_or(ct ? 0.02 : 0.01);
    const int dim = ct ? 5 : 4;
    std::vector<double> diag = deferred.birth_covariance.value_or(
        ct ? std::vector<double>{50.0, 50.0, 50.0, 50.0, std::numbers::pi / 30.0} : std::vector<double>{10.0, 10.0, 10.0, 10.0});
    if (static_cast<int>(diag.size()) != dim) {
        throw ConfigError("birth.covariance needs " + std::to_string(dim) + " diagonal entries");
    }
    pl.birth.covariance = Eigen::Map<const VectorXd>(diag.data(), dim).asDiagonal();
    pl.true_parameters = {deferred.ideal_detection_probability.value_or(sc.detection_probability),
                          deferred.ideal_clutter_rate.value_or(sc.clutter_rate)};
    for (const auto& t : sc.tracks) {
        if (t.initial_state.size() != dim) throw ConfigError("explicit track state dimension does not match the scenario");
    }
    cfg.validate();
    return cfg;
}

}  // namespace

std::string to_string(ScenarioKind kind) { return kind == ScenarioKind::Linear ? "linear" : "ct"; }

std::string to_string(FilterVariant variant) { return variant == FilterVariant::DpGlmb ? "dp-glmb" : "ideal-glmb"; }

FilterVariant parse_filter_variant(const std::string& text) {
    if (text == "dp-glmb") return FilterVariant::DpGlmb;
    if (text == "ideal-glmb") return FilterVariant::IdealGlmb;
    throw ConfigError("unknown filter variant '" + text + "' (expected dp-glmb or ideal-glmb)");
}

void ExperimentConfig::validate() const {
    if (runs < 1) throw ConfigError("experiment.runs must be at least 1");
    if (workers < 1) throw ConfigError("experiment.workers must be at least 1");
    if (!(ideal_static_existence >= 0.0 && ideal_static_existence <= 1.0)) {
        throw ConfigError("filter.ideal_static_existence must lie in [0,1]");
    }
    const auto& s = scenario;
    if (!(s.detection_probability > 0.0 && s.detection_probability <= 1.0)) {
        throw ConfigError("scenario.detection_probability must lie in (0,1]");
    }
    if (s.clutter_rate < 0.0) throw ConfigError("scenario.clutter_rate must be non-negative");
    if (!(s.dt > 0.0)) throw ConfigError("scenario.dt must be positive");
    if (s.shape.min_lifetime < 1 || s.shape.max_lifetime < s.shape.min_lifetime) {
        throw ConfigError("scenario lifetimes must satisfy 1 <= min_lifetime <= max_lifetime");
    }
    if (s.shape.min_speed < 0.0 || s.shape.max_speed < s.shape.min_speed) {
        throw ConfigError("scenario speeds must satisfy 0 <= min_speed <= max_speed");
    }
    for (const auto& t : s.tracks) {
        if (!(t.birth >= 1 && t.birth < t.death && t.death <= s.shape.duration + 1)) {
            throw ConfigError("explicit track must satisfy 1 <= birth < death <= duration + 1");
        }
    }
    if (!(pipeline.birth.max_existence >= 0.0 && pipeline.birth.max_existence <= 1.0)) {
        throw ConfigError("birth.max_existence must lie in [0,1]");
    }
    if (!(pipeline.birth.expected_births > 0.0)) throw ConfigError("birth.expected_births must be positive");
    try {
        metrics.validate();
        pipeline.validate();
    } catch (const ContractViolation& e) {
        throw ConfigError(e.what());
    }
}

std::map<std::string, std::string> ExperimentConfig::echo() const {
    std::map<std::string, std::string> e;
    const auto& s = scenario;
    const auto& p = pipeline;
    e["scenario.kind"] = to_string(s.kind);
    e["scenario.seed"] = std::to_string(s.seed);
    e["scenario.duration"] = std::to_string(s.shape.duration);
    e["scenario.num_tracks"] = std::to_string(s.tracks.empty() ? s.shape.num_tracks : static_cast<int>(s.tracks.size()));
    e["scenario.initial_births"] = std::to_string(s.shape.initial_births);
    e["scenario.birth_spacing"] = std::to_string(s.shape.birth_spacing);
    e["scenario.birth_jitter"] = std::to_string(s.shape.birth_jitter);
    e["scenario.min_lifetime"] = std::to_string(s.shape.min_lifetime);
    e["scenario.max_lifetime"] = std::to_string(s.shape.max_lifetime);
    e["scenario.min_speed"] = format_double(s.shape.min_speed);
    e["scenario.max_speed"] = format_double(s.shape.max_speed);
    e["scenario.max_turn_rate"] = format_double(s.shape.max_turn_rate);
    e["scenario.margin"] = format_double(s.shape.margin);
    e["scenario.min_range"] = format_double(s.shape.min_range);
    e["scenario.dt"] = format_double(s.dt);
    e["scenario.survival_probability"] = format_double(s.survival_probability);
    e["scenario.sigma_v"] = format_double(s.sigma_v);
    e["scenario.sigma_omega"] = format_double(s.sigma_omega);
    e["scenario.detection_probability"] = format_double(s.detection_probability);
    e["scenario.clutter_rate"] = format_double(s.clutter_rate);
    if (s.kind == ScenarioKind::Linear) {
        e["scenario.sigma_position"] = format_double(s.sigma_position);
        e["scenario.x_min"] = format_double(s.rectangle.x_min);
        e["scenario.x_max"] = format_double(s.rectangle.x_max);
        e["scenario.y_min"] = format_double(s.rectangle.y_min);
        e["scenario.y_max"] = format_double(s.rectangle.y_max);
    } else {
        e["scenario.sigma_bearing"] = format_double(s.sigma_bearing);
        e["scenario.sigma_range"] = format_double(s.sigma_range);
        e["scenario.max_range"] = format_double(s.max_range);
    }
    for (std::size_t i = 0; i < s.tracks.size(); ++i) {
        const auto& t = s.tracks[i];
        e["scenario.track" + std::to_string(i + 1)] =
            std::to_string(t.birth) + " " + std::to_string(t.death) + " " + format_vector(t.initial_state);
    }
    e["filter.variant"] = to_string(variant);
    e["filter.max_hypotheses"] = std::to_string(p.glmb.max_hypotheses);
    e["filter.gibbs_iterations"] = std::to_string(p.glmb.gibbs_iterations);
    e["filter.gate_threshold"] = format_double(p.glmb.gate_threshold);
    e["filter.hypothesis_prune"] = format_double(p.glmb.hypothesis_prune);
    e["filter.initial_beta_s"] = format_double(p.initial_beta.s);
    e["filter.initial_beta_t"] = format_double(p.initial_beta.t);
    e["filter.beta_inflation"] = format_double(p.beta_inflation);
    e["filter.smoothing"] = format_double(p.smoothing);
    e["filter.cphd_max_cardinality"] = std::to_string(p.cphd.max_cardinality);
    e["filter.cphd_max_components"] = std::to_string(p.cphd.reduction.max_components);
    e["filter.cphd_prune"] = format_double(p.cphd.reduction.prune_threshold);
    e["filter.cphd_merge"] = format_double(p.cphd.reduction.merge_threshold);
    e["filter.cphd_beta_merge_tolerance"] = format_double(p.cphd.object_beta_merge_tolerance);
    e["filter.cphd_extraction_weight"] = format_double(p.cphd.object_extraction_weight);
    e["filter.ideal_detection_probability"] = format_double(p.true_parameters.detection_probability);
    e["filter.ideal_clutter_rate"] = format_double(p.true_parameters.clutter_rate);
    e["filter.ideal_static_births"] = ideal_static_births ? "true" : "false";
    e["filter.ideal_static_existence"] = format_double(ideal_static_existence);
    e["birth.max_existence"] = format_double(p.birth.max_existence);
    e["birth.expected_births"] = format_double(p.birth.expected_births);
    e["birth.covariance"] = format_vector(p.birth.covariance.diagonal());
    e["clutter.survival_probability"] = format_double(p.clutter.survival_probability);
    e["clutter.birth_rate"] = format_double(p.clutter.birth_rate);
    e["clutter.birth_beta_s"] = format_double(p.clutter.birth_beta.s);
    e["clutter.birth_beta_t"] = format_double(p.clutter.birth_beta.t);
    e["metrics.cutoff"] = format_double(metrics.cutoff);
    e["metrics.order"] = format_double(metrics.order);
    e["metrics.window"] = std::to_string(metrics.window);
    e["experiment.runs"] = std::to_string(runs);
    e["experiment.base_seed"] = std::to_string(base_seed);
    e["experiment.workers"] = std::to_string(workers);
    e["experiment.output_dir"] = output_dir.string();
    return e;
}

ExperimentConfig parse_config(const std::string& text) {
    boost::property_tree::ptree tree;
    std::istringstream in(text);
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("malformed configuration: ") + e.what());
    }
    return from_tree(tree);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open configuration file '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return parse_config(buf.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

Models make_models(const ScenarioConfig& cfg) {
    if (cfg.kind == ScenarioKind::Linear) {
        return {MotionModel::constant_velocity(cfg.dt, cfg.sigma_v, cfg.survival_probability),
                SensorModel::linear(4, cfg.sigma_position, cfg.rectangle)};
    }
    return {MotionModel::constant_turn(cfg.dt, cfg.sigma_v, cfg.sigma_omega, cfg.survival_probability),
            SensorModel::bearing_range(5, cfg.sigma_bearing, cfg.sigma_range, cfg.max_range)};
}

Scenario make_scenario(const ScenarioConfig& cfg) {
    const Models models = make_models(cfg);
    if (cfg.tracks.empty()) {
        return generate_scenario(cfg.shape, models.motion, models.sensor, cfg.detection_probability, cfg.clutter_rate,
                                 cfg.seed);
    }
    Scenario sc;
    sc.duration = cfg.shape.duration;
    sc.dt = cfg.dt;
    sc.motion = models.motion;
    sc.sensor = models.sensor;
    sc.true_detection_probability = cfg.detection_probability;
    sc.true_clutter_rate = cfg.clutter_rate;
    sc.tracks = cfg.tracks;
    return sc;
}

}  // namespace dpglmb
