#include "volcast/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "volcast/errors.hpp"

namespace volcast::harness {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::set<std::string>& known,
                         const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        if (!known.count(key)) {
            throw ConfigError("unknown config key '" + key + "' in " + where);
        }
    }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("bad value for config key '" + std::string(key) + "': " + e.what());
    }
}

void read_date(const json& obj, const char* key, Date& out) {
    if (!obj.contains(key)) return;
    if (!obj.at(key).is_string()) {
        throw ConfigError("config key '" + std::string(key) + "' must be a YYYY-MM-DD string");
    }
    try {
        out = Date::parse(obj.at(key).get<std::string>());
    } catch (const DataError& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

DataKind parse_kind(const std::string& s) {
    if (s == "synthetic") return DataKind::kSynthetic;
    if (s == "prices_csv") return DataKind::kPricesCsv;
    if (s == "volatility_csv") return DataKind::kVolatilityCsv;
    throw ConfigError("data.kind must be synthetic, prices_csv or volatility_csv (got '" + s +
                      "')");
}

std::string kind_name(DataKind kind) {
    switch (kind) {
        case DataKind::kSynthetic: return "synthetic";
        case DataKind::kPricesCsv: return "prices_csv";
        case DataKind::kVolatilityCsv: return "volatility_csv";
    }
    return "synthetic";
}

tcn::LossMode parse_loss(const std::string& s) {
    if (s == "sequence") return tcn::LossMode::kSequence;
    if (s == "last_step") return tcn::LossMode::kLastStep;
    throw ConfigError("cnn.loss must be 'sequence' or 'last_step' (got '" + s + "')");
}

} // namespace

ExperimentConfig parse_config_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config root must be a JSON object");

    ExperimentConfig cfg;
    reject_unknown_keys(doc, {"seed", "output_dir", "allow_partial", "threads", "data", "split",
                              "cnn", "arima"},
                        "config root");
    read(doc, "seed", cfg.seed);
    read(doc, "output_dir", cfg.output_dir);
    read(doc, "allow_partial", cfg.allow_partial);
    read(doc, "threads", cfg.threads);

    if (doc.contains("data")) {
        const json& data = doc.at("data");
        reject_unknown_keys(data, {"kind", "path", "max_missing", "synthetic"}, "data");
        std::string kind = kind_name(cfg.data.kind);
        read(data, "kind", kind);
        cfg.data.kind = parse_kind(kind);
        read(data, "path", cfg.data.path);
        read(data, "max_missing", cfg.data.max_missing);
        if (data.contains("synthetic")) {
            const json& syn = data.at("synthetic");
            reject_unknown_keys(syn,
                                {"n_series", "n_days", "phi", "sigma", "factor_phi",
                                 "factor_sigma", "mu_min", "mu_max", "beta_min", "beta_max",
                                 "burn_in", "start_date"},
                                "data.synthetic");
            read(syn, "n_series", cfg.data.n_series);
            read(syn, "n_days", cfg.data.n_days);
            auto& g = cfg.data.generator;
            read(syn, "phi", g.phi);
            read(syn, "sigma", g.sigma);
            read(syn, "factor_phi", g.factor_phi);
            read(syn, "factor_sigma", g.factor_sigma);
            read(syn, "mu_min", g.mu_min);
            read(syn, "mu_max", g.mu_max);
            read(syn, "beta_min", g.beta_min);
            read(syn, "beta_max", g.beta_max);
            read(syn, "burn_in", g.burn_in);
            read_date(syn, "start_date", g.start_date);
        }
    }

    if (doc.contains("split")) {
        const json& split = doc.at("split");
        reject_unknown_keys(split, {"train_fraction", "holdout_count"}, "split");
        read(split, "train_fraction", cfg.train_fraction);
        read(split, "holdout_count", cfg.holdout_count);
    }

    if (doc.contains("cnn")) {
        const json& cnn = doc.at("cnn");
        reject_unknown_keys(cnn,
                            {"hidden_layers", "filters", "kernel", "input_length", "epochs",
                             "batch_size", "loss", "shuffle_each_epoch", "rho", "epsilon"},
                            "cnn");
        read(cnn, "hidden_layers", cfg.cnn.hidden_layers);
        read(cnn, "filters", cfg.cnn.filters);
        read(cnn, "kernel", cfg.cnn.kernel);
        read(cnn, "input_length", cfg.cnn.input_length);
        read(cnn, "epochs", cfg.cnn.train.epochs);
        read(cnn, "batch_size", cfg.cnn.train.batch_size);
        std::string loss = cfg.cnn.train.loss_mode == tcn::LossMode::kSequence ? "sequence"
                                                                               : "last_step";
        read(cnn, "loss", loss);
        cfg.cnn.train.loss_mode = parse_loss(loss);
        read(cnn, "shuffle_each_epoch", cfg.cnn.train.shuffle_each_epoch);
        read(cnn, "rho", cfg.cnn.train.rho);
        read(cnn, "epsilon", cfg.cnn.train.epsilon);
    }

    if (doc.contains("arima")) {
        const json& ar = doc.at("arima");
        reject_unknown_keys(ar, {"enabled", "max_p", "max_q", "max_d"}, "arima");
        read(ar, "enabled", cfg.arima.enabled);
        read(ar, "max_p", cfg.arima.max_p);
        read(ar, "max_q", cfg.arima.max_q);
        read(ar, "max_d", cfg.arima.max_d);
    }

    if (cfg.holdout_count < 1) throw ConfigError("split.holdout_count must be >= 1");
    if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0)) {
        throw ConfigError("split.train_fraction must be in (0,1)");
    }
    if (cfg.data.kind != DataKind::kSynthetic && cfg.data.path.empty()) {
        throw ConfigError("data.path is required for kind '" + kind_name(cfg.data.kind) + "'");
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config_json(buffer.str());
}

std::string config_to_json(const ExperimentConfig& cfg) {
    json doc;
    doc["seed"] = cfg.seed;
    doc["output_dir"] = cfg.output_dir;
    doc["allow_partial"] = cfg.allow_partial;
    doc["threads"] = cfg.threads;
    doc["data"]["kind"] = kind_name(cfg.data.kind);
    doc["data"]["path"] = cfg.data.path;
    doc["data"]["max_missing"] = cfg.data.max_missing;
    const auto& g = cfg.data.generator;
    doc["data"]["synthetic"] = {
        {"n_series", cfg.data.n_series},
        {"n_days", cfg.data.n_days},
        {"phi", g.phi},
        {"sigma", g.sigma},
        {"factor_phi", g.factor_phi},
        {"factor_sigma", g.factor_sigma},
        {"mu_min", g.mu_min},
        {"mu_max", g.mu_max},
        {"beta_min", g.beta_min},
        {"beta_max", g.beta_max},
        {"burn_in", g.burn_in},
        {"start_date", g.start_date.to_string()},
    };
    doc["split"] = {{"train_fraction", cfg.train_fraction}, {"holdout_count", cfg.holdout_count}};
    doc["cnn"] = {
        {"hidden_layers", cfg.cnn.hidden_layers},
        {"filters", cfg.cnn.filters},
        {"kernel", cfg.cnn.kernel},
        {"input_length", cfg.cnn.input_length},
        {"epochs", cfg.cnn.train.epochs},
        {"batch_size", cfg.cnn.train.batch_size},
        {"loss", cfg.cnn.train.loss_mode == tcn::LossMode::kSequence ? "sequence" : "last_step"},
        {"shuffle_each_epoch", cfg.cnn.train.shuffle_each_epoch},
        {"rho", cfg.cnn.train.rho},
        {"epsilon", cfg.cnn.train.epsilon},
    };
    doc["arima"] = {{"enabled", cfg.arima.enabled},
                    {"max_p", cfg.arima.max_p},
                    {"max_q", cfg.arima.max_q},
                    {"max_d", cfg.arima.max_d}};
    return doc.dump(2);
}

std::string config_digest(const ExperimentConfig& cfg) {
    // hash only the fields that determine results; where outputs land and
    // how many workers computed them do not change what gets computed
    json doc = json::parse(config_to_json(cfg));
    doc.erase("output_dir");
    doc.erase("threads");
    doc.erase("allow_partial");
    const std::string text = doc.dump(2);
    std::uint64_t hash = 1469598103934665603ull;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

} // namespace volcast::harness
