#include "inflchs/config.hpp"

#include "inflchs/errors.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace inflchs {

namespace {

using nlohmann::json;

const json& require(const json& obj, const std::string& key, const std::string& pointer) {
    if (!obj.contains(key)) {
        throw ConfigError(pointer + "/" + key, "required field is missing");
    }
    return obj.at(key);
}

void only_keys(const json& obj, const std::set<std::string>& allowed, const std::string& pointer) {
    for (const auto& item : obj.items()) {
        if (!allowed.count(item.key())) {
            throw ConfigError(pointer + "/" + item.key(), "unknown field");
        }
    }
}

double number_at(const json& v, const std::string& pointer) {
    if (!v.is_number()) {
        throw ConfigError(pointer, "expected a number");
    }
    const double x = v.get<double>();
    if (!std::isfinite(x)) {
        throw ConfigError(pointer, "expected a finite number");
    }
    return x;
}

std::int64_t integer_at(const json& v, const std::string& pointer) {
    if (!v.is_number_integer()) {
        throw ConfigError(pointer, "expected an integer");
    }
    return v.get<std::int64_t>();
}

std::string string_at(const json& v, const std::string& pointer) {
    if (!v.is_string()) {
        throw ConfigError(pointer, "expected a string");
    }
    return v.get<std::string>();
}

AccuracySpec parse_accuracy(const json& doc, sampling::Method method) {
    const std::string ptr = "/accuracy";
    if (!doc.is_object()) {
        throw ConfigError(ptr, "expected an object");
    }
    AccuracySpec acc;
    const bool gaussian = method == sampling::Method::gaussian;
    if (doc.contains("eps")) {
        const std::set<std::string> allowed = gaussian ? std::set<std::string>{"eps"}
                                                       : std::set<std::string>{"eps", "seed"};
        for (const auto& item : doc.items()) {
            if (!allowed.count(item.key())) {
                throw ConfigError(ptr + "/" + item.key(),
                                  "explicit plan parameters cannot be combined with eps");
            }
        }
        const double eps = number_at(doc.at("eps"), ptr + "/eps");
        if (!(eps > 0.0 && eps < 1.0)) {
            throw ConfigError(ptr + "/eps", "must lie in (0, 1)");
        }
        acc.eps = eps;
    } else {
        const double K = number_at(require(doc, "K", ptr), ptr + "/K");
        if (!(K > 0.0)) {
            throw ConfigError(ptr + "/K", "must be positive");
        }
        acc.K = K;
        if (gaussian) {
            only_keys(doc, {"K", "M", "Q"}, ptr);
            const auto M = integer_at(require(doc, "M", ptr), ptr + "/M");
            const auto Q = integer_at(require(doc, "Q", ptr), ptr + "/Q");
            if (M < 1 || M > (1LL << 30)) {
                throw ConfigError(ptr + "/M", "must lie in [1, 2^30]");
            }
            if (Q < 1 || Q > sampling::kMaxGaussNodes) {
                throw ConfigError(ptr + "/Q", "must lie in [1, 64]");
            }
            acc.M = static_cast<int>(M);
            acc.Q = static_cast<int>(Q);
        } else {
            only_keys(doc, {"K", "Ns", "seed"}, ptr);
            acc.Ns = integer_at(require(doc, "Ns", ptr), ptr + "/Ns");
            if (acc.Ns < 1 || acc.Ns > sampling::kMaxMonteCarloSamples) {
                throw ConfigError(ptr + "/Ns", "must lie in [1, 1e9]");
            }
        }
    }
    if (doc.contains("seed")) {
        const json& s = doc.at("seed");
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0)) {
            throw ConfigError(ptr + "/seed", "expected a non-negative integer");
        }
        acc.seed = s.get<std::uint64_t>();
    }
    return acc;
}

} // namespace

kernel::KernelSpec RunConfig::make_kernel() const {
    return family == kernel::Family::cauchy ? kernel::KernelSpec::cauchy()
                                            : kernel::KernelSpec::beta(beta);
}

RunConfig parse_config(const json& doc) {
    if (!doc.is_object()) {
        throw ConfigError("", "configuration must be a JSON object");
    }
    only_keys(doc, {"schema_version", "problem", "kernel", "method", "accuracy", "T", "output", "emit"},
              "");
    RunConfig cfg;
    if (integer_at(require(doc, "schema_version", ""), "/schema_version") != kConfigSchemaVersion) {
        throw ConfigError("/schema_version", "unsupported version");
    }

    const json& problem = require(doc, "problem", "");
    if (!problem.is_object()) {
        throw ConfigError("/problem", "expected an object");
    }
    only_keys(problem, {"name", "params"}, "/problem");
    cfg.problem = string_at(require(problem, "name", "/problem"), "/problem/name");
    if (problem.contains("params")) {
        if (!problem.at("params").is_object()) {
            throw ConfigError("/problem/params", "expected an object");
        }
        cfg.params = problem.at("params");
    }

    if (doc.contains("kernel")) {
        const json& k = doc.at("kernel");
        if (!k.is_object()) {
            throw ConfigError("/kernel", "expected an object");
        }
        only_keys(k, {"family", "beta"}, "/kernel");
        try {
            cfg.family = kernel::parse_family(string_at(require(k, "family", "/kernel"), "/kernel/family"));
        } catch (const InvalidArgument& e) {
            throw ConfigError("/kernel/family", e.what());
        }
        if (k.contains("beta")) {
            if (cfg.family != kernel::Family::beta) {
                throw ConfigError("/kernel/beta", "only valid for the beta family");
            }
            cfg.beta = number_at(k.at("beta"), "/kernel/beta");
            if (!(cfg.beta > 0.0 && cfg.beta < 1.0)) {
                throw ConfigError("/kernel/beta", "must lie in (0, 1)");
            }
        }
    }

    if (doc.contains("method")) {
        try {
            cfg.method = sampling::parse_method(string_at(doc.at("method"), "/method"));
        } catch (const InvalidArgument& e) {
            throw ConfigError("/method", e.what());
        }
    }
    cfg.accuracy = parse_accuracy(require(doc, "accuracy", ""), cfg.method);

    cfg.T = number_at(require(doc, "T", ""), "/T");
    if (!(cfg.T >= 0.0)) {
        throw ConfigError("/T", "must be non-negative");
    }
    if (doc.contains("output")) {
        cfg.output = string_at(doc.at("output"), "/output");
    }
    if (doc.contains("emit")) {
        const json& e = doc.at("emit");
        if (!e.is_array()) {
            throw ConfigError("/emit", "expected an array");
        }
        cfg.emit_json = false;
        for (std::size_t i = 0; i < e.size(); ++i) {
            const std::string item = string_at(e[i], "/emit/" + std::to_string(i));
            if (item == "json") {
                cfg.emit_json = true;
            } else if (item == "csv") {
                cfg.emit_csv = true;
            } else {
                throw ConfigError("/emit/" + std::to_string(i), "expected json or csv");
            }
        }
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot read configuration file " + path.string());
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("invalid JSON: ") + e.what());
    }
    return parse_config(doc);
}

json to_json(const RunConfig& cfg) {
    json acc = json::object();
    if (cfg.accuracy.eps) {
        acc["eps"] = *cfg.accuracy.eps;
    } else {
        acc["K"] = cfg.accuracy.K;
        if (cfg.method == sampling::Method::gaussian) {
            acc["M"] = cfg.accuracy.M;
            acc["Q"] = cfg.accuracy.Q;
        } else {
            acc["Ns"] = cfg.accuracy.Ns;
        }
    }
    if (cfg.method == sampling::Method::monte_carlo) {
        acc["seed"] = cfg.accuracy.seed;
    }
    json kern = {{"family", kernel::to_string(cfg.family)}};
    if (cfg.family == kernel::Family::beta) {
        kern["beta"] = cfg.beta;
    }
    json emit = json::array();
    if (cfg.emit_json) {
        emit.push_back("json");
    }
    if (cfg.emit_csv) {
        emit.push_back("csv");
    }
    return {{"schema_version", kConfigSchemaVersion},
            {"problem", {{"name", cfg.problem}, {"params", cfg.params}}},
            {"kernel", std::move(kern)},
            {"method", sampling::to_string(cfg.method)},
            {"accuracy", std::move(acc)},
            {"T", cfg.T},
            {"output", cfg.output},
            {"emit", std::move(emit)}};
}

} // namespace inflchs
