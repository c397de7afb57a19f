#include "arealk/archive.hpp"

#include "arealk/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>

namespace arealk {

namespace {
constexpr const char* kSchema = "arealk-null/1";
}

void save_null(const NullDistribution& null_dist, const std::string& path) {
    nlohmann::ordered_json doc;
    doc["schema"] = kSchema;
    doc["fingerprint"] = null_dist.fingerprint;
    doc["seed"] = null_dist.seed;
    doc["n"] = null_dist.n;
    doc["n_sims"] = null_dist.n_sims;
    doc["radii"] = std::vector<double>(null_dist.radii.begin(), null_dist.radii.end());
    doc["m_hat"] = std::vector<double>(null_dist.m_hat.begin(), null_dist.m_hat.end());
    doc["t_samples"] = null_dist.t_samples;

    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write '" + path + "'");
    out << doc.dump() << "\n";
    if (!out) throw ValidationError("write to '" + path + "' failed");
}

NullDistribution load_null(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("'" + path + "' is not valid JSON: " + e.what());
    }
    if (doc.value("schema", "") != kSchema)
        throw CacheMismatchError("'" + path + "' has schema '" + doc.value("schema", "<none>") +
                                 "', expected '" + kSchema + "'");

    NullDistribution null_dist;
    try {
        null_dist.fingerprint = doc.at("fingerprint").get<std::uint64_t>();
        null_dist.seed = doc.at("seed").get<std::uint64_t>();
        null_dist.n = doc.at("n").get<int>();
        null_dist.n_sims = doc.at("n_sims").get<int>();
        const auto radii = doc.at("radii").get<std::vector<double>>();
        const auto m_hat = doc.at("m_hat").get<std::vector<double>>();
        null_dist.radii = Eigen::Map<const Eigen::ArrayXd>(radii.data(),
                                                           static_cast<Eigen::Index>(radii.size()));
        null_dist.m_hat = Eigen::Map<const Eigen::ArrayXd>(m_hat.data(),
                                                           static_cast<Eigen::Index>(m_hat.size()));
        null_dist.t_samples = doc.at("t_samples").get<std::vector<std::vector<double>>>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("'" + path + "' is malformed: " + e.what());
    }
    if (null_dist.t_samples.size() != static_cast<std::size_t>(null_dist.radii.size()) ||
        null_dist.m_hat.size() != null_dist.radii.size())
        throw ValidationError("'" + path + "' is inconsistent");
    for (const auto& samples : null_dist.t_samples) {
        if (static_cast<int>(samples.size()) != null_dist.n_sims ||
            !std::is_sorted(samples.begin(), samples.end()))
            throw ValidationError("'" + path + "' has corrupt statistic samples");
    }
    return null_dist;
}

} // namespace arealk
