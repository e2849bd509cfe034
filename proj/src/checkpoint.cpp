#include "tsc/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

#include "tsc/errors.hpp"

namespace tsc {

using nlohmann::json;

void save_checkpoint(const Checkpoint& ck, const std::string& path) {
    json j;
    j["format"] = "tsc-checkpoint-v1";
    j["encoder_size"] = ck.encoder_size;
    j["train_steps"] = ck.train_steps;
    j["seed"] = ck.seed;
    json spec;
    spec["input_size"] = ck.spec.input_size;
    spec["input_channels"] = ck.spec.input_channels;
    spec["pool_after_first"] = ck.spec.pool_after_first;
    spec["dense_hidden"] = ck.spec.dense_hidden;
    spec["num_actions"] = ck.spec.num_actions;
    json convs = json::array();
    for (const ConvSpec& c : ck.spec.convs)
        convs.push_back({{"kernel", c.kernel}, {"stride", c.stride}, {"out_channels", c.out_channels}});
    spec["convs"] = convs;
    j["spec"] = spec;
    j["weights"] = ck.params.weights;
    j["biases"] = ck.params.biases;

    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write checkpoint " + path);
    f << j.dump();
    f << '\n';
    if (!f) throw ConfigError("failed writing checkpoint " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot read checkpoint " + path);
    json j;
    try {
        f >> j;
    } catch (const std::exception& e) {
        throw ConfigError("malformed checkpoint " + path + ": " + e.what());
    }
    if (j.value("format", "") != "tsc-checkpoint-v1")
        throw ConfigError("unrecognized checkpoint format in " + path);

    Checkpoint ck;
    ck.encoder_size = j.at("encoder_size").get<int>();
    ck.train_steps = j.at("train_steps").get<int64_t>();
    ck.seed = j.at("seed").get<uint64_t>();
    const json& spec = j.at("spec");
    ck.spec.input_size = spec.at("input_size").get<int>();
    ck.spec.input_channels = spec.at("input_channels").get<int>();
    ck.spec.pool_after_first = spec.at("pool_after_first").get<bool>();
    ck.spec.dense_hidden = spec.at("dense_hidden").get<int>();
    ck.spec.num_actions = spec.at("num_actions").get<int>();
    for (const json& c : spec.at("convs"))
        ck.spec.convs.push_back({c.at("kernel").get<int>(), c.at("stride").get<int>(),
                                 c.at("out_channels").get<int>()});
    ck.spec.validate();
    ck.params.weights = j.at("weights").get<std::vector<std::vector<double>>>();
    ck.params.biases = j.at("biases").get<std::vector<std::vector<double>>>();

    const NetworkParams shape = zero_params(ck.spec);
    if (ck.params.weights.size() != shape.weights.size() ||
        ck.params.biases.size() != shape.biases.size())
        throw ConfigError("checkpoint layer count does not match its spec");
    for (size_t i = 0; i < shape.weights.size(); ++i)
        if (ck.params.weights[i].size() != shape.weights[i].size() ||
            ck.params.biases[i].size() != shape.biases[i].size())
            throw ConfigError("checkpoint parameter shapes do not match its spec");
    if (!ck.params.finite()) throw ConfigError("checkpoint contains non-finite parameters");
    return ck;
}

}  // namespace tsc
