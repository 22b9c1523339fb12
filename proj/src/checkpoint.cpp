#include "scorelab/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>

#include "scorelab/errors.hpp"

// The blob is written as native float64; the format is declared
// little-endian, so refuse to build anywhere that doesn't match.
static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace scorelab {

namespace {
constexpr char kMagic[4] = {'S', 'L', 'C', 'P'};

void write_u64(std::ostream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint64_t read_u64(std::istream& in) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}

void write_doubles(std::ostream& out, const Eigen::VectorXd& v) {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(sizeof(double)) * v.size());
}

Eigen::VectorXd read_doubles(std::istream& in, Eigen::Index n) {
    Eigen::VectorXd v(n);
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(sizeof(double)) * n);
    return v;
}
}  // namespace

Mlp Checkpoint::make_net(bool use_ema) const {
    Mlp net = Mlp::zeros(widths);
    if (use_ema) {
        if (!ema) throw ConfigError("checkpoint has no EMA shadow");
        net.set_params(*ema);
    } else {
        net.set_params(params);
    }
    return net;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open for writing: " + path);

    nlohmann::json header;
    header["widths"] = ckpt.widths;
    header["activation"] = "softplus";
    header["conditional"] = ckpt.conditional;
    header["step"] = ckpt.step;
    header["param_count"] = static_cast<std::uint64_t>(ckpt.params.size());
    header["has_ema"] = ckpt.ema.has_value();
    header["ema_decay"] = ckpt.ema_decay;
    const std::string text = header.dump();

    out.write(kMagic, sizeof(kMagic));
    write_u64(out, text.size());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    write_doubles(out, ckpt.params);
    if (ckpt.ema) {
        if (ckpt.ema->size() != ckpt.params.size())
            throw ConfigError("checkpoint EMA size differs from params");
        write_doubles(out, *ckpt.ema);
    }
    if (!out) throw ConfigError("short write: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open for reading: " + path);

    char magic[4];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw ConfigError("not a checkpoint file: " + path);
    const std::uint64_t len = read_u64(in);
    std::string text(len, '\0');
    in.read(text.data(), static_cast<std::streamsize>(len));
    if (!in) throw ConfigError("truncated checkpoint header: " + path);

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("bad checkpoint header: ") + e.what());
    }

    Checkpoint ckpt;
    ckpt.widths = header.at("widths").get<std::vector<int>>();
    ckpt.conditional = header.at("conditional").get<bool>();
    ckpt.step = header.at("step").get<std::uint64_t>();
    ckpt.ema_decay = header.value("ema_decay", 0.0);
    const auto n =
        static_cast<Eigen::Index>(header.at("param_count").get<std::uint64_t>());
    ckpt.params = read_doubles(in, n);
    if (header.at("has_ema").get<bool>()) ckpt.ema = read_doubles(in, n);
    if (!in) throw ConfigError("truncated checkpoint blob: " + path);

    const Mlp probe = Mlp::zeros(ckpt.widths);
    if (probe.param_count() != n)
        throw ConfigError("checkpoint param_count disagrees with widths");
    return ckpt;
}

}  // namespace scorelab
