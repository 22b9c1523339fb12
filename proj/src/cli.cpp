#include "scorelab/cli.hpp"

#include <Eigen/Core>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "scorelab/checkpoint.hpp"
#include "scorelab/checks.hpp"
#include "scorelab/csv.hpp"
#include "scorelab/datasets.hpp"
#include "scorelab/errors.hpp"
#include "scorelab/gaussian_mixture.hpp"
#include "scorelab/metrics.hpp"
#include "scorelab/noise_trace.hpp"
#include "scorelab/sampler.hpp"
#include "scorelab/schedule.hpp"
#include "scorelab/score_model.hpp"
#include "scorelab/svg.hpp"
#include "scorelab/trainer.hpp"

namespace scorelab {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Resolved configuration with per-field provenance.
//
// Every subcommand declares its full key set with defaults up front; a config
// file may then override declared keys (unknown keys are hard errors), and
// explicit flags override both. The manifest records where each final value
// came from: "reference" / "tool" (defaults), "config", "flag", or "derived".
// ---------------------------------------------------------------------------
class ResolvedConfig {
  public:
    void declare(const std::string& key, json value, const std::string& origin) {
        values_[key] = std::move(value);
        origins_[key] = origin;
    }

    void apply_config(const json& file) {
        if (!file.is_object())
            throw ConfigError("config file must hold a JSON object");
        for (auto it = file.begin(); it != file.end(); ++it) {
            if (values_.find(it.key()) == values_.end())
                throw ConfigError("unknown config key \"" + it.key() +
                                  "\"; valid keys: " + key_list());
            assign(it.key(), it.value(), "config");
        }
    }

    void set_flag(const std::string& key, json value) {
        assign(key, std::move(value), "flag");
    }

    // For values the tool computes at runtime (e.g. sigma1 derived from the
    // dataset): recorded so a rerun from the manifest is exact.
    void set_derived(const std::string& key, json value) {
        values_[key] = std::move(value);
        origins_[key] = "derived";
    }

    template <typename T>
    T get(const std::string& key) const {
        try {
            return values_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ConfigError("config key \"" + key + "\": " + e.what());
        }
    }

    const std::map<std::string, json>& values() const { return values_; }

    json values_json() const {
        json out = json::object();
        for (const auto& [k, v] : values_) out[k] = v;
        return out;
    }

    json provenance_json() const {
        json out = json::object();
        for (const auto& [k, v] : origins_) out[k] = v;
        return out;
    }

  private:
    void assign(const std::string& key, json value, const std::string& origin) {
        const json& cur = values_.at(key);
        const bool compatible =
            cur.type() == value.type() ||
            (cur.is_number() && value.is_number()) ||
            (cur.is_array() && value.is_array());
        if (!compatible)
            throw ConfigError("config key \"" + key + "\": expected " +
                              std::string(cur.type_name()) + ", got " +
                              std::string(value.type_name()));
        if (cur.is_number_float() && value.is_number_integer())
            values_[key] = value.get<double>();
        else
            values_[key] = std::move(value);
        origins_[key] = origin;
    }

    std::string key_list() const {
        std::string out;
        for (const auto& [k, v] : values_) {
            if (!out.empty()) out += ", ";
            out += k;
        }
        return out;
    }

    std::map<std::string, json> values_;
    std::map<std::string, std::string> origins_;
};

// ---------------------------------------------------------------------------
// Small IO helpers.
// ---------------------------------------------------------------------------

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out << text;
    if (!out) throw ConfigError("failed while writing: " + path);
}

json load_json_file(const std::string& path) {
    try {
        return json::parse(read_text(path));
    } catch (const json::parse_error& e) {
        throw ConfigError("config file " + path + ": " + e.what());
    }
}

// Accepts either a plain config object or a manifest from a previous run; a
// manifest replays its embedded config, so any run reproduces from its own
// manifest. A manifest for a different subcommand is rejected.
json config_payload(const json& j, const std::string& subcommand) {
    if (j.is_object() && j.contains("subcommand") && j.contains("config")) {
        if (j["subcommand"] != subcommand)
            throw ConfigError("config file is a manifest for subcommand \"" +
                              j["subcommand"].get<std::string>() +
                              "\", not \"" + subcommand + "\"");
        return j["config"];
    }
    return j;
}

json version_block() {
    return json{
        {"scorelab", kToolVersion},
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                      std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION)},
        {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
        {"cli11", CLI11_VERSION},
        {"compiler", __VERSION__},
    };
}

void write_manifest(const std::string& outdir, const std::string& subcommand,
                    const ResolvedConfig& cfg, double wall_seconds,
                    const std::vector<std::string>& outputs) {
    json m;
    m["tool"] = "scorelab";
    m["subcommand"] = subcommand;
    m["config"] = cfg.values_json();
    m["provenance"] = cfg.provenance_json();
    m["seed"] = cfg.values().count("seed") ? cfg.values().at("seed") : json(0);
    m["wall_seconds"] = wall_seconds;
    m["versions"] = version_block();
    m["outputs"] = outputs;
    write_text((fs::path(outdir) / "manifest.json").string(), m.dump(2) + "\n");
}

class WallClock {
  public:
    double seconds() const {
        return std::chrono::duration<double>(
                   std::chrono::steady_clock::now() - start_)
            .count();
    }

  private:
    std::chrono::steady_clock::time_point start_ =
        std::chrono::steady_clock::now();
};

std::string prepare_outdir(const ResolvedConfig& cfg) {
    const auto outdir = cfg.get<std::string>("outdir");
    fs::create_directories(outdir);
    return outdir;
}

void apply_threads(const ResolvedConfig& cfg) {
    const int threads = cfg.get<int>("threads");
    if (threads < 0) throw ConfigError("threads must be >= 0");
    if (threads > 0) Eigen::setNbThreads(threads);
}

// Common key block shared by every subcommand.
void declare_common(ResolvedConfig& cfg, std::uint64_t default_seed = 0) {
    cfg.declare("outdir", ".", "tool");
    cfg.declare("seed", default_seed, "tool");
    cfg.declare("threads", 0, "tool");
}

// Schedule resolution shared by trace / sample / train: an explicit schedule
// file wins, otherwise a geometric schedule is built from sigma1/sigmaL/L.
NoiseSchedule schedule_from_config(const ResolvedConfig& cfg) {
    const auto path = cfg.get<std::string>("schedule");
    if (!path.empty()) return schedule_from_json(read_text(path));
    return geometric_schedule(cfg.get<double>("sigma1"),
                              cfg.get<double>("sigmaL"), cfg.get<int>("L"));
}

// ---------------------------------------------------------------------------
// Flag plumbing: each subcommand binds flags to locals, then records the ones
// the user actually passed as "flag"-origin overrides.
// ---------------------------------------------------------------------------
struct FlagRecorder {
    CLI::App* sub;
    ResolvedConfig& cfg;

    template <typename T>
    void record(const std::string& key, const T& value,
                const std::string& flag_name = "") {
        const std::string name =
            flag_name.empty() ? "--" + key : flag_name;
        if (sub->count(name) > 0) cfg.set_flag(key, json(value));
    }
};

struct CommonFlags {
    std::string config;
    std::string outdir = ".";
    std::uint64_t seed = 0;
    int threads = 0;
};

void add_common_flags(CLI::App* sub, CommonFlags& c) {
    sub->add_option("--config", c.config,
                    "JSON config file, or a manifest.json from a previous run");
    sub->add_option("--outdir", c.outdir, "directory for outputs")
        ->capture_default_str();
    sub->add_option("--seed", c.seed, "RNG seed")->capture_default_str();
    sub->add_option("--threads", c.threads,
                    "worker threads for linear algebra (0 = library default)")
        ->capture_default_str();
}

void finish_common(FlagRecorder& rec, const CommonFlags& c) {
    rec.record("outdir", c.outdir);
    rec.record("seed", c.seed);
    rec.record("threads", c.threads);
}

// ---------------------------------------------------------------------------
// schedule: build a geometric noise schedule (optionally dilated) as JSON.
// ---------------------------------------------------------------------------
struct ScheduleFlags {
    CommonFlags common;
    double sigma1 = 50.0;
    double sigmaL = 0.01;
    int L = 232;
    int nsigma = 1;
    std::string out = "schedule.json";
};

void add_schedule_flags(CLI::App* sub, ScheduleFlags& f) {
    add_common_flags(sub, f.common);
    sub->add_option("--sigma1", f.sigma1, "largest noise level")
        ->capture_default_str();
    sub->add_option("--sigmaL", f.sigmaL, "smallest noise level")
        ->capture_default_str();
    sub->add_option("--L", f.L, "number of levels")->capture_default_str();
    sub->add_option("--nsigma", f.nsigma,
                    "dilation factor (1 = plain geometric schedule)")
        ->capture_default_str();
    sub->add_option("--out", f.out, "output schedule file")
        ->capture_default_str();
}

int cmd_schedule(CLI::App* sub, const ScheduleFlags& f) {
    WallClock clock;
    ResolvedConfig cfg;
    cfg.declare("sigma1", 50.0, "reference");
    cfg.declare("sigmaL", 0.01, "reference");
    cfg.declare("L", 232, "reference");
    cfg.declare("nsigma", 1, "tool");
    cfg.declare("out", "schedule.json", "tool");
    declare_common(cfg);
    if (!f.common.config.empty())
        cfg.apply_config(
            config_payload(load_json_file(f.common.config), "schedule"));
    FlagRecorder rec{sub, cfg};
    rec.record("sigma1", f.sigma1);
    rec.record("sigmaL", f.sigmaL);
    rec.record("L", f.L);
    rec.record("nsigma", f.nsigma);
    rec.record("out", f.out);
    finish_common(rec, f.common);
    apply_threads(cfg);
    const std::string outdir = prepare_outdir(cfg);

    NoiseSchedule s = geometric_schedule(
        cfg.get<double>("sigma1"), cfg.get<double>("sigmaL"), cfg.get<int>("L"));
    const int nsigma = cfg.get<int>("nsigma");
    if (nsigma < 1) throw ConfigError("nsigma must be >= 1");
    if (nsigma > 1) s = dilate(s, nsigma);

    const std::string out = cfg.get<std::string>("out");
    write_text((fs::path(outdir) / out).string(), schedule_to_json(s) + "\n");
    std::cout << "schedule: L=" << s.levels() << " sigma1=" << s.sigma1()
              << " sigmaL=" << s.sigmaL() << " gamma=" << format_double(s.gamma)
              << "\n";
    write_manifest(outdir, "schedule", cfg, clock.seconds(), {out});
    return kExitOk;
}

// ---------------------------------------------------------------------------
// trace: noise-variance evolution of both samplers on a shared grid.
// ---------------------------------------------------------------------------
struct TraceFlags {
    CommonFlags common;
    std::string schedule;
    double sigma1 = 50.0;
    double sigmaL = 0.01;
    int L = 232;
    double eta = 0.1;
    int nsigma = 1;
    std::string out = "trace.csv";
    std::string svg;
};

void add_trace_flags(CLI::App* sub, TraceFlags& f) {
    add_common_flags(sub, f.common);
    sub->add_option("--schedule", f.schedule,
                    "schedule JSON file (overrides sigma1/sigmaL/L)");
    sub->add_option("--sigma1", f.sigma1, "largest noise level")
        ->capture_default_str();
    sub->add_option("--sigmaL", f.sigmaL, "smallest noise level")
        ->capture_default_str();
    sub->add_option("--L", f.L, "number of levels")->capture_default_str();
    sub->add_option("--eta", f.eta, "step-size ratio epsilon/sigmaL^2")
        ->capture_default_str();
    sub->add_option("--nsigma", f.nsigma, "updates per level")
        ->capture_default_str();
    sub->add_option("--out", f.out, "output CSV")->capture_default_str();
    sub->add_option("--svg", f.svg, "optional log-scale plot of both columns");
}

int cmd_trace(CLI::App* sub, const TraceFlags& f) {
    WallClock clock;
    ResolvedConfig cfg;
    cfg.declare("schedule", "", "tool");
    cfg.declare("sigma1", 50.0, "reference");
    cfg.declare("sigmaL", 0.01, "reference");
    cfg.declare("L", 232, "reference");
    cfg.declare("eta", 0.1, "reference");
    cfg.declare("nsigma", 1, "tool");
    cfg.declare("out", "trace.csv", "tool");
    cfg.declare("svg", "", "tool");
    declare_common(cfg);
    if (!f.common.config.empty())
        cfg.apply_config(
            config_payload(load_json_file(f.common.config), "trace"));
    FlagRecorder rec{sub, cfg};
    rec.record("schedule", f.schedule);
    rec.record("sigma1", f.sigma1);
    rec.record("sigmaL", f.sigmaL);
    rec.record("L", f.L);
    rec.record("eta", f.eta);
    rec.record("nsigma", f.nsigma);
    rec.record("out", f.out);
    rec.record("svg", f.svg);
    finish_common(rec, f.common);
    apply_threads(cfg);
    const std::string outdir = prepare_outdir(cfg);

    const NoiseSchedule s = schedule_from_config(cfg);
    const auto rows =
        combined_trace(s, cfg.get<double>("eta"), cfg.get<int>("nsigma"));

    CsvTable table;
    table.columns = {"step", "level", "sigma_t", "v_als", "v_cas", "diff"};
    table.rows.reserve(rows.size());
    for (const auto& r : rows)
        table.rows.push_back({static_cast<double>(r.step),
                              static_cast<double>(r.level), r.sigma_t, r.v_als,
                              r.v_cas, r.diff});
    const std::string out = cfg.get<std::string>("out");
    save_csv((fs::path(outdir) / out).string(), table);

    std::vector<std::string> outputs{out};
    const std::string svg = cfg.get<std::string>("svg");
    if (!svg.empty()) {
        SvgSeries als_series, cas_series;
        als_series.label = "annealed Langevin";
        cas_series.label = "consistent annealed";
        for (const auto& r : rows) {
            als_series.x.push_back(static_cast<double>(r.step));
            als_series.y.push_back(r.v_als);
            cas_series.x.push_back(static_cast<double>(r.step));
            cas_series.y.push_back(r.v_cas);
        }
        SvgPlotOptions opts;
        opts.title = "residual noise std per update";
        opts.x_label = "update";
        opts.y_label = "residual std";
        opts.log_y = true;
        save_svg_plot((fs::path(outdir) / svg).string(),
                      {als_series, cas_series}, opts);
        outputs.push_back(svg);
    }
    std::cout << "trace: " << rows.size() << " rows, final v_als="
              << format_double(rows.back().v_als)
              << " v_cas=" << format_double(rows.back().v_cas) << "\n";
    write_manifest(outdir, "trace", cfg, clock.seconds(), outputs);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// sample: run a sampler from a checkpoint or an analytic oracle.
// ---------------------------------------------------------------------------
struct SampleFlags {
    CommonFlags common;
    std::string schedule;
    double sigma1 = 50.0;
    double sigmaL = 0.01;
    int L = 232;
    std::string checkpoint;
    bool use_ema = true;
    std::string oracle;
    double spacing = 2.0;
    double tau = 0.05;
    std::vector<double> x0 = {0.0, 0.0};
    std::string variant = "cas";
    double epsilon = 5.6e-6;
    int nsigma = 1;
    int chains = 1000;
    std::string init = "pure-noise";
    std::string data;
    bool denoise = false;
    std::string out = "samples.csv";
    std::string trajectory;
    std::string svg;
};

void add_sample_flags(CLI::App* sub, SampleFlags& f) {
    add_common_flags(sub, f.common);
    sub->add_option("--schedule", f.schedule,
                    "schedule JSON file (overrides sigma1/sigmaL/L)");
    sub->add_option("--sigma1", f.sigma1, "largest noise level")
        ->capture_default_str();
    sub->add_option("--sigmaL", f.sigmaL, "smallest noise level")
        ->capture_default_str();
    sub->add_option("--L", f.L, "number of levels")->capture_default_str();
    sub->add_option("--checkpoint", f.checkpoint, "trained model checkpoint");
    sub->add_flag("--use_ema,!--no-use_ema", f.use_ema,
                  "sample with the EMA parameters from the checkpoint");
    sub->add_option("--oracle", f.oracle,
                    "analytic score instead of a checkpoint: "
                    "grid25-conditional | grid25-unconditional | dirac");
    sub->add_option("--spacing", f.spacing, "grid25 oracle: mode spacing")
        ->capture_default_str();
    sub->add_option("--tau", f.tau, "grid25 oracle: mode std")
        ->capture_default_str();
    sub->add_option("--x0", f.x0, "dirac oracle: point location")
        ->delimiter(',');
    sub->add_option("--variant", f.variant, "sampler: als | cas")
        ->capture_default_str();
    sub->add_option("--epsilon", f.epsilon, "step size")->capture_default_str();
    sub->add_option("--nsigma", f.nsigma,
                    "als: updates per level; cas: schedule dilation")
        ->capture_default_str();
    sub->add_option("--chains", f.chains, "parallel chains (pure-noise init)")
        ->capture_default_str();
    sub->add_option("--init", f.init, "pure-noise | data-plus-noise")
        ->capture_default_str();
    sub->add_option("--data", f.data,
                    "points CSV for data-plus-noise init (one chain per row)");
    sub->add_flag("--denoise,!--no-denoise", f.denoise,
                  "apply the final expected-denoised step at sigmaL");
    sub->add_option("--out", f.out, "output samples CSV")
        ->capture_default_str();
    sub->add_option("--trajectory", f.trajectory,
                    "optional per-update chain states CSV");
    sub->add_option("--svg", f.svg, "optional scatter plot of the samples");
}

std::unique_ptr<ScoreModel> build_sample_model(const ResolvedConfig& cfg,
                                               const NoiseSchedule& s) {
    const auto checkpoint = cfg.get<std::string>("checkpoint");
    const auto oracle = cfg.get<std::string>("oracle");
    if (!checkpoint.empty() && !oracle.empty())
        throw ConfigError("pass either --checkpoint or --oracle, not both");
    if (!checkpoint.empty()) {
        const Checkpoint ckpt = load_checkpoint(checkpoint);
        const bool use_ema = cfg.get<bool>("use_ema");
        if (use_ema && !ckpt.ema.has_value())
            throw ConfigError(
                "checkpoint has no EMA parameters; pass --no-use_ema");
        return std::make_unique<MlpScoreModel>(ckpt.make_net(use_ema),
                                               ckpt.conditional);
    }
    const double spacing = cfg.get<double>("spacing");
    const double tau = cfg.get<double>("tau");
    if (oracle == "grid25-conditional")
        return std::make_unique<AnalyticConditionalScore>(
            grid25_mixture(spacing, tau));
    if (oracle == "grid25-unconditional")
        return std::make_unique<AnalyticUnconditionalScore>(
            grid25_mixture(spacing, tau), s);
    if (oracle == "dirac") {
        const auto x0 = cfg.get<std::vector<double>>("x0");
        if (x0.empty()) throw ConfigError("dirac oracle: x0 must be non-empty");
        Eigen::MatrixXd mean(static_cast<Eigen::Index>(x0.size()), 1);
        for (std::size_t i = 0; i < x0.size(); ++i)
            mean(static_cast<Eigen::Index>(i), 0) = x0[i];
        return std::make_unique<AnalyticConditionalScore>(
            GaussianMixture(mean, Eigen::VectorXd::Ones(1), 0.0));
    }
    throw ConfigError(
        "sample: need --checkpoint or --oracle "
        "(grid25-conditional | grid25-unconditional | dirac)");
}

int cmd_sample(CLI::App* sub, const SampleFlags& f) {
    WallClock clock;
    ResolvedConfig cfg;
    cfg.declare("schedule", "", "tool");
    cfg.declare("sigma1", 50.0, "reference");
    cfg.declare("sigmaL", 0.01, "reference");
    cfg.declare("L", 232, "reference");
    cfg.declare("checkpoint", "", "tool");
    cfg.declare("use_ema", true, "reference");
    cfg.declare("oracle", "", "tool");
    cfg.declare("spacing", 2.0, "reference");
    cfg.declare("tau", 0.05, "reference");
    cfg.declare("x0", std::vector<double>{0.0, 0.0}, "tool");
    cfg.declare("variant", "cas", "tool");
    cfg.declare("epsilon", 5.6e-6, "reference");
    cfg.declare("nsigma", 1, "reference");
    cfg.declare("chains", 1000, "tool");
    cfg.declare("init", "pure-noise", "tool");
    cfg.declare("data", "", "tool");
    cfg.declare("denoise", false, "tool");
    cfg.declare("out", "samples.csv", "tool");
    cfg.declare("trajectory", "", "tool");
    cfg.declare("svg", "", "tool");
    declare_common(cfg);
    if (!f.common.config.empty())
        cfg.apply_config(
            config_payload(load_json_file(f.common.config), "sample"));
    FlagRecorder rec{sub, cfg};
    rec.record("schedule", f.schedule);
    rec.record("sigma1", f.sigma1);
    rec.record("sigmaL", f.sigmaL);
    rec.record("L", f.L);
    rec.record("checkpoint", f.checkpoint);
    rec.record("use_ema", f.use_ema);
    rec.record("oracle", f.oracle);
    rec.record("spacing", f.spacing);
    rec.record("tau", f.tau);
    rec.record("x0", f.x0);
    rec.record("variant", f.variant);
    rec.record("epsilon", f.epsilon);
    rec.record("nsigma", f.nsigma);
    rec.record("chains", f.chains);
    rec.record("init", f.init);
    rec.record("data", f.data);
    rec.record("denoise", f.denoise);
    rec.record("out", f.out);
    rec.record("trajectory", f.trajectory);
    rec.record("svg", f.svg);
    finish_common(rec, f.common);
    apply_threads(cfg);
    const std::string outdir = prepare_outdir(cfg);

    const NoiseSchedule s = schedule_from_config(cfg);
    const auto model = build_sample_model(cfg, s);

    SampleRunConfig run;
    const auto variant = cfg.get<std::string>("variant");
    if (variant == "als")
        run.variant = SamplerVariant::als;
    else if (variant == "cas")
        run.variant = SamplerVariant::cas;
    else
        throw ConfigError("variant must be \"als\" or \"cas\", got \"" +
                          variant + "\"");
    const auto init = cfg.get<std::string>("init");
    if (init == "pure-noise")
        run.init = InitMode::pure_noise;
    else if (init == "data-plus-noise")
        run.init = InitMode::data_plus_noise;
    else
        throw ConfigError(
            "init must be \"pure-noise\" or \"data-plus-noise\", got \"" +
            init + "\"");
    run.epsilon = cfg.get<double>("epsilon");
    run.n_sigma = cfg.get<int>("nsigma");
    run.denoise = cfg.get<bool>("denoise");
    run.chains = cfg.get<int>("chains");
    run.seed = cfg.get<std::uint64_t>("seed");

    Eigen::MatrixXd data;
    const Eigen::MatrixXd* data_ptr = nullptr;
    if (run.init == InitMode::data_plus_noise) {
        const auto data_path = cfg.get<std::string>("data");
        if (data_path.empty())
            throw ConfigError("data-plus-noise init requires --data");
        data = load_points_csv(data_path);
        data_ptr = &data;
    }

    // Trajectory rows stream straight to disk; a long run over many chains
    // would not fit in memory otherwise.
    std::ofstream traj;
    StepCallback cb;
    const std::string trajectory = cfg.get<std::string>("trajectory");
    if (!trajectory.empty()) {
        const std::string path = (fs::path(outdir) / trajectory).string();
        traj.open(path);
        if (!traj) throw ConfigError("cannot open for writing: " + path);
        traj << "step,chain,sigma_t";
        for (int i = 0; i < model->dim(); ++i) traj << ",x" << i;
        traj << "\n";
        cb = [&traj](int step, int /*level*/, double sigma,
                     const Eigen::MatrixXd& X) {
            for (Eigen::Index c = 0; c < X.cols(); ++c) {
                traj << step << "," << c << "," << format_double(sigma);
                for (Eigen::Index i = 0; i < X.rows(); ++i)
                    traj << "," << format_double(X(i, c));
                traj << "\n";
            }
        };
    }

    const Eigen::MatrixXd samples = run_sampler(*model, s, run, data_ptr, cb);
    if (traj.is_open()) {
        traj.close();
        if (!traj) throw ConfigError("failed while writing trajectory CSV");
    }

    const std::string out = cfg.get<std::string>("out");
    save_points_csv((fs::path(outdir) / out).string(), samples);
    std::vector<std::string> outputs{out};
    if (!trajectory.empty()) outputs.push_back(trajectory);

    const std::string svg = cfg.get<std::string>("svg");
    if (!svg.empty()) {
        if (samples.rows() < 2)
            throw ConfigError("scatter plot needs at least 2-D samples");
        SvgPlotOptions opts;
        opts.title = variant + " samples";
        opts.x_label = "x0";
        opts.y_label = "x1";
        save_svg_plot((fs::path(outdir) / svg).string(),
                      {scatter_series(samples, variant)}, opts);
        outputs.push_back(svg);
    }

    std::cout << "sample: " << samples.cols() << " chains, dim "
              << samples.rows() << ", variant " << variant << "\n";
    write_manifest(outdir, "sample", cfg, clock.seconds(), outputs);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// train: denoising score matching, optionally with the adversarial objective.
// ---------------------------------------------------------------------------
struct TrainFlags {
    CommonFlags common;
    std::string data;
    std::string dataset;
    int n = 10000;
    double spacing = 2.0;
    double tau = 0.05;
    double noise = 0.0;
    std::string schedule;
    double sigma1 = 0.0;
    double sigmaL = 0.01;
    int L = 232;
    std::string objective = "dsm";
    int iterations = 20000;
    int batch_size = 128;
    std::vector<int> hidden = {128, 128, 128};
    std::vector<int> disc_hidden = {128, 128};
    bool conditional = false;
    double lambda = 1.0;
    int n_disc = 1;
    double lr = 1e-3;
    double score_beta1 = 0.0;
    double score_beta2 = 0.9;
    double disc_beta1 = -0.5;
    double disc_beta2 = 0.9;
    double ema_decay = 0.999;
    int checkpoint_every = 2500;
    int log_every = 100;
    double adv_weight = 1.0;
    std::string losses_out = "losses.csv";
    bool save_data = true;
};

void add_train_flags(CLI::App* sub, TrainFlags& f) {
    add_common_flags(sub, f.common);
    sub->add_option("--data", f.data, "training points CSV (one point per row)");
    sub->add_option("--dataset", f.dataset,
                    "generate data instead: grid25 | swiss-roll");
    sub->add_option("--n", f.n, "generated dataset size")
        ->capture_default_str();
    sub->add_option("--spacing", f.spacing, "grid25: mode spacing")
        ->capture_default_str();
    sub->add_option("--tau", f.tau, "grid25: mode std")->capture_default_str();
    sub->add_option("--noise", f.noise, "swiss-roll: additive noise std")
        ->capture_default_str();
    sub->add_option("--schedule", f.schedule,
                    "schedule JSON file (overrides sigma1/sigmaL/L)");
    sub->add_option("--sigma1", f.sigma1,
                    "largest noise level (0 = max pairwise distance of the data)")
        ->capture_default_str();
    sub->add_option("--sigmaL", f.sigmaL, "smallest noise level")
        ->capture_default_str();
    sub->add_option("--L", f.L, "number of levels")->capture_default_str();
    sub->add_option("--objective", f.objective, "dsm | hybrid")
        ->capture_default_str();
    sub->add_option("--iterations", f.iterations, "training iterations")
        ->capture_default_str();
    sub->add_option("--batch_size", f.batch_size, "minibatch size")
        ->capture_default_str();
    sub->add_option("--hidden", f.hidden, "score net hidden widths")
        ->delimiter(',');
    sub->add_option("--disc_hidden", f.disc_hidden,
                    "discriminator hidden widths")
        ->delimiter(',');
    sub->add_flag("--conditional,!--no-conditional", f.conditional,
                  "condition the score net on log(sigma)");
    sub->add_option("--lambda", f.lambda, "hybrid: score-matching weight")
        ->capture_default_str();
    sub->add_option("--n_disc", f.n_disc,
                    "hybrid: discriminator updates per generator update")
        ->capture_default_str();
    sub->add_option("--lr", f.lr, "learning rate")->capture_default_str();
    sub->add_option("--score_beta1", f.score_beta1, "Adam beta1 (score net)")
        ->capture_default_str();
    sub->add_option("--score_beta2", f.score_beta2, "Adam beta2 (score net)")
        ->capture_default_str();
    sub->add_option("--disc_beta1", f.disc_beta1, "Adam beta1 (discriminator)")
        ->capture_default_str();
    sub->add_option("--disc_beta2", f.disc_beta2, "Adam beta2 (discriminator)")
        ->capture_default_str();
    sub->add_option("--ema_decay", f.ema_decay, "EMA decay for score params")
        ->capture_default_str();
    sub->add_option("--checkpoint_every", f.checkpoint_every,
                    "checkpoint cadence in iterations")
        ->capture_default_str();
    sub->add_option("--log_every", f.log_every, "loss log cadence")
        ->capture_default_str();
    sub->add_option("--adv_weight", f.adv_weight,
                    "hybrid: weight on the adversarial term")
        ->capture_default_str();
    sub->add_option("--losses_out", f.losses_out, "loss curve CSV")
        ->capture_default_str();
    sub->add_flag("--save_data,!--no-save_data", f.save_data,
                  "write generated data next to the checkpoints");
}

int cmd_train(CLI::App* sub, const TrainFlags& f) {
    WallClock clock;
    ResolvedConfig cfg;
    cfg.declare("data", "", "tool");
    cfg.declare("dataset", "", "tool");
    cfg.declare("n", 10000, "tool");
    cfg.declare("spacing", 2.0, "reference");
    cfg.declare("tau", 0.05, "reference");
    cfg.declare("noise", 0.0, "tool");
    cfg.declare("schedule", "", "tool");
    cfg.declare("sigma1", 0.0, "reference");
    cfg.declare("sigmaL", 0.01, "reference");
    cfg.declare("L", 232, "reference");
    cfg.declare("objective", "dsm", "tool");
    cfg.declare("iterations", 20000, "tool");
    cfg.declare("batch_size", 128, "reference");
    cfg.declare("hidden", std::vector<int>{128, 128, 128}, "reference");
    cfg.declare("disc_hidden", std::vector<int>{128, 128}, "tool");
    cfg.declare("conditional", false, "tool");
    cfg.declare("lambda", 1.0, "reference");
    cfg.declare("n_disc", 1, "reference");
    cfg.declare("lr", 1e-3, "tool");
    cfg.declare("score_beta1", 0.0, "reference");
    cfg.declare("score_beta2", 0.9, "reference");
    cfg.declare("disc_beta1", -0.5, "reference");
    cfg.declare("disc_beta2", 0.9, "reference");
    cfg.declare("ema_decay", 0.999, "reference");
    cfg.declare("checkpoint_every", 2500, "reference");
    cfg.declare("log_every", 100, "tool");
    cfg.declare("adv_weight", 1.0, "tool");
    cfg.declare("losses_out", "losses.csv", "tool");
    cfg.declare("save_data", true, "tool");
    declare_common(cfg);
    if (!f.common.config.empty())
        cfg.apply_config(
            config_payload(load_json_file(f.common.config), "train"));
    FlagRecorder rec{sub, cfg};
    rec.record("data", f.data);
    rec.record("dataset", f.dataset);
    rec.record("n", f.n);
    rec.record("spacing", f.spacing);
    rec.record("tau", f.tau);
    rec.record("noise", f.noise);
    rec.record("schedule", f.schedule);
    rec.record("sigma1", f.sigma1);
    rec.record("sigmaL", f.sigmaL);
    rec.record("L", f.L);
    rec.record("objective", f.objective);
    rec.record("iterations", f.iterations);
    rec.record("batch_size", f.batch_size);
    rec.record("hidden", f.hidden);
    rec.record("disc_hidden", f.disc_hidden);
    rec.record("conditional", f.conditional);
    rec.record("lambda", f.lambda);
    rec.record("n_disc", f.n_disc);
    rec.record("lr", f.lr);
    rec.record("score_beta1", f.score_beta1);
    rec.record("score_beta2", f.score_beta2);
    rec.record("disc_beta1", f.disc_beta1);
    rec.record("disc_beta2", f.disc_beta2);
    rec.record("ema_decay", f.ema_decay);
    rec.record("checkpoint_every", f.checkpoint_every);
    rec.record("log_every", f.log_every);
    rec.record("adv_weight", f.adv_weight);
    rec.record("losses_out", f.losses_out);
    rec.record("save_data", f.save_data);
    finish_common(rec, f.common);
    apply_threads(cfg);
    const std::string outdir = prepare_outdir(cfg);
    const auto seed = cfg.get<std::uint64_t>("seed");

    // Resolve the training set.
    const auto data_path = cfg.get<std::string>("data");
    const auto dataset = cfg.get<std::string>("dataset");
    if (!data_path.empty() && !dataset.empty())
        throw ConfigError("pass either --data or --dataset, not both");
    Eigen::MatrixXd points;
    bool generated = false;
    if (!data_path.empty()) {
        points = load_points_csv(data_path);
    } else if (dataset == "grid25") {
        points = gen_grid25(cfg.get<int>("n"), cfg.get<double>("spacing"),
                            cfg.get<double>("tau"), seed)
                     .points;
        generated = true;
    } else if (dataset == "swiss-roll") {
        points = gen_swiss_roll(cfg.get<int>("n"), cfg.get<double>("noise"), seed)
                     .points;
        generated = true;
    } else if (!dataset.empty()) {
        throw ConfigError("dataset must be \"grid25\" or \"swiss-roll\", got \"" +
                          dataset + "\"");
    } else {
        throw ConfigError("train: need --data or --dataset");
    }

    // Resolve the schedule; sigma1 = 0 means "derive from the data", and the
    // derived value is written back so the manifest replays exactly.
    NoiseSchedule schedule;
    if (!cfg.get<std::string>("schedule").empty()) {
        schedule = schedule_from_json(read_text(cfg.get<std::string>("schedule")));
    } else {
        double sigma1 = cfg.get<double>("sigma1");
        if (sigma1 <= 0.0) {
            sigma1 = sigma1_from_data(points);
            cfg.set_derived("sigma1", sigma1);
        }
        schedule = geometric_schedule(sigma1, cfg.get<double>("sigmaL"),
                                      cfg.get<int>("L"));
    }

    TrainConfig tc;
    tc.schedule = schedule;
    tc.iterations = cfg.get<int>("iterations");
    tc.batch_size = cfg.get<int>("batch_size");
    tc.hidden = cfg.get<std::vector<int>>("hidden");
    tc.disc_hidden = cfg.get<std::vector<int>>("disc_hidden");
    tc.conditional = cfg.get<bool>("conditional");
    tc.lambda = cfg.get<double>("lambda");
    tc.n_disc = cfg.get<int>("n_disc");
    tc.lr = cfg.get<double>("lr");
    tc.score_beta1 = cfg.get<double>("score_beta1");
    tc.score_beta2 = cfg.get<double>("score_beta2");
    tc.disc_beta1 = cfg.get<double>("disc_beta1");
    tc.disc_beta2 = cfg.get<double>("disc_beta2");
    tc.ema_decay = cfg.get<double>("ema_decay");
    tc.seed = seed;
    tc.checkpoint_every = cfg.get<int>("checkpoint_every");
    tc.checkpoint_dir = outdir;
    tc.log_every = cfg.get<int>("log_every");
    tc.adv_weight = cfg.get<double>("adv_weight");

    const auto objective = cfg.get<std::string>("objective");
    TrainResult result = [&] {
        if (objective == "dsm") return train_dsm(points, tc);
        if (objective == "hybrid") return train_hybrid(points, tc);
        throw ConfigError("objective must be \"dsm\" or \"hybrid\", got \"" +
                          objective + "\"");
    }();

    CsvTable losses;
    losses.columns = {"iteration", "dsm_loss", "d_loss", "g_adv_loss"};
    losses.rows.reserve(result.report.rows.size());
    for (const auto& r : result.report.rows)
        losses.rows.push_back({static_cast<double>(r.iteration), r.dsm_loss,
                               r.d_loss, r.g_adv_loss});
    const std::string losses_out = cfg.get<std::string>("losses_out");
    save_csv((fs::path(outdir) / losses_out).string(), losses);

    // The exact schedule trained against, so sampling runs can reuse it even
    // when sigma1 was derived from the data.
    write_text((fs::path(outdir) / "schedule.json").string(),
               schedule_to_json(schedule) + "\n");

    std::vector<std::string> outputs{losses_out, "schedule.json"};
    if (!result.report.final_checkpoint.empty())
        outputs.push_back(
            fs::path(result.report.final_checkpoint).filename().string());
    if (generated && cfg.get<bool>("save_data")) {
        save_points_csv((fs::path(outdir) / "data.csv").string(), points);
        outputs.push_back("data.csv");
    }

    const double final_dsm =
        result.report.rows.empty() ? 0.0 : result.report.rows.back().dsm_loss;
    std::cout << "train: " << result.steps << " steps (" << objective
              << "), final dsm loss " << format_double(final_dsm)
              << ", checkpoint "
              << (result.report.final_checkpoint.empty()
                      ? std::string("<none>")
                      : result.report.final_checkpoint)
              << "\n";
    write_manifest(outdir, "train", cfg, clock.seconds(), outputs);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// eval: mode coverage / KL / distance metrics over a samples CSV.
// ---------------------------------------------------------------------------
struct EvalFlags {
    CommonFlags common;
    std::string samples;
    std::string centers;
    double spacing = 2.0;
    double tau = 0.05;
    double threshold = 0.0;
    std::string reference;
    std::string out = "report.json";
    std::string csv = "report.csv";
};

void add_eval_flags(CLI::App* sub, EvalFlags& f) {
    add_common_flags(sub, f.common);
    sub->add_option("--samples", f.samples, "samples CSV to evaluate");
    sub->add_option("--centers", f.centers,
                    "mode centers CSV (default: the 5x5 grid)");
    sub->add_option("--spacing", f.spacing, "grid centers: mode spacing")
        ->capture_default_str();
    sub->add_option("--tau", f.tau, "grid centers: mode std")
        ->capture_default_str();
    sub->add_option("--threshold", f.threshold,
                    "mode assignment radius (0 = 3*tau)")
        ->capture_default_str();
    sub->add_option("--reference", f.reference,
                    "reference points CSV for the energy distance");
    sub->add_option("--out", f.out, "report JSON")->capture_default_str();
    sub->add_option("--csv", f.csv, "report CSV")->capture_default_str();
}

int cmd_eval(CLI::App* sub, const EvalFlags& f) {
    WallClock clock;
    ResolvedConfig cfg;
    cfg.declare("samples", "", "tool");
    cfg.declare("centers", "", "tool");
    cfg.declare("spacing", 2.0, "reference");
    cfg.declare("tau", 0.05, "reference");
    cfg.declare("threshold", 0.0, "tool");
    cfg.declare("reference", "", "tool");
    cfg.declare("out", "report.json", "tool");
    cfg.declare("csv", "report.csv", "tool");
    declare_common(cfg);
    if (!f.common.config.empty())
        cfg.apply_config(config_payload(load_json_file(f.common.config), "eval"));
    FlagRecorder rec{sub, cfg};
    rec.record("samples", f.samples);
    rec.record("centers", f.centers);
    rec.record("spacing", f.spacing);
    rec.record("tau", f.tau);
    rec.record("threshold", f.threshold);
    rec.record("reference", f.reference);
    rec.record("out", f.out);
    rec.record("csv", f.csv);
    finish_common(rec, f.common);
    apply_threads(cfg);
    const std::string outdir = prepare_outdir(cfg);

    const auto samples_path = cfg.get<std::string>("samples");
    if (samples_path.empty()) throw ConfigError("eval: --samples is required");
    const Eigen::MatrixXd samples = load_points_csv(samples_path);

    const auto centers_path = cfg.get<std::string>("centers");
    const Eigen::MatrixXd centers =
        centers_path.empty() ? grid25_centers(cfg.get<double>("spacing"))
                             : load_points_csv(centers_path);

    double threshold = cfg.get<double>("threshold");
    if (threshold <= 0.0) {
        threshold = 3.0 * cfg.get<double>("tau");
        cfg.set_derived("threshold", threshold);
    }

    const ModeReport report = mode_coverage(samples, centers, threshold);
    const double mean_distance = mean_nearest_mode_distance(samples, centers);

    json j = mode_report_to_json(report);
    j["mean_nearest_mode_distance"] = mean_distance;
    const auto reference_path = cfg.get<std::string>("reference");
    double energy = std::numeric_limits<double>::quiet_NaN();
    if (!reference_path.empty()) {
        energy = energy_distance(samples, load_points_csv(reference_path));
        j["energy_distance"] = energy;
    }
    const std::string out = cfg.get<std::string>("out");
    write_text((fs::path(outdir) / out).string(), j.dump(2) + "\n");

    const std::string csv = cfg.get<std::string>("csv");
    write_text((fs::path(outdir) / csv).string(),
               mode_report_csv_header() +
                   ",mean_nearest_mode_distance,energy_distance\n" +
                   mode_report_csv_row(report) + "," +
                   format_double(mean_distance) + "," + format_double(energy) +
                   "\n");

    std::cout << "eval: covered " << report.covered << "/" << report.total_modes
              << " modes, kl " << format_double(report.kl_nats) << " nats, "
              << report.unassigned << " unassigned of " << report.samples
              << "\n";
    write_manifest(outdir, "eval", cfg, clock.seconds(), {out, csv});
    return kExitOk;
}

// ---------------------------------------------------------------------------
// check: the self-contained oracle battery; exit code 4 on any failure.
// ---------------------------------------------------------------------------
struct CheckFlags {
    CommonFlags common;
    std::string out = "checks.json";
};

void add_check_flags(CLI::App* sub, CheckFlags& f) {
    f.common.seed = 7;
    add_common_flags(sub, f.common);
    sub->add_option("--out", f.out, "results JSON")->capture_default_str();
}

int cmd_check(CLI::App* sub, const CheckFlags& f) {
    WallClock clock;
    ResolvedConfig cfg;
    cfg.declare("out", "checks.json", "tool");
    declare_common(cfg, 7);
    if (!f.common.config.empty())
        cfg.apply_config(
            config_payload(load_json_file(f.common.config), "check"));
    FlagRecorder rec{sub, cfg};
    rec.record("out", f.out);
    finish_common(rec, f.common);
    apply_threads(cfg);
    const std::string outdir = prepare_outdir(cfg);

    const auto results = run_check_battery(cfg.get<std::uint64_t>("seed"));
    for (const auto& r : results)
        std::cout << (r.pass ? "PASS" : "FAIL") << "  " << r.name
                  << "  measured=" << r.measured << " tol=" << r.tolerance
                  << "  " << r.detail << "\n";

    const std::string out = cfg.get<std::string>("out");
    write_text((fs::path(outdir) / out).string(),
               check_results_to_json(results).dump(2) + "\n");
    write_manifest(outdir, "check", cfg, clock.seconds(), {out});
    if (!all_passed(results)) {
        std::cout << "check: FAILED\n";
        return kExitCheckFailure;
    }
    std::cout << "check: all " << results.size() << " checks passed\n";
    return kExitOk;
}

}  // namespace

int run_cli(int argc, char** argv) {
    CLI::App app{"desk-scale lab for score-based generative sampling",
                 "scorelab"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    ScheduleFlags schedule_flags;
    TraceFlags trace_flags;
    SampleFlags sample_flags;
    TrainFlags train_flags;
    EvalFlags eval_flags;
    CheckFlags check_flags;

    CLI::App* schedule_sub = app.add_subcommand(
        "schedule", "build a geometric noise schedule as JSON");
    add_schedule_flags(schedule_sub, schedule_flags);
    CLI::App* trace_sub = app.add_subcommand(
        "trace", "noise-variance trace of both samplers (CSV, optional SVG)");
    add_trace_flags(trace_sub, trace_flags);
    CLI::App* sample_sub = app.add_subcommand(
        "sample", "run a sampler from a checkpoint or analytic oracle");
    add_sample_flags(sample_sub, sample_flags);
    CLI::App* train_sub = app.add_subcommand(
        "train", "fit a score network with DSM or the hybrid objective");
    add_train_flags(train_sub, train_flags);
    CLI::App* eval_sub =
        app.add_subcommand("eval", "mode coverage and distance metrics");
    add_eval_flags(eval_sub, eval_flags);
    CLI::App* check_sub = app.add_subcommand(
        "check", "run the numerical oracle battery and report PASS/FAIL");
    add_check_flags(check_sub, check_flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (schedule_sub->parsed()) return cmd_schedule(schedule_sub, schedule_flags);
        if (trace_sub->parsed()) return cmd_trace(trace_sub, trace_flags);
        if (sample_sub->parsed()) return cmd_sample(sample_sub, sample_flags);
        if (train_sub->parsed()) return cmd_train(train_sub, train_flags);
        if (eval_sub->parsed()) return cmd_eval(eval_sub, eval_flags);
        if (check_sub->parsed()) return cmd_check(check_sub, check_flags);
    } catch (const DivergenceError& e) {
        std::cerr << "divergence at update " << e.step << ": " << e.what()
                  << "\n";
        return kExitDivergence;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitConfig;
}

}  // namespace scorelab
