#include "tsbench/models.hpp"

#include "tsbench/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

namespace tsbench {

using nlohmann::json;

// ---------------------------------------------------------------------------
// ConditionMode / ConditionBatch
// ---------------------------------------------------------------------------

std::string to_string(ConditionMode m) {
    switch (m) {
        case ConditionMode::none: return "none";
        case ConditionMode::class_label: return "class";
        case ConditionMode::history: return "history";
        case ConditionMode::mask: return "mask";
    }
    throw UsageError("bad condition mode");
}

ConditionMode condition_mode_from_string(const std::string& s) {
    if (s == "none") return ConditionMode::none;
    if (s == "class") return ConditionMode::class_label;
    if (s == "history") return ConditionMode::history;
    if (s == "mask") return ConditionMode::mask;
    throw ParamError("unknown condition mode: " + s);
}

ConditionBatch ConditionBatch::none(std::size_t rows) {
    ConditionBatch c;
    c.mode = ConditionMode::none;
    c.rows = rows;
    return c;
}

ConditionBatch ConditionBatch::of_labels(std::vector<int> labels) {
    ConditionBatch c;
    c.mode = ConditionMode::class_label;
    c.rows = labels.size();
    c.labels = std::move(labels);
    return c;
}

ConditionBatch ConditionBatch::of_history(Array3 history) {
    ConditionBatch c;
    c.mode = ConditionMode::history;
    c.rows = history.n;
    c.history = std::move(history);
    return c;
}

ConditionBatch ConditionBatch::of_mask(Array3 observed, Array3 mask) {
    if (!observed.same_shape(mask)) throw SizingError("mask condition: X~ and m shapes differ");
    ConditionBatch c;
    c.mode = ConditionMode::mask;
    c.rows = observed.n;
    c.observed = std::move(observed);
    c.mask = std::move(mask);
    return c;
}

ConditionBatch ConditionBatch::subset(const std::vector<std::size_t>& idx) const {
    ConditionBatch c;
    c.mode = mode;
    c.rows = idx.size();
    switch (mode) {
        case ConditionMode::none: break;
        case ConditionMode::class_label:
            c.labels.reserve(idx.size());
            for (std::size_t i : idx) c.labels.push_back(labels.at(i));
            break;
        case ConditionMode::history: c.history = take_rows(history, idx); break;
        case ConditionMode::mask:
            c.observed = take_rows(observed, idx);
            c.mask = take_rows(mask, idx);
            break;
    }
    return c;
}

void ConditionBatch::validate() const {
    switch (mode) {
        case ConditionMode::none: break;
        case ConditionMode::class_label:
            if (labels.size() != rows) throw SizingError("label rows mismatch");
            break;
        case ConditionMode::history:
            if (history.n != rows) throw SizingError("history rows mismatch");
            break;
        case ConditionMode::mask:
            if (observed.n != rows || mask.n != rows) throw SizingError("mask rows mismatch");
            break;
    }
}

// ---------------------------------------------------------------------------
// TrainerConfig
// ---------------------------------------------------------------------------

void TrainerConfig::validate() const {
    if (max_epochs < 1 || patience < 1 || batch_size < 1)
        throw ParamError("trainer counts must be positive");
    if (patience > max_epochs) throw ParamError("patience must not exceed max_epochs");
    if (!(lr > 0.0)) throw ParamError("learning rate must be positive");
}

std::string TrainerConfig::to_json() const {
    json j;
    j["max_epochs"] = max_epochs;
    j["patience"] = patience;
    j["batch_size"] = batch_size;
    j["lr"] = lr;
    j["grad_clip"] = grad_clip;
    j["seed"] = seed;
    return j.dump();
}

TrainerConfig TrainerConfig::from_json(const std::string& text) {
    json j = json::parse(text);
    TrainerConfig c;
    c.max_epochs = j.value("max_epochs", c.max_epochs);
    c.patience = j.value("patience", c.patience);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.lr = j.value("lr", c.lr);
    c.grad_clip = j.value("grad_clip", c.grad_clip);
    c.seed = j.value("seed", c.seed);
    return c;
}

void ModelGeometry::validate(ConditionMode mode) const {
    if (t < 1 || d < 1) throw ParamError("model geometry requires T,D >= 1");
    if (mode == ConditionMode::class_label && n_classes < 2)
        throw ParamError("class conditioning requires n_classes >= 2");
    if ((mode == ConditionMode::history || mode == ConditionMode::mask) &&
        (cond_t < 1 || cond_d < 1))
        throw ParamError("history/mask conditioning requires condition geometry");
}

// ---------------------------------------------------------------------------
// ConditionEncoder
// ---------------------------------------------------------------------------

ConditionEncoder::ConditionEncoder(nn::ParamStore& ps, const std::string& name, ConditionMode mode,
                                   const ModelGeometry& geo, std::size_t width, Rng& rng)
    : mode_(mode), width_(width) {
    switch (mode) {
        case ConditionMode::none: break;
        case ConditionMode::class_label:
            emb_ = nn::Embedding(ps, name + ".label", static_cast<std::size_t>(geo.n_classes),
                                 width, rng);
            break;
        case ConditionMode::history:
            mlp_ = nn::Mlp(ps, name + ".mlp", geo.cond_t * geo.cond_d, {width}, width, rng);
            break;
        case ConditionMode::mask:
            mlp_ = nn::Mlp(ps, name + ".mlp", 2 * geo.cond_t * geo.cond_d, {width}, width, rng);
            break;
    }
}

ad::Var ConditionEncoder::operator()(const ConditionBatch& cond) const {
    switch (mode_) {
        case ConditionMode::none: return ad::Var();
        case ConditionMode::class_label: {
            std::vector<std::size_t> idx(cond.labels.size());
            for (std::size_t i = 0; i < idx.size(); ++i)
                idx[i] = static_cast<std::size_t>(cond.labels[i]);
            return emb_(idx);
        }
        case ConditionMode::history: {
            ad::Tensor x({cond.rows, cond.history.t * cond.history.d}, cond.history.v);
            return mlp_(ad::constant(std::move(x)));
        }
        case ConditionMode::mask: {
            std::size_t w = cond.observed.t * cond.observed.d;
            ad::Tensor x({cond.rows, 2 * w});
            for (std::size_t i = 0; i < cond.rows; ++i) {
                std::copy(cond.observed.v.begin() + i * w, cond.observed.v.begin() + (i + 1) * w,
                          x.v.begin() + i * 2 * w);
                std::copy(cond.mask.v.begin() + i * w, cond.mask.v.begin() + (i + 1) * w,
                          x.v.begin() + i * 2 * w + w);
            }
            return mlp_(ad::constant(std::move(x)));
        }
    }
    throw UsageError("bad condition mode");
}

// ---------------------------------------------------------------------------
// GenerativeModel: trainer and sampling shell
// ---------------------------------------------------------------------------

void GenerativeModel::check_condition(const ConditionBatch& cond) const {
    if (cond.mode != cond_mode_)
        throw UsageError(name() + " was configured with condition mode '" +
                         to_string(cond_mode_) + "' but got '" + to_string(cond.mode) + "'");
    cond.validate();
}

void GenerativeModel::check_geometry(const TrainingDataset& ds) const {
    if (ds.targets.t != geo_.t || ds.targets.d != geo_.d)
        throw ConfigError(name() + ": data geometry " + ds.targets.shape_str() +
                          " does not match model geometry [" + std::to_string(geo_.t) + "," +
                          std::to_string(geo_.d) + "]");
    if (ds.cond.rows != ds.targets.n) throw SizingError("conditions not aligned with targets");
}

void GenerativeModel::at_fit_start(const TrainingDataset& train) {
    data_min_.assign(geo_.d, std::numeric_limits<double>::infinity());
    data_max_.assign(geo_.d, -std::numeric_limits<double>::infinity());
    const Array3& a = train.targets;
    for (std::size_t i = 0; i < a.n; ++i)
        for (std::size_t j = 0; j < a.t; ++j)
            for (std::size_t k = 0; k < a.d; ++k) {
                data_min_[k] = std::min(data_min_[k], a.at(i, j, k));
                data_max_[k] = std::max(data_max_[k], a.at(i, j, k));
            }
}

TrainingLog GenerativeModel::fit(const TrainingDataset& train, const TrainingDataset& val,
                                 const TrainerConfig& cfg) {
    cfg.validate();
    check_condition(train.cond);
    check_condition(val.cond);
    check_geometry(train);
    check_geometry(val);
    if (train.n() == 0) throw ConfigError("empty training set");
    if (val.n() == 0) throw ConfigError("empty validation set");

    at_fit_start(train);

    std::uint64_t val_seed = derive_seed(cfg.seed, name() + "/validation");
    Rng train_rng(derive_seed(cfg.seed, name() + "/train"));

    TrainingLog log;
    double best = std::numeric_limits<double>::infinity();
    std::vector<ad::Tensor> best_snapshot = params_.snapshot();
    std::size_t best_epoch = 0;

    std::vector<std::size_t> order(train.n());
    std::iota(order.begin(), order.end(), 0);

    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        Rng shuffle_rng(derive_seed(cfg.seed, name() + "/shuffle/" + std::to_string(epoch)));
        shuffle_rng.shuffle(order);

        std::size_t n_batches = (train.n() + cfg.batch_size - 1) / cfg.batch_size;
        for (std::size_t b = 0; b < n_batches; ++b) {
            std::size_t lo = b * cfg.batch_size;
            std::size_t hi = std::min(lo + cfg.batch_size, train.n());
            std::vector<std::size_t> idx(order.begin() + lo, order.begin() + hi);
            Array3 targets = take_rows(train.targets, idx);
            ConditionBatch cond = train.cond.subset(idx);
            double loss = train_step(targets, cond, train_rng);
            if (!std::isfinite(loss))
                throw DivergedError(name() + ": non-finite training loss", static_cast<int>(b));
        }

        double metric = validation_metric(val, val_seed);
        if (!std::isfinite(metric))
            throw DivergedError(name() + ": non-finite validation metric",
                                static_cast<int>(epoch));
        log.val_metrics.push_back(metric);

        if (metric < best) {
            best = metric;
            best_epoch = epoch;
            best_snapshot = params_.snapshot();
        }
        log.stop_epoch = epoch;
        if (epoch - best_epoch >= cfg.patience) break;
    }

    params_.restore(best_snapshot);
    log.best_epoch = best_epoch;
    log.best_metric = best;
    fitted_ = true;
    return log;
}

Array3 GenerativeModel::sample(std::size_t n_draws, const ConditionBatch& cond,
                               std::uint64_t seed, bool allow_unfitted) {
    if (!fitted_ && !allow_unfitted)
        throw StateError(name() + ": sample called on an unfitted model");
    check_condition(cond);
    Array3 out(n_draws * cond.rows, geo_.t, geo_.d);
    if (n_draws == 0 || cond.rows == 0) return out;
    ad::NoGradGuard guard;
    Rng rng(derive_seed(seed, name() + "/sample"));
    for (std::size_t s = 0; s < n_draws; ++s) {
        Array3 batch = sample_batch(cond, rng);
        std::copy(batch.v.begin(), batch.v.end(),
                  out.v.begin() + s * cond.rows * geo_.t * geo_.d);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

namespace {
constexpr int kCheckpointVersion = 1;
}

void GenerativeModel::save_checkpoint(const std::filesystem::path& dir,
                                      const std::string& scaler_json,
                                      const std::string& trainer_json) const {
    std::filesystem::create_directories(dir);

    json manifest;
    manifest["format"] = "tsbench-checkpoint";
    manifest["version"] = kCheckpointVersion;
    manifest["model"] = name();
    manifest["config"] = json::parse(config_json());
    manifest["condition_mode"] = to_string(cond_mode_);
    json geo;
    geo["t"] = geo_.t;
    geo["d"] = geo_.d;
    geo["cond_t"] = geo_.cond_t;
    geo["cond_d"] = geo_.cond_d;
    geo["n_classes"] = geo_.n_classes;
    manifest["geometry"] = geo;
    manifest["fitted"] = fitted_;
    manifest["data_min"] = data_min_;
    manifest["data_max"] = data_max_;
    if (!scaler_json.empty()) manifest["scaler"] = json::parse(scaler_json);
    if (!trainer_json.empty()) manifest["trainer"] = json::parse(trainer_json);

    json plist = json::array();
    std::size_t offset = 0;
    std::ofstream bin(dir / "params.bin", std::ios::binary);
    if (!bin) throw IngestError("cannot write checkpoint params to " + dir.string());
    for (const auto& [pname, var] : params_.entries()) {
        json p;
        p["name"] = pname;
        p["shape"] = var.shape();
        p["offset"] = offset;
        plist.push_back(p);
        bin.write(reinterpret_cast<const char*>(var.val().v.data()),
                  static_cast<std::streamsize>(var.size() * sizeof(double)));
        offset += var.size();
    }
    manifest["params"] = plist;

    std::ofstream out(dir / "checkpoint.json");
    out << manifest.dump(2) << "\n";
}

std::unique_ptr<GenerativeModel> load_checkpoint(const std::filesystem::path& dir,
                                                 std::string* scaler_json,
                                                 std::string* trainer_json) {
    std::ifstream in(dir / "checkpoint.json");
    if (!in) throw IngestError("missing checkpoint.json in " + dir.string());
    json manifest = json::parse(in);
    if (manifest.value("format", "") != "tsbench-checkpoint")
        throw IngestError("not a checkpoint directory: " + dir.string());
    if (manifest.value("version", 0) != kCheckpointVersion)
        throw IngestError("unsupported checkpoint version");

    ModelGeometry geo;
    geo.t = manifest["geometry"]["t"].get<std::size_t>();
    geo.d = manifest["geometry"]["d"].get<std::size_t>();
    geo.cond_t = manifest["geometry"]["cond_t"].get<std::size_t>();
    geo.cond_d = manifest["geometry"]["cond_d"].get<std::size_t>();
    geo.n_classes = manifest["geometry"]["n_classes"].get<int>();
    ConditionMode mode = condition_mode_from_string(manifest["condition_mode"].get<std::string>());

    auto model = make_model(manifest["model"].get<std::string>(), manifest["config"].dump(), geo,
                            mode, /*seed=*/0);

    std::ifstream bin(dir / "params.bin", std::ios::binary);
    if (!bin) throw IngestError("missing params.bin in " + dir.string());
    for (const json& p : manifest["params"]) {
        std::string pname = p["name"].get<std::string>();
        ad::Var var = model->params_[pname];
        auto shape = p["shape"].get<std::vector<std::size_t>>();
        if (shape != var.shape()) throw IngestError("checkpoint shape mismatch for " + pname);
        bin.seekg(static_cast<std::streamoff>(p["offset"].get<std::size_t>() * sizeof(double)));
        bin.read(reinterpret_cast<char*>(var.mutable_value().v.data()),
                 static_cast<std::streamsize>(var.size() * sizeof(double)));
        if (bin.gcount() != static_cast<std::streamsize>(var.size() * sizeof(double)))
            throw IngestError("truncated params.bin");
    }

    model->fitted_ = manifest.value("fitted", false);
    model->data_min_ = manifest.value("data_min", std::vector<double>{});
    model->data_max_ = manifest.value("data_max", std::vector<double>{});
    if (scaler_json) *scaler_json = manifest.contains("scaler") ? manifest["scaler"].dump() : "";
    if (trainer_json)
        *trainer_json = manifest.contains("trainer") ? manifest["trainer"].dump() : "";
    return model;
}

// ---------------------------------------------------------------------------
// Factory
// ---------------------------------------------------------------------------

namespace detail {
void check_known_keys(const json& j, const std::vector<std::string>& known,
                      const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            throw ConfigError("unknown key '" + it.key() + "' in " + where);
}
} // namespace detail

std::unique_ptr<GenerativeModel> make_model(const std::string& name,
                                            const std::string& config_json,
                                            const ModelGeometry& geo, ConditionMode mode,
                                            std::uint64_t seed) {
    geo.validate(mode);
    json j = config_json.empty() ? json::object() : json::parse(config_json);
    if (name == "vanilla_vae") {
        detail::check_known_keys(j, {"latent", "hidden", "beta", "cond_width"}, "vanilla_vae config");
        VaeConfig cfg;
        cfg.latent = j.value("latent", cfg.latent);
        cfg.hidden = j.value("hidden", cfg.hidden);
        cfg.beta = j.value("beta", cfg.beta);
        cfg.cond_width = j.value("cond_width", cfg.cond_width);
        return std::make_unique<VanillaVae>(cfg, geo, mode, seed);
    }
    if (name == "vanilla_gan") {
        detail::check_known_keys(
            j, {"latent", "hidden", "cond_width", "lambda_gp", "n_critic", "val_sample_cap"},
            "vanilla_gan config");
        GanConfig cfg;
        cfg.latent = j.value("latent", cfg.latent);
        cfg.hidden = j.value("hidden", cfg.hidden);
        cfg.cond_width = j.value("cond_width", cfg.cond_width);
        cfg.lambda_gp = j.value("lambda_gp", cfg.lambda_gp);
        cfg.n_critic = j.value("n_critic", cfg.n_critic);
        cfg.val_sample_cap = j.value("val_sample_cap", cfg.val_sample_cap);
        return std::make_unique<VanillaGan>(cfg, geo, mode, seed);
    }
    if (name == "vanilla_ddpm") {
        detail::check_known_keys(
            j, {"steps", "schedule", "beta_lo", "beta_hi", "predict", "width", "blocks", "heads"},
            "vanilla_ddpm config");
        DdpmConfig cfg;
        cfg.steps = j.value("steps", cfg.steps);
        if (j.contains("schedule"))
            cfg.schedule = schedule_kind_from_string(j["schedule"].get<std::string>());
        cfg.beta_lo = j.value("beta_lo", cfg.beta_lo);
        cfg.beta_hi = j.value("beta_hi", cfg.beta_hi);
        if (j.contains("predict")) {
            std::string p = j["predict"].get<std::string>();
            if (p == "epsilon")
                cfg.predict = DdpmPredict::epsilon;
            else if (p == "x0")
                cfg.predict = DdpmPredict::x0;
            else
                throw ConfigError("predict must be 'epsilon' or 'x0'");
        }
        cfg.width = j.value("width", cfg.width);
        cfg.blocks = j.value("blocks", cfg.blocks);
        cfg.heads = j.value("heads", cfg.heads);
        return std::make_unique<VanillaDdpm>(cfg, geo, mode, seed);
    }
    if (name == "vanilla_maf") {
        detail::check_known_keys(j, {"n_layers", "hidden", "cond_width", "scale_cap"},
                                 "vanilla_maf config");
        MafConfig cfg;
        cfg.n_layers = j.value("n_layers", cfg.n_layers);
        cfg.hidden = j.value("hidden", cfg.hidden);
        cfg.cond_width = j.value("cond_width", cfg.cond_width);
        cfg.scale_cap = j.value("scale_cap", cfg.scale_cap);
        return std::make_unique<VanillaMaf>(cfg, geo, mode, seed);
    }
    throw ConfigError("unknown model: " + name);
}

} // namespace tsbench
