#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "adaptisent/checkpoint.hpp"
#include "adaptisent/config_io.hpp"
#include "adaptisent/data.hpp"
#include "adaptisent/eval.hpp"
#include "adaptisent/train.hpp"

#include <json.hpp>

namespace {

using namespace adaptisent;
namespace fs = std::filesystem;

std::vector<std::uint64_t> seed_list(int n, std::uint64_t base) {
    std::vector<std::uint64_t> seeds;
    for (int i = 0; i < n; ++i) seeds.push_back(base + static_cast<std::uint64_t>(i));
    return seeds;
}

Datasets load_dir(const std::string& dir, const RunConfig* cfg) {
    Datasets ds;
    ds.train = load_jsonl((fs::path(dir) / "train.jsonl").string(), cfg);
    ds.dev = load_jsonl((fs::path(dir) / "dev.jsonl").string(), cfg);
    ds.test = load_jsonl((fs::path(dir) / "test.jsonl").string(), cfg);
    return ds;
}

int cmd_gen_data(const std::string& spec_file, int n, double rho, std::uint64_t seed,
                 bool n_set, bool rho_set, bool seed_set, const std::string& out_dir) {
    SyntheticSpec spec;
    if (!spec_file.empty()) spec = load_synthetic_spec(spec_file);
    if (n_set) spec.n_instances = n;
    if (rho_set) spec.rho = rho;
    if (seed_set) spec.seed = seed;
    spec.validate();

    fs::create_directories(out_dir);
    Datasets ds = generate(spec);
    save_jsonl(ds.train, (fs::path(out_dir) / "train.jsonl").string());
    save_jsonl(ds.dev, (fs::path(out_dir) / "dev.jsonl").string());
    save_jsonl(ds.test, (fs::path(out_dir) / "test.jsonl").string());

    nlohmann::ordered_json all;
    std::cout << "split      pos    neg    neu    total  aspects  length\n";
    for (auto [name, split] : {std::pair{"train", &ds.train}, {"dev", &ds.dev}, {"test", &ds.test}}) {
        const DatasetStats s = stats(*split);
        char buf[160];
        std::snprintf(buf, sizeof buf, "%-9s %6ld %6ld %6ld %8ld %8.3f %7.2f\n", name, s.positive,
                      s.negative, s.neutral, s.total_aspects, s.mean_aspects, s.mean_length);
        std::cout << buf;
        all[name] = nlohmann::ordered_json::parse(stats_json(s));
    }
    std::ofstream stats_out(fs::path(out_dir) / "stats.json");
    stats_out << all.dump() << "\n";
    return 0;
}

int cmd_train(const std::string& config_file, const std::string& data_dir,
              const std::string& out_dir, const CLI::App& cmd) {
    RunConfig cfg;
    if (!config_file.empty()) cfg = load_run_config(config_file);
    // flags override file values
    if (cmd.count("--epochs")) cfg.epochs = cmd.get_option("--epochs")->as<int>();
    if (cmd.count("--seed")) cfg.seed = cmd.get_option("--seed")->as<std::uint64_t>();
    if (cmd.count("--lr")) cfg.lr = cmd.get_option("--lr")->as<double>();
    if (cmd.count("--batch-size")) cfg.batch_size = cmd.get_option("--batch-size")->as<int>();
    if (cmd.count("--gamma")) cfg.gamma = cmd.get_option("--gamma")->as<double>();
    if (cmd.count("--lambda")) cfg.lambda = cmd.get_option("--lambda")->as<double>();
    cfg.validate();

    const Datasets ds = load_dir(data_dir, &cfg);
    fs::create_directories(out_dir);
    std::ofstream log_out(fs::path(out_dir) / "train_log.jsonl");
    if (!log_out) throw IoError("cannot open training log for writing");

    const TrainResult result = train(cfg, ds.train, ds.dev, &log_out);
    save_checkpoint({cfg, result.best_params}, (fs::path(out_dir) / "checkpoint.txt").string());

    const EvalMetrics dev = evaluate(result.best_params, cfg, ds.dev);
    std::cout << "best epoch " << result.best_epoch << ", dev precision " << dev.precision
              << ", recall " << dev.recall << ", f1 " << dev.f1 << "\n";
    return 0;
}

int cmd_eval(const std::string& ckpt_file, const std::string& data_path, bool as_json) {
    const Checkpoint ckpt = load_checkpoint(ckpt_file);
    const std::string path = fs::is_directory(data_path)
                                 ? (fs::path(data_path) / "test.jsonl").string()
                                 : data_path;
    const auto dataset = load_jsonl(path, &ckpt.config);
    if (dataset.empty()) throw ConfigError("eval: empty dataset: " + path);
    const EvalMetrics m = evaluate(ckpt.params, ckpt.config, dataset);
    if (as_json) {
        nlohmann::ordered_json j;
        j["precision"] = m.precision;
        j["recall"] = m.recall;
        j["f1"] = m.f1;
        j["tp"] = m.tp;
        j["fp"] = m.fp;
        j["fn"] = m.fn;
        std::cout << j.dump() << "\n";
    } else {
        std::cout << "precision " << m.precision << "\nrecall " << m.recall << "\nf1 " << m.f1
                  << "\ntp " << m.tp << " fp " << m.fp << " fn " << m.fn << "\n";
    }
    return 0;
}

int cmd_ablate(const std::string& config_file, const std::string& data_dir, int n_seeds,
               const std::string& out_file) {
    RunConfig cfg;
    if (!config_file.empty()) cfg = load_run_config(config_file);
    cfg.validate();
    const Datasets ds = load_dir(data_dir, &cfg);
    const auto rows = ablate(cfg, ds.train, ds.dev, ds.test, seed_list(n_seeds, cfg.seed));
    const std::string csv = ablation_csv(rows);
    std::cout << csv;
    if (!out_file.empty()) {
        std::ofstream out(out_file);
        if (!out) throw IoError("cannot write " + out_file);
        out << csv;
    }
    return 0;
}

int cmd_grad_check(const std::string& config_file, int samples, double tol, double eps) {
    RunConfig cfg = config_file.empty() ? grad_check_config() : load_run_config(config_file);
    cfg.validate();
    if (samples < 1) throw ConfigError("--samples must be >= 1");
    if (tol < 0.0) throw ConfigError("--tol must be >= 0");

    const ModelParams params = init_params(cfg, cfg.seed);
    bool all_passed = true;
    std::uint64_t fixture_seed = 1;
    for (auto [length, patches] : {std::pair{2, 1}, {3, 2}, {5, 4}}) {
        std::vector<MultimodalInstance> batch;
        for (int i = 0; i < samples; ++i)
            batch.push_back(probe_instance(cfg, length, patches, fixture_seed++));
        const GradCheckReport report = grad_check(params, cfg, batch, eps);
        std::cout << "batch L=" << length << " K=" << patches << "\n";
        for (const GradCheckGroup& g : report.groups) {
            const bool ok = g.max_rel_err < tol;
            all_passed = all_passed && ok;
            char buf[128];
            std::snprintf(buf, sizeof buf, "  %-16s max_rel_err %.3e  %s\n", g.name.c_str(),
                          g.max_rel_err, ok ? "ok" : "FAIL");
            std::cout << buf;
        }
    }
    std::cout << (all_passed ? "grad-check PASS\n" : "grad-check FAIL\n");
    return all_passed ? 0 : 1;
}

int cmd_sweep(const std::string& param, const std::string& grid_csv, const std::string& config_file,
              const std::string& data_dir, int n_seeds, const std::string& out_file) {
    RunConfig cfg;
    if (!config_file.empty()) cfg = load_run_config(config_file);
    cfg.validate();
    std::vector<double> grid;
    std::stringstream gs(grid_csv);
    std::string item;
    while (std::getline(gs, item, ',')) {
        if (item.empty()) continue;
        try {
            grid.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ConfigError("sweep: bad grid value: " + item);
        }
    }
    const Datasets ds = load_dir(data_dir, &cfg);
    const auto rows = sweep(cfg, param, grid, ds.train, ds.dev, ds.test, seed_list(n_seeds, cfg.seed));
    const std::string csv = sweep_csv(param, rows);
    std::cout << csv;
    if (!out_file.empty()) {
        std::ofstream out(out_file);
        if (!out) throw IoError("cannot write " + out_file);
        out << csv;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Toy-scale multimodal aspect-based sentiment analysis with adaptive cross-modal "
                 "attention"};
    app.require_subcommand(1);

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "Generate synthetic train/dev/test JSONL splits");
    std::string spec_file, out_dir = "data";
    int n = 1000;
    double rho = 0.5;
    std::uint64_t seed = 1;
    gen->add_option("--spec", spec_file, "Spec file (key = value)");
    auto* n_opt = gen->add_option("--n", n, "Total instance count");
    auto* rho_opt = gen->add_option("--rho", rho, "Visual-signal probability in [0,1]");
    auto* seed_opt = gen->add_option("--seed", seed, "Generator seed");
    gen->add_option("--out", out_dir, "Output directory")->required();

    // train
    auto* tr = app.add_subcommand("train", "Train on generated data and write a checkpoint");
    std::string train_config, train_data, train_out = "run";
    tr->add_option("--config", train_config, "RunConfig file");
    tr->add_option("--data", train_data, "Data directory with train/dev/test.jsonl")->required();
    tr->add_option("--out", train_out, "Output directory");
    int tr_epochs = 0, tr_batch = 0;
    double tr_lr = 0, tr_gamma = 0, tr_lambda = 0;
    std::uint64_t tr_seed = 0;
    tr->add_option("--epochs", tr_epochs, "Override epochs");
    tr->add_option("--seed", tr_seed, "Override seed");
    tr->add_option("--lr", tr_lr, "Override learning rate");
    tr->add_option("--batch-size", tr_batch, "Override batch size");
    tr->add_option("--gamma", tr_gamma, "Override gamma");
    tr->add_option("--lambda", tr_lambda, "Override lambda");

    // eval
    auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
    std::string eval_ckpt, eval_data;
    bool eval_json = false;
    ev->add_option("--ckpt", eval_ckpt, "Checkpoint file")->required();
    ev->add_option("--data", eval_data, "JSONL file or data directory (uses test.jsonl)")->required();
    ev->add_flag("--json", eval_json, "Emit one machine-readable record on stdout");

    // ablate
    auto* ab = app.add_subcommand("ablate", "Run the six-variant ablation table");
    std::string ab_config, ab_data, ab_out;
    int ab_seeds = 3;
    ab->add_option("--config", ab_config, "RunConfig file");
    ab->add_option("--data", ab_data, "Data directory")->required();
    ab->add_option("--seeds", ab_seeds, "Number of seeds per variant");
    ab->add_option("--out", ab_out, "CSV output file (stdout always)");

    // grad-check
    auto* gc = app.add_subcommand("grad-check", "Verify analytic gradients against finite differences");
    std::string gc_config;
    int gc_samples = 2;
    double gc_tol = 1e-4, gc_eps = 1e-3;
    gc->add_option("--config", gc_config, "RunConfig file (defaults to a small check config)");
    gc->add_option("--samples", gc_samples, "Instances per (L, K) batch");
    gc->add_option("--tol", gc_tol, "Max relative error allowed");
    gc->add_option("--eps", gc_eps, "Finite-difference step");

    // sweep
    auto* sw = app.add_subcommand("sweep", "Retrain over a gamma or lambda grid");
    std::string sw_param, sw_grid = "0.01,0.03,0.1,0.3,0.5,1", sw_config, sw_data, sw_out;
    int sw_seeds = 3;
    sw->add_option("--param", sw_param, "gamma or lambda")->required();
    sw->add_option("--grid", sw_grid, "Comma-separated grid values");
    sw->add_option("--config", sw_config, "RunConfig file");
    sw->add_option("--data", sw_data, "Data directory")->required();
    sw->add_option("--seeds", sw_seeds, "Seeds per grid point");
    sw->add_option("--out", sw_out, "CSV output file (stdout always)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (gen->parsed())
            return cmd_gen_data(spec_file, n, rho, seed, n_opt->count() > 0, rho_opt->count() > 0,
                                seed_opt->count() > 0, out_dir);
        if (tr->parsed()) return cmd_train(train_config, train_data, train_out, *tr);
        if (ev->parsed()) return cmd_eval(eval_ckpt, eval_data, eval_json);
        if (ab->parsed()) return cmd_ablate(ab_config, ab_data, ab_seeds, ab_out);
        if (gc->parsed()) return cmd_grad_check(gc_config, gc_samples, gc_tol, gc_eps);
        if (sw->parsed()) return cmd_sweep(sw_param, sw_grid, sw_config, sw_data, sw_seeds, sw_out);
    } catch (const ConfigError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
