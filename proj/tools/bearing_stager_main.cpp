// bearing-stager: segment bearing run-to-failure vibration records into
// degradation stages and classify single snapshots.
//
// Built entirely on the C API in bearing_stager.h. Exit codes: 0 success,
// 1 runtime error, 2 usage error.

#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bearing_stager.h"

namespace {

struct ConfigDeleter {
    void operator()(bsg_config* c) const { bsg_config_destroy(c); }
};
using ConfigPtr = std::unique_ptr<bsg_config, ConfigDeleter>;

int runtime_fail(bsg_status status, const char* command) {
    std::fprintf(stderr, "error: %s: [%d] %s\n", command, static_cast<int>(status),
                 bsg_last_error());
    return 1;
}

// Shared config options: --config file first, then --set overrides, then the
// direct --seed flag.
struct ConfigArgs {
    std::string config_file;
    std::vector<std::string> overrides;
    std::string seed;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_file, "key = value config file with [sections]");
        cmd->add_option("--set", overrides, "override a config key, e.g. --set ae.epochs=100")
            ->take_all();
        cmd->add_option("--seed", seed, "global random seed (overrides pipeline.seed)");
    }

    ConfigPtr build(int& exit_code) const {
        ConfigPtr cfg(bsg_config_create());
        exit_code = 0;
        if (!config_file.empty()) {
            if (bsg_config_load_file(cfg.get(), config_file.c_str()) != BSG_OK) {
                std::fprintf(stderr, "error: config: %s\n", bsg_last_error());
                exit_code = 2;
                return cfg;
            }
        }
        for (const std::string& entry : overrides) {
            const auto eq = entry.find('=');
            if (eq == std::string::npos) {
                std::fprintf(stderr, "error: --set expects key=value, got '%s'\n", entry.c_str());
                exit_code = 2;
                return cfg;
            }
            const std::string key = entry.substr(0, eq);
            const std::string value = entry.substr(eq + 1);
            if (bsg_config_set(cfg.get(), key.c_str(), value.c_str()) != BSG_OK) {
                std::fprintf(stderr, "error: --set %s: %s\n", key.c_str(), bsg_last_error());
                exit_code = 2;
                return cfg;
            }
        }
        if (!seed.empty() &&
            bsg_config_set(cfg.get(), "pipeline.seed", seed.c_str()) != BSG_OK) {
            std::fprintf(stderr, "error: --seed: %s\n", bsg_last_error());
            exit_code = 2;
        }
        return cfg;
    }
};

// Any config key is addressable directly as a flag: "--ae.epochs 100" and
// "--ae.epochs=100" both rewrite to "--set ae.epochs=100" before parsing.
std::vector<std::string> rewrite_config_flags(int argc, char** argv) {
    std::vector<std::string> args;
    args.reserve(static_cast<std::size_t>(argc));
    for (int i = 0; i < argc; ++i) {
        std::string arg = argv[i];
        if (arg.rfind("--", 0) == 0 && arg.find('.') != std::string::npos) {
            const auto eq = arg.find('=');
            if (eq != std::string::npos) {
                args.push_back("--set");
                args.push_back(arg.substr(2, eq - 2) + arg.substr(eq));
                continue;
            }
            if (i + 1 < argc) {
                args.push_back("--set");
                args.push_back(arg.substr(2) + "=" + argv[++i]);
                continue;
            }
        }
        args.push_back(std::move(arg));
    }
    return args;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"bearing degradation stage labeling and classification", "bearing-stager"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(bsg_version()));

    // ingest-check
    auto* check = app.add_subcommand("ingest-check", "load a bearing run and report problems");
    std::string check_root, check_bearing, check_export, check_features;
    ConfigArgs check_cfg;
    check->add_option("--root", check_root, "dataset root directory")->required();
    check->add_option("--bearing", check_bearing, "bearing id, e.g. Bearing1_1")->required();
    check->add_option("--export", check_export, "also write the run as a .bsr container");
    check->add_option("--features", check_features,
                      "also write the per-snapshot time-feature matrix CSV");
    check_cfg.attach(check);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic run with truth labels");
    std::string synth_out;
    ConfigArgs synth_cfg;
    synth->add_option("--out", synth_out, "output directory (FEMTO layout)")->required();
    synth_cfg.attach(synth);

    // label
    auto* label = app.add_subcommand("label", "segment one bearing's lifetime into stages");
    std::string label_root, label_bearing, label_method = "ae", label_out;
    ConfigArgs label_cfg;
    label->add_option("--root", label_root, "dataset root directory")->required();
    label->add_option("--bearing", label_bearing, "bearing id")->required();
    label->add_option("--method", label_method, "ae or pca")
        ->check(CLI::IsMember({"ae", "pca"}));
    label->add_option("--out", label_out, "output label CSV")->required();
    label_cfg.attach(label);

    // train
    auto* train = app.add_subcommand("train", "train the stage classifier from labeled runs");
    std::string train_root, train_out;
    std::vector<std::string> train_labels;
    ConfigArgs train_cfg;
    train->add_option("--runs", train_root, "dataset root directory")->required();
    train->add_option("--labels", train_labels,
                      "label CSV files; bearing id = filename stem")
        ->required()
        ->take_all();
    train->add_option("--out", train_out, "output model file")->required();
    train_cfg.attach(train);

    // predict
    auto* predict = app.add_subcommand("predict", "smoothed posteriors for one run");
    std::string predict_model, predict_run, predict_out;
    ConfigArgs predict_cfg;
    predict->add_option("--model", predict_model, "classifier model file")->required();
    predict->add_option("--run", predict_run, "run directory or .bsr file")->required();
    predict->add_option("--out", predict_out, "output posteriors CSV")->required();
    predict_cfg.attach(predict);

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "accuracy/overlap/fault-timing report");
    std::string eval_model, eval_root, eval_out, eval_jobs;
    std::vector<std::string> eval_labels;
    ConfigArgs eval_cfg;
    evaluate->add_option("--model", eval_model, "classifier model file")->required();
    evaluate->add_option("--runs", eval_root, "dataset root directory")->required();
    evaluate->add_option("--labels", eval_labels, "reference label CSV files")
        ->required()
        ->take_all();
    evaluate->add_option("--out", eval_out, "output report directory")->required();
    evaluate->add_option("--jobs", eval_jobs, "per-bearing worker pool size");
    eval_cfg.attach(evaluate);

    auto args = rewrite_config_flags(argc, argv);
    try {
        // CLI11 wants the argument list reversed, program name dropped.
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        reversed.pop_back();
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    auto build_config = [](const ConfigArgs& args, ConfigPtr& cfg) -> int {
        int code = 0;
        cfg = args.build(code);
        return code;
    };

    if (check->parsed()) {
        ConfigPtr cfg;
        if (int code = build_config(check_cfg, cfg)) return code;
        char* report = nullptr;
        size_t issues = 0;
        const bsg_status st = bsg_cmd_ingest_check(
            check_root.c_str(), check_bearing.c_str(),
            check_export.empty() ? nullptr : check_export.c_str(),
            check_features.empty() ? nullptr : check_features.c_str(), cfg.get(), &report,
            &issues);
        if (st != BSG_OK) return runtime_fail(st, "ingest-check");
        std::fputs(report, stdout);
        bsg_string_free(report);
        return issues == 0 ? 0 : 1;
    }

    if (synth->parsed()) {
        ConfigPtr cfg;
        if (int code = build_config(synth_cfg, cfg)) return code;
        const bsg_status st = bsg_cmd_synth(cfg.get(), synth_out.c_str());
        if (st != BSG_OK) return runtime_fail(st, "synth");
        std::printf("wrote synthetic run to %s\n", synth_out.c_str());
        return 0;
    }

    if (label->parsed()) {
        ConfigPtr cfg;
        if (int code = build_config(label_cfg, cfg)) return code;
        const bsg_status st = bsg_cmd_label(label_root.c_str(), label_bearing.c_str(),
                                            label_method.c_str(), cfg.get(), label_out.c_str());
        if (st != BSG_OK) return runtime_fail(st, "label");
        std::printf("wrote %s labels to %s\n", label_method.c_str(), label_out.c_str());
        return 0;
    }

    if (train->parsed()) {
        ConfigPtr cfg;
        if (int code = build_config(train_cfg, cfg)) return code;
        std::vector<const char*> files;
        files.reserve(train_labels.size());
        for (const auto& f : train_labels) files.push_back(f.c_str());
        const bsg_status st = bsg_cmd_train(train_root.c_str(), files.data(), files.size(),
                                            cfg.get(), train_out.c_str());
        if (st != BSG_OK) return runtime_fail(st, "train");
        std::printf("wrote classifier to %s\n", train_out.c_str());
        return 0;
    }

    if (predict->parsed()) {
        ConfigPtr cfg;
        if (int code = build_config(predict_cfg, cfg)) return code;
        const bsg_status st = bsg_cmd_predict(predict_model.c_str(), predict_run.c_str(),
                                              cfg.get(), predict_out.c_str());
        if (st != BSG_OK) return runtime_fail(st, "predict");
        std::printf("wrote posteriors to %s\n", predict_out.c_str());
        return 0;
    }

    if (evaluate->parsed()) {
        ConfigPtr cfg;
        if (int code = build_config(eval_cfg, cfg)) return code;
        if (!eval_jobs.empty() &&
            bsg_config_set(cfg.get(), "pipeline.jobs", eval_jobs.c_str()) != BSG_OK) {
            std::fprintf(stderr, "error: --jobs: %s\n", bsg_last_error());
            return 2;
        }
        std::vector<const char*> files;
        files.reserve(eval_labels.size());
        for (const auto& f : eval_labels) files.push_back(f.c_str());
        const bsg_status st = bsg_cmd_evaluate(eval_model.c_str(), eval_root.c_str(), files.data(),
                                               files.size(), cfg.get(), eval_out.c_str());
        if (st != BSG_OK) return runtime_fail(st, "evaluate");
        std::printf("wrote report to %s\n", eval_out.c_str());
        return 0;
    }

    return 2;
}
