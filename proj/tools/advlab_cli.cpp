// advlab command-line interface.
//
// Exit codes: 0 success, 2 parameter error, 3 I/O or format error,
// 4 numeric error.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>

#include "advlab/attack.hpp"
#include "advlab/classifier.hpp"
#include "advlab/error.hpp"
#include "advlab/filters.hpp"
#include "advlab/harness.hpp"
#include "advlab/image_io.hpp"

namespace {

constexpr int kExitParameter = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumeric = 4;

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::stringstream in(text);
    std::string part;
    while (std::getline(in, part, sep)) {
        if (!part.empty()) parts.push_back(part);
    }
    return parts;
}

// "0.1" applies to every norm; "l1=2,l2=1,linf=0.05" sets them individually.
std::map<advlab::NormKind, double> parse_budgets(const std::string& text,
                                                 const std::vector<advlab::NormKind>& norms) {
    std::map<advlab::NormKind, double> out;
    try {
        if (text.find('=') == std::string::npos) {
            std::size_t used = 0;
            const double beta = std::stod(text, &used);
            if (used != text.size()) throw std::invalid_argument(text);
            for (auto n : norms) out[n] = beta;
            return out;
        }
        for (const auto& item : split(text, ',')) {
            const auto eq = item.find('=');
            if (eq == std::string::npos) throw std::invalid_argument(item);
            out[advlab::parse_norm_kind(item.substr(0, eq))] = std::stod(item.substr(eq + 1));
        }
    } catch (const advlab::ParameterError&) {
        throw;
    } catch (const std::logic_error&) {
        throw advlab::ParameterError("--beta must be a number or a list like l1=2,l2=1,linf=0.05, got " + text);
    }
    return out;
}

void print_probabilities(const advlab::Prediction& pred, std::size_t y_true, std::size_t y_adv) {
    std::printf("p_true=%.6f\np_adv=%.6f\nargmax=%zu\nargmax_probability=%.6f\n",
                pred.probabilities[y_true], pred.probabilities[y_adv], pred.argmax_label,
                pred.argmax_probability);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Norm-constrained targeted attacks and image-filter defenses"};
    app.require_subcommand(1);

    // train
    auto* train_cmd = app.add_subcommand("train", "Train the default CNN classifier");
    std::string train_data, train_out;
    advlab::TrainOptions train_opts;
    train_cmd->add_option("--data", train_data, "IMAGES.idx,LABELS.idx or synthetic:SEED:COUNT")->required();
    train_cmd->add_option("--out", train_out, "Model output path")->required();
    train_cmd->add_option("--epochs", train_opts.epochs, "Training epochs")->default_val(20);
    train_cmd->add_option("--batch", train_opts.batch_size, "Minibatch size")->default_val(32);
    train_cmd->add_option("--lr", train_opts.learning_rate, "SGD learning rate")->default_val(0.05);
    train_cmd->add_option("--seed", train_opts.seed, "Init and shuffle seed")->default_val(1);

    // attack
    auto* attack_cmd = app.add_subcommand("attack", "Craft a targeted adversarial image");
    std::string attack_model, attack_image, attack_out, attack_norm;
    advlab::AttackConfig attack_cfg;
    attack_cmd->add_option("--model", attack_model)->required();
    attack_cmd->add_option("--image", attack_image, "Input PPM/PGM")->required();
    attack_cmd->add_option("--target", attack_cfg.target_label, "Target class id")->required();
    attack_cmd->add_option("--norm", attack_norm)->required()->check(CLI::IsMember({"l1", "l2", "linf"}));
    attack_cmd->add_option("--beta", attack_cfg.beta, "Perturbation budget in [0,1] pixel units")->required();
    attack_cmd->add_option("--lr", attack_cfg.learning_rate)->default_val(0.01);
    attack_cmd->add_option("--iters", attack_cfg.max_iterations)->default_val(500);
    attack_cmd->add_option("--out", attack_out, "Output PPM/PGM")->required();

    // defend
    auto* defend_cmd = app.add_subcommand("defend", "Apply an image filter");
    std::string defend_image, defend_filter, defend_out;
    std::size_t defend_kernel = 3;
    double defend_sigma = 0.0;
    defend_cmd->add_option("--image", defend_image)->required();
    defend_cmd->add_option("--filter", defend_filter)->required()->check(CLI::IsMember({"gaussian", "median"}));
    defend_cmd->add_option("--kernel", defend_kernel)->required()->check(CLI::IsMember({3, 5}));
    defend_cmd->add_option("--sigma", defend_sigma, "Gaussian sigma (default 0.8 for 3, 1.1 for 5)");
    defend_cmd->add_option("--out", defend_out)->required();

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "Print p_true, p_adv and argmax for one image");
    std::string eval_model, eval_image;
    std::size_t eval_true = 0, eval_adv = 0;
    eval_cmd->add_option("--model", eval_model)->required();
    eval_cmd->add_option("--image", eval_image)->required();
    eval_cmd->add_option("--true", eval_true)->required();
    eval_cmd->add_option("--adv", eval_adv)->required();

    // experiment
    auto* exp_cmd = app.add_subcommand("experiment", "Run the attack x filter grid and write CSV reports");
    std::string exp_model, exp_data, exp_norms = "l1,l2,linf", exp_beta,
                exp_filters = "gaussian3,gaussian5,median3,median5", exp_records, exp_summary;
    advlab::ExperimentOptions exp_opts;
    std::optional<std::size_t> exp_target;
    exp_cmd->add_option("--model", exp_model)->required();
    exp_cmd->add_option("--data", exp_data, "IMAGES.idx,LABELS.idx or synthetic:SEED:COUNT")->required();
    exp_cmd->add_option("--norms", exp_norms, "Comma-separated subset of l1,l2,linf")->default_val(exp_norms);
    exp_cmd->add_option("--beta", exp_beta, "Budget for all norms, or l1=F,l2=F,linf=F")->required();
    exp_cmd->add_option("--lr", exp_opts.learning_rate)->default_val(0.01);
    exp_cmd->add_option("--iters", exp_opts.max_iterations)->default_val(500);
    exp_cmd->add_option("--filters", exp_filters, "Comma-separated filters; 'none' is always included")
        ->default_val(exp_filters);
    exp_cmd->add_option("--samples", exp_opts.samples)->default_val(50);
    exp_cmd->add_option("--seed", exp_opts.seed)->default_val(1);
    exp_cmd->add_option("--target", exp_target, "Use one fixed target class for every image");
    exp_cmd->add_option("--threads", exp_opts.threads, "Worker threads (0 = all cores)")->default_val(0);
    exp_cmd->add_option("--out-records", exp_records)->required();
    exp_cmd->add_option("--out-summary", exp_summary)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitParameter;
    }

    try {
        if (*train_cmd) {
            const advlab::LabeledDataset data = advlab::load_data(advlab::parse_data_source(train_data));
            const advlab::Classifier init =
                advlab::make_default_classifier(data.image_shape(), data.num_classes(), train_opts.seed);
            train_opts.on_epoch = [](std::size_t epoch, double mean_loss) {
                std::printf("epoch %zu loss %.6f\n", epoch + 1, mean_loss);
            };
            const advlab::Classifier model = advlab::train(init, data, train_opts);
            std::printf("train_accuracy=%.4f\n", advlab::accuracy(model, data));
            advlab::save_model(model, train_out);
        } else if (*attack_cmd) {
            attack_cfg.norm_kind = advlab::parse_norm_kind(attack_norm);
            const advlab::Classifier model = advlab::load_model(attack_model);
            const advlab::Image x = advlab::load_image(attack_image);
            const advlab::AttackResult result = advlab::craft(model, x, attack_cfg);
            advlab::save_image(result.adversarial, attack_out);
            std::printf("success=%d\niterations=%zu\nperturbation_norm=%.6f\ntarget_probability=%.6f\n",
                        result.success ? 1 : 0, result.iterations_used, result.final_perturbation_norm,
                        result.final_target_probability);
        } else if (*defend_cmd) {
            const advlab::FilterSpec spec = defend_filter == "gaussian"
                                                ? advlab::FilterSpec::gaussian(defend_kernel, defend_sigma)
                                                : advlab::FilterSpec::median(defend_kernel);
            advlab::save_image(advlab::apply_filter(advlab::load_image(defend_image), spec), defend_out);
        } else if (*eval_cmd) {
            const advlab::Classifier model = advlab::load_model(eval_model);
            const advlab::Image x = advlab::load_image(eval_image);
            if (eval_true >= model.num_classes() || eval_adv >= model.num_classes()) {
                throw advlab::ParameterError("class id out of range for " +
                                             std::to_string(model.num_classes()) + " classes");
            }
            print_probabilities(advlab::forward(model, x), eval_true, eval_adv);
        } else if (*exp_cmd) {
            advlab::ExperimentConfig cfg;
            cfg.model_path = exp_model;
            cfg.data = advlab::parse_data_source(exp_data);
            cfg.records_path = exp_records;
            cfg.summary_path = exp_summary;
            exp_opts.norms.clear();
            for (const auto& name : split(exp_norms, ',')) exp_opts.norms.push_back(advlab::parse_norm_kind(name));
            exp_opts.beta = parse_budgets(exp_beta, exp_opts.norms);
            exp_opts.filters = {advlab::FilterSpec::identity()};
            for (const auto& name : split(exp_filters, ',')) {
                if (name != "none") exp_opts.filters.push_back(advlab::parse_filter(name));
            }
            exp_opts.fixed_target = exp_target;
            cfg.options = exp_opts;
            const auto records = advlab::run_experiment(cfg);
            std::cout << advlab::format_summary(advlab::summarize(records));
        }
    } catch (const advlab::ParameterError& e) {
        std::cerr << "parameter error: " << e.what() << "\n";
        return kExitParameter;
    } catch (const advlab::IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kExitIo;
    } catch (const advlab::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return 0;
}
