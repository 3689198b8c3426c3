#include "cplda/cli.hpp"

#include <algorithm>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "cplda/classify.hpp"
#include "cplda/discriminant.hpp"
#include "cplda/error.hpp"

namespace cplda {

namespace {

struct Fitted {
    DiscriminantEstimate est;
    WarmStart warm;
    FitReport report;
};

Fitted fit_pipeline(std::span<const DenseTensor> class1, std::span<const DenseTensor> class2, std::size_t rank,
                    InitConfig init, const RefineOptions& refine, std::optional<double> ridge) {
    Fitted f;
    f.est = sample_discriminant(class1, class2, ridge);
    init.rank = rank;
    Rng rng(init.seed);
    f.warm = rcpca(f.est.b_hat, init, rng);
    f.report = distip_cp(f.est.b_hat, f.warm.factors, refine);
    return f;
}

template <class T>
void read_if(const Json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

void apply_solver_json(const Json& j, InitConfig& init, RefineOptions& refine) {
    read_if(j, "c0", init.c0);
    read_if(j, "nu", init.nu);
    read_if(j, "projections", init.projections);
    read_if(j, "split", init.split);
    read_if(j, "tolerance", refine.tolerance);
    read_if(j, "max_iterations", refine.max_iterations);
}

std::optional<double> ridge_from_json(const Json& j) {
    if (j.contains("ridge") && !j.at("ridge").is_null()) return j.at("ridge").get<double>();
    return std::nullopt;
}

fs::path required_path(const Json& j, const char* key, const char* flag) {
    if (!j.contains(key) || !j.at(key).is_string() || j.at(key).get<std::string>().empty())
        throw InvalidArgument(std::string("missing ") + flag + " (config key \"" + key + "\")");
    return j.at(key).get<std::string>();
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
}

std::vector<std::size_t> pick_holdout(std::size_t n, std::size_t k, Rng& rng) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.next_u64() % (n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

void split_class(const std::vector<DenseTensor>& all, const std::vector<std::size_t>& held,
                 std::vector<DenseTensor>& train, std::vector<DenseTensor>& test) {
    std::size_t h = 0;
    for (std::size_t i = 0; i < all.size(); ++i) {
        if (h < held.size() && held[h] == i) {
            test.push_back(all[i]);
            ++h;
        } else {
            train.push_back(all[i]);
        }
    }
}

int cmd_simulate(const Json& cfg) {
    const fs::path out = required_path(cfg, "out", "--out");
    Scenario scn = scenario_from_json(cfg);
    if (!cfg.contains("n_test")) scn.n_test = 0;
    scn.validate();

    Rng rng(scn.seed);
    const ScenarioTruth truth = make_scenario_params(scn, rng);
    const TensorNormalSampler class1(truth.params.mean1, truth.params.covs);
    const TensorNormalSampler class2(truth.params.mean2, truth.params.covs);

    auto draw_set = [&](std::size_t n1, std::size_t n2) {
        Dataset data;
        for (std::size_t i = 0; i < n1; ++i) {
            data.samples.push_back(class1.draw(rng));
            data.labels.push_back(1);
        }
        for (std::size_t i = 0; i < n2; ++i) {
            data.samples.push_back(class2.draw(rng));
            data.labels.push_back(2);
        }
        return data;
    };

    ensure_dir(out);
    save_dataset(out, draw_set(scn.n1, scn.n2));
    if (scn.n_test > 0) save_dataset(out / "test", draw_set(scn.n_test, scn.n_test));

    Json truth_json;
    truth_json["model"] = to_json(truth.model);
    truth_json["scenario"] = scenario_to_json(scn);
    truth_json["snr"] = snr(truth.b, truth.params.mean2 - truth.params.mean1);
    truth_json["bayes_error"] = bayes_error(truth_json["snr"].get<double>(), 0.5, 0.5);
    write_json(out / "truth.json", truth_json);
    std::cout << "wrote " << scn.n1 + scn.n2 << " training samples";
    if (scn.n_test > 0) std::cout << " and " << 2 * scn.n_test << " test samples";
    std::cout << " to " << out.string() << '\n';
    return kExitOk;
}

int cmd_fit(const Json& cfg) {
    const fs::path data_dir = required_path(cfg, "data", "--data");
    const fs::path out = required_path(cfg, "out", "--out");
    const Dataset data = load_dataset(data_dir);
    const auto class1 = data.class_samples(1);
    const auto class2 = data.class_samples(2);

    InitConfig init;
    RefineOptions refine;
    apply_solver_json(cfg, init, refine);
    init.seed = cfg.value("seed", std::uint64_t{0});
    const auto ridge = ridge_from_json(cfg);

    Json summary;
    std::size_t rank = 0;
    const bool has_rank = cfg.contains("rank") && !cfg.at("rank").is_null();
    const bool has_cv = cfg.contains("cv_ranks") && !cfg.at("cv_ranks").empty();
    if (has_rank) {
        rank = cfg.at("rank").get<std::size_t>();
        if (rank < 1) throw InvalidArgument("--rank must be at least 1");
        summary["selection"] = "fixed";
    } else if (has_cv) {
        CvSettings cv;
        cv.ranks = cfg.at("cv_ranks").get<std::vector<std::size_t>>();
        read_if(cfg, "cv_folds", cv.folds);
        read_if(cfg, "cv_holdout_per_class", cv.holdout_per_class);
        cv.seed = init.seed;
        cv.init = init;
        cv.refine = refine;
        cv.ridge = ridge;
        const CvResult res = cv_select_rank(class1, class2, cv);
        rank = res.chosen_rank;
        summary["selection"] = "cv";
        Json rows = Json::array();
        for (std::size_t k = 0; k < cv.ranks.size(); ++k)
            rows.push_back({{"rank", cv.ranks[k]}, {"mean_error", res.mean_error[k]},
                            {"failed_folds", res.failed_folds[k]}});
        summary["cv"] = std::move(rows);
        summary["cv_folds"] = cv.folds;
    } else {
        throw InvalidArgument("fit needs --rank or --cv-ranks");
    }

    const Fitted f = fit_pipeline(class1, class2, rank, init, refine, ridge);
    ensure_dir(out);
    write_json(out / "model.json", to_json(f.report.model));
    write_json(out / "warm_start.json", to_json(f.warm));
    save_discriminant(out / "discriminant", f.est);
    {
        auto os = open_output(out / "fit_report.csv");
        write_fit_report_csv(os, f.report);
    }
    summary["rank"] = rank;
    summary["iterations"] = f.report.iterations_run;
    summary["converged"] = f.report.converged;
    summary["n1"] = class1.size();
    summary["n2"] = class2.size();
    write_json(out / "fit.json", summary);
    std::cout << "rank " << rank << ", " << f.report.iterations_run << " iterations"
              << (f.report.converged ? "" : " (not converged)") << ", written to " << out.string() << '\n';
    return kExitOk;
}

int cmd_classify(const Json& cfg) {
    const fs::path model_dir = required_path(cfg, "model", "--model");
    const fs::path data_dir = required_path(cfg, "data", "--data");
    const fs::path out = required_path(cfg, "out", "--out");
    const CpModel model = cp_model_from_json(read_json(model_dir / "model.json"));
    const DiscriminantEstimate est = load_discriminant(model_dir / "discriminant");
    const Dataset data = load_dataset(data_dir);
    const CpLdaRule rule = CpLdaRule::make(cp_compose(model), est.mean1, est.mean2, est.prior1, est.prior2);

    std::vector<double> stats;
    std::vector<int> labels;
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < data.samples.size(); ++i) {
        stats.push_back(rule.statistic(data.samples[i]));
        labels.push_back(stats.back() >= 0.0 ? 2 : 1);
        wrong += labels.back() != data.labels[i] ? 1 : 0;
    }
    const fs::path csv = out.extension() == ".csv" ? out : out / "predictions.csv";
    auto os = open_output(csv);
    write_predictions_csv(os, stats, labels);
    std::cout << "error rate " << static_cast<double>(wrong) / static_cast<double>(labels.size()) << " over "
              << labels.size() << " samples, predictions in " << csv.string() << '\n';
    return kExitOk;
}

int cmd_bench(const Json& cfg, bool list_only) {
    if (list_only) {
        for (const auto& name : preset_names()) std::cout << name << '\n';
        return kExitOk;
    }
    std::vector<Scenario> scenarios;
    if (cfg.contains("preset")) {
        std::vector<std::string> names;
        if (cfg.at("preset").is_array()) {
            names = cfg.at("preset").get<std::vector<std::string>>();
        } else {
            std::stringstream ss(cfg.at("preset").get<std::string>());
            for (std::string s; std::getline(ss, s, ',');)
                if (!s.empty()) names.push_back(s);
        }
        for (const auto& name : names) scenarios.push_back(scenario_from_json(cfg, preset(name)));
    } else {
        scenarios.push_back(scenario_from_json(cfg));
    }

    BenchOptions opts;
    opts.record_timing = cfg.value("timing", true);
    read_if(cfg, "threads", opts.threads);
    const fs::path out = cfg.contains("out") ? fs::path(cfg.at("out").get<std::string>()) : fs::path();
    std::ostringstream csv;
    write_bench_csv_header(csv);
    for (const auto& scn : scenarios) {
        std::cerr << "running " << scn.id << " (" << scn.replications << " replications)\n";
        const ScenarioSummary s = run_scenario(scn, opts);
        write_bench_csv_rows(csv, s);
        for (const auto& r : s.replications)
            if (!r.ok) std::cerr << "  replication failed: " << r.error << '\n';
    }
    if (out.empty()) {
        std::cout << csv.str();
    } else {
        const fs::path file = out.extension() == ".csv" ? out : out / "bench.csv";
        auto os = open_output(file);
        os << csv.str();
        if (!os) throw IoError("write failed: " + file.string());
        std::cout << "wrote " << file.string() << '\n';
    }
    return kExitOk;
}

} // namespace

Scenario scenario_from_json(const Json& j, Scenario base) {
    try {
        Scenario s = std::move(base);
        read_if(j, "id", s.id);
        read_if(j, "dims", s.dims);
        if (j.contains("rank") && !j.at("rank").is_null()) s.rank = j.at("rank").get<std::size_t>();
        if (j.contains("n")) s.n1 = s.n2 = j.at("n").get<std::size_t>();
        read_if(j, "n1", s.n1);
        read_if(j, "n2", s.n2);
        read_if(j, "n_test", s.n_test);
        if (j.contains("schedule")) s.schedule = parse_weight_schedule(j.at("schedule").get<std::string>());
        read_if(j, "w_max", s.w_max);
        read_if(j, "ratio", s.ratio);
        if (j.contains("basis")) s.basis = parse_basis_kind(j.at("basis").get<std::string>());
        read_if(j, "delta", s.delta);
        if (j.contains("theta_rule")) s.theta_rule = parse_theta_rule(j.at("theta_rule").get<std::string>());
        if (j.contains("cov")) s.cov = parse_cov_kind(j.at("cov").get<std::string>());
        read_if(j, "replications", s.replications);
        read_if(j, "seed", s.seed);
        apply_solver_json(j, s.init, s.refine);
        return s;
    } catch (const Json::exception& e) {
        throw InvalidArgument(std::string("config: ") + e.what());
    }
}

Json scenario_to_json(const Scenario& s) {
    return {{"id", s.id},
            {"dims", s.dims},
            {"rank", s.rank},
            {"n1", s.n1},
            {"n2", s.n2},
            {"n_test", s.n_test},
            {"schedule", to_string(s.schedule)},
            {"w_max", s.w_max},
            {"ratio", s.ratio},
            {"basis", to_string(s.basis)},
            {"delta", s.delta},
            {"theta_rule", to_string(s.theta_rule)},
            {"cov", to_string(s.cov)},
            {"replications", s.replications},
            {"seed", s.seed}};
}

CvResult cv_select_rank(const std::vector<DenseTensor>& class1, const std::vector<DenseTensor>& class2,
                        const CvSettings& cv) {
    if (cv.ranks.empty()) throw InvalidArgument("cv: empty candidate rank list");
    for (std::size_t r : cv.ranks)
        if (r < 1) throw InvalidArgument("cv: candidate ranks must be at least 1");
    if (cv.folds < 1) throw InvalidArgument("cv: need at least one fold");
    const std::size_t k = cv.holdout_per_class;
    if (class1.size() < k + 2 || class2.size() < k + 2)
        throw InvalidArgument("cv: each class needs at least " + std::to_string(k + 2) + " samples");

    CvResult res;
    res.mean_error.assign(cv.ranks.size(), 0.0);
    res.failed_folds.assign(cv.ranks.size(), 0);
    for (std::size_t fold = 0; fold < cv.folds; ++fold) {
        Rng rng = Rng::substream(cv.seed, fold);
        std::vector<DenseTensor> train1, train2, test1, test2;
        split_class(class1, pick_holdout(class1.size(), k, rng), train1, test1);
        split_class(class2, pick_holdout(class2.size(), k, rng), train2, test2);
        const DiscriminantEstimate est = sample_discriminant(train1, train2, cv.ridge);
        for (std::size_t c = 0; c < cv.ranks.size(); ++c) {
            double err = 1.0;
            try {
                InitConfig init = cv.init;
                init.rank = cv.ranks[c];
                Rng init_rng(init.seed);
                const WarmStart warm = rcpca(est.b_hat, init, init_rng);
                const FitReport fit = distip_cp(est.b_hat, warm.factors, cv.refine);
                const CpLdaRule rule =
                    CpLdaRule::make(cp_compose(fit.model), est.mean1, est.mean2, est.prior1, est.prior2);
                err = misclassification_rate(rule, test1, test2);
            } catch (const Error&) {
                ++res.failed_folds[c];
            }
            res.mean_error[c] += err / static_cast<double>(cv.folds);
        }
    }
    std::size_t best = 0;
    for (std::size_t c = 1; c < cv.ranks.size(); ++c) {
        const bool lower = res.mean_error[c] < res.mean_error[best];
        const bool tie_smaller = res.mean_error[c] == res.mean_error[best] && cv.ranks[c] < cv.ranks[best];
        if (lower || tie_smaller) best = c;
    }
    res.chosen_rank = cv.ranks[best];
    return res;
}

int run_cli(int argc, char** argv) {
    CLI::App app{"CP low-rank discriminant analysis for tensor data"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::optional<std::size_t> reps;
    std::vector<std::string> presets;
    std::optional<std::size_t> rank;
    std::vector<std::size_t> cv_ranks;
    std::string data_dir;
    std::string model_dir;
    bool full = false;
    bool no_timing = false;
    bool list_presets = false;

    app.add_option("--config", config_path, "JSON config; flags override its top-level fields");
    app.add_option("--seed", seed, "base random seed");
    app.add_option("--out", out, "output directory or file");
    app.add_option("--reps", reps, "bench replications per scenario");
    app.add_option("--preset", presets, "bench preset name(s)")->delimiter(',');
    app.add_option("--rank", rank, "CP rank");
    app.add_option("--cv-ranks", cv_ranks, "candidate ranks for cross-validation, e.g. 1,2,3")->delimiter(',');

    auto* sim = app.add_subcommand("simulate", "sample a labelled dataset from a scenario");
    auto* fit = app.add_subcommand("fit", "estimate the discriminant and its CP decomposition");
    fit->add_option("--data", data_dir, "dataset directory");
    auto* cls = app.add_subcommand("classify", "label samples with a fitted model");
    cls->add_option("--data", data_dir, "dataset directory");
    cls->add_option("--model", model_dir, "model directory written by fit");
    auto* bench = app.add_subcommand("bench", "Monte-Carlo simulation tables");
    bench->add_flag("--full", full, "use 50 replications");
    bench->add_flag("--no-timing", no_timing, "write zero timings so output is bit-reproducible");
    bench->add_flag("--list-presets", list_presets, "print preset names and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        if (rc == 0) return kExitOk;
        std::cerr << app.help();
        return kExitUsage;
    }

    try {
        Json cfg = config_path.empty() ? Json::object() : read_json(config_path);
        if (!cfg.is_object()) throw InvalidArgument("config must be a JSON object");
        if (seed) cfg["seed"] = *seed;
        if (!out.empty()) cfg["out"] = out;
        if (reps) cfg["replications"] = *reps;
        if (full) cfg["replications"] = 50;
        if (!presets.empty()) cfg["preset"] = presets;
        if (rank) cfg["rank"] = *rank;
        if (!cv_ranks.empty()) cfg["cv_ranks"] = cv_ranks;
        if (!data_dir.empty()) cfg["data"] = data_dir;
        if (!model_dir.empty()) cfg["model"] = model_dir;
        if (no_timing) cfg["timing"] = false;

        if (sim->parsed()) return cmd_simulate(cfg);
        if (fit->parsed()) return cmd_fit(cfg);
        if (cls->parsed()) return cmd_classify(cfg);
        return cmd_bench(cfg, list_presets);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Json::exception& e) {
        std::cerr << "error: config: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitCompute;
    }
}

} // namespace cplda
