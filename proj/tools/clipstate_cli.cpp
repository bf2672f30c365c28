// clipstate: build, evaluate and deploy prompt-ensemble state recognizers.

#include "clipstate/embedder_client.hpp"
#include "clipstate/errors.hpp"
#include "clipstate/io.hpp"
#include "clipstate/optimizer.hpp"
#include "clipstate/suite.hpp"
#include "clipstate/synth.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace clipstate;

namespace {

struct GaFlags {
    int pop = 300;
    int gens = 300;
    std::uint64_t seed = 0;
    int workers = 1;
    double alpha2 = 1.0;
    double alpha3 = 0.00001;

    void add(CLI::App* cmd) {
        cmd->add_option("--pop", pop, "GA population size")->capture_default_str();
        cmd->add_option("--gens", gens, "GA generations")->capture_default_str();
        cmd->add_option("--seed", seed, "RNG seed")->capture_default_str();
        cmd->add_option("--workers", workers, "fitness evaluation threads")->capture_default_str();
        cmd->add_option("--alpha2", alpha2, "E2 margin coefficient")->capture_default_str();
        cmd->add_option("--alpha3", alpha3, "E3 margin/spread coefficient")->capture_default_str();
    }

    GaConfig ga() const {
        GaConfig g;
        g.population_size = pop;
        g.generations = gens;
        g.rng_seed = seed;
        g.workers = workers;
        return g;
    }

    ObjectiveConfig objective(ObjectiveKind kind) const {
        ObjectiveConfig c;
        c.kind = kind;
        c.alpha2 = alpha2;
        c.alpha3 = alpha3;
        return c;
    }
};

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
    } else {
        io::write_file(out_path, text);
    }
}

PromptSet prompts_for(const Recognizer& r, const std::string& prompts_path, const std::string& embedder_url) {
    if (!prompts_path.empty()) {
        auto ps = io::load_prompts(prompts_path);
        check_prompt_consistency(r, ps);
        return ps;
    }
    if (!embedder_url.empty()) {
        const auto& pinned = r.embedded_prompts();
        auto vectors = embed_via_service({embedder_url}, r.prompt_texts, pinned.dim());
        std::vector<Prompt> prompts;
        for (std::size_t i = 0; i < vectors.size(); ++i) {
            prompts.push_back({r.prompt_texts[i], pinned[i].polarity, std::move(vectors[i])});
        }
        return PromptSet(pinned.dim(), std::move(prompts));
    }
    return r.embedded_prompts();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Prompt-ensemble binary state recognizers over joint image/text embeddings"};
    app.require_subcommand(1);

    // synth
    SynthConfig synth_cfg;
    std::string synth_dir = ".";
    auto* synth = app.add_subcommand("synth", "generate synthetic optimization/evaluation datasets and prompts");
    synth->add_option("--out-dir", synth_dir, "output directory")->capture_default_str();
    synth->add_option("--dim", synth_cfg.dim)->capture_default_str();
    synth->add_option("--n-opt", synth_cfg.n_per_class_opt, "items per class in d_opt")->capture_default_str();
    synth->add_option("--n-eval", synth_cfg.n_per_class_eval, "items per class in d_eval")->capture_default_str();
    synth->add_option("--prompts-per-polarity", synth_cfg.n_prompts_per_polarity)->capture_default_str();
    synth->add_option("--distractors", synth_cfg.n_distractor_prompts)->capture_default_str();
    synth->add_option("--image-noise", synth_cfg.image_noise)->capture_default_str();
    synth->add_option("--prompt-noise", synth_cfg.prompt_noise)->capture_default_str();
    synth->add_option("--seed", synth_cfg.rng_seed)->capture_default_str();

    // optimize
    GaFlags opt_flags;
    std::string opt_dataset, opt_prompts, opt_out, opt_objective = "e1", opt_method = "opt";
    auto* optimize = app.add_subcommand("optimize", "build a recognizer artifact from d_opt and prompts");
    optimize->add_option("--dataset", opt_dataset, "optimization dataset file")->required();
    optimize->add_option("--prompts", opt_prompts, "prompts file")->required();
    optimize->add_option("--out", opt_out, "recognizer output file")->required();
    optimize->add_option("--objective", opt_objective, "e1|e2|e3")
        ->check(CLI::IsMember({"e1", "e2", "e3", "E1", "E2", "E3"}))
        ->capture_default_str();
    optimize->add_option("--method", opt_method, "opt|all|one")
        ->check(CLI::IsMember({"opt", "all", "one"}))
        ->capture_default_str();
    opt_flags.add(optimize);

    // evaluate
    std::string eval_recognizer, eval_dataset, eval_prompts;
    auto* evaluate = app.add_subcommand("evaluate", "accuracy of a recognizer on a dataset");
    evaluate->add_option("recognizer", eval_recognizer)->required();
    evaluate->add_option("dataset", eval_dataset)->required();
    evaluate->add_option("--prompts", eval_prompts, "prompt file overriding the pinned embeddings");

    // experiment
    GaFlags exp_flags;
    std::string exp_opt, exp_eval, exp_prompts, exp_csv;
    auto* experiment = app.add_subcommand("experiment", "OPT-1/2/3, ALL and ONE on d_opt, scored on d_opt and d_eval");
    experiment->add_option("--opt", exp_opt, "optimization dataset")->required();
    experiment->add_option("--eval", exp_eval, "evaluation dataset")->required();
    experiment->add_option("--prompts", exp_prompts, "prompts file")->required();
    experiment->add_option("--csv", exp_csv, "also write the report as CSV");
    exp_flags.add(experiment);

    // recognize
    std::string rec_recognizer, rec_embedding, rec_embedding_file, rec_image, rec_url, rec_dataset, rec_id,
        rec_prompts;
    auto* recognize_cmd = app.add_subcommand("recognize", "classify one image embedding or image");
    recognize_cmd->add_option("recognizer", rec_recognizer)->required();
    auto* src_emb = recognize_cmd->add_option("--embedding", rec_embedding, "embedding as a JSON array");
    auto* src_file = recognize_cmd->add_option("--embedding-file", rec_embedding_file, "file holding a JSON array");
    auto* src_img = recognize_cmd->add_option("--image", rec_image, "image file, embedded by the service");
    auto* src_ds = recognize_cmd->add_option("--dataset", rec_dataset, "dataset file (with --id)");
    recognize_cmd->add_option("--id", rec_id, "item id within --dataset")->needs(src_ds);
    recognize_cmd->add_option("--embedder-url", rec_url, "embedding service base URL");
    recognize_cmd->add_option("--prompts", rec_prompts, "prompt file overriding the pinned embeddings");
    src_emb->excludes(src_file, src_img, src_ds);
    src_file->excludes(src_img, src_ds);
    src_img->excludes(src_ds);

    // margins
    std::string mar_recognizer, mar_dataset, mar_prompts, mar_out;
    auto* margins = app.add_subcommand("margins", "per-item margins, sorted descending, as CSV");
    margins->add_option("recognizer", mar_recognizer)->required();
    margins->add_option("dataset", mar_dataset)->required();
    margins->add_option("--prompts", mar_prompts, "prompt file overriding the pinned embeddings");
    margins->add_option("--out", mar_out, "CSV output file (default stdout)");

    // variants
    std::string var_base;
    auto* variants = app.add_subcommand("variants", "article variants of a noun phrase");
    variants->add_option("base", var_base, "noun phrase without article")->required();

    // gridsearch
    std::string grid_dataset, grid_prompts, grid_objective = "e1";
    double grid_step = 0.1, grid_alpha2 = 1.0, grid_alpha3 = 0.00001;
    auto* grid = app.add_subcommand("gridsearch", "exhaustive weight lattice search (N_P <= 4)");
    grid->add_option("--dataset", grid_dataset)->required();
    grid->add_option("--prompts", grid_prompts)->required();
    grid->add_option("--objective", grid_objective)
        ->check(CLI::IsMember({"e1", "e2", "e3", "E1", "E2", "E3"}))
        ->capture_default_str();
    grid->add_option("--step", grid_step)->capture_default_str();
    grid->add_option("--alpha2", grid_alpha2)->capture_default_str();
    grid->add_option("--alpha3", grid_alpha3)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*synth) {
            const auto data = generate_synthetic(synth_cfg);
            fs::create_directories(synth_dir);
            io::save_dataset(fs::path(synth_dir) / "d_opt.json", data.d_opt);
            io::save_dataset(fs::path(synth_dir) / "d_eval.json", data.d_eval);
            io::save_prompts(fs::path(synth_dir) / "prompts.json", data.prompts);
            std::cout << fmt::format("wrote {} / {} items and {} prompts to {}\n", data.d_opt.size(),
                                     data.d_eval.size(), data.prompts.size(), synth_dir);
        } else if (*optimize) {
            const auto d = io::load_dataset(opt_dataset);
            const auto ps = io::load_prompts(opt_prompts);
            const auto m = similarity_matrix(d, ps);
            const auto labels = d.labels();
            const auto obj = opt_flags.objective(objective_kind_from_string(opt_objective));
            Recognizer r;
            if (opt_method == "all") {
                r = build_all_recognizer(ps, m, labels);
            } else if (opt_method == "one") {
                r = build_one_recognizer(ps, m, labels, obj);
            } else {
                r = build_opt_recognizer(ps, m, labels, obj, opt_flags.ga());
            }
            io::save_recognizer(opt_out, r);
            std::cout << fmt::format("{} recognizer: threshold {:.9g}, R_opt {}%\n", file_tag(r.kind), r.threshold,
                                     format_percent(evaluate_recognizer(r, d, ps)));
        } else if (*evaluate) {
            const auto r = io::load_recognizer(eval_recognizer);
            const auto d = io::load_dataset(eval_dataset);
            const auto ps = prompts_for(r, eval_prompts, "");
            const auto correct = count_correct(r, d, ps);
            std::cout << fmt::format("accuracy {}% ({}/{})\n", format_percent(evaluate_recognizer(r, d, ps)), correct,
                                     d.size());
        } else if (*experiment) {
            const auto d_opt = io::load_dataset(exp_opt);
            const auto d_eval = io::load_dataset(exp_eval);
            const auto ps = io::load_prompts(exp_prompts);
            const auto cfgs = standard_objectives(exp_flags.alpha2, exp_flags.alpha3);
            const auto res = run_experiment(d_opt, d_eval, ps, cfgs, exp_flags.ga());
            std::cout << render_table(res.report);
            if (!exp_csv.empty()) io::write_file(exp_csv, render_csv(res.report));
        } else if (*recognize_cmd) {
            const auto r = io::load_recognizer(rec_recognizer);
            std::optional<EmbeddingVector> image;
            std::string subject = "input";
            if (!rec_embedding.empty()) {
                image = io::embedding_from_string(rec_embedding);
            } else if (!rec_embedding_file.empty()) {
                image = io::embedding_from_string(io::read_file(rec_embedding_file));
            } else if (!rec_image.empty()) {
                if (rec_url.empty()) throw ValidationError("--image needs --embedder-url");
                image = embed_image_via_service({rec_url}, io::read_file(rec_image), r.embedded_prompts().dim());
                subject = rec_image;
            } else if (!rec_dataset.empty()) {
                if (rec_id.empty()) throw ValidationError("--dataset needs --id");
                const auto d = io::load_dataset(rec_dataset);
                for (const auto& item : d.items()) {
                    if (item.id == rec_id) image = item.embedding;
                }
                if (!image) throw ValidationError(fmt::format("no item '{}' in {}", rec_id, rec_dataset));
                subject = rec_id;
            } else {
                throw ValidationError("recognize needs one of --embedding, --embedding-file, --image, --dataset");
            }
            const auto ps = prompts_for(r, rec_prompts, rec_image.empty() ? "" : rec_url);
            if (image->dim() != ps.dim()) {
                throw ValidationError(fmt::format("embedding dim {} != prompt dim {}", image->dim(), ps.dim()));
            }
            const auto decision = recognize(r, *image, ps);
            std::cout << fmt::format("{},{},{:.9g}\n", subject, sign(decision.label), decision.margin);
        } else if (*margins) {
            const auto r = io::load_recognizer(mar_recognizer);
            const auto d = io::load_dataset(mar_dataset);
            const auto ps = prompts_for(r, mar_prompts, "");
            emit(render_margin_csv(margin_report(r, d, ps)), mar_out);
        } else if (*variants) {
            for (const auto& v : expand_prompt_variants(var_base)) std::cout << v << '\n';
        } else if (*grid) {
            const auto d = io::load_dataset(grid_dataset);
            const auto ps = io::load_prompts(grid_prompts);
            ObjectiveConfig cfg;
            cfg.kind = objective_kind_from_string(grid_objective);
            cfg.alpha2 = grid_alpha2;
            cfg.alpha3 = grid_alpha3;
            const auto labels = d.labels();
            const auto res = grid_search_oracle(similarity_matrix(d, ps), labels, cfg, grid_step);
            std::string w;
            for (double x : res.weights.values()) w += fmt::format("{}{:.9g}", w.empty() ? "" : ",", x);
            std::cout << fmt::format("weights [{}]\nfitness {:.9g}\ne1 {}\nthreshold {:.9g}\nevaluations {}\n", w,
                                     res.objective.fitness, res.objective.e1, res.objective.threshold,
                                     res.evaluations);
        }
    } catch (const TransportError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
