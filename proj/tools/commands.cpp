// Copyright (C) 2026 The subjswap Authors
// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <sstream>

#include "json.hpp"
#include "subjswap/adapter.hpp"
#include "subjswap/analysis.hpp"
#include "subjswap/concept.hpp"
#include "subjswap/error.hpp"
#include "subjswap/persistence.hpp"
#include "subjswap/rng.hpp"
#include "subjswap/store.hpp"
#include "subjswap/toy_model.hpp"

namespace subjswap::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kCacheEnv = "SUBJSWAP_CACHE_DIR";

struct Session {
    GenerationConfig config;
    std::unique_ptr<NoisePredictor> backend;
    Tokenizer tokenizer;
    fs::path out;
};

GenerationConfig make_config(const CommonOptions& common) {
    GenerationConfig cfg;
    cfg.steps = common.steps;
    cfg.guidance = common.guidance;
    cfg.seed = common.seed;
    cfg.schedule = parse_schedule(common.schedule);
    cfg.layers = common.layers;
    cfg.swap_unconditional = common.swap_unconditional;
    if (common.bank_budget > 0)
        cfg.bank_memory_budget = common.bank_budget;
    if (const char* cache = std::getenv(kCacheEnv); cache && *cache)
        cfg.spill_directory = fs::path(cache) / ("bank-spill-" + std::to_string(::getpid()));
    return cfg.normalized();
}

Session open_session(const CommonOptions& common, bool create_out = true) {
    Session s;
    s.config = make_config(common);
    ToyModelSpec spec;
    spec.timesteps = s.config.steps;
    spec.seed = common.model_seed;
    s.backend = make_backend(common.backend, spec);
    s.tokenizer = Tokenizer(s.backend->vocab_size(), s.backend->text_length());
    s.config.latent_shape = s.backend->latent_shape();
    s.out = common.out;
    if (create_out) {
        std::error_code ec;
        fs::create_directories(s.out, ec);
        require(!ec, ErrorKind::io, "cannot create output directory " + s.out.string() + ": " + ec.message());
    }
    return s;
}

std::string default_subject(const std::string& prompt) {
    const auto words = Tokenizer::split(prompt);
    require(!words.empty(), ErrorKind::validation, "prompt is empty");
    return words.back();
}

json config_json(const Session& s, const CommonOptions& common) {
    return json{{"steps", s.config.steps},
                {"guidance", s.config.guidance},
                {"seed", s.config.seed},
                {"schedule", s.config.schedule.to_string()},
                {"backend", common.backend},
                {"model_seed", common.model_seed},
                {"swap_unconditional", s.config.swap_unconditional},
                {"layers", s.config.layers}};
}

void write_json(const fs::path& path, const json& value) { write_text_atomic(path, value.dump(2) + "\n"); }

json read_json(const fs::path& path) {
    const auto bytes = read_file(path);
    try {
        return json::parse(bytes.begin(), bytes.end());
    } catch (const json::exception& e) {
        fail(ErrorKind::corruption, path.string() + ": " + e.what());
    }
}

void write_image(const Session& s, const fs::path& path, const LatentGrid& z) {
    write_png(path, s.backend->decode_image(z));
}

void apply_concept(Session& s, const std::string& concept_dir) {
    if (concept_dir.empty())
        return;
    const ConceptEmbedding concept_embedding = load_concept(concept_dir);
    require(s.tokenizer.token_id(concept_embedding.word) == concept_embedding.token, ErrorKind::vocabulary,
            "concept " + concept_embedding.word + " does not map to its stored token id");
    s.backend->set_token_embedding(concept_embedding.token, concept_embedding.embedding);
}

// gen -------------------------------------------------------------------

struct GenOptions {
    std::string prompt;
    std::string subject;
    std::string concept_dir;
};

void cmd_gen(const CommonOptions& common, const GenOptions& opt) {
    Session s = open_session(common);
    apply_concept(s, opt.concept_dir);
    const std::string subject = opt.subject.empty() ? default_subject(opt.prompt) : opt.subject;
    const PromptSpec prompt = s.tokenizer.prompt(opt.prompt, subject);
    const LatentGrid z_T = gaussian_latent(s.backend->latent_shape(), s.config.seed);

    CaptureResult result = generate_with_capture(z_T, prompt, s.config, *s.backend);
    save_latent(z_T, s.out / "z_T");
    save_latent(result.trajectory.final(), s.out / "z_0");
    save_bank(result.bank, s.out / "bank");
    write_image(s, s.out / "image.png", result.trajectory.final());

    json run = config_json(s, common);
    run["command"] = "gen";
    run["prompt"] = opt.prompt;
    run["subject"] = subject;
    run["bank_records"] = result.bank.size();
    write_json(s.out / "run.json", run);
    std::printf("gen: wrote %s (bank %zu records over %d steps)\n", (s.out / "image.png").c_str(),
                result.bank.size(), result.bank.window());
}

// invert ----------------------------------------------------------------

struct InvertOptions {
    std::string image;
    std::string latent;
    std::string prompt;
    std::string subject;
    int null_iterations = 10;
    double null_lr = 1e-2;
};

void cmd_invert(const CommonOptions& common, const InvertOptions& opt) {
    require(opt.image.empty() != opt.latent.empty(), ErrorKind::validation, "give exactly one of --image, --latent");
    Session s = open_session(common);
    const std::string subject = opt.subject.empty() ? default_subject(opt.prompt) : opt.subject;
    const PromptSpec prompt = s.tokenizer.prompt(opt.prompt, subject);
    const LatentGrid z_0 = opt.image.empty() ? load_latent(opt.latent) : s.backend->encode_image(read_png(opt.image));

    const Embedding cond = s.backend->encode_text(prompt.tokens);
    const Trajectory inversion = ddim_invert(z_0, cond, *s.backend, s.backend->schedule());
    NullTextOptions nt;
    nt.iterations = opt.null_iterations;
    nt.learning_rate = opt.null_lr;
    nt.guidance = s.config.guidance;
    const NullTextResult optimized =
        optimize_null_text(inversion, cond, null_text_embedding(*s.backend), *s.backend, s.backend->schedule(), nt);

    CaptureResult source = generate_with_capture(inversion.final(), prompt, s.config, *s.backend, &optimized.bank);
    const double rel = relative_error(source.trajectory.final(), z_0);

    save_latent(inversion.final(), s.out / "z_T");
    save_latent(z_0, s.out / "z_0_input");
    save_latent(source.trajectory.final(), s.out / "z_0");
    save_trajectory(inversion, s.out / "inversion");
    save_null_bank(optimized.bank, s.out / "null_text");
    save_bank(source.bank, s.out / "bank");
    write_image(s, s.out / "image.png", source.trajectory.final());

    json run = config_json(s, common);
    run["command"] = "invert";
    run["prompt"] = opt.prompt;
    run["subject"] = subject;
    run["null_iterations"] = opt.null_iterations;
    run["null_lr"] = opt.null_lr;
    run["reconstruction_relative_error"] = rel;
    write_json(s.out / "run.json", run);
    std::printf("invert: reconstruction relative error %.6e\n", rel);
}

// swap ------------------------------------------------------------------

struct SwapOptions {
    std::string source;
    std::string prompt;
    std::string subject;
    std::string target_prompt;
    std::string target_subject;
    std::string concept_word;
    std::string concept_dir;
    bool save_effective = false;
};

void cmd_swap(const CommonOptions& common, const SwapOptions& opt) {
    Session s = open_session(common);
    apply_concept(s, opt.concept_dir);

    std::string source_prompt = opt.prompt;
    std::string source_subject = opt.subject;
    LatentGrid z_T;
    std::optional<AttentionBank> bank;
    std::optional<NullTextBank> null_bank;
    if (!opt.source.empty()) {
        const fs::path dir = opt.source;
        const json run = read_json(dir / "run.json");
        if (source_prompt.empty()) {
            source_prompt = run.at("prompt").get<std::string>();
            source_subject = run.at("subject").get<std::string>();
        }
        z_T = load_latent(dir / "z_T");
        BankOptions bank_options{s.config.bank_memory_budget, s.config.spill_directory};
        bank = load_bank(dir / "bank", bank_options);
        if (fs::exists(dir / "null_text"))
            null_bank = load_null_bank(dir / "null_text");
    }
    require(!source_prompt.empty(), ErrorKind::validation, "swap needs --source or --prompt");
    if (source_subject.empty())
        source_subject = default_subject(source_prompt);
    const PromptSpec source = s.tokenizer.prompt(source_prompt, source_subject);

    PromptSpec target;
    if (!opt.target_prompt.empty()) {
        target = s.tokenizer.prompt(opt.target_prompt, opt.target_subject.empty()
                                                          ? default_subject(opt.target_prompt)
                                                          : opt.target_subject);
    } else if (!opt.concept_word.empty()) {
        target = build_target_prompt(source, s.tokenizer.encode(opt.concept_word));
    } else {
        target = source;
    }

    if (!bank) {
        z_T = gaussian_latent(s.backend->latent_shape(), s.config.seed);
        bank = generate_with_capture(z_T, source, s.config, *s.backend).bank;
    }

    AttentionBank effective;
    const Trajectory out = swap_subject(z_T, *bank, target, s.config, *s.backend, null_bank ? &*null_bank : nullptr,
                                     opt.save_effective ? &effective : nullptr);
    save_latent(out.final(), s.out / "z_0");
    write_image(s, s.out / "image.png", out.final());
    if (opt.save_effective)
        save_bank(effective, s.out / "effective_bank");

    json run = config_json(s, common);
    run["command"] = "swap";
    run["source_prompt"] = source_prompt;
    run["source_subject"] = source_subject;
    run["target_tokens"] = target.tokens;
    run["null_text"] = null_bank.has_value();
    write_json(s.out / "run.json", run);
    std::printf("swap: wrote %s with schedule %s\n", (s.out / "image.png").c_str(),
                s.config.schedule.to_string().c_str());
}

// analyze ---------------------------------------------------------------

struct AnalyzeOptions {
    std::string bank;
    int k = 4;
    std::string branch = "conditional";
    std::string kind = "self";
};

Branch parse_branch(const std::string& name) {
    if (name == "conditional")
        return Branch::conditional;
    if (name == "unconditional")
        return Branch::unconditional;
    fail(ErrorKind::validation, "branch must be conditional or unconditional, got '" + name + "'");
}

void cmd_analyze(const CommonOptions& common, const AnalyzeOptions& opt) {
    fs::create_directories(common.out);
    const fs::path out = common.out;
    const AttentionBank bank = load_bank(opt.bank);
    const Branch branch = parse_branch(opt.branch);
    AttentionKind kind;
    try {
        kind = attention_kind_from_string(opt.kind);
    } catch (const Error& e) {
        fail(ErrorKind::validation, e.what());
    }

    const Matrix average = average_attention(bank, kind, branch);
    const SvdSummary summary = svd_components(average, opt.k);
    write_heatmap(out / "average.png", average);

    std::vector<std::string> component_files;
    for (std::size_t i = 0; i < summary.components.size(); ++i) {
        const std::string file = "component" + std::to_string(i + 1) + ".png";
        write_heatmap(out / file, summary.components[i], 2);
        component_files.push_back(file);
    }

    fs::create_directories(out / "steps");
    std::vector<std::string> step_files;
    const auto maps = per_step_maps(bank, kind, branch);
    for (std::size_t j = 0; j < maps.size(); ++j) {
        const std::string file = "steps/step" + std::to_string(j + 1) + ".png";
        write_heatmap(out / file, svd_components(maps[j], 1).components.front(), 2);
        step_files.push_back(file);
    }

    json report{{"bank", opt.bank},
                {"kind", to_string(kind)},
                {"branch", opt.branch},
                {"rows", average.rows()},
                {"cols", average.cols()},
                {"frobenius_squared", average.squaredNorm()},
                {"singular_value_energy", summary.singular_values.squaredNorm()},
                {"steps", maps.size()}};
    json top = json::array();
    for (int i = 0; i < opt.k; ++i)
        top.push_back({{"sigma", summary.singular_values(i)}, {"explained", summary.explained_fraction[i]}});
    report["components"] = std::move(top);
    write_json(out / "report.json", report);
    write_text_atomic(out / "index.html", html_grid("Attention analysis", {{"average.png"}, component_files, step_files},
                                                    {"average", "components", "per step"}));
    std::printf("analyze: %zu steps, top component explains %.4f\n", maps.size(), summary.explained_fraction[0]);
}

// ablate ----------------------------------------------------------------

struct AblateOptions {
    std::string axis = "lambda_M";
    std::vector<int> values;
    std::string prompt;
    std::string subject;
    std::string target_prompt;
    std::string target_subject;
};

void cmd_ablate(const CommonOptions& common, const AblateOptions& opt) {
    Session s = open_session(common);
    const SwapAxis axis = swap_axis_from_string(opt.axis);
    const std::string subject = opt.subject.empty() ? default_subject(opt.prompt) : opt.subject;
    AblationInputs inputs;
    inputs.source_prompt = s.tokenizer.prompt(opt.prompt, subject);
    inputs.target_prompt = opt.target_prompt.empty()
                               ? inputs.source_prompt
                               : s.tokenizer.prompt(opt.target_prompt, opt.target_subject.empty()
                                                                           ? default_subject(opt.target_prompt)
                                                                           : opt.target_subject);
    inputs.source_z_T = gaussian_latent(s.backend->latent_shape(), s.config.seed);

    const AblationReport report = ablation_sweep(axis, opt.values, s.config, inputs, *s.backend);
    std::vector<std::string> thumbs;
    std::vector<std::string> labels;
    json rows = json::array();
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        const auto& row = report.rows[i];
        const std::string file = "value" + std::to_string(row.value) + ".png";
        write_image(s, s.out / file, report.outputs[i]);
        thumbs.push_back(file);
        labels.push_back(std::to_string(row.value));
        json r{{"value", row.value}, {"mse_to_source", row.mse_to_source}, {"mse_to_vanilla", row.mse_to_vanilla}};
        if (row.endpoint) {
            r["endpoint"] = *row.endpoint;
            r["endpoint_passed"] = *row.endpoint_passed;
        }
        rows.push_back(std::move(r));
    }
    write_text_atomic(s.out / "report.tsv", report.table());
    write_json(s.out / "report.json", json{{"axis", to_string(axis)},
                                           {"steps", report.total_steps},
                                           {"base", report.base.to_string()},
                                           {"rows", rows}});
    write_text_atomic(s.out / "index.html",
                      html_grid("Ablation of " + to_string(axis), {thumbs}, {to_string(axis)}));
    std::fputs(report.table().c_str(), stdout);
    require(report.endpoints_passed(), ErrorKind::numeric, "ablation endpoint check failed");
}

// learn-concept ---------------------------------------------------------

struct LearnOptions {
    std::string token = "<sks>";
    std::vector<std::string> references;
    int procedural = 0;
    int train_steps = 1000;
    double lr = 5e-4;
    int batch = 4;
    std::string prompt_template = "a photo of {}";
};

void cmd_learn_concept(const CommonOptions& common, const LearnOptions& opt) {
    Session s = open_session(common);
    require(opt.token.size() > 2 && opt.token.front() == '<' && opt.token.back() == '>', ErrorKind::validation,
            "concept token must look like <name>");
    std::vector<LatentGrid> refs;
    for (const auto& path : opt.references)
        refs.push_back(s.backend->encode_image(read_png(path)));
    for (int i = 0; i < opt.procedural; ++i)
        refs.push_back(procedural_latent(s.backend->latent_shape(), s.config.seed + static_cast<std::uint64_t>(i)));

    ConceptTrainerConfig cfg = ConceptTrainerConfig::embedding_inversion_defaults();
    cfg.steps = opt.train_steps;
    cfg.learning_rate = opt.lr;
    cfg.batch = opt.batch;
    cfg.prompt_template = opt.prompt_template;
    cfg.seed = s.config.seed;

    const TokenId token = s.tokenizer.token_id(opt.token);
    const auto prompt_tokens = s.tokenizer.from_template(opt.prompt_template, opt.token);
    const Vector fresh = s.backend->token_embedding(token);
    const ConceptTrainingResult result =
        train_concept_embedding(refs, token, prompt_tokens, cfg, *s.backend, s.backend->schedule());
    const std::uint64_t eval_seed = s.config.seed + 0x5eed;
    const double trained = concept_denoising_loss(refs, token, prompt_tokens, result.embedding, *s.backend,
                                                  s.backend->schedule(), eval_seed);
    const double initial =
        concept_denoising_loss(refs, token, prompt_tokens, fresh, *s.backend, s.backend->schedule(), eval_seed);

    save_concept(ConceptEmbedding{opt.token, token, result.embedding}, s.out / "concept");
    std::ostringstream losses;
    losses << "step\tloss\n";
    for (std::size_t i = 0; i < result.loss_history.size(); ++i)
        losses << i + 1 << "\t" << result.loss_history[i] << "\n";
    write_text_atomic(s.out / "loss.tsv", losses.str());
    json run = config_json(s, common);
    run["command"] = "learn-concept";
    run["token"] = opt.token;
    run["references"] = refs.size();
    run["train_steps"] = cfg.steps;
    run["lr"] = cfg.learning_rate;
    run["batch"] = cfg.batch;
    run["template"] = cfg.prompt_template;
    run["loss_trained"] = trained;
    run["loss_fresh"] = initial;
    write_json(s.out / "run.json", run);
    std::printf("learn-concept: loss %.6f (fresh token %.6f)\n", trained, initial);
}

// finetune --------------------------------------------------------------

struct FinetuneOptions {
    std::vector<std::string> references;
    int train_steps = 800;
    double lr = 1e-6;
    int batch = 1;
    std::string prompt_template = "a photo of {}";
    bool execute = false;
};

void cmd_finetune(const CommonOptions& common, const FinetuneOptions& opt) {
    // A dry run must work before any runtime is linked, so the backend is
    // never queried here.
    make_config(common);
    const auto backend = make_backend(common.backend);
    const fs::path out = common.out;
    fs::create_directories(out);
    ConceptTrainerConfig cfg = ConceptTrainerConfig::finetune_defaults();
    cfg.steps = opt.train_steps;
    cfg.learning_rate = opt.lr;
    cfg.batch = opt.batch;
    cfg.prompt_template = opt.prompt_template;
    std::vector<fs::path> refs(opt.references.begin(), opt.references.end());
    const FinetunePlan plan = finetune_adapter(refs, cfg, backend.get(), !opt.execute);
    write_json(out / "plan.json", plan.to_json());
    std::printf("finetune: plan for %s written (%s)\n", plan.checkpoint.c_str(), plan.dry_run ? "dry run" : "executed");
}

void add_prompt_options(CLI::App* cmd, std::string& prompt, std::string& subject, bool required) {
    auto* p = cmd->add_option("--prompt", prompt, "Source prompt");
    if (required)
        p->required();
    cmd->add_option("--subject", subject, "Subject word(s) in the prompt (default: last word)");
}

}  // namespace

void register_commands(CLI::App& app, CommonOptions& common, std::function<void()>& run) {
    app.set_config("--config", "", "TOML config file; command-line flags win over file values");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.fallthrough();
    app.require_subcommand(1);

    app.add_option("--steps", common.steps, "Denoising steps T")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--guidance", common.guidance, "Classifier-free guidance weight")->capture_default_str();
    app.add_option("--seed", common.seed, "Seed for the initial noise")->capture_default_str();
    app.add_option("--schedule", common.schedule, "Swap steps lambda_phi,lambda_M,lambda_A")->capture_default_str();
    app.add_option("--backend", common.backend, "toy or adapter:<uri>")->capture_default_str();
    app.add_option("--out", common.out, "Output directory")->capture_default_str();
    app.add_option("--layers", common.layers, "Hooked layer ids (default: all)")->delimiter(',');
    app.add_option("--swap-unconditional", common.swap_unconditional,
                   "Also swap in the unconditional guidance branch")
        ->capture_default_str();
    app.add_option("--bank-budget", common.bank_budget, "Resident bank bytes before spilling to the cache dir");
    app.add_option("--model-seed", common.model_seed, "Toy backend weight seed")->capture_default_str();
    app.footer(std::string("Exit codes: 0 ok, 2 config, 3 io, 4 contract/capability, 5 numeric.\n") +
               "Environment: " + kCacheEnv + " sets where oversized attention banks spill.");

    auto gen = std::make_shared<GenOptions>();
    auto* g = app.add_subcommand("gen", "Generate an image and capture its attention bank");
    add_prompt_options(g, gen->prompt, gen->subject, true);
    g->add_option("--concept-embedding", gen->concept_dir, "Learned concept directory to load");
    g->callback([&common, &run, gen] { run = [&common, gen] { cmd_gen(common, *gen); }; });

    auto inv = std::make_shared<InvertOptions>();
    auto* i = app.add_subcommand("invert", "Invert an image, optimize null text, capture the source bank");
    i->add_option("--image", inv->image, "Input PNG");
    i->add_option("--latent", inv->latent, "Input latent directory");
    add_prompt_options(i, inv->prompt, inv->subject, true);
    i->add_option("--null-iters", inv->null_iterations, "Null-text iterations per step")->capture_default_str();
    i->add_option("--null-lr", inv->null_lr, "Null-text learning rate")->capture_default_str();
    i->callback([&common, &run, inv] { run = [&common, inv] { cmd_invert(common, *inv); }; });

    auto sw = std::make_shared<SwapOptions>();
    auto* s = app.add_subcommand("swap", "Generate the target with source attention injected");
    s->add_option("--source", sw->source, "Output directory of gen or invert");
    add_prompt_options(s, sw->prompt, sw->subject, false);
    s->add_option("--target-prompt", sw->target_prompt, "Explicit target prompt");
    s->add_option("--target-subject", sw->target_subject, "Subject word(s) in the target prompt");
    s->add_option("--concept", sw->concept_word, "Concept token replacing the source subject, e.g. <sks>");
    s->add_option("--concept-embedding", sw->concept_dir, "Learned concept directory to load");
    s->add_flag("--effective-bank", sw->save_effective, "Also save the maps and outputs actually used");
    s->callback([&common, &run, sw] { run = [&common, sw] { cmd_swap(common, *sw); }; });

    auto an = std::make_shared<AnalyzeOptions>();
    auto* a = app.add_subcommand("analyze", "Average, decompose and render a bank's attention maps");
    a->add_option("--bank", an->bank, "Bank directory")->required();
    a->add_option("--k", an->k, "Number of components")->capture_default_str();
    a->add_option("--branch", an->branch, "conditional or unconditional")->capture_default_str();
    a->add_option("--kind", an->kind, "self or cross")->capture_default_str();
    a->callback([&common, &run, an] { run = [&common, an] { cmd_analyze(common, *an); }; });

    auto ab = std::make_shared<AblateOptions>();
    auto* b = app.add_subcommand("ablate", "Sweep one swap step count");
    b->add_option("--axis", ab->axis, "lambda_phi, lambda_M or lambda_A")->capture_default_str();
    b->add_option("--values", ab->values, "Comma-separated step counts")->delimiter(',')->required();
    add_prompt_options(b, ab->prompt, ab->subject, true);
    b->add_option("--target-prompt", ab->target_prompt, "Target prompt (default: the source prompt)");
    b->add_option("--target-subject", ab->target_subject, "Subject word(s) in the target prompt");
    b->callback([&common, &run, ab] { run = [&common, ab] { cmd_ablate(common, *ab); }; });

    auto lc = std::make_shared<LearnOptions>();
    auto* l = app.add_subcommand("learn-concept", "Learn a concept token embedding from references");
    l->add_option("--token", lc->token, "Concept token")->capture_default_str();
    l->add_option("--reference", lc->references, "Reference PNG (repeatable)");
    l->add_option("--procedural", lc->procedural, "Number of procedural references")->capture_default_str();
    l->add_option("--train-steps", lc->train_steps, "Optimizer steps")->capture_default_str();
    l->add_option("--lr", lc->lr, "Learning rate")->capture_default_str();
    l->add_option("--batch", lc->batch, "Minibatch size")->capture_default_str();
    l->add_option("--template", lc->prompt_template, "Prompt template, {} marks the token")->capture_default_str();
    l->callback([&common, &run, lc] { run = [&common, lc] { cmd_learn_concept(common, *lc); }; });

    auto ft = std::make_shared<FinetuneOptions>();
    auto* f = app.add_subcommand("finetune", "Plan (or run) full fine-tuning of an attached adapter");
    f->add_option("--reference", ft->references, "Reference PNG (repeatable)");
    f->add_option("--train-steps", ft->train_steps, "Optimizer steps")->capture_default_str();
    f->add_option("--lr", ft->lr, "Learning rate")->capture_default_str();
    f->add_option("--batch", ft->batch, "Minibatch size")->capture_default_str();
    f->add_option("--template", ft->prompt_template, "Prompt template")->capture_default_str();
    f->add_flag("--execute", ft->execute, "Hand the plan to the adapter runtime instead of a dry run");
    f->callback([&common, &run, ft] { run = [&common, ft] { cmd_finetune(common, *ft); }; });
}

}  // namespace subjswap::cli
