#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <string_view>

#include "enlca/enlca.hpp"

namespace enlca::cli {

namespace {

// Stream ids under the user seed: projections draw from 0, the seeded
// feature transforms used with --features draw from 1.
constexpr std::uint64_t kProjectionStream = 0;
constexpr std::uint64_t kTransformStream = 1;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string fmt10(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
    if (flag) return *flag;
    const char* env = std::getenv("ENLCA_SEED");
    if (env == nullptr || *env == '\0') return 0;
    const std::string_view text(env);
    std::uint64_t seed = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw UsageError("ENLCA_SEED='" + std::string(text) + "' is not an unsigned integer");
    }
    return seed;
}

struct Context {
    std::ostream& out;
    std::ostream& err;
    std::optional<std::uint64_t> seed_flag;

    std::uint64_t seed() const { return resolve_seed(seed_flag); }
    RngSpec stream(std::uint64_t id) const { return {seed(), id}; }

    void emit_matrix(const std::string& path, const Matrix& m) const {
        if (path.empty()) {
            write_csv(out, m);
        } else {
            save_matrix(path, m);
        }
    }
};

struct QkvSource {
    std::string q, k, v, features;
    std::size_t c_embed = 64;
};

struct Qkv {
    Matrix q;
    Matrix k;
    std::optional<Matrix> v;
};

void add_qkv_options(CLI::App* sub, QkvSource& src, bool with_values) {
    auto* q = sub->add_option("--q", src.q, "Query matrix, c x N");
    auto* k = sub->add_option("--k", src.k, "Key matrix, c x N");
    auto* f = sub->add_option("--features", src.features,
                              "Input features X (c_in x N); Q, K, V come from seeded transforms");
    q->excludes(f);
    k->excludes(f);
    if (with_values) sub->add_option("--v", src.v, "Value matrix, c_out x N")->excludes(f);
    sub->add_option("--c-embed", src.c_embed, "Embedding channels for --features (capped at c_in)")
        ->check(CLI::PositiveNumber);
}

// With --features the query/key pair is always normalized and amplified.
// Explicit --q/--k are used as given unless `amplify_explicit` is set.
Qkv load_qkv(const QkvSource& src, bool with_values, double k_amp, const Context& ctx, bool amplify_explicit) {
    if (!src.features.empty()) {
        const Matrix x = load_matrix(src.features);
        EnlaConfig cfg;
        cfg.k_amp = k_amp;
        const auto params = random_block_params(x.rows(), std::min(src.c_embed, x.rows()), cfg,
                                                ctx.stream(kTransformStream));
        auto qk = normalize_and_scale(matmul(transpose(params.w_theta), x), matmul(transpose(params.w_delta), x),
                                      k_amp);
        return {std::move(qk.q), std::move(qk.k), matmul(transpose(params.w_psi), x)};
    }
    if (src.q.empty() || src.k.empty()) throw UsageError("either --features or both --q and --k are required");
    if (with_values && src.v.empty()) throw UsageError("--v is required with --q/--k");
    Matrix q = load_matrix(src.q);
    Matrix k = load_matrix(src.k);
    std::optional<Matrix> v;
    if (with_values) v = load_matrix(src.v);
    if (amplify_explicit) {
        auto qk = normalize_and_scale(q, k, k_amp);
        return {std::move(qk.q), std::move(qk.k), std::move(v)};
    }
    return {std::move(q), std::move(k), std::move(v)};
}

struct Command {
    CLI::App* app;
    std::function<void()> action;
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Efficient non-local contrastive attention: evaluation and validation tools", "enlca"};
    app.require_subcommand(1);

    Context ctx{out, err, std::nullopt};
    std::vector<Command> commands;

    auto add_seed = [&ctx](CLI::App* sub) {
        sub->add_option_function<std::uint64_t>(
            "--seed", [&ctx](std::uint64_t s) { ctx.seed_flag = s; }, "RNG seed (default: $ENLCA_SEED or 0)");
    };

    // exact ------------------------------------------------------------------
    QkvSource exact_src;
    std::string exact_out, exact_weights;
    double exact_k_amp = 6.0;
    {
        auto* sub = app.add_subcommand("exact", "Exact quadratic attention");
        add_qkv_options(sub, exact_src, true);
        sub->add_option("--k-amp", exact_k_amp, "Amplification used with --features");
        sub->add_option("--out", exact_out, "Output matrix path (default: stdout)");
        sub->add_option("--weights-out", exact_weights, "Also write the N x N weight matrix");
        add_seed(sub);
        commands.push_back({sub, [&] {
                                const auto in = load_qkv(exact_src, true, exact_k_amp, ctx, false);
                                const auto result = exact_attention(in.q, in.k, *in.v, !exact_weights.empty());
                                ctx.emit_matrix(exact_out, result.y);
                                if (result.weights) save_matrix(exact_weights, *result.weights);
                            }});
    }

    // enla -------------------------------------------------------------------
    QkvSource enla_src;
    std::string enla_out;
    EnlaConfig enla_cfg;
    {
        auto* sub = app.add_subcommand("enla", "Linear-complexity random-feature attention");
        add_qkv_options(sub, enla_src, true);
        sub->add_option("--m", enla_cfg.m, "Random features")->check(CLI::PositiveNumber);
        sub->add_option("--k-amp", enla_cfg.k_amp, "Amplification used with --features");
        sub->add_flag("--orthogonal", enla_cfg.orthogonal, "Block-orthogonal projection rows");
        sub->add_option("--epsilon", enla_cfg.epsilon, "Normalizer floor");
        sub->add_option("--out", enla_out, "Output matrix path (default: stdout)");
        add_seed(sub);
        commands.push_back({sub, [&] {
                                const auto in = load_qkv(enla_src, true, enla_cfg.k_amp, ctx, false);
                                enla_cfg.rng = ctx.stream(kProjectionStream);
                                const auto result = enla_forward(in.q, in.k, *in.v, enla_cfg);
                                if (result.diagnostics.denominator_floored) {
                                    ctx.err << "warning: normalizer floored at epsilon in "
                                            << result.diagnostics.floored_columns << " column(s)\n";
                                }
                                ctx.emit_matrix(enla_out, result.y);
                            }});
    }

    // block ------------------------------------------------------------------
    std::string block_features, block_out;
    std::size_t block_c_embed = 64;
    bool block_exact = false;
    EnlaConfig block_cfg;
    {
        auto* sub = app.add_subcommand("block", "Residual attention block with seeded transforms");
        sub->add_option("--features", block_features, "Input features X, c_in x N")->required();
        sub->add_option("--c-embed", block_c_embed, "Embedding channels (capped at c_in)")->check(CLI::PositiveNumber);
        sub->add_option("--m", block_cfg.m, "Random features")->check(CLI::PositiveNumber);
        sub->add_option("--k-amp", block_cfg.k_amp, "Amplification");
        sub->add_flag("--orthogonal", block_cfg.orthogonal, "Block-orthogonal projection rows");
        sub->add_option("--epsilon", block_cfg.epsilon, "Normalizer floor");
        sub->add_flag("--exact", block_exact, "Use exact attention inside the block");
        sub->add_option("--out", block_out, "Output matrix path (default: stdout)");
        add_seed(sub);
        commands.push_back({sub, [&] {
                                const Matrix x = load_matrix(block_features);
                                block_cfg.rng = ctx.stream(kProjectionStream);
                                const auto params = random_block_params(
                                    x.rows(), std::min(block_c_embed, x.rows()), block_cfg, ctx.stream(kTransformStream));
                                ctx.emit_matrix(block_out, enlca_block(x, params,
                                                                       block_exact ? BlockAttention::exact
                                                                                   : BlockAttention::efficient));
                            }});
    }

    // phi --------------------------------------------------------------------
    std::string phi_u, phi_out;
    std::size_t phi_m = 128;
    bool phi_orthogonal = false, phi_raw = false;
    {
        auto* sub = app.add_subcommand("phi", "Random feature map of the columns of a matrix");
        sub->add_option("--u", phi_u, "Input matrix, c x N")->required();
        sub->add_option("--m", phi_m, "Random features")->check(CLI::PositiveNumber);
        sub->add_flag("--orthogonal", phi_orthogonal, "Block-orthogonal projection rows");
        sub->add_flag("--no-stabilize", phi_raw, "Skip the max-shift inside the exponent");
        sub->add_option("--out", phi_out, "Output matrix path (default: stdout)");
        add_seed(sub);
        commands.push_back({sub, [&] {
                                const Matrix u = load_matrix(phi_u);
                                const auto proj =
                                    sample_projection(ctx.stream(kProjectionStream), phi_m, u.rows(), phi_orthogonal);
                                const auto features = phi(proj, u, !phi_raw);
                                ctx.emit_matrix(phi_out, features.features);
                                (phi_out.empty() ? ctx.err : ctx.out) << "shift " << fmt10(features.shift) << '\n';
                            }});
    }

    // variance ---------------------------------------------------------------
    std::vector<double> var_k_list{1, 2, 4, 6, 8};
    std::size_t var_c = 8, var_m = 128, var_trials = 10000;
    std::string var_out;
    {
        auto* sub = app.add_subcommand("variance", "Estimator variance versus amplification");
        sub->add_option("--k-list", var_k_list, "Ascending amplification values")->delimiter(',');
        sub->add_option("--c", var_c, "Feature dimension")->check(CLI::PositiveNumber);
        sub->add_option("--m", var_m, "Random features")->check(CLI::PositiveNumber);
        sub->add_option("--trials", var_trials, "Monte-Carlo trials per point")->check(CLI::Range(2, 100000000));
        sub->add_option("--out", var_out, "Output CSV path (default: stdout)");
        add_seed(sub);
        commands.push_back({sub, [&] {
                                const auto sweep =
                                    variance_sweep_k(var_k_list, var_c, var_m, var_trials, ctx.stream(kProjectionStream));
                                if (var_out.empty()) {
                                    write_sweep_csv(ctx.out, sweep);
                                } else {
                                    std::ofstream file(var_out);
                                    if (!file) throw FormatError("cannot write '" + var_out + "'");
                                    write_sweep_csv(file, sweep);
                                }
                            }});
    }

    // approx-sweep -----------------------------------------------------------
    std::size_t sweep_n = 64, sweep_c = 8, sweep_cout = 8, sweep_trials = 32;
    std::vector<std::size_t> sweep_m_list{16, 64, 256, 1024};
    double sweep_k_amp = 6.0;
    std::string sweep_out;
    {
        auto* sub = app.add_subcommand("approx-sweep", "Approximation error versus exact attention across m");
        sub->add_option("--n", sweep_n, "Spatial size")->check(CLI::PositiveNumber);
        sub->add_option("--c", sweep_c, "Query/key channels")->check(CLI::PositiveNumber);
        sub->add_option("--cout", sweep_cout, "Value channels")->check(CLI::PositiveNumber);
        sub->add_option("--m-list", sweep_m_list, "Ascending feature counts")->delimiter(',');
        sub->add_option("--k-amp", sweep_k_amp, "Amplification");
        sub->add_option("--trials", sweep_trials, "Projection draws per m")->check(CLI::PositiveNumber);
        sub->add_option("--out", sweep_out, "Output CSV path (default: stdout)");
        add_seed(sub);
        commands.push_back({sub, [&] {
                                const auto sweep =
                                    approximation_error_sweep(sweep_n, sweep_c, sweep_cout, sweep_m_list, sweep_k_amp,
                                                              sweep_trials, ctx.stream(kProjectionStream));
                                if (sweep_out.empty()) {
                                    write_sweep_csv(ctx.out, sweep);
                                } else {
                                    std::ofstream file(sweep_out);
                                    if (!file) throw FormatError("cannot write '" + sweep_out + "'");
                                    write_sweep_csv(file, sweep);
                                }
                            }});
    }

    // flops ------------------------------------------------------------------
    std::string flops_method;
    std::uint64_t flops_n = 10000, flops_c = 64, flops_cout = 64, flops_m = 128;
    bool flops_with_normalizer = false;
    {
        auto* sub = app.add_subcommand("flops", "Operator cost model (1 MAC = 2 FLOPs)");
        sub->add_option("--method", flops_method, "nla | enlca | conv3x3")->required();
        sub->add_option("--n", flops_n, "Spatial size")->check(CLI::PositiveNumber);
        sub->add_option("--c", flops_c, "Input channels")->check(CLI::PositiveNumber);
        sub->add_option("--cout", flops_cout, "Output channels")->check(CLI::PositiveNumber);
        sub->add_option("--m", flops_m, "Random features (enlca)")->check(CLI::PositiveNumber);
        sub->add_flag("--with-normalizer", flops_with_normalizer, "Also count normalizer accumulation (N^2 or mN)");
        commands.push_back({sub, [&] {
                                const auto method = parse_cost_method(flops_method);
                                if (!method) throw UsageError("unknown --method '" + flops_method + "'");
                                const auto model = flop_count(*method, flops_n, flops_c, flops_cout, flops_m,
                                                              flops_with_normalizer ? NormalizerCost::included
                                                                                    : NormalizerCost::excluded);
                                char line[64];
                                std::snprintf(line, sizeof line, "%.2f GFLOPs", model.gflops());
                                ctx.out << line << '\n'
                                        << "macs " << model.macs << '\n'
                                        << "flops " << model.flops << '\n';
                            }});
    }

    // contrastive ------------------------------------------------------------
    QkvSource cl_src;
    ContrastiveConfig cl_cfg;
    std::string cl_sr, cl_hr;
    {
        auto* sub = app.add_subcommand("contrastive", "Contrastive separation loss (and optional total loss)");
        add_qkv_options(sub, cl_src, false);
        sub->add_option("--k-amp", cl_cfg.k_amp, "Amplification");
        sub->add_option("--n1", cl_cfg.n1, "Group fraction");
        sub->add_option("--n2", cl_cfg.n2, "Irrelevant window start fraction");
        sub->add_option("--b", cl_cfg.b, "Margin");
        sub->add_option("--lambda-cl", cl_cfg.lambda_cl, "Contrastive loss weight");
        auto* sr = sub->add_option("--sr", cl_sr, "Reconstruction for the MAE term");
        auto* hr = sub->add_option("--hr", cl_hr, "Target for the MAE term");
        sr->needs(hr);
        hr->needs(sr);
        add_seed(sub);
        commands.push_back({sub, [&] {
                                const auto in = load_qkv(cl_src, false, cl_cfg.k_amp, ctx, false);
                                const double cl = contrastive_loss(relevance_scores(in.q, in.k, cl_cfg.k_amp), cl_cfg);
                                ctx.out << "contrastive_loss " << fmt10(cl) << '\n';
                                if (!cl_sr.empty()) {
                                    const double rec = reconstruction_loss(load_matrix(cl_sr), load_matrix(cl_hr));
                                    ctx.out << "reconstruction_loss " << fmt10(rec) << '\n'
                                            << "total_loss " << fmt10(total_loss(rec, cl, cl_cfg.lambda_cl)) << '\n';
                                }
                            }});
    }

    // corr-map ---------------------------------------------------------------
    QkvSource corr_src;
    double corr_k_amp = 6.0;
    std::size_t corr_index = 0, corr_h = 0, corr_w = 0;
    std::string corr_pgm, corr_out;
    {
        auto* sub = app.add_subcommand("corr-map", "Correlation map of one query against all positions");
        add_qkv_options(sub, corr_src, false);
        sub->add_option("--k-amp", corr_k_amp, "Amplification applied to normalized query/key features");
        sub->add_option("--index", corr_index, "Query column");
        sub->add_option("--height", corr_h, "Map height (default 1)");
        sub->add_option("--width", corr_w, "Map width (default N / height)");
        sub->add_option("--pgm", corr_pgm, "Write the map as an 8-bit PGM");
        sub->add_option("--out", corr_out, "Write the map as an h x w matrix");
        add_seed(sub);
        commands.push_back({sub, [&] {
                                const auto in = load_qkv(corr_src, false, corr_k_amp, ctx, true);
                                const std::size_t n = in.q.cols();
                                std::size_t h = corr_h == 0 ? 1 : corr_h;
                                std::size_t w = corr_w == 0 ? n / h : corr_w;
                                if (h * w != n) {
                                    throw ShapeError("corr-map: " + std::to_string(h) + "x" + std::to_string(w) +
                                                     " does not cover N = " + std::to_string(n));
                                }
                                const auto map = correlation_map(in.q, in.k, corr_index);
                                ctx.out << "entropy " << fmt10(shannon_entropy(map)) << '\n'
                                        << "peak " << fmt10(*std::max_element(map.begin(), map.end())) << '\n';
                                if (!corr_pgm.empty()) export_correlation_pgm(map, h, w, corr_pgm);
                                if (!corr_out.empty()) save_matrix(corr_out, Matrix(h, w, map));
                            }});
    }

    // bench ------------------------------------------------------------------
    std::vector<std::size_t> bench_n_list{2500, 10000};
    std::size_t bench_c = 64, bench_cout = 64, bench_m = 128, bench_repeats = 3;
    std::string bench_out;
    {
        auto* sub = app.add_subcommand("bench", "Wall-clock scaling of exact versus efficient attention");
        sub->add_option("--n-list", bench_n_list, "Ascending spatial sizes")->delimiter(',');
        sub->add_option("--c", bench_c, "Query/key channels")->check(CLI::PositiveNumber);
        sub->add_option("--cout", bench_cout, "Value channels")->check(CLI::PositiveNumber);
        sub->add_option("--m", bench_m, "Random features")->check(CLI::PositiveNumber);
        sub->add_option("--repeats", bench_repeats, "Timed repeats per point (>= 3)");
        sub->add_option("--out", bench_out, "Output CSV path (default: stdout)");
        commands.push_back({sub, [&] {
                                const auto timing =
                                    runtime_scaling(bench_n_list, bench_c, bench_cout, bench_m, bench_repeats);
                                auto write = [&](std::ostream& os) {
                                    os << "# method=exact\n";
                                    write_sweep_csv(os, timing.exact);
                                    os << "# method=enla\n";
                                    write_sweep_csv(os, timing.enla);
                                };
                                if (bench_out.empty()) {
                                    write(ctx.out);
                                } else {
                                    std::ofstream file(bench_out);
                                    if (!file) throw FormatError("cannot write '" + bench_out + "'");
                                    write(file);
                                }
                                const auto exact_ratios = step_ratios(timing.exact);
                                const auto enla_ratios = step_ratios(timing.enla);
                                for (std::size_t i = 0; i < exact_ratios.size(); ++i) {
                                    ctx.out << "ratio n=" << bench_n_list[i + 1] << "/" << bench_n_list[i]
                                            << " exact " << fmt10(exact_ratios[i]) << " enla "
                                            << fmt10(enla_ratios[i]) << '\n';
                                }
                            }});
    }

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e, out, err);
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        for (const auto& cmd : commands) {
            if (cmd.app->parsed()) cmd.action();
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const FormatError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        // ShapeError, NumericError and anything unexpected during evaluation.
        err << "error: " << e.what() << '\n';
        return kExitNumeric;
    }
    return kExitOk;
}

}  // namespace enlca::cli
