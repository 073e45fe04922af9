// r1lab: exact-arithmetic laboratory for rank-one cutting-and-stacking
// constructions. Subcommands: synth, build, corr, verify, spectral, poisson.
#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rankone/correlation.hpp"
#include "rankone/reports.hpp"
#include "rankone/rng.hpp"
#include "rankone/spectral.hpp"
#include "rankone/suspension.hpp"
#include "rankone/synthesis.hpp"
#include "rankone/textio.hpp"

namespace {

using namespace rankone;

constexpr int kExitUsage = 1;
constexpr int kExitStall = 2;
constexpr int kExitVerifyFail = 3;

std::vector<BigInt> parse_lag_list(const std::string& text) {
    std::vector<BigInt> lags;
    std::istringstream in(text);
    std::string piece;
    while (std::getline(in, piece, ',')) {
        const size_t dash = piece.find('-');
        if (dash == std::string::npos) {
            lags.push_back(parse_bigint(piece));
        } else {
            BigInt lo = parse_bigint(piece.substr(0, dash));
            const BigInt hi = parse_bigint(piece.substr(dash + 1));
            for (; lo <= hi; ++lo) lags.push_back(lo);
        }
    }
    std::sort(lags.begin(), lags.end());
    lags.erase(std::unique(lags.begin(), lags.end()), lags.end());
    return lags;
}

std::vector<int> parse_stage_list(const std::string& text) {
    std::vector<int> stages;
    for (const BigInt& v : parse_lag_list(text)) stages.push_back(static_cast<int>(*to_i64(v)));
    return stages;
}

std::vector<StaircasePlanEntry> parse_plan(const std::string& text) {
    std::vector<StaircasePlanEntry> plan;
    std::istringstream in(text);
    std::string piece;
    while (std::getline(in, piece, ',')) {
        if (piece == "mixing") {
            plan.push_back({true, 0, 0});
        } else if (piece.rfind("rigid:", 0) == 0) {
            const size_t second = piece.find(':', 6);
            if (second == std::string::npos) throw ParseError("plan entry needs rigid:N:q");
            StaircasePlanEntry e;
            e.reps = *to_i64(parse_bigint(piece.substr(6, second - 6)));
            e.q = *to_i64(parse_bigint(piece.substr(second + 1)));
            plan.push_back(e);
        } else {
            throw ParseError("plan entries are 'mixing' or 'rigid:N:q', got '" + piece + "'");
        }
    }
    return plan;
}

std::string out_path(const std::string& dir, const std::string& name) {
    std::filesystem::create_directories(dir);
    return (std::filesystem::path(dir) / name).string();
}

// Deterministic sample of candidate mixing lags from a spec, sorted ascending.
std::vector<BigInt> sample_mixing_lags(const MixingSetSpec& spec, const BigInt& lo,
                                       const BigInt& hi, int count, uint64_t seed) {
    if (hi <= lo) throw std::invalid_argument("empty mixing-lag sampling window");
    RandomStream rng(seed, 3);
    std::vector<BigInt> lags;
    const BigInt span = hi - lo;
    int attempts = 0;
    while (static_cast<int>(lags.size()) < count && attempts < count * 1000) {
        ++attempts;
        BigInt candidate = lo + rng.uniform_below_big(span);
        if (spec.candidate_mixing_lag(candidate) &&
            std::find(lags.begin(), lags.end(), candidate) == lags.end()) {
            lags.push_back(std::move(candidate));
        }
    }
    if (static_cast<int>(lags.size()) < count) {
        throw std::runtime_error("could not sample enough mixing lags in the window");
    }
    std::sort(lags.begin(), lags.end());
    return lags;
}

int run(int argc, char** argv) {
    CLI::App app{"exact rank-one cutting-and-stacking laboratory"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string out_dir = ".";
    app.add_option("--out", out_dir, "output directory")->capture_default_str();

    // ---- synth
    auto* synth = app.add_subcommand("synth", "synthesize a schedule from a mixing-set spec");
    std::string synth_spec, synth_kind = "rigid-mixing", synth_plan, synth_h1 = "1",
                            synth_w1 = "1", synth_growth = "8";
    int synth_stages = 6;
    synth->add_option("--spec", synth_spec, "mixing-set spec file (rigid-mixing, two-column)");
    synth->add_option("--construction", synth_kind,
                      "rigid-mixing | two-column | subset-heights | staircase")
        ->capture_default_str();
    synth->add_option("--stages", synth_stages, "stages to build")->capture_default_str();
    synth->add_option("--h1", synth_h1, "initial height");
    synth->add_option("--w1", synth_w1, "initial width (rational)");
    synth->add_option("--growth", synth_growth, "subset-heights growth factor");
    synth->add_option("--plan", synth_plan, "staircase plan: mixing,rigid:N:q,...");
    std::string synth_pool;
    synth->add_option("--heights", synth_pool, "subset-heights pool: 'all' or a lag list");

    // ---- build
    auto* build = app.add_subcommand("build", "materialize a schedule file and report stages");
    std::string build_schedule;
    build->add_option("--schedule", build_schedule, "schedule file")->required();

    // ---- corr
    auto* corr = app.add_subcommand("corr", "correlation sweep over a lag list");
    std::string corr_schedule, corr_a, corr_b, corr_lags, corr_tol = "0";
    corr->add_option("--schedule", corr_schedule, "schedule file")->required();
    corr->add_option("--set-a", corr_a, "level set, e.g. 2:0-4,7")->required();
    corr->add_option("--set-b", corr_b, "level set (defaults to --set-a)");
    corr->add_option("--lags", corr_lags, "lag list, e.g. 0,5,8-12")->required();
    corr->add_option("--tolerance", corr_tol, "certified width target (rational)");

    // ---- verify
    auto* verify = app.add_subcommand("verify", "run a verification report");
    std::string v_schedule, v_kind, v_a, v_b, v_lags, v_stages, v_spec, v_threshold = "0",
                            v_smax = "0", v_expect = "none", v_halftol = "1/20",
                            v_convtol = "1/100";
    int v_pmax = 4, v_sample = 0, v_k = 1, v_n = 1, v_stage = 0, v_maxlag = 64, v_grid = 512,
        v_psd_trials = 8;
    uint64_t v_seed = 1, v_samples = 100000;
    verify->add_option("--schedule", v_schedule, "schedule file")->required();
    verify->add_option("--kind", v_kind, "rigidity | mixing | kappa | sp | suspension | spectral")
        ->required();
    verify->add_option("--set-a", v_a, "level set")->required();
    verify->add_option("--set-b", v_b, "level set (defaults to --set-a)");
    verify->add_option("--lags", v_lags, "lag list");
    verify->add_option("--stages-list", v_stages, "stage indices, e.g. 3-6");
    verify->add_option("--spec", v_spec, "mixing-set spec (for sampling mixing lags)");
    verify->add_option("--sample", v_sample, "number of mixing lags to sample from --spec");
    verify->add_option("--threshold", v_threshold, "finite-mode mixing threshold (rational)");
    verify->add_option("--expect", v_expect, "rigidity expectation: rigid-mixing|two-column|none");
    verify->add_option("--half-tol", v_halftol, "two-column tolerance around 1/2 (rational)");
    verify->add_option("--convergence-tol", v_convtol, "kappa last-3 spread tolerance");
    verify->add_option("--smax", v_smax, "sp residual bound (default: h of the base stage)");
    verify->add_option("--pmax", v_pmax, "sp term bound")->capture_default_str();
    verify->add_option("--stage", v_stage, "evaluation stage (sp brute sweep)");
    verify->add_option("--k", v_k, "suspension count for A");
    verify->add_option("--n", v_n, "suspension count for B");
    verify->add_option("--samples", v_samples, "monte carlo samples")->capture_default_str();
    verify->add_option("--seed", v_seed, "random seed")->capture_default_str();
    verify->add_option("--max-lag", v_maxlag, "spectral coefficient range");
    verify->add_option("--grid", v_grid, "spectral grid points");
    verify->add_option("--psd-trials", v_psd_trials, "random Toeplitz minors to test");

    // ---- spectral
    auto* spectral = app.add_subcommand("spectral", "emit coefficient and density CSVs");
    std::string sp_schedule, sp_a;
    int sp_maxlag = 64, sp_grid = 512;
    spectral->add_option("--schedule", sp_schedule, "schedule file")->required();
    spectral->add_option("--set-a", sp_a, "level set")->required();
    spectral->add_option("--max-lag", sp_maxlag, "largest lag")->capture_default_str();
    spectral->add_option("--grid", sp_grid, "grid points")->capture_default_str();

    // ---- poisson
    auto* poisson = app.add_subcommand("poisson", "suspension event probabilities");
    std::string po_schedule, po_a, po_b, po_lag = "0", po_mode = "three-region";
    int po_k = 1, po_n = 1;
    uint64_t po_samples = 0, po_seed = 1;
    poisson->add_option("--schedule", po_schedule, "schedule file")->required();
    poisson->add_option("--set-a", po_a, "level set")->required();
    poisson->add_option("--set-b", po_b, "level set (defaults to --set-a)");
    poisson->add_option("--k", po_k, "count in A")->capture_default_str();
    poisson->add_option("--n", po_n, "count in R^-m B")->capture_default_str();
    poisson->add_option("--lag", po_lag, "shift m")->capture_default_str();
    poisson->add_option("--samples", po_samples, "monte carlo samples (0 = analytic only)");
    poisson->add_option("--seed", po_seed, "random seed")->capture_default_str();
    poisson->add_option("--mode", po_mode, "three-region | full-sim")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);  // prints help/message; 0 for --help
        return code == 0 ? 0 : kExitUsage;
    }

    if (synth->parsed()) {
        SynthesisOptions opt;
        opt.stages = synth_stages;
        opt.h1 = parse_bigint(synth_h1);
        opt.w1 = parse_rational(synth_w1);
        opt.subset_growth_factor = parse_bigint(synth_growth);

        SynthesisResult result = [&]() {
            if (synth_kind == "rigid-mixing") {
                return synthesize_rigid_mixing(parse_mixing_spec_text(read_file(synth_spec)), opt);
            }
            if (synth_kind == "two-column") {
                const MixingSetSpec spec = parse_mixing_spec_text(read_file(synth_spec));
                if (spec.kind != MixingSetSpec::Kind::IntervalFamily) {
                    throw std::invalid_argument("two-column synthesis needs an interval family");
                }
                return synthesize_two_column(spec.family, opt);
            }
            if (synth_kind == "subset-heights") {
                if (synth_pool == "all" || synth_pool.empty()) {
                    return synthesize_subset_heights({}, true, opt);
                }
                return synthesize_subset_heights(parse_lag_list(synth_pool), false, opt);
            }
            if (synth_kind == "staircase") {
                return build_staircase_schedule(parse_plan(synth_plan), opt);
            }
            throw std::invalid_argument("unknown construction '" + synth_kind + "'");
        }();

        const bool finite = result.schedule.mode() == ConstructionSchedule::Mode::Finite;
        write_file(out_path(out_dir, "synth-audit.txt"), result.report_text());
        write_file(out_path(out_dir, "schedule.txt"),
                   serialize_schedule(explicit_document(std::move(result.schedule), finite)));
        std::cout << "synth: wrote schedule.txt and synth-audit.txt to " << out_dir << "\n";
        return 0;
    }

    if (build->parsed()) {
        const ScheduleDocument doc = parse_schedule_text(read_file(build_schedule));
        write_file(
            out_path(out_dir, "schedule-explicit.txt"),
            serialize_schedule(ScheduleDocument{doc.schedule, std::nullopt, doc.total_running}));
        std::ostringstream report;
        report << "stages " << doc.schedule.stages() << "\n";
        for (int j = 1; j <= doc.schedule.stages(); ++j) {
            report << "stage " << j << " h " << to_decimal(doc.schedule.height(j)) << " w "
                   << to_decimal(doc.schedule.width(j)) << " measure "
                   << to_decimal(doc.schedule.stage_measure(j)) << "\n";
        }
        write_file(out_path(out_dir, "build-report.txt"), report.str());
        std::cout << "build: " << doc.schedule.stages() << " stages, top height "
                  << to_decimal(doc.schedule.height(doc.schedule.stages())) << "\n";
        return 0;
    }

    if (corr->parsed()) {
        const ScheduleDocument doc = parse_schedule_text(read_file(corr_schedule));
        const LevelSet a = parse_level_set(corr_a, doc.schedule);
        const LevelSet b = corr_b.empty() ? a : parse_level_set(corr_b, doc.schedule);
        const std::string csv =
            correlation_sweep_csv(doc.schedule, a, b, parse_lag_list(corr_lags),
                                  parse_rational(corr_tol), worker_count());
        write_file(out_path(out_dir, "corr.csv"), csv);
        std::cout << "corr: wrote corr.csv to " << out_dir << "\n";
        return 0;
    }

    if (verify->parsed()) {
        const ScheduleDocument doc = parse_schedule_text(read_file(v_schedule));
        const ConstructionSchedule& schedule = doc.schedule;
        const LevelSet a = parse_level_set(v_a, schedule);
        const LevelSet b = v_b.empty() ? a : parse_level_set(v_b, schedule);

        VerifyOutput output;
        if (v_kind == "rigidity") {
            std::vector<int> stages;
            if (!v_stages.empty()) {
                stages = parse_stage_list(v_stages);
            } else {
                for (int j = a.stage() + 1; j < schedule.stages(); ++j) stages.push_back(j);
            }
            RigidityExpectation expect = RigidityExpectation::None;
            if (v_expect == "rigid-mixing") expect = RigidityExpectation::RigidMixing;
            if (v_expect == "two-column") expect = RigidityExpectation::TwoColumn;
            output = rigidity_report(schedule, a, stages, expect, parse_rational(v_halftol));
        } else if (v_kind == "mixing") {
            std::vector<BigInt> lags;
            if (!v_lags.empty()) {
                lags = parse_lag_list(v_lags);
            } else if (!v_spec.empty() && v_sample > 0) {
                const MixingSetSpec spec = parse_mixing_spec_text(read_file(v_spec));
                const int n0 = std::max(a.stage(), b.stage());
                const BigInt lo = schedule.height(std::min(n0 + 1, schedule.stages()));
                const BigInt hi = schedule.height(schedule.stages() - 1);
                lags = sample_mixing_lags(spec, lo, hi, v_sample, v_seed);
            } else {
                throw std::invalid_argument("mixing verify needs --lags or --spec with --sample");
            }
            output = mixing_report_output(
                verify_mixing_along(schedule, lags, a, b, parse_rational(v_threshold)));
        } else if (v_kind == "kappa") {
            output = kappa_report_output(
                kappa_mixing_check(schedule, parse_lag_list(v_lags), a, b,
                                   parse_rational(v_convtol)));
        } else if (v_kind == "sp") {
            int J = v_stage;
            if (J == 0) {
                // keep one stage of headroom so zero verdicts can certify
                J = std::max(2, schedule.stages() - 1);
                while (J > 1 && schedule.height(J) > ConstructionSchedule::kDefaultWordGuard) --J;
            }
            BigInt smax = parse_bigint(v_smax);
            if (smax == 0) smax = schedule.height(std::max(a.stage(), b.stage()));
            output = sp_report(schedule, a, b, J, smax, v_pmax);
        } else if (v_kind == "suspension") {
            std::vector<int> stages;
            if (!v_stages.empty()) {
                stages = parse_stage_list(v_stages);
            } else {
                for (int j = a.stage() + 1; j < schedule.stages(); ++j) stages.push_back(j);
            }
            SuspensionCheckConfig cfg;
            cfg.k = v_k;
            cfg.n = v_n;
            cfg.samples = v_samples;
            cfg.seed = v_seed;
            output = suspension_report(
                schedule, a, b, stages,
                v_lags.empty() ? std::vector<BigInt>{} : parse_lag_list(v_lags), cfg);
        } else if (v_kind == "spectral") {
            output = spectral_report(schedule, a, v_maxlag, v_grid, v_psd_trials, v_seed);
        } else {
            throw std::invalid_argument("unknown verify kind '" + v_kind + "'");
        }

        write_file(out_path(out_dir, v_kind + ".csv"), output.csv);
        write_file(out_path(out_dir, v_kind + "-verdict.txt"),
                   std::string(verdict_name(output.verdict)) + "\n" + output.summary + "\n");
        std::cout << verdict_name(output.verdict) << ": " << output.summary << "\n";
        return output.verdict == Verdict::Fail ? kExitVerifyFail : 0;
    }

    if (spectral->parsed()) {
        const ScheduleDocument doc = parse_schedule_text(read_file(sp_schedule));
        const LevelSet a = parse_level_set(sp_a, doc.schedule);
        std::vector<BigInt> lags;
        for (int m = 0; m <= sp_maxlag; ++m) lags.emplace_back(m);
        const SpectralSequence seq = spectral_coefficients(doc.schedule, a, lags);
        write_file(out_path(out_dir, "spectral.csv"), spectral_csv(seq));
        write_file(out_path(out_dir, "fejer.csv"),
                   fejer_csv(fejer_density(seq, sp_maxlag, sp_grid)));
        std::cout << "spectral: wrote spectral.csv and fejer.csv to " << out_dir << "\n";
        return 0;
    }

    if (poisson->parsed()) {
        const ScheduleDocument doc = parse_schedule_text(read_file(po_schedule));
        const LevelSet a = parse_level_set(po_a, doc.schedule);
        const LevelSet b = po_b.empty() ? a : parse_level_set(po_b, doc.schedule);
        const BigInt lag = parse_bigint(po_lag);

        const ExpTerm analytic = joint_shifted_event_prob(doc.schedule, a, po_k, b, po_n, lag);
        std::ostringstream csv;
        csv << "lag,k,n,coeff,exponent,analytic_prob,mc_freq,ci_lo,ci_hi\n";
        csv << to_decimal(lag) << "," << po_k << "," << po_n << "," << to_decimal(analytic.coeff)
            << "," << to_decimal(analytic.exponent) << "," << format_double17(analytic.value());
        if (po_samples > 0) {
            const JointSampleMode mode = po_mode == "full-sim" ? JointSampleMode::FullSimulation
                                                               : JointSampleMode::ThreeRegion;
            const JointDistribution dist = sample_joint_counts(
                doc.schedule, a, b, lag, doc.schedule.stages(), po_samples, po_seed, mode);
            const double freq = dist.frequency(po_k, po_n);
            const double eps =
                std::sqrt(std::log(2.0 / 0.01) / (2.0 * static_cast<double>(po_samples)));
            csv << "," << format_double17(freq) << ","
                << format_double17(std::max(0.0, freq - eps)) << ","
                << format_double17(std::min(1.0, freq + eps));
        } else {
            csv << ",,,";
        }
        csv << "\n";
        write_file(out_path(out_dir, "poisson.csv"), csv.str());
        std::cout << "poisson: P = " << format_double17(analytic.value()) << " ("
                  << to_decimal(analytic.coeff) << " * e^" << to_decimal(analytic.exponent)
                  << ")\n";
        return 0;
    }

    return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const SynthesisStall& e) {
        std::cerr << "synthesis stall: " << e.what() << "\n";
        return kExitStall;
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}
