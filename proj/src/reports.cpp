#include "rankone/reports.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <thread>

#include "rankone/rng.hpp"

namespace rankone {

int worker_count() {
    if (const char* env = std::getenv("R1LAB_WORKERS")) {
        const int v = std::atoi(env);
        if (v >= 1) return std::min(v, 64);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return static_cast<int>(std::min(8u, std::max(1u, hw)));
}

std::string correlation_sweep_csv(const ConstructionSchedule& schedule, const LevelSet& a,
                                  const LevelSet& b, const std::vector<BigInt>& lags,
                                  const Rational& tolerance, int workers) {
    std::vector<std::string> rows(lags.size());
    const int pool = std::max(1, std::min<int>(workers, static_cast<int>(lags.size())));

    std::atomic<size_t> cursor{0};
    auto work = [&]() {
        CorrelationEvaluator eval(schedule, a, b);
        for (size_t i = cursor.fetch_add(1); i < lags.size(); i = cursor.fetch_add(1)) {
            const CorrelationResult r = eval.refine(lags[i], tolerance);
            std::ostringstream row;
            row << to_decimal(r.lag) << "," << to_decimal(r.lo) << "," << to_decimal(r.hi) << ","
                << method_name(r.method) << "," << r.stage_used;
            rows[i] = row.str();
        }
    };

    if (pool == 1) {
        work();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(static_cast<size_t>(pool));
        for (int t = 0; t < pool; ++t) threads.emplace_back(work);
        for (auto& t : threads) t.join();
    }

    std::ostringstream out;
    out << "lag,lo,hi,method,stage_used\n";
    for (const std::string& row : rows) out << row << "\n";
    return out.str();
}

VerifyOutput rigidity_report(const ConstructionSchedule& schedule, const LevelSet& a,
                             const std::vector<int>& stages, RigidityExpectation expect,
                             const Rational& half_tolerance) {
    CorrelationEvaluator eval(schedule, a, a);
    const Rational mu = eval.measure_a();

    VerifyOutput out;
    std::ostringstream csv;
    csv << "j,lag,corr_lo,corr_hi,defect_lo,defect_hi,expected_defect,ok\n";

    int failures = 0, inconclusive = 0;
    for (int j : stages) {
        const BigInt& lag = schedule.height(j);
        const CorrelationResult corr = eval.refine(lag, Rational(0));
        const Rational defect_lo = 2 * mu - 2 * corr.hi;
        const Rational defect_hi = 2 * mu - 2 * corr.lo;

        std::string expected = "-";
        bool ok = true;
        if (expect == RigidityExpectation::RigidMixing) {
            const Rational want = 2 * mu / j;
            expected = to_decimal(want);
            if (!corr.exact()) {
                ok = false;
                ++inconclusive;
            } else if (defect_lo != want) {
                ok = false;
                ++failures;
            }
        } else if (expect == RigidityExpectation::TwoColumn) {
            // partial rigidity: corr/mu within half_tolerance of 1/2
            expected = to_decimal(Rational(mu));  // defect -> mu(A)
            const Rational lo_dev = corr.lo / mu - Rational(1, 2);
            const Rational hi_dev = corr.hi / mu - Rational(1, 2);
            const Rational lo_abs = lo_dev < 0 ? Rational(-lo_dev) : lo_dev;
            const Rational hi_abs = hi_dev < 0 ? Rational(-hi_dev) : hi_dev;
            if (std::max(lo_abs, hi_abs) > half_tolerance) {
                ok = false;
                if (std::min(lo_abs, hi_abs) > half_tolerance) {
                    ++failures;
                } else {
                    ++inconclusive;
                }
            }
        }

        csv << j << "," << to_decimal(lag) << "," << to_decimal(corr.lo) << ","
            << to_decimal(corr.hi) << "," << to_decimal(defect_lo) << "," << to_decimal(defect_hi)
            << "," << expected << "," << (ok ? "yes" : "no") << "\n";
    }

    out.csv = csv.str();
    out.verdict = failures > 0 ? Verdict::Fail
                               : (inconclusive > 0 ? Verdict::Inconclusive : Verdict::Pass);
    std::ostringstream summary;
    summary << "rigidity over " << stages.size() << " stages, mu(A) = " << to_decimal(mu) << ": "
            << verdict_name(out.verdict) << " (" << failures << " failed, " << inconclusive
            << " inconclusive)";
    out.summary = summary.str();
    return out;
}

VerifyOutput mixing_report_output(const MixingReport& report) {
    VerifyOutput out;
    std::ostringstream csv;
    csv << "lag,lo,hi,stage_used,beyond_cutoff,verdict\n";
    for (const MixingLagRow& row : report.rows) {
        csv << to_decimal(row.corr.lag) << "," << to_decimal(row.corr.lo) << ","
            << to_decimal(row.corr.hi) << "," << row.corr.stage_used << ","
            << (row.beyond_cutoff ? "yes" : "no") << "," << verdict_name(row.verdict) << "\n";
    }
    out.csv = csv.str();
    out.verdict = report.verdict;
    std::ostringstream summary;
    summary << "mixing along " << report.rows.size() << " lags, cutoff " << to_decimal(report.cutoff)
            << ", target " << to_decimal(report.target) << ": " << verdict_name(report.verdict)
            << " (" << report.checked << " beyond cutoff, " << report.failed << " failed, "
            << report.inconclusive << " inconclusive)";
    out.summary = summary.str();
    return out;
}

VerifyOutput kappa_report_output(const KappaReport& report) {
    VerifyOutput out;
    std::ostringstream csv;
    csv << "lag,kappa_lo,kappa_hi,exact\n";
    for (const KappaRow& row : report.rows) {
        csv << to_decimal(row.lag) << "," << to_decimal(row.lo) << "," << to_decimal(row.hi) << ","
            << (row.exact ? "yes" : "no") << "\n";
    }
    out.csv = csv.str();
    out.verdict = report.converged ? Verdict::Pass : Verdict::Inconclusive;
    std::ostringstream summary;
    summary << "kappa over " << report.rows.size() << " lags, mu(X) = "
            << to_decimal(report.total_measure) << ", last-3 spread "
            << format_double17(to_double_nearest(report.spread)) << ": "
            << (report.converged ? "converged" : "not converged");
    out.summary = summary.str();
    return out;
}

VerifyOutput sp_report(const ConstructionSchedule& schedule, const LevelSet& a, const LevelSet& b,
                       int J, const BigInt& s_max, int p_max, int64_t guard) {
    std::vector<BigInt> heights;
    for (int j = 1; j <= schedule.stages(); ++j) heights.push_back(schedule.height(j));

    const std::vector<CorrelationResult> sweep = correlation_bruteforce_sweep(schedule, a, b, J, guard);
    CorrelationEvaluator eval(schedule, a, b);
    const int n0 = eval.base_stage();
    const BigInt cutoff =
        n0 + 1 <= schedule.stages() ? schedule.height(n0 + 1) : schedule.height(schedule.stages());

    VerifyOutput out;
    std::ostringstream csv;
    csv << "lag,lo,hi,decomposition,ok\n";

    int positive = 0, decomposed = 0, failures = 0, inconclusive = 0;
    BigInt max_s(0);
    int max_p = 0;
    for (size_t m = 1; m < sweep.size(); ++m) {
        const CorrelationResult& r = sweep[m];
        const auto form = sp_decompose(r.lag, heights, s_max, p_max);
        bool ok = true;
        if (r.lo > 0) {
            ++positive;
            ok = form.has_value();
            if (ok) {
                ++decomposed;
                const BigInt abs_s = rankone::abs(form->residual);
                if (abs_s > max_s) max_s = abs_s;
                max_p = std::max(max_p, form->terms());
            } else {
                ++failures;
            }
        } else if (!form.has_value() && r.lag >= cutoff) {
            // no decomposition: correlation must be exactly 0
            if (r.hi == 0) {
                ok = true;
            } else {
                const CorrelationResult refined = eval.refine(r.lag, Rational(0));
                if (refined.exact() && refined.lo == 0) {
                    ok = true;
                } else if (refined.lo > 0) {
                    ok = false;
                    ++failures;
                } else {
                    ok = false;
                    ++inconclusive;
                }
            }
        }
        if (r.lo > 0 || !ok || !form.has_value()) {
            csv << to_decimal(r.lag) << "," << to_decimal(r.lo) << "," << to_decimal(r.hi) << ","
                << (form ? form->render(heights) : "none") << "," << (ok ? "yes" : "no") << "\n";
        }
    }

    out.csv = csv.str();
    out.verdict = failures > 0 ? Verdict::Fail
                               : (inconclusive > 0 ? Verdict::Inconclusive : Verdict::Pass);
    std::ostringstream summary;
    summary << "sp sweep below h_" << J << " = " << to_decimal(schedule.height(J)) << ": "
            << positive << " positive lags, " << decomposed << " decomposed, cutoff "
            << to_decimal(cutoff) << ", observed max |s| = " << to_decimal(max_s)
            << ", max p = " << max_p << ": " << verdict_name(out.verdict);
    out.summary = summary.str();
    return out;
}

VerifyOutput suspension_report(const ConstructionSchedule& schedule, const LevelSet& a,
                               const LevelSet& b, const std::vector<int>& rigidity_stages,
                               const std::vector<BigInt>& mixing_lags,
                               const SuspensionCheckConfig& cfg) {
    const InheritanceReport report = suspension_inheritance_report(schedule, a, cfg.k, b, cfg.n,
                                                                   rigidity_stages, mixing_lags);

    VerifyOutput out;
    std::ostringstream csv;
    csv << "lag,k,n,analytic_prob,mc_freq,ci_lo,ci_hi\n";
    // Hoeffding 99% band around the empirical frequency.
    const double eps =
        std::sqrt(std::log(2.0 / 0.01) / (2.0 * static_cast<double>(cfg.samples)));

    bool mc_fail = false;
    uint64_t row_seed = cfg.seed;
    // Rigidity rows pit C_{A,k} against its own shift, mixing rows against B.
    auto emit = [&](const InheritanceRow& row, const LevelSet& second) {
        double analytic = row.c_exact ? row.joint.value() : -1.0;
        double freq = -1.0, lo = -1.0, hi = -1.0;
        if (row.c_exact) {
            const JointDistribution dist = sample_joint_counts(
                schedule, a, second, row.lag, schedule.stages(), cfg.samples, row_seed,
                JointSampleMode::ThreeRegion);
            freq = dist.frequency(row.k, row.n);
            lo = std::max(0.0, freq - eps);
            hi = std::min(1.0, freq + eps);
            if (analytic < lo || analytic > hi) mc_fail = true;
        }
        ++row_seed;
        csv << to_decimal(row.lag) << "," << row.k << "," << row.n << ","
            << format_double17(analytic) << "," << format_double17(freq) << ","
            << format_double17(lo) << "," << format_double17(hi) << "\n";
    };

    for (const InheritanceRow& row : report.rigidity_rows) emit(row, a);
    for (const InheritanceRow& row : report.mixing_rows) emit(row, b);

    out.csv = csv.str();
    out.verdict = mc_fail ? Verdict::Fail : report.verdict;
    std::ostringstream summary;
    summary << report.summary << "; monte carlo " << cfg.samples << " samples seed " << cfg.seed
            << (mc_fail ? ": MC MISMATCH" : ": MC within 99% band");
    out.summary = summary.str();
    return out;
}

std::string spectral_csv(const SpectralSequence& seq) {
    std::ostringstream out;
    out << "m,coefficient_numerator,coefficient_denominator,float\n";
    for (const SpectralCoefficient& c : seq.coeffs) {
        const Rational mid = c.midpoint();
        out << to_decimal(c.lag) << "," << to_decimal(BigInt(mid.get_num())) << ","
            << to_decimal(BigInt(mid.get_den())) << "," << format_double17(to_double_nearest(mid))
            << "\n";
    }
    return out.str();
}

std::string fejer_csv(const FejerDensity& density) {
    std::ostringstream out;
    out << "theta,density\n";
    for (const auto& [theta, value] : density.points) {
        out << format_double17(theta) << "," << format_double17(value) << "\n";
    }
    return out.str();
}

VerifyOutput spectral_report(const ConstructionSchedule& schedule, const LevelSet& a,
                             int max_lag, int grid_points, int psd_trials, uint64_t seed) {
    std::vector<BigInt> lags;
    for (int m = 0; m <= max_lag; ++m) lags.emplace_back(m);
    const SpectralSequence seq = spectral_coefficients(schedule, a, lags);

    VerifyOutput out;
    int failures = 0, inconclusive = 0;
    std::ostringstream notes;

    const SpectralCoefficient* zero = seq.find(BigInt(0));
    if (zero == nullptr || !zero->exact || zero->lo != 1) {
        ++failures;
        notes << "sigma_hat(0) != 1; ";
    }
    for (const SpectralCoefficient& c : seq.coeffs) {
        if (c.lo < 0 || c.hi > 1) {
            ++failures;
            notes << "coefficient at lag " << to_decimal(c.lag) << " outside [0,1]; ";
        }
        if (!c.exact) ++inconclusive;
    }

    bool fejer_ok = true;
    try {
        fejer_density(seq, max_lag, grid_points);
    } catch (const std::exception& e) {
        fejer_ok = false;
        ++failures;
        notes << e.what() << "; ";
    }

    RandomStream rng(seed, 7);
    int psd_ok = 0;
    for (int t = 0; t < psd_trials; ++t) {
        std::vector<BigInt> minor;
        const int d = 2 + static_cast<int>(rng.uniform_below(5));  // 2..6
        for (int i = 0; i < d; ++i) {
            minor.emplace_back(static_cast<long>(rng.uniform_below(static_cast<uint64_t>(max_lag / 2 + 1))));
        }
        std::sort(minor.begin(), minor.end());
        minor.erase(std::unique(minor.begin(), minor.end()), minor.end());
        if (toeplitz_minor_psd(schedule, a, minor)) {
            ++psd_ok;
        } else {
            ++failures;
            notes << "Toeplitz minor not PSD at trial " << t << "; ";
        }
    }

    out.csv = spectral_csv(seq);
    out.verdict = failures > 0 ? Verdict::Fail
                               : (inconclusive > 0 ? Verdict::Inconclusive : Verdict::Pass);
    std::ostringstream summary;
    summary << "spectral coefficients through lag " << max_lag << ", Fejér "
            << (fejer_ok ? "nonnegative" : "NEGATIVE") << ", PSD minors " << psd_ok << "/"
            << psd_trials << ": " << verdict_name(out.verdict);
    if (failures > 0) summary << " [" << notes.str() << "]";
    out.summary = summary.str();
    return out;
}

}  // namespace rankone
