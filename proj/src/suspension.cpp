#include "rankone/suspension.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rankone/rng.hpp"

namespace rankone {

double ExpTerm::value() const {
    return to_double_nearest(coeff) * std::exp(to_double_nearest(exponent));
}

ExpTerm poisson_pmf(const Rational& mean, int64_t k) {
    if (mean < 0 || k < 0) throw std::invalid_argument("poisson pmf needs mean, k >= 0");
    if (mean == 0) return ExpTerm{Rational(k == 0 ? 1 : 0), Rational(0)};
    const Rational coeff =
        rational_pow(mean, static_cast<unsigned long>(k)) / factorial(static_cast<unsigned long>(k));
    return ExpTerm{coeff, -mean};
}

ExpTerm poisson_event_prob(const ConstructionSchedule& schedule,
                           const std::vector<ConfigurationEvent>& events) {
    if (events.empty()) throw std::invalid_argument("need at least one configuration event");
    int common = 1;
    for (const ConfigurationEvent& e : events) {
        e.region.validate_against(schedule);
        if (e.region.empty()) throw std::invalid_argument("event regions need positive measure");
        if (e.count < 0) throw std::invalid_argument("event counts must be >= 0");
        common = std::max(common, e.region.stage());
    }
    std::vector<LevelSet> lifted;
    lifted.reserve(events.size());
    for (const ConfigurationEvent& e : events) lifted.push_back(e.region.lifted(schedule, common));
    for (size_t i = 0; i < lifted.size(); ++i) {
        for (size_t j = i + 1; j < lifted.size(); ++j) {
            if (!lifted[i].disjoint_with(lifted[j])) {
                throw std::invalid_argument("event regions must be pairwise disjoint");
            }
        }
    }

    ExpTerm out{Rational(1), Rational(0)};
    for (size_t i = 0; i < events.size(); ++i) {
        out = out * poisson_pmf(lifted[i].measure(schedule), events[i].count);
    }
    return out;
}

ExpTerm joint_event_prob_from_c(const Rational& mu_a, const Rational& mu_b, const Rational& c,
                                int64_t k, int64_t n) {
    if (k < 0 || n < 0) throw std::invalid_argument("counts must be >= 0");
    if (c < 0 || c > mu_a || c > mu_b) {
        throw std::logic_error("correlation " + to_decimal(c) +
                               " outside [0, min(mu(A), mu(B))]: engine inconsistency");
    }
    const Rational rest_a = mu_a - c;
    const Rational rest_b = mu_b - c;

    Rational coeff(0);
    for (int64_t t = 0; t <= std::min(k, n); ++t) {
        // c^t/t! (mu_a-c)^{k-t}/(k-t)! (mu_b-c)^{n-t}/(n-t)!; 0^0 = 1 keeps the
        // degenerate endpoints exact.
        if (c == 0 && t > 0) break;
        if (rest_a == 0 && k - t > 0) continue;
        if (rest_b == 0 && n - t > 0) continue;
        Rational term = rational_pow(c, static_cast<unsigned long>(t)) /
                        factorial(static_cast<unsigned long>(t));
        term *= rational_pow(rest_a, static_cast<unsigned long>(k - t)) /
                factorial(static_cast<unsigned long>(k - t));
        term *= rational_pow(rest_b, static_cast<unsigned long>(n - t)) /
                factorial(static_cast<unsigned long>(n - t));
        coeff += term;
    }
    return ExpTerm{coeff, -(mu_a + mu_b - c)};
}

ExpTerm joint_shifted_event_prob(const ConstructionSchedule& schedule, const LevelSet& a,
                                 int64_t k, const LevelSet& b, int64_t n, const BigInt& m) {
    CorrelationEvaluator eval(schedule, a, b);
    const Rational c = eval.exact_value(m);
    return joint_event_prob_from_c(eval.measure_a(), eval.measure_b(), c, k, n);
}

double JointDistribution::frequency(int64_t k, int64_t n) const {
    auto it = counts.find({k, n});
    if (it == counts.end() || samples == 0) return 0.0;
    return static_cast<double>(it->second) / static_cast<double>(samples);
}

JointDistribution sample_joint_counts(const ConstructionSchedule& schedule, const LevelSet& a,
                                      const LevelSet& b, const BigInt& m, int J,
                                      uint64_t samples, uint64_t seed, JointSampleMode mode) {
    if (samples < 1) throw std::invalid_argument("sampling needs samples >= 1");
    a.validate_against(schedule);
    b.validate_against(schedule);

    JointDistribution dist;
    dist.samples = samples;
    RandomStream rng(seed, 1);

    if (mode == JointSampleMode::ThreeRegion) {
        CorrelationEvaluator eval(schedule, a, b);
        const Rational c = eval.exact_value(m);
        const double lam_t = to_double_nearest(c);
        const double lam_a = to_double_nearest(eval.measure_a() - c);
        const double lam_b = to_double_nearest(eval.measure_b() - c);
        for (uint64_t i = 0; i < samples; ++i) {
            const int64_t t = rng.poisson(lam_t);
            const int64_t x = t + rng.poisson(lam_a);
            const int64_t y = t + rng.poisson(lam_b);
            ++dist.counts[{x, y}];
        }
        return dist;
    }

    // Full simulation over the covering positions at stage J.
    const LevelSet a_pos = a.lifted(schedule, J);
    const LevelSet b_pos = b.lifted(schedule, J);
    const BigInt& h = schedule.height(J);
    if (b_pos.min_level() < m) {
        throw std::invalid_argument(
            "lag-" + to_decimal(m) + " preimage of B drops below the stage-" + std::to_string(J) +
            " tower; request a deeper stage or smaller lag");
    }
    if (a_pos.max_level() + m >= h) {
        throw std::invalid_argument("R^m image of A leaves the stage-" + std::to_string(J) +
                                    " tower; request a deeper stage");
    }

    std::vector<LevelSet::Range> cover = a_pos.ranges();
    for (const LevelSet::Range& r : b_pos.ranges()) cover.emplace_back(r.first - m, r.second - m);
    const LevelSet region(J, std::move(cover));
    const BigInt total_levels = region.level_count();
    const double mu_region = to_double_nearest(region.measure(schedule));

    for (uint64_t i = 0; i < samples; ++i) {
        const int64_t points = rng.poisson(mu_region);
        int64_t in_a = 0, in_b = 0;
        for (int64_t p = 0; p < points; ++p) {
            // Uniform level of the covering region, then transport by +m.
            BigInt idx = rng.uniform_below_big(total_levels);
            BigInt position;
            for (const LevelSet::Range& r : region.ranges()) {
                const BigInt len = r.second - r.first;
                if (idx < len) {
                    position = r.first + idx;
                    break;
                }
                idx -= len;
            }
            if (a_pos.contains(position)) ++in_a;
            if (b_pos.contains(position + m)) ++in_b;
        }
        ++dist.counts[{in_a, in_b}];
    }
    return dist;
}

InheritanceReport suspension_inheritance_report(const ConstructionSchedule& schedule,
                                                const LevelSet& a, int64_t k, const LevelSet& b,
                                                int64_t n,
                                                const std::vector<int>& rigidity_stages,
                                                const std::vector<BigInt>& mixing_lags) {
    InheritanceReport report;
    CorrelationEvaluator self(schedule, a, a);
    CorrelationEvaluator cross(schedule, a, b);
    const Rational mu_a = self.measure_a();
    const Rational mu_b = cross.measure_b();
    const ExpTerm marginal_a = poisson_pmf(mu_a, k);
    const ExpTerm marginal_b = poisson_pmf(mu_b, n);

    bool any_fail = false;
    bool any_inconclusive = false;

    for (int j : rigidity_stages) {
        InheritanceRow row;
        row.lag = schedule.height(j);
        row.k = k;
        row.n = k;
        const CorrelationResult corr = self.refine(row.lag, Rational(0));
        row.c = corr.lo;
        row.c_exact = corr.exact();
        if (!row.c_exact) {
            any_inconclusive = true;
            report.rigidity_rows.push_back(std::move(row));
            continue;
        }
        row.joint = joint_event_prob_from_c(mu_a, mu_a, row.c, k, k);
        row.reference = marginal_a;
        row.bound = to_double_nearest(2 * (mu_a - row.c));
        row.abs_error = std::abs(row.joint.value() - row.reference.value());
        if (row.abs_error > row.bound + 1e-12) any_fail = true;
        report.rigidity_rows.push_back(std::move(row));
    }

    for (const BigInt& m : mixing_lags) {
        InheritanceRow row;
        row.lag = m;
        row.k = k;
        row.n = n;
        const CorrelationResult corr = cross.refine(m, Rational(0));
        row.c = corr.lo;
        row.c_exact = corr.exact();
        if (!row.c_exact) {
            any_inconclusive = true;
            report.mixing_rows.push_back(std::move(row));
            continue;
        }
        row.joint = joint_event_prob_from_c(mu_a, mu_b, row.c, k, n);
        row.reference = marginal_a * marginal_b;
        row.exact_match = row.c == 0 && row.joint == row.reference;
        row.abs_error = std::abs(row.joint.value() - row.reference.value());
        if (row.c == 0 && !row.exact_match) any_fail = true;
        report.mixing_rows.push_back(std::move(row));
    }

    report.verdict = any_fail ? Verdict::Fail
                              : (any_inconclusive ? Verdict::Inconclusive : Verdict::Pass);
    std::ostringstream summary;
    summary << "rigidity rows: " << report.rigidity_rows.size()
            << ", mixing rows: " << report.mixing_rows.size() << ", verdict "
            << verdict_name(report.verdict)
            << ". The same correlation sequence governs the spectrally isomorphic Gaussian "
               "system; only the Poisson suspension is computed here.";
    report.summary = summary.str();
    return report;
}

}  // namespace rankone
