#include "rankone/textio.hpp"

#include <fstream>
#include <sstream>

namespace rankone {

namespace {

constexpr const char* kScheduleHeader = "r1lab-schedule v1";
constexpr const char* kMixingHeader = "r1lab-mixing-spec v1";
constexpr size_t kNumbersPerLine = 16;

std::vector<std::string> split_tokens(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

struct LineReader {
    std::vector<std::string> lines;
    size_t pos = 0;

    explicit LineReader(const std::string& text) {
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) lines.push_back(line);
        while (!lines.empty() && lines.back().empty()) lines.pop_back();
    }

    bool done() const { return pos >= lines.size(); }
    const std::string& peek() const {
        if (done()) throw ParseError("unexpected end of file");
        return lines[pos];
    }
    std::string next() {
        std::string l = peek();
        ++pos;
        return l;
    }
};

BigInt want_big(const std::vector<std::string>& toks, size_t i, const std::string& ctx) {
    if (i >= toks.size()) throw ParseError(ctx + ": missing value");
    return parse_bigint(toks[i]);
}

int want_int(const std::vector<std::string>& toks, size_t i, const std::string& ctx) {
    const BigInt v = want_big(toks, i, ctx);
    const auto small = to_i64(v);
    if (!small || *small > INT32_MAX || *small < INT32_MIN) {
        throw ParseError(ctx + ": value out of range");
    }
    return static_cast<int>(*small);
}

void emit_number_lines(std::ostringstream& out, const std::string& key,
                       const std::vector<BigInt>& values) {
    for (size_t i = 0; i < values.size(); i += kNumbersPerLine) {
        out << key;
        for (size_t j = i; j < values.size() && j < i + kNumbersPerLine; ++j) {
            out << " " << to_decimal(values[j]);
        }
        out << "\n";
    }
}

}  // namespace

const char* generator_kind_name(GeneratorSpec::Kind k) {
    switch (k) {
        case GeneratorSpec::Kind::RigidMixing: return "rigid-mixing";
        case GeneratorSpec::Kind::TwoColumn: return "two-column";
        case GeneratorSpec::Kind::SubsetHeights: return "subset-heights";
        case GeneratorSpec::Kind::Staircase: return "staircase";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Schedule files

namespace {

SpacerSchedule parse_cut_spacers(const std::vector<std::string>& toks, size_t at, int64_t r) {
    const std::string& kind = toks.at(at);
    if (kind == "explicit") {
        std::vector<BigInt> entries;
        for (size_t i = at + 1; i < toks.size(); ++i) entries.push_back(parse_bigint(toks[i]));
        if (static_cast<int64_t>(entries.size()) != r) {
            throw ParseError("explicit spacer list of length " + std::to_string(entries.size()) +
                             " does not match r = " + std::to_string(r));
        }
        return SpacerSchedule::explicit_list(std::move(entries));
    }
    if (kind == "last-column") {
        if (toks.size() != at + 2) throw ParseError("last-column takes one value");
        return SpacerSchedule::last_column(parse_bigint(toks[at + 1]));
    }
    if (kind == "two-column") {
        if (toks.size() != at + 2) throw ParseError("two-column takes one value");
        return SpacerSchedule::two_column(parse_bigint(toks[at + 1]));
    }
    if (kind == "staircase") {
        if (toks.size() != at + 2) throw ParseError("staircase takes one value");
        return SpacerSchedule::staircase(*to_i64(parse_bigint(toks[at + 1])));
    }
    if (kind == "repeated-staircase") {
        if (toks.size() != at + 3) throw ParseError("repeated-staircase takes N and q");
        return SpacerSchedule::repeated_staircase(*to_i64(parse_bigint(toks[at + 1])),
                                                  *to_i64(parse_bigint(toks[at + 2])));
    }
    throw ParseError("unknown spacer kind '" + kind + "'");
}

void serialize_cut(std::ostringstream& out, const StageRecord& rec) {
    out << "cut " << rec.index << " r " << rec.cuts << " ";
    switch (rec.spacers.kind()) {
        case SpacerSchedule::Kind::Explicit: {
            out << "explicit";
            for (const BigInt& e : rec.spacers.explicit_entries()) out << " " << to_decimal(e);
            break;
        }
        case SpacerSchedule::Kind::LastColumn:
            out << "last-column " << to_decimal(rec.spacers.single_spacer());
            break;
        case SpacerSchedule::Kind::TwoColumn:
            out << "two-column " << to_decimal(rec.spacers.single_spacer());
            break;
        case SpacerSchedule::Kind::Staircase:
            out << "staircase " << rec.spacers.staircase_q();
            break;
        case SpacerSchedule::Kind::RepeatedStaircase:
            out << "repeated-staircase " << rec.spacers.repetitions() << " "
                << rec.spacers.staircase_q();
            break;
    }
    out << "\n";
}

GeneratorSpec parse_generator_payload(LineReader& reader, GeneratorSpec::Kind kind, int stages) {
    GeneratorSpec gen;
    gen.kind = kind;
    gen.stages = stages;

    bool have_horizon = false;
    bool have_attested = false;
    std::vector<BigInt> elements;

    while (!reader.done() && reader.peek() != "end") {
        const auto toks = split_tokens(reader.next());
        if (toks.empty()) throw ParseError("blank line inside schedule body");
        const std::string& key = toks[0];

        if (key == "family" &&
            (kind == GeneratorSpec::Kind::RigidMixing || kind == GeneratorSpec::Kind::TwoColumn)) {
            if (toks.size() != 4) throw ParseError("family takes a, L, multiplicity");
            IntervalFamilyEntry e;
            e.a = parse_bigint(toks[1]);
            e.L = parse_bigint(toks[2]);
            e.multiplicity = want_int(toks, 3, "family multiplicity");
            if (kind == GeneratorSpec::Kind::RigidMixing) {
                gen.mixing.kind = MixingSetSpec::Kind::IntervalFamily;
                gen.mixing.family.entries.push_back(std::move(e));
            } else {
                gen.family.entries.push_back(std::move(e));
            }
        } else if (key == "horizon" && kind == GeneratorSpec::Kind::RigidMixing) {
            gen.mixing.kind = MixingSetSpec::Kind::ExplicitSet;
            gen.mixing.set.horizon = want_big(toks, 1, "horizon");
            have_horizon = true;
        } else if (key == "attested" && kind == GeneratorSpec::Kind::RigidMixing) {
            if (toks.size() != 2 || (toks[1] != "true" && toks[1] != "false")) {
                throw ParseError("attested takes true|false");
            }
            gen.mixing.set.zero_density_attested = toks[1] == "true";
            have_attested = true;
        } else if (key == "elements" && kind == GeneratorSpec::Kind::RigidMixing) {
            for (size_t i = 1; i < toks.size(); ++i) elements.push_back(parse_bigint(toks[i]));
        } else if (key == "growth" && kind == GeneratorSpec::Kind::SubsetHeights) {
            gen.growth = want_big(toks, 1, "growth");
        } else if (key == "heights" && kind == GeneratorSpec::Kind::SubsetHeights) {
            if (toks.size() == 2 && toks[1] == "all") {
                gen.pool_all = true;
            } else {
                for (size_t i = 1; i < toks.size(); ++i) gen.pool.push_back(parse_bigint(toks[i]));
            }
        } else if (key == "plan" && kind == GeneratorSpec::Kind::Staircase) {
            StaircasePlanEntry entry;
            if (toks.size() == 2 && toks[1] == "mixing") {
                entry.mixing = true;
            } else if (toks.size() == 4 && toks[1] == "rigid") {
                entry.reps = *to_i64(want_big(toks, 2, "plan rigid N"));
                entry.q = *to_i64(want_big(toks, 3, "plan rigid q"));
            } else {
                throw ParseError("plan takes 'mixing' or 'rigid N q'");
            }
            gen.plan.push_back(entry);
        } else {
            throw ParseError("unknown key '" + key + "' in generator body");
        }
    }

    if (kind == GeneratorSpec::Kind::RigidMixing &&
        gen.mixing.kind == MixingSetSpec::Kind::ExplicitSet) {
        if (!have_horizon || !have_attested) {
            throw ParseError("explicit-set generator needs horizon and attested lines");
        }
        gen.mixing.set.elements = std::move(elements);
    } else if (!elements.empty()) {
        throw ParseError("elements lines only belong to an explicit-set generator");
    }
    return gen;
}

ConstructionSchedule materialize_generator(const GeneratorSpec& gen, const BigInt& h1,
                                           const Rational& w1) {
    SynthesisOptions opt;
    opt.stages = gen.stages;
    opt.h1 = h1;
    opt.w1 = w1;
    switch (gen.kind) {
        case GeneratorSpec::Kind::RigidMixing:
            return synthesize_rigid_mixing(gen.mixing, opt).schedule;
        case GeneratorSpec::Kind::TwoColumn:
            return synthesize_two_column(gen.family, opt).schedule;
        case GeneratorSpec::Kind::SubsetHeights:
            opt.subset_growth_factor = gen.growth;
            return synthesize_subset_heights(gen.pool, gen.pool_all, opt).schedule;
        case GeneratorSpec::Kind::Staircase:
            return build_staircase_schedule(gen.plan, opt).schedule;
    }
    throw ParseError("unhandled generator kind");
}

}  // namespace

ScheduleDocument parse_schedule_text(const std::string& text) {
    LineReader reader(text);
    if (reader.next() != kScheduleHeader) {
        throw ParseError(std::string("schedule file must start with '") + kScheduleHeader + "'");
    }

    auto mode_toks = split_tokens(reader.next());
    if (mode_toks.size() != 2 || mode_toks[0] != "mode" ||
        (mode_toks[1] != "infinite" && mode_toks[1] != "finite")) {
        throw ParseError("expected 'mode infinite|finite'");
    }
    const bool finite = mode_toks[1] == "finite";

    std::optional<Rational> declared_total;
    bool total_running = false;
    if (finite) {
        auto toks = split_tokens(reader.next());
        if (toks.size() != 2 || toks[0] != "total") {
            throw ParseError("finite mode needs 'total <rational>|running'");
        }
        if (toks[1] == "running") {
            total_running = true;
        } else {
            declared_total = parse_rational(toks[1]);
        }
    }

    auto h1_toks = split_tokens(reader.next());
    if (h1_toks.size() != 2 || h1_toks[0] != "h1") throw ParseError("expected 'h1 <int>'");
    const BigInt h1 = parse_bigint(h1_toks[1]);

    auto w1_toks = split_tokens(reader.next());
    if (w1_toks.size() != 2 || w1_toks[0] != "w1") throw ParseError("expected 'w1 <rational>'");
    const Rational w1 = parse_rational(w1_toks[1]);

    const auto body_first = split_tokens(reader.peek());
    if (!body_first.empty() && body_first[0] == "generator") {
        auto gen_toks = split_tokens(reader.next());
        if (gen_toks.size() != 2) throw ParseError("generator takes one name");
        GeneratorSpec::Kind kind;
        if (gen_toks[1] == "rigid-mixing") {
            kind = GeneratorSpec::Kind::RigidMixing;
        } else if (gen_toks[1] == "two-column") {
            kind = GeneratorSpec::Kind::TwoColumn;
        } else if (gen_toks[1] == "subset-heights") {
            kind = GeneratorSpec::Kind::SubsetHeights;
        } else if (gen_toks[1] == "staircase") {
            kind = GeneratorSpec::Kind::Staircase;
        } else {
            throw ParseError("unknown generator '" + gen_toks[1] + "'");
        }
        auto stages_toks = split_tokens(reader.next());
        if (stages_toks.size() != 2 || stages_toks[0] != "stages") {
            throw ParseError("generator needs 'stages <n>'");
        }
        const int stages = want_int(stages_toks, 1, "stages");

        GeneratorSpec gen = parse_generator_payload(reader, kind, stages);
        if (reader.done() || reader.next() != "end") throw ParseError("missing 'end' line");
        if (!reader.done()) throw ParseError("trailing content after 'end'");
        if (finite != (kind == GeneratorSpec::Kind::Staircase)) {
            throw ParseError("staircase generators are finite mode; the others are infinite");
        }

        ScheduleDocument doc{materialize_generator(gen, h1, w1), std::move(gen), total_running};
        return doc;
    }

    ConstructionSchedule schedule(h1, w1,
                                  finite ? ConstructionSchedule::Mode::Finite
                                         : ConstructionSchedule::Mode::Infinite,
                                  declared_total);
    int expected = 1;
    while (!reader.done() && reader.peek() != "end") {
        const auto toks = split_tokens(reader.next());
        if (toks.size() < 5 || toks[0] != "cut") {
            throw ParseError("expected 'cut <j> r <r> <spacers...>' or 'end'");
        }
        if (want_int(toks, 1, "cut index") != expected) {
            throw ParseError("cut records must be consecutive from 1");
        }
        if (toks[2] != "r") throw ParseError("expected 'r' after the cut index");
        const BigInt r_big = want_big(toks, 3, "cut count");
        const auto r = to_i64(r_big);
        if (!r) throw ParseError("cut count out of range");
        schedule.advance_stage(*r, parse_cut_spacers(toks, 4, *r));
        ++expected;
    }
    if (reader.done() || reader.next() != "end") throw ParseError("missing 'end' line");
    if (!reader.done()) throw ParseError("trailing content after 'end'");
    return ScheduleDocument{std::move(schedule), std::nullopt, total_running};
}

std::string serialize_schedule(const ScheduleDocument& doc) {
    std::ostringstream out;
    out << kScheduleHeader << "\n";
    const bool finite = doc.schedule.mode() == ConstructionSchedule::Mode::Finite;
    out << "mode " << (finite ? "finite" : "infinite") << "\n";
    if (finite) {
        if (doc.schedule.declared_total()) {
            out << "total " << to_decimal(*doc.schedule.declared_total()) << "\n";
        } else {
            out << "total running\n";
        }
    }
    out << "h1 " << to_decimal(doc.schedule.height(1)) << "\n";
    out << "w1 " << to_decimal(doc.schedule.width(1)) << "\n";

    if (doc.generator) {
        const GeneratorSpec& gen = *doc.generator;
        out << "generator " << generator_kind_name(gen.kind) << "\n";
        out << "stages " << gen.stages << "\n";
        switch (gen.kind) {
            case GeneratorSpec::Kind::RigidMixing:
                if (gen.mixing.kind == MixingSetSpec::Kind::IntervalFamily) {
                    for (const auto& e : gen.mixing.family.entries) {
                        out << "family " << to_decimal(e.a) << " " << to_decimal(e.L) << " "
                            << e.multiplicity << "\n";
                    }
                } else {
                    out << "horizon " << to_decimal(gen.mixing.set.horizon) << "\n";
                    out << "attested " << (gen.mixing.set.zero_density_attested ? "true" : "false")
                        << "\n";
                    emit_number_lines(out, "elements", gen.mixing.set.elements);
                }
                break;
            case GeneratorSpec::Kind::TwoColumn:
                for (const auto& e : gen.family.entries) {
                    out << "family " << to_decimal(e.a) << " " << to_decimal(e.L) << " "
                        << e.multiplicity << "\n";
                }
                break;
            case GeneratorSpec::Kind::SubsetHeights:
                out << "growth " << to_decimal(gen.growth) << "\n";
                if (gen.pool_all) {
                    out << "heights all\n";
                } else {
                    emit_number_lines(out, "heights", gen.pool);
                }
                break;
            case GeneratorSpec::Kind::Staircase:
                for (const auto& p : gen.plan) {
                    if (p.mixing) {
                        out << "plan mixing\n";
                    } else {
                        out << "plan rigid " << p.reps << " " << p.q << "\n";
                    }
                }
                break;
        }
    } else {
        for (int j = 1; j <= doc.schedule.cut_records(); ++j) {
            serialize_cut(out, doc.schedule.cut(j));
        }
    }
    out << "end\n";
    return out.str();
}

ScheduleDocument explicit_document(ConstructionSchedule schedule, bool total_running) {
    return ScheduleDocument{std::move(schedule), std::nullopt, total_running};
}

// ---------------------------------------------------------------------------
// Mixing-set spec files

MixingSetSpec parse_mixing_spec_text(const std::string& text) {
    LineReader reader(text);
    if (reader.next() != kMixingHeader) {
        throw ParseError(std::string("mixing spec must start with '") + kMixingHeader + "'");
    }
    auto kind_toks = split_tokens(reader.next());
    if (kind_toks.size() != 2 || kind_toks[0] != "kind") {
        throw ParseError("expected 'kind interval-family|explicit-set'");
    }

    MixingSetSpec spec;
    if (kind_toks[1] == "interval-family") {
        spec.kind = MixingSetSpec::Kind::IntervalFamily;
        while (!reader.done() && reader.peek() != "end") {
            const auto toks = split_tokens(reader.next());
            if (toks.size() != 4 || toks[0] != "entry") {
                throw ParseError("expected 'entry <a> <L> <multiplicity>'");
            }
            IntervalFamilyEntry e;
            e.a = parse_bigint(toks[1]);
            e.L = parse_bigint(toks[2]);
            e.multiplicity = want_int(toks, 3, "entry multiplicity");
            spec.family.entries.push_back(std::move(e));
        }
    } else if (kind_toks[1] == "explicit-set") {
        spec.kind = MixingSetSpec::Kind::ExplicitSet;
        bool have_horizon = false;
        while (!reader.done() && reader.peek() != "end") {
            const auto toks = split_tokens(reader.next());
            if (toks.empty()) throw ParseError("blank line in mixing spec");
            if (toks[0] == "horizon") {
                spec.set.horizon = want_big(toks, 1, "horizon");
                have_horizon = true;
            } else if (toks[0] == "attested") {
                if (toks.size() != 2 || (toks[1] != "true" && toks[1] != "false")) {
                    throw ParseError("attested takes true|false");
                }
                spec.set.zero_density_attested = toks[1] == "true";
            } else if (toks[0] == "elements") {
                for (size_t i = 1; i < toks.size(); ++i) {
                    spec.set.elements.push_back(parse_bigint(toks[i]));
                }
            } else {
                throw ParseError("unknown key '" + toks[0] + "' in mixing spec");
            }
        }
        if (!have_horizon) throw ParseError("explicit-set spec needs a horizon");
    } else {
        throw ParseError("unknown mixing spec kind '" + kind_toks[1] + "'");
    }

    if (reader.done() || reader.next() != "end") throw ParseError("missing 'end' line");
    if (!reader.done()) throw ParseError("trailing content after 'end'");
    spec.validate();
    return spec;
}

std::string serialize_mixing_spec(const MixingSetSpec& spec) {
    std::ostringstream out;
    out << kMixingHeader << "\n";
    if (spec.kind == MixingSetSpec::Kind::IntervalFamily) {
        out << "kind interval-family\n";
        for (const auto& e : spec.family.entries) {
            out << "entry " << to_decimal(e.a) << " " << to_decimal(e.L) << " " << e.multiplicity
                << "\n";
        }
    } else {
        out << "kind explicit-set\n";
        out << "horizon " << to_decimal(spec.set.horizon) << "\n";
        out << "attested " << (spec.set.zero_density_attested ? "true" : "false") << "\n";
        emit_number_lines(out, "elements", spec.set.elements);
    }
    out << "end\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// Level sets

LevelSet parse_level_set(const std::string& text, const ConstructionSchedule& schedule) {
    const size_t colon = text.find(':');
    if (colon == std::string::npos) {
        throw ParseError("level set must look like '<stage>:<ranges>' or '<stage>:all'");
    }
    const int stage = static_cast<int>(*to_i64(parse_bigint(text.substr(0, colon))));
    const std::string body = text.substr(colon + 1);
    if (body == "all") return LevelSet::whole_stage(schedule, stage);

    std::vector<LevelSet::Range> ranges;
    std::istringstream in(body);
    std::string piece;
    while (std::getline(in, piece, ',')) {
        if (piece.empty()) throw ParseError("empty range in level set '" + text + "'");
        const size_t dash = piece.find('-');
        if (dash == std::string::npos) {
            BigInt v = parse_bigint(piece);
            ranges.emplace_back(v, v + 1);
        } else {
            BigInt lo = parse_bigint(piece.substr(0, dash));
            BigInt hi = parse_bigint(piece.substr(dash + 1));
            if (hi < lo) throw ParseError("descending range in level set '" + text + "'");
            ranges.emplace_back(std::move(lo), hi + 1);
        }
    }
    LevelSet set(stage, std::move(ranges));
    set.validate_against(schedule);
    return set;
}

std::string serialize_level_set(const LevelSet& set) {
    std::ostringstream out;
    out << set.stage() << ":";
    bool first = true;
    for (const auto& r : set.ranges()) {
        if (!first) out << ",";
        first = false;
        if (r.second == r.first + 1) {
            out << to_decimal(r.first);
        } else {
            out << to_decimal(r.first) << "-" << to_decimal(BigInt(r.second - 1));
        }
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Files

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << content;
}

}  // namespace rankone
