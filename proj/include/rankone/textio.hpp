#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rankone/construction.hpp"
#include "rankone/numeric.hpp"
#include "rankone/synthesis.hpp"

namespace rankone {

// A schedule file either lists its cuts explicitly or carries a generator
// directive that the parser materializes through param synthesis. The parsed
// document keeps the directive so serialization round-trips byte-exactly.
struct GeneratorSpec {
    enum class Kind { RigidMixing, TwoColumn, SubsetHeights, Staircase };

    Kind kind = Kind::RigidMixing;
    int stages = 0;
    MixingSetSpec mixing;                  // RigidMixing
    IntervalFamily family;                 // TwoColumn
    BigInt growth;                         // SubsetHeights
    bool pool_all = false;                 // SubsetHeights: pool is all integers
    std::vector<BigInt> pool;              // SubsetHeights
    std::vector<StaircasePlanEntry> plan;  // Staircase
};

const char* generator_kind_name(GeneratorSpec::Kind k);

struct ScheduleDocument {
    ConstructionSchedule schedule;
    std::optional<GeneratorSpec> generator;
    bool total_running = false;  // finite mode without a declared total
};

ScheduleDocument parse_schedule_text(const std::string& text);
std::string serialize_schedule(const ScheduleDocument& doc);

// Explicit-form document for a bare schedule.
ScheduleDocument explicit_document(ConstructionSchedule schedule, bool total_running = false);

MixingSetSpec parse_mixing_spec_text(const std::string& text);
std::string serialize_mixing_spec(const MixingSetSpec& spec);

// "<stage>:<ranges>" where ranges is a comma list of inclusive "a-b" or
// single "a", or the word "all" for the whole stage.
LevelSet parse_level_set(const std::string& text, const ConstructionSchedule& schedule);
std::string serialize_level_set(const LevelSet& set);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace rankone
