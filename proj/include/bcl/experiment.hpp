#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bcl/formula.hpp"
#include "bcl/learner.hpp"

namespace bcl {

enum class Group { Target, Control };

std::string to_string(Group group);
std::optional<Group> group_from_string(const std::string& text);

// One row of the two six-trial designs.  The template formula is written
// over placeholder slots 1..4; instantiation substitutes a random
// bijection of the real variables.  Stored minimum description lengths
// under both languages are cross-checked against engine-computed values.
struct ConceptSpec {
    std::string label;
    std::string template_text;  // concrete syntax over placeholder variables
    int mdl_pxor;
    int mdl_p;
};

const std::vector<ConceptSpec>& sequence_specs(Group group);

// Instantiates the group's six templates, drawing an independent uniform
// random variable bijection per trial.  The per-trial draws depend only
// on (seed, trial), so the concepts the two groups share arrive with
// identical tables under the same seed.
std::vector<TrialConcept> build_sequence(Group group, std::uint64_t seed);

// ---------- observed learning times ----------

struct TimeObservation {
    std::string participant;
    Group group;
    int trial;            // 1..6
    std::string concept_label;  // label from the design above
    double time_s;
};

struct RejectedRow {
    std::size_t line;  // 1-based, header is line 1
    std::string reason;
};

struct ObservedTimes {
    std::vector<TimeObservation> rows;
    std::vector<RejectedRow> rejected;

    int count(Group group) const;
    // Mean and standard error of times per concept label within a group.
    std::map<std::string, std::pair<double, double>> mean_sem_by_concept(Group group) const;
    std::vector<double> times_for(Group group, const std::string& concept_label) const;
};

// Reads the canonical CSV `participant,group,trial,concept,time_s`.
// Malformed rows, unknown labels and nonpositive times are rejected and
// itemized; a duplicate (participant, trial) key or a participant
// appearing in both groups is an error.
ObservedTimes ingest_times(const std::string& path);
ObservedTimes ingest_times_text(const std::string& csv_text);

// ---------- fitting and statistics ----------

enum class FitMode { FixedAlpha, GridAlpha };

struct GroupFit {
    double beta = 0.0;
    double r_squared = 0.0;
    int n_concepts = 0;
    // label -> (observed mean, observed sem, predicted difficulty, predicted time)
    std::map<std::string, std::array<double, 4>> per_concept;
};

struct FitResult {
    double alpha = 0.0;
    FitMode mode = FitMode::FixedAlpha;
    bool shared_beta = false;
    std::map<Group, GroupFit> groups;
};

// Least squares of observed mean learning times against
// beta * (expected_length + alpha * cardinality).  With FixedAlpha the
// trace's difficulties are used as-is; with GridAlpha alpha is scanned
// over [0,3] in steps of 0.01 and chosen to minimize the pooled squared
// error.  beta is fitted per group unless shared_beta is set.
FitResult fit_scale(const std::map<Group, SimulationTrace>& traces, const ObservedTimes& times, FitMode mode,
                    double fixed_alpha, bool shared_beta = false);

std::string fit_to_json(const FitResult& fit);
// Tidy export: group,concept,observed_mean,observed_sem,predicted_difficulty,predicted_time
std::string fit_to_csv(const FitResult& fit);

struct TTestResult {
    double t = 0.0;
    int df = 0;
    double p = 0.0;  // two-sided
    int n_a = 0, n_b = 0;
    double mean_a = 0.0, mean_b = 0.0;
};

// Pooled-variance two-sample t statistic for one concept's learning
// times between the groups.
TTestResult two_sample_t(const ObservedTimes& times, const std::string& concept_label);
TTestResult two_sample_t(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace bcl
