#include "bcl/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>
#include <nlohmann/json.hpp>

namespace bcl {

std::string to_string(Group group) { return group == Group::Target ? "target" : "control"; }

std::optional<Group> group_from_string(const std::string& text) {
    if (text == "target") return Group::Target;
    if (text == "control") return Group::Control;
    return std::nullopt;
}

const std::vector<ConceptSpec>& sequence_specs(Group group) {
    // Placeholder slots follow the design's letters: i,j,k,l -> 1,2,3,4.
    static const std::vector<ConceptSpec> target = {
        {"C1", "x1", 1, 1},
        {"C2x", "(x1 ^ x2)", 3, 7},
        {"C3x", "((x1 ^ x2) ^ x3)", 5, 19},
        {"C4x", "(x3 ^ x4)", 3, 7},
        {"C5", "(x1 & (x2 ^ x3))", 5, 9},
        {"C6", "(x1 & (x2 | x3))", 5, 5},
    };
    static const std::vector<ConceptSpec> control = {
        {"C1", "x1", 1, 1},
        {"C2c", "(x1 | x2)", 3, 3},
        {"C3c", "(x1 | (x2 & x3))", 5, 5},
        {"C4c", "(x3 | x4)", 3, 3},
        {"C5", "(x1 & (x2 ^ x3))", 5, 9},
        {"C6", "(x1 & (x2 | x3))", 5, 5},
    };
    return group == Group::Target ? target : control;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Deterministic across standard libraries: the permutation is decoded
// from a hash of (seed, trial) alone, so shared trials coincide between
// the two groups' sequences.
VariablePermutation trial_permutation(std::uint64_t seed, int trial) {
    std::uint64_t r = splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(trial));
    VariablePermutation perm = kIdentityPermutation;
    for (int i = 3; i >= 1; --i) {
        int j = static_cast<int>(r % static_cast<std::uint64_t>(i + 1));
        r /= static_cast<std::uint64_t>(i + 1);
        std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    }
    return perm;
}

const std::set<std::string>& known_labels() {
    static const std::set<std::string> labels = [] {
        std::set<std::string> s;
        for (Group g : {Group::Target, Group::Control})
            for (const auto& spec : sequence_specs(g)) s.insert(spec.label);
        return s;
    }();
    return labels;
}

}  // namespace

std::vector<TrialConcept> build_sequence(Group group, std::uint64_t seed) {
    std::vector<TrialConcept> sequence;
    const auto& specs = sequence_specs(group);
    for (std::size_t i = 0; i < specs.size(); ++i) {
        TruthTable16 base = parse_formula(specs[i].template_text).eval();
        VariablePermutation perm = trial_permutation(seed, static_cast<int>(i) + 1);
        sequence.push_back({specs[i].label, relabel(base, perm)});
    }
    return sequence;
}

// ---------- observed learning times ----------

int ObservedTimes::count(Group group) const {
    int n = 0;
    for (const auto& r : rows)
        if (r.group == group) ++n;
    return n;
}

std::map<std::string, std::pair<double, double>> ObservedTimes::mean_sem_by_concept(Group group) const {
    std::map<std::string, std::vector<double>> buckets;
    for (const auto& r : rows)
        if (r.group == group) buckets[r.concept_label].push_back(r.time_s);
    std::map<std::string, std::pair<double, double>> out;
    for (const auto& [label, values] : buckets) {
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= static_cast<double>(values.size());
        double var = 0.0;
        for (double v : values) var += (v - mean) * (v - mean);
        double sem = values.size() > 1
                         ? std::sqrt(var / (static_cast<double>(values.size()) - 1.0) /
                                     static_cast<double>(values.size()))
                         : 0.0;
        out[label] = {mean, sem};
    }
    return out;
}

std::vector<double> ObservedTimes::times_for(Group group, const std::string& concept_label) const {
    std::vector<double> out;
    for (const auto& r : rows)
        if (r.group == group && r.concept_label == concept_label) out.push_back(r.time_s);
    return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(field);
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    fields.push_back(field);
    return fields;
}

}  // namespace

ObservedTimes ingest_times_text(const std::string& csv_text) {
    std::istringstream in(csv_text);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty learning-time file");
    {
        auto header = split_csv_line(line);
        const std::vector<std::string> expected = {"participant", "group", "trial", "concept", "time_s"};
        if (std::vector<std::string>(header.begin(), header.end()) != expected)
            throw std::runtime_error("learning-time file must start with header participant,group,trial,concept,time_s");
    }

    ObservedTimes out;
    std::map<std::pair<std::string, int>, std::size_t> seen;  // (participant, trial) -> line
    std::map<std::string, Group> participant_group;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 5) {
            out.rejected.push_back({line_no, "expected 5 fields, got " + std::to_string(fields.size())});
            continue;
        }
        TimeObservation obs;
        obs.participant = fields[0];
        if (obs.participant.empty()) {
            out.rejected.push_back({line_no, "empty participant id"});
            continue;
        }
        auto group = group_from_string(fields[1]);
        if (!group) {
            out.rejected.push_back({line_no, "unknown group '" + fields[1] + "'"});
            continue;
        }
        obs.group = *group;
        try {
            std::size_t pos = 0;
            obs.trial = std::stoi(fields[2], &pos);
            if (pos != fields[2].size()) throw std::invalid_argument("");
        } catch (const std::exception&) {
            out.rejected.push_back({line_no, "trial '" + fields[2] + "' is not an integer"});
            continue;
        }
        if (obs.trial < 1 || obs.trial > 6) {
            out.rejected.push_back({line_no, "trial " + std::to_string(obs.trial) + " out of range 1..6"});
            continue;
        }
        obs.concept_label = fields[3];
        if (!known_labels().count(obs.concept_label)) {
            out.rejected.push_back({line_no, "unknown concept label '" + fields[3] + "'"});
            continue;
        }
        try {
            std::size_t pos = 0;
            obs.time_s = std::stod(fields[4], &pos);
            if (pos != fields[4].size()) throw std::invalid_argument("");
        } catch (const std::exception&) {
            out.rejected.push_back({line_no, "time_s '" + fields[4] + "' is not a number"});
            continue;
        }
        if (!(obs.time_s > 0.0) || !std::isfinite(obs.time_s)) {
            out.rejected.push_back({line_no, "time_s must be positive, got " + fields[4]});
            continue;
        }

        auto key = std::make_pair(obs.participant, obs.trial);
        if (auto it = seen.find(key); it != seen.end())
            throw std::runtime_error("duplicate (participant, trial) key (" + obs.participant + ", " +
                                     std::to_string(obs.trial) + ") at lines " + std::to_string(it->second) +
                                     " and " + std::to_string(line_no));
        seen[key] = line_no;
        if (auto it = participant_group.find(obs.participant); it != participant_group.end()) {
            if (it->second != obs.group)
                throw std::runtime_error("participant " + obs.participant + " appears in both groups (line " +
                                         std::to_string(line_no) + ")");
        } else {
            participant_group[obs.participant] = obs.group;
        }
        out.rows.push_back(std::move(obs));
    }
    return out;
}

ObservedTimes ingest_times(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open learning-time file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return ingest_times_text(buf.str());
}

// ---------- fitting ----------

namespace {

struct FitPoint {
    Group group;
    std::string label;
    double observed_mean;
    double observed_sem;
    double expected_length;
    int cardinality;
};

double beta_least_squares(const std::vector<FitPoint>& points, double alpha,
                          const std::optional<Group>& only_group) {
    double num = 0.0, den = 0.0;
    for (const auto& p : points) {
        if (only_group && p.group != *only_group) continue;
        double d = p.expected_length + alpha * p.cardinality;
        num += d * p.observed_mean;
        den += d * d;
    }
    return den > 0.0 ? num / den : 0.0;
}

double group_sse(const std::vector<FitPoint>& points, double alpha, double beta, Group group) {
    double sse = 0.0;
    for (const auto& p : points) {
        if (p.group != group) continue;
        double pred = beta * (p.expected_length + alpha * p.cardinality);
        sse += (p.observed_mean - pred) * (p.observed_mean - pred);
    }
    return sse;
}

}  // namespace

FitResult fit_scale(const std::map<Group, SimulationTrace>& traces, const ObservedTimes& times, FitMode mode,
                    double fixed_alpha, bool shared_beta) {
    std::vector<FitPoint> points;
    std::vector<Group> groups_present;
    for (Group group : {Group::Target, Group::Control}) {
        auto by_concept = times.mean_sem_by_concept(group);
        if (by_concept.empty()) continue;
        if (by_concept.size() < 2)
            throw std::invalid_argument("fit refused: fewer than 2 distinct concepts observed for group " +
                                        to_string(group));
        auto trace_it = traces.find(group);
        if (trace_it == traces.end())
            throw std::invalid_argument("no simulation trace supplied for group " + to_string(group));
        for (const auto& [label, mean_sem] : by_concept) {
            const TrialRecord* record = nullptr;
            for (const auto& t : trace_it->second.trials)
                if (t.label == label) record = &t;
            if (!record)
                throw std::invalid_argument("trace for group " + to_string(group) + " does not cover concept " +
                                            label);
            points.push_back({group, label, mean_sem.first, mean_sem.second, record->stats.expected_length,
                              record->stats.cardinality_term});
        }
        groups_present.push_back(group);
    }
    if (groups_present.empty()) throw std::invalid_argument("fit refused: no usable observations");

    auto betas_for = [&](double alpha) {
        std::map<Group, double> betas;
        for (Group g : groups_present)
            betas[g] = shared_beta ? beta_least_squares(points, alpha, std::nullopt)
                                   : beta_least_squares(points, alpha, g);
        return betas;
    };

    double alpha = fixed_alpha;
    if (mode == FitMode::GridAlpha) {
        double best_alpha = 0.0, best_sse = std::numeric_limits<double>::infinity();
        for (int step = 0; step <= 300; ++step) {
            double a = step * 0.01;
            auto betas = betas_for(a);
            double sse = 0.0;
            for (Group g : groups_present) sse += group_sse(points, a, betas[g], g);
            if (sse < best_sse) {
                best_sse = sse;
                best_alpha = a;
            }
        }
        alpha = best_alpha;
    }

    FitResult result;
    result.alpha = alpha;
    result.mode = mode;
    result.shared_beta = shared_beta;
    auto betas = betas_for(alpha);
    for (Group g : groups_present) {
        GroupFit fit;
        fit.beta = betas[g];
        double mean_obs = 0.0;
        int n = 0;
        for (const auto& p : points)
            if (p.group == g) {
                mean_obs += p.observed_mean;
                ++n;
            }
        mean_obs /= static_cast<double>(n);
        double ss_tot = 0.0;
        for (const auto& p : points)
            if (p.group == g) ss_tot += (p.observed_mean - mean_obs) * (p.observed_mean - mean_obs);
        double ss_res = group_sse(points, alpha, fit.beta, g);
        fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
        fit.n_concepts = n;
        for (const auto& p : points) {
            if (p.group != g) continue;
            double d = p.expected_length + alpha * p.cardinality;
            fit.per_concept[p.label] = {p.observed_mean, p.observed_sem, d, fit.beta * d};
        }
        result.groups[g] = fit;
    }
    return result;
}

std::string fit_to_json(const FitResult& fit) {
    nlohmann::json j;
    j["alpha"] = fit.alpha;
    j["mode"] = fit.mode == FitMode::FixedAlpha ? "fixed-alpha" : "grid-alpha";
    j["shared_beta"] = fit.shared_beta;
    nlohmann::json groups = nlohmann::json::object();
    for (const auto& [group, gf] : fit.groups) {
        nlohmann::json g;
        g["beta"] = gf.beta;
        g["r_squared"] = gf.r_squared;
        g["n_concepts"] = gf.n_concepts;
        nlohmann::json per = nlohmann::json::object();
        for (const auto& [label, vals] : gf.per_concept) {
            per[label] = {{"observed_mean", vals[0]},
                          {"observed_sem", vals[1]},
                          {"predicted_difficulty", vals[2]},
                          {"predicted_time", vals[3]}};
        }
        g["concepts"] = per;
        groups[to_string(group)] = g;
    }
    j["groups"] = groups;
    return j.dump(2) + "\n";
}

std::string fit_to_csv(const FitResult& fit) {
    std::ostringstream out;
    out << "group,concept,observed_mean,observed_sem,predicted_difficulty,predicted_time\n";
    char buf[160];
    for (const auto& [group, gf] : fit.groups) {
        for (const auto& [label, vals] : gf.per_concept) {
            std::snprintf(buf, sizeof buf, "%s,%s,%.12g,%.12g,%.12g,%.12g\n", to_string(group).c_str(),
                          label.c_str(), vals[0], vals[1], vals[2], vals[3]);
            out << buf;
        }
    }
    return out.str();
}

// ---------- t statistics ----------

TTestResult two_sample_t(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2)
        throw std::invalid_argument("two-sample t-test needs at least 2 observations per group");
    TTestResult r;
    r.n_a = static_cast<int>(a.size());
    r.n_b = static_cast<int>(b.size());
    for (double v : a) r.mean_a += v;
    for (double v : b) r.mean_b += v;
    r.mean_a /= r.n_a;
    r.mean_b /= r.n_b;
    double ss_a = 0.0, ss_b = 0.0;
    for (double v : a) ss_a += (v - r.mean_a) * (v - r.mean_a);
    for (double v : b) ss_b += (v - r.mean_b) * (v - r.mean_b);
    r.df = r.n_a + r.n_b - 2;
    double pooled_var = (ss_a + ss_b) / r.df;
    double se = std::sqrt(pooled_var * (1.0 / r.n_a + 1.0 / r.n_b));
    if (se == 0.0) {
        r.t = 0.0;
        r.p = r.mean_a == r.mean_b ? 1.0 : 0.0;
        if (r.mean_a != r.mean_b) r.t = std::numeric_limits<double>::infinity();
        return r;
    }
    r.t = (r.mean_a - r.mean_b) / se;
    boost::math::students_t_distribution<double> dist(r.df);
    r.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t)));
    return r;
}

TTestResult two_sample_t(const ObservedTimes& times, const std::string& concept_label) {
    return two_sample_t(times.times_for(Group::Target, concept_label), times.times_for(Group::Control, concept_label));
}

}  // namespace bcl
