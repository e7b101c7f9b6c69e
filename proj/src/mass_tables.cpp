#include "bcl/mass_tables.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace bcl {

namespace {

std::vector<BinaryOp> ops_of(Language lang) {
    if (lang == Language::P) return {BinaryOp::And, BinaryOp::Or};
    return {BinaryOp::And, BinaryOp::Or, BinaryOp::Xor};
}

std::vector<RuleId> tracked_rules(Language lang) {
    std::vector<RuleId> tracked;
    for (RuleId id : rules_of(lang))
        if (id != RuleId::Start) tracked.push_back(id);
    return tracked;
}

void require_odd_size(int max_size) {
    if (max_size < 1 || max_size % 2 == 0)
        throw std::invalid_argument("max size must be an odd positive integer, got " + std::to_string(max_size));
}

void add_pointwise_product(std::vector<double>& acc, const std::vector<double>& a, const std::vector<double>& b) {
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += a[i] * b[i];
}

void add_scaled(std::vector<double>& acc, const std::vector<double>& v, double scale) {
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += scale * v[i];
}

// Above this many left/right support pairs per size, the pairwise pass
// stops paying off against the fixed cost of the transform round trips.
// Under the default states this keeps every size through 13 (pxor) or 15
// (p) on the exact positive-sum path.
constexpr std::uint64_t kSparsePairLimit = 8'000'000;

}  // namespace

double MassTables::z_at(int size, TruthTable16 t) const {
    return z[static_cast<std::size_t>(size_index(size))][t.mask];
}

int MassTables::tracked_index(RuleId rule) const {
    auto it = std::find(tracked.begin(), tracked.end(), rule);
    return it == tracked.end() ? -1 : static_cast<int>(it - tracked.begin());
}

double MassTables::w_at(int size, RuleId rule, TruthTable16 t) const {
    if (rule == RuleId::Start) return z_at(size, t);  // START is used exactly once
    int k = tracked_index(rule);
    if (k < 0) throw std::invalid_argument("rule '" + to_string(rule) + "' has no weighted table in this language");
    return w[static_cast<std::size_t>(size_index(size))][static_cast<std::size_t>(k)][t.mask];
}

double MassTables::total_mass_diagnostic() const {
    double total = 0.0;
    for (const auto& row : z)
        for (double v : row) total += v;
    return total;
}

namespace {

// Build state shared by the two per-size engines.  Small sizes have tiny
// supports, so an exact positive-sum pairwise pass (extended-precision
// accumulators, no cancellation) is both faster and bit-trustworthy;
// once supports densify the transform engine takes over.
struct Builder {
    const PcfgState& state;
    int max_size;
    std::vector<BinaryOp> ops;
    std::vector<RuleId> tracked;
    std::size_t n_tracked;
    MassTables& out;

    std::vector<std::vector<std::uint32_t>> support;  // per sparse-built size: tables with z > 0

    // Transform-domain copies of finalized sizes, per operator; filled
    // lazily from the moment the spectral engine activates.
    bool spectral_active = false;
    std::vector<std::vector<std::vector<double>>> spec_z;
    std::vector<std::vector<std::vector<std::vector<double>>>> spec_w;

    Builder(const PcfgState& s, int m, MassTables& o)
        : state(s), max_size(m), ops(ops_of(s.language())), tracked(tracked_rules(s.language())),
          n_tracked(tracked.size()), out(o), spec_z(ops.size()), spec_w(ops.size()) {}

    void seed_literals() {
        const double p_atom = state.rule_probability(RuleId::Atom);
        const std::size_t atom_idx = static_cast<std::size_t>(out.tracked_index(RuleId::Atom));
        for (int var = 1; var <= 4; ++var) {
            for (bool neg : {false, true}) {
                RuleId lit = literal_rule(var, neg);
                double mass = p_atom * state.rule_probability(lit);
                TruthTable16 t = variable_table(var);
                if (neg) t = t.complement();
                out.z[0][t.mask] += mass;
                out.w[0][atom_idx][t.mask] += mass;
                out.w[0][static_cast<std::size_t>(out.tracked_index(lit))][t.mask] += mass;
            }
        }
        support.emplace_back();
        for (std::uint32_t t = 0; t < kNumTables; ++t)
            if (out.z[0][t] > 0.0) support[0].push_back(t);
    }

    std::uint64_t pair_count(int size) const {
        std::uint64_t pairs = 0;
        for (int left = 1; left <= size - 2; left += 2) {
            int right = size - 1 - left;
            pairs += static_cast<std::uint64_t>(support[static_cast<std::size_t>(MassTables::size_index(left))].size()) *
                     support[static_cast<std::size_t>(MassTables::size_index(right))].size();
        }
        return pairs;
    }

    void combine_sparse(int size) {
        const std::size_t si = static_cast<std::size_t>(MassTables::size_index(size));
        std::vector<long double> z_acc(kNumTables, 0.0L);
        std::vector<std::vector<long double>> w_acc(n_tracked, std::vector<long double>(kNumTables, 0.0L));
        std::vector<double> wa(n_tracked);

        for (std::size_t oi = 0; oi < ops.size(); ++oi) {
            const BinaryOp op = ops[oi];
            const double p_op = state.rule_probability(op_rule(op));
            const std::size_t op_idx = static_cast<std::size_t>(out.tracked_index(op_rule(op)));
            for (int left = 1; left <= size - 2; left += 2) {
                int right = size - 1 - left;
                const std::size_t li = static_cast<std::size_t>(MassTables::size_index(left));
                const std::size_t ri = static_cast<std::size_t>(MassTables::size_index(right));
                for (std::uint32_t t1 : support[li]) {
                    const double za = out.z[li][t1];
                    for (std::size_t k = 0; k < n_tracked; ++k) wa[k] = out.w[li][k][t1];
                    for (std::uint32_t t2 : support[ri]) {
                        const double zb = out.z[ri][t2];
                        std::uint32_t t;
                        switch (op) {
                            case BinaryOp::And: t = t1 & t2; break;
                            case BinaryOp::Or: t = t1 | t2; break;
                            default: t = t1 ^ t2; break;
                        }
                        const double zz = p_op * za * zb;
                        z_acc[t] += zz;
                        w_acc[op_idx][t] += zz;
                        for (std::size_t k = 0; k < n_tracked; ++k)
                            w_acc[k][t] += p_op * (wa[k] * zb + za * out.w[ri][k][t2]);
                    }
                }
            }
        }

        support.emplace_back();
        auto& supp = support.back();
        for (std::uint32_t t = 0; t < kNumTables; ++t) {
            if (z_acc[t] <= 0.0L) continue;
            supp.push_back(t);
            out.z[si][t] = static_cast<double>(z_acc[t]);
            for (std::size_t k = 0; k < n_tracked; ++k)
                out.w[si][k][t] = static_cast<double>(w_acc[k][t]);
        }
    }

    void cache_spectra(std::size_t size_idx) {
        for (std::size_t oi = 0; oi < ops.size(); ++oi) {
            BinaryOp op = ops[oi];
            spec_z[oi].push_back(out.z[size_idx]);
            op_transform(std::span<double>(spec_z[oi].back()), op);
            spec_w[oi].emplace_back();
            for (std::size_t k = 0; k < n_tracked; ++k) {
                spec_w[oi].back().push_back(out.w[size_idx][k]);
                op_transform(std::span<double>(spec_w[oi].back().back()), op);
            }
        }
    }

    void activate_spectral(int size) {
        spectral_active = true;
        for (int s = 1; s <= size - 2; s += 2) cache_spectra(static_cast<std::size_t>(MassTables::size_index(s)));
    }

    void combine_spectral(int size) {
        const std::size_t si = static_cast<std::size_t>(MassTables::size_index(size));
        std::vector<double> acc_z(kNumTables);
        std::vector<std::vector<double>> acc_w(n_tracked, std::vector<double>(kNumTables));
        for (std::size_t oi = 0; oi < ops.size(); ++oi) {
            BinaryOp op = ops[oi];
            const double p_op = state.rule_probability(op_rule(op));
            std::fill(acc_z.begin(), acc_z.end(), 0.0);
            for (auto& a : acc_w) std::fill(a.begin(), a.end(), 0.0);

            for (int left = 1; left <= size - 2; left += 2) {
                int right = size - 1 - left;
                const std::size_t li = static_cast<std::size_t>(MassTables::size_index(left));
                const std::size_t ri = static_cast<std::size_t>(MassTables::size_index(right));
                const auto& zl = spec_z[oi][li];
                const auto& zr = spec_z[oi][ri];
                add_pointwise_product(acc_z, zl, zr);
                for (std::size_t k = 0; k < n_tracked; ++k) {
                    add_pointwise_product(acc_w[k], spec_w[oi][li][k], zr);
                    add_pointwise_product(acc_w[k], zl, spec_w[oi][ri][k]);
                }
            }

            op_inverse_transform(std::span<double>(acc_z), op);
            add_scaled(out.z[si], acc_z, p_op);
            // The operator's own rule appears once more at the new root.
            add_scaled(out.w[si][static_cast<std::size_t>(out.tracked_index(op_rule(op)))], acc_z, p_op);
            for (std::size_t k = 0; k < n_tracked; ++k) {
                op_inverse_transform(std::span<double>(acc_w[k]), op);
                add_scaled(out.w[si][k], acc_w[k], p_op);
            }
        }
    }

    void run() {
        seed_literals();
        for (int size = 3; size <= max_size; size += 2) {
            if (!spectral_active && pair_count(size) > kSparsePairLimit) activate_spectral(size);
            if (!spectral_active) {
                combine_sparse(size);
            } else {
                combine_spectral(size);
                if (size <= max_size - 2) cache_spectra(static_cast<std::size_t>(MassTables::size_index(size)));
            }
        }
    }
};

}  // namespace

MassTables build_mass_tables(const PcfgState& state, int max_size) {
    require_odd_size(max_size);
    const int n_sizes = (max_size + 1) / 2;
    MassTables out{state, max_size, tracked_rules(state.language()), {}, {}};
    out.z.assign(static_cast<std::size_t>(n_sizes), std::vector<double>(kNumTables, 0.0));
    out.w.assign(static_cast<std::size_t>(n_sizes),
                 std::vector<std::vector<double>>(out.tracked.size(), std::vector<double>(kNumTables, 0.0)));
    Builder builder(state, max_size, out);
    builder.run();
    return out;
}

// ---------- naive oracle ----------

namespace {

struct OracleEntry {
    std::uint16_t table;
    double prior;
    std::array<std::uint8_t, kRuleSlots> counts;
};

struct OracleAccumulator {
    std::vector<std::vector<long double>> z;
    std::vector<std::vector<std::vector<long double>>> w;

    OracleAccumulator(int n_sizes, std::size_t n_tracked)
        : z(static_cast<std::size_t>(n_sizes), std::vector<long double>(kNumTables, 0.0L)),
          w(static_cast<std::size_t>(n_sizes),
            std::vector<std::vector<long double>>(n_tracked, std::vector<long double>(kNumTables, 0.0L))) {}

    void add(const std::vector<RuleId>& tracked, int size, const OracleEntry& e) {
        const std::size_t si = static_cast<std::size_t>(MassTables::size_index(size));
        z[si][e.table] += e.prior;
        for (std::size_t k = 0; k < tracked.size(); ++k) {
            int c = e.counts[static_cast<std::size_t>(static_cast<int>(tracked[k]))];
            if (c) w[si][k][e.table] += e.prior * c;
        }
    }
};

OracleEntry combine(BinaryOp op, double p_op, const OracleEntry& a, const OracleEntry& b) {
    OracleEntry e;
    switch (op) {
        case BinaryOp::And: e.table = a.table & b.table; break;
        case BinaryOp::Or: e.table = a.table | b.table; break;
        case BinaryOp::Xor: e.table = a.table ^ b.table; break;
    }
    e.prior = p_op * a.prior * b.prior;
    for (std::size_t i = 0; i < kRuleSlots; ++i)
        e.counts[i] = static_cast<std::uint8_t>(a.counts[i] + b.counts[i]);
    ++e.counts[static_cast<std::size_t>(static_cast<int>(op_rule(op)))];
    // Each child carries one START use; the combined formula has one.
    e.counts[static_cast<std::size_t>(static_cast<int>(RuleId::Start))] = 1;
    return e;
}

}  // namespace

MassTables naive_enumerate(const PcfgState& state, int max_size,
                           std::vector<std::uint64_t>* ast_counts_by_size) {
    require_odd_size(max_size);
    if (max_size > 9)
        throw std::invalid_argument("naive enumeration is capped at size 9; requested " + std::to_string(max_size));
    const Language lang = state.language();
    const std::vector<BinaryOp> ops = ops_of(lang);
    const int n_sizes = (max_size + 1) / 2;

    MassTables out{state, max_size, tracked_rules(lang), {}, {}};
    out.z.assign(static_cast<std::size_t>(n_sizes), std::vector<double>(kNumTables, 0.0));
    out.w.assign(static_cast<std::size_t>(n_sizes),
                 std::vector<std::vector<double>>(out.tracked.size(), std::vector<double>(kNumTables, 0.0)));
    if (ast_counts_by_size) ast_counts_by_size->assign(static_cast<std::size_t>(n_sizes), 0);
    OracleAccumulator acc(n_sizes, out.tracked.size());

    // Materialize every AST of the child sizes; the top size at the cap
    // is streamed pairwise instead of stored.
    const int max_stored = std::min(max_size, 7);
    std::vector<std::vector<OracleEntry>> by_size(static_cast<std::size_t>(MassTables::size_index(max_stored)) + 1);

    const double p_atom = state.rule_probability(RuleId::Atom);
    for (int var = 1; var <= 4; ++var) {
        for (bool neg : {false, true}) {
            RuleId lit = literal_rule(var, neg);
            OracleEntry e;
            TruthTable16 t = variable_table(var);
            if (neg) t = t.complement();
            e.table = t.mask;
            e.prior = p_atom * state.rule_probability(lit);
            e.counts.fill(0);
            e.counts[static_cast<std::size_t>(static_cast<int>(RuleId::Start))] = 1;
            e.counts[static_cast<std::size_t>(static_cast<int>(RuleId::Atom))] = 1;
            e.counts[static_cast<std::size_t>(static_cast<int>(lit))] = 1;
            by_size[0].push_back(e);
        }
    }

    for (int size = 3; size <= max_stored; size += 2) {
        auto& list = by_size[static_cast<std::size_t>(MassTables::size_index(size))];
        for (BinaryOp op : ops) {
            double p_op = state.rule_probability(op_rule(op));
            for (int left = 1; left <= size - 2; left += 2) {
                int right = size - 1 - left;
                const auto& ls = by_size[static_cast<std::size_t>(MassTables::size_index(left))];
                const auto& rs = by_size[static_cast<std::size_t>(MassTables::size_index(right))];
                for (const auto& a : ls)
                    for (const auto& b : rs) list.push_back(combine(op, p_op, a, b));
            }
        }
    }

    for (int size = 1; size <= max_stored; size += 2) {
        const auto& list = by_size[static_cast<std::size_t>(MassTables::size_index(size))];
        for (const auto& e : list) acc.add(out.tracked, size, e);
        if (ast_counts_by_size)
            (*ast_counts_by_size)[static_cast<std::size_t>(MassTables::size_index(size))] = list.size();
    }

    if (max_size == 9) {
        std::uint64_t streamed = 0;
        for (BinaryOp op : ops) {
            double p_op = state.rule_probability(op_rule(op));
            for (int left = 1; left <= 7; left += 2) {
                int right = 8 - left;
                const auto& ls = by_size[static_cast<std::size_t>(MassTables::size_index(left))];
                const auto& rs = by_size[static_cast<std::size_t>(MassTables::size_index(right))];
                for (const auto& a : ls)
                    for (const auto& b : rs) {
                        acc.add(out.tracked, 9, combine(op, p_op, a, b));
                        ++streamed;
                    }
            }
        }
        if (ast_counts_by_size) (*ast_counts_by_size)[static_cast<std::size_t>(MassTables::size_index(9))] = streamed;
    }

    for (int si = 0; si < n_sizes; ++si) {
        for (std::size_t t = 0; t < kNumTables; ++t) {
            out.z[static_cast<std::size_t>(si)][t] = static_cast<double>(acc.z[static_cast<std::size_t>(si)][t]);
            for (std::size_t k = 0; k < out.tracked.size(); ++k)
                out.w[static_cast<std::size_t>(si)][k][t] =
                    static_cast<double>(acc.w[static_cast<std::size_t>(si)][k][t]);
        }
    }
    return out;
}

// ---------- exact reachability ----------

namespace {

template <int Bits>
std::vector<std::vector<MersenneInt<Bits>>> modular_count_dp(Language lang, int max_size) {
    using M = MersenneInt<Bits>;
    const std::vector<BinaryOp> ops = ops_of(lang);
    const int n_sizes = (max_size + 1) / 2;
    std::vector<std::vector<M>> counts(static_cast<std::size_t>(n_sizes), std::vector<M>(kNumTables));

    for (int var = 1; var <= 4; ++var) {
        for (bool neg : {false, true}) {
            TruthTable16 t = variable_table(var);
            if (neg) t = t.complement();
            counts[0][t.mask] += M{1};
        }
    }

    std::vector<std::vector<std::vector<M>>> spec(ops.size());
    auto cache_spectra = [&](std::size_t size_idx) {
        for (std::size_t oi = 0; oi < ops.size(); ++oi) {
            spec[oi].push_back(counts[size_idx]);
            op_transform(std::span<M>(spec[oi].back()), ops[oi]);
        }
    };
    if (max_size > 1) cache_spectra(0);

    std::vector<M> acc(kNumTables);
    for (int size = 3; size <= max_size; size += 2) {
        const std::size_t si = static_cast<std::size_t>(MassTables::size_index(size));
        for (std::size_t oi = 0; oi < ops.size(); ++oi) {
            std::fill(acc.begin(), acc.end(), M{0});
            for (int left = 1; left <= size - 2; left += 2) {
                int right = size - 1 - left;
                const auto& fl = spec[oi][static_cast<std::size_t>(MassTables::size_index(left))];
                const auto& fr = spec[oi][static_cast<std::size_t>(MassTables::size_index(right))];
                for (std::size_t i = 0; i < kNumTables; ++i) acc[i] += fl[i] * fr[i];
            }
            op_inverse_transform(std::span<M>(acc), ops[oi]);
            for (std::size_t i = 0; i < kNumTables; ++i) counts[si][i] += acc[i];
        }
        if (size <= max_size - 2) cache_spectra(si);
    }
    return counts;
}

}  // namespace

bool ReachTables::reachable_at(int size, TruthTable16 t) const {
    return reachable[static_cast<std::size_t>(MassTables::size_index(size))][t.mask];
}

std::optional<int> ReachTables::min_compatible_size(TruthTable16 t) const {
    int m = min_size[t.mask];
    if (m < 0) return std::nullopt;
    return m;
}

ReachTables build_reach_tables(Language lang, int max_size) {
    require_odd_size(max_size);
    if (max_size > kMaxExactReachSize)
        throw std::invalid_argument("exact reachability supports sizes up to " +
                                    std::to_string(kMaxExactReachSize));
    auto c61 = modular_count_dp<61>(lang, max_size);
    auto c31 = modular_count_dp<31>(lang, max_size);

    ReachTables out;
    out.language = lang;
    out.max_size = max_size;
    const int n_sizes = (max_size + 1) / 2;
    out.reachable.assign(static_cast<std::size_t>(n_sizes), std::vector<bool>(kNumTables, false));
    out.min_size.assign(kNumTables, -1);
    for (int si = 0; si < n_sizes; ++si) {
        for (std::size_t t = 0; t < kNumTables; ++t) {
            bool hit = c61[static_cast<std::size_t>(si)][t].value != 0 ||
                       c31[static_cast<std::size_t>(si)][t].value != 0;
            out.reachable[static_cast<std::size_t>(si)][t] = hit;
            if (hit && out.min_size[t] < 0) out.min_size[t] = static_cast<std::int8_t>(2 * si + 1);
        }
    }
    return out;
}

// ---------- binary cache ----------

namespace {

constexpr char kCacheMagic[8] = {'B', 'C', 'L', 'M', 'T', '0', '0', '1'};

}  // namespace

std::string mass_tables_cache_name(const PcfgState& state, int max_size) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "masstables_%s_%016llx_%d.bin", to_string(state.language()).c_str(),
                  static_cast<unsigned long long>(state.param_hash()), max_size);
    return buf;
}

void save_mass_tables(const MassTables& tables, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write cache file: " + path);
    out.write(kCacheMagic, sizeof kCacheMagic);
    std::uint32_t lang = tables.state.language() == Language::P ? 0 : 1;
    std::uint32_t max_size = static_cast<std::uint32_t>(tables.max_size);
    std::uint64_t hash = tables.state.param_hash();
    std::uint32_t n_tracked = static_cast<std::uint32_t>(tables.tracked.size());
    out.write(reinterpret_cast<const char*>(&lang), sizeof lang);
    out.write(reinterpret_cast<const char*>(&max_size), sizeof max_size);
    out.write(reinterpret_cast<const char*>(&hash), sizeof hash);
    out.write(reinterpret_cast<const char*>(&n_tracked), sizeof n_tracked);
    for (const auto& row : tables.z)
        out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(double)));
    for (const auto& per_size : tables.w)
        for (const auto& row : per_size)
            out.write(reinterpret_cast<const char*>(row.data()),
                      static_cast<std::streamsize>(row.size() * sizeof(double)));
    if (!out) throw std::runtime_error("short write to cache file: " + path);
}

MassTables build_mass_tables_cached(const PcfgState& state, int max_size, const std::string& cache_dir) {
    if (cache_dir.empty()) return build_mass_tables(state, max_size);
    std::string path = cache_dir + "/" + mass_tables_cache_name(state, max_size);
    if (auto cached = load_mass_tables(path, state, max_size)) return std::move(*cached);
    MassTables tables = build_mass_tables(state, max_size);
    save_mass_tables(tables, path);
    return tables;
}

std::optional<MassTables> load_mass_tables(const std::string& path, const PcfgState& state, int max_size) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    char magic[8];
    std::uint32_t lang = 0, stored_max = 0, n_tracked = 0;
    std::uint64_t hash = 0;
    in.read(magic, sizeof magic);
    in.read(reinterpret_cast<char*>(&lang), sizeof lang);
    in.read(reinterpret_cast<char*>(&stored_max), sizeof stored_max);
    in.read(reinterpret_cast<char*>(&hash), sizeof hash);
    in.read(reinterpret_cast<char*>(&n_tracked), sizeof n_tracked);
    if (!in || std::memcmp(magic, kCacheMagic, sizeof magic) != 0) return std::nullopt;
    std::uint32_t want_lang = state.language() == Language::P ? 0 : 1;
    if (lang != want_lang || stored_max != static_cast<std::uint32_t>(max_size) || hash != state.param_hash())
        return std::nullopt;

    MassTables out{state, max_size, tracked_rules(state.language()), {}, {}};
    if (n_tracked != out.tracked.size()) return std::nullopt;
    const int n_sizes = (max_size + 1) / 2;
    out.z.assign(static_cast<std::size_t>(n_sizes), std::vector<double>(kNumTables));
    out.w.assign(static_cast<std::size_t>(n_sizes),
                 std::vector<std::vector<double>>(out.tracked.size(), std::vector<double>(kNumTables)));
    for (auto& row : out.z)
        in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(double)));
    for (auto& per_size : out.w)
        for (auto& row : per_size)
            in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(double)));
    if (!in) return std::nullopt;
    return out;
}

}  // namespace bcl
