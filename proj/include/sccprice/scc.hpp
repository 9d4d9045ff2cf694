#pragma once

#include <cstdint>
#include <list>
#include <memory>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "sccprice/linalg.hpp"
#include "sccprice/network.hpp"

namespace sccprice::grid {

/// Per-gen on/off pattern, index-aligned with NetworkCase::gens.
using Commitment = std::vector<int>;

inline std::uint64_t commitment_mask(const Commitment& x) {
    std::uint64_t m = 0;
    for (std::size_t g = 0; g < x.size(); ++g)
        if (x[g]) m |= (std::uint64_t{1} << g);
    return m;
}

inline Commitment commitment_from_mask(std::uint64_t mask, int num_gens) {
    Commitment x(static_cast<std::size_t>(num_gens), 0);
    for (int g = 0; g < num_gens; ++g)
        if (mask & (std::uint64_t{1} << g)) x[static_cast<std::size_t>(g)] = 1;
    return x;
}

/// Nodal admittance Y = Y^0 + Y^g. Lines contribute the standard assembly
/// (diagonal sum of incident 1/z, off-diagonal -1/z); each committed SG adds
/// 1/(j x''_d) on the diagonal of its bus.
inline ComplexMatrix build_admittance(const NetworkCase& net, const Commitment& commitment) {
    if (commitment.size() != net.gens.size())
        throw ValidationError("commitment length must equal number of gens");
    const int n = net.num_buses();
    ComplexMatrix y = ComplexMatrix::Zero(n, n);
    for (const auto& l : net.lines) {
        const Complex adm = 1.0 / l.series_impedance;
        y(l.from_bus, l.from_bus) += adm;
        y(l.to_bus, l.to_bus) += adm;
        y(l.from_bus, l.to_bus) -= adm;
        y(l.to_bus, l.from_bus) -= adm;
    }
    for (std::size_t g = 0; g < net.gens.size(); ++g) {
        if (!commitment[g]) continue;
        const auto& sg = net.gens[g];
        y(sg.bus, sg.bus) += 1.0 / Complex(0.0, sg.x_d2);
    }
    return y;
}

/// Per-source complex contribution terms Z_{F,bus(E)} * I_E for one sink,
/// used by pricing allocation. Gen terms carry the commitment bit (offline
/// SGs contribute exactly zero); IBR terms are per unit of alpha.
struct SourceWeights {
    std::vector<Complex> gen_terms;
    std::vector<Complex> ibr_terms;
    Complex z_ff;
};

/// Computes exact short-circuit currents by superposition over the impedance
/// matrix. Impedance matrices are cached per commitment bitmask with a
/// bounded LRU budget; the cache is internally synchronized.
class SccEngine {
public:
    explicit SccEngine(NetworkCase net, std::size_t cache_budget = 4096)
        : net_(std::move(net)), budget_(cache_budget) {}

    const NetworkCase& network() const { return net_; }

    /// Cached Z = Y(commitment)^{-1}.
    std::shared_ptr<const ComplexMatrix> impedance(const Commitment& commitment) const {
        const std::uint64_t key = commitment_mask(commitment);
        {
            std::lock_guard<std::mutex> lock(mutex_);
            auto it = index_.find(key);
            if (it != index_.end()) {
                entries_.splice(entries_.begin(), entries_, it->second);
                return it->second->second;
            }
        }
        auto z = std::make_shared<const ComplexMatrix>(invert(build_admittance(net_, commitment)));
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = index_.find(key);
        if (it != index_.end()) return it->second->second;  // lost a race, keep the first
        entries_.emplace_front(key, z);
        index_[key] = entries_.begin();
        if (entries_.size() > budget_) {
            index_.erase(entries_.back().first);
            entries_.pop_back();
        }
        return z;
    }

    /// Complex fault-current phasor at the sink per the superposition rule;
    /// injections are magnitude-only phasors at angle zero.
    Complex scc_phasor(const Commitment& commitment, const std::vector<double>& alpha,
                       int sink) const {
        check_inputs(commitment, alpha, sink);
        bool any_source = false;
        for (int b : commitment) any_source = any_source || (b != 0);
        for (double a : alpha) any_source = any_source || (a != 0.0);
        if (!any_source) return {0.0, 0.0};  // zero numerator, Z not needed
        auto z = impedance(commitment);
        Complex num{0.0, 0.0};
        for (std::size_t g = 0; g < net_.gens.size(); ++g) {
            if (!commitment[g]) continue;
            const auto& sg = net_.gens[g];
            num += (*z)(sink, sg.bus) * sg.fault_current;
        }
        for (std::size_t c = 0; c < net_.ibrs.size(); ++c) {
            if (alpha[c] == 0.0) continue;
            const auto& ibr = net_.ibrs[c];
            num += (*z)(sink, ibr.bus) * ibr.fault_current * alpha[c];
        }
        return -num / (*z)(sink, sink);
    }

    /// Exact SCC magnitude at the sink.
    double compute_scc(const Commitment& commitment, const std::vector<double>& alpha,
                       int sink) const {
        return std::abs(scc_phasor(commitment, alpha, sink));
    }

    SourceWeights z_row_weights(const Commitment& commitment, int sink) const {
        check_inputs(commitment, std::vector<double>(net_.ibrs.size(), 0.0), sink);
        auto z = impedance(commitment);
        SourceWeights w;
        w.z_ff = (*z)(sink, sink);
        w.gen_terms.reserve(net_.gens.size());
        for (std::size_t g = 0; g < net_.gens.size(); ++g) {
            const auto& sg = net_.gens[g];
            w.gen_terms.push_back(commitment[g] ? (*z)(sink, sg.bus) * sg.fault_current
                                                : Complex{0.0, 0.0});
        }
        w.ibr_terms.reserve(net_.ibrs.size());
        for (const auto& ibr : net_.ibrs)
            w.ibr_terms.push_back((*z)(sink, ibr.bus) * ibr.fault_current);
        return w;
    }

    std::size_t cache_size() const {
        std::lock_guard<std::mutex> lock(mutex_);
        return entries_.size();
    }

private:
    void check_inputs(const Commitment& commitment, const std::vector<double>& alpha,
                      int sink) const {
        if (commitment.size() != net_.gens.size())
            throw ValidationError("commitment length must equal number of gens");
        if (alpha.size() != net_.ibrs.size())
            throw ValidationError("alpha length must equal number of ibrs");
        for (double a : alpha)
            if (a < 0.0 || a > 1.0) throw ValidationError("alpha values must lie in [0,1]");
        if (sink < 0 || sink >= net_.num_buses())
            throw ValidationError("sink is not a valid bus id");
    }

    NetworkCase net_;
    std::size_t budget_;
    mutable std::mutex mutex_;
    mutable std::list<std::pair<std::uint64_t, std::shared_ptr<const ComplexMatrix>>> entries_;
    mutable std::unordered_map<std::uint64_t, decltype(entries_)::iterator> index_;
};

}  // namespace sccprice::grid
