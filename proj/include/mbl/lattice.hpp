// lattice.hpp — 1D qudit chain description and site regions

#pragma once

#include "mbl/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace mbl {

// A chain of num_sites qudits with local dimension local_dim. The total
// Hilbert-space dimension d^N must stay within the memory budget, expressed
// as a cap on N*log2(d) (default 14, i.e. dimension 16384).
struct LatticeSpec {
    int num_sites = 0;
    int local_dim = 2;
    double budget_log2_dim = 14.0;

    LatticeSpec() = default;

    LatticeSpec(int n, int d, double budget = 14.0)
        : num_sites(n), local_dim(d), budget_log2_dim(budget) {
        if (n <= 0) throw InvalidInput("LatticeSpec: num_sites must be positive");
        if (d < 2) throw InvalidInput("LatticeSpec: local_dim must be >= 2");
        if (static_cast<double>(n) * std::log2(static_cast<double>(d)) >
            budget_log2_dim + 1e-12) {
            throw InvalidInput("LatticeSpec: N*log2(d) = " +
                               std::to_string(n * std::log2(double(d))) +
                               " exceeds budget " + std::to_string(budget_log2_dim));
        }
    }

    Eigen::Index dim() const {
        Eigen::Index total = 1;
        for (int i = 0; i < num_sites; ++i) total *= local_dim;
        return total;
    }

    // Dimension of a subset of k sites.
    Eigen::Index dim_of(int k) const {
        Eigen::Index total = 1;
        for (int i = 0; i < k; ++i) total *= local_dim;
        return total;
    }

    bool operator==(const LatticeSpec& o) const {
        return num_sites == o.num_sites && local_dim == o.local_dim;
    }
};

// A sorted set of site indices on a chain. Enlargement adds all sites within
// index distance l (the 1D Manhattan metric); the chain is open, not periodic.
struct Region {
    LatticeSpec lattice;
    std::vector<int> sites;  // sorted, unique, each in [0, num_sites)

    Region() = default;

    Region(LatticeSpec lat, std::vector<int> s) : lattice(lat), sites(std::move(s)) {
        std::sort(sites.begin(), sites.end());
        sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
        for (int x : sites) {
            if (x < 0 || x >= lattice.num_sites)
                throw InvalidInput("Region: site " + std::to_string(x) +
                                   " outside lattice of " +
                                   std::to_string(lattice.num_sites) + " sites");
        }
    }

    static Region single(const LatticeSpec& lat, int site) { return Region(lat, {site}); }

    // Contiguous window [first, first+size).
    static Region window(const LatticeSpec& lat, int first, int size) {
        std::vector<int> s(static_cast<std::size_t>(size));
        for (int i = 0; i < size; ++i) s[static_cast<std::size_t>(i)] = first + i;
        return Region(lat, std::move(s));
    }

    static Region all(const LatticeSpec& lat) { return window(lat, 0, lat.num_sites); }

    int size() const { return static_cast<int>(sites.size()); }
    bool empty() const { return sites.empty(); }
    bool contains(int site) const {
        return std::binary_search(sites.begin(), sites.end(), site);
    }
    bool contains(const Region& other) const {
        return std::includes(sites.begin(), sites.end(), other.sites.begin(),
                             other.sites.end());
    }

    // The region plus all sites within chain distance l; enlarge(0) == *this.
    Region enlarge(int l) const {
        if (l < 0) throw InvalidInput("Region::enlarge: l must be >= 0");
        std::set<int> out;
        for (int x : sites) {
            const int lo = std::max(0, x - l);
            const int hi = std::min(lattice.num_sites - 1, x + l);
            for (int y = lo; y <= hi; ++y) out.insert(y);
        }
        return Region(lattice, std::vector<int>(out.begin(), out.end()));
    }

    Region complement() const {
        std::vector<int> out;
        out.reserve(static_cast<std::size_t>(lattice.num_sites - size()));
        for (int x = 0; x < lattice.num_sites; ++x)
            if (!contains(x)) out.push_back(x);
        return Region(lattice, std::move(out));
    }

    Eigen::Index dim() const { return lattice.dim_of(size()); }
    Eigen::Index complement_dim() const { return lattice.dim_of(lattice.num_sites - size()); }

    bool operator==(const Region& o) const {
        return lattice == o.lattice && sites == o.sites;
    }
};

// Index bookkeeping for a region split. Full basis indices use lexicographic
// tensor order with site 0 as the slowest digit; the same convention orders
// the local indices of a region (lowest site slowest).
//
// Any full index decomposes as  r = offset_in[a] + offset_out[e]  where a is
// the local index over the region's sites and e the index over the rest.
struct SiteIndexer {
    LatticeSpec lattice;
    std::vector<int> in_sites;         // region, ascending
    std::vector<int> out_sites;        // complement, ascending
    Eigen::Index dim_in = 1;           // d^{|region|}
    Eigen::Index dim_out = 1;          // d^{|complement|}
    std::vector<Eigen::Index> offset_in;
    std::vector<Eigen::Index> offset_out;
    std::vector<Eigen::Index> in_of;   // full index -> local index (size D)
    std::vector<Eigen::Index> out_of;  // full index -> complement index (size D)

    explicit SiteIndexer(const Region& region)
        : lattice(region.lattice), in_sites(region.sites) {
        const int n = lattice.num_sites;
        const int d = lattice.local_dim;
        for (int x = 0; x < n; ++x)
            if (!region.contains(x)) out_sites.push_back(x);
        dim_in = region.dim();
        dim_out = region.complement_dim();

        // Weight of site j in the full index: d^(n-1-j).
        std::vector<Eigen::Index> weight(static_cast<std::size_t>(n), 1);
        for (int j = n - 2; j >= 0; --j)
            weight[static_cast<std::size_t>(j)] =
                weight[static_cast<std::size_t>(j + 1)] * d;

        offset_in = offsets_for(in_sites, weight, d, dim_in);
        offset_out = offsets_for(out_sites, weight, d, dim_out);

        const Eigen::Index D = lattice.dim();
        in_of.assign(static_cast<std::size_t>(D), 0);
        out_of.assign(static_cast<std::size_t>(D), 0);
        for (Eigen::Index a = 0; a < dim_in; ++a)
            for (Eigen::Index e = 0; e < dim_out; ++e) {
                const Eigen::Index r = offset_in[static_cast<std::size_t>(a)] +
                                       offset_out[static_cast<std::size_t>(e)];
                in_of[static_cast<std::size_t>(r)] = a;
                out_of[static_cast<std::size_t>(r)] = e;
            }
    }

    Eigen::Index compose(Eigen::Index a, Eigen::Index e) const {
        return offset_in[static_cast<std::size_t>(a)] +
               offset_out[static_cast<std::size_t>(e)];
    }

  private:
    static std::vector<Eigen::Index> offsets_for(const std::vector<int>& group,
                                                 const std::vector<Eigen::Index>& weight,
                                                 int d, Eigen::Index group_dim) {
        std::vector<Eigen::Index> offsets(static_cast<std::size_t>(group_dim), 0);
        for (Eigen::Index a = 0; a < group_dim; ++a) {
            Eigen::Index rem = a;
            Eigen::Index off = 0;
            // Local digit of group[k] has significance d^(|group|-1-k).
            for (std::size_t k = group.size(); k-- > 0;) {
                const Eigen::Index digit = rem % d;
                rem /= d;
                off += digit * weight[static_cast<std::size_t>(group[k])];
            }
            offsets[static_cast<std::size_t>(a)] = off;
        }
        return offsets;
    }
};

}  // namespace mbl
