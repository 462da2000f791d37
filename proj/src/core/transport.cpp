#include "core/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "core/errors.hpp"

namespace latcode {

int Coupling::nnz() const {
    int c = 0;
    for (double v : flow)
        if (v > 0) ++c;
    return c;
}

double Coupling::marginal_residual(const Vec& source_w, const Vec& target_w) const {
    double worst = 0.0;
    for (int i = 0; i < rows; ++i) {
        double s = 0.0;
        for (int j = 0; j < cols; ++j) s += at(i, j);
        worst = std::max(worst, std::abs(s - source_w[static_cast<size_t>(i)]));
    }
    for (int j = 0; j < cols; ++j) {
        double s = 0.0;
        for (int i = 0; i < rows; ++i) s += at(i, j);
        worst = std::max(worst, std::abs(s - target_w[static_cast<size_t>(j)]));
    }
    return worst;
}

namespace {

// Transportation simplex on the dense bipartite problem. Nodes are sources
// 0..n-1 and sinks n..n+m-1; the basis is a spanning tree of n+m-1 arcs.
class TransportSimplex {
  public:
    TransportSimplex(const Vec& supply, const Vec& demand, const std::vector<double>& cost)
        : n_(static_cast<int>(supply.size())),
          m_(static_cast<int>(demand.size())),
          cost_(cost),
          supply_(supply),
          demand_(demand) {}

    Coupling solve() {
        init_northwest();
        double cmax = 0.0;
        for (double c : cost_) cmax = std::max(cmax, std::abs(c));
        const double eps = 1e-12 * (1.0 + cmax);

        int degenerate_streak = 0;
        bool bland = false;
        const int max_pivots = 2000 * (n_ + m_) + 10000;
        for (int pivot = 0; pivot < max_pivots; ++pivot) {
            compute_potentials();
            const int enter = find_entering(eps, bland);
            if (enter < 0) return extract();
            const double theta = do_pivot(enter);
            if (theta <= 0) {
                if (++degenerate_streak > 20 * (n_ + m_)) bland = true;
            } else {
                degenerate_streak = 0;
            }
        }
        throw NumericError("wasserstein: transportation simplex failed to converge");
    }

  private:
    struct Arc {
        int i, j;       // source, sink (sink stored as j in 0..m-1)
        double flow;
    };

    int n_, m_;
    const std::vector<double>& cost_;
    Vec supply_, demand_;
    std::vector<Arc> basis_;
    std::vector<std::vector<int>> adj_;  // node -> basis arc ids
    Vec u_, v_;
    std::vector<char> in_basis_;  // dense arc membership flags, n*m

    double c(int i, int j) const { return cost_[static_cast<size_t>(i) * m_ + j]; }

    void init_northwest() {
        basis_.clear();
        in_basis_.assign(static_cast<size_t>(n_) * m_, 0);
        Vec a = supply_, b = demand_;
        int i = 0, j = 0;
        while (true) {
            const double t = std::min(a[i], b[j]);
            basis_.push_back({i, j, std::max(0.0, t)});
            in_basis_[static_cast<size_t>(i) * m_ + j] = 1;
            a[i] -= t;
            b[j] -= t;
            if (i == n_ - 1 && j == m_ - 1) break;
            if (i < n_ - 1 && (a[i] <= b[j] || j == m_ - 1))
                ++i;
            else
                ++j;
        }
        rebuild_adj();
    }

    void rebuild_adj() {
        adj_.assign(static_cast<size_t>(n_ + m_), {});
        for (size_t id = 0; id < basis_.size(); ++id) {
            adj_[static_cast<size_t>(basis_[id].i)].push_back(static_cast<int>(id));
            adj_[static_cast<size_t>(n_ + basis_[id].j)].push_back(static_cast<int>(id));
        }
    }

    void compute_potentials() {
        u_.assign(static_cast<size_t>(n_), 0.0);
        v_.assign(static_cast<size_t>(m_), 0.0);
        std::vector<char> seen(static_cast<size_t>(n_ + m_), 0);
        std::queue<int> q;
        q.push(0);
        seen[0] = 1;
        while (!q.empty()) {
            const int node = q.front();
            q.pop();
            for (int id : adj_[static_cast<size_t>(node)]) {
                const Arc& a = basis_[static_cast<size_t>(id)];
                const int other = node < n_ ? n_ + a.j : a.i;
                if (seen[static_cast<size_t>(other)]) continue;
                seen[static_cast<size_t>(other)] = 1;
                if (other >= n_)
                    v_[static_cast<size_t>(a.j)] = c(a.i, a.j) - u_[static_cast<size_t>(a.i)];
                else
                    u_[static_cast<size_t>(a.i)] = c(a.i, a.j) - v_[static_cast<size_t>(a.j)];
                q.push(other);
            }
        }
    }

    int find_entering(double eps, bool bland) const {
        int best = -1;
        double best_rc = -eps;
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < m_; ++j) {
                if (in_basis_[static_cast<size_t>(i) * m_ + j]) continue;
                const double rc =
                    c(i, j) - u_[static_cast<size_t>(i)] - v_[static_cast<size_t>(j)];
                if (rc < best_rc) {
                    best = i * m_ + j;
                    best_rc = rc;
                    if (bland) return best;  // first negative in index order
                }
            }
        return best;
    }

    // Pushes flow around the unique cycle closed by the entering arc;
    // returns theta. Leaving arc: minimal flow among backward arcs, lowest
    // arc index on ties.
    double do_pivot(int enter) {
        const int ei = enter / m_, ej = enter % m_;
        // path from source ei to sink ej through the tree
        std::vector<int> parent_arc(static_cast<size_t>(n_ + m_), -1);
        std::vector<int> parent_node(static_cast<size_t>(n_ + m_), -1);
        std::vector<char> seen(static_cast<size_t>(n_ + m_), 0);
        std::queue<int> q;
        q.push(ei);
        seen[static_cast<size_t>(ei)] = 1;
        while (!q.empty()) {
            const int node = q.front();
            q.pop();
            if (node == n_ + ej) break;
            for (int id : adj_[static_cast<size_t>(node)]) {
                const Arc& a = basis_[static_cast<size_t>(id)];
                const int other = node < n_ ? n_ + a.j : a.i;
                if (seen[static_cast<size_t>(other)]) continue;
                seen[static_cast<size_t>(other)] = 1;
                parent_arc[static_cast<size_t>(other)] = id;
                parent_node[static_cast<size_t>(other)] = node;
                q.push(other);
            }
        }

        // walk back from sink ej to source ei, marking alternating signs:
        // traversing source->sink is +, sink->source is -
        std::vector<std::pair<int, int>> path;  // (arc id, sign)
        int node = n_ + ej;
        while (node != ei) {
            const int id = parent_arc[static_cast<size_t>(node)];
            const int from = parent_node[static_cast<size_t>(node)];
            // cycle direction is node -> from; stepping into a source node
            // runs against the arc (sink -> source), so that arc loses flow
            const int sign = from < n_ ? -1 : +1;
            path.push_back({id, sign});
            node = from;
        }
        // the entering arc carries +theta; the path as traversed from ei to
        // n_+ej alternates starting with the reverse of the walk above
        double theta = std::numeric_limits<double>::infinity();
        int leave = -1;
        long long leave_key = -1;
        for (const auto& [id, sign] : path) {
            if (sign > 0) continue;  // gains flow
            const Arc& a = basis_[static_cast<size_t>(id)];
            const long long key = static_cast<long long>(a.i) * m_ + a.j;
            if (a.flow < theta - 1e-18 || (std::abs(a.flow - theta) <= 1e-18 &&
                                           (leave < 0 || key < leave_key))) {
                theta = a.flow;
                leave = id;
                leave_key = key;
            }
        }
        if (leave < 0) throw NumericError("wasserstein: degenerate pivot cycle");

        for (const auto& [id, sign] : path)
            basis_[static_cast<size_t>(id)].flow =
                std::max(0.0, basis_[static_cast<size_t>(id)].flow + sign * theta);

        // swap entering for leaving
        const Arc old = basis_[static_cast<size_t>(leave)];
        in_basis_[static_cast<size_t>(old.i) * m_ + old.j] = 0;
        basis_[static_cast<size_t>(leave)] = {ei, ej, theta};
        in_basis_[static_cast<size_t>(ei) * m_ + ej] = 1;
        rebuild_adj();
        return theta;
    }

    Coupling extract() const {
        Coupling cp;
        cp.rows = n_;
        cp.cols = m_;
        cp.flow.assign(static_cast<size_t>(n_) * m_, 0.0);
        for (const Arc& a : basis_)
            cp.flow[static_cast<size_t>(a.i) * m_ + a.j] = a.flow;
        return cp;
    }
};

}  // namespace

TransportResult wasserstein(const DiscreteMeasure& P, const DiscreteMeasure& Q, int p) {
    if (P.dim() != Q.dim()) throw ValidationError("wasserstein: dimension mismatch");
    if (p != 1 && p != 2) throw ValidationError("wasserstein: p must be 1 or 2");
    const int n = P.size(), m = Q.size();
    std::vector<double> cost(static_cast<size_t>(n) * m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
            const double d2 = sqdist(P.atoms[static_cast<size_t>(i)], Q.atoms[static_cast<size_t>(j)]);
            cost[static_cast<size_t>(i) * m + j] = p == 2 ? d2 : std::sqrt(d2);
        }
    TransportSimplex lp(P.weights, Q.weights, cost);
    TransportResult res;
    res.coupling = lp.solve();
    double total = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
            total += res.coupling.at(i, j) * cost[static_cast<size_t>(i) * m + j];
    res.cost = total;
    res.distance = p == 2 ? std::sqrt(std::max(0.0, total)) : total;
    return res;
}

DiscreteMeasure pushforward(const ReconMap& f, const DiscreteMeasure& pi, const DataSpace* space) {
    std::vector<Vec> images;
    Vec weights;
    for (size_t i = 0; i < pi.atoms.size(); ++i) {
        Vec y = forward(f, pi.atoms[i]);
        if (space) y = space->project(y);
        // merge exactly coincident images only
        bool merged = false;
        for (size_t j = 0; j < images.size(); ++j) {
            if (images[j] == y) {
                weights[j] += pi.weights[i];
                merged = true;
                break;
            }
        }
        if (!merged) {
            images.push_back(std::move(y));
            weights.push_back(pi.weights[i]);
        }
    }
    return DiscreteMeasure(std::move(images), std::move(weights));
}

BestPushforward best_pushforward(const DiscreteMeasure& P_hat, const ReconMap& f,
                                 const DataSpace& space, const std::vector<Vec>& H_net) {
    if (H_net.empty()) throw ValidationError("best_pushforward: empty latent net");
    std::vector<Vec> images;
    images.reserve(H_net.size());
    for (const auto& h : H_net) images.push_back(eval(f, space, h));

    Vec mass(H_net.size(), 0.0);
    double w2sq = 0.0;
    for (size_t i = 0; i < P_hat.atoms.size(); ++i) {
        size_t best = 0;
        double bd = sqdist(P_hat.atoms[i], images[0]);
        for (size_t j = 1; j < images.size(); ++j) {
            const double d = sqdist(P_hat.atoms[i], images[j]);
            if (d < bd) { bd = d; best = j; }
        }
        mass[best] += P_hat.weights[i];
        w2sq += P_hat.weights[i] * bd;
    }

    BestPushforward out;
    out.pi_star = DiscreteMeasure(H_net, mass);  // zero-mass points dropped by ctor
    out.w2sq = w2sq;
    return out;
}

namespace {

// Weighted centroid cost of one block of atoms.
double block_cost(const DiscreteMeasure& P, const std::vector<int>& members) {
    double w = 0.0;
    Vec mean(static_cast<size_t>(P.dim()), 0.0);
    for (int i : members) {
        w += P.weights[static_cast<size_t>(i)];
        axpy(mean, P.weights[static_cast<size_t>(i)], P.atoms[static_cast<size_t>(i)]);
    }
    if (w <= 0) return 0.0;
    for (auto& v : mean) v /= w;
    double cost = 0.0;
    for (int i : members)
        cost += P.weights[static_cast<size_t>(i)] * sqdist(P.atoms[static_cast<size_t>(i)], mean);
    return cost;
}

// Visits every set partition of {0..n-1} into at most k blocks, encoded as
// restricted growth strings; the visitor receives the block lists.
template <class Fn>
void for_partitions(int n, int k, Fn&& visit) {
    std::vector<int> rgs(static_cast<size_t>(n), 0);
    std::vector<std::vector<int>> blocks;
    while (true) {
        int nb = 0;
        for (int i = 0; i < n; ++i) nb = std::max(nb, rgs[static_cast<size_t>(i)] + 1);
        blocks.assign(static_cast<size_t>(nb), {});
        for (int i = 0; i < n; ++i)
            blocks[static_cast<size_t>(rgs[static_cast<size_t>(i)])].push_back(i);
        visit(blocks);

        int i = n - 1;
        for (; i > 0; --i) {
            int prefix_max = 0;
            for (int t = 0; t < i; ++t)
                prefix_max = std::max(prefix_max, rgs[static_cast<size_t>(t)]);
            if (rgs[static_cast<size_t>(i)] <= prefix_max && rgs[static_cast<size_t>(i)] + 1 < k) {
                rgs[static_cast<size_t>(i)]++;
                for (int t = i + 1; t < n; ++t) rgs[static_cast<size_t>(t)] = 0;
                break;
            }
        }
        if (i == 0) break;
    }
}

DiscreteMeasure partition_measure(const DiscreteMeasure& P, const std::vector<std::vector<int>>& blocks) {
    std::vector<Vec> centroids;
    Vec masses;
    for (const auto& blk : blocks) {
        double w = 0.0;
        Vec mean(static_cast<size_t>(P.dim()), 0.0);
        for (int i : blk) {
            w += P.weights[static_cast<size_t>(i)];
            axpy(mean, P.weights[static_cast<size_t>(i)], P.atoms[static_cast<size_t>(i)]);
        }
        if (w <= 0) continue;
        for (auto& v : mean) v /= w;
        centroids.push_back(std::move(mean));
        masses.push_back(w);
    }
    return DiscreteMeasure(std::move(centroids), std::move(masses));
}

// Cheap lower bound on W2^2(P, Q): assign every atom to its nearest point
// of Q. Any coupling costs at least this much.
double assignment_lower_bound(const DiscreteMeasure& P, const DiscreteMeasure& Q) {
    double s = 0.0;
    for (size_t i = 0; i < P.atoms.size(); ++i) {
        double bd = sqdist(P.atoms[i], Q.atoms[0]);
        for (size_t j = 1; j < Q.atoms.size(); ++j)
            bd = std::min(bd, sqdist(P.atoms[i], Q.atoms[j]));
        s += P.weights[i] * bd;
    }
    return s;
}

}  // namespace

PollardResult pollard_check(const DiscreteMeasure& P_hat, int k) {
    const int n = P_hat.size();
    if (k < 1) throw ValidationError("pollard_check: k must be >= 1");
    if (n > 12 || k > 4)
        throw ValidationError(
            "pollard_check: exhaustive enumeration capped at n <= 12, k <= 4; "
            "use fit_vq_lloyd for larger instances");

    // Pass 1: optimal quantization cost over all partitions into <= k
    // blocks (restricted growth strings collapse relabelings).
    double e_k = std::numeric_limits<double>::infinity();
    std::vector<std::vector<int>> best_blocks;
    for_partitions(n, k, [&](const std::vector<std::vector<int>>& blocks) {
        double cost = 0.0;
        for (const auto& blk : blocks) cost += block_cost(P_hat, blk);
        if (cost < e_k) {
            e_k = cost;
            best_blocks = blocks;
        }
    });

    // Pass 2: w2sq via the exact LP against each partition-induced measure.
    // The assignment relaxation lower-bounds the LP, so partitions that
    // provably cannot beat the incumbent are skipped; seeding with the
    // pass-1 winner makes the pruning bite immediately.
    double w2sq = wasserstein(P_hat, partition_measure(P_hat, best_blocks), 2).cost;
    for_partitions(n, k, [&](const std::vector<std::vector<int>>& blocks) {
        DiscreteMeasure Q = partition_measure(P_hat, blocks);
        if (assignment_lower_bound(P_hat, Q) > w2sq + 1e-12) return;
        const double c = wasserstein(P_hat, Q, 2).cost;
        w2sq = std::min(w2sq, c);
    });

    PollardResult out;
    out.e_k = e_k;
    out.w2sq_min = w2sq;
    return out;
}

}  // namespace latcode
