#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>

#include "madelung/bridge.hpp"

namespace madelung {

namespace {

struct EdgeIntegrator {
    const MadelungState& s;
    double scale; // -(m/hbar)

    bool inside(std::optional<std::size_t> i) const { return i && s.support.contains(*i); }

    /// Phase increment from p to its neighbour along `axis` in direction `step`.
    double operator()(std::size_t p, std::size_t q, int axis, int step) const
    {
        const GridSpec& g = s.grid();
        const ScalarField& x = s.drift[axis];
        const double h = g.spacing(axis);
        const auto before = g.neighbor(p, axis, -step);
        const auto after = g.neighbor(q, axis, step);
        double integral;
        if (inside(before) && inside(after))
            integral = h * (-x[*before] + 13.0 * x[p] + 13.0 * x[q] - x[*after]) / 24.0;
        else
            integral = 0.5 * h * (x[p] + x[q]);
        return scale * step * integral;
    }
};

/// Breadth-first integration from `root`. Returns the visit order.
std::vector<std::size_t> integrate_tree(const MadelungState& s, const EdgeIntegrator& edge, std::size_t root,
                                        double root_value, std::vector<double>& phi)
{
    const GridSpec& g = s.grid();
    std::vector<std::uint8_t> seen(g.size(), 0);
    std::vector<std::size_t> order;
    order.reserve(s.support.count());
    std::deque<std::size_t> queue{root};
    seen[root] = 1;
    phi[root] = root_value;
    while (!queue.empty()) {
        const std::size_t p = queue.front();
        queue.pop_front();
        order.push_back(p);
        for (int a = 0; a < g.dim(); ++a) {
            for (int step : {-1, 1}) {
                const auto q = g.neighbor(p, a, step);
                if (!q || seen[*q] || !s.support.contains(*q)) continue;
                seen[*q] = 1;
                phi[*q] = phi[p] + edge(p, *q, a, step);
                queue.push_back(*q);
            }
        }
    }
    return order;
}

} // namespace

PhaseField reconstruct_phase(const MadelungState& state, const PhaseOptions& options)
{
    const GridSpec& g = state.grid();
    if (state.support.empty()) throw Error(ErrorCode::VanishingState, "empty support");
    int components = 0;
    state.support.components(components);
    if (components > 1)
        throw Error(ErrorCode::DisconnectedSupport,
                    "support has " + std::to_string(components) + " components; reconstruct each separately");

    // Local irrotationality check away from the mask edge.
    {
        const RegionMask core = state.support.eroded(2);
        if (!core.empty() && g.dim() > 1) {
            const double xmax = max_norm(state.drift, core);
            if (xmax > 0.0) {
                const VectorField w = curl(state.drift, DerivativeScheme::FiniteDifference);
                const double rel = max_norm(w, core) * g.min_spacing() / xmax;
                if (rel > options.curl_tolerance)
                    throw Error(ErrorCode::RotationalDrift,
                                "relative curl " + std::to_string(rel) + " exceeds tolerance");
            }
        }
    }

    std::size_t ref = 0;
    if (options.reference_index) {
        ref = *options.reference_index;
        if (ref >= g.size() || !state.support.contains(ref))
            throw Error(ErrorCode::InvalidArgument, "reference point is not on the support");
    } else {
        double best = -1.0;
        for (std::size_t i = 0; i < g.size(); ++i)
            if (state.support.contains(i) && state.rho[i] > best) {
                best = state.rho[i];
                ref = i;
            }
    }

    const EdgeIntegrator edge{state, -state.params.mass / state.params.hbar};
    std::vector<double> phi_a(g.size(), 0.0);
    const auto order = integrate_tree(state, edge, ref, options.reference_value, phi_a);

    // Second tree from the far end of the first, rebased onto the first.
    const std::size_t far = order.back();
    std::vector<double> phi_b(g.size(), 0.0);
    integrate_tree(state, edge, far, phi_a[far], phi_b);
    double tree_gap = 0.0;
    for (std::size_t p : order) tree_gap = std::max(tree_gap, std::abs(phi_a[p] - phi_b[p]));

    // Closure over every support edge (tree edges close trivially).
    double closure = 0.0;
    double closure_signed = 0.0;
    for (std::size_t p : order) {
        for (int a = 0; a < g.dim(); ++a) {
            const auto q = g.neighbor(p, a, 1);
            if (!q || !state.support.contains(*q)) continue;
            const double mismatch = phi_a[*q] - phi_a[p] - edge(p, *q, a, 1);
            if (std::abs(mismatch) > closure) {
                closure = std::abs(mismatch);
                closure_signed = mismatch;
            }
        }
    }

    const double discrepancy = std::max(tree_gap, closure);
    if (discrepancy > options.path_tolerance) {
        // A loop integral of -(m/hbar) X; convert back to drift units.
        const double loop_phase = closure >= tree_gap ? closure_signed : tree_gap;
        const double circ = -loop_phase * state.params.hbar / state.params.mass;
        const double winding = std::abs(loop_phase) / (2.0 * std::numbers::pi);
        throw TopologyError("path-dependent phase (mismatch " + std::to_string(discrepancy) +
                                " rad, winding " + std::to_string(winding) + ")",
                            circ, winding);
    }

    PhaseField out;
    out.phi = ScalarField(g, state.time);
    for (std::size_t p : order) out.phi[p] = phi_a[p];
    out.reference_index = ref;
    out.reference_value = options.reference_value;
    out.path_discrepancy = discrepancy;
    return out;
}

PhaseField anchored_phase(const WaveState& psi, const MadelungState& state, PhaseOptions options)
{
    if (!options.reference_index) {
        std::size_t ref = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < state.grid().size(); ++i)
            if (state.support.contains(i) && state.rho[i] > best) {
                best = state.rho[i];
                ref = i;
            }
        options.reference_index = ref;
    }
    options.reference_value = -std::arg(psi.psi[*options.reference_index]);
    return reconstruct_phase(state, options);
}

WaveState reconstruct_wave(const MadelungState& state, const PhaseField& phase)
{
    if (!(phase.phi.grid() == state.grid()))
        throw Error(ErrorCode::InvalidArgument, "phase and state grids differ");
    WaveState w;
    w.psi = ComplexField(state.grid(), state.time);
    for (std::size_t i = 0; i < state.grid().size(); ++i)
        if (state.support.contains(i)) w.psi[i] = std::polar(std::sqrt(state.rho[i]), -phase.phi[i]);
    w.time = state.time;
    w.params = state.params;
    w.initial_norm = w.norm();
    return w;
}

} // namespace madelung
