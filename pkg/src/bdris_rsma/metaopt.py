"""Gradient-based meta-optimization of beamformers, powers and phases.

Three small networks are trained to act as update rules for the three
variable families of the uplink sum-rate problem: a beamformer network
maps the (Re, Im) gradient of each beamformer entry to a complex
increment, a power network maps each power's scalar gradient to an
additive step, and a phase network maps each row of a group's phase
gradient to a bounded phase increment. The networks see detached
gradients only; differentiation for network training flows through the
chain of variable updates and the end-of-iteration losses.

One training run nests three loops. Every outer iteration restarts the
variables from one common initial point and applies a fixed number of
inner steps per family (beamformers, then powers, then phases); the
gradients driving each family are evaluated against the newest values
of the other two families, inherited from the previous outer iteration
where the current one has not updated them yet. Each epoch averages the
end-of-iteration losses over the outer iterations, backpropagates once,
and updates the beamformer and power networks with Adam; the phase
network steps only every phase_update_period-th epoch. The best
end-of-iteration objective (negated loss) and its solution snapshot are
tracked across the whole run; the snapshot is finally projected onto
the feasible set and re-scored.
"""

import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import autodiff as ad
from .autodiff import DivergenceError, Var
from .nets import HIDDEN_UNITS, Mlp, TrainedOptimizer
from .sysmodel import (Architecture, ScatteringMatrix, Solution, block_scale,
                       constraint_residuals, project_solution,
                       rates_from_gains, score_solution,
                       stream_rates_given_channels, sum_rate)

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class MetaConfig:
    """Hyperparameters of the unrolled meta-optimizer."""

    inner_iterations: int = 10
    outer_iterations: int = 5
    epochs: int = 300
    lr_beamformer: float = 1e-3
    lr_power: float = 1e-3
    lr_phase: float = 1.5e-3
    hidden_units: int = HIDDEN_UNITS
    phase_step_scale: float = TWO_PI
    phase_update_period: int = 5
    penalty_threshold: float = 1.0
    penalty_norm: float = 1.0
    penalty_surface: float = 1.0
    penalty_power: float = 1.0
    strict_paper: bool = False
    per_group_phase_nets: bool = False
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-8

    def __post_init__(self):
        for name in ("inner_iterations", "outer_iterations", "epochs",
                     "phase_update_period", "hidden_units"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1, got {getattr(self, name)}")
        for name in ("lr_beamformer", "lr_power", "lr_phase", "phase_step_scale"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")


@dataclass(frozen=True)
class RunConfig:
    """A scenario plus the meta-optimizer hyperparameters used on it."""

    system: object
    meta: MetaConfig = field(default_factory=MetaConfig)


@dataclass
class MetaLossBreakdown:
    """One evaluated training loss, split into its additive terms.

    Terms carry their penalty weights, so total equals rate_term plus
    the included penalty terms. Indicators are 1.0 exactly when some
    residual in the corresponding constraint group is positive.
    """

    rate_term: float
    threshold_term: float
    norm_term: float
    surface_term: float
    power_term: float
    threshold_active: float
    norm_active: float
    surface_active: float
    power_active: float
    total: float
    node: object = field(default=None, repr=False, compare=False)


@dataclass
class EpochLog:
    """Per-epoch training record (loss terms are means over outer iterations)."""

    epoch: int
    mean_loss: float
    best_sum_rate: float
    rate_term: float
    threshold_term: float
    norm_term: float
    surface_term: float
    power_term: float


@dataclass
class TrainResult:
    """Outcome of one meta-training run.

    best_sum_rate is the largest negated end-of-iteration loss seen over
    all recorded outer iterations; best_solution is that iteration's
    snapshot after projection onto the feasible set, and
    projected_sum_rate / rate_ue1 / rate_ue2 / constraint_report re-score
    the projected snapshot. status is "ok" or "diverged" (partial logs
    are kept on divergence).
    """

    best_solution: Solution
    best_sum_rate: float
    projected_sum_rate: float
    rate_ue1: float
    rate_ue2: float
    initial_sum_rate: float
    per_epoch: list
    constraint_report: object
    status: str
    epochs_run: int
    networks: object

    @property
    def per_epoch_loss(self):
        return [log.mean_loss for log in self.per_epoch]

    @property
    def per_epoch_sum_rate(self):
        return [log.best_sum_rate for log in self.per_epoch]


@dataclass
class MetaNetworks:
    """The three update-rule networks (phase holds one net per group,
    or a single shared entry)."""

    beamformer: Mlp
    power: Mlp
    phase: list

    def all_nets(self):
        return [self.beamformer, self.power] + list(self.phase)


def init_networks(system, meta, rng):
    """Fresh networks sized for the scenario.

    The beamformer network maps (Re, Im) gradient pairs to complex
    increments, the power network scalar gradients to power steps, and
    each phase network one length-M_g gradient row to a row of phase
    proposals. A single shared phase network requires equal group sizes;
    set per_group_phase_nets for mixed sizes.
    """
    beamformer = Mlp(2, 2, rng, hidden=meta.hidden_units)
    power = Mlp(1, 1, rng, hidden=meta.hidden_units)
    if system.architecture is Architecture.SINGLE_CONNECTED:
        sizes = (1,)
    else:
        sizes = tuple(int(s) for s in system.group_sizes)
    if meta.per_group_phase_nets:
        phase = [Mlp(s, s, rng, hidden=meta.hidden_units) for s in sizes]
    else:
        if len(set(sizes)) > 1:
            raise ValueError(
                f"groups of sizes {sizes} cannot share one phase network; "
                f"set per_group_phase_nets for mixed group sizes")
        phase = [Mlp(sizes[0], sizes[0], rng, hidden=meta.hidden_units)]
    return MetaNetworks(beamformer=beamformer, power=power, phase=phase)


def initial_solution(system, rng, full_matrix_phases=False):
    """Random feasible-leaning starting point.

    Beamformers are normalized complex Gaussian draws, the split powers
    share the first user's budget evenly, the second user starts at full
    budget, and phases are uniform on [0, 2*pi).
    """
    def unit_vector():
        v = (rng.standard_normal(system.n_antennas)
             + 1j * rng.standard_normal(system.n_antennas)) / np.sqrt(2.0)
        return v / np.linalg.norm(v)

    w11, w12, w2 = unit_vector(), unit_vector(), unit_vector()
    powers = np.array([system.max_power_ue1_w / 2.0,
                       system.max_power_ue1_w / 2.0,
                       system.max_power_ue2_w])
    scattering = ScatteringMatrix.random_init(
        system.architecture, system.group_sizes, system.magnitude_mode, rng,
        full_matrix_phases=full_matrix_phases)
    return Solution(w11=w11, w12=w12, w2=w2, powers=powers, scattering=scattering)


# -- scratch gradient evaluations (detached network inputs) --------------------


def _values(x):
    return x.data if isinstance(x, Var) else np.asarray(x)


def _solution_values(sol):
    w = [_values(sol.w11), _values(sol.w12), _values(sol.w2)]
    return w, _values(sol.powers)


def _effective_values(sol, ch):
    """Both users' effective channels at the solution's current values."""
    sc = sol.scattering
    if isinstance(sc, ScatteringMatrix):
        phi = sc.detached().realize().data
    else:
        phi = _values(sc)
    g1 = ch.ue1_bs + ch.ris_bs @ (phi @ ch.ue1_ris)
    g2 = ch.ue2_bs + ch.ris_bs @ (phi @ ch.ue2_ris)
    return g1, g2


def _sum_rate_node(rates):
    r11, r12, r2 = rates
    return ad.add_n([r11, r12, r2])


_LN2 = float(np.log(2.0))


def _gain_and_power_partials(a, p, noise_power_w):
    """Partials of the sum rate w.r.t. the five squared gains and the powers.

    a is (a11_1, a11_2, a12_1, a2_1, a2_2) as in rates_from_gains; the
    expressions are the closed-form chain rules of the three
    log2(1 + signal/interference) terms.
    """
    a01, a02, a11, a21, a22 = (float(x) for x in a)
    p11, p12, p2 = (float(x) for x in p)
    den11 = p12 * a01 + p2 * a02 + noise_power_w
    tot11 = den11 + p11 * a01
    den2 = p12 * a21 + noise_power_w
    tot2 = den2 + p2 * a22
    tot12 = noise_power_w + p12 * a11
    d_gain = (((p11 + p12) / tot11 - p12 / den11) / _LN2,
              (p2 / tot11 - p2 / den11) / _LN2,
              (p12 / tot12) / _LN2,
              (p12 / tot2 - p12 / den2) / _LN2,
              (p2 / tot2) / _LN2)
    d_power = ((a01 / tot11) / _LN2,
               ((a01 / tot11 - a01 / den11) + a11 / tot12
                + (a21 / tot2 - a21 / den2)) / _LN2,
               ((a02 / tot11 - a02 / den11) + a22 / tot2) / _LN2)
    return d_gain, d_power


def _filter_outputs(w_vals, g1, g2):
    """The five complex filter outputs (w^H g) entering the rate model."""
    w11, w12, w2 = w_vals
    return (np.vdot(w11, g1), np.vdot(w11, g2), np.vdot(w12, g1),
            np.vdot(w2, g1), np.vdot(w2, g2))


def _beamformer_gradients(w_vals, p_vals, g1, g2, noise_power_w):
    """(3, N) detached sum-rate gradient w.r.t. the three beamformers.

    Uses the closed form 2 * conj(w^H g) * g per squared gain, chained
    with the rate partials (verified against the reverse-mode graph).
    """
    c = _filter_outputs(w_vals, g1, g2)
    a = tuple(abs(x) ** 2 for x in c)
    d, _ = _gain_and_power_partials(a, p_vals, noise_power_w)
    return np.stack([
        2.0 * (d[0] * np.conj(c[0]) * g1 + d[1] * np.conj(c[1]) * g2),
        2.0 * (d[2] * np.conj(c[2]) * g1),
        2.0 * (d[3] * np.conj(c[3]) * g1 + d[4] * np.conj(c[4]) * g2)])


def _power_gradients(w_vals, p_vals, g1, g2, noise_power_w):
    """(3,) detached sum-rate gradient w.r.t. the transmit powers."""
    c = _filter_outputs(w_vals, g1, g2)
    a = tuple(abs(x) ** 2 for x in c)
    _, dp = _gain_and_power_partials(a, p_vals, noise_power_w)
    return np.array(dp)


def _full_phase_values(scattering):
    """Phase angles of each group as full arrays (vector for a diagonal
    surface, square matrix per group otherwise), mirror-expanded when the
    storage keeps only the upper triangle."""
    values = [_values(p) for p in scattering.phases]
    if (scattering.architecture is Architecture.SINGLE_CONNECTED
            or scattering.full_matrix_phases):
        return values
    fulls = []
    for size, vec in zip(scattering.group_sizes, values):
        full = np.zeros((size, size))
        rows, cols = ad._upper_indices(size)
        full[rows, cols] = vec
        full[cols, rows] = vec
        fulls.append(full)
    return fulls


def _phase_scratch_context(w_vals, ch):
    """Beamformer-dependent constants of the phase-gradient graph: the
    surface-side row vector and the direct-link offset of each
    beamformer/user cross gain. Valid while the beamformers are fixed."""
    w11, w12, w2 = w_vals
    rows = {0: np.conj(w11) @ ch.ris_bs, 1: np.conj(w12) @ ch.ris_bs,
            2: np.conj(w2) @ ch.ris_bs}
    direct = {1: ch.ue1_bs, 2: ch.ue2_bs}
    offsets = {(k, u): np.vdot(w, direct[u])
               for k, w in ((0, w11), (1, w12), (2, w2)) for u in (1, 2)}
    return rows, offsets


def _phase_gradients(scattering, w_vals, p_vals, ch, noise_power_w, context=None):
    """Detached sum-rate gradient w.r.t. each group's full phase array.

    Each cross gain is s0 + sum_g v_g^T Phi_g u_g with v, u, s0 fixed
    while phases move; d|c|^2/d theta_mn = -2 Im(conj(c) v_m Phi_mn u_n)
    chains with the rate partials (verified against the reverse-mode
    graph).
    """
    rows, offsets = context if context is not None else _phase_scratch_context(w_vals, ch)
    cascade = {1: ch.ue1_ris, 2: ch.ue2_ris}
    pairs = ((0, 1), (0, 2), (1, 1), (2, 1), (2, 2))

    if scattering.architecture is Architecture.SINGLE_CONNECTED:
        diagonal = np.exp(1j * _values(scattering.phases[0]))
        terms = [rows[k] * cascade[u] * diagonal for k, u in pairs]
        c = [offsets[(k, u)] + t.sum() for (k, u), t in zip(pairs, terms)]
        a = tuple(abs(x) ** 2 for x in c)
        d, _ = _gain_and_power_partials(a, p_vals, noise_power_w)
        grad = np.zeros(scattering.m_elements)
        for dk, ck, t in zip(d, c, terms):
            grad -= 2.0 * dk * np.imag(np.conj(ck) * t)
        return [grad]

    sizes = tuple(int(s) for s in scattering.group_sizes)
    bounds = np.concatenate([[0], np.cumsum(sizes)])
    scales = [block_scale(s, scattering.magnitude_mode) for s in sizes]
    blocks = [scale * np.exp(1j * theta) for scale, theta
              in zip(scales, _full_phase_values(scattering))]
    spans = list(zip(bounds[:-1], bounds[1:]))
    terms = [[np.outer(rows[k][lo:hi], cascade[u][lo:hi]) * block
              for (lo, hi), block in zip(spans, blocks)]
             for k, u in pairs]
    c = [offsets[pair] + sum(t.sum() for t in term)
         for pair, term in zip(pairs, terms)]
    a = tuple(abs(x) ** 2 for x in c)
    d, _ = _gain_and_power_partials(a, p_vals, noise_power_w)
    grads = [np.zeros((s, s)) for s in sizes]
    for dk, ck, term in zip(d, c, terms):
        for g, t in enumerate(term):
            grads[g] -= 2.0 * dk * np.imag(np.conj(ck) * t)
    return grads


# -- single network-driven update steps ----------------------------------------


def phase_regulator(x, scale):
    """scale * sigmoid(x): maps an unbounded proposal into (0, scale)."""
    return ad.mul(ad.sigmoid(ad.as_var(x)), float(scale))


def beamformer_step(net, sol, ch, system, effective=None):
    """One network update of all three beamformers.

    Each beamformer entry contributes one (Re, Im) gradient row; the
    network's 2-channel outputs are added as complex increments.
    effective may pass precomputed effective channels (g1, g2).
    """
    w_vals, p_vals = _solution_values(sol)
    g1, g2 = effective if effective is not None else _effective_values(sol, ch)
    grads = _beamformer_gradients(w_vals, p_vals, g1, g2, system.noise_power_w)
    features = np.column_stack([grads.real.reshape(-1), grads.imag.reshape(-1)])
    out = net.forward(features)
    n = system.n_antennas
    updated = []
    for k, w in enumerate((sol.w11, sol.w12, sol.w2)):
        delta = ad.columns_to_complex(ad.getitem(out, slice(k * n, (k + 1) * n)))
        updated.append(ad.add(ad.as_var(w), delta))
    return replace(sol, w11=updated[0], w12=updated[1], w2=updated[2])


def power_step(net, sol, ch, system, effective=None):
    """One network update of the three transmit powers.

    Each power contributes its scalar gradient; the updated powers are
    clamped element-wise into [0, per-user budget]. effective may pass
    precomputed effective channels (g1, g2).
    """
    w_vals, p_vals = _solution_values(sol)
    g1, g2 = effective if effective is not None else _effective_values(sol, ch)
    grads = _power_gradients(w_vals, p_vals, g1, g2, system.noise_power_w)
    out = net.forward(grads.reshape(3, 1))
    caps = np.array([system.max_power_ue1_w, system.max_power_ue1_w,
                     system.max_power_ue2_w])
    updated = ad.clamp(ad.add(ad.as_var(sol.powers), ad.reshape(out, (3,))),
                       0.0, caps)
    return replace(sol, powers=updated)


def phase_step(nets, sol, ch, system, meta, gradient_context=None):
    """One network update of every group's phase angles.

    Each row of a group's phase-gradient array passes through that
    group's network; outputs go through the bounded regulator and are
    added to the stored angles (upper triangle only, mirrored, unless
    the storage keeps full matrices), then wrapped to [0, 2*pi).
    gradient_context may pass a precomputed _phase_scratch_context.
    """
    sc = sol.scattering
    if not isinstance(sc, ScatteringMatrix):
        raise TypeError("phase_step needs a phase-parameterized scattering matrix")
    w_vals, p_vals = _solution_values(sol)
    grads = _phase_gradients(sc, w_vals, p_vals, ch, system.noise_power_w,
                             context=gradient_context)
    scale = meta.phase_step_scale

    if sc.architecture is Architecture.SINGLE_CONNECTED:
        m = sc.m_elements
        if len(nets) == 1:
            out = phase_regulator(nets[0].forward(grads[0].reshape(m, 1)), scale)
            delta = ad.reshape(out, (m,))
        else:
            parts = [ad.reshape(phase_regulator(
                nets[g].forward(grads[0][g].reshape(1, 1)), scale), (1,))
                for g in range(m)]
            delta = ad.concat_vec(parts)
        vec = ad.wrap_angle(ad.add(ad.as_var(sc.phases[0]), delta))
        return replace(sol, scattering=replace(sc, phases=[vec]))

    groups = len(sc.group_sizes)
    if len(nets) == 1:
        stacked = phase_regulator(nets[0].forward(np.vstack(grads)), scale)
        bounds = np.concatenate([[0], np.cumsum(sc.group_sizes)])
        regulated = [ad.getitem(stacked, slice(int(lo), int(hi)))
                     for lo, hi in zip(bounds[:-1], bounds[1:])]
    else:
        regulated = [phase_regulator(nets[g].forward(grads[g]), scale)
                     for g in range(groups)]
    new_phases = []
    for g, reg in enumerate(regulated):
        delta = reg if sc.full_matrix_phases else ad.gather_upper(reg)
        new_phases.append(ad.wrap_angle(ad.add(ad.as_var(sc.phases[g]), delta)))
    return replace(sol, scattering=replace(sc, phases=new_phases))


# -- training loss --------------------------------------------------------------


def meta_loss(sol, ch, system, meta):
    """Training loss of one candidate solution, with per-term breakdown.

    The loss is the negated sum rate plus weighted penalty terms for the
    four constraint groups (rate thresholds, beamformer norms, scattering
    feasibility, power budgets). By default each group's penalty sums the
    positive parts of its residuals; in strict_paper mode a group enters
    as the raw sum of its residuals gated by a 0/1 violation switch, so a
    satisfied residual can offset a violated one within the group.
    """
    r1, r2, total_rate = sum_rate(sol, ch, system.noise_power_w)
    residuals = constraint_residuals(sol, ch, system, rates=(r1, r2))
    groups = {
        "threshold": [residuals.rate_slack_ue1, residuals.rate_slack_ue2],
        "norm": [residuals.norm_dev_w11, residuals.norm_dev_w12,
                 residuals.norm_dev_w2],
        "surface": [residuals.unitarity_dev, residuals.symmetry_dev],
        "power": [residuals.power_excess_ue1, residuals.power_excess_ue2],
    }
    # hinge only where a residual can go negative; deviation residuals
    # are already their own positive parts
    hinged = {"threshold", "power"}
    weights = {"threshold": meta.penalty_threshold, "norm": meta.penalty_norm,
               "surface": meta.penalty_surface, "power": meta.penalty_power}

    parts, coeffs = [ad.neg(total_rate)], [1.0]
    term_values, indicators = {}, {}
    for name, members in groups.items():
        active = 1.0 if any(float(m.data) > 0.0 for m in members) else 0.0
        indicators[name] = active
        if meta.strict_paper:
            node = ad.add_n(members) if active else None
        elif name in hinged:
            node = ad.add_n([ad.relu(m) for m in members])
        else:
            node = ad.add_n(members)
        if node is None:
            term_values[name] = 0.0
        else:
            parts.append(node)
            coeffs.append(weights[name])
            term_values[name] = weights[name] * float(node.data)
    total = ad.add_n(parts, coeffs=coeffs)
    return MetaLossBreakdown(
        rate_term=-float(total_rate.data),
        threshold_term=term_values["threshold"], norm_term=term_values["norm"],
        surface_term=term_values["surface"], power_term=term_values["power"],
        threshold_active=indicators["threshold"], norm_active=indicators["norm"],
        surface_active=indicators["surface"], power_active=indicators["power"],
        total=float(total.data), node=total)


# -- the full training loop ------------------------------------------------------


def run_meta_training(ch, config, rng, trace=None):
    """Train the three update networks on one channel realization.

    config is a RunConfig; rng drives network and variable initialization.
    trace, if given, is called with dict events ("outer_start",
    "outer_end", "epoch_end") carrying copies of internal state for
    instrumentation. Returns a TrainResult; a non-finite loss or network
    output stops training early with status "diverged" and partial logs.
    """
    system, meta = config.system, config.meta
    if ch.n_antennas != system.n_antennas or ch.m_elements != system.m_elements:
        raise ValueError(
            f"channel set is {ch.n_antennas}x{ch.m_elements} but the scenario "
            f"expects {system.n_antennas}x{system.m_elements}")

    networks = init_networks(system, meta, rng)
    optimizers = [TrainedOptimizer.create(net, lr, meta.adam_beta1,
                                          meta.adam_beta2, meta.adam_epsilon)
                  for net, lr in ([(networks.beamformer, meta.lr_beamformer),
                                   (networks.power, meta.lr_power)]
                                  + [(p, meta.lr_phase) for p in networks.phase])]
    phase_optimizers = optimizers[2:]

    start = initial_solution(system, rng, full_matrix_phases=meta.strict_paper)
    initial_projected = project_solution(start, system)
    _, _, initial_sum_rate, _ = score_solution(initial_projected, ch, system)

    start_w = [start.w11.copy(), start.w12.copy(), start.w2.copy()]
    start_p = start.powers.copy()
    start_phases = [p.copy() for p in start.scattering.phases]
    held = start.detached()

    best_objective = float("-inf")
    best_snapshot = start.detached()
    logs = []
    status = "ok"

    for epoch in range(meta.epochs):
        loss_nodes, breakdowns = [], []
        try:
            for outer in range(meta.outer_iterations):
                sol = Solution(
                    w11=start_w[0].copy(), w12=start_w[1].copy(),
                    w2=start_w[2].copy(), powers=start_p.copy(),
                    scattering=replace(start.scattering,
                                       phases=[p.copy() for p in start_phases]))
                if trace is not None:
                    trace({"kind": "outer_start", "epoch": epoch, "outer": outer,
                           "beamformers": [w.copy() for w in (sol.w11, sol.w12, sol.w2)],
                           "powers": sol.powers.copy(),
                           "phases": [p.copy() for p in sol.scattering.phases]})

                # beamformer phase: rates evaluated against held powers/surface
                held_effective = _effective_values(held, ch)
                context = replace(held, w11=sol.w11, w12=sol.w12, w2=sol.w2)
                for _ in range(meta.inner_iterations):
                    context = beamformer_step(networks.beamformer, context, ch,
                                              system, effective=held_effective)
                # power phase: fresh beamformers, held surface
                context = replace(context, powers=sol.powers)
                for _ in range(meta.inner_iterations):
                    context = power_step(networks.power, context, ch, system,
                                         effective=held_effective)
                # phase phase: fresh beamformers and powers
                context = replace(context, scattering=sol.scattering)
                w_now, _ = _solution_values(context)
                phase_context = _phase_scratch_context(w_now, ch)
                for _ in range(meta.inner_iterations):
                    context = phase_step(networks.phase, context, ch, system,
                                         meta, gradient_context=phase_context)
                sol = context

                breakdown = meta_loss(sol, ch, system, meta)
                loss_nodes.append(breakdown.node)
                breakdowns.append(breakdown)
                objective = -breakdown.total
                if objective > best_objective:
                    best_objective = objective
                    best_snapshot = sol.detached()
                held = sol.detached()
                if trace is not None:
                    trace({"kind": "outer_end", "epoch": epoch, "outer": outer,
                           "loss": breakdown.total, "objective": objective})

            mean_loss = ad.add_n(loss_nodes,
                                 coeffs=[1.0 / meta.outer_iterations] * meta.outer_iterations)
            if not np.isfinite(mean_loss.data):
                raise DivergenceError("diverged: non-finite mean meta loss")
            ad.backward(mean_loss)
            optimizers[0].apply_gradients()
            optimizers[1].apply_gradients()
            if (epoch + 1) % meta.phase_update_period == 0:
                for opt in phase_optimizers:
                    opt.apply_gradients()
            for opt in optimizers:
                opt.zero_grads()
        except DivergenceError:
            status = "diverged"
            break

        def term_mean(name):
            return float(np.mean([getattr(b, name) for b in breakdowns]))

        logs.append(EpochLog(
            epoch=epoch, mean_loss=float(mean_loss.data),
            best_sum_rate=best_objective,
            rate_term=term_mean("rate_term"),
            threshold_term=term_mean("threshold_term"),
            norm_term=term_mean("norm_term"),
            surface_term=term_mean("surface_term"),
            power_term=term_mean("power_term")))
        if trace is not None:
            trace({"kind": "epoch_end", "epoch": epoch,
                   "mean_loss": float(mean_loss.data),
                   "best_objective": best_objective,
                   "phase_params": [[p.data.copy() for p in net.params()]
                                    for net in networks.phase]})

    projected = project_solution(best_snapshot, system)
    rate_ue1, rate_ue2, projected_sum_rate, report = score_solution(projected, ch, system)
    return TrainResult(
        best_solution=projected, best_sum_rate=best_objective,
        projected_sum_rate=projected_sum_rate,
        rate_ue1=rate_ue1, rate_ue2=rate_ue2,
        initial_sum_rate=initial_sum_rate,
        per_epoch=logs, constraint_report=report, status=status,
        epochs_run=len(logs), networks=networks)
