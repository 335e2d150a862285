"""Extended-Kalman Poisson multi-Bernoulli SLAM filter.

The belief holds a Gaussian UE density, a uniform Poisson intensity for
still-undetected landmarks (per kind), and one Bernoulli component per
potential landmark. Each update ranks the gamma most likely data
associations, performs a joint linearized UE+landmark update under each,
and reduces the resulting mixture back to a single PMB.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.special import logsumexp

from .assignment import kbest
from .config import FilterParams
from .dynamics import MotionConfig, propagate, transition_jacobian
from .errors import (
    DegenerateGeometry,
    Infeasible,
    InfeasibleBirth,
    NoFeasibleDA,
    NumericalFailure,
)
from .geometry import (
    Landmark,
    LandmarkKind,
    Measurement,
    UEState,
    birth_position,
    measure_array,
)
from .jacobians import meas_jacobian_lm, meas_jacobian_ue
from .sensing import Scan, SensorConfig

_LOG_TINY = -745.0  # ~ log of the smallest positive double
_KINDS = (LandmarkKind.VA, LandmarkKind.SP)


@dataclass
class GaussianDensity:
    mean: np.ndarray
    cov: np.ndarray

    def copy(self) -> "GaussianDensity":
        return GaussianDensity(self.mean.copy(), self.cov.copy())


@dataclass
class KindBranch:
    """One landmark-type interpretation of a Bernoulli component."""

    kind: LandmarkKind
    weight: float
    density: GaussianDensity

    def copy(self) -> "KindBranch":
        return KindBranch(self.kind, self.weight, self.density.copy())


@dataclass
class BernoulliComponent:
    """Potential landmark: existence probability plus a kind mixture.

    `provenance` records which true landmark spawned the component; it is
    simulation metadata read only by the DA diagnostics, never by inference.
    """

    r: float
    branches: list  # of KindBranch, weights summing to 1
    provenance: int = -1

    def dominant(self) -> KindBranch:
        return max(self.branches, key=lambda b: b.weight)

    def copy(self) -> "BernoulliComponent":
        return BernoulliComponent(self.r, [b.copy() for b in self.branches],
                                  self.provenance)


@dataclass
class UpdateDiagnostics:
    """Per-update DA bookkeeping for truth-referenced diagnostics."""

    da_weights: np.ndarray  # normalized over the selected associations
    da_columns: list  # per DA: assigned column per assignment row
    n_meas: int
    row_provenance: list  # provenance per row (None for the BS row)
    row_r: list  # prior existence per row (1 for the BS row)


@dataclass
class PMBBelief:
    ue: GaussianDensity
    ppp: dict  # LandmarkKind -> intensity (expected landmarks per m^3)
    bernoullis: list = field(default_factory=list)
    diagnostics: UpdateDiagnostics | None = None

    @property
    def hypothesis_weights(self) -> list[float]:
        """PMB form keeps exactly one global hypothesis."""
        return [1.0]


@dataclass(frozen=True, eq=False)
class FilterConfig:
    """Everything the recursion needs besides the belief itself."""

    params: FilterParams
    sensor: SensorConfig
    motion: MotionConfig
    bs: Landmark
    with_doppler: bool = True


def initial_belief(ue_mean, ue_cov, cfg: FilterConfig) -> PMBBelief:
    vol = cfg.params.birth_region_volume
    ppp = {
        LandmarkKind.VA: cfg.params.ppp_birth_count_va / vol,
        LandmarkKind.SP: cfg.params.ppp_birth_count_sp / vol,
    }
    return PMBBelief(
        ue=GaussianDensity(np.asarray(ue_mean, dtype=float).copy(),
                           np.asarray(ue_cov, dtype=float).copy()),
        ppp=ppp,
    )


def repair_psd(cov: np.ndarray) -> np.ndarray:
    """Symmetrize and clamp tiny negative eigenvalues; fail on large ones."""
    sym = 0.5 * (cov + cov.T)
    w, v = np.linalg.eigh(sym)
    tol = 1e-6 * max(float(np.trace(sym)), 1.0)
    if w[0] < -tol:
        raise NumericalFailure(
            f"covariance has eigenvalue {w[0]:.3e} below -{tol:.3e}")
    if w[0] >= 0.0:
        return sym
    return (v * np.clip(w, 0.0, None)) @ v.T


def predict(belief: PMBBelief, motion: MotionConfig) -> PMBBelief:
    """Propagate the UE density through the motion model; the map is static."""
    mean_state = UEState.from_array(belief.ue.mean)
    F = transition_jacobian(mean_state, motion)
    new_mean = propagate(mean_state, motion).as_array()
    new_cov = repair_psd(F @ belief.ue.cov @ F.T + motion.process_noise)
    return PMBBelief(
        ue=GaussianDensity(new_mean, new_cov),
        ppp=dict(belief.ppp),
        bernoullis=[b.copy() for b in belief.bernoullis],
        diagnostics=None,
    )


def _wrap_innovation(nu: np.ndarray) -> np.ndarray:
    out = nu.copy()
    for col in (1, 3):  # azimuth components can straddle +-pi
        out[col] = (out[col] + np.pi) % (2 * np.pi) - np.pi
    return out


class _RowModel:
    """Measurement-independent linearization of one (component, kind) row."""

    __slots__ = ("pred", "A", "B", "S_chol", "logdet")

    def __init__(self, pred, A, B, S):
        self.pred = pred
        self.A = A
        self.B = B
        self.S_chol = cho_factor(0.5 * (S + S.T))
        self.logdet = 2.0 * float(np.sum(np.log(np.diag(self.S_chol[0]))))

    def pair(self, z: np.ndarray) -> "_Pair":
        return _Pair(self, _wrap_innovation(z - self.pred))


class _Pair:
    """One (row, measurement) pairing: innovation, gate distance, likelihood."""

    __slots__ = ("nu", "A", "B", "loglik", "maha2")

    def __init__(self, model: _RowModel, nu: np.ndarray):
        self.nu = nu
        self.A = model.A
        self.B = model.B
        self.maha2 = float(nu @ cho_solve(model.S_chol, nu))
        self.loglik = -0.5 * (self.maha2 + model.logdet
                              + len(nu) * math.log(2 * math.pi))


def _row_model(lm: Landmark, density: GaussianDensity | None,
               ue: GaussianDensity, R: np.ndarray, speed: float,
               bs_pos: np.ndarray, with_doppler: bool) -> _RowModel | None:
    """Linearize one row; None when the geometry or factorization fails."""
    try:
        ue_state = UEState.from_array(ue.mean)
        pred = measure_array(lm, ue_state, speed, bs_pos, with_doppler)
        A = meas_jacobian_ue(lm, ue_state, speed, bs_pos, with_doppler)
        if density is None:
            B = None
            S = A @ ue.cov @ A.T + R
        else:
            B = meas_jacobian_lm(lm, ue_state, speed, bs_pos, with_doppler)
            S = A @ ue.cov @ A.T + B @ density.cov @ B.T + R
        return _RowModel(pred, A, B, S)
    except (DegenerateGeometry, np.linalg.LinAlgError):
        return None


def _joint_update(ue: GaussianDensity, lm_densities: list, pairs: list,
                  R: np.ndarray) -> tuple[GaussianDensity, list]:
    """Stacked linear update of the UE and all associated landmarks.

    `pairs[j]` carries the cached linearization for `lm_densities[j]`; a None
    landmark slot denotes the BS row (UE-only block).
    """
    d = R.shape[0]
    n = 4 + 3 * sum(1 for dens in lm_densities if dens is not None)
    x = np.zeros(n)
    P = np.zeros((n, n))
    x[:4] = ue.mean
    P[:4, :4] = ue.cov
    offsets = []
    off = 4
    for dens in lm_densities:
        if dens is None:
            offsets.append(None)
            continue
        offsets.append(off)
        x[off:off + 3] = dens.mean
        P[off:off + 3, off:off + 3] = dens.cov
        off += 3
    m_rows = d * len(pairs)
    H = np.zeros((m_rows, n))
    nu = np.zeros(m_rows)
    R_stack = np.zeros((m_rows, m_rows))
    for j, pair in enumerate(pairs):
        rows = slice(j * d, (j + 1) * d)
        H[rows, :4] = pair.A
        if offsets[j] is not None:
            H[rows, offsets[j]:offsets[j] + 3] = pair.B
        nu[rows] = pair.nu
        R_stack[rows, rows] = R
    S = H @ P @ H.T + R_stack
    try:
        chol = cho_factor(0.5 * (S + S.T))
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"joint innovation covariance not PD: {exc}") from exc
    K = cho_solve(chol, H @ P).T
    x_post = x + K @ nu
    IKH = np.eye(n) - K @ H
    P_post = IKH @ P @ IKH.T + K @ R_stack @ K.T
    ue_post = GaussianDensity(x_post[:4], repair_psd(P_post[:4, :4]))
    lm_posts = []
    for dens, off in zip(lm_densities, offsets):
        if dens is None:
            lm_posts.append(None)
        else:
            lm_posts.append(GaussianDensity(
                x_post[off:off + 3],
                repair_psd(P_post[off:off + 3, off:off + 3])))
    return ue_post, lm_posts


def _moment_match(weights, means, covs, wrap_dim: int | None = None):
    """Collapse a weighted Gaussian mixture into a single Gaussian."""
    w = np.asarray(weights, dtype=float)
    w = w / w.sum()
    means = [np.asarray(m, dtype=float) for m in means]
    ref = means[int(np.argmax(w))]
    adj = []
    for m in means:
        m = m.copy()
        if wrap_dim is not None:
            m[wrap_dim] = ref[wrap_dim] + float(
                (m[wrap_dim] - ref[wrap_dim] + np.pi) % (2 * np.pi) - np.pi)
        adj.append(m)
    mean = sum(wi * mi for wi, mi in zip(w, adj))
    cov = sum(wi * (ci + np.outer(mi - mean, mi - mean))
              for wi, mi, ci in zip(w, adj, covs))
    return mean, repair_psd(cov)


@dataclass
class _BirthCandidate:
    log_w: float  # log(clutter density + detected-PPP mass)
    r: float
    branches: list  # KindBranch list (normalized), empty when no birth
    provenance: int


def _birth_candidate(z: np.ndarray, label: int, ue: GaussianDensity,
                     ppp: dict, cfg: FilterConfig, R: np.ndarray) -> _BirthCandidate:
    """Birth-or-clutter weight and the spawned component for one measurement.

    The detected-PPP mass integrates the measurement likelihood over landmark
    positions by linearizing around the range+AOA inverse point; the same
    linearization supplies the birth density (information-form covariance,
    UE prior uncertainty folded into the effective noise).
    """
    ue_state = UEState.from_array(ue.mean)
    bs_pos = cfg.bs.position
    d = len(z)
    log_clutter = (math.log(cfg.sensor.clutter_density(cfg.with_doppler))
                   if cfg.sensor.clutter_rate > 0.0 else -np.inf)
    p_d = cfg.sensor.detection_prob
    branch_logs = []
    branches = []
    if p_d > 0.0:
        try:
            meas = Measurement.from_array(z)
        except ValueError:
            meas = None  # unphysical clutter draw (non-positive range)
        for kind in _KINDS:
            intensity = ppp.get(kind, 0.0)
            if meas is None or intensity <= 0.0:
                continue
            try:
                x_b = birth_position(meas, ue_state, bs_pos, kind)
                lm = Landmark(x_b, kind)
                pred = measure_array(lm, ue_state, cfg.motion.speed, bs_pos,
                                     cfg.with_doppler)
                A = meas_jacobian_ue(lm, ue_state, cfg.motion.speed, bs_pos,
                                     cfg.with_doppler)
                B = meas_jacobian_lm(lm, ue_state, cfg.motion.speed, bs_pos,
                                     cfg.with_doppler)
            except (InfeasibleBirth, DegenerateGeometry, ValueError):
                continue
            r_eff = A @ ue.cov @ A.T + R
            try:
                chol = cho_factor(0.5 * (r_eff + r_eff.T))
                G = B.T @ cho_solve(chol, B)
                g_chol = cho_factor(0.5 * (G + G.T))
            except np.linalg.LinAlgError:
                continue
            nu = _wrap_innovation(z - pred)
            corr = cho_solve(g_chol, B.T @ cho_solve(chol, nu))
            quad = float(nu @ cho_solve(chol, nu)) - float(corr @ G @ corr)
            logdet_r = 2.0 * float(np.sum(np.log(np.diag(chol[0]))))
            logdet_g = 2.0 * float(np.sum(np.log(np.diag(g_chol[0]))))
            log_integral = (-0.5 * quad + 0.5 * (3 - d) * math.log(2 * math.pi)
                            - 0.5 * logdet_r - 0.5 * logdet_g)
            cov_b = cho_solve(g_chol, np.eye(3))
            branch_logs.append(math.log(intensity) + math.log(p_d) + log_integral)
            branches.append(KindBranch(
                kind, 0.0, GaussianDensity(x_b + corr, repair_psd(cov_b))))
    if branch_logs:
        log_birth = float(logsumexp(branch_logs))
        log_total = float(np.logaddexp(log_clutter, log_birth))
        r_b = math.exp(log_birth - log_total)
        probs = np.exp(np.asarray(branch_logs) - log_birth)
        for br, pr in zip(branches, probs):
            br.weight = float(pr)
        return _BirthCandidate(log_total, r_b, branches, label)
    return _BirthCandidate(log_clutter, 0.0, [], label)


def update(belief: PMBBelief, scan: Scan, cfg: FilterConfig) -> PMBBelief:
    """One measurement update of the PMB belief.

    Gates measurement-component pairs, builds the association cost matrix
    from local hypothesis likelihoods (detection, misdetection, birth from
    the PPP, clutter), keeps the gamma best global associations, updates
    jointly under each, and moment-matches back to a single PMB.
    """
    d = 6 if cfg.with_doppler else 5
    n_meas = scan.zs.shape[0]
    if n_meas and scan.zs.shape[1] < d:
        raise ValueError("scan does not carry the Doppler component")
    zs = scan.zs[:, :d] if n_meas else np.zeros((0, d))
    labels = scan.truth_assoc
    R = cfg.sensor.noise_cov(cfg.with_doppler)
    p_d = cfg.sensor.detection_prob
    gate2 = cfg.params.gate_radius**2
    ue = belief.ue
    tracks = belief.bernoullis

    # linearize each row once; innovations per measurement are then cheap
    bs_pairs: dict[int, _Pair] = {}
    bs_model = _row_model(cfg.bs, None, ue, R, cfg.motion.speed,
                          cfg.bs.position, cfg.with_doppler)
    if bs_model is not None:
        for m in range(n_meas):
            pair = bs_model.pair(zs[m])
            if pair.maha2 <= gate2:
                bs_pairs[m] = pair

    track_pairs: dict[tuple[int, int, LandmarkKind], _Pair] = {}
    pair_logmix: dict[tuple[int, int], float] = {}
    for i, tr in enumerate(tracks):
        models = {}
        for br in tr.branches:
            models[br.kind] = _row_model(Landmark(br.density.mean, br.kind),
                                         br.density, ue, R, cfg.motion.speed,
                                         cfg.bs.position, cfg.with_doppler)
        for m in range(n_meas):
            logs = []
            for br in tr.branches:
                model = models[br.kind]
                if model is None:
                    continue
                pair = model.pair(zs[m])
                if pair.maha2 > gate2:
                    continue
                track_pairs[(i, m, br.kind)] = pair
                logs.append(math.log(max(br.weight, 1e-300)) + pair.loglik)
            if logs:
                pair_logmix[(i, m)] = float(logsumexp(logs))

    births = [_birth_candidate(zs[m], int(labels[m]), ue, belief.ppp, cfg, R)
              for m in range(n_meas)]
    for m, cand in enumerate(births):
        gates_somewhere = m in bs_pairs or any(
            (i, m) in pair_logmix for i in range(len(tracks)))
        if not np.isfinite(cand.log_w) and not gates_somewhere:
            raise NoFeasibleDA(
                f"measurement {m} gates nothing and the clutter model is empty")

    # cost matrix: rows = BS + tracks, columns = measurements + one dummy per
    # row (misdetection). Each row is normalized by its misdetection weight
    # and each measurement column by its birth-or-clutter weight, so any
    # complete assignment's cost differs from the hypothesis negative
    # log-weight by one shared constant.
    n_rows = 1 + len(tracks)
    # clamp guards the misdetection map, which amplifies any float excess
    # above 1 (its denominator vanishes as r approaches 1/p_d)
    prior_r = [min(tr.r, 1.0) for tr in tracks]
    log_w0 = np.empty(n_rows)
    log_w0[0] = math.log1p(-p_d) if p_d < 1.0 else -np.inf
    for i, r in enumerate(prior_r):
        w0 = 1.0 - r * p_d
        log_w0[1 + i] = math.log(w0) if w0 > 0.0 else -np.inf
    cost = np.full((n_rows, n_meas + n_rows), np.inf)
    for m, pair in bs_pairs.items():
        log_det = (math.log(p_d) if p_d > 0 else -np.inf) + pair.loglik
        norm = log_w0[0] if np.isfinite(log_w0[0]) else 0.0
        cost[0, m] = -(log_det - norm - max(births[m].log_w, _LOG_TINY))
    for (i, m), log_mix in pair_logmix.items():
        log_det = math.log(max(prior_r[i] * p_d, 1e-300)) + log_mix
        norm = log_w0[1 + i] if np.isfinite(log_w0[1 + i]) else 0.0
        cost[1 + i, m] = -(log_det - norm - max(births[m].log_w, _LOG_TINY))
    for row in range(n_rows):
        cost[row, n_meas + row] = 0.0 if np.isfinite(log_w0[row]) else np.inf

    try:
        hypotheses = kbest(cost, cfg.params.gamma)
    except Infeasible as exc:
        raise NoFeasibleDA(str(exc)) from exc

    log_w_alpha = np.array([-h.cost for h in hypotheses])
    log_w_alpha -= logsumexp(log_w_alpha)
    w_alpha = np.exp(log_w_alpha)
    w_alpha /= w_alpha.sum()

    # per-association joint updates
    ue_means, ue_covs = [], []
    track_posts = [[] for _ in tracks]  # per track: (w, r, branches) per DA
    birth_unassigned_w = np.zeros(n_meas)
    misdet_r = [r * (1.0 - p_d) / (1.0 - r * p_d) if r * p_d < 1.0 else 0.0
                for r in prior_r]

    for w_h, hyp in zip(w_alpha, hypotheses):
        assigned = {row: col for row, col in enumerate(hyp.cols) if col < n_meas}
        pairs = []
        lm_densities = []
        paired = []  # (track index, m, dominant kind, per-kind logs)
        if 0 in assigned:
            pairs.append(bs_pairs[assigned[0]])
            lm_densities.append(None)
        for i, tr in enumerate(tracks):
            m = assigned.get(1 + i)
            if m is None:
                continue
            kind_logs = {}
            for br in tr.branches:
                pair = track_pairs.get((i, m, br.kind))
                if pair is not None:
                    kind_logs[br.kind] = math.log(max(br.weight, 1e-300)) + pair.loglik
            dom_kind = max(kind_logs, key=kind_logs.get)
            dom_branch = next(br for br in tr.branches if br.kind is dom_kind)
            pairs.append(track_pairs[(i, m, dom_kind)])
            lm_densities.append(dom_branch.density)
            paired.append((i, m, dom_kind, kind_logs))
        if pairs:
            ue_post, lm_posts = _joint_update(ue, lm_densities, pairs, R)
        else:
            ue_post, lm_posts = ue.copy(), []
        ue_means.append(ue_post.mean)
        ue_covs.append(ue_post.cov)

        dom_posts = {}
        post_idx = 1 if 0 in assigned else 0
        for (i, m, dom_kind, kind_logs) in paired:
            dom_posts[i] = (m, dom_kind, kind_logs, lm_posts[post_idx])
            post_idx += 1

        for i, tr in enumerate(tracks):
            if i in dom_posts:
                m, dom_kind, kind_logs, dom_post = dom_posts[i]
                total = logsumexp(list(kind_logs.values()))
                branches_post = []
                for br in tr.branches:
                    if br.kind not in kind_logs:
                        continue  # this interpretation failed the gate
                    w_k = math.exp(kind_logs[br.kind] - total)
                    if br.kind is dom_kind:
                        dens = dom_post
                    else:
                        pair = track_pairs[(i, m, br.kind)]
                        _, posts = _joint_update(ue, [br.density], [pair], R)
                        dens = posts[0]
                    branches_post.append(KindBranch(br.kind, w_k, dens))
                track_posts[i].append((w_h, 1.0, branches_post))
            else:
                track_posts[i].append(
                    (w_h, misdet_r[i], [br.copy() for br in tr.branches]))
        assigned_meas = set(assigned.values())
        for m in range(n_meas):
            if m not in assigned_meas:
                birth_unassigned_w[m] += w_h

    # reduction to a single PMB: marginal existence, per-kind moment matching
    new_ue_mean, new_ue_cov = _moment_match(w_alpha, ue_means, ue_covs, wrap_dim=2)
    new_tracks = []
    for tr, posts in zip(tracks, track_posts):
        r_new = min(float(sum(w * r for w, r, _ in posts)), 1.0)
        if r_new < cfg.params.prune_r:
            continue
        per_kind = {}
        for w_h, r_h, branches_post in posts:
            for br in branches_post:
                per_kind.setdefault(br.kind, []).append((w_h * r_h * br.weight,
                                                         br.density))
        branches_new = []
        for kind, entries in per_kind.items():
            mass = float(sum(w for w, _ in entries))
            if mass <= 0.0:
                continue
            mean, cov = _moment_match([w for w, _ in entries],
                                      [dens.mean for _, dens in entries],
                                      [dens.cov for _, dens in entries])
            branches_new.append(KindBranch(kind, mass, GaussianDensity(mean, cov)))
        total_mass = sum(br.weight for br in branches_new)
        branches_new = [br for br in branches_new
                        if br.weight / total_mass >= cfg.params.kind_prune]
        renorm = sum(br.weight for br in branches_new)
        for br in branches_new:
            br.weight /= renorm
        new_tracks.append(BernoulliComponent(r_new, branches_new, tr.provenance))

    for m, cand in enumerate(births):
        r_birth = min(float(birth_unassigned_w[m] * cand.r), 1.0)
        if r_birth >= cfg.params.prune_r and cand.branches:
            new_tracks.append(BernoulliComponent(
                r_birth, [br.copy() for br in cand.branches], cand.provenance))

    if len(new_tracks) > cfg.params.max_components:
        new_tracks.sort(key=lambda t: -t.r)
        new_tracks = new_tracks[: cfg.params.max_components]

    diagnostics = UpdateDiagnostics(
        da_weights=w_alpha,
        da_columns=[h.cols for h in hypotheses],
        n_meas=n_meas,
        row_provenance=[None] + [tr.provenance for tr in tracks],
        row_r=[1.0] + [tr.r for tr in tracks],
    )
    return PMBBelief(
        ue=GaussianDensity(new_ue_mean, new_ue_cov),
        ppp={kind: lam * (1.0 - p_d) for kind, lam in belief.ppp.items()},
        bernoullis=new_tracks,
        diagnostics=diagnostics,
    )


@dataclass(frozen=True)
class LandmarkEstimate:
    position: np.ndarray
    kind: LandmarkKind
    r: float


@dataclass(frozen=True)
class MapEstimate:
    ue: UEState
    landmarks: list


def estimate(belief: PMBBelief, report_r: float = 0.5) -> MapEstimate:
    """UE mean plus all landmarks whose existence clears the threshold.

    Each landmark is reported at its most probable kind with that kind's mean.
    """
    lms = []
    for tr in belief.bernoullis:
        if tr.r >= report_r:
            dom = tr.dominant()
            lms.append(LandmarkEstimate(dom.density.mean.copy(), dom.kind, tr.r))
    return MapEstimate(UEState.from_array(belief.ue.mean), lms)


def da_diagnostics(belief: PMBBelief, scan: Scan) -> dict:
    """Weight the filter put on the ground-truth association of this scan.

    The truth association sends each measurement to the BS row, to the track
    whose provenance matches the originating landmark (highest existence on
    ties), or to no row (clutter and first-time detections). Returns weight 0
    when the truth association was not among the selected hypotheses.
    """
    diag = belief.diagnostics
    if diag is None:
        raise ValueError("belief carries no update diagnostics")
    labels = scan.truth_assoc
    n_rows = len(diag.row_provenance)
    required = {}
    for m, label in enumerate(labels):
        if label == 0:
            required[m] = 0
        elif label > 0:
            rows = [r for r in range(1, n_rows) if diag.row_provenance[r] == label]
            required[m] = max(rows, key=lambda r: diag.row_r[r]) if rows else None
        else:
            required[m] = None
    weight = 0.0
    for w, cols in zip(diag.da_weights, diag.da_columns):
        assigned = {col: row for row, col in enumerate(cols) if col < diag.n_meas}
        if all(assigned.get(m) == required[m] for m in range(diag.n_meas)):
            weight += float(w)
    return {"correct_da_weight": weight}
