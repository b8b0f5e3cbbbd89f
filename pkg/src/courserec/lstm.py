"""Multi-hot LSTM next-semester predictor.

One timeslice per semester; the input is the sum of the one-hot vectors of
that semester's courses. The hidden state feeds a fully-connected softmax
output over the course vocabulary, concatenated with optional one-hot
feature terms (major, entry type, previous-semester GPA bin). An optional
auxiliary softmax head over description stems provides scrutability.

Every student sequence is prefixed with a virtual start step carrying a
zero course vector and the student's feature one-hots, so the output at the
start step predicts the first semester and brand-new students still receive
model predictions.

All math is float64 numpy; training is single-threaded and deterministic
given the config seed.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .data import EntryType, StudentHistory

GPA_BINS = 9  # eight half-point bins over [0, 4] plus a missing bin
ENTRY_WIDTH = 2
GATES = ("f", "i", "C", "o")


class LstmError(Exception):
    pass


@dataclass
class LstmConfig:
    hidden: int = 256
    layers: int = 1
    use_major: bool = True
    use_entry: bool = True
    use_gpa: bool = True
    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    grad_clip: float = 5.0
    epochs: int = 10
    batch_size: int = 32
    seed: int = 0
    aux_weight: float | None = None  # None = auto-balance once at epoch 0

    def __post_init__(self):
        if self.hidden < 1 or self.layers < 1:
            raise ValueError("hidden and layers must be >= 1")
        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1) or self.grad_clip <= 0:
            raise ValueError("invalid optimizer settings")


def encode_multihot(course_set, vocab_size: int) -> np.ndarray:
    """Sum of one-hots of the courses in a semester, collapsed to {0,1}."""
    vec = np.zeros(vocab_size)
    for c in course_set:
        if not 0 <= c < vocab_size:
            raise LstmError(f"course index {c} out of range for |V|={vocab_size}")
        vec[c] = 1.0
    return vec


def encode_gpa_bin(gpa: float | None) -> np.ndarray:
    """Half-point GPA bins [0,0.5)...[3.5,4.0] plus a trailing missing bin."""
    vec = np.zeros(GPA_BINS)
    if gpa is None:
        vec[8] = 1.0
        return vec
    if not 0.0 <= gpa <= 4.0:
        raise LstmError(f"gpa {gpa} outside [0, 4]")
    vec[min(int(gpa / 0.5), 7)] = 1.0
    return vec


def encode_entry(entry: EntryType) -> np.ndarray:
    vec = np.zeros(ENTRY_WIDTH)
    vec[int(entry)] = 1.0
    return vec


def encode_major(major: str, majors: list[str]) -> np.ndarray:
    vec = np.zeros(len(majors))
    try:
        vec[majors.index(major)] = 1.0
    except ValueError:
        pass  # unknown major -> all-zero one-hot (missing is permitted)
    return vec


@dataclass
class LstmModel:
    config: LstmConfig
    params: dict[str, np.ndarray]
    vocab_size: int
    majors: list[str]
    bow_size: int = 0  # 0 = no auxiliary head
    bow_stems: list[str] = field(default_factory=list)
    aux_weight: float = 0.0
    epoch_losses: list[float] = field(default_factory=list)

    @property
    def has_aux(self) -> bool:
        return self.bow_size > 0


def init_model(config: LstmConfig, vocab_size: int, majors: list[str],
               bow_size: int = 0, bow_stems: list[str] | None = None) -> LstmModel:
    """Glorot-uniform weight init, biases zero.

    The auxiliary head, when present, is drawn after all base parameters so
    base weights are identical to a headless model under the same seed.
    """
    rng = np.random.default_rng(config.seed)
    H, V = config.hidden, vocab_size

    def glorot(shape):
        limit = np.sqrt(6.0 / (shape[0] + shape[1]))
        return rng.uniform(-limit, limit, size=shape)

    params: dict[str, np.ndarray] = {}
    for layer in range(config.layers):
        in_dim = V if layer == 0 else H
        for g in GATES:
            params[f"l{layer}.W{g}w"] = glorot((H, in_dim))
            params[f"l{layer}.W{g}h"] = glorot((H, H))
            params[f"l{layer}.b{g}"] = np.zeros(H)
    params["Wh"] = glorot((V, H))
    params["bfc"] = np.zeros(V)
    if config.use_major:
        params["Wm"] = glorot((V, len(majors)))
    if config.use_entry:
        params["Ws"] = glorot((V, ENTRY_WIDTH))
    if config.use_gpa:
        params["Wg"] = glorot((V, GPA_BINS))
    if bow_size:
        params["Wbow"] = glorot((bow_size, H))
        params["bbow"] = np.zeros(bow_size)
    return LstmModel(config, params, vocab_size, list(majors),
                     bow_size, list(bow_stems or []))


def _sigmoid(x: np.ndarray) -> np.ndarray:
    # stable piecewise formulation
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def lstm_cell_step(params: dict[str, np.ndarray], w_t: np.ndarray,
                   h_prev: np.ndarray, c_prev: np.ndarray, layer: int = 0):
    """Single-sample gate equations; returns (h_t, c_t)."""
    p = {k.split(".", 1)[1]: v for k, v in params.items() if k.startswith(f"l{layer}.")}
    if p["Wfw"].shape[1] != w_t.shape[0] or p["Wfh"].shape[1] != h_prev.shape[0]:
        raise LstmError("shape mismatch in lstm_cell_step")
    f = _sigmoid(p["Wfw"] @ w_t + p["Wfh"] @ h_prev + p["bf"])
    i = _sigmoid(p["Wiw"] @ w_t + p["Wih"] @ h_prev + p["bi"])
    ctil = np.tanh(p["WCw"] @ w_t + p["WCh"] @ h_prev + p["bC"])
    o = _sigmoid(p["Wow"] @ w_t + p["Woh"] @ h_prev + p["bo"])
    c_t = f * c_prev + i * ctil
    h_t = o * np.tanh(c_t)
    return h_t, c_t


@dataclass
class Batch:
    """Padded per-batch tensors. Position 0 is the virtual start step."""

    X: np.ndarray          # (B, T, V) course multi-hots
    M: np.ndarray          # (B, T, n_majors)
    S: np.ndarray          # (B, T, 2)
    G: np.ndarray          # (B, T, 9)
    targets: np.ndarray    # (B, T, V) next-semester multi-hots
    target_mask: np.ndarray  # (B, T) 1 where the position has a target
    aux_targets: np.ndarray | None = None  # (B, T, Bv)

    @property
    def shape(self):
        return self.X.shape


def build_batch(histories: list[StudentHistory], vocab_size: int,
                majors: list[str], with_targets: bool = True,
                bow_matrix: np.ndarray | None = None,
                override_major: dict[str, str] | None = None) -> Batch:
    """Assemble padded input/target tensors for a list of student histories.

    For training (`with_targets`), position p's target is semester p+1's
    multi-hot and the final semester is input-only excluded; for prediction
    the full history is fed and targets are zero.

    `bow_matrix` (V x Bv) enables auxiliary targets: the union of the target
    semester's course description stems.
    """
    B = len(histories)
    n_sems = [len(h.slices) for h in histories]
    if with_targets:
        T = 1 + max(n - 1 for n in n_sems)  # start step + inputs s_1..s_{n-1}
    else:
        T = 1 + max(n_sems)
    nm = len(majors)
    X = np.zeros((B, T, vocab_size))
    M = np.zeros((B, T, nm))
    S = np.zeros((B, T, ENTRY_WIDTH))
    G = np.zeros((B, T, GPA_BINS))
    targets = np.zeros((B, T, vocab_size))
    tmask = np.zeros((B, T))
    aux = np.zeros((B, T, bow_matrix.shape[1])) if bow_matrix is not None else None

    for b, hist in enumerate(histories):
        n = len(hist.slices)
        n_inputs = (n - 1) if with_targets else n
        first_major = hist.slices[0].major if hist.slices else ""
        if override_major and hist.student_id in override_major:
            first_major = override_major[hist.student_id]
        for p in range(n_inputs + 1):  # p=0 is the start step
            if p > 0:
                sl = hist.slices[p - 1]
                X[b, p] = encode_multihot(sl.courses, vocab_size)
                M[b, p] = encode_major(sl.major, majors)
                G[b, p] = encode_gpa_bin(sl.gpa)
            else:
                M[b, p] = encode_major(first_major, majors)
                G[b, p] = encode_gpa_bin(None)
            S[b, p] = encode_entry(hist.entry_type)
            if with_targets and p < n:
                tgt = hist.slices[p].courses  # semester p+1 in student time
                targets[b, p] = encode_multihot(tgt, vocab_size)
                tmask[b, p] = 1.0
                if aux is not None:
                    bow = bow_matrix[sorted(tgt)].max(axis=0) if tgt else 0.0
                    aux[b, p] = bow
    return Batch(X, M, S, G, targets, tmask, aux)


def forward(model: LstmModel, batch: Batch, want_cache: bool = False):
    """Run the network over a batch.

    Returns (dist, aux_dist, H_top, cache): per-position course distributions
    (B,T,V), auxiliary BOW distributions or None, topmost hidden states
    (B,T,H), and the cache needed for backprop when requested.
    """
    cfg, P = model.config, model.params
    B, T, V = batch.X.shape
    H, L = cfg.hidden, cfg.layers
    h = np.zeros((L, B, H))
    c = np.zeros((L, B, H))
    cache = {"f": [], "i": [], "ctil": [], "o": [], "c": [], "h": [],
             "tanh_c": [], "x": [], "h_prev": [], "c_prev": []}
    H_top = np.zeros((B, T, H))
    for t in range(T):
        per_layer = {k: [] for k in cache}
        x = batch.X[:, t, :]
        for layer in range(L):
            pre = f"l{layer}."
            h_prev, c_prev = h[layer], c[layer]
            a_f = x @ P[pre + "Wfw"].T + h_prev @ P[pre + "Wfh"].T + P[pre + "bf"]
            a_i = x @ P[pre + "Wiw"].T + h_prev @ P[pre + "Wih"].T + P[pre + "bi"]
            a_c = x @ P[pre + "WCw"].T + h_prev @ P[pre + "WCh"].T + P[pre + "bC"]
            a_o = x @ P[pre + "Wow"].T + h_prev @ P[pre + "Woh"].T + P[pre + "bo"]
            f = _sigmoid(a_f)
            i = _sigmoid(a_i)
            ctil = np.tanh(a_c)
            o = _sigmoid(a_o)
            c_new = f * c_prev + i * ctil
            tc = np.tanh(c_new)
            h_new = o * tc
            if want_cache:
                for key, val in (("f", f), ("i", i), ("ctil", ctil), ("o", o),
                                 ("c", c_new), ("h", h_new), ("tanh_c", tc),
                                 ("x", x), ("h_prev", h_prev), ("c_prev", c_prev)):
                    per_layer[key].append(val)
            h = h.copy(); c = c.copy()
            h[layer], c[layer] = h_new, c_new
            x = h_new
        H_top[:, t, :] = h[L - 1]
        if want_cache:
            for key in cache:
                cache[key].append(per_layer[key])

    Z = H_top @ P["Wh"].T + P["bfc"]
    if cfg.use_major:
        Z = Z + batch.M @ P["Wm"].T
    if cfg.use_entry:
        Z = Z + batch.S @ P["Ws"].T
    if cfg.use_gpa:
        Z = Z + batch.G @ P["Wg"].T
    dist = _softmax(Z)
    aux_dist = None
    if model.has_aux:
        aux_dist = _softmax(H_top @ P["Wbow"].T + P["bbow"])
    return dist, aux_dist, H_top, (cache if want_cache else None)


def loss_value(model: LstmModel, batch: Batch, dist: np.ndarray,
               aux_dist: np.ndarray | None) -> float:
    """Cross-entropy against (unnormalized) multi-hot targets.

    Per student: summed over target positions; then averaged over the batch.
    The auxiliary term is weighted by model.aux_weight.
    """
    B = dist.shape[0]
    logy = np.log(np.maximum(dist, 1e-12))
    course = -(batch.targets * logy).sum(axis=2) * batch.target_mask
    total = course.sum() / B
    if aux_dist is not None and batch.aux_targets is not None and model.aux_weight:
        logb = np.log(np.maximum(aux_dist, 1e-12))
        aux = -(batch.aux_targets * logb).sum(axis=2) * batch.target_mask
        total += model.aux_weight * aux.sum() / B
    return float(total)


def backward(model: LstmModel, batch: Batch, dist, aux_dist, cache) -> dict[str, np.ndarray]:
    """Analytic gradients of loss_value w.r.t. every parameter."""
    cfg, P = model.config, model.params
    B, T, V = batch.X.shape
    H, L = cfg.hidden, cfg.layers
    grads = {k: np.zeros_like(v) for k, v in P.items()}

    tsum = batch.targets.sum(axis=2, keepdims=True)
    dZ = (tsum * dist - batch.targets) * batch.target_mask[:, :, None] / B
    dZb = None
    if model.has_aux and batch.aux_targets is not None:
        bsum = batch.aux_targets.sum(axis=2, keepdims=True)
        dZb = (bsum * aux_dist - batch.aux_targets) \
            * batch.target_mask[:, :, None] * (model.aux_weight / B)

    H_top = np.stack([cache["h"][t][L - 1] for t in range(T)], axis=1)
    grads["Wh"] = np.einsum("btv,bth->vh", dZ, H_top)
    grads["bfc"] = dZ.sum(axis=(0, 1))
    if cfg.use_major:
        grads["Wm"] = np.einsum("btv,btm->vm", dZ, batch.M)
    if cfg.use_entry:
        grads["Ws"] = np.einsum("btv,bts->vs", dZ, batch.S)
    if cfg.use_gpa:
        grads["Wg"] = np.einsum("btv,btg->vg", dZ, batch.G)
    if dZb is not None:
        grads["Wbow"] = np.einsum("btv,bth->vh", dZb, H_top)
        grads["bbow"] = dZb.sum(axis=(0, 1))

    dh_rec = [np.zeros((B, H)) for _ in range(L)]  # from step t+1 recurrence
    dc_rec = [np.zeros((B, H)) for _ in range(L)]
    for t in range(T - 1, -1, -1):
        dh_from_above = dZ[:, t, :] @ P["Wh"]
        if dZb is not None:
            dh_from_above = dh_from_above + dZb[:, t, :] @ P["Wbow"]
        for layer in range(L - 1, -1, -1):
            pre = f"l{layer}."
            f = cache["f"][t][layer]
            i = cache["i"][t][layer]
            ctil = cache["ctil"][t][layer]
            o = cache["o"][t][layer]
            tc = cache["tanh_c"][t][layer]
            x = cache["x"][t][layer]
            h_prev = cache["h_prev"][t][layer]
            c_prev = cache["c_prev"][t][layer]

            dh = dh_rec[layer] + dh_from_above
            do = dh * tc
            dc = dh * o * (1.0 - tc * tc) + dc_rec[layer]
            df = dc * c_prev
            di = dc * ctil
            dctil = dc * i
            da_f = df * f * (1.0 - f)
            da_i = di * i * (1.0 - i)
            da_c = dctil * (1.0 - ctil * ctil)
            da_o = do * o * (1.0 - o)

            for g, da in (("f", da_f), ("i", da_i), ("C", da_c), ("o", da_o)):
                grads[pre + f"W{g}w"] += da.T @ x
                grads[pre + f"W{g}h"] += da.T @ h_prev
                grads[pre + f"b{g}"] += da.sum(axis=0)
            dh_rec[layer] = (da_f @ P[pre + "Wfh"] + da_i @ P[pre + "Wih"]
                             + da_c @ P[pre + "WCh"] + da_o @ P[pre + "Woh"])
            dc_rec[layer] = dc * f
            # gradient w.r.t. this layer's input feeds the layer below at time t
            dh_from_above = (da_f @ P[pre + "Wfw"] + da_i @ P[pre + "Wiw"]
                             + da_c @ P[pre + "WCw"] + da_o @ P[pre + "Wow"])
    return grads


class AdamState:
    def __init__(self, params: dict[str, np.ndarray]):
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0


def clip_gradients(grads: dict[str, np.ndarray], clip: float) -> float:
    """Global-norm clipping in place; returns the pre-clip norm."""
    norm = float(np.sqrt(sum(float((g * g).sum()) for g in grads.values())))
    if norm > clip:
        scale = clip / norm
        for g in grads.values():
            g *= scale
    return norm

def adam_step(params: dict[str, np.ndarray], grads: dict[str, np.ndarray],
              state: AdamState, config: LstmConfig) -> None:
    """Bias-corrected Adam update (gradients already clipped)."""
    state.t += 1
    b1, b2, eps, lr = config.beta1, config.beta2, config.eps, config.learning_rate
    for k in params:
        g = grads[k]
        state.m[k] = b1 * state.m[k] + (1 - b1) * g
        state.v[k] = b2 * state.v[k] + (1 - b2) * g * g
        mhat = state.m[k] / (1 - b1 ** state.t)
        vhat = state.v[k] / (1 - b2 ** state.t)
        params[k] -= lr * mhat / (np.sqrt(vhat) + eps)


def fit(histories: list[StudentHistory], vocab_size: int, majors: list[str],
        config: LstmConfig | None = None,
        bow_matrix: np.ndarray | None = None,
        bow_stems: list[str] | None = None) -> LstmModel:
    """Train a model from scratch on the given histories.

    Only students with >= 2 semesters contribute training targets (a single
    semester still yields the start-step target). Auxiliary head is enabled
    iff `bow_matrix` is given; its loss weight is config.aux_weight, or
    auto-balanced once against the initial course loss when None.
    """
    config = config or LstmConfig()
    usable = [h for h in histories if h.slices]
    if not usable:
        raise LstmError("no training histories")
    bow_size = bow_matrix.shape[1] if bow_matrix is not None else 0
    model = init_model(config, vocab_size, majors, bow_size, bow_stems)

    if bow_size and config.aux_weight is None:
        probe = build_batch(usable[: min(len(usable), 256)], vocab_size, majors,
                            bow_matrix=bow_matrix)
        dist, aux_dist, _, _ = forward(model, probe)
        model.aux_weight = 1.0
        course_only = loss_value(model, probe, dist, None)
        aux_only = loss_value(model, probe, dist, aux_dist) - course_only
        model.aux_weight = course_only / aux_only if aux_only > 0 else 1.0
    elif bow_size:
        model.aux_weight = config.aux_weight

    state = AdamState(model.params)
    order_rng = np.random.default_rng([config.seed, 1])
    idx = np.arange(len(usable))
    for _ in range(config.epochs):
        order_rng.shuffle(idx)
        epoch_loss, n_batches = 0.0, 0
        for start in range(0, len(idx), config.batch_size):
            chunk = [usable[j] for j in idx[start:start + config.batch_size]]
            batch = build_batch(chunk, vocab_size, majors, bow_matrix=bow_matrix)
            if batch.target_mask.sum() == 0:
                continue
            dist, aux_dist, _, cache = forward(model, batch, want_cache=True)
            epoch_loss += loss_value(model, batch, dist, aux_dist)
            grads = backward(model, batch, dist, aux_dist, cache)
            clip_gradients(grads, config.grad_clip)
            adam_step(model.params, grads, state, config)
            n_batches += 1
        model.epoch_losses.append(epoch_loss / max(n_batches, 1))
    return model


def predict_next(model: LstmModel, history: StudentHistory,
                 offered: set[int], major_hint: str | None = None) -> np.ndarray:
    """Masked, renormalized next-semester distribution after the history.

    `offered` indices keep their softmax probability, everything else is
    zeroed, and the result is renormalized to sum 1. An empty history is
    handled by the virtual start step (features only).
    """
    if not offered:
        raise LstmError("offered set is empty")
    override = {history.student_id: major_hint} if major_hint else None
    batch = build_batch([history], model.vocab_size, model.majors,
                        with_targets=False, override_major=override)
    dist, _, _, _ = forward(model, batch)
    last = (len(history.slices))  # position of the final input step
    probs = dist[0, last, :].copy()
    mask = np.zeros_like(probs)
    mask[sorted(offered)] = 1.0
    masked = probs * mask
    total = masked.sum()
    if total <= 0.0:
        warnings.warn("offered set disjoint from prediction support; uniform fallback")
        return mask / mask.sum()
    return masked / total


def top_k(dist: np.ndarray, k: int = 10) -> list[int]:
    """Indices of the k largest probabilities, ties broken by index."""
    order = np.lexsort((np.arange(len(dist)), -dist))
    return [int(i) for i in order[:k]]


def top_keywords(model: LstmModel, history: StudentHistory, k: int = 5) -> list[list[str]]:
    """Top-k auxiliary stems per fed position (start step first)."""
    if not model.has_aux:
        raise LstmError("model has no auxiliary BOW head")
    batch = build_batch([history], model.vocab_size, model.majors, with_targets=False)
    _, aux_dist, _, _ = forward(model, batch)
    out = []
    for t in range(len(history.slices) + 1):
        probs = aux_dist[0, t, :]
        order = sorted(range(len(probs)), key=lambda j: (-probs[j], model.bow_stems[j]))
        out.append([model.bow_stems[j] for j in order[:k]])
    return out


def extract_hidden_state(model: LstmModel, history: StudentHistory) -> np.ndarray:
    """Final-position topmost hidden state (pre feature concatenation)."""
    if not history.slices:
        raise LstmError("history has no semesters")
    batch = build_batch([history], model.vocab_size, model.majors, with_targets=False)
    _, _, H_top, _ = forward(model, batch)
    return H_top[0, len(history.slices), :].copy()


def gradient_check(model: LstmModel, batch: Batch, h: float = 1e-5) -> float:
    """Max relative error between analytic and central-difference gradients.

    Relative error per weight is |a - n| / max(|a|, |n|, 1e-2); the floor
    keeps finite-difference noise on near-zero gradients from dominating.
    """
    dist, aux_dist, _, cache = forward(model, batch, want_cache=True)
    grads = backward(model, batch, dist, aux_dist, cache)

    def total_loss():
        d, a, _, _ = forward(model, batch)
        return loss_value(model, batch, d, a)

    worst = 0.0
    for key, P in model.params.items():
        flat = P.reshape(-1)
        gflat = grads[key].reshape(-1)
        for j in range(flat.size):
            orig = flat[j]
            flat[j] = orig + h
            lp = total_loss()
            flat[j] = orig - h
            lm = total_loss()
            flat[j] = orig
            num = (lp - lm) / (2 * h)
            rel = abs(num - gflat[j]) / max(abs(num), abs(gflat[j]), 1e-2)
            worst = max(worst, rel)
    return worst
