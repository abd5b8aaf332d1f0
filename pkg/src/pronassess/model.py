"""The trainable scoring head: phone-cue encoder, cross-attention fusion,
and two 11-class projection heads for fluency and prosody.

Per utterance the forward pass runs:

1. phone embedding -> tanh feedforward, concatenated with the GoPD value
   and 4 pooled descriptors into per-phoneme rows;
2. a bidirectional LSTM over those rows (the phone-cue encoder);
3. scaled dot-product cross-attention with the encoder states as queries
   and the contextual acoustic rows as keys and values;
4. a fusion sequence [acoustic rows; attention rows; projected utterance
   functionals as one extra token] through a second bidirectional LSTM,
   mean-pooled, with the projected functionals added back as a residual;
5. two affine softmax heads over score classes 0..10.

Raw descriptor scales differ by orders of magnitude (dB, semitones,
log-densities), which would saturate the recurrent gates at the pinned
uniform init, so the network standardizes its numeric inputs with the
fixed constants below before anything learnable sees them.

All parameters are float64. Gradients are exact reverse-mode derivatives,
checked against central finite differences in the test suite.
"""

from dataclasses import dataclass

import numpy as np

from .assembly import FusionInput
from .errors import FormatError, InventoryError, ValidationError
from .lstm import bilstm_backward, bilstm_forward

# Standardization of [gopd, loudness, alpha_db, f0_st, jitter] rows.
NUMERIC_OFFSET = np.array([-5.0, 1.0, 0.0, 30.0, 0.0])
NUMERIC_SCALE = np.array([1.5, 2.0, 8.0, 20.0, 0.02])
# Standardization of the 13 utterance functionals.
U_OFFSET = np.array([30.0, 0.0, 30.0, 30.0, 30.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0])
U_SCALE = np.array([20.0, 0.3, 8.0, 8.0, 8.0, 100.0, 100.0, 100.0, 100.0, 0.15, 0.1, 0.05, 0.075])

CKPT_MAGIC = b"CKPT1\n"


@dataclass(frozen=True)
class ModelConfig:
    vocab_size: int = 41
    embed_dim: int = 41
    ff_dim: int = 24
    hidden: int = 512  # per direction, both recurrent encoders
    u_dim: int = 13
    n_classes: int = 11

    @property
    def feature_dim(self) -> int:
        """Width of encoder outputs and of the contextual acoustic rows."""
        return 2 * self.hidden

    @property
    def fusion_in_dim(self) -> int:
        """Per-phoneme row width: 1 GoPD + 4 pooled + ff_dim phone features."""
        return 5 + self.ff_dim


TINY_CONFIG = ModelConfig(vocab_size=41, embed_dim=10, ff_dim=3, hidden=8, u_dim=13, n_classes=11)


@dataclass
class UtteranceFeatures:
    """Everything the network consumes for one utterance."""

    fusion: FusionInput
    ct: np.ndarray       # (T, feature_dim) contextual acoustic rows
    u_nv: np.ndarray     # (u_dim,) utterance functionals
    fluency: int | None = None
    prosody: int | None = None


def softmax(x: np.ndarray, axis: int = -1) -> np.ndarray:
    z = x - x.max(axis=axis, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=axis, keepdims=True)


def cross_attention(p_nv: np.ndarray, ct: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Single-head scaled dot-product attention, queries p_nv, keys/values ct.

    Returns (attended rows, attention weights). Each output row is a convex
    combination of ct rows.
    """
    if p_nv.shape[1] != ct.shape[1]:
        raise ValidationError(
            f"query dim {p_nv.shape[1]} != key/value dim {ct.shape[1]}"
        )
    scores = p_nv @ ct.T / np.sqrt(ct.shape[1])
    weights = softmax(scores, axis=1)
    return weights @ ct, weights


def _pad(rows_list: list[np.ndarray], width: int) -> tuple[np.ndarray, np.ndarray]:
    lengths = np.array([len(r) for r in rows_list])
    out = np.zeros((len(rows_list), int(lengths.max()), width))
    for b, r in enumerate(rows_list):
        out[b, : len(r)] = r
    return out, lengths


class ScoringModel:
    """Parameter container plus forward/backward for batches of utterances."""

    def __init__(self, config: ModelConfig = ModelConfig(), seed: int = 0):
        self.config = config
        c = config
        d = c.feature_dim
        shapes = [
            ("embed", (c.vocab_size, c.embed_dim)),
            ("ff_w", (c.ff_dim, c.embed_dim)),
            ("ff_b", (c.ff_dim,)),
            ("pc_fwd_wx", (4 * c.hidden, c.fusion_in_dim)),
            ("pc_fwd_wh", (4 * c.hidden, c.hidden)),
            ("pc_fwd_b", (4 * c.hidden,)),
            ("pc_bwd_wx", (4 * c.hidden, c.fusion_in_dim)),
            ("pc_bwd_wh", (4 * c.hidden, c.hidden)),
            ("pc_bwd_b", (4 * c.hidden,)),
            ("u_w", (d, c.u_dim)),
            ("u_b", (d,)),
            ("fu_fwd_wx", (4 * c.hidden, d)),
            ("fu_fwd_wh", (4 * c.hidden, c.hidden)),
            ("fu_fwd_b", (4 * c.hidden,)),
            ("fu_bwd_wx", (4 * c.hidden, d)),
            ("fu_bwd_wh", (4 * c.hidden, c.hidden)),
            ("fu_bwd_b", (4 * c.hidden,)),
            ("head_f_w", (c.n_classes, d)),
            ("head_f_b", (c.n_classes,)),
            ("head_p_w", (c.n_classes, d)),
            ("head_p_b", (c.n_classes,)),
        ]
        fan_in = {
            "embed": c.embed_dim, "ff_w": c.embed_dim, "ff_b": c.embed_dim,
            "pc_fwd_wx": c.fusion_in_dim, "pc_fwd_wh": c.hidden, "pc_fwd_b": c.fusion_in_dim,
            "pc_bwd_wx": c.fusion_in_dim, "pc_bwd_wh": c.hidden, "pc_bwd_b": c.fusion_in_dim,
            "u_w": c.u_dim, "u_b": c.u_dim,
            "fu_fwd_wx": d, "fu_fwd_wh": c.hidden, "fu_fwd_b": d,
            "fu_bwd_wx": d, "fu_bwd_wh": c.hidden, "fu_bwd_b": d,
            "head_f_w": d, "head_f_b": d, "head_p_w": d, "head_p_b": d,
        }
        rng = np.random.default_rng(seed)
        self.params: dict[str, np.ndarray] = {}
        for name, shape in shapes:
            bound = 1.0 / np.sqrt(fan_in[name])
            self.params[name] = rng.uniform(-bound, bound, size=shape)

    @property
    def param_names(self) -> list[str]:
        return list(self.params)

    def num_parameters(self) -> int:
        return sum(p.size for p in self.params.values())

    def _pc_params(self):
        p = self.params
        return (p["pc_fwd_wx"], p["pc_fwd_wh"], p["pc_fwd_b"]), (
            p["pc_bwd_wx"], p["pc_bwd_wh"], p["pc_bwd_b"])

    def _fu_params(self):
        p = self.params
        return (p["fu_fwd_wx"], p["fu_fwd_wh"], p["fu_fwd_b"]), (
            p["fu_bwd_wx"], p["fu_bwd_wh"], p["fu_bwd_b"])

    def _phone_rows(self, fusion: FusionInput):
        """Standardized numeric block joined with the tanh phone features."""
        idx = fusion.phone_indices
        if idx.size and (idx.min() < 0 or idx.max() >= self.config.vocab_size):
            raise InventoryError(
                f"phone index out of range 0..{self.config.vocab_size - 1}"
            )
        emb = self.params["embed"][idx]
        pre = emb @ self.params["ff_w"].T + self.params["ff_b"]
        ptilde = np.tanh(pre)
        numeric = (fusion.numeric_block() - NUMERIC_OFFSET) / NUMERIC_SCALE
        return np.hstack([numeric, ptilde]), emb, ptilde

    # -- spec-level single-utterance operations ------------------------------

    def phonecue_forward(self, fusion: FusionInput) -> np.ndarray:
        """Encode one utterance's per-phoneme rows to (L, feature_dim)."""
        rows, _, _ = self._phone_rows(fusion)
        x, lengths = _pad([rows], self.config.fusion_in_dim)
        out, _ = bilstm_forward(x, lengths, *self._pc_params())
        return out[0, : len(rows)]

    def projection_forward(self, ct, alpha, u_nv) -> tuple[np.ndarray, np.ndarray]:
        """Fusion encoder and score heads for one utterance."""
        u_std = (np.asarray(u_nv, dtype=np.float64) - U_OFFSET) / U_SCALE
        u = self.params["u_w"] @ u_std + self.params["u_b"]
        fseq = np.vstack([ct, alpha, u[None, :]])
        x, lengths = _pad([fseq], self.config.feature_dim)
        hs, _ = bilstm_forward(x, lengths, *self._fu_params())
        pooled = hs[0, : len(fseq)].mean(axis=0)
        fvec = pooled + u
        dist_f = softmax(self.params["head_f_w"] @ fvec + self.params["head_f_b"])
        dist_p = softmax(self.params["head_p_w"] @ fvec + self.params["head_p_b"])
        return dist_f, dist_p

    def score_utterance(self, utt: UtteranceFeatures) -> tuple[np.ndarray, np.ndarray]:
        """Full forward for one utterance, returning both head distributions."""
        _, dists, _ = self.forward_batch([utt])
        return dists[0][0], dists[0][1]

    # -- batched training path ----------------------------------------------

    def forward_batch(self, batch: list[UtteranceFeatures], loss_weights=(0.5, 0.5)):
        """Forward over a batch. Returns (mean loss or None, per-utterance
        head distributions, cache for backward)."""
        cfg = self.config
        d = cfg.feature_dim
        rows_list, embs, ptildes = [], [], []
        for utt in batch:
            if utt.ct.ndim != 2 or utt.ct.shape[1] != d:
                raise ValidationError(f"ct must be T x {d}, got {utt.ct.shape}")
            if len(utt.u_nv) != cfg.u_dim:
                raise ValidationError(f"u_nv must have {cfg.u_dim} entries")
            rows, emb, ptilde = self._phone_rows(utt.fusion)
            rows_list.append(rows)
            embs.append(emb)
            ptildes.append(ptilde)

        r_pad, l_lens = _pad(rows_list, cfg.fusion_in_dim)
        p_all, pc_cache = bilstm_forward(r_pad, l_lens, *self._pc_params())

        fseqs, attns, us, u_stds = [], [], [], []
        for i, utt in enumerate(batch):
            p = p_all[i, : l_lens[i]]
            alpha, weights = cross_attention(p, utt.ct)
            u_std = (np.asarray(utt.u_nv, dtype=np.float64) - U_OFFSET) / U_SCALE
            u = self.params["u_w"] @ u_std + self.params["u_b"]
            fseqs.append(np.vstack([utt.ct, alpha, u[None, :]]))
            attns.append(weights)
            us.append(u)
            u_stds.append(u_std)

        f_pad, s_lens = _pad(fseqs, d)
        hs_all, fu_cache = bilstm_forward(f_pad, s_lens, *self._fu_params())

        dists, fvecs, losses = [], [], []
        wf, wp = loss_weights
        has_labels = all(u.fluency is not None and u.prosody is not None for u in batch)
        for i, utt in enumerate(batch):
            pooled = hs_all[i, : s_lens[i]].mean(axis=0)
            fvec = pooled + us[i]
            dist_f = softmax(self.params["head_f_w"] @ fvec + self.params["head_f_b"])
            dist_p = softmax(self.params["head_p_w"] @ fvec + self.params["head_p_b"])
            dists.append((dist_f, dist_p))
            fvecs.append(fvec)
            if has_labels:
                if not (0 <= utt.fluency < cfg.n_classes and 0 <= utt.prosody < cfg.n_classes):
                    raise ValidationError("labels must lie in 0..10")
                losses.append(-wf * np.log(dist_f[utt.fluency]) - wp * np.log(dist_p[utt.prosody]))

        loss = float(np.mean(losses)) if has_labels else None
        cache = {
            "batch": batch, "embs": embs, "ptildes": ptildes,
            "l_lens": l_lens, "pc_cache": pc_cache, "p_all": p_all,
            "attns": attns, "us": us, "u_stds": u_stds,
            "s_lens": s_lens, "fu_cache": fu_cache, "hs_all": hs_all,
            "fvecs": fvecs, "dists": dists, "loss_weights": loss_weights,
        }
        return loss, dists, cache

    def backward(self, cache) -> dict[str, np.ndarray]:
        """Exact gradients of the mean batch loss for every parameter."""
        cfg = self.config
        d = cfg.feature_dim
        batch = cache["batch"]
        n = len(batch)
        wf, wp = cache["loss_weights"]
        grads = {name: np.zeros_like(p) for name, p in self.params.items()}

        hs_all = cache["hs_all"]
        s_lens = cache["s_lens"]
        d_hs = np.zeros_like(hs_all)
        d_us = []
        for i, utt in enumerate(batch):
            dist_f, dist_p = cache["dists"][i]
            dlf = dist_f.copy()
            dlf[utt.fluency] -= 1.0
            dlf *= wf / n
            dlp = dist_p.copy()
            dlp[utt.prosody] -= 1.0
            dlp *= wp / n
            fvec = cache["fvecs"][i]
            grads["head_f_w"] += np.outer(dlf, fvec)
            grads["head_f_b"] += dlf
            grads["head_p_w"] += np.outer(dlp, fvec)
            grads["head_p_b"] += dlp
            dfvec = self.params["head_f_w"].T @ dlf + self.params["head_p_w"].T @ dlp
            d_hs[i, : s_lens[i]] = dfvec / s_lens[i]
            d_us.append(dfvec.copy())  # residual path into u

        d_fseq, fu_f, fu_b = bilstm_backward(d_hs, cache["fu_cache"], *self._fu_params())
        for g, name in zip(fu_f, ("fu_fwd_wx", "fu_fwd_wh", "fu_fwd_b")):
            grads[name] += g
        for g, name in zip(fu_b, ("fu_bwd_wx", "fu_bwd_wh", "fu_bwd_b")):
            grads[name] += g

        p_all = cache["p_all"]
        l_lens = cache["l_lens"]
        d_p = np.zeros_like(p_all)
        for i, utt in enumerate(batch):
            t_i = len(utt.ct)
            l_i = l_lens[i]
            d_alpha = d_fseq[i, t_i : t_i + l_i]
            d_us[i] += d_fseq[i, t_i + l_i]
            weights = cache["attns"][i]
            d_w = d_alpha @ utt.ct.T
            d_scores = weights * (d_w - (d_w * weights).sum(axis=1, keepdims=True))
            d_p[i, :l_i] = d_scores @ utt.ct / np.sqrt(d)
            grads["u_w"] += np.outer(d_us[i], cache["u_stds"][i])
            grads["u_b"] += d_us[i]

        d_rows, pc_f, pc_b = bilstm_backward(d_p, cache["pc_cache"], *self._pc_params())
        for g, name in zip(pc_f, ("pc_fwd_wx", "pc_fwd_wh", "pc_fwd_b")):
            grads[name] += g
        for g, name in zip(pc_b, ("pc_bwd_wx", "pc_bwd_wh", "pc_bwd_b")):
            grads[name] += g

        for i, utt in enumerate(batch):
            dr = d_rows[i, : l_lens[i]]
            dptilde = dr[:, 5:]
            da = dptilde * (1.0 - cache["ptildes"][i] ** 2)
            grads["ff_w"] += da.T @ cache["embs"][i]
            grads["ff_b"] += da.sum(axis=0)
            de = da @ self.params["ff_w"]
            np.add.at(grads["embed"], utt.fusion.phone_indices, de)
        return grads

    # -- persistence ----------------------------------------------------------

    def save(self, path) -> None:
        """Single-file checkpoint: text index, then float32 blocks in index order."""
        c = self.config
        header = [
            f"dims {c.vocab_size} {c.embed_dim} {c.ff_dim} {c.hidden} {c.u_dim} {c.n_classes}",
            str(len(self.params)),
        ]
        blocks = []
        for name, p in self.params.items():
            mat = p if p.ndim == 2 else p[None, :]
            header.append(f"{name} {mat.shape[0]} {mat.shape[1]}")
            blocks.append(mat.astype("<f4").tobytes())
        header.append("END\n")
        with open(path, "wb") as fh:
            fh.write(CKPT_MAGIC)
            fh.write("\n".join(header).encode("ascii"))
            for b in blocks:
                fh.write(b)

    @classmethod
    def load(cls, path) -> "ScoringModel":
        with open(path, "rb") as fh:
            blob = fh.read()
        if not blob.startswith(CKPT_MAGIC):
            raise FormatError(f"bad checkpoint magic in {path}")
        try:
            end = blob.index(b"END\n")
        except ValueError:
            raise FormatError(f"checkpoint {path} has no END marker") from None
        lines = blob[len(CKPT_MAGIC) : end].decode("ascii").strip().splitlines()
        dims = lines[0].split()
        if dims[0] != "dims" or len(dims) != 7:
            raise FormatError("checkpoint dims line malformed")
        cfg = ModelConfig(*[int(v) for v in dims[1:]])
        n_tensors = int(lines[1])
        entries = []
        for line in lines[2 : 2 + n_tensors]:
            name, rows, cols = line.split()
            entries.append((name, int(rows), int(cols)))
        model = cls(cfg, seed=0)
        offset = end + 4
        for name, rows, cols in entries:
            if name not in model.params:
                raise FormatError(f"unknown tensor {name!r} in checkpoint")
            count = rows * cols
            raw = blob[offset : offset + 4 * count]
            if len(raw) != 4 * count:
                raise FormatError(f"checkpoint truncated in tensor {name!r}")
            vals = np.frombuffer(raw, dtype="<f4").astype(np.float64)
            target = model.params[name]
            expected = target.shape if target.ndim == 2 else (1, target.size)
            if (rows, cols) != expected:
                raise FormatError(
                    f"tensor {name!r} has shape {(rows, cols)}, expected {expected}"
                )
            model.params[name] = vals.reshape(target.shape)
            offset += 4 * count
        if offset != len(blob):
            raise FormatError(f"trailing bytes after checkpoint tensors ({len(blob) - offset})")
        return model


def loss_fn(dist_f, dist_p, fluency, prosody, loss_weights=(0.5, 0.5)) -> float:
    """Weighted cross-entropy over the two heads (natural log)."""
    if not (0 <= fluency <= 10 and 0 <= prosody <= 10):
        raise ValidationError("labels must lie in 0..10")
    wf, wp = loss_weights
    return float(-wf * np.log(dist_f[fluency]) - wp * np.log(dist_p[prosody]))
