"""A small deterministic neural-network engine in float64 numpy.

Layers keep the activations they need for the backward pass. A network is a
flat list of layers; the CNN decoder runs both syndrome grids through the same
convolution stack by folding the grid axis into the batch (``SplitGrids``)
and unfolding it again before the dense head (``Concat``).

Loss is the squared L2 distance per sample, averaged over the batch.
"""
from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ContractViolation, CorruptPayload, UnsupportedFamily, VersionMismatch

BN_MOMENTUM = 0.9
BN_EPS = 1e-5


class Layer:
    kind = "layer"

    def __init__(self):
        self.params: dict[str, np.ndarray] = {}
        self.grads: dict[str, np.ndarray] = {}
        self.buffers: dict[str, np.ndarray] = {}

    def spec(self) -> dict:
        return {"kind": self.kind}

    def init(self, rng, fan_mode="he"):
        pass

    def forward(self, x, train=False):
        raise NotImplementedError

    def backward(self, dout):
        raise NotImplementedError

    def out_shape(self, shape):
        return shape


class Dense(Layer):
    kind = "dense"

    def __init__(self, n_in, n_out, bias=True):
        super().__init__()
        self.n_in, self.n_out = int(n_in), int(n_out)
        self.bias = bool(bias)
        self.params = {"W": np.zeros((self.n_in, self.n_out))}
        if self.bias:
            self.params["b"] = np.zeros(self.n_out)

    def spec(self):
        return {"kind": self.kind, "in": self.n_in, "out": self.n_out, "bias": self.bias}

    def init(self, rng, fan_mode="he"):
        if fan_mode == "xavier":
            std = np.sqrt(2.0 / (self.n_in + self.n_out))
        else:
            std = np.sqrt(2.0 / self.n_in)
        self.params["W"] = rng.normal(0.0, std, (self.n_in, self.n_out))
        if self.bias:
            self.params["b"] = np.zeros(self.n_out)

    def forward(self, x, train=False):
        if x.ndim != 2 or x.shape[1] != self.n_in:
            raise ContractViolation(f"dense layer expects (*, {self.n_in}), got {x.shape}")
        self.x = x
        y = x @ self.params["W"]
        return y + self.params["b"] if self.bias else y

    def backward(self, dout):
        self.grads["W"] = self.x.T @ dout
        if self.bias:
            self.grads["b"] = dout.sum(0)
        return dout @ self.params["W"].T

    def out_shape(self, shape):
        return (self.n_out,)


class Conv2D(Layer):
    """Cross-correlation with independent vertical/horizontal strides.

    ``padding="valid"`` uses no padding; ``"same"`` zero-pads so the output has
    ceil(H / stride) rows (extra padding goes to the bottom/right).
    """
    kind = "conv2d"

    def __init__(self, kh, kw, in_ch, out_ch, stride_v=1, stride_h=1, padding="valid",
                 bias=True):
        super().__init__()
        if padding not in ("valid", "same"):
            raise ContractViolation(f"unknown padding {padding!r}")
        self.kh, self.kw = int(kh), int(kw)
        self.in_ch, self.out_ch = int(in_ch), int(out_ch)
        self.sv, self.sh = int(stride_v), int(stride_h)
        self.padding = padding
        self.bias = bool(bias)
        self.params = {"W": np.zeros((self.out_ch, self.in_ch, self.kh, self.kw))}
        if self.bias:
            self.params["b"] = np.zeros(self.out_ch)

    def spec(self):
        return {"kind": self.kind, "kh": self.kh, "kw": self.kw, "in_ch": self.in_ch,
                "out_ch": self.out_ch, "stride_v": self.sv, "stride_h": self.sh,
                "padding": self.padding, "bias": self.bias}

    def init(self, rng, fan_mode="he"):
        fan_in = self.in_ch * self.kh * self.kw
        self.params["W"] = rng.normal(0.0, np.sqrt(2.0 / fan_in), self.params["W"].shape)
        if self.bias:
            self.params["b"] = np.zeros(self.out_ch)

    def _pads(self, h, w):
        if self.padding == "valid":
            return (0, 0), (0, 0)
        ph = max((-(-h // self.sv) - 1) * self.sv + self.kh - h, 0)
        pw = max((-(-w // self.sh) - 1) * self.sh + self.kw - w, 0)
        return (ph // 2, ph - ph // 2), (pw // 2, pw - pw // 2)

    def out_shape(self, shape):
        c, h, w = shape
        (pt, pb), (pl, pr) = self._pads(h, w)
        ho = (h + pt + pb - self.kh) // self.sv + 1
        wo = (w + pl + pr - self.kw) // self.sh + 1
        if ho < 1 or wo < 1:
            raise ContractViolation(f"{self.kh}x{self.kw} filter does not fit a {h}x{w} input")
        return (self.out_ch, ho, wo)

    def forward(self, x, train=False):
        if x.ndim != 4 or x.shape[1] != self.in_ch:
            raise ContractViolation(f"conv layer expects (*, {self.in_ch}, H, W), got {x.shape}")
        _, ho, wo = self.out_shape(x.shape[1:])
        self.pads = self._pads(*x.shape[2:])
        if self.padding == "same":
            x = np.pad(x, ((0, 0), (0, 0)) + self.pads)
        win = sliding_window_view(x, (self.kh, self.kw), axis=(2, 3))
        win = win[:, :, ::self.sv, ::self.sh][:, :, :ho, :wo]     # (N, C, Ho, Wo, kh, kw)
        self.x_shape = x.shape
        self.win = win
        out = np.tensordot(win, self.params["W"], axes=([1, 4, 5], [1, 2, 3]))  # N,Ho,Wo,O
        out = out.transpose(0, 3, 1, 2)
        return out + self.params["b"][None, :, None, None] if self.bias else out

    def backward(self, dout):
        W = self.params["W"]
        self.grads["W"] = np.tensordot(dout, self.win, axes=([0, 2, 3], [0, 2, 3]))
        if self.bias:
            self.grads["b"] = dout.sum((0, 2, 3))
        dx = np.zeros(self.x_shape)
        _, ho, wo = dout.shape[1:]
        for i in range(self.kh):
            for j in range(self.kw):
                # (N,O,Ho,Wo) x (O,C) -> (N,C,Ho,Wo)
                contrib = np.tensordot(dout, W[:, :, i, j], axes=([1], [0])).transpose(0, 3, 1, 2)
                dx[:, :, i:i + self.sv * (ho - 1) + 1:self.sv,
                   j:j + self.sh * (wo - 1) + 1:self.sh] += contrib
        (pt, pb), (pl, pr) = self.pads
        return dx[:, :, pt:dx.shape[2] - pb, pl:dx.shape[3] - pr]


class ReLU(Layer):
    kind = "relu"

    def forward(self, x, train=False):
        self.mask = x > 0
        return np.where(self.mask, x, 0.0)

    def backward(self, dout):
        return dout * self.mask


class Sigmoid(Layer):
    kind = "sigmoid"

    def forward(self, x, train=False):
        self.y = 0.5 * (1.0 + np.tanh(0.5 * x))
        return self.y

    def backward(self, dout):
        return dout * self.y * (1.0 - self.y)


class BatchNorm(Layer):
    """Per-feature (dense input) or per-channel (conv input) normalization."""
    kind = "batchnorm"

    def __init__(self, dim):
        super().__init__()
        self.dim = int(dim)
        self.params = {"gamma": np.ones(self.dim), "beta": np.zeros(self.dim)}
        self.buffers = {"mean": np.zeros(self.dim), "var": np.ones(self.dim)}

    def spec(self):
        return {"kind": self.kind, "dim": self.dim}

    def init(self, rng, fan_mode="he"):
        self.params = {"gamma": np.ones(self.dim), "beta": np.zeros(self.dim)}
        self.buffers = {"mean": np.zeros(self.dim), "var": np.ones(self.dim)}

    def _axes(self, x):
        return (0,) if x.ndim == 2 else (0, 2, 3)

    def _shape(self, x):
        return (1, -1) if x.ndim == 2 else (1, -1, 1, 1)

    def forward(self, x, train=False):
        if x.shape[1] != self.dim:
            raise ContractViolation(f"batchnorm over {self.dim} features, got {x.shape}")
        axes, shp = self._axes(x), self._shape(x)
        if train:
            mu = x.mean(axes)
            var = x.var(axes)
            m = BN_MOMENTUM
            self.buffers["mean"] = m * self.buffers["mean"] + (1 - m) * mu
            self.buffers["var"] = m * self.buffers["var"] + (1 - m) * var
        else:
            mu, var = self.buffers["mean"], self.buffers["var"]
        self.inv = 1.0 / np.sqrt(var + BN_EPS)
        self.xhat = (x - mu.reshape(shp)) * self.inv.reshape(shp)
        self.train = train
        return self.params["gamma"].reshape(shp) * self.xhat + self.params["beta"].reshape(shp)

    def backward(self, dout):
        axes, shp = self._axes(dout), self._shape(dout)
        self.grads["gamma"] = (dout * self.xhat).sum(axes)
        self.grads["beta"] = dout.sum(axes)
        dxhat = dout * self.params["gamma"].reshape(shp)
        if not self.train:
            return dxhat * self.inv.reshape(shp)
        m = dout.size / self.dim
        s1 = dxhat.sum(axes).reshape(shp)
        s2 = (dxhat * self.xhat).sum(axes).reshape(shp)
        return self.inv.reshape(shp) / m * (m * dxhat - s1 - self.xhat * s2)


class Flatten(Layer):
    kind = "flatten"

    def forward(self, x, train=False):
        self.shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, dout):
        return dout.reshape(self.shape)

    def out_shape(self, shape):
        return (int(np.prod(shape)),)


class SplitGrids(Layer):
    """(B, 2, H, W) -> (2B, 1, H, W): both grids become batch rows for shared filters."""
    kind = "split_grids"

    def forward(self, x, train=False):
        if x.ndim != 4 or x.shape[1] != 2:
            raise ContractViolation(f"expected (B, 2, H, W), got {x.shape}")
        self.shape = x.shape
        b, _, h, w = x.shape
        return x.reshape(2 * b, 1, h, w)

    def backward(self, dout):
        return dout.reshape(self.shape)

    def out_shape(self, shape):
        return (1,) + tuple(shape[1:])


class Concat(Layer):
    """(2B, F) -> (B, 2F): the features of the X and Z grid side by side."""
    kind = "concat"

    def forward(self, x, train=False):
        self.shape = x.shape
        return x.reshape(x.shape[0] // 2, 2 * x.shape[1])

    def backward(self, dout):
        return dout.reshape(self.shape)

    def out_shape(self, shape):
        return (2 * shape[0],)


LAYER_KINDS = {
    "dense": lambda s: Dense(s["in"], s["out"], s.get("bias", True)),
    "conv2d": lambda s: Conv2D(s["kh"], s["kw"], s["in_ch"], s["out_ch"],
                               s.get("stride_v", 1), s.get("stride_h", 1),
                               s.get("padding", "valid"), s.get("bias", True)),
    "relu": lambda s: ReLU(),
    "sigmoid": lambda s: Sigmoid(),
    "batchnorm": lambda s: BatchNorm(s["dim"]),
    "flatten": lambda s: Flatten(),
    "split_grids": lambda s: SplitGrids(),
    "concat": lambda s: Concat(),
}


def layer_from_spec(spec: dict) -> Layer:
    try:
        return LAYER_KINDS[spec["kind"]](spec)
    except KeyError:
        raise ContractViolation(f"unknown layer spec {spec}") from None


class Network:
    def __init__(self, layers, input_shape, seed=0, meta=None):
        self.layers = list(layers)
        self.input_shape = tuple(int(v) for v in input_shape)
        self.seed = int(seed)
        self.meta = dict(meta or {})
        self.adam_m: list[dict] = [{k: np.zeros_like(v) for k, v in l.params.items()}
                                   for l in self.layers]
        self.adam_v: list[dict] = [{k: np.zeros_like(v) for k, v in l.params.items()}
                                   for l in self.layers]
        self.adam_t = 0
        self._check_shapes()

    def _check_shapes(self):
        shape = self.input_shape
        folded = False
        for l in self.layers:
            if isinstance(l, SplitGrids):
                if shape[0] != 2:
                    raise ContractViolation("grid input needs two channels")
                folded = True
                shape = (1,) + shape[1:]
                continue
            if isinstance(l, Concat):
                if not folded:
                    raise ContractViolation("concat without a preceding grid split")
                folded = False
            shape = l.out_shape(shape)
        self.output_shape = shape

    @property
    def specs(self):
        return [l.spec() for l in self.layers]

    def init(self, seed=None):
        rng = np.random.Generator(np.random.Philox(self.seed if seed is None else seed))
        dense_idx = [i for i, l in enumerate(self.layers) if isinstance(l, Dense)]
        last = dense_idx[-1] if dense_idx else -1
        sig_out = isinstance(self.layers[-1], Sigmoid)
        for i, l in enumerate(self.layers):
            l.init(rng, "xavier" if (i == last and sig_out) else "he")
        self.reset_optimizer()
        return self

    def reset_optimizer(self):
        self.adam_m = [{k: np.zeros_like(v) for k, v in l.params.items()} for l in self.layers]
        self.adam_v = [{k: np.zeros_like(v) for k, v in l.params.items()} for l in self.layers]
        self.adam_t = 0

    def num_params(self) -> int:
        return sum(v.size for l in self.layers for v in l.params.values())

    def param_arrays(self):
        for li, l in enumerate(self.layers):
            for name in sorted(l.params):
                yield li, name, l.params[name]


def forward(net: Network, x, train: bool = False) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if tuple(x.shape[1:]) != net.input_shape:
        raise ContractViolation(f"input shape {x.shape[1:]} != {net.input_shape}")
    for l in net.layers:
        x = l.forward(x, train)
    return x


def loss_value(y, t) -> float:
    return float(((y - t) ** 2).sum(axis=-1).mean())


def backward(net: Network, x, target, train: bool = True) -> tuple[float, list[dict]]:
    """Squared-L2 loss and its gradient for every parameter (layer-aligned dicts)."""
    y = forward(net, x, train)
    target = np.asarray(target, dtype=np.float64)
    if target.shape != y.shape:
        raise ContractViolation(f"target shape {target.shape} != output {y.shape}")
    dout = 2.0 * (y - target) / y.shape[0]
    for l in reversed(net.layers):
        dout = l.backward(dout)
    return loss_value(y, target), [dict(l.grads) for l in net.layers]


def adam_step(net: Network, grads, lr: float, beta1=0.9, beta2=0.999, eps=1e-8,
              weight_decay=0.0):
    net.adam_t += 1
    t = net.adam_t
    for l, g, m, v in zip(net.layers, grads, net.adam_m, net.adam_v):
        for k, p in l.params.items():
            gk = g[k] + weight_decay * p if weight_decay else g[k]
            m[k] = beta1 * m[k] + (1 - beta1) * gk
            v[k] = beta2 * v[k] + (1 - beta2) * gk * gk
            mh = m[k] / (1 - beta1 ** t)
            vh = v[k] / (1 - beta2 ** t)
            l.params[k] = p - lr * mh / (np.sqrt(vh) + eps)


def lr_schedule(epochs: int, lr_start=1e-3, lr_end=1e-5) -> np.ndarray:
    """Exponential decay from lr_start (first epoch) to lr_end (last epoch)."""
    if epochs <= 1:
        return np.array([lr_start] * max(epochs, 0), dtype=float)
    return lr_start * (lr_end / lr_start) ** (np.arange(epochs) / (epochs - 1))


def train(net: Network, inputs, targets, epochs: int, batch_size: int, lr_schedule=None,
          seed: int = 0, weight_decay: float = 0.0, log=None):
    """Adam over shuffled mini-batches. Returns (net, trace).

    ``trace`` starts with the mean loss before any update and then holds the
    mean mini-batch loss of every epoch. Shuffling for epoch k draws from a
    Philox stream keyed by (seed, k).
    """
    inputs = np.asarray(inputs)
    targets = np.asarray(targets, dtype=np.float64)
    count = inputs.shape[0]
    if count == 0:
        raise ContractViolation("empty training set")
    if batch_size < 1:
        raise ContractViolation("batch_size must be >= 1")
    lrs = globals()["lr_schedule"](epochs) if lr_schedule is None else np.asarray(lr_schedule)
    if len(lrs) < epochs:
        raise ContractViolation("learning-rate schedule shorter than the epoch count")
    trace = [evaluate_loss(net, inputs, targets)]
    for ep in range(epochs):
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, ep])))
        order = rng.permutation(count)
        total, seen = 0.0, 0
        for lo in range(0, count, batch_size):
            idx = order[lo:lo + batch_size]
            xb = inputs[idx].astype(np.float64)
            loss, grads = backward(net, xb, targets[idx], train=True)
            adam_step(net, grads, float(lrs[ep]), weight_decay=weight_decay)
            total += loss * len(idx)
            seen += len(idx)
        trace.append(total / seen)
        if log:
            log(ep, trace[-1], float(lrs[ep]))
    return net, trace


def evaluate_loss(net: Network, inputs, targets, batch: int = 8192) -> float:
    total = 0.0
    for lo in range(0, inputs.shape[0], batch):
        y = forward(net, inputs[lo:lo + batch].astype(np.float64))
        total += ((y - targets[lo:lo + batch]) ** 2).sum()
    return float(total / inputs.shape[0])


def predict(net: Network, inputs, batch: int = 8192) -> np.ndarray:
    out = [forward(net, inputs[lo:lo + batch].astype(np.float64))
           for lo in range(0, inputs.shape[0], batch)]
    return np.concatenate(out) if out else np.zeros((0,) + tuple(net.output_shape))


def grad_check(net: Network, trials: int = 20, eps: float = 1e-5, batch: int = 4,
               seed: int = 0, train: bool = True, with_skipped: bool = False):
    """Largest relative gap between backprop and central differences.

    Random inputs and targets are drawn from ``seed``; ``trials`` parameter
    entries are sampled across all tensors. BatchNorm running statistics are
    restored after every probe so the check leaves the network unchanged.

    A probe whose +-eps step flips any ReLU on or off straddles a kink, where
    the loss has no derivative to compare against; such probes are redrawn.
    ``with_skipped`` also returns how many were redrawn.
    """
    if not (0 < eps <= 1e-3):
        raise ContractViolation("eps must lie in (0, 1e-3]")
    rng = np.random.Generator(np.random.Philox(seed))
    x = rng.normal(size=(batch,) + net.input_shape)
    t = rng.uniform(size=(batch,) + tuple(net.output_shape))
    saved = [{k: v.copy() for k, v in l.buffers.items()} for l in net.layers]
    relus = [l for l in net.layers if isinstance(l, ReLU)]

    def restore():
        for l, b in zip(net.layers, saved):
            l.buffers = {k: v.copy() for k, v in b.items()}

    def probe():
        loss = loss_value(forward(net, x, train), t)
        masks = [l.mask.copy() for l in relus]
        restore()
        return loss, masks

    _, grads = backward(net, x, t, train)
    base = [l.mask.copy() for l in relus]
    restore()
    entries = [(li, name) for li, l in enumerate(net.layers) for name in l.params]
    worst, done, skipped = 0.0, 0, 0
    while done < trials:
        if skipped > 10 * trials:
            raise RuntimeError("almost every probe crosses a ReLU kink; lower eps")
        li, name = entries[rng.integers(len(entries))]
        p = net.layers[li].params[name]
        idx = tuple(rng.integers(s) for s in p.shape)
        old = p[idx]
        p[idx] = old + eps
        up, m_up = probe()
        p[idx] = old - eps
        down, m_down = probe()
        p[idx] = old
        if any(not (np.array_equal(a, b) and np.array_equal(a, c))
               for a, b, c in zip(base, m_up, m_down)):
            skipped += 1
            continue
        num = (up - down) / (2 * eps)
        ana = grads[li][name][idx]
        rel = abs(ana - num) / max(abs(ana), abs(num), 1e-12)
        worst = max(worst, rel)
        done += 1
    return (worst, skipped) if with_skipped else worst


# ---------------------------------------------------------------- builders

def build_mlp(n_in: int, n_out: int, hidden=(256, 256), batchnorm: bool = False,
              seed: int = 0) -> Network:
    layers, prev = [], n_in
    for h in hidden:
        # a bias in front of batch normalization is cancelled by it, so drop it
        layers.append(Dense(prev, h, bias=not batchnorm))
        if batchnorm:
            layers.append(BatchNorm(h))
        layers.append(ReLU())
        prev = h
    layers += [Dense(prev, n_out), Sigmoid()]
    return Network(layers, (n_in,), seed, {"model": "mlp", "hidden": list(hidden)}).init()


def default_hidden(d: int) -> tuple[int, int]:
    return (256, 256) if d <= 5 else (512, 512)


# filter sizes (kh, kw) per conv layer and the stride of the first layer; the
# d = 3 entries are our own choice (small filters that still see a whole check)
CNN_FILTERS = {
    ("surface_unrotated", 3): ([(2, 2), (2, 2), (2, 2)], (1, 1)),
    ("surface_unrotated", 5): ([(2, 2), (3, 3), (3, 3)], (1, 1)),
    ("surface_unrotated", 7): ([(2, 2), (3, 3), (4, 4)], (1, 1)),
    ("surface_rotated", 3): ([(2, 2), (2, 2), (2, 2)], (1, 1)),
    ("surface_rotated", 5): ([(2, 2), (3, 3), (3, 3)], (1, 1)),
    ("surface_rotated", 7): ([(2, 2), (3, 3), (3, 4)], (1, 2)),
}
CNN_FC = {3: 200, 5: 1000, 7: 3000}


def cnn_config(family: str, d: int) -> dict:
    if family not in ("surface_unrotated", "surface_rotated"):
        raise UnsupportedFamily(f"CNN decoders need a surface code, got {family}")
    if (family, d) not in CNN_FILTERS:
        raise ContractViolation(f"no CNN configuration for {family} at d={d}")
    filters, stride = CNN_FILTERS[(family, d)]
    return {"filters": filters, "channels": [10 * d, 10 * d, 5 * d], "first_stride": stride,
            "fc": CNN_FC[d], "padding": "same"}


def build_cnn(family: str, d: int, grid_shape, n_out: int, config: dict | None = None,
              batchnorm: bool = False, seed: int = 0) -> Network:
    cfg = dict(cnn_config(family, d))
    if config:
        cfg.update(config)
    h, w = grid_shape
    layers: list[Layer] = [SplitGrids()]
    in_ch = 1
    for i, ((kh, kw), ch) in enumerate(zip(cfg["filters"], cfg["channels"])):
        sv, sh = cfg["first_stride"] if i == 0 else (1, 1)
        layers.append(Conv2D(kh, kw, in_ch, ch, sv, sh, cfg["padding"], bias=not batchnorm))
        if batchnorm:
            layers.append(BatchNorm(ch))
        layers.append(ReLU())
        in_ch = ch
    layers.append(Flatten())
    layers.append(Concat())
    probe = Network(layers, (2, h, w))
    feat = probe.output_shape[0]
    layers += [Dense(feat, cfg["fc"], bias=not batchnorm)]
    if batchnorm:
        layers.append(BatchNorm(cfg["fc"]))
    layers += [ReLU(), Dense(cfg["fc"], n_out), Sigmoid()]
    meta = {"model": "cnn", "family": family, "d": d, "cnn": {
        "filters": [list(f) for f in cfg["filters"]], "channels": list(cfg["channels"]),
        "first_stride": list(cfg["first_stride"]), "fc": cfg["fc"],
        "padding": cfg["padding"]}}
    return Network(layers, (2, h, w), seed, meta).init()


# ---------------------------------------------------------------- syndrome grids

def reshape_syndrome(code, s) -> tuple[np.ndarray, np.ndarray]:
    """Place X-check bits and Z-check bits on two equally shaped grids.

    Accepts one syndrome or a batch; returns (grid_x, grid_z) with shape
    grid_shape or (batch,) + grid_shape.
    """
    if code.stab_grid is None or code.family not in ("surface_unrotated", "surface_rotated"):
        raise UnsupportedFamily(f"syndrome grids exist only for surface codes, not {code.family}")
    s = np.asarray(s)
    single = s.ndim == 1
    s2 = np.atleast_2d(s)
    if s2.shape[1] != code.num_checks:
        raise ContractViolation(f"syndrome length {s2.shape[1]} != {code.num_checks}")
    h, w = code.grid_shape
    grids = np.zeros((s2.shape[0], 2, h, w), dtype=s2.dtype)
    kinds = np.array([0 if t == "X" else 1 for t in code.stab_types])
    grids[:, kinds, code.stab_grid[:, 0], code.stab_grid[:, 1]] = s2
    if single:
        return grids[0, 0], grids[0, 1]
    return grids[:, 0], grids[:, 1]


def syndrome_grids(code, s) -> np.ndarray:
    """Batch of syndromes as CNN input (B, 2, H, W)."""
    gx, gz = reshape_syndrome(code, np.atleast_2d(s))
    return np.stack([gx, gz], axis=1)


# ---------------------------------------------------------------- checkpoints

QNN_MAGIC = b"QNN1"
QNN_VERSION = 1
_PREFIX = struct.Struct("<4sII")


def save_network(net: Network, path, extra: dict | None = None) -> None:
    tensors = []
    for li, l in enumerate(net.layers):
        for name in sorted(l.params):
            tensors.append(("param", li, name, l.params[name]))
        for name in sorted(l.buffers):
            tensors.append(("buffer", li, name, l.buffers[name]))
    header = {
        "format_version": QNN_VERSION,
        "specs": net.specs,
        "input_shape": list(net.input_shape),
        "seed": net.seed,
        "meta": {**net.meta, **(extra or {})},
        "tensors": [[k, li, name, list(a.shape)] for k, li, name, a in tensors],
    }
    blob = json.dumps(header, sort_keys=True).encode()
    with open(path, "wb") as fh:
        fh.write(_PREFIX.pack(QNN_MAGIC, QNN_VERSION, len(blob)))
        fh.write(blob)
        for *_, a in tensors:
            fh.write(np.ascontiguousarray(a, dtype="<f8").tobytes())


def load_network(path) -> Network:
    raw = Path(path).read_bytes()
    if len(raw) < _PREFIX.size:
        raise CorruptPayload("checkpoint shorter than its fixed header")
    magic, version, hlen = _PREFIX.unpack_from(raw)
    if magic != QNN_MAGIC:
        raise CorruptPayload(f"bad magic {magic!r}")
    if version != QNN_VERSION:
        raise VersionMismatch(f"checkpoint version {version}, reader supports {QNN_VERSION}")
    start = _PREFIX.size + hlen
    try:
        header = json.loads(raw[_PREFIX.size:start].decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptPayload(f"unreadable header: {exc}") from None
    layers = [layer_from_spec(s) for s in header["specs"]]
    off = start
    for kind, li, name, shape in header["tensors"]:
        size = int(np.prod(shape)) * 8
        if off + size > len(raw):
            raise CorruptPayload("checkpoint payload truncated")
        arr = np.frombuffer(raw, dtype="<f8", count=size // 8, offset=off).reshape(shape).copy()
        off += size
        (layers[li].params if kind == "param" else layers[li].buffers)[name] = arr
    if off != len(raw):
        raise CorruptPayload("trailing bytes after checkpoint payload")
    return Network(layers, header["input_shape"], header["seed"], header["meta"])
