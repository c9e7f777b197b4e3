"""Content/style losses over a seeded filter-bank feature extractor.

The extractor is a two-layer bank of seeded random 3x3 filters with a smooth
rectifier, so every activation is reproducible from a seed and the whole
stack is differentiable: it exposes the exact vector-Jacobian product needed
for analytic image gradients. Losses follow the usual content (feature MSE)
and style (Gram MSE) split, and the stylizer runs plain fixed-step gradient
descent with per-step clamping.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from typing import Protocol

import numpy as np
from scipy.special import expit

from .raster import LUMA_WEIGHTS, RasterError, RasterImage

FORMAT_MAGIC = b"SFNB"
FORMAT_VERSION = 1


class StylizeError(RuntimeError):
    """Raised when stylization hits a non-finite loss."""


@dataclass(frozen=True)
class FeatureTensor:
    """Per-layer activations, shaped (channels, height, width)."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 3:
            raise RasterError(f"feature tensor must be CxHxW, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise RasterError("feature tensor contains non-finite values")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def channels(self) -> int:
        return self.data.shape[0]


@dataclass(frozen=True)
class GramMatrix:
    """Channel-correlation matrix of flattened activations."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise RasterError(f"gram matrix must be square, got shape {arr.shape}")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def dim(self) -> int:
        return self.data.shape[0]


@dataclass(frozen=True)
class StylizeConfig:
    # beta default balances the C*H*W-normalized Gram scale against the
    # per-element content term so eta=0.5 makes visible progress
    alpha_content: float = 1.0
    beta_style: float = 10000.0
    eta: float = 0.5
    iterations: int = 200
    init: str = "content"
    noise_seed: int = 0

    def __post_init__(self):
        if self.alpha_content < 0 or self.beta_style < 0:
            raise RasterError("loss weights must be >= 0")
        if self.alpha_content + self.beta_style <= 0:
            raise RasterError("at least one loss weight must be positive")
        if self.eta <= 0:
            raise RasterError("step size must be > 0")
        if self.iterations < 0:
            raise RasterError("iterations must be >= 0")
        if self.init not in ("content", "noise"):
            raise RasterError("init must be 'content' or 'noise'")


class FeatureExtractor(Protocol):
    """Deterministic, differentiable multi-layer feature map."""

    def extract(self, image: RasterImage) -> list[FeatureTensor]:
        ...

    def input_gradient(self, image: RasterImage, cotangents: list[np.ndarray]) -> np.ndarray:
        ...


def _softplus(x: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, x)


def _corr_valid(padded: np.ndarray, kernel: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    out = np.zeros((out_h, out_w))
    k = kernel.shape[0]
    for i in range(k):
        for j in range(k):
            out += kernel[i, j] * padded[i : i + out_h, j : j + out_w]
    return out


def _corr_valid_adjoint(grad: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    h, w = grad.shape
    k = kernel.shape[0]
    dp = np.zeros((h + k - 1, w + k - 1))
    for i in range(k):
        for j in range(k):
            dp[i : i + h, j : j + w] += kernel[i, j] * grad
    return dp


def _pad_replicate_adjoint(grad: np.ndarray) -> np.ndarray:
    g = grad.copy()
    g[:, 1] += g[:, 0]
    g[:, -2] += g[:, -1]
    g = g[:, 1:-1]
    g[1, :] += g[0, :]
    g[-2, :] += g[-1, :]
    return g[1:-1, :].copy()


def _conv_layer(x: np.ndarray, filters: np.ndarray) -> np.ndarray:
    """Same-size multichannel correlation with replicate borders.

    x: (Cin, H, W); filters: (Cout, Cin, k, k) -> (Cout, H, W)
    """
    cin, h, w = x.shape
    cout = filters.shape[0]
    out = np.zeros((cout, h, w))
    padded = [np.pad(x[k], 1, mode="edge") for k in range(cin)]
    for c in range(cout):
        acc = np.zeros((h, w))
        for k in range(cin):
            acc += _corr_valid(padded[k], filters[c, k], h, w)
        out[c] = acc
    return out


def _conv_layer_adjoint(grad: np.ndarray, filters: np.ndarray, in_shape) -> np.ndarray:
    """Adjoint of _conv_layer with respect to its input."""
    cin, h, w = in_shape
    cout = filters.shape[0]
    dx = np.zeros((cin, h, w))
    for k in range(cin):
        dp = np.zeros((h + 2, w + 2))
        for c in range(cout):
            dp += _corr_valid_adjoint(grad[c], filters[c, k])
        dx[k] = _pad_replicate_adjoint(dp)
    return dx


class FilterBankExtractor:
    """Two layers of 8 seeded random 3x3 filters with a softplus rectifier.

    Layer 1 operates on luminance at full resolution; layer 2 convolves the
    layer-1 activations and subsamples with stride 2. Filters are zero-mean
    (constant inputs produce zero pre-activations) and unit-norm.
    """

    layer_count = 2

    def __init__(self, filters1: np.ndarray, filters2: np.ndarray):
        if filters1.ndim != 4 or filters2.ndim != 4:
            raise RasterError("filter banks must be (out, in, k, k) arrays")
        self.filters1 = np.asarray(filters1, dtype=np.float64)
        self.filters2 = np.asarray(filters2, dtype=np.float64)

    def _forward(self, image: RasterImage):
        lum = _luminance_plane(image)
        x0 = lum[np.newaxis, :, :]
        z1 = _conv_layer(x0, self.filters1)
        a1 = _softplus(z1)
        z2 = _conv_layer(a1, self.filters2)
        z2s = z2[:, ::2, ::2]
        a2 = _softplus(z2s)
        return x0, z1, a1, z2s, a2

    def extract(self, image: RasterImage) -> list[FeatureTensor]:
        _, _, a1, _, a2 = self._forward(image)
        return [FeatureTensor(a1), FeatureTensor(a2)]

    def input_gradient(self, image: RasterImage, cotangents: list[np.ndarray]) -> np.ndarray:
        """Exact vector-Jacobian product: d(sum(cotangent * activation))/d image."""
        if len(cotangents) != 2:
            raise RasterError("expected one cotangent per layer")
        x0, z1, a1, z2s, _ = self._forward(image)
        g1 = np.asarray(cotangents[0], dtype=np.float64)
        g2 = np.asarray(cotangents[1], dtype=np.float64)
        if g1.shape != a1.shape or g2.shape != z2s.shape:
            raise RasterError("cotangent shapes must match layer activations")
        dz2s = g2 * expit(z2s)
        dz2 = np.zeros((self.filters2.shape[0], x0.shape[1], x0.shape[2]))
        dz2[:, ::2, ::2] = dz2s
        da1 = _conv_layer_adjoint(dz2, self.filters2, a1.shape)
        dz1 = (g1 + da1) * expit(z1)
        dx0 = _conv_layer_adjoint(dz1, self.filters1, x0.shape)
        return _luminance_plane_adjoint(dx0[0], image)

    def save(self, path: str):
        """Write the filter banks in the flat binary interchange format."""
        with open(path, "wb") as fh:
            fh.write(FORMAT_MAGIC)
            fh.write(struct.pack("<H", FORMAT_VERSION))
            fh.write(struct.pack("<H", 2))
            for filters, stride in ((self.filters1, 1), (self.filters2, 2)):
                cout, cin, k, _ = filters.shape
                fh.write(struct.pack("<HHHH", cin, cout, k, stride))
                fh.write(filters.astype("<f8").tobytes())

    @classmethod
    def load(cls, path: str) -> "FilterBankExtractor":
        with open(path, "rb") as fh:
            magic = fh.read(4)
            if magic != FORMAT_MAGIC:
                raise RasterError(f"not a filter-bank file (magic {magic!r})")
            (version,) = struct.unpack("<H", fh.read(2))
            if version != FORMAT_VERSION:
                raise RasterError(f"unsupported filter-bank version {version}")
            (layer_count,) = struct.unpack("<H", fh.read(2))
            banks = []
            for _ in range(layer_count):
                cin, cout, k, _stride = struct.unpack("<HHHH", fh.read(8))
                raw = fh.read(cout * cin * k * k * 8)
                banks.append(np.frombuffer(raw, dtype="<f8").reshape(cout, cin, k, k).copy())
        if len(banks) != 2:
            raise RasterError("expected exactly two filter-bank layers")
        return cls(banks[0], banks[1])


def _luminance_plane(image: RasterImage) -> np.ndarray:
    if image.channels == 1:
        return image.data[:, :, 0]
    r, g, b = LUMA_WEIGHTS
    return g * image.data[:, :, 1] + (r * image.data[:, :, 0] + b * image.data[:, :, 2])


def _luminance_plane_adjoint(grad: np.ndarray, image: RasterImage) -> np.ndarray:
    out = np.zeros_like(image.data)
    if image.channels == 1:
        out[:, :, 0] = grad
        return out
    r, g, b = LUMA_WEIGHTS
    out[:, :, 0] = r * grad
    out[:, :, 1] = g * grad
    out[:, :, 2] = b * grad
    return out


def _normalized_filters(rng: np.random.Generator, cout: int, cin: int, k: int) -> np.ndarray:
    filters = rng.standard_normal((cout, cin, k, k))
    for c in range(cout):
        filters[c] -= filters[c].mean()
        norm = np.linalg.norm(filters[c])
        if norm > 0:
            filters[c] /= norm
    return filters


def default_extractor(rng_seed: int = 0) -> FilterBankExtractor:
    """The engine's stock extractor: filters drawn once from the seed."""
    rng = np.random.default_rng(rng_seed)
    f1 = _normalized_filters(rng, 8, 1, 3)
    f2 = _normalized_filters(rng, 8, 8, 3)
    return FilterBankExtractor(f1, f2)


def gram(t: FeatureTensor) -> GramMatrix:
    """G = F F^T over flattened activations, normalized by C*H*W."""
    c, h, w = t.data.shape
    flat = t.data.reshape(c, h * w)
    return GramMatrix((flat @ flat.T) / float(c * h * w))


def content_loss(f_c: list[FeatureTensor], f_t: list[FeatureTensor], content_layer: int = 0) -> float:
    """Mean squared feature difference at the designated layer."""
    a = f_c[content_layer].data
    b = f_t[content_layer].data
    if a.shape != b.shape:
        raise RasterError(f"content feature shapes differ: {a.shape} vs {b.shape}")
    return float(((a - b) ** 2).sum() / a.size)


def style_loss(grams_s: list[GramMatrix], grams_t: list[GramMatrix]) -> float:
    """Sum over layers of the mean squared Gram difference."""
    if len(grams_s) != len(grams_t):
        raise RasterError("gram lists must have the same layer count")
    total = 0.0
    for gs, gt in zip(grams_s, grams_t):
        if gs.data.shape != gt.data.shape:
            raise RasterError(f"gram dims differ: {gs.data.shape} vs {gt.data.shape}")
        total += float(((gs.data - gt.data) ** 2).mean())
    return total


CONTENT_LAYER = 0


def total_loss_and_gradient(
    i_t: RasterImage,
    i_c: RasterImage,
    i_s: RasterImage,
    extractor: FeatureExtractor,
    config: StylizeConfig,
) -> tuple[float, np.ndarray]:
    """Combined loss and its analytic gradient with respect to the image."""
    if i_t.data.shape != i_c.data.shape or i_t.data.shape != i_s.data.shape:
        raise RasterError("all images must share dimensions")
    f_t = extractor.extract(i_t)
    f_c = extractor.extract(i_c)
    f_s = extractor.extract(i_s)
    grams_t = [gram(t) for t in f_t]
    grams_s = [gram(t) for t in f_s]
    l_content = content_loss(f_c, f_t, CONTENT_LAYER)
    l_style = style_loss(grams_s, grams_t)
    loss = config.alpha_content * l_content + config.beta_style * l_style

    cotangents = []
    for layer, tensor in enumerate(f_t):
        c, h, w = tensor.data.shape
        n = c * h * w
        cot = np.zeros((c, h, w))
        if layer == CONTENT_LAYER and config.alpha_content > 0:
            cot += config.alpha_content * 2.0 * (tensor.data - f_c[layer].data) / n
        if config.beta_style > 0:
            delta = grams_t[layer].data - grams_s[layer].data
            flat = tensor.data.reshape(c, h * w)
            dflat = config.beta_style * (4.0 / (c * c * n)) * (delta @ flat)
            cot += dflat.reshape(c, h, w)
        cotangents.append(cot)
    grad = extractor.input_gradient(i_t, cotangents)
    return loss, grad


def stylize(
    i_c: RasterImage,
    i_s: RasterImage,
    extractor: FeatureExtractor,
    config: StylizeConfig,
) -> tuple[RasterImage, list[float]]:
    """Fixed-step gradient descent on the combined loss, clamped to [0,1]."""
    if config.init == "content":
        current = np.array(i_c.data)
    else:
        rng = np.random.default_rng(config.noise_seed)
        current = rng.random(i_c.data.shape)
    history: list[float] = []
    for iteration in range(config.iterations):
        loss, grad = total_loss_and_gradient(
            RasterImage(current), i_c, i_s, extractor, config
        )
        if not math.isfinite(loss):
            raise StylizeError(f"non-finite loss {loss!r} at iteration {iteration}")
        history.append(loss)
        current = np.clip(current - config.eta * grad, 0.0, 1.0)
    return RasterImage(current), history
