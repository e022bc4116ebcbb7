"""Language query against a semantic feature grid.

One natural-language description becomes candidate waypoints through a
fixed pipeline: embed the phrase, inner-product score every observed cell,
fit a k-component 1D Gaussian mixture to the scores, keep cells whose
score belongs to the highest-mean component, clean the mask with
morphology, then emit one clearance-maximal free point per contiguous
region.

Feature grids stand in for a vision-language map: embeddings are ingested
from a vocabulary file, never computed here.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage
from scipy.special import logsumexp

from .errors import DimensionMismatch, NoMatch, TooFewSamples, UnknownPhrase
from .grid import (
    FREE,
    GridIndex,
    OccupancyGrid,
    WorldPose,
    connected_components,
    distance_transform,
    filter_mask,
    grid_to_world,
)

_FGRID_MAGIC = b"FGRID\x00"
_VAR_FLOOR = 1e-9
_LL_TOL = 1e-6
_MAX_EM_ITERS = 200


@dataclass(frozen=True)
class FeatureGrid:
    """Per-cell feature vectors aligned 1:1 with an occupancy grid."""

    features: np.ndarray = field(repr=False)  # (height, width, M) float32
    observed: np.ndarray = field(repr=False)  # (height, width) bool

    def __post_init__(self):
        features = np.asarray(self.features, dtype=np.float32)
        observed = np.asarray(self.observed, dtype=bool)
        if features.ndim != 3:
            raise ValueError(f"features must be (H, W, M), got {features.shape}")
        if observed.shape != features.shape[:2]:
            raise DimensionMismatch(
                f"observed {observed.shape} vs features {features.shape[:2]}"
            )
        if not np.isfinite(features[observed]).all():
            raise ValueError("non-finite feature vector on an observed cell")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "observed", observed)

    @property
    def height(self) -> int:
        return self.features.shape[0]

    @property
    def width(self) -> int:
        return self.features.shape[1]

    @property
    def m(self) -> int:
        return self.features.shape[2]


@dataclass(frozen=True)
class TextEmbedding:
    vector: np.ndarray
    phrase: str

    def __post_init__(self):
        vec = np.asarray(self.vector, dtype=np.float64).ravel()
        if not np.isfinite(vec).all():
            raise ValueError(f"non-finite embedding for {self.phrase!r}")
        object.__setattr__(self, "vector", vec)


@dataclass(frozen=True)
class ScoreMap:
    """Inner-product score per observed cell; unobserved cells carry none."""

    values: np.ndarray = field(repr=False)  # (height, width) float64
    observed: np.ndarray = field(repr=False)  # (height, width) bool

    @property
    def samples(self) -> np.ndarray:
        return self.values[self.observed]


@dataclass(frozen=True)
class GmmModel:
    """1D Gaussian mixture: means/stds drive the match rule, weights the EM."""

    weights: np.ndarray
    means: np.ndarray
    stds: np.ndarray
    log_likelihoods: tuple[float, ...] = ()

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=np.float64)
        means = np.asarray(self.means, dtype=np.float64)
        stds = np.asarray(self.stds, dtype=np.float64)
        k = means.size
        if not (weights.size == k == stds.size) or k < 1:
            raise ValueError("weights, means, stds must share length >= 1")
        if abs(weights.sum() - 1.0) > 1e-9:
            raise ValueError(f"mixing weights sum to {weights.sum()}, expected 1")
        if (stds < _VAR_FLOOR).any():
            raise ValueError("component std below the variance floor")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "stds", stds)

    @property
    def k(self) -> int:
        return self.means.size


@dataclass(frozen=True)
class CandidateWaypoint:
    """Free-space, clearance-maximal point extracted for one description."""

    pose: WorldPose
    region_id: int
    clearance: float
    description_index: int
    cell: GridIndex


def normalize_phrase(phrase: str) -> str:
    return " ".join(phrase.split()).lower()


class VocabularyEmbedding:
    """Text-embedding provider backed by a fixed phrase -> vector table."""

    def __init__(self, table: dict[str, np.ndarray]):
        if not table:
            raise ValueError("empty vocabulary")
        dims = {np.asarray(v).size for v in table.values()}
        if len(dims) != 1:
            raise ValueError(f"inconsistent vector dimensions: {sorted(dims)}")
        self.m = dims.pop()
        self._table = {
            normalize_phrase(k): np.asarray(v, dtype=np.float64).ravel()
            for k, v in table.items()
        }

    def embed(self, phrase: str) -> TextEmbedding:
        key = normalize_phrase(phrase)
        try:
            return TextEmbedding(self._table[key], phrase)
        except KeyError:
            raise UnknownPhrase(phrase) from None

    def phrases(self) -> list[str]:
        return sorted(self._table)


def embed(phrase: str, provider: VocabularyEmbedding) -> TextEmbedding:
    """Provider lookup; case-insensitive after whitespace normalization."""
    return provider.embed(phrase)


def score_map(fg: FeatureGrid, emb: TextEmbedding) -> ScoreMap:
    """s = <feature, embedding> on every observed cell."""
    if emb.vector.size != fg.m:
        raise DimensionMismatch(
            f"embedding dim {emb.vector.size} vs feature dim {fg.m}"
        )
    values = fg.features.astype(np.float64) @ emb.vector
    values[~fg.observed] = 0.0
    return ScoreMap(values, fg.observed.copy())


def _log_densities(x: np.ndarray, means: np.ndarray, stds: np.ndarray) -> np.ndarray:
    """Unweighted per-component normal log densities, shape x.shape + (k,)."""
    z = (x[..., None] - means) / stds
    return -0.5 * z * z - np.log(stds) - 0.5 * np.log(2.0 * np.pi)


def _log_likelihood(x, weights, means, stds) -> float:
    with np.errstate(divide="ignore"):
        log_wp = _log_densities(x, means, stds) + np.log(weights)
    return float(logsumexp(log_wp, axis=-1).sum())


def fit_gmm_samples(samples: np.ndarray, k: int) -> GmmModel:
    """EM fit of a k-component 1D mixture to raw score samples.

    Deterministic: means start at the k evenly spaced sample quantiles
    (levels 0..1), weights uniform, stds at the global sample std. Iterates
    until the log-likelihood improves by less than 1e-6 or 200 iterations.
    """
    x = np.asarray(samples, dtype=np.float64).ravel()
    n = x.size
    if n < k:
        raise TooFewSamples(f"{n} samples for k={k}")
    floor_std = np.sqrt(_VAR_FLOOR)
    means = np.quantile(x, np.linspace(0.0, 1.0, k))
    stds = np.full(k, max(float(x.std()), floor_std))
    weights = np.full(k, 1.0 / k)

    lls = [_log_likelihood(x, weights, means, stds)]
    for _ in range(_MAX_EM_ITERS):
        # E-step: responsibilities in the log domain
        with np.errstate(divide="ignore"):
            log_wp = _log_densities(x, means, stds) + np.log(weights)
        log_norm = logsumexp(log_wp, axis=-1)
        resp = np.exp(log_wp - log_norm[:, None])

        # M-step; components starved of responsibility keep their shape
        nk = resp.sum(axis=0)
        weights = nk / n
        alive = nk > 1e-12
        new_means = means.copy()
        new_vars = stds.copy() ** 2
        if alive.any():
            new_means[alive] = (resp[:, alive] * x[:, None]).sum(axis=0) / nk[alive]
            sq = (x[:, None] - new_means[None, alive]) ** 2
            new_vars[alive] = (resp[:, alive] * sq).sum(axis=0) / nk[alive]
        means = new_means
        stds = np.sqrt(np.maximum(new_vars, _VAR_FLOOR))

        lls.append(_log_likelihood(x, weights, means, stds))
        if lls[-1] - lls[-2] < _LL_TOL:
            break
    return GmmModel(weights, means, stds, tuple(lls))


def fit_gmm(scores: ScoreMap, k: int, seed: int = 0) -> GmmModel:
    """Fit the mixture to the observed-cell scores of a map.

    ``seed`` is kept for interface stability; the quantile initialization
    makes the fit fully deterministic without it.
    """
    del seed
    return fit_gmm_samples(scores.samples, k)


def match_samples(samples: np.ndarray, model: GmmModel) -> np.ndarray:
    """True where a score belongs to the highest-mean component.

    Membership compares unweighted component densities; density ties break
    toward the higher-mean component.
    """
    order = np.argsort(-model.means, kind="stable")
    logd = _log_densities(np.asarray(samples, dtype=np.float64),
                          model.means[order], model.stds[order])
    # argmax returns the first maximum, i.e. the higher-mean side of a tie
    return np.argmax(logd, axis=-1) == 0


def match_mask(scores: ScoreMap, model: GmmModel) -> np.ndarray:
    """Binary match map over the grid; unobserved cells never match."""
    mask = np.zeros(scores.values.shape, dtype=bool)
    obs = scores.observed
    mask[obs] = match_samples(scores.values[obs], model)
    return mask


@dataclass(frozen=True)
class SemanticParams:
    """Knobs for the description -> waypoints pipeline."""

    k: int = 3
    seed: int = 0
    radius: float | None = None  # meters; None -> 10 * grid resolution
    clearance_policy: str = "occupied_and_unknown"
    filter_ops: tuple[str, ...] = ("open", "close")

    def radius_for(self, grid: OccupancyGrid) -> float:
        return 10.0 * grid.resolution if self.radius is None else self.radius


def candidates_for(
    description: str,
    fg: FeatureGrid,
    occ: OccupancyGrid,
    provider: VocabularyEmbedding,
    params: SemanticParams = SemanticParams(),
    description_index: int = 0,
) -> list[CandidateWaypoint]:
    """Full pipeline from one description to its candidate waypoints.

    One waypoint per surviving contiguous matched region: the Free cell
    within ``radius`` of the region with maximal clearance (ties to the
    lowest row-major index). Raises NoMatch when nothing usable remains.
    """
    if (fg.height, fg.width) != (occ.height, occ.width):
        raise DimensionMismatch(
            f"feature grid {fg.height}x{fg.width} vs occupancy "
            f"{occ.height}x{occ.width}"
        )
    emb = embed(description, provider)
    scores = score_map(fg, emb)
    model = fit_gmm(scores, params.k, params.seed)
    mask = filter_mask(match_mask(scores, model), params.filter_ops)
    if not mask.any():
        raise NoMatch(f"no region matches {description!r}")

    radius = params.radius_for(occ)
    clearance = distance_transform(occ, params.clearance_policy)
    free = occ.cells == FREE
    width = occ.width
    waypoints = []
    for region_id, region in enumerate(connected_components(mask)):
        region_mask = np.zeros(mask.shape, dtype=bool)
        region_mask[region[:, 0], region[:, 1]] = True
        dist = ndimage.distance_transform_edt(~region_mask) * occ.resolution
        eligible = free & (dist <= radius + 1e-9)
        if not eligible.any():
            continue
        ranked = np.where(eligible, clearance, -np.inf)
        rm = int(np.argmax(ranked))  # first max = lowest row-major index
        cell = GridIndex(rm // width, rm % width)
        waypoints.append(
            CandidateWaypoint(
                pose=grid_to_world(cell, occ),
                region_id=region_id,
                clearance=float(clearance[cell.row, cell.col]),
                description_index=description_index,
                cell=cell,
            )
        )
    if not waypoints:
        raise NoMatch(f"no free space near any region matching {description!r}")
    return waypoints


# ---------- file formats ----------

def save_feature_grid(fg: FeatureGrid, path) -> None:
    """FGRID binary: magic, u32 width/height/M, f32 features, observed bytes."""
    with open(path, "wb") as f:
        f.write(_FGRID_MAGIC)
        f.write(struct.pack("<III", fg.width, fg.height, fg.m))
        f.write(np.ascontiguousarray(fg.features, dtype="<f4").tobytes())
        f.write(fg.observed.astype(np.uint8).tobytes())


def load_feature_grid(path) -> FeatureGrid:
    with open(path, "rb") as f:
        raw = f.read()
    if raw[: len(_FGRID_MAGIC)] != _FGRID_MAGIC:
        raise ValueError(f"{path}: not an FGRID file")
    off = len(_FGRID_MAGIC)
    width, height, m = struct.unpack_from("<III", raw, off)
    off += 12
    n_feat = width * height * m
    feat_bytes = n_feat * 4
    if len(raw) != off + feat_bytes + width * height:
        raise ValueError(f"{path}: truncated FGRID payload")
    features = np.frombuffer(raw, dtype="<f4", count=n_feat, offset=off)
    features = features.reshape(height, width, m).copy()
    observed = np.frombuffer(raw, dtype=np.uint8, count=width * height,
                             offset=off + feat_bytes)
    observed = observed.reshape(height, width).astype(bool)
    return FeatureGrid(features, observed)


def save_vocabulary(table: dict[str, np.ndarray], path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for phrase in sorted(table):
            vec = ",".join(repr(float(v)) for v in np.asarray(table[phrase]).ravel())
            f.write(f"{phrase}\t{vec}\n")


def load_vocabulary(path) -> VocabularyEmbedding:
    """Vocabulary file: UTF-8 lines ``phrase<TAB>v1,v2,...,vM``."""
    table: dict[str, np.ndarray] = {}
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            try:
                phrase, vec_text = line.split("\t", 1)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: missing tab separator") from None
            key = normalize_phrase(phrase)
            if key in table:
                raise ValueError(f"{path}:{lineno}: duplicate phrase {phrase!r}")
            table[key] = np.array([float(v) for v in vec_text.split(",")])
    return VocabularyEmbedding(table)
