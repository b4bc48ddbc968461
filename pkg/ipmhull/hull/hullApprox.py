"""
Iterative approximation of the lamination hull by a growing point cloud.

Round 0 is a grid of K. Every later round adds convex combinations of cloud
points whose difference lies in the wave cone, found two ways:

pair search:        exact wave cone tests over cloud pairs, all of them while
                    they fit in the per-round budget, otherwise random pairs
                    plus the pairs sharing (rho, v)
directional growth: from a cloud point, follow a wave cone line to the edge
                    of the closed form hull and keep the end point

The cloud is an oracle for the closed form classification, so nothing it
produces should classify Outside. Directional growth end points pass a hull
test by construction, so only cross-base pair points check the closed form
independently; directional_growth = false leaves them alone.
"""
import logging
import math

from enum import Enum
from typing import Optional

import numpy as np

from pydantic import BaseModel
from pydantic import ConfigDict
from pydantic import Field
from scipy.optimize import bisect
from scipy.spatial import cKDTree

from ipmhull.core.errors import PreconditionError
from ipmhull.core.states import DEFAULT_TOLERANCE
from ipmhull.core.states import State
from ipmhull.core.states import ToleranceConfig
from ipmhull.core.states import WaveDirection
from ipmhull.core.states import WaveForm
from ipmhull.core.states import realizeWaveDirection
from ipmhull.core.states import sampleWaveDirection
from ipmhull.core.states import waveConeResidualArray
from ipmhull.hull.regions import RegionTag
from ipmhull.hull.regions import classifyArray
from ipmhull.hull.regions import insideHull
from ipmhull.hull.regions import kBound
from ipmhull.utils import Vec2

logger = logging.getLogger(__name__)

DEFAULT_RESOLUTION = 9
DEFAULT_ROUNDS = 3
DEFAULT_PAIRS_PER_ROUND = 20000
DEFAULT_SEGMENT_SAMPLES = 5
DEFAULT_SEED = 42
DEDUP_TOL = 1e-6

TRIAL_STEP = 1e-3
BISECT_XTOL = 1e-12


class CloudConfig(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True, extra="forbid")

    resolution: int = Field(default=DEFAULT_RESOLUTION, ge=2)
    """ Grid points per velocity axis of the K seed grid """
    vBox: float = Field(default=2.0, gt=0.0, alias="v_box")
    """ The seed grid covers v in [-vBox, vBox]^2 """
    rounds: int = Field(default=DEFAULT_ROUNDS, ge=0)
    pairsPerRound: int = Field(default=DEFAULT_PAIRS_PER_ROUND, ge=0, alias="pairs_per_round")
    """ Pair budget of the pair search and attempt count of directional growth """
    segmentSamples: int = Field(default=DEFAULT_SEGMENT_SAMPLES, ge=0, alias="segment_samples")
    """ Interior weights j / (segmentSamples + 1) added per accepted segment """
    seed: int = DEFAULT_SEED
    dedupTol: float = Field(default=DEDUP_TOL, gt=0.0, alias="dedup_tol")
    """ Max-norm distance under which two points are merged """
    growthStep: float = Field(default=4.0, gt=0.0, alias="growth_step")
    """ Longest step directional growth takes along a direction """
    adaptedShare: float = Field(default=0.5, ge=0.0, le=1.0, alias="adapted_share")
    """ Share of growth attempts along pure flux or horizontal flux lines """
    directionalGrowth: bool = Field(default=True, alias="directional_growth")
    """ Off leaves pair search alone, so no point is placed by a hull test """


DEFAULT_CLOUD_CONFIG = CloudConfig()


class GrowthMode(Enum):
    SEED = "seed"
    PAIR = "pair"
    """ Combination of two points with different (rho, v) """
    FLUX_PAIR = "flux_pair"
    """ Combination of two points sharing (rho, v), only k moves """
    EXTENSION = "extension"


class Provenance(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    roundIndex: int = Field(alias="round", ge=0)
    parents: tuple[int, ...] = ()
    """ Cloud indices of the points this one was combined from """
    lam: Optional[float] = Field(default=None, alias="lambda")
    """ Weight on the first parent """
    mode: GrowthMode = GrowthMode.SEED


class PointCloud(BaseModel):
    model_config = ConfigDict(frozen=True)

    points: list[State]
    provenance: list[Provenance]

    def size(self) -> int:
        return len(self.points)

    def asArray(self) -> np.ndarray:
        if not self.points:
            return np.zeros((0, 5))
        return np.array([z.toArray() for z in self.points])

    def roundOf(self, roundIndex: int) -> list[int]:
        return [i for i, p in enumerate(self.provenance) if p.roundIndex == roundIndex]

    def upToRound(self, roundIndex: int) -> "PointCloud":
        """
        The cloud as it stood after the given round.
        """
        keep = [i for i, p in enumerate(self.provenance) if p.roundIndex <= roundIndex]
        return PointCloud(points=[self.points[i] for i in keep],
                          provenance=[self.provenance[i] for i in keep])

    def withPoint(self, z: State, roundIndex: int = 0) -> "PointCloud":
        return PointCloud(points=self.points + [z],
                          provenance=self.provenance + [Provenance(roundIndex=roundIndex)])


class ContainmentReport(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    total: int
    perRegion: dict[RegionTag, int] = Field(alias="per_region")
    violations: list[int]
    """ Indices of points classifying Outside """
    perMode: dict[GrowthMode, int] = Field(alias="per_mode")
    """
    Points per growth mode. Only PAIR points test the closed form hull
    independently: EXTENSION end points are placed by a hull test and
    FLUX_PAIR points only move k inside an admissible interval.
    """
    violationsPerMode: dict[GrowthMode, int] = Field(alias="violations_per_mode")

    def independentPairs(self) -> int:
        return self.perMode[GrowthMode.PAIR]


class KCoverage(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    empty: bool
    count: int = 0
    kMin: Optional[float] = Field(default=None, alias="k_min")
    kMax: Optional[float] = Field(default=None, alias="k_max")
    kBoundMin: Optional[float] = Field(default=None, alias="k_bound_min")
    """ Smallest kBound over the same neighbours """
    kBoundMax: Optional[float] = Field(default=None, alias="k_bound_max")

    def spread(self) -> float:
        return 0.0 if self.empty else self.kMax - self.kMin


class _Batch(object):
    """
    Candidates of one round, in generation order.

    Parent references are cloud indices when non-negative and -(i + 1) for
    the i-th candidate of the batch.
    """
    def __init__(self, roundIndex: int):
        self.__roundIndex = roundIndex
        self.__points = list[np.ndarray]()
        self.__parents = list[tuple[int, ...]]()
        self.__lams = list[Optional[float]]()
        self.__modes = list[GrowthMode]()

    @property
    def roundIndex(self) -> int:
        return self.__roundIndex

    def add(self,
            point: np.ndarray,
            parents: tuple[int, ...],
            lam: Optional[float],
            mode: GrowthMode) -> int:
        self.__points.append(point)
        self.__parents.append(parents)
        self.__lams.append(lam)
        self.__modes.append(mode)
        return -len(self.__points)

    def size(self) -> int:
        return len(self.__points)

    def points(self) -> np.ndarray:
        return np.array(self.__points)

    def entry(self, position: int) -> tuple[tuple[int, ...], Optional[float], GrowthMode]:
        return self.__parents[position], self.__lams[position], self.__modes[position]


def kSeedGrid(cfg: CloudConfig) -> np.ndarray:
    """
    K sampled on an n x n velocity grid, rows (rho, v1, v2, m1, m2).
    """
    axis = np.linspace(-cfg.vBox, cfg.vBox, cfg.resolution)
    v1, v2 = np.meshgrid(axis, axis, indexing="ij")
    v1 = v1.ravel()
    v2 = v2.ravel()
    blocks = list[np.ndarray]()
    for rho in (1.0, -1.0):
        blocks.append(np.column_stack((np.full_like(v1, rho), v1, v2, rho * v1, rho * v2)))
    return np.vstack(blocks)


def _segmentWeights(cfg: CloudConfig) -> np.ndarray:
    return np.arange(1, cfg.segmentSamples + 1) / (cfg.segmentSamples + 1)


def _sameBasePairs(points: np.ndarray, tol: ToleranceConfig) -> np.ndarray:
    """
    Pairs that share (rho, v). Their difference (0, 0, dm) is always a pure
    flux direction.
    """
    tree = cKDTree(points[:, :3])
    return tree.query_pairs(r=tol.eqTol, p=np.inf, output_type="ndarray")


def _searchPairs(points: np.ndarray,
                 cfg: CloudConfig,
                 rng: np.random.Generator,
                 tol: ToleranceConfig,
                 batch: _Batch):
    count = len(points)
    if count < 2 or cfg.pairsPerRound == 0:
        return
    if count * (count - 1) // 2 <= cfg.pairsPerRound:
        first, second = np.triu_indices(count, k=1)
    else:
        first = rng.integers(count, size=cfg.pairsPerRound)
        second = rng.integers(count, size=cfg.pairsPerRound)
        distinct = first != second
        first = first[distinct]
        second = second[distinct]
        same = _sameBasePairs(points, tol)
        if len(same) > cfg.pairsPerRound:
            same = same[np.sort(rng.choice(len(same), size=cfg.pairsPerRound, replace=False))]
        if len(same):
            first = np.concatenate((first, same[:, 0]))
            second = np.concatenate((second, same[:, 1]))

    difference = points[first] - points[second]
    residuals = waveConeResidualArray(difference)
    hits = (np.all(np.abs(residuals) <= tol.eqTol, axis=1)
            & (np.abs(difference).max(axis=1) > cfg.dedupTol))
    sameBase = np.abs(difference[:, :3]).max(axis=1) <= tol.eqTol
    weights = _segmentWeights(cfg)
    for a, b, flux in zip(first[hits].tolist(), second[hits].tolist(), sameBase[hits].tolist()):
        mode = GrowthMode.FLUX_PAIR if flux else GrowthMode.PAIR
        for lam in weights.tolist():
            batch.add(lam * points[a] + (1.0 - lam) * points[b], (a, b), lam, mode)
    logger.debug("pair search: %d of %d pairs in the wave cone, %d sharing (rho, v)",
                 int(hits.sum()),
                 len(first),
                 int((hits & sameBase).sum()))


def _growthDirection(origin: np.ndarray,
                     cfg: CloudConfig,
                     rng: np.random.Generator,
                     tol: ToleranceConfig) -> np.ndarray:
    """
    Either a generic wave cone direction or one adapted to the origin: pure
    flux along v (moves k at fixed rho and v), or for v = 0 a pure flux
    chord of the X1 disc or a horizontal flux direction.
    """
    if rng.random() < cfg.adaptedShare:
        v1 = origin[1]
        v2 = origin[2]
        if math.hypot(v1, v2) > tol.eqTol:
            return np.array([0.0, 0.0, 0.0, v1, v2])
        if rng.random() < 0.5:
            m = rng.uniform(-1.0, 1.0, size=2)
            return np.array([0.0, 0.0, 0.0, m[0], m[1]])
        sign = 1.0 if rng.random() < 0.5 else -1.0
        direction = WaveDirection(form=WaveForm.HORIZONTAL_FLUX,
                                  rho=sign * float(rng.uniform(0.1, 1.0)),
                                  m1=float(rng.uniform(-1.0, 1.0)))
        return realizeWaveDirection(direction, tol).toArray()
    return realizeWaveDirection(sampleWaveDirection(rng), tol).toArray()


def _extent(origin: np.ndarray,
            step: np.ndarray,
            cfg: CloudConfig,
            tol: ToleranceConfig) -> float:
    """
    How far origin + s step stays inside the hull, doubling from TRIAL_STEP
    and then bisecting the last bracket. Zero when the first trial point is out.
    """
    def outside(s: float) -> float:
        return -1.0 if insideHull(origin + s * step, tol) else 1.0

    lo = TRIAL_STEP
    if outside(lo) > 0.0:
        return 0.0
    hi = 2.0 * lo
    while hi < cfg.growthStep and outside(hi) < 0.0:
        lo = hi
        hi *= 2.0
    if hi >= cfg.growthStep:
        hi = cfg.growthStep
        if outside(hi) < 0.0:
            return hi
    root = bisect(outside, lo, hi, xtol=BISECT_XTOL)
    for candidate in (root, root - 2.0 * BISECT_XTOL):
        if outside(candidate) < 0.0:
            return candidate
    return lo


def _growAlongLines(points: np.ndarray,
                    cfg: CloudConfig,
                    rng: np.random.Generator,
                    tol: ToleranceConfig,
                    batch: _Batch):
    count = len(points)
    if count == 0:
        return
    weights = _segmentWeights(cfg).tolist()
    grown = 0
    for _ in range(cfg.pairsPerRound):
        index = int(rng.integers(count))
        origin = points[index]
        direction = _growthDirection(origin, cfg, rng, tol)
        for sign in (1.0, -1.0):
            step = sign * direction
            extent = _extent(origin, step, cfg, tol)
            if extent <= 0.0:
                continue
            end = origin + extent * step
            endRef = batch.add(end, (index, ), None, GrowthMode.EXTENSION)
            for lam in weights:
                batch.add(lam * end + (1.0 - lam) * origin,
                          (endRef, index),
                          lam,
                          GrowthMode.EXTENSION)
            grown += 1
    logger.debug("directional growth: %d of %d lines extended", grown, 2 * cfg.pairsPerRound)


def _merge(points: np.ndarray,
           provenance: list[Provenance],
           batch: _Batch,
           cfg: CloudConfig) -> tuple[np.ndarray, list[Provenance], int]:
    """
    Append the batch, merging candidates within dedupTol (max-norm) of an
    existing point or of an earlier candidate.
    """
    if batch.size() == 0:
        return points, provenance, 0
    candidates = batch.points()
    distance, nearest = cKDTree(points).query(candidates,
                                              k=1,
                                              p=np.inf,
                                              distance_upper_bound=cfg.dedupTol)
    resolved = np.full(len(candidates), -1, dtype=int)
    known = np.isfinite(distance)
    resolved[known] = nearest[known]

    fresh = np.flatnonzero(~known)
    representative = np.arange(len(fresh))
    if len(fresh) > 1:
        pairs = cKDTree(candidates[fresh]).query_pairs(cfg.dedupTol,
                                                        p=np.inf,
                                                        output_type="ndarray")
        for first, second in sorted(pairs.tolist(), key=lambda pair: (pair[1], pair[0])):
            representative[second] = min(representative[second], representative[first])

    def resolve(ref: int) -> int:
        return ref if ref >= 0 else int(resolved[-ref - 1])

    rows = list[np.ndarray]()
    nextIndex = len(points)
    for position, candidate in enumerate(fresh.tolist()):
        rep = int(representative[position])
        if rep != position:
            resolved[candidate] = resolved[fresh[rep]]
            continue
        resolved[candidate] = nextIndex
        nextIndex += 1
        rows.append(candidates[candidate])
        parents, lam, mode = batch.entry(candidate)
        provenance.append(Provenance(roundIndex=batch.roundIndex,
                                     parents=tuple(resolve(ref) for ref in parents),
                                     lam=lam,
                                     mode=mode))
    if rows:
        points = np.vstack((points, np.array(rows)))
    return points, provenance, len(rows)


def growCloud(cfg: CloudConfig = DEFAULT_CLOUD_CONFIG,
              tol: ToleranceConfig = DEFAULT_TOLERANCE) -> PointCloud:
    """
    Grow the cloud for cfg.rounds rounds. Seeded and sequential, so the
    same config always gives the same cloud.
    """
    rng = np.random.default_rng(cfg.seed)
    points = kSeedGrid(cfg)
    provenance = [Provenance(roundIndex=0) for _ in range(len(points))]
    logger.info("round 0: %d points of K", len(points))
    for roundIndex in range(1, cfg.rounds + 1):
        batch = _Batch(roundIndex)
        _searchPairs(points, cfg, rng, tol, batch)
        if cfg.directionalGrowth:
            _growAlongLines(points, cfg, rng, tol, batch)
        points, provenance, added = _merge(points, provenance, batch, cfg)
        logger.info("round %d: %d candidates, %d new points, %d total",
                    roundIndex,
                    batch.size(),
                    added,
                    len(points))
    return PointCloud(points=[State.fromArray(row) for row in points], provenance=provenance)


def containmentReport(cloud: PointCloud,
                      tol: ToleranceConfig = DEFAULT_TOLERANCE) -> ContainmentReport:
    tags = classifyArray(cloud.asArray(), tol)
    perRegion = {tag: 0 for tag in RegionTag}
    perMode = {mode: 0 for mode in GrowthMode}
    violationsPerMode = {mode: 0 for mode in GrowthMode}
    violations = list[int]()
    for index, (tag, provenance) in enumerate(zip(tags, cloud.provenance)):
        perRegion[tag] += 1
        perMode[provenance.mode] += 1
        if tag == RegionTag.OUTSIDE:
            violations.append(index)
            violationsPerMode[provenance.mode] += 1
    if violations:
        logger.warning("%d of %d cloud points classify Outside", len(violations), len(tags))
    return ContainmentReport(total=len(tags),
                             perRegion=perRegion,
                             violations=violations,
                             perMode=perMode,
                             violationsPerMode=violationsPerMode)


def kCoverage(cloud: PointCloud,
              rho: float,
              v: Vec2,
              radius: float,
              tol: ToleranceConfig = DEFAULT_TOLERANCE) -> KCoverage:
    """
    The empirical range of k over cloud points whose (rho, v) lies within
    radius (euclidean) of the given one and whose m is parallel to v.
    """
    if math.hypot(v[0], v[1]) <= tol.eqTol:
        raise PreconditionError(f"kCoverage needs v != 0, got v = {v}")
    values = cloud.asArray()
    if len(values) == 0:
        return KCoverage(empty=True)
    neighbours = cKDTree(values[:, :3]).query_ball_point([rho, v[0], v[1]], r=radius)

    ks = list[float]()
    bounds = list[float]()
    for index in sorted(neighbours):
        r, a1, a2, m1, m2 = values[index].tolist()
        size2 = a1 * a1 + a2 * a2
        if math.sqrt(size2) <= tol.eqTol:
            continue
        if abs(m2 * a1 - m1 * a2) > tol.eqTol * (1.0 + math.hypot(m1, m2) * math.sqrt(size2)):
            continue
        ks.append((m1 * a1 + m2 * a2) / size2)
        bounds.append(kBound(r, (a1, a2)))
    if not ks:
        return KCoverage(empty=True)
    return KCoverage(empty=False,
                     count=len(ks),
                     kMin=min(ks),
                     kMax=max(ks),
                     kBoundMin=min(bounds),
                     kBoundMax=max(bounds))
