"""
Constructive laminates: binary trees whose leaves lie in K, whose splits are
wave cone compatible and whose weighted recombination is the root point.
"""
import logging
import math

from typing import Any
from typing import Optional

import numpy as np

from pydantic import BaseModel
from pydantic import ConfigDict
from pydantic import Field
from pydantic import ValidationError
from pydantic import model_serializer
from pydantic import model_validator
from scipy.optimize import brentq

from ipmhull.core.errors import MalformedTreeError
from ipmhull.core.errors import PreconditionError
from ipmhull.core.states import DEFAULT_TOLERANCE
from ipmhull.core.states import State
from ipmhull.core.states import ToleranceConfig
from ipmhull.core.states import inWaveCone
from ipmhull.core.states import waveConeResiduals
from ipmhull.hull.regions import Region
from ipmhull.hull.regions import RegionTag
from ipmhull.hull.regions import classify
from ipmhull.hull.separators import separationBound
from ipmhull.utils import Vec2
from ipmhull.utils import norm
from ipmhull.utils import norm2

logger = logging.getLogger(__name__)

SEGMENT_SAMPLES = 33
CHORD_XTOL = 1e-14
CERTIFIED_ONLY_NOTE = "membership certified by the closed-form hull, constructive tree unavailable"

FIRST_LAMINATE = "first-laminate"
UPPER_ENDPOINT = "upper-endpoint"
LOWER_ENDPOINT = "lower-endpoint"
FLUX_CHORD = "flux-chord"
DISC_CHORD = "disc-chord"

_SPLIT_KEYS = frozenset(("lambda", "lam", "left", "right", "construction", "meta"))


class LaminateSplit(BaseModel):
    """
    One split of a node into two children with weights lam and 1 - lam.
    """
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    lam: float = Field(alias="lambda", gt=0.0, lt=1.0)
    """ Weight of the left child """
    left: "LaminateNode"
    right: "LaminateNode"
    construction: str = ""
    """ Which construction produced the split """
    meta: dict[str, float] = Field(default_factory=dict)
    """ Auxiliary construction values such as psi or w """


class LaminateNode(BaseModel):
    """
    A tree node. Leaves carry points of K.

    On the wire the split is flattened into the node:
    {"point": ..., "lambda": ..., "left": ..., "right": ...}
    """
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    point: State
    split: Optional[LaminateSplit] = None
    certifiedOnly: bool = Field(default=False, alias="certified_only")
    """ Hull membership holds but no constructive tree was found """
    note: Optional[str] = None

    def isLeaf(self) -> bool:
        return self.split is None

    @model_validator(mode="before")
    @classmethod
    def _foldSplit(cls, data: Any) -> Any:
        if not isinstance(data, dict) or "split" in data:
            return data
        keys = _SPLIT_KEYS & data.keys()
        if not keys:
            return data
        if "left" not in data or "right" not in data or not keys & {"lambda", "lam"}:
            raise MalformedTreeError(
                f"a split needs lambda, left and right, got {sorted(keys)}")
        folded = {key: value for key, value in data.items() if key not in keys}
        folded["split"] = {key: data[key] for key in keys}
        return folded

    @model_serializer(mode="wrap")
    def _flattenSplit(self, handler):
        data = handler(self)
        split = data.pop("split", None)
        if split is not None:
            data.update(split)
        return data


LaminateSplit.model_rebuild()

LaminateTree = LaminateNode


class TreeReport(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    leavesInK: bool = Field(alias="leaves_in_K")
    splitsInLambda: bool = Field(alias="splits_in_Lambda")
    recombinationError: float = Field(alias="recombination_error")
    maxLeafResidual: float = Field(alias="max_leaf_residual")
    maxSplitResidual: float = Field(alias="max_split_residual")
    certifiedOnly: bool = Field(default=False, alias="certified_only")
    passed: bool = Field(alias="pass")


def _leaf(point: State) -> LaminateNode:
    return LaminateNode(point=point)


def _split(point: State,
           lam: float,
           left: LaminateNode,
           right: LaminateNode,
           construction: str,
           **meta: float) -> LaminateNode:
    return LaminateNode(point=point,
                        split=LaminateSplit(lam=lam,
                                            left=left,
                                            right=right,
                                            construction=construction,
                                            meta=meta))


def _firstLaminate(point: State, w: Vec2) -> LaminateNode:
    """
    Split (rho, v, rho v + (1 - rho^2) w) into
    (1, v + (1 - rho) w, v + (1 - rho) w) and (-1, v - (1 + rho) w, -v + (1 + rho) w)
    with weights (1 + rho)/2 and (1 - rho)/2.
    """
    rho = point.rho
    v = point.v
    plus = (v[0] + (1.0 - rho) * w[0], v[1] + (1.0 - rho) * w[1])
    minus = (v[0] - (1.0 + rho) * w[0], v[1] - (1.0 + rho) * w[1])
    return _split(point,
                  0.5 * (1.0 + rho),
                  _leaf(State(rho=1.0, v=plus, m=plus)),
                  _leaf(State(rho=-1.0, v=minus, m=(-minus[0], -minus[1]))),
                  FIRST_LAMINATE,
                  w1=w[0],
                  w2=w[1])


def _rigidLaminate(point: State) -> LaminateNode:
    v = point.v
    scale = -v[1] / norm2(v)
    return _firstLaminate(point, (scale * v[0], scale * v[1]))


def _stagnant(point: State, e: Vec2, tol: ToleranceConfig) -> LaminateNode:
    """
    v = 0 points with m = ((1 - rho^2)/2)(e - (0,1)).

    On the unit circle this is a single first laminate. Inside the disc the
    point first splits horizontally onto the circle, which is a pure flux
    direction.
    """
    eNorm = norm(e)
    if eNorm >= 1.0 - tol.eqTol:
        unit = (e[0] / eNorm, e[1] / eNorm)
        return _firstLaminate(point, (0.5 * unit[0], 0.5 * (unit[1] - 1.0)))

    half = 0.5 * (1.0 - point.rho * point.rho)
    s = math.sqrt(1.0 - e[1] * e[1])
    lam = (e[0] + s) / (2.0 * s)
    children = list[LaminateNode]()
    for side in (s, -s):
        edge = (side, e[1])
        child = State(rho=point.rho,
                      v=(0.0, 0.0),
                      m=(half * edge[0], half * (edge[1] - 1.0)))
        children.append(_stagnant(child, edge, tol))
    return _split(point, lam, children[0], children[1], DISC_CHORD, s=s)


def _coneEndpoint(point: State, upper: bool, tol: ToleranceConfig) -> LaminateNode:
    """
    Split a cone point with k = 1 (upper) or k = -1 (lower) into a point of K
    and the stagnant point (psi, 0, 0).
    """
    rho = point.rho
    v = point.v
    a = norm2(v)
    c = v[1]
    if upper:
        lam = a / (a - (1.0 - rho) * c)
    else:
        lam = a / (a + (1.0 + rho) * c)
    psi = (a + rho * c) / c
    scaled = (v[0] / lam, v[1] / lam)
    if upper:
        end = State(rho=1.0, v=scaled, m=scaled)
    else:
        end = State(rho=-1.0, v=scaled, m=(-scaled[0], -scaled[1]))
    stagnant = State(rho=psi, v=(0.0, 0.0), m=(0.0, 0.0))
    return _split(point,
                  lam,
                  _leaf(end),
                  _decomposeStagnant(stagnant, tol),
                  UPPER_ENDPOINT if upper else LOWER_ENDPOINT,
                  psi=psi)


def _decomposeStagnant(point: State, tol: ToleranceConfig) -> LaminateNode:
    if abs(abs(point.rho) - 1.0) <= tol.eqTol:
        return _leaf(point)
    return _stagnant(point, (0.0, 1.0), tol)


def _fluxChord(point: State,
               region: Region,
               upper: bool,
               tol: ToleranceConfig) -> LaminateNode:
    """
    Interior k: the chord between (rho, v, +-v) and (rho, v, kBound v) moves
    along the pure flux direction (0, 0, v), so the point splits onto the two
    ends of its k-range.
    """
    endK = 1.0 if upper else -1.0
    b = region.kBound
    k = region.k
    v = point.v
    weight = brentq(lambda alpha: alpha * endK + (1.0 - alpha) * b - k,
                    0.0,
                    1.0,
                    xtol=CHORD_XTOL)
    endPoint = State(rho=point.rho, v=v, m=(endK * v[0], endK * v[1]))
    rigidPoint = State(rho=point.rho, v=v, m=(b * v[0], b * v[1]))
    return _split(point,
                  weight,
                  _coneEndpoint(endPoint, upper, tol),
                  _rigidLaminate(rigidPoint),
                  FLUX_CHORD,
                  k=k,
                  kBound=b)


def _cone(point: State,
          region: Region,
          upper: bool,
          tol: ToleranceConfig) -> LaminateNode:
    endK = 1.0 if upper else -1.0
    if abs(region.k - endK) <= tol.eqTol:
        return _coneEndpoint(point, upper, tol)
    if abs(region.k - region.kBound) <= tol.eqTol:
        return _rigidLaminate(point)
    return _fluxChord(point, region, upper, tol)


def _certifiedOnly(point: State) -> LaminateNode:
    return LaminateNode(point=point, certifiedOnly=True, note=CERTIFIED_ONLY_NOTE)


def decompose(z: State, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> LaminateNode:
    """
    Build a laminate tree of depth at most three for a hull point.

    Raises PreconditionError for points outside the hull, with the separator
    report as details.
    """
    region = classify(z, tol)
    if region.tag == RegionTag.OUTSIDE:
        report = separationBound(z, tol)
        firing = ", ".join(sid.value for sid in report.firing()) or "none"
        raise PreconditionError(f"{z} is outside the hull (separators firing: {firing})",
                                details=report)
    try:
        if region.tag == RegionTag.ON_K:
            tree = _leaf(z)
        elif region.tag == RegionTag.X1:
            tree = _stagnant(z, region.e, tol)
        elif region.tag == RegionTag.X3:
            tree = _rigidLaminate(z)
        else:
            tree = _cone(z, region, region.tag == RegionTag.X2, tol)
    except (ValidationError, ValueError, ZeroDivisionError) as err:
        logger.warning("construction failed for %s: %s", z, err)
        return _certifiedOnly(z)

    if not verifyTree(tree, tol).passed:
        logger.warning("constructed tree for %s does not verify", z)
        return _certifiedOnly(z)
    return tree


def recombine(tree: LaminateNode) -> State:
    if tree.certifiedOnly:
        raise MalformedTreeError("a certified-only result has no tree to recombine")
    if tree.split is None:
        return tree.point
    split = tree.split
    return (split.lam * recombine(split.left)
            + (1.0 - split.lam) * recombine(split.right))


def _leafResidual(z: State) -> float:
    return max(abs(abs(z.rho) - 1.0),
               abs(z.m[0] - z.rho * z.v[0]),
               abs(z.m[1] - z.rho * z.v[1]))


def verifyTree(tree: LaminateNode, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> TreeReport:
    """
    Audit every leaf and every split of a tree.
    """
    leafResidual = 0.0
    splitResidual = 0.0
    recombinationError = 0.0
    splitsOk = True

    stack = [tree]
    while stack:
        node = stack.pop()
        if node.split is None:
            leafResidual = max(leafResidual, _leafResidual(node.point))
            continue
        split = node.split
        left = split.left.point
        right = split.right.point
        difference = left - right
        splitResidual = max(splitResidual, max(abs(r) for r in waveConeResiduals(difference)))
        splitsOk = splitsOk and inWaveCone(difference, tol)
        mixed = split.lam * left.toArray() + (1.0 - split.lam) * right.toArray()
        recombinationError = max(recombinationError,
                                 float(np.abs(mixed - node.point.toArray()).max()))
        stack.append(split.left)
        stack.append(split.right)

    if tree.certifiedOnly:
        leavesOk = False
    else:
        leavesOk = leafResidual <= tol.eqTol
        overall = recombine(tree).toArray() - tree.point.toArray()
        recombinationError = max(recombinationError, float(np.abs(overall).max()))
    return TreeReport(leavesInK=leavesOk,
                      splitsInLambda=splitsOk,
                      recombinationError=recombinationError,
                      maxLeafResidual=leafResidual,
                      maxSplitResidual=splitResidual,
                      certifiedOnly=tree.certifiedOnly,
                      passed=(leavesOk and splitsOk and recombinationError <= tol.eqTol))


def treeDepth(tree: LaminateNode) -> int:
    if tree.split is None:
        return 0
    return 1 + max(treeDepth(tree.split.left), treeDepth(tree.split.right))


def treeLeaves(tree: LaminateNode) -> list[tuple[float, State]]:
    """
    The leaves with their total weights, left to right.
    """
    toRet = list[tuple[float, State]]()

    def walk(node: LaminateNode, weight: float):
        if node.split is None:
            toRet.append((weight, node.point))
            return
        walk(node.split.left, weight * node.split.lam)
        walk(node.split.right, weight * (1.0 - node.split.lam))

    walk(tree, 1.0)
    return toRet


def randomLambdaSegment(z1: State,
                        z2: State,
                        tol: ToleranceConfig = DEFAULT_TOLERANCE,
                        count: int = SEGMENT_SAMPLES,
                        seed: Optional[int] = None) -> list[State]:
    """
    Convex combinations lam z1 + (1 - lam) z2 along a wave cone segment.

    Without a seed the weights are equispaced with both endpoints included.
    With a seed they are drawn uniformly and sorted, endpoints still
    included.
    """
    if not inWaveCone(z1 - z2, tol):
        raise PreconditionError(f"{z1} - {z2} is not a wave cone direction")
    if count < 2:
        raise PreconditionError(f"a segment needs at least two samples, got {count}")
    if seed is None:
        weights = np.linspace(0.0, 1.0, count)
    else:
        inner = np.random.default_rng(seed).uniform(0.0, 1.0, count - 2)
        weights = np.concatenate(([0.0], np.sort(inner), [1.0]))
    first = z1.toArray()
    second = z2.toArray()
    return [State.fromArray(lam * first + (1.0 - lam) * second) for lam in weights]
