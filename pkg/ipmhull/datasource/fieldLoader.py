"""
Reading and writing the on-disk formats.

Fields are a JSON header next to one CSV grid per array:

{"nx": 64, "ny": 64, "Lx": 1.0, "Ly": 1.0, "boundary_mode": "impermeable_box",
 "rho": "f_rho.csv", "psi_v": "f_psi_v.csv", "psi_m": "f_psi_m.csv"}

Array paths are relative to the header. A field whose m is given as face
fluxes names "m_x" and "m_y" instead of "psi_m".

Time series are a JSON manifest {"frames": [{"time": t, "field": header}]}
with an optional "rho0" grid. Clouds are a CSV with the columns of
CLOUD_COLUMNS.
"""
import contextlib
import csv
import logging

from pathlib import Path
from typing import Optional
from typing import TextIO
from typing import Union

import numpy as np

from pydantic import BaseModel
from pydantic import ConfigDict
from pydantic import Field
from pydantic import ValidationError
from pydantic import model_validator

from ipmhull.core.errors import FieldError
from ipmhull.core.states import DEFAULT_TOLERANCE
from ipmhull.core.states import State
from ipmhull.core.states import ToleranceConfig
from ipmhull.hull.hullApprox import PointCloud
from ipmhull.hull.hullApprox import Provenance
from ipmhull.hull.regions import RegionTag
from ipmhull.hull.regions import classifyParts
from ipmhull.subsolution.discreteField import BoundaryMode
from ipmhull.subsolution.discreteField import DiscreteField
from ipmhull.subsolution.discreteField import buildField
from ipmhull.subsolution.discreteField import buildFluxField
from ipmhull.subsolution.timeSeries import TimeSeries

logger = logging.getLogger(__name__)

CLOUD_COLUMNS = ("rho", "v1", "v2", "m1", "m2", "round", "tag", "k")


class FieldHeader(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True, extra="forbid")

    nx: int = Field(ge=1)
    ny: int = Field(ge=1)
    Lx: float = Field(default=1.0, gt=0.0)
    Ly: float = Field(default=1.0, gt=0.0)
    boundaryMode: BoundaryMode = Field(default=BoundaryMode.IMPERMEABLE_BOX,
                                       alias="boundary_mode")
    rho: str
    psiV: str = Field(alias="psi_v")
    psiM: Optional[str] = Field(default=None, alias="psi_m")
    mX: Optional[str] = Field(default=None, alias="m_x")
    """ x-face fluxes of m, shape (nx + 1, ny) """
    mY: Optional[str] = Field(default=None, alias="m_y")
    """ y-face fluxes of m, shape (nx, ny + 1) """

    @model_validator(mode="after")
    def _oneFluxForm(self) -> "FieldHeader":
        faces = self.mX is not None and self.mY is not None
        if (self.psiM is None) == (not faces):
            raise ValueError("give either psi_m or both m_x and m_y")
        return self


class SeriesFrame(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    time: float
    field: str
    """ Path of the frame's field header """


class SeriesManifest(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    frames: list[SeriesFrame]
    rho0: Optional[str] = None
    """ CSV grid of the initial density, the first frame's when absent """


class CsvCloudRow(BaseModel):
    """
    One row read back from a cloud CSV.
    """
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    state: State
    roundIndex: int = Field(alias="round")
    tag: RegionTag
    k: Optional[float] = None


def _readGrid(path: Path) -> np.ndarray:
    try:
        return np.loadtxt(path, delimiter=",", ndmin=2)
    except OSError as err:
        raise FieldError(f"cannot read grid {path}: {err}") from err


def _writeGrid(path: Path, values: np.ndarray, name: str):
    np.savetxt(path, values, delimiter=",", header=f"{name} {values.shape[0]}x{values.shape[1]}")


def readFieldHeader(headerPath: Union[str, Path]) -> FieldHeader:
    try:
        return FieldHeader.model_validate_json(Path(headerPath).read_text())
    except OSError as err:
        raise FieldError(f"cannot read field header {headerPath}: {err}") from err


def loadField(headerPath: Union[str, Path],
              tol: ToleranceConfig = DEFAULT_TOLERANCE) -> DiscreteField:
    headerPath = Path(headerPath)
    header = readFieldHeader(headerPath)
    base = headerPath.parent
    rho = _readGrid(base / header.rho)
    if rho.shape != (header.nx, header.ny):
        raise FieldError(f"rho has shape {rho.shape}, header says {(header.nx, header.ny)}")
    psiV = _readGrid(base / header.psiV)
    if header.psiM is not None:
        return buildField(psiV,
                          _readGrid(base / header.psiM),
                          rho,
                          header.boundaryMode,
                          header.Lx,
                          header.Ly,
                          tol)
    return buildFluxField(psiV,
                          _readGrid(base / header.mX),
                          _readGrid(base / header.mY),
                          rho,
                          header.boundaryMode,
                          header.Lx,
                          header.Ly,
                          tol)


def writeField(field: DiscreteField, headerPath: Union[str, Path]) -> FieldHeader:
    """
    Write the header and its grids; grids are named after the header.
    """
    headerPath = Path(headerPath)
    stem = headerPath.stem
    base = headerPath.parent
    names = {"rho": f"{stem}_rho.csv", "psi_v": f"{stem}_psi_v.csv"}
    _writeGrid(base / names["rho"], field.rho, "rho")
    _writeGrid(base / names["psi_v"], field.psiV, "psi_v")
    if field.psiM is not None:
        names["psi_m"] = f"{stem}_psi_m.csv"
        _writeGrid(base / names["psi_m"], field.psiM, "psi_m")
    else:
        uM, wM = field.fluxFaces()
        names["m_x"] = f"{stem}_m_x.csv"
        names["m_y"] = f"{stem}_m_y.csv"
        _writeGrid(base / names["m_x"], uM, "m_x")
        _writeGrid(base / names["m_y"], wM, "m_y")
    grid = field.grid
    header = FieldHeader.model_validate({"nx": grid.nx,
                                         "ny": grid.ny,
                                         "Lx": grid.Lx,
                                         "Ly": grid.Ly,
                                         "boundary_mode": field.mode,
                                         **names})
    headerPath.write_text(header.model_dump_json(by_alias=True, exclude_none=True, indent=2))
    return header


def loadSeries(manifestPath: Union[str, Path],
               tol: ToleranceConfig = DEFAULT_TOLERANCE) -> TimeSeries:
    manifestPath = Path(manifestPath)
    try:
        manifest = SeriesManifest.model_validate_json(manifestPath.read_text())
    except OSError as err:
        raise FieldError(f"cannot read series manifest {manifestPath}: {err}") from err
    base = manifestPath.parent
    frames = [(frame.time, loadField(base / frame.field, tol)) for frame in manifest.frames]
    rho0 = _readGrid(base / manifest.rho0) if manifest.rho0 is not None else None
    logger.info("loaded %d frames from %s", len(frames), manifestPath)
    return TimeSeries(frames, rho0)


def writeSeries(series: TimeSeries, manifestPath: Union[str, Path]) -> SeriesManifest:
    manifestPath = Path(manifestPath)
    stem = manifestPath.stem
    base = manifestPath.parent
    frames = list[SeriesFrame]()
    for index, (t, field) in enumerate(zip(series.times, series.fields)):
        name = f"{stem}_frame{index:04d}.json"
        writeField(field, base / name)
        frames.append(SeriesFrame(time=float(t), field=name))
    rho0Name = f"{stem}_rho0.csv"
    _writeGrid(base / rho0Name, series.rho0, "rho0")
    manifest = SeriesManifest(frames=frames, rho0=rho0Name)
    manifestPath.write_text(manifest.model_dump_json(indent=2))
    return manifest


def writeCloudCsv(cloud: PointCloud,
                  out: TextIO,
                  tol: ToleranceConfig = DEFAULT_TOLERANCE) -> int:
    """
    Write the cloud with its round, region tag and k. Returns the row count.
    """
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CLOUD_COLUMNS)
    for z, provenance in zip(cloud.points, cloud.provenance):
        tag, k, _, _ = classifyParts(z.rho, z.v, z.m, tol)
        writer.writerow([repr(z.rho),
                         repr(z.v[0]),
                         repr(z.v[1]),
                         repr(z.m[0]),
                         repr(z.m[1]),
                         provenance.roundIndex,
                         tag.value,
                         "" if k is None else repr(k)])
    return cloud.size()


@contextlib.contextmanager
def _openCSV(csvFile: Union[Path, str]):
    """
    Open a CSV file and yield back an iterator over the rows with the
    first row (the header) removed.
    """
    with open(csvFile, newline="") as f:
        reader = csv.reader(f)
        try:
            next(reader) # remove the headers
        except StopIteration as err:
            raise FieldError(f"{csvFile} is empty, expected a header row") from err
        yield reader


def readCloudCsv(csvFile: Union[Path, str]) -> list[CsvCloudRow]:
    toRet = list[CsvCloudRow]()
    try:
        with _openCSV(csvFile) as reader:
            for row in reader:
                rho, v1, v2, m1, m2, roundIndex, tag, k = row
                state = State(rho=float(rho),
                              v=(float(v1), float(v2)),
                              m=(float(m1), float(m2)))
                toRet.append(CsvCloudRow(state=state,
                                         roundIndex=int(roundIndex),
                                         tag=RegionTag(tag),
                                         k=float(k) if k else None))
    except (ValueError, ValidationError) as err:
        raise FieldError(f"malformed cloud CSV {csvFile}: {err}") from err
    return toRet


def cloudFromCsv(csvFile: Union[Path, str]) -> PointCloud:
    """
    Rebuild a cloud from its CSV. Parents and weights are not exported, so
    only the round survives in the provenance.
    """
    rows = readCloudCsv(csvFile)
    return PointCloud(points=[row.state for row in rows],
                      provenance=[Provenance(roundIndex=row.roundIndex) for row in rows])
