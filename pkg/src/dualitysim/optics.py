"""Scalar-field synthesis of the interferometer outputs and camera images.

Geometry and units
------------------
Fields live on a regular pixel grid.  Lengths are measured in units of
the beam waist w: a ``GridSpec`` with ``extent=4`` spans [-4w, 4w] across
its width.  The default camera is 512x512 with the beam centered between
the four central pixels, which keeps the grid exactly fourfold symmetric
about the beam axis.

Mode model
----------
A single-ring vortex mode of charge l is used for the OAM eigenmodes:

    u_l(r, phi) ~ (r/w)^|l| exp(-r^2/w^2) exp(i l phi)

normalized to unit power on the grid.  Opposite charges share the same
intensity ring, so every visibility/predictability result downstream is
independent of this envelope choice.

Interferometer model
--------------------
The upper arm carries amplitude cos(theta/2) of mode +l with vertical
polarization.  The lower arm carries sin(theta/2) of mode -l (the Dove
prism reverses handedness) with polarization cos(alpha/2) H +
sin(alpha/2) V.  The output polarizing beam splitter routes the H and V
components to two camera images.  An optional relative path phase rotates
the petal pattern without changing any power or visibility.

The Dove prism flip may be given a small impurity: a fraction of the
lower-arm amplitude keeps its original handedness and is treated as
incoherent with the flipped light (its intensity adds to the images, it
does not interfere).  This is the documented calibration knob used to
reproduce measured predictability values below 1; the default is 0.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .qubit import StateParams

DEFAULT_OAM = 3
DEFAULT_ANNULUS = (0.5, 2.5)  # radii in beam-waist units enclosing the ring


@dataclass(frozen=True)
class GridSpec:
    """Pixel raster and its mapping to physical beam coordinates.

    ``extent`` is the half-width in beam-waist units.  ``center`` is the
    sub-pixel beam center in pixel coordinates (x, y); the default sits
    midway between the central pixels.  Pixels are square with pitch
    2*extent/width; ``height`` only changes how many rows are rastered.
    """

    width: int = 512
    height: int = 512
    extent: float = 4.0
    center: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        if self.width < 16 or self.height < 16:
            raise ValueError("grid must be at least 16x16 pixels")
        if not (self.extent > 0):
            raise ValueError("extent must be positive")

    @property
    def beam_center(self) -> tuple[float, float]:
        if self.center is not None:
            return self.center
        return ((self.width - 1) / 2.0, (self.height - 1) / 2.0)

    @property
    def pixel_size(self) -> float:
        """Pixel pitch in beam-waist units (square pixels)."""
        return 2.0 * self.extent / self.width

    @property
    def pixel_area(self) -> float:
        return self.pixel_size**2

    def waist_to_pixels(self, radius_w: float) -> float:
        return radius_w / self.pixel_size


@lru_cache(maxsize=8)
def _grid_coords(grid: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    """(X, Y) pixel-center coordinates in waist units, cached per grid."""
    cx, cy = grid.beam_center
    x = (np.arange(grid.width) - cx) * grid.pixel_size
    y = (np.arange(grid.height) - cy) * grid.pixel_size
    return np.meshgrid(x, y)


@dataclass
class FieldImage:
    """Complex scalar field of one polarization component on a grid."""

    data: np.ndarray
    grid: GridSpec
    port: str = ""

    def power(self) -> float:
        """Total power sum |amplitude|^2 * pixel area."""
        return float(np.sum(np.abs(self.data) ** 2) * self.grid.pixel_area)

    def intensity(self) -> np.ndarray:
        return np.abs(self.data) ** 2


@dataclass(frozen=True)
class NoiseModel:
    """Camera model: Poisson shot noise plus Gaussian readout noise.

    ``photon_budget`` is the expected number of detected photons per unit
    of optical power, i.e. a unit-power field integrates to this many
    counts.  ``None`` (or infinity) renders the exact intensity with no
    noise.  ``readout_sigma`` is the standard deviation of the additive
    readout noise in photon counts; negative pixel values are clamped to
    zero.  Identical seed and inputs give bit-identical images.
    """

    photon_budget: float | None = None
    readout_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.photon_budget is not None and not self.photon_budget >= 0:
            raise ValueError("photon_budget must be >= 0")
        if self.readout_sigma < 0:
            raise ValueError("readout_sigma must be >= 0")

    @property
    def noiseless(self) -> bool:
        return self.photon_budget is None or math.isinf(self.photon_budget)


@lru_cache(maxsize=32)
def _mode_data(l: int, grid: GridSpec) -> np.ndarray:
    X, Y = _grid_coords(grid)
    r = np.hypot(X, Y)
    envelope = r ** abs(l) * np.exp(-(r**2)) if l != 0 else np.exp(-(r**2))
    data = envelope * np.exp(1j * l * np.arctan2(Y, X))
    norm = math.sqrt(np.sum(np.abs(data) ** 2) * grid.pixel_area)
    data = data / norm
    data.setflags(write=False)
    return data


def oam_mode(l: int, grid: GridSpec = GridSpec()) -> FieldImage:
    """Unit-power vortex mode of charge ``l`` (Gaussian for l = 0)."""
    return FieldImage(data=_mode_data(int(l), grid).copy(), grid=grid, port="")


@dataclass
class PortSynthesis:
    """Interferometer outputs with per-handedness bookkeeping.

    ``h_main``/``v_main`` are the coherent fields of the two ports; the
    ``*_impurity`` entries hold the unflipped lower-arm light (present
    only for a nonzero impurity) which adds to the images in intensity,
    not amplitude.  The ``*_plus_power``/``*_minus_power`` values give
    the optical power attributable to the +l and -l modes in each port,
    i.e. what an arm-blocking power measurement would record.
    """

    params: StateParams
    l: int
    grid: GridSpec
    flip_impurity: float
    h_main: FieldImage
    v_main: FieldImage
    h_impurity: FieldImage | None = None
    v_impurity: FieldImage | None = None
    h_plus_power: float = 0.0
    h_minus_power: float = 0.0
    v_plus_power: float = 0.0
    v_minus_power: float = 0.0

    @property
    def h_fields(self) -> list[FieldImage]:
        return [self.h_main] + ([self.h_impurity] if self.h_impurity else [])

    @property
    def v_fields(self) -> list[FieldImage]:
        return [self.v_main] + ([self.v_impurity] if self.v_impurity else [])

    def h_attribution_fields(self) -> tuple[list[FieldImage], list[FieldImage]]:
        """H-port field lists attributable to (+l, -l).

        These are the frames an arm-by-arm acquisition would record; the
        -l frame is the flipped lower-arm light, the +l frame the
        handedness impurity (empty for an ideal flip).
        """
        plus = [self.h_impurity] if self.h_impurity else []
        return plus, [self.h_main]


def synthesize_ports(
    params: StateParams,
    l: int = DEFAULT_OAM,
    grid: GridSpec = GridSpec(),
    path_phase: float = 0.0,
    flip_impurity: float = 0.0,
) -> PortSynthesis:
    """Full interferometer synthesis including the impurity bookkeeping."""
    if not 0.0 <= flip_impurity < 1.0:
        raise ValueError("flip_impurity must be in [0, 1)")
    a = math.cos(params.theta / 2)  # upper arm, mode +l, polarization V
    lower = math.sin(params.theta / 2)
    b = lower * math.cos(params.alpha / 2)  # lower arm H component
    c = lower * math.sin(params.alpha / 2)  # lower arm V component
    phase = np.exp(1j * path_phase)
    eps = flip_impurity
    flip = math.sqrt(1.0 - eps**2)

    u_plus = _mode_data(l, grid)
    u_minus = _mode_data(-l, grid)

    out = PortSynthesis(
        params=params,
        l=l,
        grid=grid,
        flip_impurity=eps,
        # H output: lower-arm light only, handedness flipped.
        h_main=FieldImage(b * flip * phase * u_minus, grid, port="H"),
        # V output: upper arm interferes with the flipped lower-arm light.
        v_main=FieldImage(a * u_plus + c * flip * phase * u_minus, grid, port="V"),
    )
    out.h_minus_power = b**2 * flip**2
    out.h_plus_power = b**2 * eps**2
    out.v_plus_power = a**2
    out.v_minus_power = c**2 * flip**2
    if eps > 0.0:
        out.h_impurity = FieldImage(b * eps * u_plus, grid, port="H/impurity")
        out.v_impurity = FieldImage(c * eps * u_plus, grid, port="V/impurity")
        out.v_plus_power = a**2 + c**2 * eps**2
    return out


def simulate_interferometer(
    params: StateParams,
    l: int = DEFAULT_OAM,
    grid: GridSpec = GridSpec(),
    path_phase: float = 0.0,
) -> tuple[FieldImage, FieldImage]:
    """Ideal interferometer: (H-port field, V-port field).

    The two ports carry total power 1; the H port holds the single mode
    -l with power sin^2(theta/2) cos^2(alpha/2), the V port the coherent
    superposition of +l and -l that produces the petal pattern.
    """
    syn = synthesize_ports(params, l=l, grid=grid, path_phase=path_phase)
    return syn.h_main, syn.v_main


def _coherent_groups(fields: list[FieldImage]) -> list[np.ndarray]:
    """Sum amplitudes per port label; distinct labels add in intensity."""
    groups: dict[str, np.ndarray] = {}
    for f in fields:
        if f.port in groups:
            groups[f.port] = groups[f.port] + f.data
        else:
            groups[f.port] = f.data.astype(complex)
    return list(groups.values())


def render_image(
    fields: FieldImage | list[FieldImage],
    noise: NoiseModel = NoiseModel(),
    coherent: bool = True,
) -> np.ndarray:
    """Camera intensity image of one or more fields.

    With ``coherent=True`` (default) all given fields belonging to the
    same port label are summed in amplitude before squaring; fields with
    different labels add in intensity.  With ``coherent=False`` every
    field adds in intensity.

    Noiseless rendering returns the exact summed |amplitude|^2.  With a
    finite photon budget the intensity is scaled to expected counts
    (budget x power), Poisson-sampled per pixel, readout noise is added,
    and the result is clamped at zero.
    """
    if isinstance(fields, FieldImage):
        fields = [fields]
    if not fields:
        raise ValueError("render_image needs at least one field")
    grid = fields[0].grid
    for f in fields:
        if f.grid != grid:
            raise ValueError("all fields must share one GridSpec")

    amplitude_groups = _coherent_groups(fields) if coherent else [f.data for f in fields]
    intensity = np.zeros((grid.height, grid.width), dtype=float)
    for amps in amplitude_groups:
        intensity += np.abs(amps) ** 2

    if noise.noiseless:
        if noise.readout_sigma == 0.0:
            return intensity
        rng = np.random.default_rng(noise.seed)
        noisy = intensity + rng.normal(0.0, noise.readout_sigma, intensity.shape)
        return np.clip(noisy, 0.0, None)

    expected_counts = intensity * grid.pixel_area * noise.photon_budget
    rng = np.random.default_rng(noise.seed)
    counts = rng.poisson(expected_counts).astype(float)
    if noise.readout_sigma > 0.0:
        counts += rng.normal(0.0, noise.readout_sigma, counts.shape)
    return np.clip(counts, 0.0, None)


def calibrated_operating_point(
    v_target: float = 0.93,
    p_target: float = 0.98,
    alpha: float = 0.85 * math.pi,
) -> tuple[StateParams, float]:
    """Preparation angles and flip impurity reproducing measured values.

    This is a calibration choice, not derived physics: the handedness
    impurity eps is set so the H-port mode powers give predictability
    1 - 2 eps^2 = ``p_target``, and theta is solved (at the given alpha,
    taking the faint-H branch) so the V-port fringe visibility
    2 a c sqrt(1 - eps^2) / (a^2 + c^2) equals ``v_target``.
    """
    if not 0.0 < p_target <= 1.0:
        raise ValueError("p_target must be in (0, 1]")
    eps = math.sqrt((1.0 - p_target) / 2.0)
    v_ideal = v_target / math.sqrt(1.0 - eps**2)
    if not 0.0 < v_ideal < 1.0:
        raise ValueError("targets are outside the reachable range")
    s = math.sin(alpha / 2)
    if s <= 0.0:
        raise ValueError("alpha must give a nonzero lower-arm V component")
    # V_ideal = 2 t s / (1 + t^2 s^2) for t = tan(theta/2); smaller root
    # puts most of the light in the V port (faint H output).
    t = (1.0 - math.sqrt(1.0 - v_ideal**2)) / (v_ideal * s)
    theta = 2.0 * math.atan(t)
    return StateParams(theta=theta, alpha=alpha), eps


def write_pfm(path: str | Path, image: np.ndarray) -> None:
    """Grayscale portable float map (PFM, little-endian float32)."""
    image = np.asarray(image, dtype=np.float32)
    if image.ndim != 2:
        raise ValueError("PFM export expects a 2-D image")
    with open(path, "wb") as fh:
        fh.write(b"Pf\n")
        fh.write(f"{image.shape[1]} {image.shape[0]}\n".encode())
        fh.write(b"-1.0\n")  # negative scale marks little-endian data
        fh.write(np.flipud(image).astype("<f4").tobytes())  # rows bottom-up


def write_pgm16(path: str | Path, image: np.ndarray, scale: float | None = None) -> float:
    """16-bit binary PGM raster; returns the counts-per-level scale used.

    ``scale`` maps image values to levels (value/scale -> [0, 65535]);
    by default the image maximum maps to 65535.
    """
    image = np.asarray(image, dtype=float)
    if image.ndim != 2:
        raise ValueError("PGM export expects a 2-D image")
    peak = float(image.max()) if image.size else 0.0
    if scale is None:
        scale = peak / 65535.0 if peak > 0 else 1.0
    levels = np.clip(np.round(image / scale), 0, 65535).astype(">u2")
    with open(path, "wb") as fh:
        fh.write(b"P5\n")
        fh.write(f"{image.shape[1]} {image.shape[0]}\n".encode())
        fh.write(b"65535\n")
        fh.write(levels.tobytes())
    return scale


def write_metadata(
    path: str | Path,
    params: StateParams,
    l: int,
    grid: GridSpec,
    noise: NoiseModel,
    extra: dict | None = None,
) -> None:
    """JSON sidecar describing how the neighbouring images were produced."""
    meta = {
        "theta": params.theta,
        "alpha": params.alpha,
        "oam_charge": l,
        "grid": {
            "width": grid.width,
            "height": grid.height,
            "extent": grid.extent,
            "center": list(grid.beam_center),
        },
        "noise": {
            "photon_budget": noise.photon_budget,
            "readout_sigma": noise.readout_sigma,
            "seed": noise.seed,
        },
    }
    if extra:
        meta.update(extra)
    Path(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
