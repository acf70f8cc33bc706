"""Room geometry, AP/UE placements, and the transmit-beam codebook."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Convention for a UE exactly below an AP: the true downtilt is 90 degrees,
# which the gain model cannot represent as an offset on an open interval.
VERTICAL_ELEVATION_DEG = 89.999


@dataclass(frozen=True)
class Room:
    """Rectangular indoor area. APs sit on the ceiling, UEs on a common plane."""

    length_m: float
    width_m: float
    height_m: float
    ue_height_m: float = 1.0

    def __post_init__(self) -> None:
        if min(self.length_m, self.width_m, self.height_m) <= 0:
            raise ValueError("room dimensions must be positive")
        if not 0 < self.ue_height_m < self.height_m:
            raise ValueError("ue_height_m must lie strictly between floor and ceiling")

    @property
    def floor_area_m2(self) -> float:
        return self.length_m * self.width_m


@dataclass(frozen=True)
class Beam:
    """One transmit direction: azimuth center and downtilt (positive = downward)."""

    azimuth_center_deg: float
    elevation_center_deg: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "azimuth_center_deg", self.azimuth_center_deg % 360.0)


@dataclass(frozen=True)
class BeamCodebook:
    """Finite set of transmit beams shared by every AP."""

    beams: tuple[Beam, ...]
    az_beamwidth_deg: float
    el_beamwidth_deg: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "beams", tuple(self.beams))
        if len(self.beams) < 1:
            raise ValueError("codebook needs at least one beam")
        for bw in (self.az_beamwidth_deg, self.el_beamwidth_deg):
            if not 0 < bw <= 360:
                raise ValueError("beamwidths must lie in (0, 360]")
        centers = [b.azimuth_center_deg for b in self.beams]
        # Strictly increasing up to a single circular wrap; a uniform layout whose
        # last sector passes 360 still counts as ordered.
        wraps = sum(1 for a, b in zip(centers, centers[1:]) if b <= a)
        if wraps > 1 or (wraps == 1 and len(centers) > 1 and centers[-1] >= centers[0]):
            raise ValueError("beam azimuth centers must be circularly increasing")

    @property
    def n_beams(self) -> int:
        return len(self.beams)


@dataclass(frozen=True)
class Placement:
    """AP and UE coordinates, in meters, as (n, 3) arrays."""

    ap_positions: np.ndarray
    ue_positions: np.ndarray

    def __post_init__(self) -> None:
        aps = np.asarray(self.ap_positions, dtype=float)
        ues = np.asarray(self.ue_positions, dtype=float)
        for name, arr in (("ap_positions", aps), ("ue_positions", ues)):
            if arr.ndim != 2 or arr.shape[1] != 3 or arr.shape[0] < 1:
                raise ValueError(f"{name} must be a non-empty (n, 3) array")
        if ues.shape[0] < aps.shape[0]:
            raise ValueError(
                f"need at least as many UEs as APs (K={ues.shape[0]} < M={aps.shape[0]})"
            )
        aps.setflags(write=False)
        ues.setflags(write=False)
        object.__setattr__(self, "ap_positions", aps)
        object.__setattr__(self, "ue_positions", ues)

    @property
    def n_aps(self) -> int:
        return int(self.ap_positions.shape[0])

    @property
    def n_ues(self) -> int:
        return int(self.ue_positions.shape[0])

    def validate_in(self, room: Room, atol: float = 1e-6) -> None:
        """Check that APs sit on the ceiling, UEs on their plane, all inside the room."""
        bounds = np.array([room.length_m, room.width_m, room.height_m])
        for name, arr in (("AP", self.ap_positions), ("UE", self.ue_positions)):
            if np.any(arr < -atol) or np.any(arr > bounds + atol):
                raise ValueError(f"{name} position outside the room")
        if not np.allclose(self.ap_positions[:, 2], room.height_m, atol=atol):
            raise ValueError("APs must be mounted at ceiling height")
        if not np.allclose(self.ue_positions[:, 2], room.ue_height_m, atol=atol):
            raise ValueError("UEs must sit at ue_height_m")


def departure_angles(ap, ue) -> tuple[float, float, float]:
    """Angles of departure and distance from an AP to a UE.

    Returns (azimuth_deg, elevation_deg, distance_m). Azimuth is measured in the
    horizontal plane from the +x room axis, in [0, 360). Elevation is the downtilt
    from horizontal toward the UE, positive downward, in (-90, 90). A UE exactly
    on the AP's vertical axis gets azimuth 0 and elevation +/-89.999 by convention.
    """
    dx = float(ue[0]) - float(ap[0])
    dy = float(ue[1]) - float(ap[1])
    dz = float(ue[2]) - float(ap[2])
    dist = math.sqrt(dx * dx + dy * dy + dz * dz)
    if dist == 0.0:
        raise ValueError("AP and UE positions coincide")
    horiz = math.hypot(dx, dy)
    if horiz == 0.0:
        el = VERTICAL_ELEVATION_DEG if dz < 0 else -VERTICAL_ELEVATION_DEG
        return 0.0, el, dist
    az = math.degrees(math.atan2(dy, dx)) % 360.0
    el = math.degrees(math.atan2(-dz, horiz))
    return az, el, dist


def uniform_codebook(az_beamwidth_deg: float, downtilt_deg: float = 45.0) -> BeamCodebook:
    """Azimuth-steered codebook: ceil(360/width) sectors at one fixed downtilt.

    Sector b (1-based) is centered at (b - 1) * width + width / 2, so a 30 degree
    codebook has 12 beams at 15, 45, ..., 345 degrees. The elevation beamwidth
    equals the azimuth beamwidth.
    """
    if not 0 < az_beamwidth_deg <= 360:
        raise ValueError("az_beamwidth_deg must lie in (0, 360]")
    n = math.ceil(360.0 / az_beamwidth_deg)
    beams = tuple(
        Beam((b * az_beamwidth_deg + az_beamwidth_deg / 2.0) % 360.0, downtilt_deg)
        for b in range(n)
    )
    return BeamCodebook(beams, az_beamwidth_deg, az_beamwidth_deg)


def drop_ues(room: Room, density_per_m2: float, rng_seed) -> np.ndarray:
    """Drop round(density * floor area) UEs uniformly over the floor rectangle.

    Deterministic for a fixed seed. Accepts anything numpy accepts as seed
    material (int, SeedSequence, Generator).
    """
    if density_per_m2 <= 0:
        raise ValueError("density_per_m2 must be positive")
    k = int(round(density_per_m2 * room.floor_area_m2))
    if k < 1:
        raise ValueError("density too low: no UEs to drop")
    rng = np.random.default_rng(rng_seed)
    xy = rng.uniform(low=[0.0, 0.0], high=[room.length_m, room.width_m], size=(k, 2))
    z = np.full((k, 1), room.ue_height_m)
    return np.hstack([xy, z])


def default_ap_grid(room: Room) -> np.ndarray:
    """Six ceiling APs in a 2 x 3 grid, indexed row-major (x varies fastest).

    Columns sit at 1/6, 1/2, 5/6 of the room length and rows at 1/4, 3/4 of the
    width; for the 20 m x 10 m room that is x in {10/3, 10, 50/3} and y in
    {2.5, 7.5}.
    """
    xs = [room.length_m * f for f in (1.0 / 6.0, 0.5, 5.0 / 6.0)]
    ys = [room.width_m * f for f in (0.25, 0.75)]
    return np.array([[x, y, room.height_m] for y in ys for x in xs])
