"""First-order terrain derivatives: slope and aspect via Horn's 3x3 kernel.

With the window labelled a..i from NW to SE (row 0 = north),

    dz/dx = ((c + 2f + i) - (a + 2d + g)) / (8 * cellsize)
    dz/dy = ((g + 2h + i) - (a + 2b + c)) / (8 * cellsize)

so dz/dy is positive toward the south, matching the GIS convention the
aspect formula below expects. Slope is atan(zf * hypot(dz/dx, dz/dy)) in
degrees; aspect is atan2(dz/dy, -dz/dx) remapped to compass degrees
(clockwise from north), with -1 marking flat cells. Off-grid or nodata
neighbours take the window's centre value, so edge cells still get
values; cells whose centre is nodata stay nodata.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .raster import Grid

FLAT_ASPECT = -1.0


@dataclass(frozen=True)
class DerivativePair:
    """Slope (degrees, [0, 90]) and aspect (degrees, [0, 360) or -1 flat)."""

    slope: Grid
    aspect: Grid


def slope_aspect(dem: Grid, z_factor: float = 1.0) -> DerivativePair:
    """Slope and aspect grids of a DEM.

    ``z_factor`` converts vertical units to the horizontal units before
    the slope angle is taken (1 when both are metres).
    """
    if z_factor <= 0:
        raise ValueError("z_factor must be positive")
    vals = np.array(dem.values, dtype=np.float64)
    invalid = vals == dem.nodata
    work = np.where(invalid, np.nan, vals)
    padded = np.pad(work, 1, mode="constant", constant_values=np.nan)

    def neighbour(dr: int, dc: int) -> np.ndarray:
        nb = padded[1 + dr : 1 + dr + dem.nrows, 1 + dc : 1 + dc + dem.ncols]
        return np.where(np.isnan(nb), work, nb)

    a = neighbour(-1, -1)
    b = neighbour(-1, 0)
    c = neighbour(-1, 1)
    d = neighbour(0, -1)
    f = neighbour(0, 1)
    g = neighbour(1, -1)
    h = neighbour(1, 0)
    i = neighbour(1, 1)

    dzdx = ((c + 2.0 * f + i) - (a + 2.0 * d + g)) / (8.0 * dem.cellsize)
    dzdy = ((g + 2.0 * h + i) - (a + 2.0 * b + c)) / (8.0 * dem.cellsize)

    slope_deg = np.degrees(np.arctan(z_factor * np.hypot(dzdx, dzdy)))
    aspect_deg = np.mod(90.0 - np.degrees(np.arctan2(dzdy, -dzdx)), 360.0)
    flat = (dzdx == 0.0) & (dzdy == 0.0)
    aspect_deg = np.where(flat, FLAT_ASPECT, aspect_deg)

    slope_deg = np.where(invalid, dem.nodata, slope_deg)
    aspect_deg = np.where(invalid, dem.nodata, aspect_deg)

    def like_dem(v: np.ndarray) -> Grid:
        return Grid(
            ncols=dem.ncols,
            nrows=dem.nrows,
            xll=dem.xll,
            yll=dem.yll,
            cellsize=dem.cellsize,
            nodata=dem.nodata,
            values=v,
        )

    return DerivativePair(slope=like_dem(slope_deg), aspect=like_dem(aspect_deg))
