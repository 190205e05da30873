"""Vector E-field evaluation for impressed currents and Hertzian dipoles.

Implements the closed-form point-source kernels (electric-current kernel
with all reactive terms, magnetic-current curl kernel, and the radiating
1/r dipole approximation), assembles per-source focal channel vectors,
and superposes weighted source fields over evaluation grids.

Sign convention: the electric kernel is oriented so that its far-field
limit reproduces the dipole constant R_e = j*eta0*l*k/(4*pi) exactly,
making the full and approximate kernels phase-compatible.  Amplitudes
are unaffected by this choice.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .geometry import FREE_SPACE_IMPEDANCE, ArrayLayout, SurfaceMesh, Wavelength

FOUR_PI = 4.0 * math.pi

# points per vectorized chunk are sized so the (chunk, N, 3) complex
# intermediate stays around 100 MB even for large meshes
_CHUNK_BUDGET = 2_000_000


@dataclass(frozen=True)
class ComplexField3:
    Ex: complex
    Ey: complex
    Ez: complex

    def as_array(self) -> np.ndarray:
        return np.array([self.Ex, self.Ey, self.Ez], dtype=complex)


@dataclass(frozen=True)
class DipoleConstants:
    """Field constant bundle for a Hertzian dipole of length l."""

    eta0: float
    Re_const: complex  # j * eta0 * l * k / (4*pi)

    @staticmethod
    def for_dipole(length_l: float, wl: Wavelength) -> "DipoleConstants":
        return DipoleConstants(
            eta0=FREE_SPACE_IMPEDANCE,
            Re_const=1j * FREE_SPACE_IMPEDANCE * length_l * wl.k / FOUR_PI)


class ChannelVector:
    """Per-source complex vector field coefficients at one focal point.

    entries[n] is the E-field vector a unit drive of source n produces at
    the focal point.  The scalar channel used by the weight solvers is
    the projection of each entry onto polarization_e.  resistance_scale
    carries the per-port resistance multiplier (patch area over the
    half-wavelength-square reference area for meshes, 1 for dipoles).
    """

    def __init__(self, entries: np.ndarray, focal_point: np.ndarray,
                 polarization_e: np.ndarray, resistance_scale: np.ndarray):
        self.entries = np.asarray(entries, dtype=complex)
        self.focal_point = np.asarray(focal_point, dtype=float)
        self.polarization_e = np.asarray(polarization_e, dtype=float)
        self.resistance_scale = np.asarray(resistance_scale, dtype=float)
        if self.entries.ndim != 2 or self.entries.shape[1] != 3:
            raise ValueError("entries must be (N, 3)")
        if abs(float(np.linalg.norm(self.polarization_e)) - 1.0) > 1e-12:
            raise ValueError("polarization_e must be a unit vector")
        if self.resistance_scale.shape != (self.entries.shape[0],):
            raise ValueError("resistance_scale must have one value per source")
        if np.any(self.resistance_scale <= 0.0):
            raise ValueError("resistance scales must be positive")

    def __len__(self) -> int:
        return self.entries.shape[0]

    def projected(self) -> np.ndarray:
        """Scalar channel: entries projected on the target polarization."""
        return self.entries @ self.polarization_e.astype(complex)


class FieldMap:
    """Sampled complex vector E-field over an evaluation grid."""

    def __init__(self, points: np.ndarray, E: np.ndarray, near_singular: np.ndarray):
        self.points = np.asarray(points, dtype=float)
        self.E = np.asarray(E, dtype=complex)
        self.near_singular = np.asarray(near_singular, dtype=bool)
        if self.E.shape != self.points.shape or self.near_singular.shape != (self.points.shape[0],):
            raise ValueError("inconsistent field map shapes")

    def __len__(self) -> int:
        return self.points.shape[0]

    def component(self, axis: str) -> np.ndarray:
        return self.E[:, "xyz".index(axis)]

    def rows(self):
        for i in range(len(self)):
            p, e = self.points[i], self.E[i]
            yield (p[0], p[1], p[2], e[0].real, e[0].imag,
                   e[1].real, e[1].imag, e[2].real, e[2].imag)


FIELDMAP_CSV_HEADER = ["x", "y", "z", "re_ex", "im_ex", "re_ey", "im_ey",
                       "re_ez", "im_ez"]


# ------------------------------------------------------------ point kernels

def green_electric(r: np.ndarray, r_src: np.ndarray, wl: Wavelength) -> np.ndarray:
    """Electric-current kernel: 3x3 tensor with all 1/R..1/R^3 terms."""
    rv = np.asarray(r, dtype=float) - np.asarray(r_src, dtype=float)
    R = float(np.linalg.norm(rv))
    if R <= 0.0:
        raise ValueError("coincident observation and source points")
    rhat = rv / R
    kR = wl.k * R
    t = 1.0 / kR
    g = np.exp(-1j * kR) / (FOUR_PI * R)
    pref = 1j * wl.k * FREE_SPACE_IMPEDANCE * g
    c_iso = 1.0 - 1j * t - t * t
    c_rad = -1.0 + 3j * t + 3.0 * t * t
    return pref * (c_iso * np.eye(3) + c_rad * np.outer(rhat, rhat))


def green_magnetic(r: np.ndarray, r_src: np.ndarray, wl: Wavelength) -> np.ndarray:
    """Magnetic-current curl kernel: antisymmetric 3x3 tensor."""
    rv = np.asarray(r, dtype=float) - np.asarray(r_src, dtype=float)
    R = float(np.linalg.norm(rv))
    if R <= 0.0:
        raise ValueError("coincident observation and source points")
    rhat = rv / R
    g = np.exp(-1j * wl.k * R) / (FOUR_PI * R)
    s = (1j * wl.k + 1.0 / R) * g
    # cross-product matrix of rhat: G @ v == s * (rhat x v)
    return s * np.array([[0.0, -rhat[2], rhat[1]],
                         [rhat[2], 0.0, -rhat[0]],
                         [-rhat[1], rhat[0], 0.0]], dtype=complex)


def dipole_field_approx(element, drive: complex, r: np.ndarray,
                        wl: Wavelength) -> ComplexField3:
    """Radiating-term dipole field: R_e*I*exp(-jkr)/r * (p - (r.p)r)."""
    rv = np.asarray(r, dtype=float) - np.asarray(element.position, dtype=float)
    R = float(np.linalg.norm(rv))
    if R < 0.25 * wl.lam:
        raise ValueError(
            f"observation point {R} m from the element is inside the "
            f"quarter-wavelength exclusion radius {0.25 * wl.lam} m")
    rhat = rv / R
    p = np.asarray(element.orientation_p, dtype=float)
    re_const = DipoleConstants.for_dipole(element.length_l, wl).Re_const
    vec = (re_const * drive * np.exp(-1j * wl.k * R) / R) * (p - np.dot(rhat, p) * rhat)
    return ComplexField3(Ex=vec[0], Ey=vec[1], Ez=vec[2])


# -------------------------------------------------------- vectorized fields

def _source_arrays(sources, mesh_current: str):
    """Positions, unit-drive moment vectors, and moment magnitudes."""
    if isinstance(sources, ArrayLayout):
        return sources.positions, sources.orientations * sources.length_l
    if isinstance(sources, SurfaceMesh):
        if mesh_current == "z":
            tang = sources.tangents_z
        elif mesh_current == "phi":
            tang = sources.tangents_phi
        else:
            raise ValueError(f"unknown mesh current direction {mesh_current!r}")
        return sources.centroids, tang * sources.areas[:, None]
    raise TypeError(f"unsupported source container {type(sources).__name__}")


def _accumulate(points, src_pos, moments, weights, k, kernel, source_kind):
    """Weighted field sum over sources, chunked over grid points.

    Summation over sources happens in fixed index order per grid point,
    so repeated runs are bit-identical.
    """
    n_src = src_pos.shape[0]
    out = np.zeros((points.shape[0], 3), dtype=complex)
    wm = moments * weights[:, None] if weights is not None else moments
    chunk = max(1, _CHUNK_BUDGET // max(1, n_src))
    for lo in range(0, points.shape[0], chunk):
        pts = points[lo:lo + chunk]
        rv = pts[:, None, :] - src_pos[None, :, :]
        R = np.linalg.norm(rv, axis=2)
        rhat = rv / R[:, :, None]
        g = np.exp(-1j * k * R) / (FOUR_PI * R)
        if source_kind == "electric":
            pref = 1j * k * FREE_SPACE_IMPEDANCE * g
            mdotr = np.einsum("nj,pnj->pn", wm, rhat)
            if kernel == "full":
                t = 1.0 / (k * R)
                c_iso = 1.0 - 1j * t - t * t
                c_rad = -1.0 + 3j * t + 3.0 * t * t
                contrib = pref[:, :, None] * (
                    c_iso[:, :, None] * wm[None, :, :]
                    + (c_rad * mdotr)[:, :, None] * rhat)
            else:
                contrib = pref[:, :, None] * (wm[None, :, :] - mdotr[:, :, None] * rhat)
        else:
            s = (1j * k + 1.0 / R) * g
            cross = np.cross(rhat, wm[None, :, :])
            contrib = s[:, :, None] * cross
        out[lo:lo + chunk] = np.sum(contrib, axis=1)
    return out


def _min_source_distance(points, src_pos):
    n_src = src_pos.shape[0]
    dmin = np.full(points.shape[0], np.inf)
    chunk = max(1, _CHUNK_BUDGET // max(1, n_src))
    for lo in range(0, points.shape[0], chunk):
        d = np.linalg.norm(points[lo:lo + chunk, None, :] - src_pos[None, :, :], axis=2)
        dmin[lo:lo + chunk] = d.min(axis=1)
    return dmin


def assemble_channel(sources, focal: np.ndarray, e_hat: np.ndarray, wl: Wavelength,
                     kernel: str = "full", source_kind: str = "electric",
                     mesh_current: str = "z") -> ChannelVector:
    """Per-source field vectors at the focal point for unit drives.

    Unit drive means 1 A for a dipole element and a unit surface-current
    density (1 A/m times the patch area) for a mesh patch.  The focal
    point must keep the quarter-wavelength standoff from every source
    and sit inside the aperture's bounding region.
    """
    if kernel not in ("full", "dipole-approx"):
        raise ValueError(f"unknown kernel {kernel!r}")
    if source_kind not in ("electric", "magnetic"):
        raise ValueError(f"unknown source kind {source_kind!r}")
    if kernel == "dipole-approx" and source_kind == "magnetic":
        raise ValueError("the dipole approximation applies to electric sources only")
    focal = np.asarray(focal, dtype=float)
    e_hat = np.asarray(e_hat, dtype=float)
    src_pos, moments = _source_arrays(sources, mesh_current)

    lo, hi = src_pos.min(axis=0), src_pos.max(axis=0)
    if np.any(focal < lo - 1e-12) or np.any(focal > hi + 1e-12):
        raise ValueError("focal point lies outside the aperture region")
    dmin = float(_min_source_distance(focal[None, :], src_pos)[0])
    if dmin < 0.25 * wl.lam:
        raise ValueError(
            f"focal point is {dmin} m from the nearest source, inside the "
            f"quarter-wavelength standoff {0.25 * wl.lam} m")

    n = src_pos.shape[0]
    entries = np.empty((n, 3), dtype=complex)
    # one source per evaluation: reuse the chunked path with roles swapped
    for start in range(0, n, 200000):
        stop = min(n, start + 200000)
        rv = focal[None, :] - src_pos[start:stop]
        R = np.linalg.norm(rv, axis=1)
        rhat = rv / R[:, None]
        g = np.exp(-1j * wl.k * R) / (FOUR_PI * R)
        m = moments[start:stop]
        if source_kind == "electric":
            pref = 1j * wl.k * FREE_SPACE_IMPEDANCE * g
            mdotr = np.einsum("nj,nj->n", m, rhat)
            if kernel == "full":
                t = 1.0 / (wl.k * R)
                c_iso = 1.0 - 1j * t - t * t
                c_rad = -1.0 + 3j * t + 3.0 * t * t
                entries[start:stop] = pref[:, None] * (
                    c_iso[:, None] * m + (c_rad * mdotr)[:, None] * rhat)
            else:
                entries[start:stop] = pref[:, None] * (m - mdotr[:, None] * rhat)
        else:
            s = (1j * wl.k + 1.0 / R) * g
            entries[start:stop] = s[:, None] * np.cross(rhat, m)

    if isinstance(sources, SurfaceMesh):
        a_ref = (0.5 * wl.lam) ** 2
        resistance_scale = sources.areas / a_ref
    else:
        resistance_scale = np.ones(n)
    return ChannelVector(entries, focal, e_hat, resistance_scale)


def evaluate_field(sources, weights, grid: np.ndarray, wl: Wavelength,
                   kernel: str = "full", source_kind: str = "electric",
                   mesh_current: str = "z", threads: int = 1) -> FieldMap:
    """Superpose weighted per-source fields over a grid of points.

    The approximate kernel refuses points inside the quarter-wavelength
    standoff; the full kernel evaluates them (it is finite anywhere off
    the source) but flags them near_singular.
    """
    if kernel not in ("full", "dipole-approx"):
        raise ValueError(f"unknown kernel {kernel!r}")
    if source_kind not in ("electric", "magnetic"):
        raise ValueError(f"unknown source kind {source_kind!r}")
    if kernel == "dipole-approx" and source_kind == "magnetic":
        raise ValueError("the dipole approximation applies to electric sources only")
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    src_pos, moments = _source_arrays(sources, mesh_current)
    w = np.asarray(getattr(weights, "w", weights), dtype=complex)
    if w.shape != (src_pos.shape[0],):
        raise ValueError("need one weight per source")

    dmin = _min_source_distance(grid, src_pos)
    if np.any(dmin <= 0.0):
        raise ValueError("grid point coincides with a source")
    standoff = 0.25 * wl.lam
    if kernel == "dipole-approx" and np.any(dmin < standoff):
        raise ValueError("grid violates the quarter-wavelength standoff")
    near_singular = dmin < standoff

    if threads <= 1 or grid.shape[0] < 4:
        E = _accumulate(grid, src_pos, moments, w, wl.k, kernel, source_kind)
    else:
        E = np.zeros((grid.shape[0], 3), dtype=complex)
        bounds = np.linspace(0, grid.shape[0], threads + 1).astype(int)
        def work(i):
            lo, hi = bounds[i], bounds[i + 1]
            if hi > lo:
                E[lo:hi] = _accumulate(grid[lo:hi], src_pos, moments, w,
                                       wl.k, kernel, source_kind)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, range(threads)))
    return FieldMap(grid, E, near_singular)
