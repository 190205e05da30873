"""Scenario-driven command line front end.

A scenario is one flat JSON document whose keys carry their units
(radius_m, frequency_hz, amplitude_cap_a); nothing is inferred from
bare numbers.  Subcommands: run (weights, fields, metrics), validate
(numeric against a named closed-form reference), analytic (closed-form
curve only), layout (geometry only).  One scenario per process.

Every artifact lands in the output directory: CSV files are written
with 17 significant digits and '\\n' line endings so reruns of the same
scenario are byte-identical, and manifest.json records the fully
resolved scenario (defaults included), the conventions the numbers rest
on, tool version, seed, and wall-clock time.

Exit codes: 0 success (for validate: comparison passed), 1 validate
comparison failed, 2 usage or scenario errors.  Errors print one
machine-readable JSON object to stdout.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, analytic
from .csvio import write_csv
from .fields import (
    FIELDMAP_CSV_HEADER,
    ChannelVector,
    assemble_channel,
    evaluate_field,
    green_electric,
    green_magnetic,
)
from .focusing import (
    WEIGHTS_CSV_HEADER,
    PowerConstraints,
    cp_weights,
    hybrid_weights,
    tr_weights,
    weights_rows,
    weights_sidecar,
)
from .geometry import (
    ArrayLayout,
    CylinderSpec,
    RectCorridorSpec,
    SurfaceMesh,
    Wavelength,
    build_cylinder_mesh,
    build_rect_corridor_mesh,
    build_ring_array,
    layout_rows,
    mesh_rows,
)
from .metrics import contour_3db, cut_metrics, metrics_flat_dict

__all__ = ["main", "load_scenario", "ScenarioError"]

LAYOUT_CSV_HEADER = ["x", "y", "z", "px", "py", "pz", "length_m"]
MESH_CSV_HEADER = ["x", "y", "z", "tphi_x", "tphi_y", "tphi_z",
                   "tz_x", "tz_y", "tz_z", "area_m2"]
CUT_CSV_HEADER = ["offset_m"] + FIELDMAP_CSV_HEADER

PROFILE_REFERENCES = ("ez_long", "ez_trans", "ex_long", "ex_trans_x", "ex_trans_y")
RATIO_REFERENCES = ("ratio_cp", "ratio_tr")

# axis the cut runs along, field component, and drive polarization per reference
_REFERENCE_GEOMETRY = {
    "ez_long": ("z", "z"), "ez_trans": ("x", "z"), "ex_long": ("z", "x"),
    "ex_trans_x": ("x", "x"), "ex_trans_y": ("y", "x"),
}

_AXIS_UNIT = {
    "x": np.array([1.0, 0.0, 0.0]),
    "y": np.array([0.0, 1.0, 0.0]),
    "z": np.array([0.0, 0.0, 1.0]),
}

# conventions behind the emitted numbers, recorded in every manifest
RESOLVED_CONVENTIONS = {
    "transverse_tr_x_asymptote": "41*pi^2/128",
    "transverse_tr_x_asymptote_value": analytic.TRANSVERSE_TR_X_LIMIT,
    "transverse_tr_x_rejected_alternate": "41*pi^2/108",
    "transverse_tr_x_rejected_value": analytic.TRANSVERSE_TR_X_LIMIT_ALTERNATE,
    "transverse_tr_x_resolution": "settled by quadrature of the transverse"
                                  " co-polarized kernel in the long-cylinder limit",
    "co_cross_ratio_cp": "field-amplitude ratio at equal per-element drive caps",
    "co_cross_ratio_tr": "focal-intensity ratio at equal total power budgets",
    "mesh_port_resistance": "base resistance scaled by patch area over (wavelength/2)^2",
    "green_electric_prefactor": "+1j*k*eta0*exp(-1j*k*R)/(4*pi*R)",
    "metrics_cut_spacing_cap": "wavelength/64 (stricter than the wavelength/16 grid floor)",
    "csv_number_format": "17 significant digits, '.' decimal, LF line endings",
}


class ScenarioError(Exception):
    """Scenario or usage problem, reported as machine-readable JSON."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


def _invalid(message: str) -> ScenarioError:
    return ScenarioError("scenario-invalid", message)


# ---------------------------------------------------------------------------
# scenario schema

_ENUMS = {
    "geometry": ("cylinder", "rectangle"),
    "source_kind": ("electric", "magnetic"),
    "element_polarization": ("axial", "azimuthal"),
    "aperture": ("discrete", "mesh", "single"),
    "target_polarization": ("x", "y", "z"),
    "method": ("cp", "tr", "hybrid"),
    "kernel": ("full", "dipole-approx"),
    "grid": ("cut", "plane"),
    "cut_axis": ("x", "y", "z"),
    "plane_axes": ("xy", "xz", "yz"),
    "analytic_reference": ("none",) + PROFILE_REFERENCES + RATIO_REFERENCES,
}

# key -> (kind, default); AUTO defaults are resolved against the wavelength
AUTO = object()
_SCHEMA = {
    "geometry": ("enum", None),             # required
    "radius_m": ("pos", None),              # cylinder
    "length_m": ("pos", None),              # required
    "width_m": ("pos", None),               # rectangle
    "height_m": ("pos", None),              # rectangle
    "frequency_hz": ("pos", None),          # required
    "source_kind": ("enum", "electric"),
    "element_polarization": ("enum", "axial"),
    "aperture": ("enum", "discrete"),
    "dipole_length_m": ("pos", AUTO),       # discrete/single
    "mesh_axial_n": ("count", AUTO),        # cylinder mesh
    "mesh_azimuthal_n": ("count", AUTO),    # cylinder mesh
    "patch_target_m": ("pos", AUTO),        # rectangle mesh
    "focus_x_m": ("num", 0.0),
    "focus_y_m": ("num", 0.0),
    "focus_z_m": ("num", 0.0),
    "target_polarization": ("enum", "z"),
    "method": ("enum", "cp"),
    "amplitude_cap_a": ("pos", 0.02),
    "power_budget_w": ("pos", 1.0),
    "port_resistance_ohm": ("pos", 50.0),
    "bisection_tol_w": ("pos", AUTO),
    "kernel": ("enum", "full"),
    "grid": ("enum", "cut"),
    "cut_axis": ("enum", "x"),
    "cut_half_span_m": ("pos", AUTO),
    "cut_step_m": ("pos", AUTO),
    "plane_axes": ("enum", "yz"),
    "plane_half_span_a_m": ("pos", AUTO),
    "plane_half_span_b_m": ("pos", AUTO),
    "plane_step_m": ("pos", AUTO),
    "analytic_reference": ("enum", "none"),
    "tolerance_rel": ("nonneg", 0.02),
}

_REQUIRED = ("geometry", "length_m", "frequency_hz")

# keys meaningful only under a particular setting: key -> (setting key, values)
_CONDITIONAL = {
    "radius_m": ("geometry", ("cylinder",)),
    "width_m": ("geometry", ("rectangle",)),
    "height_m": ("geometry", ("rectangle",)),
    "dipole_length_m": ("aperture", ("discrete", "single")),
    "mesh_axial_n": ("aperture", ("mesh",)),
    "mesh_azimuthal_n": ("aperture", ("mesh",)),
    "patch_target_m": ("geometry", ("rectangle",)),
}


def _check_value(key: str, kind: str, value):
    if kind == "enum":
        if not isinstance(value, str) or value not in _ENUMS[key]:
            raise _invalid(f"{key} must be one of {list(_ENUMS[key])}, got {value!r}")
        return value
    if kind == "count":
        if not isinstance(value, int) or isinstance(value, bool) or value <= 0:
            raise _invalid(f"{key} must be a positive integer, got {value!r}")
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise _invalid(f"{key} must be a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise _invalid(f"{key} must be finite, got {value!r}")
    if kind == "pos" and value <= 0.0:
        raise _invalid(f"{key} must be positive, got {value!r}")
    if kind == "nonneg" and value < 0.0:
        raise _invalid(f"{key} must be non-negative, got {value!r}")
    return value


def load_scenario(path) -> tuple[dict, list[str]]:
    """Parse, validate, and resolve a scenario file.

    Returns the fully resolved scenario dictionary (every key explicit)
    and the sorted list of keys the tool filled with defaults.
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            raw = json.load(f)
    except OSError as e:
        raise ScenarioError("scenario-unreadable", f"cannot read scenario file: {e}")
    except json.JSONDecodeError as e:
        raise ScenarioError("scenario-unreadable", f"scenario is not valid JSON: {e}")
    if not isinstance(raw, dict):
        raise _invalid("scenario must be a JSON object")

    unknown = sorted(set(raw) - set(_SCHEMA))
    if unknown:
        raise _invalid(f"unknown scenario keys: {unknown}")
    missing = [k for k in _REQUIRED if k not in raw]
    if missing:
        raise _invalid(f"missing required scenario keys: {missing}")

    s: dict = {}
    filled: list[str] = []
    for key, (kind, default) in _SCHEMA.items():
        if key in raw:
            s[key] = _check_value(key, kind, raw[key])
        else:
            s[key] = default
            filled.append(key)

    for key, (cond_key, allowed) in _CONDITIONAL.items():
        applies = s[cond_key] in allowed
        if key in raw and not applies:
            raise _invalid(
                f"{key} applies only when {cond_key} is one of {list(allowed)}")
        if not applies:
            s[key] = None

    if s["geometry"] == "cylinder":
        if s["radius_m"] is None:
            raise _invalid("cylinder geometry requires radius_m")
    else:
        for key in ("width_m", "height_m"):
            if s[key] is None:
                raise _invalid("rectangle geometry requires width_m and height_m")
        if s["width_m"] < s["height_m"]:
            raise _invalid("width_m must be at least height_m")
        if s["aperture"] != "mesh":
            raise _invalid("rectangle geometry supports the mesh aperture only")
        for key in ("mesh_axial_n", "mesh_azimuthal_n"):
            if key in raw:
                raise _invalid(f"{key} applies to cylinder meshes only; "
                               "rectangle meshes take patch_target_m")
            s[key] = None
    if s["aperture"] == "single" and s["geometry"] != "cylinder":
        raise _invalid("the single-element aperture requires cylinder geometry")
    if s["kernel"] == "dipole-approx" and s["source_kind"] == "magnetic":
        raise _invalid("the dipole approximation applies to electric sources only")

    wl = Wavelength.from_frequency(s["frequency_hz"])
    half_lam = 0.5 * wl.lam
    autos = {
        "dipole_length_m": wl.lam / 100.0,
        "mesh_axial_n": max(2, math.ceil(s["length_m"] / half_lam)),
        "mesh_azimuthal_n": (max(3, math.ceil(2.0 * math.pi * s["radius_m"] / half_lam))
                             if s["radius_m"] is not None else None),
        "patch_target_m": 0.25 * wl.lam,
        "bisection_tol_w": 1e-10 * s["power_budget_w"],
        "cut_half_span_m": 1.1 * wl.lam,
        "cut_step_m": wl.lam / 64.0,
        "plane_half_span_a_m": 0.45 * wl.lam,
        "plane_half_span_b_m": 0.45 * wl.lam,
        "plane_step_m": wl.lam / 64.0,
    }
    for key, value in autos.items():
        if s.get(key) is AUTO:
            s[key] = value

    fx, fy, fz = s["focus_x_m"], s["focus_y_m"], s["focus_z_m"]
    if abs(fz) >= 0.5 * s["length_m"]:
        raise _invalid("focal point lies outside the geometry along z")
    if s["geometry"] == "cylinder":
        if math.hypot(fx, fy) >= s["radius_m"]:
            raise _invalid("focal point lies outside the cylinder")
    else:
        if abs(fx) >= 0.5 * s["width_m"] or abs(fy) >= 0.5 * s["height_m"]:
            raise _invalid("focal point lies outside the rectangle cross-section")

    step_cap = wl.lam / 16.0
    for key in ("cut_step_m", "plane_step_m"):
        if s[key] > step_cap * (1.0 + 1e-9):
            raise _invalid(f"{key} exceeds wavelength/16 = {step_cap}")

    return s, sorted(filled)


# ---------------------------------------------------------------------------
# builders shared by the subcommands

def _wavelength(s: dict) -> Wavelength:
    return Wavelength.from_frequency(s["frequency_hz"])


def _geometry_spec(s: dict):
    if s["geometry"] == "cylinder":
        return CylinderSpec(radius_a=s["radius_m"], length_L=s["length_m"])
    return RectCorridorSpec(width_La=s["width_m"], height_Lb=s["height_m"],
                            length_L=s["length_m"])


def _single_layout(s: dict, wl: Wavelength) -> ArrayLayout:
    position = np.array([[s["radius_m"], 0.0, 0.0]])
    if s["element_polarization"] == "axial":
        orientation = np.array([[0.0, 0.0, 1.0]])
    else:
        orientation = np.array([[0.0, 1.0, 0.0]])
    return ArrayLayout(position, orientation, rings=1, per_ring=1,
                       spacing_d=0.5 * wl.lam, length_l=s["dipole_length_m"])


def _aperture(s: dict, wl: Wavelength):
    spec = _geometry_spec(s)
    if s["aperture"] == "single":
        return _single_layout(s, wl)
    if s["aperture"] == "discrete":
        return build_ring_array(spec, wl, polarization=s["element_polarization"],
                                dipole_length=s["dipole_length_m"])
    if s["geometry"] == "cylinder":
        return build_cylinder_mesh(spec, s["mesh_axial_n"], s["mesh_azimuthal_n"])
    return build_rect_corridor_mesh(spec, s["patch_target_m"], wl)


def _mesh_current(s: dict) -> str:
    return "z" if s["element_polarization"] == "axial" else "phi"


def _focus(s: dict) -> np.ndarray:
    return np.array([s["focus_x_m"], s["focus_y_m"], s["focus_z_m"]])


def _channel(s: dict, sources, e_hat: np.ndarray, wl: Wavelength) -> ChannelVector:
    focal = _focus(s)
    if isinstance(sources, ArrayLayout) and len(sources) == 1:
        # the general assembler requires the focus inside the source hull,
        # which a one-element aperture cannot provide
        position = sources.positions[0]
        distance = float(np.linalg.norm(focal - position))
        if distance < 0.25 * wl.lam:
            raise _invalid("focal point is inside the quarter-wavelength standoff "
                           "of the single element")
        moment = sources.orientations[0] * sources.length_l
        green = green_electric if s["source_kind"] == "electric" else green_magnetic
        entries = (green(focal, position, wl) @ moment.astype(complex)).reshape(1, 3)
        return ChannelVector(entries, focal, e_hat, np.ones(1))
    return assemble_channel(sources, focal, e_hat, wl, kernel=s["kernel"],
                            source_kind=s["source_kind"],
                            mesh_current=_mesh_current(s))


def _constraints(s: dict) -> PowerConstraints:
    return PowerConstraints(w_max=s["amplitude_cap_a"], P0=s["power_budget_w"],
                            R0_per_port=s["port_resistance_ohm"])


def _solve_weights(s: dict, h: ChannelVector):
    pc = _constraints(s)
    if s["method"] == "cp":
        return cp_weights(h, pc)
    if s["method"] == "tr":
        return tr_weights(h, pc)
    return hybrid_weights(h, pc, tol=s["bisection_tol_w"])


def _cut_offsets(s: dict) -> np.ndarray:
    step = s["cut_step_m"]
    n = max(1, int(round(s["cut_half_span_m"] / step)))
    return np.arange(-n, n + 1) * step


def _cut_points(s: dict, axis: str, offsets: np.ndarray) -> np.ndarray:
    return _focus(s)[None, :] + offsets[:, None] * _AXIS_UNIT[axis][None, :]


def _plane_grid(s: dict):
    step = s["plane_step_m"]
    na = max(1, int(round(s["plane_half_span_a_m"] / step)))
    nb = max(1, int(round(s["plane_half_span_b_m"] / step)))
    ua = np.arange(-na, na + 1) * step
    vb = np.arange(-nb, nb + 1) * step
    ax_a, ax_b = s["plane_axes"]
    U, V = np.meshgrid(ua, vb, indexing="ij")
    points = (_focus(s)[None, :]
              + U.reshape(-1, 1) * _AXIS_UNIT[ax_a][None, :]
              + V.reshape(-1, 1) * _AXIS_UNIT[ax_b][None, :])
    return points, (ua.size, vb.size)


def _evaluate(s: dict, sources, weights, points: np.ndarray, wl: Wavelength,
              threads: int):
    return evaluate_field(sources, weights, points, wl, kernel=s["kernel"],
                          source_kind=s["source_kind"],
                          mesh_current=_mesh_current(s), threads=threads)


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w", encoding="ascii", newline="") as f:
        json.dump(payload, f, sort_keys=True, indent=2)
        f.write("\n")


# ---------------------------------------------------------------------------
# subcommands

def _cmd_run(s: dict, outdir: Path, wl: Wavelength, threads: int) -> tuple[list, int]:
    sources = _aperture(s, wl)
    h = _channel(s, sources, _AXIS_UNIT[s["target_polarization"]], wl)
    weights, report = _solve_weights(s, h)

    write_csv(outdir / "weights.csv", WEIGHTS_CSV_HEADER, weights_rows(weights))
    sidecar = weights_sidecar(weights, report)
    sidecar["n_sources"] = len(weights.w)
    sidecar["method"] = s["method"]
    _write_json(outdir / "weights.json", sidecar)
    artifacts = ["weights.csv", "weights.json"]

    metrics_payload: dict = {"component": s["target_polarization"],
                             "wavelength_m": wl.lam}
    if s["grid"] == "cut":
        offsets = _cut_offsets(s)
        fm = _evaluate(s, sources, weights, _cut_points(s, s["cut_axis"], offsets),
                       wl, threads)
        write_csv(outdir / "cut.csv", CUT_CSV_HEADER,
                  ((offsets[i], *row) for i, row in enumerate(fm.rows())))
        artifacts.append("cut.csv")
        metrics_payload["kind"] = "cut"
        metrics_payload["axis"] = s["cut_axis"]
        if s["cut_step_m"] <= wl.lam / 64.0 * (1.0 + 1e-9):
            values = np.abs(fm.component(s["target_polarization"]))
            try:
                m = cut_metrics((offsets, values), wl.lam)
                metrics_payload["metrics"] = metrics_flat_dict(m, wl.lam)
            except ValueError as e:
                metrics_payload["skipped_reason"] = str(e)
        else:
            metrics_payload["skipped_reason"] = \
                "cut step exceeds wavelength/64; metrics need the finer grid"
    else:
        points, shape = _plane_grid(s)
        fm = _evaluate(s, sources, weights, points, wl, threads)
        write_csv(outdir / "fieldmap.csv", FIELDMAP_CSV_HEADER, fm.rows())
        artifacts.append("fieldmap.csv")
        metrics_payload["kind"] = "plane"
        metrics_payload["plane_axes"] = s["plane_axes"]
        metrics_payload["peak"] = float(np.abs(fm.component(s["target_polarization"])).max())
        try:
            poly = contour_3db(fm, s["target_polarization"], shape)
            metrics_payload["contour_3db"] = {
                "n_points": int(len(poly)),
                "extent_a_m": float(poly[:, 0].max() - poly[:, 0].min()),
                "extent_b_m": float(poly[:, 1].max() - poly[:, 1].min()),
            }
        except ValueError as e:
            metrics_payload["contour_skipped"] = str(e)

    _write_json(outdir / "metrics.json", metrics_payload)
    artifacts.append("metrics.json")
    return artifacts, 0


def _normalized(values: np.ndarray) -> np.ndarray:
    peak = float(np.max(values))
    if peak <= 0.0:
        raise ScenarioError("run-failed", "field cut is identically zero")
    return values / peak


def _main_lobe_window(values: np.ndarray) -> tuple[int, int]:
    i = int(np.argmax(values))
    minima = [j for j in range(1, len(values) - 1)
              if values[j] <= values[j - 1] and values[j] <= values[j + 1]]
    lo = max((j for j in minima if j < i), default=0)
    hi = min((j for j in minima if j > i), default=len(values) - 1)
    return lo, hi


def _metrics_or_none(offsets: np.ndarray, values: np.ndarray, lam: float):
    try:
        return metrics_flat_dict(cut_metrics((offsets, values), lam), lam)
    except ValueError:
        return None


def _delta(numeric, ana, key: str):
    if numeric is None or ana is None:
        return None
    a, b = numeric.get(key), ana.get(key)
    if a is None or b is None:
        return None
    return a - b


def _cmd_validate_profile(s: dict, outdir: Path, wl: Wavelength,
                          threads: int) -> tuple[list, int, dict]:
    kind = s["analytic_reference"]
    if s["geometry"] != "cylinder":
        raise _invalid(f"analytic reference {kind} requires cylinder geometry")
    if s["element_polarization"] != "axial":
        raise _invalid(f"analytic reference {kind} requires axial element polarization")
    if s["method"] != "cp":
        raise _invalid(f"analytic reference {kind} is a conjugate-phase shape; "
                       "set method to cp")
    axis, component = _REFERENCE_GEOMETRY[kind]
    spec = _geometry_spec(s)

    sources = _aperture(s, wl)
    h = _channel(s, sources, _AXIS_UNIT[component], wl)
    weights, _ = _solve_weights(s, h)
    offsets = _cut_offsets(s)
    fm = _evaluate(s, sources, weights, _cut_points(s, axis, offsets), wl, threads)
    numeric = np.abs(fm.component(component))
    ana = np.array([analytic.resolution_profiles(kind, abs(d) / wl.lam, spec)
                    for d in offsets])

    write_csv(outdir / "cut.csv", CUT_CSV_HEADER,
              ((offsets[i], *row) for i, row in enumerate(fm.rows())))
    curve = analytic.AxisProfile(axis=axis, offsets_m=offsets, values=ana,
                                 normalization="closed-form reference, "
                                               "see module analytic")
    write_csv(outdir / "curve.csv", list(analytic.PROFILE_CSV_HEADER),
              analytic.profile_rows(curve, wl.lam))

    num_n, ana_n = _normalized(numeric), _normalized(ana)
    lo, hi = _main_lobe_window(num_n)
    linf = float(np.max(np.abs(num_n[lo:hi + 1] - ana_n[lo:hi + 1])))
    num_metrics = _metrics_or_none(offsets, numeric, wl.lam)
    ana_metrics = _metrics_or_none(offsets, ana, wl.lam)
    passed = linf <= s["tolerance_rel"]
    report = {
        "kind": "profile",
        "reference": kind,
        "component": component,
        "axis": axis,
        "wavelength_m": wl.lam,
        "n_samples": int(offsets.size),
        "main_lobe_window_m": [float(offsets[lo]), float(offsets[hi])],
        "main_lobe_linf_rel": linf,
        "numeric_metrics": num_metrics,
        "analytic_metrics": ana_metrics,
        "metric_deltas": {
            key: _delta(num_metrics, ana_metrics, key)
            for key in ("width_3db_lambda", "first_null_lambda", "sidelobe_ratio")
        },
        "tolerance_rel": s["tolerance_rel"],
        "passed": passed,
    }
    return ["cut.csv", "curve.csv"], (0 if passed else 1), report


def _cmd_validate_ratio(s: dict, wl: Wavelength) -> tuple[list, int, dict]:
    kind = s["analytic_reference"]
    if s["geometry"] != "cylinder":
        raise _invalid(f"analytic reference {kind} requires cylinder geometry")
    if s["element_polarization"] != "axial":
        raise _invalid(f"analytic reference {kind} requires axial element polarization")
    if s["focus_x_m"] != 0.0 or s["focus_y_m"] != 0.0:
        raise _invalid(f"analytic reference {kind} requires an on-axis focal point")
    method = kind.split("_")[1]
    if s["method"] != method:
        raise _invalid(f"analytic reference {kind} requires method {method}")
    spec = _geometry_spec(s)
    zf = s["focus_z_m"]

    sources = _aperture(s, wl)
    pc = _constraints(s)
    solver = cp_weights if method == "cp" else tr_weights
    _, rep_co = solver(_channel(s, sources, _AXIS_UNIT["z"], wl), pc)
    _, rep_cross = solver(_channel(s, sources, _AXIS_UNIT["x"], wl), pc)
    if method == "cp":
        numeric = abs(rep_co.E_focus) / abs(rep_cross.E_focus)
        reference = analytic.ez_cp_axis(zf, spec) / analytic.ex_cp_axis(zf, spec)
        constant = analytic.CP_FIELD_RATIO_LIMIT
        definition = RESOLVED_CONVENTIONS["co_cross_ratio_cp"]
    else:
        numeric = abs(rep_co.E_focus) ** 2 / abs(rep_cross.E_focus) ** 2
        reference = analytic.ez_tr_axis(zf, spec) / analytic.ex_tr_axis(zf, spec)
        constant = analytic.TR_FIELD_RATIO_LIMIT
        definition = RESOLVED_CONVENTIONS["co_cross_ratio_tr"]
    deviation = abs(numeric / reference - 1.0)
    passed = deviation <= s["tolerance_rel"]
    report = {
        "kind": "ratio",
        "reference": kind,
        "definition": definition,
        "numeric_ratio": float(numeric),
        "analytic_ratio": float(reference),
        "asymptotic_constant": constant,
        "deviation_rel": float(deviation),
        "deviation_vs_constant_rel": float(abs(numeric / constant - 1.0)),
        "active_constraints": [rep_co.active_constraint, rep_cross.active_constraint],
        "tolerance_rel": s["tolerance_rel"],
        "passed": passed,
    }
    return [], (0 if passed else 1), report


def _cmd_analytic(s: dict, outdir: Path, wl: Wavelength) -> tuple[list, int]:
    kind = s["analytic_reference"]
    if kind not in PROFILE_REFERENCES:
        raise _invalid("the analytic subcommand needs analytic_reference set to "
                       f"one of {list(PROFILE_REFERENCES)}")
    if s["geometry"] != "cylinder":
        raise _invalid(f"analytic reference {kind} requires cylinder geometry")
    axis, _ = _REFERENCE_GEOMETRY[kind]
    spec = _geometry_spec(s)
    offsets = _cut_offsets(s)
    values = np.array([analytic.resolution_profiles(kind, abs(d) / wl.lam, spec)
                       for d in offsets])
    curve = analytic.AxisProfile(axis=axis, offsets_m=offsets, values=values,
                                 normalization="closed-form reference, "
                                               "see module analytic")
    write_csv(outdir / "curve.csv", list(analytic.PROFILE_CSV_HEADER),
              analytic.profile_rows(curve, wl.lam))
    return ["curve.csv"], 0


def _cmd_layout(s: dict, outdir: Path, wl: Wavelength) -> tuple[list, int]:
    sources = _aperture(s, wl)
    if isinstance(sources, SurfaceMesh):
        write_csv(outdir / "layout.csv", MESH_CSV_HEADER, mesh_rows(sources))
    else:
        write_csv(outdir / "layout.csv", LAYOUT_CSV_HEADER, layout_rows(sources))
    return ["layout.csv"], 0


# ---------------------------------------------------------------------------
# entry point

def _parse_args(argv):
    parser = argparse.ArgumentParser(
        prog="nearfocus",
        description="Near-field focusing scenarios: weights, fields, metrics, "
                    "closed-form references.")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name, blurb in (
        ("run", "compute weights and fields, write CSV/JSON artifacts"),
        ("validate", "compare the numeric path against a closed-form reference"),
        ("analytic", "emit a closed-form curve only"),
        ("layout", "emit the aperture geometry only"),
    ):
        p = sub.add_parser(name, help=blurb)
        p.add_argument("--scenario", help="scenario JSON file "
                                          "(env NEARFOCUS_SCENARIO)")
        p.add_argument("--out", help="artifact directory (env NEARFOCUS_OUT, "
                                     "default nearfocus-out)")
        p.add_argument("--threads", help="parallelism over grid points "
                                         "(env NEARFOCUS_THREADS, default 1)")
        p.add_argument("--seed", help="random seed, reserved for optimality-oracle "
                                      "restarts (env NEARFOCUS_SEED)")
    return parser.parse_args(argv)


def _setting(cli_value, env_name: str, default):
    if cli_value is not None:
        return cli_value
    env_value = os.environ.get(env_name)
    if env_value is not None and env_value != "":
        return env_value
    return default


def _int_setting(cli_value, env_name: str, default, minimum: int, label: str):
    raw = _setting(cli_value, env_name, default)
    if raw is default and not isinstance(raw, str):
        return raw
    try:
        value = int(raw)
    except (TypeError, ValueError):
        raise ScenarioError("usage", f"{label} must be an integer, got {raw!r}")
    if value < minimum:
        raise ScenarioError("usage", f"{label} must be at least {minimum}")
    return value


def main(argv=None) -> int:
    args = _parse_args(argv)
    started = time.perf_counter()
    try:
        scenario_path = _setting(args.scenario, "NEARFOCUS_SCENARIO", None)
        if scenario_path is None:
            raise ScenarioError("usage", "a scenario is required: pass --scenario "
                                         "or set NEARFOCUS_SCENARIO")
        outdir = Path(_setting(args.out, "NEARFOCUS_OUT", "nearfocus-out"))
        threads = _int_setting(args.threads, "NEARFOCUS_THREADS", 1, 1, "--threads")
        seed = _int_setting(args.seed, "NEARFOCUS_SEED", None, 0, "--seed")

        scenario, filled = load_scenario(scenario_path)
        wl = _wavelength(scenario)
        outdir.mkdir(parents=True, exist_ok=True)

        report = None
        if args.subcommand == "run":
            artifacts, code = _cmd_run(scenario, outdir, wl, threads)
        elif args.subcommand == "validate":
            kind = scenario["analytic_reference"]
            if kind == "none":
                raise _invalid("validate requires analytic_reference")
            if kind in RATIO_REFERENCES:
                artifacts, code, report = _cmd_validate_ratio(scenario, wl)
            else:
                artifacts, code, report = _cmd_validate_profile(
                    scenario, outdir, wl, threads)
            _write_json(outdir / "report.json", report)
            artifacts = artifacts + ["report.json"]
        elif args.subcommand == "analytic":
            artifacts, code = _cmd_analytic(scenario, outdir, wl)
        else:
            artifacts, code = _cmd_layout(scenario, outdir, wl)

        manifest = {
            "tool": "nearfocus",
            "version": __version__,
            "subcommand": args.subcommand,
            "scenario_file": str(scenario_path),
            "scenario": scenario,
            "defaults_filled": filled,
            "derived": {"wavelength_m": wl.lam, "wavenumber_rad_per_m": wl.k},
            "threads": threads,
            "seed": seed,
            "resolved_conventions": RESOLVED_CONVENTIONS,
            "artifacts": sorted(artifacts + ["manifest.json"]),
            "wall_time_s": time.perf_counter() - started,
        }
        _write_json(outdir / "manifest.json", manifest)

        summary = {"status": "ok" if code == 0 else "failed",
                   "subcommand": args.subcommand,
                   "out": str(outdir),
                   "artifacts": manifest["artifacts"]}
        if report is not None:
            summary["report"] = report
        print(json.dumps(summary, sort_keys=True))
        return code
    except ScenarioError as e:
        print(json.dumps({"error": {"code": e.code, "message": str(e)}},
                         sort_keys=True))
        return 2
    except (ValueError, TypeError) as e:
        print(json.dumps({"error": {"code": "run-failed", "message": str(e)}},
                         sort_keys=True))
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
