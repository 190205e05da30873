"""End-to-end acceptance checks, one per shipped guarantee.

Each test prints exactly one ``[acceptance NN] label: PASS/FAIL`` line with
the measured numbers, then asserts the guarantee at its stated tolerance.
Checks that carry a runtime budget time themselves and assert it too.

Frozen expectations come from independent oracles: adaptive quadrature for
the closed forms, scipy for the special functions, projected gradient
ascent for the water-level solver, and axially refined surface meshes as
continuum proxies for the discrete cuts.  Where a guarantee is not met,
the failure message states the measured value and the physical reason.
"""

import json
import math
import time

import numpy as np
import pytest
import scipy.special as sp

from nearfocus import analytic, cli, specfun
from nearfocus.fields import ChannelVector, assemble_channel, evaluate_field
from nearfocus.focusing import (PowerConstraints, cp_weights, hybrid_weights,
                                optimality_oracle, tr_weights)
from nearfocus.geometry import (CylinderSpec, RectCorridorSpec, Wavelength,
                                build_cylinder_mesh, build_rect_corridor_mesh,
                                build_ring_array)
from nearfocus.metrics import cut_metrics

WL = Wavelength.from_frequency(1.0e9)
LAM = WL.lam
BASELINE = CylinderSpec(radius_a=1.0, length_L=10.0)
X_HAT = np.array([1.0, 0.0, 0.0])
Y_HAT = np.array([0.0, 1.0, 0.0])
Z_HAT = np.array([0.0, 0.0, 1.0])

# pure-CP and pure-TR constraint sets: one cap binds, the other is slack
PC_CP = PowerConstraints(w_max=0.02, P0=1.0e9, R0_per_port=50.0)
PC_TR = PowerConstraints(w_max=1.0e9, P0=1.0, R0_per_port=50.0)


def _report(index, label, failures, detail):
    status = "FAIL" if failures else "PASS"
    print(f"[acceptance {index:02d}] {label}: {status} ({detail})")
    if failures:
        pytest.fail(f"{label}: " + "; ".join(failures), pytrace=False)


def _cut(sources, weights, axis, component, half_span_wl=1.6, **kwargs):
    n = int(round(half_span_wl * 128.0))
    offsets = np.arange(-n, n + 1) * (LAM / 128.0)
    points = offsets[:, None] * axis[None, :]
    fm = evaluate_field(sources, weights, points, WL, **kwargs)
    values = np.abs(fm.E[:, {"x": 0, "y": 1, "z": 2}[component]])
    return offsets, values


def _width_wl(offsets, values):
    return cut_metrics((offsets, values), LAM).width_3db / LAM


def _main_lobe_linf(offsets, values, kind):
    """Peak-normalized worst deviation from the closed form, between the
    sampled minima that flank the peak."""
    reference = np.array([abs(analytic.resolution_profiles(kind, abs(o) / LAM,
                                                           BASELINE))
                          for o in offsets])
    nn = values / values.max()
    aa = reference / reference.max()
    lo = hi = len(offsets) // 2
    while lo > 0 and nn[lo - 1] < nn[lo]:
        lo -= 1
    while hi < len(nn) - 1 and nn[hi + 1] < nn[hi]:
        hi += 1
    return float(np.max(np.abs(nn[lo:hi + 1] - aa[lo:hi + 1])))


def _cosine(a, b):
    return float(np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b)))


@pytest.fixture(scope="module")
def baseline_array():
    """Discrete baseline: 1 GHz axial rings on the 1 m x 10 m cylinder."""
    layout = build_ring_array(BASELINE, WL, polarization="axial")
    focus = np.zeros(3)
    h_z = assemble_channel(layout, focus, Z_HAT, WL)
    h_x = assemble_channel(layout, focus, X_HAT, WL)
    return layout, h_z, h_x


def test_01_kernel_focal_sizes():
    """Sampled point and dipole kernels show the advertised 3-dB widths
    and first nulls."""
    t0 = time.perf_counter()
    n = int(round(1.1 * 128))
    offsets = np.arange(-n, n + 1) * (LAM / 128.0)
    kr = WL.k * np.abs(offsets)
    cases = (
        ("point", [abs(analytic.kernel_point(v)) for v in kr], 0.44, 0.50),
        ("dipole axis", [abs(analytic.kernel_dipole(v, 0.0)) for v in kr],
         0.578, 0.715),
        ("dipole equator",
         [abs(analytic.kernel_dipole(v, math.pi / 2)) for v in kr],
         0.402, 0.437),
    )
    failures, shown = [], []
    for name, values, want_w, want_n in cases:
        m = cut_metrics((offsets, np.asarray(values)), LAM)
        width, null = m.width_3db / LAM, m.first_null / LAM
        shown.append(f"{name} {width:.4f}/{null:.4f}")
        if abs(width - want_w) > 0.01:
            failures.append(f"{name} width {width:.4f} wl not {want_w} +- 0.01")
        if abs(null - want_n) > 0.005:
            failures.append(f"{name} null {null:.4f} wl not {want_n} +- 0.005")
    elapsed = time.perf_counter() - t0
    if elapsed >= 1.0:
        failures.append(f"runtime {elapsed:.2f}s not under 1s")
    _report(1, "kernel focal sizes", failures,
            f"width/null wl: {', '.join(shown)}; {elapsed:.2f}s")


def test_02_drive_regimes():
    """Raising the per-element cap against a fixed 1 W budget walks the
    water-level solution from flat clipping through a plateau to the
    channel-proportional taper."""
    t0 = time.perf_counter()
    mesh = build_cylinder_mesh(BASELINE, 200, 36)
    h = assemble_channel(mesh, np.zeros(3), Z_HAT, WL, mesh_current="z")
    w_tr, _ = tr_weights(h, PowerConstraints(1.0e9, 1.0, 50.0))
    a_tr = np.abs(w_tr.w)
    failures, shown = [], []
    for w_m, want in ((0.002, "CP"), (0.008, "hybrid"), (0.02, "TR")):
        w, _ = hybrid_weights(h, PowerConstraints(w_m, 1.0, 50.0))
        amps = np.abs(w.w)
        clipped = int(np.sum(amps >= w_m * (1.0 - 1e-9)))
        shown.append(f"w_m={w_m}: {w.regime} {clipped}/{amps.size} clipped")
        if w.regime != want:
            failures.append(f"w_m={w_m} regime {w.regime}, expected {want}")
        if want == "CP" and np.ptp(amps) > 1e-12 * w_m:
            failures.append(f"w_m={w_m} profile not flat (spread {np.ptp(amps):.2e})")
        if want == "TR":
            c = _cosine(amps, a_tr)
            shown[-1] += f" cos={c:.6f}"
            if c < 0.999:
                failures.append(f"w_m={w_m} cosine {c:.6f} below 0.999")
        if want == "hybrid":
            if not 0 < clipped < amps.size:
                failures.append(f"w_m={w_m} clipped {clipped} not a strict subset")
            free = amps < w_m * (1.0 - 1e-9)
            c = _cosine(amps[free], a_tr[free])
            shown[-1] += f" tail-cos={c:.6f}"
            if c < 0.999:
                failures.append(f"w_m={w_m} unclipped tail cosine {c:.6f} below 0.999")
            if abs(w.total_power - 1.0) > 1e-9:
                failures.append(f"w_m={w_m} budget not met ({w.total_power})")
    elapsed = time.perf_counter() - t0
    if elapsed >= 10.0:
        failures.append(f"runtime {elapsed:.2f}s not under 10s")
    _report(2, "drive regimes", failures, f"{'; '.join(shown)}; {elapsed:.2f}s")


def test_03_water_level_matches_oracle():
    """The bisection solver matches independent projected gradient ascent
    on 100 random channels across all regimes."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(20260817)
    worst = 0.0
    for i in range(100):
        n_el = (4, 16, 64)[i % 3]
        entries = np.zeros((n_el, 3), dtype=complex)
        entries[:, 2] = rng.normal(size=n_el) + 1j * rng.normal(size=n_el)
        h = ChannelVector(entries, np.zeros(3), Z_HAT, np.ones(n_el))
        w_max = 10.0 ** rng.uniform(-2.0, 0.0)
        budget_fraction = rng.uniform(0.05, 2.0)
        pc = PowerConstraints(w_max,
                              0.5 * 50.0 * budget_fraction * n_el * w_max**2,
                              50.0)
        w, _ = hybrid_weights(h, pc)
        worst = max(worst, abs(optimality_oracle(h, pc, w, seed=i).relative_gap))
    elapsed = time.perf_counter() - t0
    failures = []
    if worst > 1e-7:
        failures.append(f"worst relative gap {worst:.3e} exceeds 1e-7")
    if elapsed >= 30.0:
        failures.append(f"runtime {elapsed:.2f}s not under 30s")
    _report(3, "water level vs oracle", failures,
            f"worst gap {worst:.3e}; {elapsed:.2f}s")


def test_04_long_cylinder_limits():
    """At L = 1000a the on-axis closed forms sit on their limiting
    constants, and so do the co/cross ratios."""
    spec = CylinderSpec(1.0, 1000.0)
    ez_cp = analytic.ez_cp_axis(0.0, spec)
    ex_cp = analytic.ex_cp_axis(0.0, spec)
    ez_tr = analytic.ez_tr_axis(0.0, spec)
    ex_tr = analytic.ex_tr_axis(0.0, spec)
    checks = (
        ("ez_cp", ez_cp, math.pi, ""),
        ("ex_cp", ex_cp, 2.0,
         " (this form approaches its limit linearly in a/L, so at"
         " L = 1000a the deviation is 2a/L = 2e-3 by construction)"),
        ("ez_tr", ez_tr, 3.0 * math.pi**2 / 16.0, ""),
        ("ex_tr", ex_tr, math.pi**2 / 32.0, ""),
        ("cp ratio", ez_cp / ex_cp, math.pi / 2.0,
         " (inherits the linear-order term of the cross-polarized limit)"),
        ("tr ratio", ez_tr / ex_tr, 6.0, ""),
    )
    failures, shown = [], []
    for name, got, want, why in checks:
        dev = abs(got / want - 1.0)
        shown.append(f"{name} {dev:.1e}")
        if dev > 1e-3:
            failures.append(f"{name} = {got!r} deviates {dev:.3e} from"
                            f" {want!r}, tolerance 1e-3{why}")
    _report(4, "long-cylinder limits", failures, "rel dev " + ", ".join(shown))


def test_05_copolarized_cuts_match_closed_forms(baseline_array):
    """Full-drive co-polarized focal cuts of the discrete baseline track
    the sinc family, with both 3-dB extents at 0.44 wl."""
    t0 = time.perf_counter()
    layout, h_z, _ = baseline_array
    w, _ = cp_weights(h_z, PC_CP)
    off_t, val_t = _cut(layout, w, X_HAT, "z")
    off_l, val_l = _cut(layout, w, Z_HAT, "z")
    width_t = _width_wl(off_t, val_t)
    width_l = _width_wl(off_l, val_l)
    linf_t = _main_lobe_linf(off_t, val_t, "ez_trans")
    linf_l = _main_lobe_linf(off_l, val_l, "ez_long")
    elapsed = time.perf_counter() - t0

    failures = []
    if linf_t > 0.02:
        failures.append(f"transverse main-lobe deviation {linf_t:.4f} exceeds 0.02")
    if linf_l > 0.02:
        failures.append(
            f"longitudinal main-lobe deviation {linf_l:.4f} exceeds 0.02: the"
            " discrete near-field sum fills the first null to 5% of peak while"
            " the closed form goes to zero there; inside |z| <= 0.45 wl the"
            " curves agree to 1.2%")
    if abs(width_t - 0.44) > 0.01:
        failures.append(f"transverse width {width_t:.4f} wl not 0.44 +- 0.01")
    if abs(width_l - 0.44) > 0.01:
        failures.append(
            f"longitudinal depth {width_l:.4f} wl not 0.44 +- 0.01: the axial"
            " stretch sqrt(1 + 4a^2/L^2) = 1.0198 at this aspect ratio puts"
            " even the reference curve's depth at 0.4517 wl, outside the same"
            " window")
    if elapsed >= 60.0:
        failures.append(f"runtime {elapsed:.2f}s not under 60s")
    _report(5, "co-polarized focal cuts", failures,
            f"widths {width_t:.4f}/{width_l:.4f} wl,"
            f" main-lobe dev {linf_t:.4f}/{linf_l:.4f}; {elapsed:.2f}s")


def test_06_time_reversal_focal_size(baseline_array):
    """Power-limited focusing on the discrete baseline gives the advertised
    longitudinal and transverse 3-dB extents."""
    layout, h_z, _ = baseline_array
    w, _ = tr_weights(h_z, PC_TR)
    width_l = _width_wl(*_cut(layout, w, Z_HAT, "z"))
    width_t = _width_wl(*_cut(layout, w, X_HAT, "z"))
    failures = []
    if abs(width_l - 0.66) > 0.02:
        failures.append(
            f"longitudinal width {width_l:.4f} wl not 0.66 +- 0.02: axially"
            " refined surface meshes (200 to 800 rows) reproduce the same"
            " 0.6351 wl, so the offset is a property of the finite geometry,"
            " not of the half-wavelength element spacing")
    if abs(width_t - 0.40) > 0.02:
        failures.append(f"transverse width {width_t:.4f} wl not 0.40 +- 0.02")
    _report(6, "time-reversal focal size", failures,
            f"widths {width_l:.4f}/{width_t:.4f} wl")


def test_07_crosspolarized_focal_size(baseline_array):
    """The cross-polarized closed-form cuts have the advertised main-lobe
    widths along z, x and y."""
    layout, _, h_x = baseline_array
    n = int(round(1.6 * 128))
    offsets = np.arange(-n, n + 1) * (LAM / 128.0)

    def curve_width(kind):
        values = np.array([abs(analytic.resolution_profiles(kind, abs(o) / LAM,
                                                            BASELINE))
                           for o in offsets])
        return _width_wl(offsets, values)

    w_long = curve_width("ex_long")
    w_x = curve_width("ex_trans_x")
    w_y = curve_width("ex_trans_y")
    # discrete baseline counterparts, shown for context
    w, _ = cp_weights(h_x, PC_CP)
    d_long = _width_wl(*_cut(layout, w, Z_HAT, "x"))
    d_x = _width_wl(*_cut(layout, w, X_HAT, "x"))
    d_y = _width_wl(*_cut(layout, w, Y_HAT, "x"))

    failures = []
    if abs(w_long - 0.31) > 0.02:
        failures.append(f"longitudinal width {w_long:.4f} wl not 0.31 +- 0.02")
    if abs(w_x - 0.54) > 0.03:
        failures.append(f"transverse-x width {w_x:.4f} wl not 0.54 +- 0.03")
    if abs(w_y - 0.84) > 0.03:
        failures.append(
            f"transverse-y width {w_y:.4f} wl not 0.84 +- 0.03: the closed"
            f" form 2*Si(x)/x has its 3-dB point at 0.8030 wl, and the"
            f" discrete baseline simulation gives {d_y:.4f} wl, so the quoted"
            " 0.84 wl matches neither the curve family nor the simulation")
    _report(7, "cross-polarized focal size", failures,
            f"curve widths {w_long:.4f}/{w_x:.4f}/{w_y:.4f} wl,"
            f" discrete {d_long:.4f}/{d_x:.4f}/{d_y:.4f} wl")


def test_08_rectangle_bounded_by_cylinders():
    """Focal amplitude from a rectangular corridor sits strictly between
    its inscribed and circumscribed cylinders at every sampled focus.

    Checked at reduced scale (8 x 7 wavelength cross-section, 20 long);
    the full-size 40 x 35 wavelength corridor needs over 10^6 patches and
    is documented in the README instead of simulated here.
    """
    rect = RectCorridorSpec(width_La=8 * LAM, height_Lb=7 * LAM,
                            length_L=20 * LAM)
    patch = 0.25 * LAM
    mesh_rect = build_rect_corridor_mesh(rect, patch, WL)

    def cylinder(radius):
        spec = CylinderSpec(radius_a=radius, length_L=rect.length_L)
        n_axial = int(np.ceil(spec.length_L / patch))
        n_azimuthal = int(np.ceil(2.0 * math.pi * radius / patch))
        return build_cylinder_mesh(spec, n_axial, n_azimuthal)

    mesh_in = cylinder(rect.inscribed_radius())
    mesh_out = cylinder(rect.circumscribed_radius())
    foci = np.array([[0.0, 0.0, 0.0], [0.5, 0.0, 0.0], [0.0, 0.5, 3.0],
                     [-1.0, 0.5, -5.0], [1.5, -1.0, 2.0],
                     [0.0, 2.0, 7.0]]) * LAM
    failures, ratios = [], []
    for focus in foci:
        amps = []
        for mesh in (mesh_in, mesh_rect, mesh_out):
            h = assemble_channel(mesh, focus, Z_HAT, WL, mesh_current="z")
            _, rep = cp_weights(h, PC_CP)
            amps.append(abs(rep.E_focus))
        e_in, e_rect, e_out = amps
        ratios.append(f"{e_in / e_rect:.3f}/{e_rect / e_out:.3f}")
        if not e_in <= 0.99 * e_rect:
            failures.append(f"focus {focus / LAM} wl: inscribed {e_in:.3f} not"
                            f" 1% below rectangle {e_rect:.3f}")
        if not e_rect <= 0.99 * e_out:
            failures.append(f"focus {focus / LAM} wl: rectangle {e_rect:.3f} not"
                            f" 1% below circumscribed {e_out:.3f}")
    _report(8, "rectangle bounded by cylinders", failures,
            f"in/rect and rect/circ ratios {', '.join(ratios)}")


def test_09_frequency_invariant_taper():
    """Normalized power-limited ring tapers at 1 and 6 GHz coincide on the
    fixed 10 m x 1 m geometry."""
    def ring_profile(frequency):
        wl = Wavelength.from_frequency(frequency)
        layout = build_ring_array(BASELINE, wl, polarization="axial")
        h = assemble_channel(layout, np.zeros(3), Z_HAT, wl)
        w, _ = tr_weights(h, PowerConstraints(1.0e9, 1.0, 50.0))
        amps = np.abs(w.w).reshape(layout.rings, layout.per_ring)[:, 0]
        z = layout.positions[:, 2].reshape(layout.rings, layout.per_ring)[:, 0]
        return z, amps / amps.max()

    z1, p1 = ring_profile(1.0e9)
    z6, p6 = ring_profile(6.0e9)
    deviation = float(np.max(np.abs(np.interp(z6, z1, p1) - p6)))
    failures = []
    if deviation > 0.01:
        failures.append(f"max profile deviation {deviation:.4f} exceeds 0.01")
    _report(9, "frequency-invariant taper", failures,
            f"max deviation {deviation:.4f} over {z6.size} rings")


def test_10_transverse_asymptote_settled(tmp_path):
    """Adaptive quadrature pins the transverse-drive cross-component
    plateau to 41*pi^2/128, rejects the 41*pi^2/108 alternative, and the
    run manifest records that resolution."""
    oracle = analytic.transverse_pol_tr_quadrature(
        "x", 0.0, CylinderSpec(1.0, 1.0e4))
    dev = abs(oracle / analytic.TRANSVERSE_TR_X_LIMIT - 1.0)
    dev_alt = abs(oracle / analytic.TRANSVERSE_TR_X_LIMIT_ALTERNATE - 1.0)

    scenario = tmp_path / "scenario.json"
    scenario.write_text(json.dumps({"geometry": "cylinder", "radius_m": 1.0,
                                    "length_m": 10.0, "frequency_hz": 1.0e9}))
    out = tmp_path / "out"
    code = cli.main(["layout", "--scenario", str(scenario), "--out", str(out)])
    manifest = json.loads((out / "manifest.json").read_text())
    recorded = manifest.get("resolved_conventions", {})

    failures = []
    if dev > 0.005:
        failures.append(f"quadrature {oracle!r} deviates {dev:.3e} from"
                        " 41*pi^2/128, tolerance 0.5%")
    if dev_alt <= 0.005:
        failures.append("quadrature does not reject the 41*pi^2/108 alternative")
    if code != 0:
        failures.append(f"manifest-producing run exited {code}")
    if recorded.get("transverse_tr_x_asymptote") != "41*pi^2/128":
        failures.append("manifest does not record the settled asymptote")
    if abs(recorded.get("transverse_tr_x_asymptote_value", 0.0)
           - analytic.TRANSVERSE_TR_X_LIMIT) > 1e-12:
        failures.append("manifest asymptote value mismatch")
    if "transverse_tr_x_resolution" not in recorded:
        failures.append("manifest does not record how the constant was settled")
    _report(10, "transverse asymptote settled", failures,
            f"quadrature {oracle:.6f}, dev {dev:.1e} vs accepted,"
            f" {dev_alt:.1e} vs rejected; manifest records it")


def test_11_special_function_oracles():
    """Every special function matches an independent oracle on 10^3
    log-spaced arguments within its stated tolerance."""
    t0 = time.perf_counter()
    xs = np.logspace(-3.0, 3.0, 1000)
    si_oracle = sp.sici(xs)[0]
    ms = 1.0 - np.logspace(-6.0, 0.0, 1000)[::-1]
    checks = (
        ("sinc", max(abs(specfun.sinc(x) - float(np.sinc(x / math.pi)))
                     for x in xs), 1e-12),
        ("spherical j1/x", max(abs(specfun.spherical_j1_over_x(x)
                                   - sp.spherical_jn(1, x) / x)
                               for x in xs), 1e-12),
        ("bessel j0", max(abs(specfun.bessel_j0(x) - sp.j0(x))
                          for x in xs), 1e-10),
        ("struve h0", max(abs(specfun.struve_h(0, x) - sp.struve(0, x))
                          for x in xs), 1e-9),
        ("struve h-1", max(abs(specfun.struve_h(-1, x)
                               - (2.0 / math.pi - sp.struve(1, x)))
                           for x in xs), 1e-9),
        ("sine integral", max(abs(specfun.sine_integral(x) - s)
                              for x, s in zip(xs, si_oracle)), 1e-10),
        ("elliptic K", max(abs(specfun.complete_elliptic_k(m) / sp.ellipk(m)
                               - 1.0) for m in ms), 1e-10),
    )
    elapsed = time.perf_counter() - t0
    failures = [f"{name} max error {err:.3e} exceeds {tol:.0e}"
                for name, err, tol in checks if err > tol]
    if elapsed >= 5.0:
        failures.append(f"runtime {elapsed:.2f}s not under 5s")
    worst = max(err / tol for _, err, tol in checks)
    _report(11, "special function oracles", failures,
            f"worst error at {worst:.1e} of tolerance; {elapsed:.2f}s")
