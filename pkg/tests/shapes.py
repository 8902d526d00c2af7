"""Hand-designed rope shapes used as geometric fixtures.

Each builder lays the rope along an analytic planar curve scaled to the rope's
length; crossings are encoded by raised-cosine z-arches (a rope diameter high)
placed by normalized arc length, so the diagram readout sees an unambiguous
over/under at every intersection.
"""

import numpy as np

from knotforge.rope_core import RopeConfig, RopeParams, rope_from_polyline


def _bump(s: np.ndarray, center: float, width: float, height: float) -> np.ndarray:
    x = np.clip((s - center) / width, -1.0, 1.0)
    return height * 0.5 * (1.0 + np.cos(np.pi * x))


def _arc_fraction(xy: np.ndarray) -> tuple[np.ndarray, float]:
    seg = np.linalg.norm(np.diff(xy, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    return cum / cum[-1], float(cum[-1])


def _fit(xy: np.ndarray, z_of_s, params: RopeParams, fill: float = 0.985) -> RopeConfig:
    """Scale the planar curve to consume `fill` of the rope, then set z by arc."""
    s, total = _arc_fraction(xy)
    xy = xy * (fill * params.rope_length / total)
    s, _ = _arc_fraction(xy)
    z = np.maximum(z_of_s(s), params.rope_radius)
    return rope_from_polyline(np.column_stack([xy[:, 0], xy[:, 1], z]), params)


def kink_rope(params: RopeParams, sign_flip: bool = False,
              over_first: bool = False) -> RopeConfig:
    """Open curve with one loop crossing the lead-in exactly once.

    The exit strand passes over by default; over_first arches the lead-in
    instead, flipping which passage comes first in the code.
    """
    lead = np.column_stack([np.linspace(-0.35, 0.1, 150), np.zeros(150)])
    theta = np.linspace(-np.pi / 2, np.pi, 400)
    loop = np.column_stack([0.1 + 0.16 * np.cos(theta), 0.16 + 0.16 * np.sin(theta)])
    exit_pts = np.column_stack([np.full(150, loop[-1, 0]),
                                np.linspace(loop[-1, 1], -0.45, 150)])
    xy = np.vstack([lead, loop[1:], exit_pts[1:]])
    if sign_flip:
        xy = xy * np.array([1.0, -1.0])
    r = params.rope_radius
    # Arc fractions of the crossing: exit strand descends through y=0 at
    # x = -0.06; the lead-in meets it 0.29 into its 0.45 m run.
    s, _total = _arc_fraction(xy)
    s_lead = s[np.argmin(np.abs(lead[:, 0] - (-0.06)))]
    drop = np.nonzero((xy[:, 0] < -0.05) & (np.abs(xy[:, 1]) < 0.05)
                      & (np.arange(len(xy)) > 300))[0]
    s_exit = s[drop[0]] if len(drop) else 0.77

    def z_of_s(sn):
        center = s_lead if over_first else s_exit
        return r + _bump(sn, center, 0.05, 2.5 * r)

    return _fit(xy, z_of_s, params)


def trefoil_rope(params: RopeParams, mirror: bool = False) -> RopeConfig:
    """Open trefoil: three crossings, alternating over/under along the curve."""
    t = np.linspace(0.25, 2 * np.pi - 0.25, 900)
    xy = np.column_stack([np.sin(t) + 2.0 * np.sin(2.0 * t),
                          np.cos(t) - 2.0 * np.cos(2.0 * t)])
    if mirror:
        xy = xy * np.array([1.0, -1.0])
    wave = np.sin(3.0 * t)
    if mirror:
        wave = -wave
    r = params.rope_radius

    def z_of_s(s):
        # Reuse the parameter wave (s is monotone in t) for the arch profile.
        w = np.interp(s, np.linspace(0, 1, len(wave)), wave)
        return r * (2.3 + 1.8 * w)

    return _fit(xy, z_of_s, params)


def figure8_rope(params: RopeParams) -> RopeConfig:
    """Open figure-eight knot via the standard (2 + cos 2t) parametrization:
    four alternating crossings with zero total writhe."""
    t = np.linspace(0.15, 2 * np.pi - 0.15, 1200)
    xy = np.column_stack([(2.0 + np.cos(2.0 * t)) * np.cos(3.0 * t),
                          (2.0 + np.cos(2.0 * t)) * np.sin(3.0 * t)])
    wave = np.sin(4.0 * t)
    r = params.rope_radius

    def z_of_s(s):
        w = np.interp(s, np.linspace(0, 1, len(wave)), wave)
        return r * (2.3 + 1.8 * w)

    return _fit(xy, z_of_s, params)


def _planar_self_intersections(xy: np.ndarray) -> list[tuple[float, float]]:
    """Arc-fraction pairs (s1, s2) at the curve's planar self-intersections."""
    s, _ = _arc_fraction(xy)
    a = xy[:-1]
    d = np.diff(xy, axis=0)
    hits = []
    for i in range(len(d)):
        js = np.arange(i + 2, len(d))
        if not len(js):
            continue
        cross = d[i, 0] * d[js, 1] - d[i, 1] * d[js, 0]
        diff = a[js] - a[i]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (diff[:, 0] * d[js, 1] - diff[:, 1] * d[js, 0]) / cross
            u = (diff[:, 0] * d[i, 1] - diff[:, 1] * d[i, 0]) / cross
        ok = (cross != 0) & (t >= 0) & (t < 1) & (u >= 0) & (u < 1)
        for j, tj, uj in zip(js[ok], t[ok], u[ok]):
            hits.append((s[i] + tj * (s[i + 1] - s[i]), s[j] + uj * (s[j + 1] - s[j])))
    return hits


def wavy_rope(params: RopeParams, seed: int) -> RopeConfig:
    """Random smooth open curve; every planar self-intersection gets one side
    arched over the other (side chosen by the seed)."""
    rng = np.random.default_rng(seed)
    n = 600
    u = np.linspace(0, 1, n)
    xs = np.interp(u, [0, 1], [-0.4, 0.4])
    ys = np.zeros(n)
    for k in range(1, 5):
        xs = xs + rng.normal(0, 0.45 / k) * np.sin(np.pi * k * u + rng.uniform(0, 2 * np.pi))
        ys = ys + rng.normal(0, 0.45 / k) * np.sin(np.pi * k * u + rng.uniform(0, 2 * np.pi))
    xy = np.column_stack([xs, ys])
    r = params.rope_radius
    centers = [rng.choice(pair) for pair in _planar_self_intersections(xy)]

    def z_of_s(s):
        z = np.full_like(s, r)
        for c in centers:
            z = z + _bump(s, c, 0.035, 2.5 * r)
        return z

    return _fit(xy, z_of_s, params)
