"""Numba kernels for the position-based-dynamics rope integrator.

Everything here is deterministic: fixed iteration order, no threading, and a
splitmix64 stream for the one-shot grab jitter. The Python-facing API lives in
physics.py.
"""

from __future__ import annotations

import numpy as np
from numba import njit

MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)


@njit(cache=True)
def _splitmix64(state: np.uint64) -> tuple[np.uint64, np.float64]:
    """Advance the stream; return (new_state, uniform in [0, 1))."""
    state = (state + np.uint64(0x9E3779B97F4A7C15)) & MASK64
    z = state
    z = ((z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)) & MASK64
    z = ((z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)) & MASK64
    z = z ^ (z >> np.uint64(31))
    return state, np.float64(z >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@njit(cache=True)
def _segment_closest(pos, i0, i1, j0, j1):
    """Closest-point parameters (s, t) and squared distance between two links."""
    d1x = pos[i1, 0] - pos[i0, 0]
    d1y = pos[i1, 1] - pos[i0, 1]
    d1z = pos[i1, 2] - pos[i0, 2]
    d2x = pos[j1, 0] - pos[j0, 0]
    d2y = pos[j1, 1] - pos[j0, 1]
    d2z = pos[j1, 2] - pos[j0, 2]
    rx = pos[i0, 0] - pos[j0, 0]
    ry = pos[i0, 1] - pos[j0, 1]
    rz = pos[i0, 2] - pos[j0, 2]
    a = d1x * d1x + d1y * d1y + d1z * d1z
    e = d2x * d2x + d2y * d2y + d2z * d2z
    b = d1x * d2x + d1y * d2y + d1z * d2z
    c = d1x * rx + d1y * ry + d1z * rz
    f = d2x * rx + d2y * ry + d2z * rz
    denom = a * e - b * b
    if denom > 1e-14:
        s = (b * f - c * e) / denom
    else:
        s = 0.0
    s = min(max(s, 0.0), 1.0)
    if e > 1e-14:
        t = (b * s + f) / e
    else:
        t = 0.0
    if t < 0.0:
        t = 0.0
        s = min(max(-c / a, 0.0), 1.0)
    elif t > 1.0:
        t = 1.0
        s = min(max((b - c) / a, 0.0), 1.0)
    cx = rx + s * d1x - t * d2x
    cy = ry + s * d1y - t * d2y
    cz = rz + s * d1z - t * d2z
    return s, t, cx * cx + cy * cy + cz * cz


@njit(cache=True)
def _find_contacts(pos, n_links, radius, pairs_i, pairs_j):
    """Non-adjacent link pairs closer than the detection margin (3 radii)."""
    margin2 = (3.0 * radius) * (3.0 * radius)
    count = 0
    for i in range(n_links):
        for j in range(i + 2, n_links):
            # AABB reject with margin.
            lo = 3.0 * radius
            if (
                min(pos[i, 0], pos[i + 1, 0]) > max(pos[j, 0], pos[j + 1, 0]) + lo
                or min(pos[j, 0], pos[j + 1, 0]) > max(pos[i, 0], pos[i + 1, 0]) + lo
                or min(pos[i, 1], pos[i + 1, 1]) > max(pos[j, 1], pos[j + 1, 1]) + lo
                or min(pos[j, 1], pos[j + 1, 1]) > max(pos[i, 1], pos[i + 1, 1]) + lo
                or min(pos[i, 2], pos[i + 1, 2]) > max(pos[j, 2], pos[j + 1, 2]) + lo
                or min(pos[j, 2], pos[j + 1, 2]) > max(pos[i, 2], pos[i + 1, 2]) + lo
            ):
                continue
            _s, _t, d2 = _segment_closest(pos, i, i + 1, j, j + 1)
            if d2 < margin2:
                pairs_i[count] = i
                pairs_j[count] = j
                count += 1
    return count


@njit(cache=True)
def _solve_iteration(pos, n_links, link_length, radius, n_contacts, pairs_i, pairs_j,
                     grabbing, g0, g1, tx, ty, tz):
    # Distance constraints along the chain.
    for i in range(n_links):
        dx = pos[i + 1, 0] - pos[i, 0]
        dy = pos[i + 1, 1] - pos[i, 1]
        dz = pos[i + 1, 2] - pos[i, 2]
        d = (dx * dx + dy * dy + dz * dz) ** 0.5
        if d < 1e-12:
            continue
        corr = 0.5 * (d - link_length) / d
        pos[i, 0] += corr * dx
        pos[i, 1] += corr * dy
        pos[i, 2] += corr * dz
        pos[i + 1, 0] -= corr * dx
        pos[i + 1, 1] -= corr * dy
        pos[i + 1, 2] -= corr * dz

    # Capsule self-collision: keep non-adjacent centerlines 2 radii apart.
    min_dist = 2.0 * radius
    for k in range(n_contacts):
        i = pairs_i[k]
        j = pairs_j[k]
        s, t, d2 = _segment_closest(pos, i, i + 1, j, j + 1)
        if d2 >= min_dist * min_dist:
            continue
        c1x = (1.0 - s) * pos[i, 0] + s * pos[i + 1, 0]
        c1y = (1.0 - s) * pos[i, 1] + s * pos[i + 1, 1]
        c1z = (1.0 - s) * pos[i, 2] + s * pos[i + 1, 2]
        c2x = (1.0 - t) * pos[j, 0] + t * pos[j + 1, 0]
        c2y = (1.0 - t) * pos[j, 1] + t * pos[j + 1, 1]
        c2z = (1.0 - t) * pos[j, 2] + t * pos[j + 1, 2]
        nx = c1x - c2x
        ny = c1y - c2y
        nz = c1z - c2z
        d = (nx * nx + ny * ny + nz * nz) ** 0.5
        if d < 1e-9:
            nx, ny, nz, d = 0.0, 0.0, 1.0, 1.0
        else:
            nx /= d
            ny /= d
            nz /= d
        push = 0.5 * (min_dist - d)
        wi = (1.0 - s) * (1.0 - s) + s * s
        wj = (1.0 - t) * (1.0 - t) + t * t
        di = push / wi
        dj = push / wj
        pos[i, 0] += (1.0 - s) * di * nx
        pos[i, 1] += (1.0 - s) * di * ny
        pos[i, 2] += (1.0 - s) * di * nz
        pos[i + 1, 0] += s * di * nx
        pos[i + 1, 1] += s * di * ny
        pos[i + 1, 2] += s * di * nz
        pos[j, 0] -= (1.0 - t) * dj * nx
        pos[j, 1] -= (1.0 - t) * dj * ny
        pos[j, 2] -= (1.0 - t) * dj * nz
        pos[j + 1, 0] -= (1.0 - t) * dj * nx
        pos[j + 1, 1] -= (1.0 - t) * dj * ny
        pos[j + 1, 2] -= (1.0 - t) * dj * nz

    # Table contact.
    for i in range(n_links + 1):
        if pos[i, 2] < radius:
            pos[i, 2] = radius

    # Grab pin: translate the grabbed link so its midpoint hits the target.
    if grabbing:
        mx = 0.5 * (pos[g0, 0] + pos[g1, 0])
        my = 0.5 * (pos[g0, 1] + pos[g1, 1])
        mz = 0.5 * (pos[g0, 2] + pos[g1, 2])
        pos[g0, 0] += tx - mx
        pos[g0, 1] += ty - my
        pos[g0, 2] += tz - mz
        pos[g1, 0] += tx - mx
        pos[g1, 1] += ty - my
        pos[g1, 2] += tz - mz


@njit(cache=True)
def run_rope(pos, vel, n_links, link_length, radius,
             dt, gravity, iterations, damping, friction,
             path, grab_link, z_offset, effector_speed,
             settle_eps, settle_window, max_substeps,
             jitter_scale, seed, mu_static, energy_out):
    """Integrate: optional waypoint drag of one link, then free settling.

    pos/vel are modified in place. grab_link <= 0 disables the drag phase and
    runs pure settling (used for free-evolution tests). energy_out, when
    non-empty, receives per-substep kinetic energy. Returns (substeps, settled).
    """
    n_joints = n_links + 1

    grabbing_any = grab_link > 0
    g0 = grab_link - 1
    g1 = grab_link
    motion_steps = 0
    total_len = 0.0
    if grabbing_any:
        state = np.uint64(seed) if seed >= 0 else np.uint64(0)
        if jitter_scale > 0.0:
            for i in range(n_joints):
                for k in range(3):
                    state, r = _splitmix64(state)
                    pos[i, k] += (2.0 * r - 1.0) * jitter_scale
        for w in range(path.shape[0] - 1):
            dx = path[w + 1, 0] - path[w, 0]
            dy = path[w + 1, 1] - path[w, 1]
            dz = path[w + 1, 2] - path[w, 2]
            total_len += (dx * dx + dy * dy + dz * dz) ** 0.5
        motion_steps = int(np.ceil(total_len / (effector_speed * dt)))

    pairs_i = np.empty(n_links * n_links, dtype=np.int64)
    pairs_j = np.empty(n_links * n_links, dtype=np.int64)
    prev = np.empty((n_joints, 3))
    pred_z = np.empty(n_joints)
    window_ref = np.empty((n_joints, 3))
    window_age = -1  # substeps since the reference snapshot; -1 = none

    substeps = 0
    settle_count = 0
    settled = False
    record_energy = energy_out.shape[0] > 0

    while substeps < max_substeps:
        substeps += 1
        grabbing = grabbing_any and substeps <= motion_steps
        tx = ty = tz = 0.0
        if grabbing:
            s_arc = min(effector_speed * dt * substeps, total_len)
            acc = 0.0
            tx, ty, tz = path[path.shape[0] - 1, 0], path[path.shape[0] - 1, 1], path[path.shape[0] - 1, 2]
            for w in range(path.shape[0] - 1):
                dx = path[w + 1, 0] - path[w, 0]
                dy = path[w + 1, 1] - path[w, 1]
                dz = path[w + 1, 2] - path[w, 2]
                seg = (dx * dx + dy * dy + dz * dz) ** 0.5
                if acc + seg >= s_arc and seg > 1e-12:
                    f = (s_arc - acc) / seg
                    tx = path[w, 0] + f * dx
                    ty = path[w, 1] + f * dy
                    tz = path[w, 2] + f * dz
                    break
                acc += seg
            tz += z_offset

        for i in range(n_joints):
            prev[i, 0] = pos[i, 0]
            prev[i, 1] = pos[i, 1]
            prev[i, 2] = pos[i, 2]
            vel[i, 0] *= damping
            vel[i, 1] *= damping
            vel[i, 2] = vel[i, 2] * damping - gravity * dt
            pos[i, 0] += vel[i, 0] * dt
            pos[i, 1] += vel[i, 1] * dt
            pos[i, 2] += vel[i, 2] * dt
            pred_z[i] = pos[i, 2]

        n_contacts = _find_contacts(pos, n_links, radius, pairs_i, pairs_j)
        for _ in range(iterations):
            _solve_iteration(pos, n_links, link_length, radius,
                             n_contacts, pairs_i, pairs_j,
                             grabbing, g0, g1, tx, ty, tz)

        # Position-level Coulomb friction: a joint lifted by the solver (table
        # or stacked contact) may slide tangentially only outside the friction
        # cone of its normal correction; inside it, the joint sticks. Without
        # this, contact pushes re-displace positions every substep and tangles
        # creep indefinitely no matter the velocity damping.
        for i in range(n_joints):
            if grabbing and (i == g0 or i == g1):
                continue
            ncorr = pos[i, 2] - pred_z[i]
            if ncorr <= 0.0:
                continue
            tdx = pos[i, 0] - prev[i, 0]
            tdy = pos[i, 1] - prev[i, 1]
            tmag = (tdx * tdx + tdy * tdy) ** 0.5
            cone = mu_static * ncorr
            if tmag <= cone:
                pos[i, 0] = prev[i, 0]
                pos[i, 1] = prev[i, 1]
            elif tmag > 1e-15:
                cut = cone / tmag
                pos[i, 0] -= tdx * cut
                pos[i, 1] -= tdy * cut

        vmax2 = 0.0
        ke = 0.0
        for i in range(n_joints):
            vx = (pos[i, 0] - prev[i, 0]) / dt
            vy = (pos[i, 1] - prev[i, 1]) / dt
            vz = (pos[i, 2] - prev[i, 2]) / dt
            if pos[i, 2] <= radius + 1e-9:
                vx *= 1.0 - friction
                vy *= 1.0 - friction
            vel[i, 0] = vx
            vel[i, 1] = vy
            vel[i, 2] = vz
            v2 = vx * vx + vy * vy + vz * vz
            if v2 > vmax2:
                vmax2 = v2
            ke += 0.5 * v2
        if record_energy and substeps <= energy_out.shape[0]:
            energy_out[substeps - 1] = ke

        if not grabbing:
            if vmax2 < settle_eps * settle_eps:
                settle_count += 1
            else:
                settle_count = 0
            if settle_count >= settle_window:
                settled = True
                break
            # Quasi-static criterion: jammed contact stacks sustain phantom
            # projection velocity while the rope itself stops moving; treat a
            # window whose net displacement stays under eps * window * dt as
            # settled.
            if window_age < 0:
                for i in range(n_joints):
                    window_ref[i, 0] = pos[i, 0]
                    window_ref[i, 1] = pos[i, 1]
                    window_ref[i, 2] = pos[i, 2]
                window_age = 0
            else:
                window_age += 1
                if window_age >= settle_window:
                    disp2max = 0.0
                    for i in range(n_joints):
                        ddx = pos[i, 0] - window_ref[i, 0]
                        ddy = pos[i, 1] - window_ref[i, 1]
                        ddz = pos[i, 2] - window_ref[i, 2]
                        d2 = ddx * ddx + ddy * ddy + ddz * ddz
                        if d2 > disp2max:
                            disp2max = d2
                    limit = settle_eps * settle_window * dt
                    if disp2max < limit * limit:
                        settled = True
                        break
                    window_age = -1

    return substeps, settled
