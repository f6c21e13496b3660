"""Compiled versions of the hot loops (same signatures as numpy_impl)."""

import math

import numpy as np
from numba import njit

from .numpy_impl import BACKWARD, ERR_OK, ERR_SINKAGE, FORWARD, NONE, STOP_COURSE, STOP_MAX_STRIDES, STOP_STUCK

_OPTS = dict(cache=True, nogil=True)


@njit(**_OPTS)
def closed_form_sweep(alpha, zeta, incline_rad, segment_length):
    na, nz = alpha.size, zeta.size
    valid = np.zeros((na, nz), dtype=np.bool_)
    outcome = np.zeros((na, nz), dtype=np.int8)
    margin = np.zeros((na, nz))
    c = math.cos(incline_rad)
    scale = segment_length / (2.0 * c)
    for i in range(na):
        a = alpha[i]
        for j in range(nz):
            z = zeta[j]
            gamma = 2.0 * np.pi - a - z
            if not (a > 0.0 and z > 0.0 and gamma > 1e-12 and gamma <= np.pi + 1e-12):
                continue
            valid[i, j] = True
            s = math.cos(a + incline_rad) - math.cos(z - incline_rad)
            front = scale * (s - c)
            back = -scale * (s + c)
            if s > c:
                outcome[i, j] = FORWARD
                margin[i, j] = front
            elif s < -c:
                outcome[i, j] = BACKWARD
                margin[i, j] = back
            else:
                margin[i, j] = max(front, back)
    return valid, outcome, margin


@njit(**_OPTS)
def batch_roll(angles, segment_length, support_index, incline_rad):
    m, n = angles.shape
    outcome = np.zeros(m, dtype=np.int8)
    margin = np.zeros(m)
    com = np.zeros((m, 2))
    x = np.zeros(n)
    z = np.zeros(n)
    t = math.tan(incline_rad)
    j = (support_index + 1) % n
    for r in range(m):
        heading = 0.0
        for i in range(1, n):
            x[i] = x[i - 1] + segment_length * math.cos(heading)
            z[i] = z[i - 1] + segment_length * math.sin(heading)
            heading += np.pi - angles[r, i]
        px, pz = x[support_index], z[support_index]
        head = math.atan2(z[j] - pz, x[j] - px)
        c, s = math.cos(head), math.sin(head)
        cx = 0.0
        cz = 0.0
        for i in range(n):
            rx, rz = x[i] - px, z[i] - pz
            cx += c * rx + s * rz
            cz += -s * rx + c * rz
        cx /= n
        cz /= n
        com[r, 0] = cx
        com[r, 1] = cz
        xp = cx - cz * t
        if xp > segment_length:
            outcome[r] = FORWARD
            margin[r] = xp - segment_length
        elif xp < 0.0:
            outcome[r] = BACKWARD
            margin[r] = -xp
        else:
            outcome[r] = NONE
            margin[r] = -min(xp, segment_length - xp)
    return outcome, margin, com


@njit(**_OPTS)
def _cell(x, cell_size):
    return int(math.floor(x / cell_size + 1e-9))


@njit(**_OPTS)
def run_strides(depth, count, cell_size, segment_length, land_length, advance,
                pressure, gain, slip, com_x, com_z, rear0, course, max_strides,
                stuck_limit):
    lengths = np.zeros(max_strides)
    pitch_deg = np.zeros(max_strides)
    outcome = np.zeros(max_strides, dtype=np.int8)
    rear = np.zeros(max_strides + 1)
    rear[0] = rear0
    delta = advance * (1.0 - slip)
    n_adv = 0
    stuck = 0
    r = rear0
    n_steps = 0
    reason = STOP_MAX_STRIDES
    for k in range(max_strides):
        i0 = _cell(r, cell_size)
        i1 = _cell(r + land_length, cell_size)
        for i in range(i0, i1):
            depth[i] += pressure * (1.0 + gain * count[i])
            count[i] += 1
        d = depth[i0]
        if d >= segment_length:
            return lengths, pitch_deg, outcome, rear, k, reason, ERR_SINKAGE
        p = math.degrees(math.asin(d / segment_length))
        pitch_deg[k] = p
        xp = com_x - com_z * math.tan(math.radians(p))
        if xp > segment_length:
            n_adv += 1
            r = rear0 + n_adv * delta
            lengths[k] = delta
            outcome[k] = 1
            stuck = 0
        else:
            j = _cell(r + segment_length, cell_size)
            depth[i0] += pressure * (1.0 + gain * count[i0])
            count[i0] += 1
            depth[j] += pressure * (1.0 + gain * count[j])
            count[j] += 1
            stuck += 1
        rear[k + 1] = r
        n_steps = k + 1
        if r - rear0 >= course - 1e-12:
            reason = STOP_COURSE
            break
        if stuck >= stuck_limit:
            reason = STOP_STUCK
            break
    return lengths, pitch_deg, outcome, rear, n_steps, reason, ERR_OK
