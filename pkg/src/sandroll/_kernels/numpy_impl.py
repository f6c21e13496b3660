"""Pure-numpy versions of the hot loops.

Arithmetic is written operation-for-operation like the compiled versions so
that both backends return bit-identical results.
"""

import math

import numpy as np

FORWARD, NONE, BACKWARD = 1, 0, -1
STOP_MAX_STRIDES, STOP_COURSE, STOP_STUCK = 0, 1, 2
ERR_OK, ERR_SINKAGE = 0, 1


def closed_form_sweep(alpha, zeta, incline_rad, segment_length):
    """Parallelogon rolling classes over an (alpha, zeta) grid.

    Returns:
        (valid, outcome, margin), each shaped (alpha.size, zeta.size).
    """
    a = alpha[:, None]
    z = zeta[None, :]
    gamma = 2.0 * np.pi - a - z
    valid = (a > 0.0) & (z > 0.0) & (gamma > 1e-12) & (gamma <= np.pi + 1e-12)
    c = math.cos(incline_rad)
    s = np.cos(a + incline_rad) - np.cos(z - incline_rad)
    scale = segment_length / (2.0 * c)
    front = scale * (s - c)
    back = -scale * (s + c)
    outcome = np.where(s > c, FORWARD, np.where(s < -c, BACKWARD, NONE)).astype(np.int8)
    margin = np.where(outcome == FORWARD, front,
                      np.where(outcome == BACKWARD, back, np.maximum(front, back)))
    outcome = np.where(valid, outcome, NONE).astype(np.int8)
    margin = np.where(valid, margin, 0.0)
    return valid, outcome, margin


def batch_roll(angles, segment_length, support_index, incline_rad):
    """Walk many chains, pose each on one segment and classify the tip.

    Args:
        angles: (m, n) interior angles, one chain per row.
        segment_length: Segment length in meters.
        support_index: Supporting segment, shared by all rows.
        incline_rad: Support inclination.

    Returns:
        (outcome, margin, com) with com shaped (m, 2) in the support frame.
    """
    angles = np.asarray(angles, dtype=np.float64)
    m, n = angles.shape
    turns = np.pi - angles
    heading = np.zeros((m, n))
    heading[:, 1:] = np.cumsum(turns[:, 1:], axis=1)
    x = np.zeros((m, n))
    z = np.zeros((m, n))
    x[:, 1:] = np.cumsum(segment_length * np.cos(heading[:, :-1]), axis=1)
    z[:, 1:] = np.cumsum(segment_length * np.sin(heading[:, :-1]), axis=1)
    j = (support_index + 1) % n
    px, pz = x[:, support_index], z[:, support_index]
    dx, dz = x[:, j] - px, z[:, j] - pz
    head = np.arctan2(dz, dx)
    c, s = np.cos(head), np.sin(head)
    rx, rz = x - px[:, None], z - pz[:, None]
    lx = c[:, None] * rx + s[:, None] * rz
    lz = -s[:, None] * rx + c[:, None] * rz
    cx = lx.mean(axis=1)
    cz = lz.mean(axis=1)
    xp = cx - cz * math.tan(incline_rad)
    outcome = np.where(xp > segment_length, FORWARD,
                       np.where(xp < 0.0, BACKWARD, NONE)).astype(np.int8)
    margin = np.where(outcome == FORWARD, xp - segment_length,
                      np.where(outcome == BACKWARD, -xp,
                               -np.minimum(xp, segment_length - xp)))
    return outcome, margin, np.column_stack((cx, cz))


def _cell(x, cell_size):
    return int(math.floor(x / cell_size + 1e-9))


def run_strides(depth, count, cell_size, segment_length, land_length, advance,
                pressure, gain, slip, com_x, com_z, rear0, course, max_strides,
                stuck_limit):
    """Stride-by-stride loop of the sand simulator.

    ``depth`` and ``count`` are updated in place.

    Returns:
        (lengths, pitch_deg, outcome, rear, n_steps, stop_reason, error)
        where rear has n_steps + 1 meaningful entries.
    """
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
        depth[i0:i1] += pressure * (1.0 + gain * count[i0:i1])
        count[i0:i1] += 1
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
