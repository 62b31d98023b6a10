"""Numba-compiled deformation kernels; same contracts as _numpy.

Plain loops, no fastmath: results must be reproducible run to run, and the
numpy backend serves as the reference the tests compare against.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def bump_profile(points, center, radius):
    npts, dim = points.shape
    vals = np.zeros(npts)
    r2 = radius * radius
    for i in range(npts):
        t = 0.0
        for d in range(dim):
            dx = points[i, d] - center[d]
            t += dx * dx
        t /= r2
        if t < 1.0:
            vals[i] = np.exp(1.0 - 1.0 / (1.0 - t))
    return vals


@njit(cache=True)
def bump_grad_coeff(points, center, radius):
    npts, dim = points.shape
    coeff = np.zeros(npts)
    r2 = radius * radius
    for i in range(npts):
        t = 0.0
        for d in range(dim):
            dx = points[i, d] - center[d]
            t += dx * dx
        t /= r2
        if t < 1.0:
            one_mt = 1.0 - t
            coeff[i] = -2.0 * np.exp(1.0 - 1.0 / one_mt) / (one_mt * one_mt * r2)
    return coeff


@njit(cache=True)
def det_jacobian(points, center, radius, amp):
    npts, dim = points.shape
    det = np.empty(npts)
    r2 = radius * radius
    for i in range(npts):
        t = 0.0
        adx = 0.0
        for d in range(dim):
            dx = points[i, d] - center[d]
            t += dx * dx
            adx += amp[d] * dx
        t /= r2
        if t < 1.0:
            one_mt = 1.0 - t
            w = -2.0 * np.exp(1.0 - 1.0 / one_mt) / (one_mt * one_mt * r2)
            det[i] = 1.0 + w * adx
        else:
            det[i] = 1.0
    return det


@njit(cache=True)
def invert_displacement(targets, center, radius, amp, tol, max_iter):
    npts, dim = targets.shape
    x = targets.copy()
    r2 = radius * radius
    ok = True
    for i in range(npts):
        converged = False
        for _ in range(max_iter):
            t = 0.0
            for d in range(dim):
                dx = x[i, d] - center[d]
                t += dx * dx
            t /= r2
            b = np.exp(1.0 - 1.0 / (1.0 - t)) if t < 1.0 else 0.0
            delta = 0.0
            for d in range(dim):
                new_xd = targets[i, d] - amp[d] * b
                diff = abs(new_xd - x[i, d])
                if diff > delta:
                    delta = diff
                x[i, d] = new_xd
            if delta < tol:
                converged = True
                break
        if not converged:
            ok = False
    return x, ok


@njit(cache=True)
def _interp_1d(values, queries, x0, spacing, n):
    npts = queries.shape[0]
    out = np.zeros(npts, dtype=values.dtype)
    for i in range(npts):
        s = (queries[i, 0] - x0) / spacing
        base = int(np.floor(s))
        t = s - base
        w0 = -t * (t - 1.0) * (t - 2.0) / 6.0
        w1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0
        w2 = -(t + 1.0) * t * (t - 2.0) / 2.0
        w3 = (t + 1.0) * t * (t - 1.0) / 6.0
        i0 = (base - 1) % n
        i1 = base % n
        i2 = (base + 1) % n
        i3 = (base + 2) % n
        out[i] = w0 * values[i0] + w1 * values[i1] + w2 * values[i2] + w3 * values[i3]
    return out


@njit(cache=True)
def _interp_2d(values, queries, x0, spacing, n):
    npts = queries.shape[0]
    out = np.zeros(npts, dtype=values.dtype)
    idx = np.empty((2, 4), dtype=np.int64)
    w = np.empty((2, 4))
    for i in range(npts):
        for axis in range(2):
            s = (queries[i, axis] - x0) / spacing
            base = int(np.floor(s))
            t = s - base
            w[axis, 0] = -t * (t - 1.0) * (t - 2.0) / 6.0
            w[axis, 1] = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0
            w[axis, 2] = -(t + 1.0) * t * (t - 2.0) / 2.0
            w[axis, 3] = (t + 1.0) * t * (t - 1.0) / 6.0
            for o in range(4):
                idx[axis, o] = (base - 1 + o) % n
        acc = values[0, 0] * 0.0
        for a in range(4):
            for b in range(4):
                acc += w[0, a] * w[1, b] * values[idx[0, a], idx[1, b]]
        out[i] = acc
    return out


@njit(cache=True)
def _interp_3d(values, queries, x0, spacing, n):
    npts = queries.shape[0]
    out = np.zeros(npts, dtype=values.dtype)
    idx = np.empty((3, 4), dtype=np.int64)
    w = np.empty((3, 4))
    for i in range(npts):
        for axis in range(3):
            s = (queries[i, axis] - x0) / spacing
            base = int(np.floor(s))
            t = s - base
            w[axis, 0] = -t * (t - 1.0) * (t - 2.0) / 6.0
            w[axis, 1] = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0
            w[axis, 2] = -(t + 1.0) * t * (t - 2.0) / 2.0
            w[axis, 3] = (t + 1.0) * t * (t - 1.0) / 6.0
            for o in range(4):
                idx[axis, o] = (base - 1 + o) % n
        acc = values[0, 0, 0] * 0.0
        for a in range(4):
            for b in range(4):
                wab = w[0, a] * w[1, b]
                for c in range(4):
                    acc += wab * w[2, c] * values[idx[0, a], idx[1, b], idx[2, c]]
        out[i] = acc
    return out


def interp_periodic(values, queries, x0, spacing):
    dim = queries.shape[1]
    vals = np.ascontiguousarray(values)
    if dim == 1:
        return _interp_1d(vals, queries, x0, spacing, values.shape[0])
    if dim == 2:
        return _interp_2d(vals, queries, x0, spacing, values.shape[0])
    return _interp_3d(vals, queries, x0, spacing, values.shape[0])
