"""Vectorized forward-mode dual numbers.

A ``Dual`` carries a value array of shape ``S`` and a derivative array of
shape ``(ndir,) + S`` holding directional derivatives with respect to
``ndir`` seed directions.  All model functions in this package are written
against plain numpy operations plus the helpers below, so the same code
path evaluates either values (ndarray inputs) or values-plus-derivatives
(Dual inputs).  Jacobian assembly seeds one direction per sparsity color.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "Dual",
    "value",
    "seed",
    "exp",
    "log",
    "sqrt",
    "absolute",
    "maximum_floor",
    "where",
    "concatenate",
    "sum_last",
]


def _as_val(x):
    return x.val if isinstance(x, Dual) else x


def _mk(v, der):
    if der.shape[1:] != v.shape:
        der = np.broadcast_to(der, (der.shape[0],) + v.shape)
    return Dual(v, der)


class Dual:
    """Array of first-order dual numbers sharing one set of seed directions."""

    __slots__ = ("val", "der")

    # make ndarray <op> Dual defer to the reflected Dual methods instead of
    # numpy broadcasting Dual into an object array
    __array_ufunc__ = None

    def __init__(self, val, der):
        self.val = np.asarray(val, dtype=float)
        self.der = np.asarray(der, dtype=float)

    @property
    def ndir(self):
        return self.der.shape[0]

    @property
    def shape(self):
        return self.val.shape

    def _pder(self, vndim):
        """Derivative array with value dims padded on the left to vndim."""
        pad = vndim - self.val.ndim
        if pad <= 0:
            return self.der
        return self.der.reshape((self.der.shape[0],) + (1,) * pad + self.val.shape)

    def __getitem__(self, idx):
        if not isinstance(idx, tuple):
            idx = (idx,)
        return Dual(self.val[idx], self.der[(slice(None),) + idx])

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], tuple):
            shape = shape[0]
        return Dual(self.val.reshape(shape),
                    np.ascontiguousarray(self.der).reshape((self.der.shape[0],) + tuple(shape)))

    # -- arithmetic ---------------------------------------------------------

    def __neg__(self):
        return Dual(-self.val, -self.der)

    def __add__(self, other):
        if isinstance(other, Dual):
            v = self.val + other.val
            return _mk(v, self._pder(v.ndim) + other._pder(v.ndim))
        v = self.val + np.asarray(other)
        return _mk(v, self._pder(v.ndim))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Dual):
            v = self.val - other.val
            return _mk(v, self._pder(v.ndim) - other._pder(v.ndim))
        v = self.val - np.asarray(other)
        return _mk(v, self._pder(v.ndim))

    def __rsub__(self, other):
        v = np.asarray(other) - self.val
        return _mk(v, -self._pder(v.ndim))

    def __mul__(self, other):
        if isinstance(other, Dual):
            v = self.val * other.val
            return _mk(v, self._pder(v.ndim) * other.val + other._pder(v.ndim) * self.val)
        o = np.asarray(other, dtype=float)
        v = self.val * o
        return _mk(v, self._pder(v.ndim) * o)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            inv = 1.0 / other.val
            v = self.val * inv
            return _mk(v, (self._pder(v.ndim) - other._pder(v.ndim) * v) * inv)
        inv = 1.0 / np.asarray(other, dtype=float)
        v = self.val * inv
        return _mk(v, self._pder(v.ndim) * inv)

    def __rtruediv__(self, other):
        inv = 1.0 / self.val
        v = np.asarray(other) * inv
        return _mk(v, -self._pder(v.ndim) * (v * inv))

    def __pow__(self, p):
        if isinstance(p, Dual):
            raise TypeError("dual exponents are not supported")
        return Dual(self.val ** p, self.der * (p * self.val ** (p - 1.0)))

    # comparisons act on values; used for upwind switches and guards
    def __lt__(self, other):
        return self.val < _as_val(other)

    def __le__(self, other):
        return self.val <= _as_val(other)

    def __gt__(self, other):
        return self.val > _as_val(other)

    def __ge__(self, other):
        return self.val >= _as_val(other)

    def __repr__(self):
        return f"Dual(val={self.val!r}, ndir={self.der.shape[0]})"


def value(x):
    """Value part of ``x`` (identity for plain arrays/scalars)."""
    return x.val if isinstance(x, Dual) else x


def seed(val, seed_matrix):
    """Dual with derivative array ``seed_matrix`` of shape (ndir,) + val.shape."""
    return Dual(val, seed_matrix)


def _promote(x, ndir, shape):
    if isinstance(x, Dual):
        der = x._pder(len(shape))
        return Dual(np.broadcast_to(x.val, shape),
                    np.broadcast_to(der, (ndir,) + tuple(shape)))
    v = np.broadcast_to(np.asarray(x, dtype=float), shape)
    return Dual(v, np.zeros((ndir,) + tuple(shape)))


def exp(x):
    if isinstance(x, Dual):
        v = np.exp(x.val)
        return Dual(v, x.der * v)
    return np.exp(x)


def log(x):
    if isinstance(x, Dual):
        return Dual(np.log(x.val), x.der / x.val)
    return np.log(x)


def sqrt(x):
    if isinstance(x, Dual):
        v = np.sqrt(x.val)
        return Dual(v, x.der * (0.5 / v))
    return np.sqrt(x)


def absolute(x):
    # derivative at exactly 0 taken as 0; call sites are either smooth in
    # the combination used (see the velocity laws) or never differentiated there
    if isinstance(x, Dual):
        return Dual(np.abs(x.val), x.der * np.sign(x.val))
    return np.abs(x)


def maximum_floor(x, floor):
    """Elementwise max(x, floor) for scalar ``floor``; derivative 0 below it."""
    if isinstance(x, Dual):
        keep = x.val > floor
        return Dual(np.maximum(x.val, floor), x.der * keep)
    return np.maximum(x, floor)


def where(cond, a, b):
    if isinstance(a, Dual) or isinstance(b, Dual):
        ndir = a.ndir if isinstance(a, Dual) else b.ndir
        shape = np.broadcast_shapes(np.shape(cond), np.shape(value(a)), np.shape(value(b)))
        a = _promote(a, ndir, shape)
        b = _promote(b, ndir, shape)
        return Dual(np.where(cond, a.val, b.val),
                    np.where(np.asarray(cond)[None, ...], a.der, b.der))
    return np.where(cond, a, b)


def concatenate(parts, axis=0):
    if any(isinstance(p, Dual) for p in parts):
        ndir = next(p.ndir for p in parts if isinstance(p, Dual))
        parts = [_promote(p, ndir, np.shape(value(p))) for p in parts]
        if axis < 0:
            raise ValueError("use a non-negative axis when concatenating duals")
        return Dual(
            np.concatenate([p.val for p in parts], axis=axis),
            np.concatenate([p.der for p in parts], axis=axis + 1),
        )
    return np.concatenate(parts, axis=axis)


def sum_last(x):
    """Sum over the trailing (component) axis."""
    if isinstance(x, Dual):
        return Dual(np.sum(x.val, axis=-1), np.sum(x.der, axis=-1))
    return np.sum(x, axis=-1)
