"""Jet windows, local test functions, residue pairings, Fourier transforms.

A window (N, M) at a place of residue degree d is the finite group
s^(-N) O / s^M O, an F_q-space of dimension d(N+M).  Test functions are
dense tables over jets; values are CycScalar (exact mode) or MotivicClass
(symbolic mode).  The transform uses the residue pairing against dt,

    F(phi)(x) = q^(d*nu/2) * q^(-d*M) * sum_y phi(y) psi(r(x y)),

whose output window is (M - nu, N + nu); with this normalization the
inversion F(F(phi))(x) = phi(-x) and the Riemann-Roch scalar in the global
theory hold exactly.  Fast path: tables are converted to integer vectors
over the zeta_p-power basis and contracted as numpy int64 tensors; this is
exact integer arithmetic, falling back to pure-object arithmetic whenever
values do not fit.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm

import numpy as np

from .place import PlaceData
from .scalars import CycScalar, FieldElem, cyc_normalize

_INT64_GUARD = 1 << 60


@dataclass(frozen=True)
class Window:
    """Pole depth N and invariance depth M; jets live in s^-N O / s^M O."""

    N: int
    M: int

    def __post_init__(self):
        if self.N + self.M < 0:
            raise ValueError("window must satisfy N + M >= 0")

    @property
    def levels(self) -> int:
        return self.N + self.M

    def dual(self, nu: int) -> "Window":
        return Window(self.M - nu, self.N + nu)

    def dominates(self, other: "Window") -> bool:
        return self.N >= other.N and self.M >= other.M


class JetVector:
    """One coordinate's jet: residue-field coefficients for s^-N .. s^(M-1)."""

    __slots__ = ("pd", "window", "coeffs")

    def __init__(self, pd: PlaceData, window: Window, coeffs):
        coeffs = tuple(coeffs)
        if len(coeffs) != window.levels:
            raise ValueError(
                f"need {window.levels} coefficients for window {window}, got {len(coeffs)}"
            )
        self.pd = pd
        self.window = window
        self.coeffs = coeffs

    def coeff(self, level: int) -> FieldElem:
        if not -self.window.N <= level < self.window.M:
            raise ValueError("level outside window")
        return self.coeffs[level + self.window.N]

    def __add__(self, other: "JetVector") -> "JetVector":
        self._compat(other)
        return JetVector(
            self.pd, self.window, [a + b for a, b in zip(self.coeffs, other.coeffs)]
        )

    def __sub__(self, other: "JetVector") -> "JetVector":
        self._compat(other)
        return JetVector(
            self.pd, self.window, [a - b for a, b in zip(self.coeffs, other.coeffs)]
        )

    def __neg__(self) -> "JetVector":
        return JetVector(self.pd, self.window, [-a for a in self.coeffs])

    def _compat(self, other):
        if other.pd is not self.pd or other.window != self.window:
            raise ValueError("jet vectors from different windows")

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)

    def __eq__(self, other):
        return (
            isinstance(other, JetVector)
            and other.pd is self.pd
            and other.window == self.window
            and other.coeffs == self.coeffs
        )

    def __hash__(self):
        return hash((id(self.pd), self.window, self.coeffs))

    def __repr__(self):
        return f"jet{[c.code for c in self.coeffs]}@{self.pd.label}({self.window.N},{self.window.M})"


# -- jet enumeration ---------------------------------------------------------


def jet_space_size(pd: PlaceData, window: Window) -> int:
    return pd.ku.q ** window.levels


def jet_to_index(jet: JetVector) -> int:
    q = jet.pd.ku.q
    idx = 0
    for c in jet.coeffs:
        idx = idx * q + c.code
    return idx


def index_to_jet(pd: PlaceData, window: Window, idx: int) -> JetVector:
    q = pd.ku.q
    codes = []
    for _ in range(window.levels):
        codes.append(idx % q)
        idx //= q
    codes.reverse()
    return JetVector(pd, window, [pd.ku.from_code(c) for c in codes])


def alpha_encode(pd: PlaceData, window: Window, coeffs) -> JetVector:
    """Assemble a jet from d(N+M) base-field coefficients, d per level."""
    d = pd.d
    coeffs = [pd.base.elem(c) for c in coeffs]
    if len(coeffs) != d * window.levels:
        raise ValueError(
            f"need {d * window.levels} base-field coefficients, got {len(coeffs)}"
        )
    out = []
    for lev in range(window.levels):
        vec = tuple(c.code for c in coeffs[lev * d : (lev + 1) * d])
        out.append(pd.from_coords(vec))
    return JetVector(pd, window, out)


def alpha_decode(jet: JetVector) -> list[FieldElem]:
    base = jet.pd.base
    out = []
    for c in jet.coeffs:
        out.extend(base.from_code(code) for code in jet.pd.coords(c))
    return out


# -- residues -----------------------------------------------------------------


def residue(f, pd: PlaceData) -> FieldElem:
    """res_u(f dt) as a residue-field element; f rational or a jet."""
    nu = pd.nu
    if isinstance(f, JetVector):
        if f.window.M < nu:
            raise ValueError(
                f"jet depth M={f.window.M} cannot determine the residue (need M >= {nu})"
            )
        w = pd.omega_series(f.window.N + 1)
        acc = pd.ku.zero()
        for lev in range(-f.window.N, min(f.window.M, nu)):
            wc = w.at(-1 - lev)
            if not wc.is_zero():
                acc = acc + f.coeff(lev) * wc
        return acc
    fs = pd.expand(f, nu + 2)
    v = fs.ord()
    ws = pd.omega_series(nu + 2 + max(0, -(v if v is not None else 0)))
    return (fs * ws).at(-1)


def residue_trace(f, pd: PlaceData) -> FieldElem:
    """r(f) = Tr_{k_u/F_q} res_u(f dt), the base-field residue functional."""
    z = residue(f, pd)
    return pd.base.from_code(pd.trace_to_base_codes[z.code])


def pairing_matrix(pd: PlaceData, out_win: Window, in_win: Window):
    """W[i][j] = omega coefficient pairing output level i with input level j.

    r(x y) = Tr sum_{i,j} x_i y_j w_(-1-i-j); entries are k_u codes.
    """
    cache = getattr(pd, "_pairing_cache", None)
    if cache is None:
        cache = pd._pairing_cache = {}
    key = (out_win, in_win)
    got = cache.get(key)
    if got is not None:
        return got
    hi = out_win.N + in_win.N + 1
    w = pd.omega_series(max(hi, -pd.nu + 1))
    rows = []
    for ipos in range(out_win.levels):
        i = -out_win.N + ipos
        row = []
        for jpos in range(in_win.levels):
            j = -in_win.N + jpos
            k = -1 - i - j
            row.append(w.at(k).code if k < w.hi else 0)
        rows.append(row)
    cache[key] = rows
    return rows


# -- value modes ---------------------------------------------------------------


class ExactOps:
    """CycScalar-valued tables: psi via absolute trace, q-powers as Fractions."""

    mode = "exact"

    def __init__(self, pd: PlaceData):
        self.pd = pd
        p = pd.base.p
        self.p = p
        self._zeta = [CycScalar.zeta_power(p, k) for k in range(p)]
        from .scalars import trace

        self._base_exp = [trace(pd.base.from_code(c), 1).code for c in range(pd.base.q)]

    def zero(self):
        return CycScalar.zero(self.p)

    def one(self):
        return CycScalar.one(self.p)

    def psi_base(self, code: int):
        return self._zeta[self._base_exp[code]]

    def q_power(self, k: int):
        return CycScalar.rational(self.p, Fraction(self.pd.base.q) ** k)

    def scale(self, v, k: int):
        return v * Fraction(self.pd.base.q) ** k


class SymbolicOps:
    """MotivicClass-valued tables; psi(c) is the point class [{c}, Id]."""

    mode = "symbolic"

    def __init__(self, pd: PlaceData):
        from . import motivic

        self.pd = pd
        self._motivic = motivic

    def zero(self):
        return self._motivic.MotivicClass.zero(self.pd.base)

    def one(self):
        return self._motivic.MotivicClass.one(self.pd.base)

    def psi_base(self, code: int):
        return self._motivic.psi_class(self.pd.base.from_code(code))

    def q_power(self, k: int):
        return self._motivic.MotivicClass.one(self.pd.base).shift_L(k)

    def scale(self, v, k: int):
        return v.shift_L(k)


def ops_for(pd: PlaceData, mode: str):
    return ExactOps(pd) if mode == "exact" else SymbolicOps(pd)


# -- the transform engine -------------------------------------------------------


def _char_kernel_tensors(pd: PlaceData):
    """Rotation tensor for the dot-pairing transform over k_u, plus tables.
    Cached on the place data; building them is much dearer than using them."""
    cached = getattr(pd, "_kernel_tensors", None)
    if cached is not None:
        return cached
    q, p = pd.ku.q, pd.base.p
    exps = pd.psi_exponents
    pd.ku._ensure_tables()
    if pd.ku._mul_table is not None:
        mul = np.array(pd.ku._mul_table, dtype=np.int64).reshape(q, q)
        add = np.array(pd.ku._add_table, dtype=np.int64).reshape(q, q)
    else:
        mul = np.array(
            [[pd.ku.mul_code(a, b) for b in range(q)] for a in range(q)], dtype=np.int64
        )
        add = np.array(
            [[pd.ku.add_code(a, b) for b in range(q)] for a in range(q)], dtype=np.int64
        )
    E = np.array(exps, dtype=np.int64)[mul]  # E[b, a] = exponent of Tr(z_b z_a)
    ker = np.zeros((q, q, p, p), dtype=np.int64)
    for b in range(q):
        for a in range(q):
            r = int(E[b, a])
            for pi in range(p):
                ker[b, a, (pi + r) % p, pi] = 1
    pd._kernel_tensors = (ker, mul, add)
    return pd._kernel_tensors


_DIGIT_CACHE: dict[tuple[int, int], np.ndarray] = {}


def _digit_matrix(Q: int, K: int) -> np.ndarray:
    """digits[idx, pos] of idx written base Q with K digits, big-endian."""
    key = (Q, K)
    got = _DIGIT_CACHE.get(key)
    if got is not None:
        return got
    D = Q**K
    digits = np.empty((D, K), dtype=np.int64)
    idx = np.arange(D)
    for pos in range(K - 1, -1, -1):
        digits[:, pos] = idx % Q
        idx //= Q
    _DIGIT_CACHE[key] = digits
    return digits


def _values_to_int(values, p: int):
    """Common-denominator integer vectors over zeta^0..zeta^(p-1)."""
    den = 1
    for v in values:
        for c in v.coeffs:
            d = c.denominator
            if d != 1 and den % d:
                den = lcm(den, d)
    arr = np.zeros((len(values), p), dtype=np.int64)
    bound = 0
    for i, v in enumerate(values):
        for j, c in enumerate(v.coeffs):
            n = c.numerator * (den // c.denominator)
            arr[i, j] = n
            if n > bound or -n > bound:
                bound = abs(n)
    return arr, den, bound


def _int_to_values(arr, den: int, p: int):
    memo: dict = {}
    out = []
    for row in arr:
        key = row.tobytes()
        v = memo.get(key)
        if v is None:
            v = cyc_normalize(p, [Fraction(int(c), den) for c in row])
            memo[key] = v
        out.append(v)
    return out


class _IntRep:
    """Exact integer image of a value table: arr[i] / den on the zeta-power
    basis (length p, unnormalized); carried through multi-axis transforms to
    avoid rebuilding exact scalars at every step."""

    __slots__ = ("arr", "den")

    def __init__(self, arr, den: int):
        self.arr = arr
        self.den = den


def _to_rep(values, p: int) -> _IntRep | None:
    try:
        arr, den, bound = _values_to_int(values, p)
    except (OverflowError, ValueError):
        return None
    if bound >= _INT64_GUARD:
        return None
    return _IntRep(arr, den)


def _rep_to_values(rep: _IntRep, p: int):
    return _int_to_values(rep.arr, rep.den, p)


def _rep_axis_transform(rep: _IntRep, pd: PlaceData, win: Window, pre: int, post: int):
    """One jet-space axis of the integer table; returns (rep, dual) or None
    when the intermediate could overflow int64."""
    p = pd.base.p
    nu = pd.nu
    K = win.levels
    dual = win.dual(nu)
    Q = pd.ku.q
    D = Q**K
    bound = int(np.abs(rep.arr).max(initial=0))
    if bound * (Q**K) * 4 >= _INT64_GUARD:
        return None
    ker, mul, add = _char_kernel_tensors(pd)
    ker2 = getattr(pd, "_kernel_matmul", None)
    if ker2 is None:
        ker2 = pd._kernel_matmul = np.ascontiguousarray(
            ker.transpose(1, 3, 0, 2).reshape(Q * p, Q * p)
        )
    work = rep.arr.reshape(pre, *([Q] * K), post, p)
    for axis in range(1, K + 1):
        work = np.moveaxis(work, axis, len(work.shape) - 2)
        shape = work.shape
        flat = work.reshape(-1, Q * p) @ ker2
        work = np.moveaxis(flat.reshape(shape), len(shape) - 2, axis)
    g = work.reshape(pre, D, post, p)

    # map output jets x to their dual coordinates u(x), then gather
    W = pairing_matrix(pd, dual, win)
    digits = _digit_matrix(Q, K)
    g_idx = np.zeros(D, dtype=np.int64)
    for jpos in range(K):
        acc = np.zeros(D, dtype=np.int64)
        for ipos in range(K):
            code = W[ipos][jpos]
            if code:
                acc = add[acc, mul[digits[:, ipos], code]]
        g_idx = g_idx * Q + acc
    out = g[:, g_idx, :, :]

    scale = Fraction(pd.base.q) ** (pd.d * (nu // 2 - win.M))
    den_out = rep.den * scale.denominator
    if scale.numerator != 1:
        out = out * scale.numerator
    return _IntRep(np.ascontiguousarray(out.reshape(-1, p)), den_out), dual


def _generic_axis_transform(values, ops, pd: PlaceData, win: Window, pre: int, post: int):
    """Direct double-sum transform; works for any value ring."""
    nu = pd.nu
    dual = win.dual(nu)
    Q = pd.ku.q
    K = win.levels
    D = Q**K
    W = pairing_matrix(pd, dual, win)
    tr = pd.trace_to_base_codes
    mul_code, add_code = pd.ku.mul_code, pd.ku.add_code
    # psi(r(x y)) for jet index pairs, via the bilinear coefficient matrix
    in_digits = []
    for idx in range(D):
        digs, k = [], idx
        for _ in range(K):
            digs.append(k % Q)
            k //= Q
        digs.reverse()
        in_digits.append(digs)
    kernel_exp = [[0] * D for _ in range(D)]
    for xi in range(D):
        xd = in_digits[xi]
        for yi in range(D):
            yd = in_digits[yi]
            acc = 0
            for i in range(K):
                xc = xd[i]
                if xc:
                    row = W[i]
                    for j in range(K):
                        wc = row[j]
                        if wc and yd[j]:
                            acc = add_code(acc, mul_code(mul_code(xc, wc), yd[j]))
            kernel_exp[xi][yi] = tr[acc]
    psi_vals = [ops.psi_base(c) for c in range(pd.base.q)]
    shift = pd.d * (nu // 2 - win.M)
    out = []
    block = D * post
    for x in range(pre):
        base_off = x * block
        for xi in range(D):
            for y in range(post):
                acc = ops.zero()
                row = kernel_exp[xi]
                for yi in range(D):
                    v = values[base_off + yi * post + y]
                    acc = acc + v * psi_vals[row[yi]]
                out.append(ops.scale(acc, shift))
    return out, dual


def _check_transformable(pd: PlaceData, win: Window):
    if win.M < pd.nu:
        raise ValueError(
            f"window (N={win.N}, M={win.M}) too shallow for nu={pd.nu}; refine first"
        )
    if pd.nu % 2 != 0:
        raise ValueError("odd duality exponent nu is not supported")


def transform_axis(values, ops, pd: PlaceData, win: Window, pre: int, post: int):
    _check_transformable(pd, win)
    if ops.mode == "exact":
        rep = _to_rep(values, pd.base.p)
        if rep is not None:
            fast = _rep_axis_transform(rep, pd, win, pre, post)
            if fast is not None:
                out_rep, dual = fast
                return _rep_to_values(out_rep, pd.base.p), dual
    return _generic_axis_transform(values, ops, pd, win, pre, post)


# -- local test functions ---------------------------------------------------------


class LocalTestFunction:
    """Dense value table on (jet space)^arity at a single place.

    Axis order: coordinate 0 is the most significant index block.
    """

    def __init__(self, pd: PlaceData, window: Window, arity: int, values, mode="exact"):
        size = jet_space_size(pd, window) ** arity
        values = list(values)
        if len(values) != size:
            raise ValueError(f"table needs {size} entries, got {len(values)}")
        self.pd = pd
        self.window = window
        self.arity = arity
        self.values = values
        self.mode = mode

    # -- constructors --------------------------------------------------------

    @classmethod
    def from_function(cls, pd, window, fn, arity=1, mode="exact"):
        D = jet_space_size(pd, window)
        vals = []
        for idx in range(D**arity):
            jets, k = [], idx
            for _ in range(arity):
                jets.append(k % D)
                k //= D
            jets.reverse()
            vals.append(fn(*[index_to_jet(pd, window, j) for j in jets]))
        return cls(pd, window, arity, vals, mode)

    @classmethod
    def indicator_integral(cls, pd, window, arity=1, mode="exact"):
        """1 on (O)^arity cap window, 0 elsewhere."""
        ops = ops_for(pd, mode)
        one, zero = ops.one(), ops.zero()

        def fn(*jets):
            for jet in jets:
                for lev in range(-window.N, 0):
                    if not jet.coeff(lev).is_zero():
                        return zero
            return one

        return cls.from_function(pd, window, fn, arity, mode)

    @classmethod
    def delta(cls, pd, window, jet_index: int, mode="exact"):
        ops = ops_for(pd, mode)
        D = jet_space_size(pd, window)
        vals = [ops.zero()] * D
        vals[jet_index] = ops.one()
        phi = cls(pd, window, 1, vals, mode)
        if mode == "exact":
            arr = np.zeros((D, pd.base.p), dtype=np.int64)
            arr[jet_index, 0] = 1
            phi._int_rep = _IntRep(arr, 1)
        return phi

    @classmethod
    def zero_function(cls, pd, window, arity=1, mode="exact"):
        ops = ops_for(pd, mode)
        D = jet_space_size(pd, window) ** arity
        return cls(pd, window, arity, [ops.zero()] * D, mode)

    # -- table access -----------------------------------------------------------

    def value_at(self, *jets: JetVector):
        if len(jets) != self.arity:
            raise ValueError("wrong number of coordinates")
        idx = 0
        D = jet_space_size(self.pd, self.window)
        for jet in jets:
            if jet.window != self.window:
                raise ValueError("jet window mismatch")
            idx = idx * D + jet_to_index(jet)
        return self.values[idx]

    def scaled(self, factor) -> "LocalTestFunction":
        return LocalTestFunction(
            self.pd, self.window, self.arity, [v * factor for v in self.values], self.mode
        )

    def __add__(self, other: "LocalTestFunction") -> "LocalTestFunction":
        if (
            other.pd is not self.pd
            or other.window != self.window
            or other.arity != self.arity
            or other.mode != self.mode
        ):
            raise ValueError("incompatible test functions")
        return LocalTestFunction(
            self.pd,
            self.window,
            self.arity,
            [a + b for a, b in zip(self.values, other.values)],
            self.mode,
        )

    def table_equal(self, other: "LocalTestFunction") -> bool:
        return (
            self.window == other.window
            and self.arity == other.arity
            and all(a == b for a, b in zip(self.values, other.values))
        )


def integrate(phi: LocalTestFunction):
    """L^(-M) normalized sum per coordinate: q^(-d M m) * sum of the table."""
    ops = ops_for(phi.pd, phi.mode)
    acc = ops.zero()
    for v in phi.values:
        acc = acc + v
    return ops.scale(acc, -phi.pd.d * phi.window.M * phi.arity)


def extend_zero(phi: LocalTestFunction, new_N: int) -> LocalTestFunction:
    """Deepen the allowed pole; the function is extended by zero."""
    if new_N < phi.window.N:
        raise ValueError("extend_zero cannot shrink the window")
    if new_N == phi.window.N:
        return phi
    ops = ops_for(phi.pd, phi.mode)
    new_win = Window(new_N, phi.window.M)
    extra = new_N - phi.window.N

    def fn(*jets):
        old_jets = []
        for jet in jets:
            for lev in range(-new_N, -phi.window.N):
                if not jet.coeff(lev).is_zero():
                    return ops.zero()
            old_jets.append(
                JetVector(phi.pd, phi.window, jet.coeffs[extra:])
            )
        return phi.value_at(*old_jets)

    return LocalTestFunction.from_function(phi.pd, new_win, fn, phi.arity, phi.mode)


def refine(phi: LocalTestFunction, new_M: int) -> LocalTestFunction:
    """Deepen invariance; the table is pulled back along the projection."""
    if new_M < phi.window.M:
        raise ValueError("refine cannot shrink the window")
    if new_M == phi.window.M:
        return phi
    new_win = Window(phi.window.N, new_M)

    def fn(*jets):
        old = [
            JetVector(phi.pd, phi.window, jet.coeffs[: phi.window.levels])
            for jet in jets
        ]
        return phi.value_at(*old)

    return LocalTestFunction.from_function(phi.pd, new_win, fn, phi.arity, phi.mode)


def restrict(phi: LocalTestFunction, new_M: int) -> LocalTestFunction:
    """Partial inverse of refine: forget levels >= new_M (table must be
    constant on the forgotten cosets for this to be faithful)."""
    if new_M > phi.window.M:
        raise ValueError("restrict cannot grow the window")
    new_win = Window(phi.window.N, new_M)
    pad = phi.window.M - new_M
    zero_tail = [phi.pd.ku.zero()] * pad

    def fn(*jets):
        lifted = [
            JetVector(phi.pd, phi.window, jet.coeffs + tuple(zero_tail)) for jet in jets
        ]
        return phi.value_at(*lifted)

    return LocalTestFunction.from_function(phi.pd, new_win, fn, phi.arity, phi.mode)


def fourier1(phi: LocalTestFunction) -> LocalTestFunction:
    """Fourier transform of a one-variable local test function."""
    if phi.arity != 1:
        raise ValueError("fourier1 handles arity 1; use fourier_multi")
    return fourier_multi(phi)


def fourier_multi(phi: LocalTestFunction) -> LocalTestFunction:
    """Transform all coordinates, one axis at a time."""
    pd, win = phi.pd, phi.window
    _check_transformable(pd, win)
    D = jet_space_size(pd, win)
    dual = win.dual(pd.nu)
    if phi.mode == "exact":
        rep = getattr(phi, "_int_rep", None)
        if rep is None:
            rep = _to_rep(phi.values, pd.base.p)
        if rep is not None:
            ok = True
            for axis in range(phi.arity):
                fast = _rep_axis_transform(
                    rep, pd, win, D**axis, D ** (phi.arity - axis - 1)
                )
                if fast is None:
                    ok = False
                    break
                rep = fast[0]
            if ok:
                out = LocalTestFunction(
                    pd, dual, phi.arity, _rep_to_values(rep, pd.base.p), phi.mode
                )
                out._int_rep = rep
                return out
    ops = ops_for(pd, phi.mode)
    values = phi.values
    for axis in range(phi.arity):
        pre = D**axis
        post = D ** (phi.arity - axis - 1)
        values, _ = _generic_axis_transform(values, ops, pd, win, pre, post)
    return LocalTestFunction(pd, dual, phi.arity, values, phi.mode)


def residue_pair(x: JetVector, y: JetVector) -> FieldElem:
    """r(x y) in the base field, for x on the dual window of y's."""
    pd = x.pd
    W = pairing_matrix(pd, x.window, y.window)
    acc = 0
    for i in range(x.window.levels):
        xc = x.coeffs[i].code
        if xc:
            row = W[i]
            for j in range(y.window.levels):
                wc = row[j]
                yc = y.coeffs[j].code
                if wc and yc:
                    acc = pd.ku.add_code(acc, pd.ku.mul_code(pd.ku.mul_code(xc, wc), yc))
    return pd.base.from_code(pd.trace_to_base_codes[acc])


def fourier_direct(phi: LocalTestFunction) -> LocalTestFunction:
    """Brute-force multi-coordinate transform straight from the definition;
    kept as a cross-check oracle for fourier_multi."""
    ops = ops_for(phi.pd, phi.mode)
    pd, win, m = phi.pd, phi.window, phi.arity
    if win.M < pd.nu:
        raise ValueError("window too shallow for nu; refine first")
    dual = win.dual(pd.nu)
    D = jet_space_size(pd, win)
    psi_vals = [ops.psi_base(c) for c in range(pd.base.q)]
    add_q = pd.base.add_code

    def jets_of(idx, window):
        parts, k = [], idx
        for _ in range(m):
            parts.append(k % D)
            k //= D
        parts.reverse()
        return [index_to_jet(pd, window, j) for j in parts]

    shift = pd.d * (pd.nu // 2 - win.M) * m
    out = []
    for xidx in range(D**m):
        xjets = jets_of(xidx, dual)
        acc = ops.zero()
        for yidx in range(D**m):
            yjets = jets_of(yidx, win)
            e = 0
            for xj, yj in zip(xjets, yjets):
                e = add_q(e, residue_pair(xj, yj).code)
            acc = acc + phi.values[yidx] * psi_vals[e]
        out.append(ops.scale(acc, shift))
    return LocalTestFunction(pd, dual, m, out, phi.mode)
