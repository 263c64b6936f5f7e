"""The global side over F_q(t): divisors, Riemann-Roch spaces, adelic test
functions, the rational-point sum, and Poisson summation.

The curve is P^1 with the 1-form dt, so div(dt) = -2[inf], genus 0.  A
global test function is a finite set of places with a window at each and a
dense table over the product jet space; it is silently identified with any
enlargement by integral-indicator factors.  The rational-point functional
enumerates the Riemann-Roch space allowed by the windows' pole depths and
sums the table over jets of its members; the Fourier transform is the
placewise jet transform, which forces the place at infinity into the
support (dt has its double pole there).
"""

from __future__ import annotations

import itertools

from .localfield import (
    JetVector,
    Window,
    index_to_jet,
    jet_space_size,
    jet_to_index,
    ops_for,
    transform_axis,
)
from .place import Place, place_data, places_up_to
from .poly import Poly, RationalFn
from .scalars import CycScalar, FieldDescriptor

__all__ = [
    "Divisor",
    "Place",
    "RationalFn",
    "places_up_to",
    "divisor_of",
    "canonical_divisor",
    "rr_basis",
    "rr_space",
    "jet_at",
    "GlobalTestFunction",
    "indicator_everywhere_integral",
    "delta_K",
    "normalize_support",
    "refine_place",
    "extend_place",
    "global_fourier",
    "translate",
    "poisson_report",
    "simple_coset_functions",
    "BudgetExceededError",
]


class BudgetExceededError(RuntimeError):
    """An enumeration would exceed the configured budget."""


# ---------------------------------------------------------------------------
# Divisors and Riemann-Roch spaces
# ---------------------------------------------------------------------------


class Divisor:
    """Finitely supported integer multiplicities on places of P^1."""

    __slots__ = ("field", "mult")

    def __init__(self, field: FieldDescriptor, mult: dict[Place, int] | None = None):
        self.field = field
        self.mult = {u: m for u, m in (mult or {}).items() if m != 0}

    def get(self, u: Place) -> int:
        return self.mult.get(u, 0)

    def places(self) -> list[Place]:
        return sorted(self.mult, key=lambda u: u.sort_key())

    @property
    def degree(self) -> int:
        return sum(m * u.degree for u, m in self.mult.items())

    def __add__(self, other: "Divisor") -> "Divisor":
        out = dict(self.mult)
        for u, m in other.mult.items():
            out[u] = out.get(u, 0) + m
        return Divisor(self.field, out)

    def __neg__(self) -> "Divisor":
        return Divisor(self.field, {u: -m for u, m in self.mult.items()})

    def __sub__(self, other: "Divisor") -> "Divisor":
        return self + (-other)

    def __eq__(self, other):
        return (
            isinstance(other, Divisor)
            and other.field is self.field
            and other.mult == self.mult
        )

    def __hash__(self):
        return hash(
            (
                id(self.field),
                tuple(sorted(self.mult.items(), key=lambda t: t[0].sort_key())),
            )
        )

    def __repr__(self):
        if not self.mult:
            return "0"
        return " + ".join(
            f"{m}[{u!r}]"
            for u, m in sorted(self.mult.items(), key=lambda t: t[0].sort_key())
        )


def divisor_of(f: RationalFn) -> Divisor:
    """The principal divisor div(f); degree 0 by construction."""
    if f.is_zero():
        raise ValueError("the zero function has no divisor")
    field = f.field
    mult: dict[Place, int] = {}
    for pi, m in f.num.factor():
        u = Place.finite(pi)
        mult[u] = mult.get(u, 0) + m
    for pi, m in f.den.factor():
        u = Place.finite(pi)
        mult[u] = mult.get(u, 0) - m
    inf_ord = f.order_at_infinity()
    if inf_ord:
        mult[Place.infinity(field)] = inf_ord
    return Divisor(field, mult)


def canonical_divisor(field: FieldDescriptor) -> Divisor:
    """div(dt) = -2[inf]."""
    return Divisor(field, {Place.infinity(field): -2})


def rr_basis(D: Divisor) -> list[RationalFn]:
    """An F_q-basis of L(D) = {f : v_u(f) >= -D(u) for all u}.

    For divisors effective at every listed place the basis is the partial
    fractions one: monomials t^j up to the infinity multiplicity, then
    t^a / pi_u^j for each finite place.  Otherwise a twisted monomial basis
    spanning the same space is used.  deg D + 1 elements when deg D >= 0,
    none otherwise (genus 0).
    """
    field = D.field
    deg = D.degree
    if deg < 0:
        return []
    inf = Place.infinity(field)
    n_inf = D.get(inf)
    finite = [(u, D.get(u)) for u in D.places() if not u.is_infinite]
    t = Poly.x(field)
    if n_inf >= 0 and all(m >= 0 for _, m in finite):
        basis = [RationalFn(t**j) for j in range(n_inf + 1)]
        for u, m in finite:
            for j in range(1, m + 1):
                for a in range(u.degree):
                    basis.append(RationalFn(t**a, u.poly**j))
    else:
        num = Poly.one(field)
        den = Poly.one(field)
        for u, m in finite:
            if m > 0:
                den = den * u.poly**m
            else:
                num = num * u.poly ** (-m)
        basis = [RationalFn(num * t**j, den) for j in range(deg + 1)]
    if len(basis) != deg + 1:
        raise RuntimeError("Riemann-Roch dimension mismatch; internal error")
    return basis


_RR_CACHE: dict = {}


def rr_space(D: Divisor, max_enum: int = 1 << 20) -> list[RationalFn]:
    """All of L(D), enumerated as F_q-combinations of the basis."""
    got = _RR_CACHE.get(D)
    if got is not None and len(got) <= max_enum:
        return got
    basis = rr_basis(D)
    field = D.field
    if field.q ** len(basis) > max_enum:
        raise BudgetExceededError(
            f"|L(D)| = {field.q}^{len(basis)} exceeds the budget {max_enum}"
        )
    consts = [RationalFn.constant(field, field.from_code(c)) for c in range(field.q)]
    out = []
    for combo in itertools.product(range(field.q), repeat=len(basis)):
        f = RationalFn.zero(field)
        for c, b in zip(combo, basis):
            if c:
                f = f + consts[c] * b
        out.append(f)
    _RR_CACHE[D] = out
    return out


from functools import lru_cache


@lru_cache(maxsize=1 << 16)
def jet_at(f: RationalFn, u: Place, window: Window) -> JetVector:
    """f viewed in the window at u; error if its pole is too deep."""
    pd = place_data(u)
    if not f.is_zero() and u.valuation(f) < -window.N:
        raise ValueError(
            f"pole of order {-u.valuation(f)} exceeds window depth {window.N} at {u!r}"
        )
    s = pd.expand(f, window.M)
    return JetVector(pd, window, [s.at(lev) for lev in range(-window.N, window.M)])


# ---------------------------------------------------------------------------
# Multi-axis tables (private plumbing shared by the global operations)
# ---------------------------------------------------------------------------


class _AxisTable:
    """A dense table with one axis per (place, coordinate)."""

    def __init__(self, axes, values, mode):
        # axes: list of (pd, window); sizes derived
        self.axes = list(axes)
        self.values = list(values)
        self.mode = mode

    def sizes(self):
        return [jet_space_size(pd, w) for pd, w in self.axes]

    def _strides(self, axis):
        sizes = self.sizes()
        pre = 1
        for s in sizes[:axis]:
            pre *= s
        post = 1
        for s in sizes[axis + 1 :]:
            post *= s
        return pre, sizes[axis], post

    def reindex(self, axis, new_window, map_fn):
        """new[.., a, ..] = old[.., map_fn(a), ..]; map_fn None means zero."""
        pd, _ = self.axes[axis]
        pre, D_old, post = self._strides(axis)
        D_new = jet_space_size(pd, new_window)
        zero = ops_for(pd, self.mode).zero()
        lookup = [map_fn(a) for a in range(D_new)]
        out = [zero] * (pre * D_new * post)
        for x in range(pre):
            src_base = x * D_old * post
            dst_base = x * D_new * post
            for a, old_a in enumerate(lookup):
                if old_a is None:
                    continue
                src = src_base + old_a * post
                dst = dst_base + a * post
                out[dst : dst + post] = self.values[src : src + post]
        self.axes[axis] = (pd, new_window)
        self.values = out

    def transform(self, axis):
        pd, w = self.axes[axis]
        pre, _, post = self._strides(axis)
        ops = ops_for(pd, self.mode)
        self.values, dual = transform_axis(self.values, ops, pd, w, pre, post)
        self.axes[axis] = (pd, dual)

    def transform_all(self):
        """Transform every axis; the integer representation is carried
        through the whole chain when it applies."""
        from .localfield import (
            _check_transformable,
            _rep_axis_transform,
            _rep_to_values,
            _to_rep,
        )

        for pd, w in self.axes:
            _check_transformable(pd, w)
        if self.mode == "exact" and self.axes:
            p = self.axes[0][0].base.p
            rep = _to_rep(self.values, p)
            if rep is not None:
                duals = []
                ok = True
                for axis in range(len(self.axes)):
                    pd, w = self.axes[axis]
                    pre, _, post = self._strides(axis)
                    out = _rep_axis_transform(rep, pd, w, pre, post)
                    if out is None:
                        ok = False
                        break
                    rep, dual = out
                    duals.append(dual)
                if ok:
                    self.values = _rep_to_values(rep, p)
                    self.axes = [
                        (pd, dual) for (pd, _), dual in zip(self.axes, duals)
                    ]
                    return
        for axis in range(len(self.axes)):
            self.transform(axis)


# ---------------------------------------------------------------------------
# Global test functions
# ---------------------------------------------------------------------------


def _permute_axes(values, old_sizes, axis_perm):
    """Reorder a flat mixed-radix table: new axis i is old axis axis_perm[i]."""
    new_sizes = [old_sizes[a] for a in axis_perm]
    total = 1
    for s in old_sizes:
        total *= s
    out = [None] * total
    old_strides = []
    acc = 1
    for s in reversed(old_sizes):
        old_strides.append(acc)
        acc *= s
    old_strides.reverse()
    for idx in range(total):
        rem = idx
        digits = []
        for s in reversed(new_sizes):
            digits.append(rem % s)
            rem //= s
        digits.reverse()
        old_idx = 0
        for d, a in zip(digits, axis_perm):
            old_idx += d * old_strides[a]
        out[idx] = values[old_idx]
    return out


class GlobalTestFunction:
    """Support list of (place, window), arity m, dense table.

    Axis order: places in canonical order are the outer index blocks, the m
    coordinates the inner blocks; within one axis jets are enumerated as in
    localfield.  (S, phi) is identified with any enlargement of S by
    integral-indicator factors; normalize_support realizes the enlargement.
    """

    def __init__(self, field, support, arity, values, mode="exact"):
        support = list(support)
        order = sorted(range(len(support)), key=lambda i: support[i][0].sort_key())
        values = list(values)
        if order != list(range(len(support))):
            # permute the table so it matches the canonical place order
            old_sizes = [
                jet_space_size(place_data(u), w) for u, w in support for _ in range(arity)
            ]
            axis_perm = [
                order[block] * arity + coord
                for block in range(len(support))
                for coord in range(arity)
            ]
            values = _permute_axes(values, old_sizes, axis_perm)
            support = [support[i] for i in order]
        self.field = field
        self.places = tuple(pw[0] for pw in support)
        if len(set(self.places)) != len(self.places):
            raise ValueError("duplicate place in support")
        self.windows = tuple(pw[1] for pw in support)
        self.arity = arity
        self.values = values
        self.mode = mode
        if len(self.values) != self.table_size():
            raise ValueError(
                f"table needs {self.table_size()} entries, got {len(self.values)}"
            )

    # -- structure ---------------------------------------------------------------

    def support(self):
        return list(zip(self.places, self.windows))

    def axis_list(self):
        axes = []
        for u, w in zip(self.places, self.windows):
            pd = place_data(u)
            axes.extend([(pd, w)] * self.arity)
        return axes

    def table_size(self) -> int:
        n = 1
        for pd, w in self.axis_list():
            n *= jet_space_size(pd, w)
        return n

    def window_at(self, u: Place) -> Window:
        return self.windows[self.places.index(u)]

    def _ops(self):
        return ops_for(place_data(self.places[0]), self.mode)

    @classmethod
    def _from_axes(cls, field, places, arity, table: _AxisTable):
        support = []
        for i, u in enumerate(places):
            support.append((u, table.axes[i * arity][1]))
        return cls(field, support, arity, table.values, table.mode)

    # -- evaluation ----------------------------------------------------------------

    def value_at_jets(self, jets):
        """jets: per place (canonical order), a list of m coordinate jets."""
        idx = 0
        for (u, w), per_place in zip(self.support(), jets):
            D = jet_space_size(place_data(u), w)
            if len(per_place) != self.arity:
                raise ValueError("coordinate count mismatch")
            for jet in per_place:
                if jet.window != w:
                    raise ValueError("jet window mismatch")
                idx = idx * D + jet_to_index(jet)
        return self.values[idx]

    def evaluate(self, fs):
        """phi(f_1, .., f_m) for rational functions integral outside S."""
        if len(fs) != self.arity:
            raise ValueError("arity mismatch")
        jets = []
        for u, w in self.support():
            per_place = []
            for f in fs:
                if not f.is_zero() and u.valuation(f) < -w.N:
                    return self._ops().zero()
                per_place.append(jet_at(f, u, w))
            jets.append(per_place)
        return self.value_at_jets(jets)

    def scaled(self, factor) -> "GlobalTestFunction":
        return GlobalTestFunction(
            self.field,
            self.support(),
            self.arity,
            [v * factor for v in self.values],
            self.mode,
        )

    def __add__(self, other: "GlobalTestFunction") -> "GlobalTestFunction":
        if (
            self.places != other.places
            or self.windows != other.windows
            or self.arity != other.arity
            or self.mode != other.mode
        ):
            raise ValueError("incompatible global test functions")
        return GlobalTestFunction(
            self.field,
            self.support(),
            self.arity,
            [a + b for a, b in zip(self.values, other.values)],
            self.mode,
        )

    def table_equal(self, other: "GlobalTestFunction") -> bool:
        return (
            self.places == other.places
            and self.windows == other.windows
            and self.arity == other.arity
            and all(a == b for a, b in zip(self.values, other.values))
        )

    # -- serialization ---------------------------------------------------------------

    def to_json(self) -> dict:
        if self.mode != "exact":
            raise ValueError("only exact tables serialize to the wire format")
        return {
            "q": self.field.q,
            "places": [
                {
                    "poly": "inf" if u.is_infinite else list(u.poly.coeffs),
                    "N": w.N,
                    "M": w.M,
                }
                for u, w in self.support()
            ],
            "arity": self.arity,
            "table": [v.to_json() for v in self.values],
        }

    @staticmethod
    def from_json(field: FieldDescriptor, data: dict) -> "GlobalTestFunction":
        if data["q"] != field.q:
            raise ValueError("field size mismatch in serialized function")
        support = []
        for entry in data["places"]:
            if entry["poly"] == "inf":
                u = Place.infinity(field)
            else:
                u = Place.finite(Poly(field, entry["poly"]))
            support.append((u, Window(entry["N"], entry["M"])))
        values = [CycScalar.from_json(field.p, rec) for rec in data["table"]]
        return GlobalTestFunction(field, support, data["arity"], values)


def indicator_everywhere_integral(
    field, places_list, arity: int = 1, mode: str = "exact"
) -> GlobalTestFunction:
    """The product of integral indicators on the given support: on windows
    with no pole depth this is the constant-one table."""
    support = [(u, Window(0, 1)) for u in places_list]
    size = 1
    for u, w in support:
        size *= jet_space_size(place_data(u), w) ** arity
    ops = ops_for(place_data(places_list[0]), mode)
    one = ops.one()
    return GlobalTestFunction(field, support, arity, [one] * size, mode)


# ---------------------------------------------------------------------------
# The operations
# ---------------------------------------------------------------------------


def normalize_support(phi: GlobalTestFunction, extra_places) -> GlobalTestFunction:
    """Enlarge the support by integral-indicator factors at new places."""
    extra = list(extra_places)
    for u in extra:
        if u in phi.places:
            raise ValueError(f"place {u!r} already in the support")
    if not extra:
        return phi
    new_support = phi.support() + [(u, Window(0, 1)) for u in extra]
    new_support.sort(key=lambda pw: pw[0].sort_key())
    # build by tensoring: iterate the new table's indices, read the old value
    order_old = {u: i for i, u in enumerate(phi.places)}
    sizes = []
    mapping = []  # per new axis: old axis index or None
    for u, w in new_support:
        D = jet_space_size(place_data(u), w)
        for coord in range(phi.arity):
            sizes.append(D)
            if u in order_old:
                mapping.append(order_old[u] * phi.arity + coord)
            else:
                mapping.append(None)
    old_sizes = [jet_space_size(pd, w) for pd, w in phi.axis_list()]
    total = 1
    for s in sizes:
        total *= s
    out = []
    for idx in range(total):
        digits = []
        k = idx
        for D in reversed(sizes):
            digits.append(k % D)
            k //= D
        digits.reverse()
        old_idx = 0
        for old_axis in range(len(old_sizes)):
            pos = mapping.index(old_axis)
            old_idx = old_idx * old_sizes[old_axis] + digits[pos]
        out.append(phi.values[old_idx])
    return GlobalTestFunction(phi.field, new_support, phi.arity, out, phi.mode)


def refine_place(phi: GlobalTestFunction, u: Place, new_M: int) -> GlobalTestFunction:
    """Deepen invariance at one place; pulls the table back."""
    i = phi.places.index(u)
    w = phi.windows[i]
    if new_M < w.M:
        raise ValueError("refine cannot shrink the window")
    if new_M == w.M:
        return phi
    pd = place_data(u)
    qd = pd.ku.q
    drop = qd ** (new_M - w.M)
    table = _AxisTable(phi.axis_list(), phi.values, phi.mode)
    for coord in range(phi.arity):
        table.reindex(i * phi.arity + coord, Window(w.N, new_M), lambda a: a // drop)
    return GlobalTestFunction._from_axes(phi.field, phi.places, phi.arity, table)


def extend_place(phi: GlobalTestFunction, u: Place, new_N: int) -> GlobalTestFunction:
    """Deepen the allowed pole at one place; extension by zero."""
    i = phi.places.index(u)
    w = phi.windows[i]
    if new_N < w.N:
        raise ValueError("extend cannot shrink the window")
    if new_N == w.N:
        return phi
    pd = place_data(u)
    qd = pd.ku.q
    new_win = Window(new_N, w.M)
    lead = qd ** (w.levels)

    def mapper(a):
        high, low = divmod(a, lead)
        return low if high == 0 else None

    table = _AxisTable(phi.axis_list(), phi.values, phi.mode)
    for coord in range(phi.arity):
        table.reindex(i * phi.arity + coord, new_win, mapper)
    return GlobalTestFunction._from_axes(phi.field, phi.places, phi.arity, table)


def global_fourier(phi: GlobalTestFunction) -> GlobalTestFunction:
    """Placewise Fourier transform with each place's own nu.

    The support is enlarged to contain infinity (dt is regular and nonzero
    away from it) and windows are refined to M >= nu so that every dual
    window is again a legal window.
    """
    inf = Place.infinity(phi.field)
    if inf not in phi.places:
        phi = normalize_support(phi, [inf])
    for u in phi.places:
        nu = place_data(u).nu
        if phi.window_at(u).M < nu:
            phi = refine_place(phi, u, nu)
    table = _AxisTable(phi.axis_list(), phi.values, phi.mode)
    table.transform_all()
    return GlobalTestFunction._from_axes(phi.field, phi.places, phi.arity, table)


def translate(phi: GlobalTestFunction, a: RationalFn) -> GlobalTestFunction:
    """phi'(x) = phi(x + a) for one-variable functions."""
    if phi.arity != 1:
        raise ValueError("translate handles arity 1")
    if a.is_zero():
        return phi
    # make room: every pole of a must fit into the support windows
    pole_places = [
        (Place.finite(pi), m) for pi, m in a.den.factor()
    ]
    if a.order_at_infinity() < 0:
        pole_places.append((Place.infinity(phi.field), -a.order_at_infinity()))
    new = [u for u, _ in pole_places if u not in phi.places]
    if new:
        phi = normalize_support(phi, new)
    for u, depth in pole_places:
        if phi.window_at(u).N < depth:
            phi = extend_place(phi, u, depth)
    table = _AxisTable(phi.axis_list(), phi.values, phi.mode)
    for i, u in enumerate(phi.places):
        w = phi.window_at(u)
        pd = place_data(u)
        ajet = jet_at(a, u, w)
        if ajet.is_zero():
            continue
        D = jet_space_size(pd, w)
        from .localfield import index_to_jet as _itj

        shift = [jet_to_index(_itj(pd, w, x) + ajet) for x in range(D)]
        table.reindex(i, w, lambda x: shift[x])
    return GlobalTestFunction._from_axes(phi.field, phi.places, phi.arity, table)


def mult_by_residue_character(phi: GlobalTestFunction, a: RationalFn) -> GlobalTestFunction:
    """Pointwise multiply by x -> psi(sum_u r_u(a x_u)).

    The support is enlarged by the poles of a and by infinity, and windows
    are refined until the character is constant on jet cosets, which needs
    M_u >= nu_u - v_u(a)."""
    if phi.arity != 1:
        raise ValueError("character twist handles arity 1")
    if a.is_zero():
        return phi
    extra = [Place.infinity(phi.field)]
    for pi, _ in a.den.factor():
        extra.append(Place.finite(pi))
    new = [u for u in dict.fromkeys(extra) if u not in phi.places]
    if new:
        phi = normalize_support(phi, new)
    for u in phi.places:
        pd = place_data(u)
        need = pd.nu - u.valuation(a)
        if phi.window_at(u).M < need:
            phi = refine_place(phi, u, need)
    ops = phi._ops()
    # per place, the linear form jet -> r_u(a * jet) as level coefficients
    place_exp = []
    for u, w in phi.support():
        pd = place_data(u)
        v_a = u.valuation(a)
        sa = pd.expand(a, pd.nu - (-w.N) + 1)
        ws = pd.omega_series(max(-v_a + w.N + 1, -pd.nu + 1))
        coeffs = []
        for lev in range(-w.N, w.M):
            acc = pd.ku.zero()
            for i in range(v_a, pd.nu - lev):
                wc_idx = -1 - i - lev
                if wc_idx < ws.hi and i < sa.hi:
                    acc = acc + sa.at(i) * ws.at(wc_idx)
            coeffs.append(acc)
        D = jet_space_size(pd, w)
        exps = []
        for idx in range(D):
            jet = index_to_jet(pd, w, idx)
            tot = pd.ku.zero()
            for c, x in zip(coeffs, jet.coeffs):
                if not c.is_zero() and not x.is_zero():
                    tot = tot + c * x
            exps.append(pd.trace_to_base_codes[tot.code])
        place_exp.append(exps)
    sizes = [jet_space_size(place_data(u), w) for u, w in phi.support()]
    values = []
    add_q = phi.field.add_code
    for idx, v in enumerate(phi.values):
        rem = idx
        digits = []
        for D in reversed(sizes):
            digits.append(rem % D)
            rem //= D
        digits.reverse()
        e = 0
        for pl, j in enumerate(digits):
            e = add_q(e, place_exp[pl][j])
        values.append(v * ops.psi_base(e))
    return GlobalTestFunction(phi.field, phi.support(), 1, values, phi.mode)


def scale_variable(phi: GlobalTestFunction, a: RationalFn) -> GlobalTestFunction:
    """phi'(x) = phi(a x); the support is enlarged by div(a)'s places and
    each window moves to (N + v_u(a), M - v_u(a))."""
    if phi.arity != 1:
        raise ValueError("variable scaling handles arity 1")
    if a.is_zero():
        raise ValueError("cannot scale the variable by zero")
    extra = []
    for pi, _ in a.num.factor():
        extra.append(Place.finite(pi))
    for pi, _ in a.den.factor():
        extra.append(Place.finite(pi))
    if a.order_at_infinity() != 0:
        extra.append(Place.infinity(phi.field))
    new = [u for u in dict.fromkeys(extra) if u not in phi.places]
    if new:
        phi = normalize_support(phi, new)
    table = _AxisTable(phi.axis_list(), phi.values, phi.mode)
    new_support = []
    for i, (u, w) in enumerate(phi.support()):
        pd = place_data(u)
        v_a = u.valuation(a)
        new_win = Window(w.N + v_a, w.M - v_a)
        sa = pd.expand(a, w.M + w.N + abs(v_a) + 2)
        D_new = jet_space_size(pd, new_win)
        mapping = []
        for idx in range(D_new):
            xj = index_to_jet(pd, new_win, idx)
            prod = [pd.ku.zero()] * w.levels
            for li, xc in enumerate(xj.coeffs):
                if xc.is_zero():
                    continue
                lev_x = -new_win.N + li
                for ai in range(v_a, w.M - lev_x):
                    k = ai + lev_x
                    if -w.N <= k < w.M and ai < sa.hi:
                        prod[k + w.N] = prod[k + w.N] + sa.at(ai) * xc
            mapping.append(jet_to_index(JetVector(pd, w, prod)))
        table.reindex(i, new_win, lambda x: mapping[x])
        new_support.append((u, new_win))
    return GlobalTestFunction(phi.field, new_support, 1, table.values, phi.mode)


def delta_K(phi: GlobalTestFunction, max_enum: int = 1 << 20):
    """Sum of phi over the rational functions of F_q(t).

    Only members of L(sum_u N_u [u]) can contribute; they are enumerated
    per coordinate and phi is summed over their jets, exactly.
    """
    if phi.mode != "exact":
        raise ValueError("the rational-point sum is specialized; use exact mode")
    field = phi.field
    D = Divisor(field, {u: w.N for u, w in phi.support()})
    members = rr_space(D, max_enum)
    if len(members) ** phi.arity > max_enum:
        raise BudgetExceededError(
            f"enumeration of {len(members)}^{phi.arity} tuples exceeds {max_enum}"
        )
    # jets of every member at every support place, computed once
    jet_idx: list[list[int]] = []
    sizes = []
    for u, w in phi.support():
        pd = place_data(u)
        sizes.append(jet_space_size(pd, w))
        jet_idx.append([jet_to_index(jet_at(f, u, w)) for f in members])
    acc = phi._ops().zero()
    nplaces = len(phi.places)
    for combo in itertools.product(range(len(members)), repeat=phi.arity):
        idx = 0
        for pl in range(nplaces):
            for f_i in combo:
                idx = idx * sizes[pl] + jet_idx[pl][f_i]
        acc = acc + phi.values[idx]
    return acc


def poisson_report(phi: GlobalTestFunction, max_enum: int = 1 << 20) -> dict:
    """Both sides of the summation formula, compared exactly."""
    lhs = delta_K(phi, max_enum)
    rhs = delta_K(global_fourier(phi), max_enum)
    return {"lhs": lhs, "rhs": rhs, "equal": lhs == rhs}


# ---------------------------------------------------------------------------
# The simple-function basis
# ---------------------------------------------------------------------------


def simple_coset_functions(field, places_list, max_window=Window(1, 1)):
    """Every simple coset indicator on the given support with windows
    dominated by max_window: per place a coset a + s^m O with invariance
    depth 0 <= m <= M and pole bound N.  Depth m = M gives single-jet
    indicators; smaller m gives the coarser cosets, down to cosets of O
    itself at m = 0.  Yields (label, function) pairs, all emitted on the
    common window max_window so downstream batch machinery shares caches.
    """
    N, M = max_window.N, max_window.M
    pds = [place_data(u) for u in places_list]
    per_place_choices = []
    for u, pd in zip(places_list, pds):
        qd = pd.ku.q
        D = jet_space_size(pd, max_window)
        choices = []
        # invariance depth m = M: single-jet indicators
        for j in range(D):
            choices.append((f"m{M}:{j}", (j,), 1))
        # coarser invariance depths m < M: cosets of s^m O
        for m in range(M - 1, -1, -1):
            block = qd ** (M - m)
            for lead in range(qd ** (N + m)):
                jets = tuple(lead * block + r for r in range(block))
                choices.append((f"m{m}:{lead}", jets, block))
        per_place_choices.append(choices)
    ops = ops_for(pds[0], "exact")
    one, zero = ops.one(), ops.zero()
    sizes = [jet_space_size(pd, max_window) for pd in pds]
    for combo in itertools.product(*per_place_choices):
        label = ",".join(f"{u!r}:{c[0]}" for u, c in zip(places_list, combo))
        values = [zero] * _prod(sizes)
        # fill the product of jet sets
        for jets in itertools.product(*[c[1] for c in combo]):
            idx = 0
            for D, j in zip(sizes, jets):
                idx = idx * D + j
            values[idx] = one
        yield label, GlobalTestFunction(
            field, [(u, max_window) for u in places_list], 1, values
        )


def _prod(xs):
    n = 1
    for x in xs:
        n *= x
    return n
