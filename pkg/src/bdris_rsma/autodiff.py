"""Reverse-mode automatic differentiation over real and complex numpy arrays.

The engine is a dynamic tape: every operation returns a new :class:`Var`
holding the numpy result, links to its parent nodes and a closure that
maps the output adjoint back onto the parents. Calling :func:`backward`
on a real scalar objective walks the graph once in reverse topological
order and accumulates adjoints into ``Var.grad``.

Gradient convention for complex values: the objective is always a real
scalar, so the gradient with respect to a complex entry z is the pair of
independent partial derivatives (df/dRe z, df/dIm z). We pack that pair
into a single complex number

    grad = df/dRe z + 1j * df/dIm z

which keeps gradients the same shape and dtype as the data. Real-valued
nodes carry plain real gradients. All closed-form adjoint rules below
are written in this packed convention.
"""

from __future__ import annotations

import functools
import itertools

import numpy as np

_LN2 = float(np.log(2.0))
_node_ids = itertools.count()


class DivergenceError(ArithmeticError):
    """Raised when a value that must stay finite becomes nan or inf."""


class Var:
    """A value on the differentiation tape.

    data is a numpy scalar or ndarray, real (float64) or complex
    (complex128). grad stays None until backward() reaches this node.
    Leaf variables are created directly; interior nodes are created by
    the operations in this module and carry a vector-Jacobian closure.
    """

    __slots__ = ("data", "grad", "requires_grad", "tape_id", "_parents", "_vjp")

    def __init__(self, data, requires_grad=False):
        self.data = _as_array(data)
        self.grad = None
        self.requires_grad = bool(requires_grad)
        self.tape_id = next(_node_ids)
        self._parents = ()
        self._vjp = None

    # -- convenience views ------------------------------------------------

    @property
    def re(self):
        return np.real(self.data)

    @property
    def im(self):
        return np.imag(self.data)

    @property
    def shape(self):
        return np.shape(self.data)

    def item(self):
        return complex(self.data) if np.iscomplexobj(self.data) else float(self.data)

    def detach(self):
        """Copy of the value as a fresh constant leaf."""
        return Var(np.array(self.data, copy=True))

    def __repr__(self):
        return f"Var(shape={self.shape}, requires_grad={self.requires_grad})"

    # -- operator sugar ----------------------------------------------------

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, other)

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, other)


def _as_array(x):
    a = np.asarray(x)
    if a.dtype.kind in "iub":
        a = a.astype(np.float64)
    elif a.dtype == np.complex64:
        a = a.astype(np.complex128)
    elif a.dtype == np.float32:
        a = a.astype(np.float64)
    return a


def as_var(x):
    return x if isinstance(x, Var) else Var(x)


def _make(data, parents, vjp):
    """Interior node; requires_grad is inherited from the parents."""
    out = Var.__new__(Var)
    out.data = data
    out.grad = None
    out.requires_grad = any(p.requires_grad for p in parents)
    out.tape_id = next(_node_ids)
    if out.requires_grad:
        out._parents = parents
        out._vjp = vjp
    else:
        out._parents = ()
        out._vjp = None
    return out


def _accum(node, g):
    node.grad = g if node.grad is None else node.grad + g


def backward(objective):
    """Backpropagate from a real scalar objective.

    Adjoints accumulate into .grad of every node that requires a
    gradient, so zero grads before reusing leaves across calls. Returns
    the set of tape ids visited (used to diagnose disconnected targets).
    """
    if np.iscomplexobj(objective.data):
        raise ValueError("objective must be real, got a complex value")
    if np.ndim(objective.data) != 0:
        raise ValueError(f"objective must be scalar, got shape {objective.shape}")

    # Iterative depth-first postorder; recursion would overflow on long
    # unrolled graphs.
    topo = []
    seen = set()
    stack = [(objective, False)]
    while stack:
        node, ready = stack.pop()
        if ready:
            topo.append(node)
            continue
        if node.tape_id in seen:
            continue
        seen.add(node.tape_id)
        stack.append((node, True))
        for p in node._parents:
            if p.requires_grad and p.tape_id not in seen:
                stack.append((p, False))

    objective.grad = np.float64(1.0)
    for node in reversed(topo):
        g = node.grad
        if g is None or node._vjp is None:
            continue
        for parent, pg in zip(node._parents, node._vjp(g)):
            if parent.requires_grad and pg is not None:
                _accum(parent, pg)
    return seen


def grad(objective, targets):
    """Gradients of a real scalar objective with respect to target leaves.

    Returns one numpy array per target, in the packed complex convention
    for complex targets. A target that the objective does not depend on
    at all is an error rather than a silent zero.
    """
    targets = list(targets)
    for t in targets:
        if not t.requires_grad:
            raise ValueError("target does not require a gradient")
    visited = backward(objective)
    out = []
    for i, t in enumerate(targets):
        if t.tape_id not in visited:
            raise ValueError(f"disconnected variable: target {i} is not on the tape of the objective")
        out.append(np.zeros_like(t.data) if t.grad is None else np.asarray(t.grad))
    return out


def _unbroadcast(g, shape):
    """Reduce an adjoint back to the shape of a broadcast operand."""
    g = np.asarray(g)
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for ax, n in enumerate(shape):
        if n == 1 and g.shape[ax] != 1:
            g = g.sum(axis=ax, keepdims=True)
    return g


# -- arithmetic -------------------------------------------------------------


def add(a, b):
    a, b = as_var(a), as_var(b)
    sa, sb = np.shape(a.data), np.shape(b.data)
    return _make(a.data + b.data, (a, b),
                 lambda g: (_unbroadcast(g, sa), _unbroadcast(g, sb)))


def sub(a, b):
    a, b = as_var(a), as_var(b)
    sa, sb = np.shape(a.data), np.shape(b.data)
    return _make(a.data - b.data, (a, b),
                 lambda g: (_unbroadcast(g, sa), _unbroadcast(-g, sb)))


def neg(a):
    a = as_var(a)
    return _make(-a.data, (a,), lambda g: (-g,))


def mul(a, b):
    """Elementwise product. Adjoints follow the packed-pair convention:
    d/da -> g * conj(b)."""
    a, b = as_var(a), as_var(b)
    ad, bd = a.data, b.data
    sa, sb = np.shape(ad), np.shape(bd)
    return _make(ad * bd, (a, b),
                 lambda g: (_unbroadcast(g * np.conj(bd), sa),
                            _unbroadcast(g * np.conj(ad), sb)))


def div(a, b):
    """Elementwise quotient; the denominator must be real."""
    a, b = as_var(a), as_var(b)
    ad, bd = a.data, b.data
    if np.iscomplexobj(bd):
        raise ValueError("division by a complex value is not supported")
    sa, sb = np.shape(ad), np.shape(bd)
    out = ad / bd
    return _make(out, (a, b),
                 lambda g: (_unbroadcast(g / bd, sa),
                            _unbroadcast(-np.real(g * np.conj(out)) / bd, sb)))


def add_n(parts, coeffs=None, bias=None):
    """Weighted sum of same-shaped values in a single node.

    coeffs are fixed real or complex scalars (default all ones); bias is
    a fixed constant added on top. The fan-in adjoint is g * conj(c).
    """
    parts = [as_var(p) for p in parts]
    if coeffs is None:
        data = parts[0].data.copy() if len(parts) > 1 else parts[0].data
        for p in parts[1:]:
            data = data + p.data
        vjp = lambda g: tuple(g for _ in parts)
    else:
        coeffs = [complex(c) if np.iscomplexobj(np.asarray(c)) else float(c) for c in coeffs]
        data = sum(c * p.data for c, p in zip(coeffs, parts))
        vjp = lambda g: tuple(g * np.conj(c) for c in coeffs)
    if bias is not None:
        data = data + bias
    return _make(data, tuple(parts), vjp)


# -- linear algebra ----------------------------------------------------------


def matmul(a, b):
    """Matrix product with numpy semantics for 1-D and 2-D operands."""
    a, b = as_var(a), as_var(b)
    ad, bd = a.data, b.data
    out = ad @ bd

    if ad.ndim == 2 and bd.ndim == 2:
        vjp = lambda g: (g @ np.conj(bd).T, np.conj(ad).T @ g)
    elif ad.ndim == 2 and bd.ndim == 1:
        vjp = lambda g: (np.outer(g, np.conj(bd)), np.conj(ad).T @ g)
    elif ad.ndim == 1 and bd.ndim == 2:
        vjp = lambda g: (g @ np.conj(bd).T, np.outer(np.conj(ad), g))
    elif ad.ndim == 1 and bd.ndim == 1:
        vjp = lambda g: (g * np.conj(bd), g * np.conj(ad))
    else:
        raise ValueError(f"unsupported matmul ranks {ad.ndim} and {bd.ndim}")
    return _make(out, (a, b), vjp)


def vdot(a, b):
    """Inner product conj(a) . b as a scalar node."""
    a, b = as_var(a), as_var(b)
    ad, bd = a.data, b.data
    out = np.vdot(ad, bd)
    return _make(out, (a, b), lambda g: (np.conj(g) * bd, g * ad))


def bilinear_form(v, phi, u):
    """v^T phi u for fixed vectors v, u; differentiable in phi only."""
    phi = as_var(phi)
    v = np.asarray(v)
    u = np.asarray(u)
    coeff = np.outer(v, u)
    out = v @ phi.data @ u
    return _make(out, (phi,), lambda g: (g * np.conj(coeff),))


def conj(a):
    a = as_var(a)
    return _make(np.conj(a.data), (a,), lambda g: (np.conj(g),))


def transpose(a):
    a = as_var(a)
    return _make(a.data.T, (a,), lambda g: (np.asarray(g).T,))


def hermitian(a):
    """Conjugate transpose."""
    a = as_var(a)
    return _make(np.conj(a.data.T), (a,), lambda g: (np.conj(np.asarray(g).T),))


def abs2(a):
    """Elementwise squared modulus; output is real."""
    a = as_var(a)
    ad = a.data
    out = np.real(ad) ** 2 + np.imag(ad) ** 2 if np.iscomplexobj(ad) else ad * ad
    return _make(out, (a,), lambda g: (2.0 * g * ad,))


def absval(a):
    """Elementwise |x| for real input; subgradient 0 at the kink."""
    a = as_var(a)
    ad = a.data
    if np.iscomplexobj(ad):
        raise ValueError("absval expects a real value; use abs2 for complex data")
    return _make(np.abs(ad), (a,), lambda g: (g * np.sign(ad),))


def sumall(a):
    a = as_var(a)
    sh = np.shape(a.data)
    return _make(np.sum(a.data), (a,), lambda g: (np.broadcast_to(g, sh),))


def fro_norm(a):
    """Frobenius norm as a real scalar; gradient 0 at the origin.

    The safe subgradient at 0 matters because symmetry penalties sit at
    exactly zero for symmetric-by-construction phase matrices.
    """
    a = as_var(a)
    ad = a.data
    nrm = float(np.linalg.norm(ad))
    if nrm == 0.0:
        return _make(np.float64(0.0), (a,), lambda g: (np.zeros_like(ad),))
    return _make(np.float64(nrm), (a,), lambda g: (g * ad / nrm,))


# -- elementwise nonlinearities ----------------------------------------------


def log2_1p(a):
    """log2(1 + x) for real x > -1, computed through log1p for stability."""
    a = as_var(a)
    ad = a.data
    return _make(np.log1p(ad) / _LN2, (a,), lambda g: (g / ((1.0 + ad) * _LN2),))


def sigmoid(a):
    a = as_var(a)
    ad = np.asarray(a.data)
    # exp of a non-positive argument on both branches keeps this stable
    ex = np.exp(-np.abs(ad))
    out = np.where(ad >= 0, 1.0 / (1.0 + ex), ex / (1.0 + ex))
    if np.ndim(a.data) == 0:
        out = np.float64(out)
    return _make(out, (a,), lambda g: (g * out * (1.0 - out),))


def relu(a):
    a = as_var(a)
    ad = a.data
    mask = ad > 0
    return _make(ad * mask, (a,), lambda g: (g * mask,))


hinge = relu  # positive part; same function, penalty-flavoured name


def clamp(a, lo, hi):
    """Clip to [lo, hi]; gradient passes only where the input is inside."""
    a = as_var(a)
    ad = a.data
    mask = (ad >= lo) & (ad <= hi)
    return _make(np.clip(ad, lo, hi), (a,), lambda g: (g * mask,))


def exp_j(theta):
    """e^{j theta} for real theta; output is complex with unit modulus."""
    theta = as_var(theta)
    td = theta.data
    if np.iscomplexobj(td):
        raise ValueError("exp_j expects real phase angles")
    out = np.cos(td) + 1j * np.sin(td)
    return _make(out, (theta,), lambda g: (np.imag(g * np.conj(out)),))


def wrap_angle(theta):
    """Reduce angles to [0, 2*pi); gradient is the identity."""
    theta = as_var(theta)
    return _make(np.mod(theta.data, 2.0 * np.pi), (theta,), lambda g: (g,))


# -- structure ops ------------------------------------------------------------


def getitem(a, idx):
    a = as_var(a)
    ad = a.data
    out = ad[idx]

    def vjp(g):
        full = np.zeros_like(ad)
        np.add.at(full, idx, g)
        return (full,)

    return _make(out, (a,), vjp)


def reshape(a, shape):
    a = as_var(a)
    old = np.shape(a.data)
    return _make(np.reshape(a.data, shape), (a,),
                 lambda g: (np.reshape(g, old),))


def columns_to_complex(a):
    """(n, 2) real matrix -> length-n complex vector col0 + j col1."""
    a = as_var(a)
    ad = a.data
    if ad.ndim != 2 or ad.shape[1] != 2:
        raise ValueError(f"expected an (n, 2) array, got shape {ad.shape}")
    out = ad[:, 0] + 1j * ad[:, 1]
    return _make(out, (a,),
                 lambda g: (np.stack([np.real(g), np.imag(g)], axis=1),))


def concat_vec(parts):
    """Concatenate 1-D nodes into one vector."""
    parts = [as_var(p) for p in parts]
    sizes = [np.shape(p.data)[0] for p in parts]
    bounds = np.cumsum([0] + sizes)

    def vjp(g):
        return tuple(g[bounds[i]:bounds[i + 1]] for i in range(len(parts)))

    return _make(np.concatenate([p.data for p in parts]), tuple(parts), vjp)


def diag_embed(v):
    """1-D node -> diagonal matrix."""
    v = as_var(v)
    n = np.shape(v.data)[0]
    return _make(np.diag(v.data), (v,),
                 lambda g: (np.asarray(g)[np.arange(n), np.arange(n)],))


def block_diag_embed(blocks):
    """Square nodes -> one block-diagonal matrix, zeros elsewhere."""
    blocks = [as_var(b) for b in blocks]
    sizes = [np.shape(b.data)[0] for b in blocks]
    for b, s in zip(blocks, sizes):
        if np.shape(b.data) != (s, s):
            raise ValueError(f"blocks must be square, got shape {np.shape(b.data)}")
    n = sum(sizes)
    dtype = np.result_type(*[b.data.dtype for b in blocks])
    data = np.zeros((n, n), dtype=dtype)
    bounds = np.cumsum([0] + sizes)
    for b, lo, hi in zip(blocks, bounds[:-1], bounds[1:]):
        data[lo:hi, lo:hi] = b.data

    def vjp(g):
        g = np.asarray(g)
        return tuple(g[lo:hi, lo:hi] for lo, hi in zip(bounds[:-1], bounds[1:]))

    return _make(data, tuple(blocks), vjp)


@functools.lru_cache(maxsize=None)
def _upper_indices(n):
    return np.triu_indices(n)


def scatter_symmetric(upper, n):
    """Upper-triangle vector (row-major, diagonal included) -> symmetric matrix."""
    upper = as_var(upper)
    iu = _upper_indices(n)
    expect = n * (n + 1) // 2
    if np.shape(upper.data) != (expect,):
        raise ValueError(f"expected {expect} upper-triangle entries for size {n}, "
                         f"got shape {np.shape(upper.data)}")
    m = np.zeros((n, n), dtype=upper.data.dtype)
    m[iu] = upper.data
    m = m + m.T - np.diag(np.diag(m))

    def vjp(g):
        g = np.asarray(g)
        sym = g + g.T
        half_diag = sym[np.arange(n), np.arange(n)] / 2.0
        out = sym[iu].copy()
        out[np.cumsum(np.arange(n, 0, -1)) - np.arange(n, 0, -1)] = half_diag
        return (out,)

    return _make(m, (upper,), vjp)


def gather_upper(mat):
    """Matrix node -> row-major upper-triangle vector (diagonal included).

    Lower-triangle entries are simply dropped, so their adjoint is zero.
    """
    mat = as_var(mat)
    return getitem(mat, _upper_indices(np.shape(mat.data)[0]))
