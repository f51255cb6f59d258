"""Direct finite-difference eigensolver for the linearised channel problem.

Unknowns per node, in this order::

    u, v, a11, a12, a22, Omega, Z, L, M

stored node-major so that the pencil ``lambda M q = N q`` is banded.  Stress
perturbations are Reynolds-scaled, ``Omega`` is the perturbation of the total
pressure (magnetic part included) minus ``Z_hat alpha22 + Z alpha22_hat``.
The pressure row is the discrete divergence of the discrete momentum rows,
so the discrete velocity field is exactly solenoidal at interior nodes.
"""

from __future__ import annotations

import concurrent.futures as cf
import warnings
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.linalg import lapack

from .asymptotics import EigenFamily
from .baseflow import BaseFlow
from .config import ModelParams
from .errors import (AssemblyError, DomainError, FactorizationSingular,
                     NoConvergence, ValidationError)
from .lincoeff import PROFILE_NAMES, LinearCoefficients

FIELDS = ("u", "v", "a11", "a12", "a22", "Omega", "Z", "L", "M")
NF = len(FIELDS)
_F = {name: i for i, name in enumerate(FIELDS)}
WALL_FIELDS = ("u", "v", "Z", "L", "M")
DENSE_LIMIT = 600
ROUGHNESS_LIMIT = 0.25
DIVERGENCE_LIMIT = 1e-4


@dataclass(frozen=True)
class Pencil:
    n: int
    bandwidth: tuple
    M_mat: sp.csr_matrix
    N_mat: sp.csr_matrix
    bc_rows: np.ndarray
    omega: float = float("nan")
    h: float = float("nan")

    @property
    def dim(self) -> int:
        return self.N_mat.shape[0]

    @classmethod
    def from_matrices(cls, M, N, bc_rows=()) -> "Pencil":
        """Wrap an arbitrary (small) matrix pair, e.g. for solver checks."""
        M = sp.csr_matrix(np.asarray(M, dtype=complex) if not sp.issparse(M) else M, dtype=complex)
        N = sp.csr_matrix(np.asarray(N, dtype=complex) if not sp.issparse(N) else N, dtype=complex)
        if M.shape != N.shape or M.shape[0] != M.shape[1]:
            raise AssemblyError("M and N must be square and of equal shape")
        return cls(n=M.shape[0], bandwidth=_bandwidth(M, N), M_mat=M, N_mat=N,
                   bc_rows=np.asarray(bc_rows, dtype=int))

    def field_view(self, q: np.ndarray, name: str) -> np.ndarray:
        return q[_F[name]::NF]


@dataclass(frozen=True)
class EigenPair:
    lam: complex
    q: np.ndarray
    residual: float
    divergence_diag: float = float("nan")
    roughness: float = float("nan")
    k_seed: int = 0
    seed: complex = complex("nan")
    convention: str = ""
    seed_distance: float = float("nan")
    k_nearest: int = 0
    status: str = "accepted"


def _bandwidth(*mats):
    kl = ku = 0
    for m in mats:
        c = m.tocoo()
        if c.nnz:
            kl = max(kl, int(np.max(c.row - c.col)))
            ku = max(ku, int(np.max(c.col - c.row)))
    return kl, ku


def _first_derivative(n, h):
    main = np.zeros(n)
    upper = np.full(n - 1, 0.5 / h)
    lower = np.full(n - 1, -0.5 / h)
    D = sp.diags([lower, main, upper], [-1, 0, 1], format="lil")
    # one-sided wall rows whose O(h^2) error term equals the centred one,
    # h^2 f'''/6; the pressure row next to a wall differences the wall
    # momentum residual, and matched errors keep that row second order
    D[0, 0:4] = np.array([-4.0, 7.0, -4.0, 1.0]) / (2.0 * h)
    D[n - 1, n - 4:n] = np.array([-1.0, 4.0, -7.0, 4.0]) / (2.0 * h)
    return D.tocsr()


def _second_derivative(n, h):
    off = np.full(n - 1, 1.0 / h ** 2)
    main = np.full(n, -2.0 / h ** 2)
    D2 = sp.diags([off, main, off], [-1, 0, 1], format="lil")
    D2[0, :] = 0.0
    D2[n - 1, :] = 0.0
    return D2.tocsr()


class _Block:
    """Row equation of one field, as a map from column field to n x n operator."""

    def __init__(self, n):
        self.n = n
        self.parts = {}

    def add(self, col, op):
        op = sp.csr_matrix(op, dtype=complex)
        self.parts[col] = self.parts[col] + op if col in self.parts else op
        return self

    def diag(self, col, values):
        values = np.broadcast_to(np.asarray(values, dtype=complex), (self.n,))
        return self.add(col, sp.diags(values))

    def scaled(self, s):
        out = _Block(self.n)
        for k, v in self.parts.items():
            out.parts[k] = s * v
        return out

    def left(self, op):
        out = _Block(self.n)
        for k, v in self.parts.items():
            out.parts[k] = sp.csr_matrix(op @ v)
        return out

    def plus(self, other):
        out = _Block(self.n)
        for k, v in self.parts.items():
            out.add(k, v)
        for k, v in other.parts.items():
            out.add(k, v)
        return out


def _check_profiles(coeffs: LinearCoefficients, flow: BaseFlow, n: int):
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 129 or n % 2 == 0:
        raise ValidationError("n", "pencil grid must be an odd integer >= 129")
    if coeffs.n != n:
        raise AssemblyError(f"coefficient grid has {coeffs.n} nodes, pencil requested {n}")
    if flow is not None and flow.grid.n_nodes != n:
        raise AssemblyError(f"base flow grid has {flow.grid.n_nodes} nodes, pencil requested {n}")
    for name in PROFILE_NAMES:
        values = np.asarray(getattr(coeffs, name))
        if values.shape != (n,):
            raise AssemblyError(f"profile {name} has shape {values.shape}, expected ({n},)")
        if not np.all(np.isfinite(values)):
            raise AssemblyError(f"profile {name} contains non-finite values")


def operator_rows(coeffs: LinearCoefficients, params: ModelParams, omega: float):
    """Return the right-hand sides ``Rest`` of ``lambda q + Rest q = 0``.

    One :class:`_Block` per dynamic field plus the y-momentum row, keyed by
    field name (``"Y"`` for the y-momentum).  ``"X"`` is the x-momentum.
    """
    c, p = coeffs, params
    n, h = c.n, c.h
    D = _first_derivative(n, h)
    D2 = _second_derivative(n, h)
    iw = 1j * omega
    lam1 = 1.0 + p.lambda_hat
    sig = p.sigma_m
    ar, am, pr = p.A_r / p.Pr, p.A_m / p.Pr, p.Pr
    dg = sp.diags

    X = _Block(n)
    X.diag("u", iw * c.u_hat).diag("v", c.u_hat_prime)
    X.diag("a11", -iw * c.Z_hat).diag("a22", iw * c.Z_hat)
    X.add("a12", -dg(c.Z_hat) @ D - dg(c.Z_hat_prime))
    X.diag("Omega", iw)
    X.add("Z", dg(iw * (c.alpha22 - c.alpha11) - c.alpha12_prime) - dg(c.alpha12) @ D)
    X.add("L", -sig * (dg(iw * c.L_hat) + lam1 * D))
    X.diag("M", -sig * c.L_hat_prime)

    Y = _Block(n)
    Y.diag("v", iw * c.u_hat).add("Omega", D)
    Y.diag("a12", -iw * c.Z_hat)
    Y.diag("Z", -iw * c.alpha12 - p.Gr)
    Y.add("M", -sig * (dg(iw * c.L_hat) + lam1 * D))

    A11 = _Block(n)
    A11.diag("v", c.alpha11_prime)
    A11.add("u", dg(-2.0 * iw * c.alpha1) - 2.0 * dg(c.alpha12) @ D)
    A11.diag("a11", iw * c.u_hat + c.R33).diag("a12", c.R34).diag("a22", c.R35)
    A11.diag("Z", c.r11)

    A12 = _Block(n)
    A12.diag("v", c.alpha12_prime - iw * c.alpha1)
    A12.add("u", -dg(c.alpha2) @ D)
    A12.diag("a11", c.R43).diag("a12", iw * c.u_hat + c.R44).diag("a22", c.R45)
    A12.diag("Z", c.r12)

    A22 = _Block(n)
    A22.add("v", dg(c.alpha22_prime - 2.0 * iw * c.alpha12) - 2.0 * dg(c.alpha2) @ D)
    A22.diag("a11", c.R53).diag("a12", c.R54).diag("a22", iw * c.u_hat + c.R55)
    A22.diag("Z", c.r22)

    T = _Block(n)
    T.add("Z", dg(iw * c.u_hat - ar * c.u_hat_prime * c.a12_hat + omega ** 2 / pr) - D2 / pr)
    T.add("v", dg(c.Z_hat_prime - ar * c.Z_hat * iw * c.a12_hat - am * sig * c.L_hat * lam1 * iw)
          - dg(ar * c.Z_hat * c.a22_hat + am * sig * lam1 ** 2) @ D)
    T.add("u", dg(-ar * c.Z_hat * c.a11_hat * iw - am * sig * c.L_hat ** 2 * iw)
          - dg(ar * c.Z_hat * c.a12_hat + am * sig * c.L_hat * lam1) @ D)
    T.diag("a12", -ar * c.Z_hat * c.u_hat_prime * p.Re)
    T.diag("L", -am * sig * c.u_hat_prime * lam1)
    T.diag("M", -am * sig * c.u_hat_prime * c.L_hat)

    Lb = _Block(n)
    Lb.add("L", dg(iw * c.u_hat + p.b_m * omega ** 2) - p.b_m * D2)
    Lb.diag("v", c.L_hat_prime)
    Lb.add("u", dg(-iw * c.L_hat) - lam1 * D)
    Lb.diag("M", -c.u_hat_prime)

    Mb = _Block(n)
    Mb.add("M", dg(iw * c.u_hat + p.b_m * omega ** 2) - p.b_m * D2)
    Mb.add("v", dg(-iw * c.L_hat) - lam1 * D)

    return {"X": X, "Y": Y, "a11": A11, "a12": A12, "a22": A22, "Z": T, "L": Lb, "M": Mb}, D


def assemble_pencil(coeffs: LinearCoefficients, flow: BaseFlow, params: ModelParams,
                    omega: float, n: int) -> Pencil:
    """Discretise the linearised problem at streamwise wavenumber ``omega``.

    Raises:
        DomainError: for ``omega == 0``.
        AssemblyError: if a coefficient profile does not match the grid.
    """
    if omega == 0.0:
        raise DomainError("omega = 0 leaves the pressure Neumann problem singular")
    _check_profiles(coeffs, flow, n)
    params = params or coeffs.params
    rows, D = operator_rows(coeffs, params, float(omega))
    h = coeffs.h
    iw = 1j * omega

    # pressure row: divergence of the momentum rows, scaled by h^2 for balance
    poisson = rows["X"].scaled(iw).plus(rows["Y"].left(D)).scaled(h * h)
    wall_neumann = rows["Y"].scaled(h)
    row_blocks = {"u": rows["X"], "v": rows["Y"], "a11": rows["a11"], "a12": rows["a12"],
                  "a22": rows["a22"], "Omega": poisson, "Z": rows["Z"], "L": rows["L"],
                  "M": rows["M"]}

    walls = np.array([0, n - 1])
    interior = np.ones(n, dtype=bool)
    interior[walls] = False
    r_idx, c_idx, vals = [], [], []
    for fname, block in row_blocks.items():
        fi = _F[fname]
        keep = interior if fname in WALL_FIELDS or fname == "Omega" else np.ones(n, dtype=bool)
        for cname, op in block.parts.items():
            cj = _F[cname]
            coo = op.tocoo()
            sel = keep[coo.row]
            r_idx.append(coo.row[sel] * NF + fi)
            c_idx.append(coo.col[sel] * NF + cj)
            vals.append(-coo.data[sel])
    bc_rows = []
    for j in walls:
        for fname in WALL_FIELDS:
            k = j * NF + _F[fname]
            r_idx.append(np.array([k]))
            c_idx.append(np.array([k]))
            vals.append(np.array([1.0 + 0j]))
            bc_rows.append(k)
        k = j * NF + _F["Omega"]
        bc_rows.append(k)
        for cname, op in wall_neumann.parts.items():
            row = op.getrow(j).tocoo()
            r_idx.append(np.full(row.nnz, k))
            c_idx.append(row.col * NF + _F[cname])
            vals.append(-row.data)
    dim = n * NF
    N = sp.csr_matrix((np.concatenate(vals), (np.concatenate(r_idx), np.concatenate(c_idx))),
                      shape=(dim, dim), dtype=complex)
    N.sum_duplicates()
    N.eliminate_zeros()

    m_diag = np.ones(dim, dtype=complex)
    m_diag[_F["Omega"]::NF] = 0.0
    m_diag[np.asarray(bc_rows)] = 0.0
    M = sp.diags(m_diag, format="csr")
    M.eliminate_zeros()
    return Pencil(n=n, bandwidth=_bandwidth(M, N), M_mat=M, N_mat=N,
                  bc_rows=np.sort(np.asarray(bc_rows)), omega=float(omega), h=h)


class _Factor:
    """LU factorisation of ``N - sigma M``: banded LAPACK or dense fallback."""

    def __init__(self, pencil: Pencil, sigma: complex):
        A = (pencil.N_mat - sigma * pencil.M_mat).tocoo()
        dim = A.shape[0]
        self.dense = dim <= DENSE_LIMIT
        if self.dense:
            full = A.toarray()
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", sla.LinAlgWarning)
                lu, piv = sla.lu_factor(full, check_finite=False)
            diag = np.abs(np.diag(lu))
            self._lu = (lu, piv)
        else:
            kl, ku = pencil.bandwidth
            ab = np.zeros((2 * kl + ku + 1, dim), dtype=complex)
            np.add.at(ab, (kl + ku + A.row - A.col, A.col), A.data)
            lu, piv, info = lapack.zgbtrf(ab, kl, ku)
            if info < 0:
                raise ValueError(f"zgbtrf: illegal argument {-info}")
            diag = np.abs(lu[kl + ku])
            self._lu = (lu, piv, kl, ku)
        scale = float(np.max(diag)) if diag.size else 0.0
        if scale == 0.0 or float(np.min(diag)) <= 8.0 * np.finfo(float).eps * scale:
            raise FactorizationSingular(f"shifted pencil is singular at sigma = {sigma}")

    def solve(self, b: np.ndarray) -> np.ndarray:
        if self.dense:
            return sla.lu_solve(self._lu, b, check_finite=False)
        lu, piv, kl, ku = self._lu
        x, info = lapack.zgbtrs(lu, kl, ku, b, piv)
        if info != 0:
            raise ValueError(f"zgbtrs failed with info {info}")
        return x


def _residual(pencil: Pencil, lam: complex, q: np.ndarray) -> float:
    r = pencil.N_mat @ q - lam * (pencil.M_mat @ q)
    return float(np.linalg.norm(r) / np.linalg.norm(q))


def shift_invert_eigen(pencil: Pencil, sigma: complex, tol: float = 1e-8,
                       max_iter: int = 40, krylov: int = 16) -> EigenPair:
    """Eigenvalue of ``lambda M q = N q`` nearest to ``sigma``.

    Restarted Arnoldi on ``(N - sigma M)^-1 M``; the Ritz value of largest
    modulus gives the nearest finite eigenvalue, infinite eigenvalues map to
    zero and are never selected.

    Raises:
        FactorizationSingular: ``sigma`` is an eigenvalue to working precision.
        NoConvergence: the residual did not drop below ``tol``.
    """
    factor = _Factor(pencil, complex(sigma))
    M = pencil.M_mat
    dim = pencil.dim
    m = min(krylov, dim)
    rng = np.random.default_rng(20240917)
    start = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    v = factor.solve(M @ start)
    best = (np.inf, None, None)
    previous = np.inf
    for _ in range(max_iter):
        nv = np.linalg.norm(v)
        if nv == 0.0 or not np.isfinite(nv):
            break
        V = np.zeros((dim, m + 1), dtype=complex)
        H = np.zeros((m + 1, m), dtype=complex)
        V[:, 0] = v / nv
        size = m
        for j in range(m):
            w = factor.solve(M @ V[:, j])
            for _pass in range(2):
                coef = V[:, :j + 1].conj().T @ w
                w = w - V[:, :j + 1] @ coef
                H[:j + 1, j] += coef
            H[j + 1, j] = np.linalg.norm(w)
            if H[j + 1, j] <= 1e-14 * np.abs(H[:j + 1, j]).max():
                size = j + 1
                break
            V[:, j + 1] = w / H[j + 1, j]
        mu, Y = np.linalg.eig(H[:size, :size])
        order = np.argsort(-np.abs(mu))
        i = order[0]
        if mu[i] == 0.0:
            break
        q = V[:, :size] @ Y[:, i]
        # least-squares eigenvalue for the Ritz vector avoids the loss of
        # digits in sigma + 1/mu when sigma is far from the spectrum
        Mq = M @ q
        lam = complex(np.vdot(Mq, pencil.N_mat @ q) / np.vdot(Mq, Mq))
        res = _residual(pencil, lam, q)
        if res < best[0]:
            best = (res, lam, q)
        if res < tol:
            return EigenPair(lam=lam, q=q / np.linalg.norm(q), residual=res)
        if res > 0.5 * previous:
            break
        previous = res
        v = q
    res, lam, q = best
    if q is not None:
        polished = _polish(pencil, lam, q, tol)
        if polished is not None:
            return polished
    raise NoConvergence(
        f"no eigenpair near sigma = {sigma} reached residual {tol:g}",
        {"residual": res, "lambda": lam})


def _polish(pencil, lam, q, tol, steps=3):
    """A few Rayleigh-quotient inverse-iteration steps from a stalled Ritz pair."""
    start = lam
    for _ in range(steps):
        try:
            factor = _Factor(pencil, lam)
        except FactorizationSingular:
            # the shift is an eigenvalue to working precision: nudge it
            factor = _Factor(pencil, lam * (1.0 + 1e-12) + 1e-12)
        q = factor.solve(pencil.M_mat @ q)
        q = q / np.linalg.norm(q)
        Mq = pencil.M_mat @ q
        lam = complex(np.vdot(Mq, pencil.N_mat @ q) / np.vdot(Mq, Mq))
        res = _residual(pencil, lam, q)
        if res < tol:
            if abs(lam - start) > 1e-6 * max(1.0, abs(start)):
                return None
            return EigenPair(lam=lam, q=q, residual=res)
    return None


def divergence_diag(pencil: Pencil, q: np.ndarray) -> float:
    """``max |i omega u + v'|`` over interior nodes, relative to ``max |u|``."""
    u = pencil.field_view(q, "u")
    v = pencil.field_view(q, "v")
    div = 1j * pencil.omega * u[1:-1] + (v[2:] - v[:-2]) / (2.0 * pencil.h)
    scale = np.max(np.abs(u))
    return float(np.max(np.abs(div)) / scale) if scale > 0 else float("inf")


def roughness(pencil: Pencil, q: np.ndarray) -> float:
    """Grid-scale oscillation of u, v and a12; near 1 for odd-even modes."""
    worst = 0.0
    for name in ("u", "v", "a12"):
        f = pencil.field_view(q, name)
        scale = np.max(np.abs(f))
        if scale > 0:
            worst = max(worst, float(np.max(np.abs(f[2:] - 2.0 * f[1:-1] + f[:-2])) / (4.0 * scale)))
    return worst


def shift_invert_neighbors(pencil: Pencil, sigma: complex, count: int = 6,
                           tol: float = 1e-8) -> list:
    """Up to ``count`` eigenpairs nearest ``sigma`` with residual below ``tol``.

    Implicitly restarted Arnoldi (ARPACK) in shift-invert mode, reusing the
    banded factorisation of ``N - sigma M``.  Sorted by distance to ``sigma``.
    """
    factor = _Factor(pencil, complex(sigma))
    count = max(1, min(count, pencil.dim - 2))
    op = spla.LinearOperator(pencil.N_mat.shape, matvec=factor.solve, dtype=complex)
    try:
        vals, vecs = spla.eigs(pencil.N_mat, k=count, M=pencil.M_mat, sigma=complex(sigma),
                               OPinv=op, v0=np.ones(pencil.dim, dtype=complex))
    except spla.ArpackNoConvergence as exc:
        vals, vecs = exc.eigenvalues, exc.eigenvectors
    pairs = []
    for lam, q in zip(vals, vecs.T):
        q = q / np.linalg.norm(q)
        res = _residual(pencil, complex(lam), q)
        if res < tol:
            pairs.append(EigenPair(lam=complex(lam), q=q, residual=res))
    pairs.sort(key=lambda e: abs(e.lam - sigma))
    return pairs


def _screen(pencil, pair):
    div = divergence_diag(pencil, pair.q)
    rough = roughness(pencil, pair.q)
    status = "accepted" if div < DIVERGENCE_LIMIT and rough < ROUGHNESS_LIMIT else "spurious"
    return replace(pair, divergence_diag=div, roughness=rough, status=status)


def _hunt_one(pencil, k, convention, seed, tol, neighbors, max_distance=None):
    tag = dict(k_seed=k, seed=seed, convention=convention)
    try:
        try:
            pairs = shift_invert_neighbors(pencil, seed, count=neighbors, tol=tol)
        except FactorizationSingular:
            pairs = shift_invert_neighbors(pencil, seed * (1.0 + 1e-9) + 1e-9,
                                           count=neighbors, tol=tol)
    except FactorizationSingular:
        pairs = []
    if max_distance is not None:
        pairs = [e for e in pairs if abs(e.lam - seed) <= max_distance * abs(seed)]
    if not pairs:
        return EigenPair(lam=complex("nan"), q=np.empty(0), residual=float("nan"),
                         status="no-convergence", **tag)
    screened = [_screen(pencil, e) for e in pairs]
    accepted = [e for e in screened if e.status == "accepted"]
    return replace(accepted[0] if accepted else screened[0], **tag)


def hunt_spectrum(pencil: Pencil, seeds: EigenFamily, tol: float = 1e-7,
                  conventions=("direct", "conjugate"), dedup_tol: float = 1e-6,
                  neighbors: int = 6, max_distance: float = None, jobs: int = 1) -> list:
    """Shift-invert at every seed of every requested sign convention.

    Near each seed the ``neighbors`` closest eigenvalues are computed and the
    closest one passing the divergence and roughness screens is kept, since
    centred differences pair every smooth mode with an odd-even twin.  Returns one :class:`EigenPair` per distinct eigenvalue found, in seed
    order.  Failed hunts are kept as entries with ``status='no-convergence'``;
    pairs failing the divergence or roughness screens carry
    ``status='spurious'``.  With ``max_distance`` set, eigenvalues farther
    than ``max_distance * |seed|`` from their seed do not count as found.
    """
    tasks = []
    for conv in conventions:
        for k, s in zip(seeds.k_list, seeds.seeds(conv)):
            tasks.append((int(k), conv, complex(s)))
    if jobs > 1:
        with cf.ThreadPoolExecutor(max_workers=jobs) as pool:
            found = list(pool.map(
                lambda t: _hunt_one(pencil, *t, tol, neighbors, max_distance), tasks))
    else:
        found = [_hunt_one(pencil, *t, tol, neighbors, max_distance) for t in tasks]

    out = []
    for pair in found:
        if pair.status == "no-convergence":
            out.append(pair)
            continue
        if any(o.status != "no-convergence"
               and abs(o.lam - pair.lam) < dedup_tol * max(abs(pair.lam), 1.0) for o in out):
            continue
        family = seeds.seeds(pair.convention)
        dist = np.abs(family - pair.lam) / np.abs(family)
        i = int(np.argmin(dist))
        out.append(replace(pair, seed_distance=float(dist[i]), k_nearest=int(seeds.k_list[i])))
    return out


def infer_convention(pairs, seeds: EigenFamily, conventions=("direct", "conjugate", "negated")):
    """Convention whose seeds have accepted eigenvalues closest to them.

    The score of a convention is the median over seeds of the relative
    distance to the nearest accepted eigenvalue.  Returns ``(best, scores)``.
    """
    lams = np.array([p.lam for p in pairs if p.status == "accepted"])
    if lams.size == 0:
        return None, {}
    scores = {}
    for conv in conventions:
        family = seeds.seeds(conv)
        d = np.abs(family[:, None] - lams[None, :]) / np.abs(family[:, None])
        scores[conv] = float(np.median(d.min(axis=1)))
    return min(scores, key=scores.get), scores


def match_seeds(pairs, seeds: EigenFamily, convention: str):
    """Nearest accepted eigenvalue for every seed of one convention.

    Returns ``(k, seed, lam, relative_distance)`` arrays; ``lam`` is NaN where
    nothing was accepted.
    """
    lams = np.array([p.lam for p in pairs if p.status == "accepted"], dtype=complex)
    family = seeds.seeds(convention)
    found = np.full(family.shape, complex("nan"))
    dist = np.full(family.shape, np.nan)
    if lams.size:
        d = np.abs(family[:, None] - lams[None, :]) / np.abs(family[:, None])
        i = np.argmin(d, axis=1)
        found = lams[i]
        dist = d[np.arange(family.size), i]
    return seeds.k_list, family, found, dist


def persists(pair: EigenPair, fine: Pencil, tol: float = 1e-8, factor: float = 10.0) -> bool:
    """Whether ``pair`` reappears on a refined pencil.

    The admissible shift is ``factor * h^2 * (1 + |lambda|)^3``; the cubic
    weight reflects the O((kh)^2) phase error of a mode with k half-waves.
    """
    try:
        again = shift_invert_eigen(fine, pair.lam, tol=tol)
    except (NoConvergence, FactorizationSingular):
        return False
    return abs(again.lam - pair.lam) <= factor * fine.h ** 2 * (1.0 + abs(pair.lam)) ** 3
