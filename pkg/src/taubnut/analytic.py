"""Closed-form geodesic families, their turning radii and first integrals,
the special-case classifier, and monotone inversion of t(r).

Five families admit closed forms; the tags double as the data-format labels:

  thm1  radial: tau, theta, phi constant; the only family reaching r = n.
  thm2  tau-charged radial: theta, phi constant; conserved
        tau0 = (r-n)/(r+n) dtau/dt; turning radius R1 = n + 2 tau0^2 n / r1^2.
  thm3  equatorial: theta = pi/2, tau constant; conserved
        phi0 = (r^2-n^2) dphi/dt; turning radius R2 = sqrt(n^2 + phi0^2/r1^2).
  thm4  meridional: tau, phi constant; same kernel as thm3 under
        (phi0, R2) -> (theta0, R3).
  thm5  constant latitude with tau and phi locked by
        [4n^2 cos(theta)/(r+n)^2 - cos(theta)] dphi/dt
          + (2n/(r+n)^2) dtau/dt = 0;
        turning radii R- < 0 < n <= R+ are the roots of the quadratic F.

Every curve is an antiderivative in r integrated from the turning radius R.
Three evaluation modes:

  literal    the classical closed-form brackets with their natural additive
             constants left in place; the stated anchors (t1, tau1, ...) then
             hold only up to a constant offset at r = R.
  aligned    subtracts each bracket's value at R, so the anchors hold exactly
             there. Differences f(r_b) - f(r_a) agree between the two modes.
  corrected  thm5 only: the literal thm5 brackets carry prefactors whose
             derivatives miss the first-integral velocity field by the fixed
             factors r1/sqrt(2n) (t curve) and r1*sqrt(2n) (phi, tau curves);
             corrected mode rescales the prefactors so d/dr of every curve
             matches dr/dt = eps*sqrt(F)/(sqrt(2n)(r+n)) exactly. The thm5
             brackets all vanish at R+, so literal and aligned coincide for
             thm5 and corrected needs no extra offset.

Throughout, eps = +1/-1 selects the outgoing/ingoing radial branch and r1 > 0
is the energy-like constant of each family's first integral.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

import numpy as np
from scipy.optimize import brentq

from .errors import ConfigError, DegenerateError, DomainError, NotAGeodesic, RangeError
from .geometry import ModelParams
from .integrator import PhaseState, norm

FAMILIES = ("thm1", "thm2", "thm3", "thm4", "thm5", "stationary", "generic")
MODES = ("literal", "aligned", "corrected")

_CURVE_FAMILIES = ("thm1", "thm2", "thm3", "thm4", "thm5")

# per-family optional fields that must be set (everything else must stay None)
_REQUIRED = {
    "thm1": (),
    "thm2": ("tau0", "tau1"),
    "thm3": ("phi0", "phi1"),
    "thm4": ("theta0", "theta1"),
    "thm5": ("phi0", "theta_const", "tau1", "phi1"),
    "stationary": (),
    "generic": (),
}

_OPTIONAL_FIELDS = ("tau0", "phi0", "theta0", "theta_const", "tau1", "phi1", "theta1")

# serialized key order per family; n is injected after eps
_JSON_FIELDS = {
    "thm1": ("family", "eps", "n", "r1", "t1"),
    "thm2": ("family", "eps", "n", "r1", "tau0", "t1", "tau1"),
    "thm3": ("family", "eps", "n", "r1", "phi0", "t1", "phi1"),
    "thm4": ("family", "eps", "n", "r1", "theta0", "t1", "theta1"),
    "thm5": ("family", "eps", "n", "r1", "phi0", "theta_const", "t1", "tau1", "phi1"),
}


@dataclass(frozen=True)
class FamilyConstants:
    """Constants and anchors of one closed-form family.

    r1 is kept positive for the curve families; direction lives in eps alone.
    Anchors are the coordinate values attained at the turning radius (exactly
    in aligned mode, up to the documented constants in literal mode)."""

    family: str
    eps: int = 1
    r1: float = 0.0
    tau0: float | None = None
    phi0: float | None = None
    theta0: float | None = None
    theta_const: float | None = None
    t1: float = 0.0
    tau1: float | None = None
    phi1: float | None = None
    theta1: float | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown family tag {self.family!r}")
        if self.eps not in (1, -1):
            raise ConfigError("eps must be +1 or -1")
        if self.family == "stationary":
            if self.r1 != 0.0:
                raise ConfigError("stationary points have r1 = 0")
        elif not self.r1 > 0:
            raise ConfigError("r1 must be positive (eps carries the direction)")
        required = _REQUIRED[self.family]
        for name in _OPTIONAL_FIELDS:
            value = getattr(self, name)
            if name in required and value is None:
                raise ConfigError(f"family {self.family!r} requires {name}")
            if name not in required and value is not None:
                raise ConfigError(f"family {self.family!r} does not take {name}")
        if self.family == "thm5" and not 0.0 < self.theta_const < np.pi:
            raise ConfigError("theta_const must lie in (0, pi)")


@dataclass(frozen=True)
class TurningRadius:
    """Smallest radius attained by a family; r_minus is the second (negative)
    root of the thm5 quadratic, unused by the other families."""

    value: float
    family: str
    r_minus: float | None = None


def _check_mode(family: str, mode: str) -> str:
    if mode not in MODES:
        raise ConfigError(f"unknown mode {mode!r}")
    if mode == "corrected" and family != "thm5":
        raise ConfigError("corrected mode exists only for thm5")
    return mode


def turning_radius(consts: FamilyConstants, params: ModelParams) -> TurningRadius:
    """Radius at which dr/dt vanishes: n for thm1, R1/R2/R3 for thm2-4, and
    the root pair (R+, R-) of the quadratic F for thm5. Always >= n, with
    equality exactly when the family's angular constant vanishes."""
    n = params.n
    fam = consts.family
    if fam not in _CURVE_FAMILIES:
        raise ConfigError(f"family {fam!r} has no turning radius")
    if consts.r1 == 0:
        raise DegenerateError("turning radius needs r1 != 0")
    r1sq = consts.r1 * consts.r1
    if fam == "thm1":
        return TurningRadius(n, fam)
    if fam == "thm2":
        return TurningRadius(n + 2 * consts.tau0**2 * n / r1sq, fam)
    if fam == "thm3":
        return TurningRadius(math.sqrt(n * n + consts.phi0**2 / r1sq), fam)
    if fam == "thm4":
        return TurningRadius(math.sqrt(n * n + consts.theta0**2 / r1sq), fam)
    c2 = math.cos(consts.theta_const) ** 2
    s2 = math.sin(consts.theta_const) ** 2
    p2 = consts.phi0**2
    half_sum = p2 * c2 / (4 * n * r1sq)
    rad = math.sqrt(n * n + (p2 * p2 * c2 * c2 + 8 * n * n * p2 * r1sq * c2
                             + 16 * n * n * p2 * r1sq * s2) / (16 * n * n * r1sq * r1sq))
    return TurningRadius(half_sum + rad, fam, r_minus=half_sum - rad)


def F_eval(params: ModelParams, r, r1: float, phi0: float, theta: float):
    """The thm5 radial quadratic, evaluated exactly as written:
    F(r) = 2n r1^2 r^2 - phi0^2 cos^2(theta) r
           - (2n^3 r1^2 + n phi0^2 cos^2(theta) + 2n phi0^2 sin^2(theta))."""
    n = params.n
    c2 = math.cos(theta) ** 2
    s2 = math.sin(theta) ** 2
    r = np.asarray(r, dtype=float)
    out = (2 * n * r1 * r1 * r * r - phi0 * phi0 * c2 * r
           - (2 * n**3 * r1 * r1 + n * phi0 * phi0 * c2 + 2 * n * phi0 * phi0 * s2))
    return float(out) if out.ndim == 0 else out


def _as_radii(r, lower: float, label: str):
    """Validate r >= lower elementwise and return it as a float array."""
    arr = np.asarray(r, dtype=float)
    if np.any(arr < lower):
        raise DomainError(f"r must be >= {label} = {lower}")
    return arr


def _scalar_like(template, value):
    return float(value) if np.ndim(template) == 0 else value


# radial bracket: antiderivative of sqrt((r+n)/(r-n)), finite down to r = n
def _radial_bracket(n: float, r):
    rp = np.sqrt(r + n)
    rm = np.sqrt(np.maximum(r - n, 0.0))
    return rp * rm + 2 * n * np.log(rp + rm)


def thm1_t_of_r(params: ModelParams, consts: FamilyConstants, r, mode: str = "literal"):
    """Radial family time curve t(r) = t1 + (eps/r1) * [sqrt(r^2-n^2)
    + 2n ln(sqrt(r+n)+sqrt(r-n))]; aligned mode subtracts the bracket's value
    at r = n (equal to 2n ln sqrt(2n)) so t(n) = t1 exactly."""
    _check_mode("thm1", mode)
    n = params.n
    arr = _as_radii(r, n, "n")
    bracket = _radial_bracket(n, arr)
    if mode == "aligned":
        bracket = bracket - 2 * n * np.log(np.sqrt(2 * n))
    return _scalar_like(r, consts.t1 + consts.eps / consts.r1 * bracket)


def thm2_curves(params: ModelParams, consts: FamilyConstants, r, mode: str = "literal"):
    """Tau-charged radial curves (t, tau) for r >= R1 > n.

    t(r)   = t1 + (eps/r1)[sqrt(r-R1)sqrt(r+n) + (n+R1) ln(sqrt(r-R1)+sqrt(r+n))]
    tau(r) = tau1 + (eps tau0/r1)[(5n+R1) ln(sqrt(r-R1)+sqrt(r+n))
             + (2(2n)^{3/2}/sqrt(R1-n)) arctan(sqrt(2n)sqrt(r-R1)
                                               /(sqrt(R1-n)sqrt(r+n)))
             + sqrt(r-R1)sqrt(r+n)]

    Differentiating gives back dt/dr = (eps/r1) sqrt((r+n)/(r-R1)) and
    dtau/dr = (eps tau0/r1)(r+n)^{3/2}/((r-n)sqrt(r-R1)) identically."""
    _check_mode("thm2", mode)
    n = params.n
    R1 = turning_radius(consts, params).value
    if R1 == n:
        raise DegenerateError("tau0 = 0 collapses to the radial family (R1 = n)")
    arr = _as_radii(r, R1, "R1")
    sp = np.sqrt(arr + n)
    sm = np.sqrt(np.maximum(arr - R1, 0.0))
    prod = sm * sp
    logterm = np.log(sm + sp)
    atan = np.arctan(np.sqrt(2 * n) * sm / (np.sqrt(R1 - n) * sp))
    bt = prod + (n + R1) * logterm
    btau = (5 * n + R1) * logterm + 2 * (2 * n) ** 1.5 / np.sqrt(R1 - n) * atan + prod
    if mode == "aligned":
        off = np.log(np.sqrt(R1 + n))
        bt = bt - (n + R1) * off
        btau = btau - (5 * n + R1) * off
    t = consts.t1 + consts.eps / consts.r1 * bt
    tau = consts.tau1 + consts.eps * consts.tau0 / consts.r1 * btau
    return _scalar_like(r, t), _scalar_like(r, tau)


def _sweep_kernel(params, eps, r1, c0, anchor_t, anchor_x, R, r, mode):
    """Shared thm3/thm4 evaluation: the two families print identical formulas
    under (phi0, R2) <-> (theta0, R3) relabeling.

    t(r) = t1 + (eps/r1)[sqrt(r^2-R^2) + n ln(r + sqrt(r^2-R^2))]
    x(r) = x1 + eps arctan(r1(rn - R^2)/(c0 sqrt(r^2-R^2)))

    At r = R the arctan argument diverges; the one-sided limit
    -sign(c0) pi/2 is used there (turning_limit_used reports it)."""
    n = params.n
    arr = _as_radii(r, R, "R")
    rootsq = np.sqrt(np.maximum(arr * arr - R * R, 0.0))
    bt = rootsq + n * np.log(arr + rootsq)
    if mode == "aligned":
        bt = bt - n * np.log(R)
    t = anchor_t + eps / r1 * bt
    at_turn = arr == R
    denom = np.where(at_turn, 1.0, c0 * rootsq)
    angle = np.where(
        at_turn,
        -np.sign(c0) * np.pi / 2,
        np.arctan(r1 * (arr * n - R * R) / denom),
    )
    if mode == "aligned":
        angle = angle + np.sign(c0) * np.pi / 2
    x = anchor_x + eps * angle
    return _scalar_like(r, t), _scalar_like(r, x)


def thm3_curves(params: ModelParams, consts: FamilyConstants, r, mode: str = "literal"):
    """Equatorial curves (t, phi) for r >= R2; phi uses the one-sided limit
    at the turning radius (see turning_limit_used)."""
    _check_mode("thm3", mode)
    if consts.phi0 == 0:
        raise DegenerateError("phi0 = 0 collapses to the radial family (R2 = n)")
    R2 = turning_radius(consts, params).value
    return _sweep_kernel(params, consts.eps, consts.r1, consts.phi0,
                         consts.t1, consts.phi1, R2, r, mode)


def thm4_curves(params: ModelParams, consts: FamilyConstants, r, mode: str = "literal"):
    """Meridional curves (t, theta) for r >= R3; identical kernel to thm3
    under (phi0, phi1, R2) -> (theta0, theta1, R3)."""
    _check_mode("thm4", mode)
    if consts.theta0 == 0:
        raise DegenerateError("theta0 = 0 collapses to the radial family (R3 = n)")
    R3 = turning_radius(consts, params).value
    return _sweep_kernel(params, consts.eps, consts.r1, consts.theta0,
                         consts.t1, consts.theta1, R3, r, mode)


def turning_limit_used(consts: FamilyConstants, params: ModelParams, r) -> bool:
    """True when any requested radius sits exactly at the turning radius, where
    the thm3/thm4 angle curve is defined by its one-sided limit -sign(c0) pi/2
    rather than by the printed arctan."""
    R = turning_radius(consts, params).value
    return bool(np.any(np.asarray(r, dtype=float) == R))


def theta_range_exit(params: ModelParams, consts: FamilyConstants) -> bool:
    """Meridional swing check: the theta curve is monotone from theta1 at R3
    toward theta1 + eps [arctan(r1 n/theta0) + sign(theta0) pi/2] as r grows;
    flags families whose swing leaves the open interval (0, pi)."""
    if consts.family != "thm4":
        raise ConfigError("theta range check applies to thm4 only")
    swing = consts.eps * (math.atan(consts.r1 * params.n / consts.theta0)
                          + math.copysign(math.pi / 2, consts.theta0))
    lo, hi = sorted((consts.theta1, consts.theta1 + swing))
    return not (0.0 < lo and hi < math.pi)


def thm5_curves(params: ModelParams, consts: FamilyConstants, r, mode: str = "corrected"):
    """Constant-latitude curves (t, phi, tau) for r >= R+.

    literal brackets (S := phi0^2 cos^2(theta)/(2n r1^2) = R+ + R-):
      t   = t1 + (eps/sqrt(2n)) [sqrtP + (S+2n) asinh(sqrt((r-R+)/(R+-R-)))]
      phi = phi1 + (2 eps sqrt(2n) phi0 / sqrt((R+-n)(n-R-)))
                    * arctan(sqrt((r-R+)(n-R-)/((r-R-)(R+-n))))
      tau = tau1 + (eps phi0 cos(theta)/sqrt(2n)) [sqrtP + (S+6n) asinh(...)]
    with sqrtP = sqrt((r-R+)(r-R-)). Corrected mode replaces the prefactors by
    eps/r1, 2 eps phi0/(r1 sqrt(...)), eps phi0 cos(theta)/(2n r1), which makes
    every d/dr match the first-integral field dr/dt = eps sqrt(F)/(sqrt(2n)(r+n))
    exactly. All brackets vanish at R+, so no alignment offset exists and
    aligned mode coincides with literal."""
    _check_mode("thm5", mode)
    n = params.n
    tr = turning_radius(consts, params)
    Rp, Rm = tr.value, tr.r_minus
    if Rp == n:
        raise DegenerateError("phi0 = 0 collapses to the radial family (R+ = n)")
    arr = _as_radii(r, Rp, "R+")
    ct = math.cos(consts.theta_const)
    sqrtP = np.sqrt(np.maximum(arr - Rp, 0.0)) * np.sqrt(arr - Rm)
    ash = np.arcsinh(np.sqrt(np.maximum(arr - Rp, 0.0) / (Rp - Rm)))
    S = consts.phi0**2 * ct * ct / (2 * n * consts.r1**2)
    bt = sqrtP + (S + 2 * n) * ash
    btau = sqrtP + (S + 6 * n) * ash
    atn = np.arctan(np.sqrt(np.maximum(arr - Rp, 0.0) * (n - Rm)
                            / ((arr - Rm) * (Rp - n))))
    root_pm = math.sqrt((Rp - n) * (n - Rm))
    if mode == "corrected":
        coef_t = consts.eps / consts.r1
        coef_phi = 2 * consts.eps * consts.phi0 / (consts.r1 * root_pm)
        coef_tau = consts.eps * consts.phi0 * ct / (2 * n * consts.r1)
    else:
        root2n = math.sqrt(2 * n)
        coef_t = consts.eps / root2n
        coef_phi = 2 * consts.eps * root2n * consts.phi0 / root_pm
        coef_tau = consts.eps * consts.phi0 * ct / root2n
    t = consts.t1 + coef_t * bt
    phi = consts.phi1 + coef_phi * atn
    tau = consts.tau1 + coef_tau * btau
    return _scalar_like(r, t), _scalar_like(r, phi), _scalar_like(r, tau)


def default_mode(family: str) -> str:
    """Evaluation mode each family is quoted in by default: literal closed
    forms for thm1-4, the derivative-exact corrected forms for thm5."""
    if family not in _CURVE_FAMILIES:
        raise ConfigError(f"family {family!r} has no curve mode")
    return "corrected" if family == "thm5" else "literal"


def curves(params: ModelParams, consts: FamilyConstants, r, mode: str | None = None):
    """Dispatch to the family's curve evaluator; returns a dict keyed by
    coordinate name ('t' plus whichever of tau/phi/theta the family sweeps).
    mode=None picks default_mode(family)."""
    fam = consts.family
    if fam not in _CURVE_FAMILIES:
        raise ConfigError(f"family {fam!r} has no closed-form curves")
    if mode is None:
        mode = default_mode(fam)
    if fam == "thm1":
        return {"t": thm1_t_of_r(params, consts, r, mode)}
    if fam == "thm2":
        t, tau = thm2_curves(params, consts, r, mode)
        return {"t": t, "tau": tau}
    if fam == "thm3":
        t, phi = thm3_curves(params, consts, r, mode)
        return {"t": t, "phi": phi}
    if fam == "thm4":
        t, theta = thm4_curves(params, consts, r, mode)
        return {"t": t, "theta": theta}
    t, phi, tau = thm5_curves(params, consts, r, mode)
    return {"t": t, "phi": phi, "tau": tau}


def curve_derivatives(params: ModelParams, consts: FamilyConstants, r):
    """Exact d/dr of each curve from the first integrals (mode-independent
    for thm1-4 and equal to the corrected-mode derivatives for thm5), keyed
    like curves(). Radii must sit strictly above the turning radius."""
    n = params.n
    fam = consts.family
    if fam not in _CURVE_FAMILIES:
        raise ConfigError(f"family {fam!r} has no closed-form curves")
    R = turning_radius(consts, params).value
    arr = np.asarray(r, dtype=float)
    if np.any(arr <= R):
        raise DomainError(f"derivatives need r > turning radius {R}")
    eps, r1 = consts.eps, consts.r1
    if fam == "thm1":
        dt = eps / r1 * np.sqrt((arr + n) / (arr - n))
        return {"t": _scalar_like(r, dt)}
    if fam == "thm2":
        dt = eps / r1 * np.sqrt((arr + n) / (arr - R))
        dtau = eps * consts.tau0 / r1 * (arr + n) ** 1.5 / ((arr - n) * np.sqrt(arr - R))
        return {"t": _scalar_like(r, dt), "tau": _scalar_like(r, dtau)}
    if fam in ("thm3", "thm4"):
        c0 = consts.phi0 if fam == "thm3" else consts.theta0
        rootsq = np.sqrt(arr * arr - R * R)
        dt = eps / r1 * (arr + n) / rootsq
        dx = eps * c0 / (r1 * (arr - n) * rootsq)
        key = "phi" if fam == "thm3" else "theta"
        return {"t": _scalar_like(r, dt), key: _scalar_like(r, dx)}
    tr = turning_radius(consts, params)
    sqrtP = np.sqrt(arr - tr.value) * np.sqrt(arr - tr.r_minus)
    ct = math.cos(consts.theta_const)
    dt = eps * (arr + n) / (r1 * sqrtP)
    dphi = eps * consts.phi0 / (r1 * (arr - n) * sqrtP)
    dtau = eps * consts.phi0 * (arr + 3 * n) * ct / (2 * n * r1 * sqrtP)
    return {"t": _scalar_like(r, dt), "phi": _scalar_like(r, dphi),
            "tau": _scalar_like(r, dtau)}


def classify(params: ModelParams, state: PhaseState, tol: float = 1e-9) -> FamilyConstants:
    """Match a phase-space state to its closed-form family.

    Decision tree on which velocity components exceed tol: all below gives a
    stationary point; dr/dt below tol with any other component above means the
    state cannot lie on a geodesic at all (constant r forces every velocity to
    vanish), raising NotAGeodesic. Otherwise the family is picked by the
    surviving components, r1 is extracted from that family's first integral
    (never from the norm, which also counts kinetic terms the first integrals
    exclude), and the anchors are backed out so the state sits on the aligned
    curve (corrected for thm5) at affine time zero."""
    if tol <= 0:
        raise ConfigError("tol must be positive")
    n = params.n
    tau_d, theta_d, phi_d, r_d = state.velocity
    r = state.point.r
    theta = state.point.theta
    if r <= n:
        raise DomainError(f"r must exceed n = {n}")
    if max(abs(tau_d), abs(theta_d), abs(phi_d), abs(r_d)) <= tol:
        return FamilyConstants(family="stationary", eps=1, r1=0.0)
    if abs(r_d) <= tol:
        raise NotAGeodesic(
            "constant r forces every velocity component to vanish; "
            "no geodesic passes through this state")
    eps = 1 if r_d > 0 else -1
    h1 = (r + n) / (r - n)
    radial_sq = h1 * r_d * r_d
    tau_on = abs(tau_d) > tol
    theta_on = abs(theta_d) > tol
    phi_on = abs(phi_d) > tol

    def anchored(trial: FamilyConstants, mode: str, now: dict) -> FamilyConstants:
        vals = curves(params, trial, r, mode)
        shift = {"t1": -vals["t"]}
        for key, anchor in (("tau", "tau1"), ("phi", "phi1"), ("theta", "theta1")):
            if key in vals:
                shift[anchor] = now[key] - vals[key]
        return replace(trial, **shift)

    if not (tau_on or theta_on or phi_on):
        trial = FamilyConstants(family="thm1", eps=eps, r1=math.sqrt(radial_sq))
        return anchored(trial, "aligned", {})
    if tau_on and not theta_on and not phi_on:
        tau0 = (r - n) / (r + n) * tau_d
        r1 = math.sqrt(radial_sq + 2 * tau0 * tau0 * n / (r - n))
        trial = FamilyConstants(family="thm2", eps=eps, r1=r1, tau0=tau0,
                                tau1=0.0)
        return anchored(trial, "aligned", {"tau": state.point.tau})
    if phi_on and not tau_on and not theta_on and abs(theta - np.pi / 2) <= tol:
        phi0 = (r * r - n * n) * phi_d
        r1 = math.sqrt(radial_sq + phi0 * phi0 / (r * r - n * n))
        trial = FamilyConstants(family="thm3", eps=eps, r1=r1, phi0=phi0,
                                phi1=0.0)
        return anchored(trial, "aligned", {"phi": state.point.phi})
    if theta_on and not tau_on and not phi_on:
        theta0 = (r * r - n * n) * theta_d
        r1 = math.sqrt(radial_sq + theta0 * theta0 / (r * r - n * n))
        trial = FamilyConstants(family="thm4", eps=eps, r1=r1, theta0=theta0,
                                theta1=0.0)
        return anchored(trial, "aligned", {"theta": state.point.theta})
    if tau_on and phi_on and not theta_on and abs(theta - np.pi / 2) > tol:
        ct = math.cos(theta)
        rp2 = (r + n) ** 2
        resid = (4 * n * n * ct / rp2 - ct) * phi_d + 2 * n / rp2 * tau_d
        if abs(resid) <= tol * (1.0 + abs(tau_d) + abs(phi_d)):
            phi0 = (r * r - n * n) * phi_d
            st = math.sin(theta)
            r1 = math.sqrt(radial_sq
                           + phi0 * phi0 * ct * ct / (2 * n * (r - n))
                           + phi0 * phi0 * st * st / (r * r - n * n))
            trial = FamilyConstants(family="thm5", eps=eps, r1=r1, phi0=phi0,
                                    theta_const=theta, tau1=0.0, phi1=0.0)
            return anchored(trial, "corrected",
                            {"tau": state.point.tau, "phi": state.point.phi})
    return FamilyConstants(family="generic", eps=eps,
                           r1=math.sqrt(norm(params, state)))


def default_invert_mode(family: str) -> str:
    """Mode used when inverting t(r): aligned for thm1-4 (so the time range
    starts exactly at t1) and corrected for thm5 (whose brackets already
    vanish at R+ and whose literal time scale is off by r1/sqrt(2n))."""
    if family not in _CURVE_FAMILIES:
        raise ConfigError(f"family {family!r} has no curve mode")
    return "corrected" if family == "thm5" else "aligned"


def invert_t_of_r(params: ModelParams, consts: FamilyConstants, t: float,
                  mode: str | None = None) -> float:
    """Solve t_curve(r) = t on the monotone branch r >= turning radius.

    The curve is strictly monotone (increasing for eps = +1, decreasing for
    eps = -1), so the inverse exists on one side of the curve's value at the
    turning radius; times on the other side raise RangeError."""
    fam = consts.family
    if fam not in _CURVE_FAMILIES:
        raise ConfigError(f"family {fam!r} has no closed-form curves")
    if mode is None:
        mode = default_invert_mode(fam)
    _check_mode(fam, mode)
    R = turning_radius(consts, params).value

    def t_of(rr: float) -> float:
        return curves(params, consts, rr, mode)["t"]

    t_turn = t_of(R)
    gap = consts.eps * (t - t_turn)
    if gap < 0:
        raise RangeError(
            f"t = {t} lies before the turning time {t_turn} on this branch")
    if gap == 0:
        return R
    hi = max(2 * R, R + params.n)
    while consts.eps * (t_of(hi) - t) < 0:
        hi *= 2
        if hi > 1e300:
            raise RangeError(f"t = {t} not reachable on this branch")
    return float(brentq(lambda rr: t_of(rr) - t, R, hi, xtol=1e-14))


def stitched_coords(params: ModelParams, consts: FamilyConstants, ts):
    """Full two-branch trajectory of a family, sampled at times ts.

    A family's closed forms describe one radial branch; the physical geodesic
    runs the branch in reverse down to the turning radius at time t1 and back
    out, with r even about t1 and each swept coordinate odd about its anchor:
    x(t1 - d) = 2 x1 - x(t1 + d). Returns a dict of arrays keyed 't', 'r',
    plus the family's swept coordinates. Inversion uses the family's default
    invert mode, so anchors hold exactly at t1."""
    fam = consts.family
    if fam not in _CURVE_FAMILIES:
        raise ConfigError(f"family {fam!r} has no closed-form curves")
    mode = default_invert_mode(fam)
    outgoing = replace(consts, eps=1)
    anchors = {"tau": consts.tau1, "phi": consts.phi1, "theta": consts.theta1}
    ts = np.asarray(ts, dtype=float)
    flat = np.atleast_1d(ts)
    out = {"t": flat.copy(), "r": np.empty_like(flat)}
    coord_keys = [k for k in ("tau", "theta", "phi") if anchors[k] is not None]
    for key in coord_keys:
        out[key] = np.empty_like(flat)
    for i, t in enumerate(flat):
        mirrored = t < consts.t1
        r = invert_t_of_r(params, outgoing, consts.t1 + abs(t - consts.t1), mode)
        out["r"][i] = r
        if coord_keys:
            vals = curves(params, outgoing, r, mode)
            for key in coord_keys:
                x = vals[key]
                out[key][i] = 2 * anchors[key] - x if mirrored else x
    return out


def family_to_json(consts: FamilyConstants, params: ModelParams) -> dict:
    """Serialize a curve family (with its n) to a plain JSON-ready dict with
    a fixed, family-specific key order."""
    fam = consts.family
    if fam not in _JSON_FIELDS:
        raise ConfigError(f"family {fam!r} is not serializable")
    obj = {}
    for key in _JSON_FIELDS[fam]:
        if key == "family":
            obj[key] = fam
        elif key == "eps":
            obj[key] = int(consts.eps)
        elif key == "n":
            obj[key] = float(params.n)
        else:
            obj[key] = float(getattr(consts, key))
    return obj


def family_from_json(obj: dict) -> tuple[FamilyConstants, ModelParams]:
    """Inverse of family_to_json. The key set must match the family exactly;
    unknown or missing keys raise ConfigError."""
    if not isinstance(obj, dict):
        raise ConfigError("family record must be a JSON object")
    fam = obj.get("family")
    if fam not in _JSON_FIELDS:
        raise ConfigError(f"unknown or missing family tag {fam!r}")
    expected = _JSON_FIELDS[fam]
    for key in expected:
        if key not in obj:
            raise ConfigError(f"family {fam!r} record is missing {key!r}")
    for key in obj:
        if key not in expected:
            raise ConfigError(f"family {fam!r} record does not take {key!r}")
    values = {}
    for key in expected:
        if key == "family":
            continue
        value = obj[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key!r} must be a number")
        values[key] = value
    params = ModelParams(n=float(values.pop("n")))
    eps = values.pop("eps")
    if eps not in (1, -1):
        raise ConfigError("eps must be +1 or -1")
    consts = FamilyConstants(family=fam, eps=int(eps),
                             **{k: float(v) for k, v in values.items()})
    return consts, params
