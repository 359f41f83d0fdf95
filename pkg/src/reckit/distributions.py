"""One-dimensional distributions and target/proposal pairs.

Three families are supported: Gaussian, Uniform, and disjoint mixtures of
uniforms. Every family exposes an exact CDF, an inverse CDF accurate to
better than 1e-9 in probability, and a log density. A :class:`PairSpec`
bundles a target together with an absolutely continuous proposal and owns
the density-ratio machinery (pointwise log ratio, ratio mode, regional
upper bounds, and closed-form KL / Renyi-infinity divergences) that the
search coders consume.

Regions are open intervals with extended-real endpoints. Restricted
sampling maps a unit uniform through the proposal CDF, so an encoder and
a decoder that walk the same region arithmetic reproduce samples bit for
bit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .errors import (
    AbsoluteContinuityError,
    DegenerateRegionError,
    DomainError,
    UnboundedRatioError,
)

_SQRT2 = math.sqrt(2.0)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)

INF = math.inf


@dataclass(frozen=True, slots=True)
class Region:
    """Open interval (low, high); endpoints may be +-inf."""

    low: float
    high: float

    def __post_init__(self) -> None:
        if not self.low < self.high:
            raise DegenerateRegionError(
                f"region requires low < high, got ({self.low}, {self.high})"
            )

    def contains(self, x: float) -> bool:
        return self.low < x < self.high


FULL_LINE = Region(-INF, INF)


class Distribution1D:
    """Base class: CDF/inverse-CDF/log-density over the real line."""

    family = "abstract"

    def cdf(self, x: float) -> float:
        raise NotImplementedError

    def inv_cdf(self, u: float) -> float:
        raise NotImplementedError

    def log_pdf(self, x: float) -> float:
        raise NotImplementedError

    def support(self) -> Region:
        raise NotImplementedError

    def pdf(self, x: float) -> float:
        lp = self.log_pdf(x)
        return math.exp(lp) if lp > -INF else 0.0

    def mass(self, region: Region) -> float:
        return self.cdf(region.high) - self.cdf(region.low)

    def to_dict(self) -> dict:
        raise NotImplementedError

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @staticmethod
    def _check_unit(u: float) -> None:
        if not 0.0 < u < 1.0:
            raise DomainError(f"inverse CDF needs u in (0, 1), got {u}")


# Acklam's rational approximation to the standard normal quantile.
# Max relative error ~1.15e-9 on its own; one residual correction step
# against the erfc-based CDF below pushes |cdf(inv_cdf(u)) - u| to the
# 1e-15 scale away from the extreme tails.
_ACK_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
          1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_ACK_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
          6.680131188771972e+01, -1.328068155288572e+01)
_ACK_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
          -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_ACK_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
          3.754408661907416e+00)
_ACK_LOW = 0.02425


def _std_normal_cdf(z: float) -> float:
    return 0.5 * math.erfc(-z / _SQRT2)


def _std_normal_sf(z: float) -> float:
    return 0.5 * math.erfc(z / _SQRT2)


def _std_normal_quantile(u: float) -> float:
    """Standard normal inverse CDF: rational approximation plus one
    residual correction step evaluated through erfc."""
    if u <= 0.0 or u >= 1.0:
        raise DomainError(f"standard normal quantile needs u in (0, 1), got {u}")
    a, b, c, d = _ACK_A, _ACK_B, _ACK_C, _ACK_D
    if u < _ACK_LOW:
        q = math.sqrt(-2.0 * math.log(u))
        z = ((((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5])
             / ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0))
    elif u <= 1.0 - _ACK_LOW:
        q = u - 0.5
        r = q * q
        z = ((((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q
             / (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0))
    else:
        q = math.sqrt(-2.0 * math.log1p(-u))
        z = -((((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5])
              / ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0))
    # Residual in probability, formed on whichever side avoids cancellation.
    if u <= 0.5:
        resid = _std_normal_cdf(z) - u
    else:
        resid = (1.0 - u) - _std_normal_sf(z)
    # One Newton-type step with a second-order (Halley) correction term.
    t = resid * math.sqrt(2.0 * math.pi) * math.exp(0.5 * z * z)
    return z - t / (1.0 + 0.5 * z * t)


@dataclass(frozen=True, slots=True)
class Gaussian(Distribution1D):
    """Normal distribution with given mean and variance."""

    mean: float
    variance: float
    family = "gaussian"

    def __post_init__(self) -> None:
        if not self.variance > 0.0 or not math.isfinite(self.variance):
            raise DomainError(f"variance must be finite and positive, got {self.variance}")
        if not math.isfinite(self.mean):
            raise DomainError(f"mean must be finite, got {self.mean}")

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)

    def cdf(self, x: float) -> float:
        if x == -INF:
            return 0.0
        if x == INF:
            return 1.0
        return _std_normal_cdf((x - self.mean) / self.std)

    def inv_cdf(self, u: float) -> float:
        self._check_unit(u)
        return self.mean + self.std * _std_normal_quantile(u)

    def log_pdf(self, x: float) -> float:
        if not math.isfinite(x):
            return -INF
        z = (x - self.mean) / self.std
        return -0.5 * z * z - math.log(self.std) - _LOG_SQRT_2PI

    def support(self) -> Region:
        return FULL_LINE

    def to_dict(self) -> dict:
        return {"family": "gaussian", "mean": self.mean, "variance": self.variance}


@dataclass(frozen=True, slots=True)
class Uniform(Distribution1D):
    """Uniform distribution given by its center and total width."""

    center: float
    width: float
    family = "uniform"

    def __post_init__(self) -> None:
        if not self.width > 0.0 or not math.isfinite(self.width):
            raise DomainError(f"width must be finite and positive, got {self.width}")
        if not math.isfinite(self.center):
            raise DomainError(f"center must be finite, got {self.center}")

    @property
    def low(self) -> float:
        return self.center - 0.5 * self.width

    @property
    def high(self) -> float:
        return self.center + 0.5 * self.width

    def cdf(self, x: float) -> float:
        if x <= self.low:
            return 0.0
        if x >= self.high:
            return 1.0
        return (x - self.low) / self.width

    def inv_cdf(self, u: float) -> float:
        self._check_unit(u)
        return self.low + u * self.width

    def log_pdf(self, x: float) -> float:
        if self.low <= x <= self.high:
            return -math.log(self.width)
        return -INF

    def support(self) -> Region:
        return Region(self.low, self.high)

    def to_dict(self) -> dict:
        return {"family": "uniform", "center": self.center, "width": self.width}


@dataclass(frozen=True, slots=True)
class MixtureComponent:
    weight: float
    low: float
    high: float

    def __post_init__(self) -> None:
        if not self.low < self.high:
            raise DomainError(f"component needs low < high, got ({self.low}, {self.high})")
        if not 0.0 < self.weight <= 1.0:
            raise DomainError(f"component weight must be in (0, 1], got {self.weight}")

    @property
    def length(self) -> float:
        return self.high - self.low


@dataclass(frozen=True, slots=True)
class UniformMixture(Distribution1D):
    """Mixture of pairwise-disjoint uniform components.

    Components must be sorted by position, non-overlapping, and carry
    weights summing to one within 1e-12.
    """

    components: tuple[MixtureComponent, ...]
    family = "uniform_mixture"

    def __post_init__(self) -> None:
        comps = tuple(self.components)
        if not comps:
            raise DomainError("mixture needs at least one component")
        object.__setattr__(self, "components", comps)
        for a, b in zip(comps, comps[1:]):
            if b.low < a.high:
                raise DomainError(
                    f"components overlap or are unsorted near ({a.high}, {b.low})"
                )
        total = math.fsum(c.weight for c in comps)
        if abs(total - 1.0) > 1e-12:
            raise DomainError(f"component weights sum to {total}, expected 1")

    def _cum_weights(self) -> list[float]:
        out, acc = [], 0.0
        for c in self.components:
            acc += c.weight
            out.append(acc)
        out[-1] = 1.0
        return out

    def cdf(self, x: float) -> float:
        if x <= self.components[0].low:
            return 0.0
        acc = 0.0
        for c in self.components:
            if x < c.low:
                return acc
            if x < c.high:
                return acc + c.weight * (x - c.low) / c.length
            acc += c.weight
        return 1.0

    def inv_cdf(self, u: float) -> float:
        self._check_unit(u)
        acc = 0.0
        for c in self.components[:-1]:
            nxt = acc + c.weight
            if u <= nxt:
                return c.low + (u - acc) / c.weight * c.length
            acc = nxt
        c = self.components[-1]
        return c.low + (u - acc) / c.weight * c.length

    def log_pdf(self, x: float) -> float:
        for c in self.components:
            if c.low <= x <= c.high:
                return math.log(c.weight) - math.log(c.length)
        return -INF

    def support(self) -> Region:
        return Region(self.components[0].low, self.components[-1].high)

    def to_dict(self) -> dict:
        return {
            "family": "uniform_mixture",
            "components": [
                {"weight": c.weight, "low": c.low, "high": c.high}
                for c in self.components
            ],
        }


def distribution_from_dict(data: dict) -> Distribution1D:
    try:
        family = data["family"]
    except (KeyError, TypeError):
        raise DomainError(f"distribution dict needs a 'family' key: {data!r}") from None
    if family == "gaussian":
        return Gaussian(float(data["mean"]), float(data["variance"]))
    if family == "uniform":
        return Uniform(float(data["center"]), float(data["width"]))
    if family == "uniform_mixture":
        comps = tuple(
            MixtureComponent(float(c["weight"]), float(c["low"]), float(c["high"]))
            for c in data["components"]
        )
        return UniformMixture(comps)
    raise DomainError(f"unknown family {family!r}")


def distribution_from_json(text: str) -> Distribution1D:
    return distribution_from_dict(json.loads(text))


def sample_restricted(dist: Distribution1D, region: Region, u: float) -> float:
    """Draw the u-quantile of ``dist`` conditioned on ``region``.

    Computes x = inv_cdf(cdf(low) + u * (cdf(high) - cdf(low))). The result
    lies strictly inside the region except where float resolution collapses
    the quantile onto an endpoint.
    """
    Distribution1D._check_unit(u)
    ulow = dist.cdf(region.low)
    uhigh = dist.cdf(region.high)
    return sample_restricted_u(dist, ulow, uhigh, u)


def sample_restricted_u(dist: Distribution1D, ulow: float, uhigh: float, u: float) -> float:
    """Restricted sampling given precomputed CDF endpoints.

    The search tree caches CDF values of region endpoints; routing both the
    public entry point and the tree through this one expression keeps
    encoder and decoder bit-identical.
    """
    span = uhigh - ulow
    if not span > 0.0:
        raise DegenerateRegionError(
            f"region carries no proposal mass (cdf span {span})"
        )
    return dist.inv_cdf(ulow + u * span)


class PairSpec:
    """A target distribution Q paired with a proposal P, Q << P.

    Owns everything the coders need about the density ratio r = dQ/dP:
    pointwise log ratio, the maximizing point, supremum bounds over
    regions, and closed-form divergences.
    """

    def __init__(self, target: Distribution1D, proposal: Distribution1D):
        if isinstance(proposal, UniformMixture):
            raise DomainError("uniform-mixture proposals are not supported")
        if isinstance(proposal, Uniform):
            sup_q = target.support()
            if isinstance(target, Gaussian):
                raise AbsoluteContinuityError(
                    "gaussian target has unbounded support; uniform proposal cannot cover it"
                )
            if sup_q.low < proposal.low or sup_q.high > proposal.high:
                raise AbsoluteContinuityError(
                    f"target support ({sup_q.low}, {sup_q.high}) not inside "
                    f"proposal support ({proposal.low}, {proposal.high})"
                )
        if isinstance(target, UniformMixture) and not isinstance(proposal, Uniform):
            raise AbsoluteContinuityError(
                "uniform-mixture targets require a covering uniform proposal"
            )
        self.target = target
        self.proposal = proposal

    # -- pointwise ratio ---------------------------------------------------

    def log_ratio(self, x: float) -> float:
        """log(dQ/dP)(x); -inf where q(x) = 0 inside the proposal support."""
        p = self.proposal
        sup_p = p.support()
        if not (sup_p.low <= x <= sup_p.high) or not math.isfinite(x):
            raise DomainError(f"x={x} outside proposal support")
        q = self.target
        if isinstance(q, Gaussian) and isinstance(p, Gaussian):
            zs = (x - q.mean)
            zp = (x - p.mean)
            return (
                0.5 * math.log(p.variance / q.variance)
                + zp * zp / (2.0 * p.variance)
                - zs * zs / (2.0 * q.variance)
            )
        lq = q.log_pdf(x)
        if lq == -INF:
            return -INF
        return lq - p.log_pdf(x)

    def ratio_mode(self) -> float:
        """A point attaining sup log r over the proposal support.

        For a Gaussian pair this requires target variance < proposal
        variance (otherwise the ratio is unbounded). Identical target and
        proposal return the proposal mean by convention.
        """
        q, p = self.target, self.proposal
        if q == p:
            if isinstance(p, Gaussian):
                return p.mean
            if isinstance(p, Uniform):
                return p.center
        if isinstance(q, Gaussian) and isinstance(p, Gaussian):
            if q.variance >= p.variance:
                raise UnboundedRatioError(
                    "density ratio is unbounded unless target variance < proposal variance"
                )
            return (q.mean * p.variance - p.mean * q.variance) / (p.variance - q.variance)
        if isinstance(q, Uniform) and isinstance(p, Uniform):
            return q.center
        if isinstance(q, Uniform) and isinstance(p, Gaussian):
            # log r is convex on the target support: max at the endpoint
            # farther from the proposal mean.
            a, b = q.low, q.high
            return a if abs(a - p.mean) >= abs(b - p.mean) else b
        if isinstance(q, UniformMixture):
            best = max(q.components, key=lambda c: c.weight / c.length)
            return 0.5 * (best.low + best.high)
        raise DomainError("unsupported pair")  # pragma: no cover

    def _endpoint_log_ratio(self, x: float) -> float:
        """Limit of log r approaching x from inside the proposal support."""
        q, p = self.target, self.proposal
        if isinstance(q, Gaussian) and isinstance(p, Gaussian):
            if not math.isfinite(x):
                if q.variance < p.variance:
                    return -INF
                if q.variance > p.variance:
                    return INF
                # equal variances: linear log ratio, sign of the slope decides
                slope = (q.mean - p.mean) / q.variance
                if slope == 0.0:
                    return 0.0
                return INF if (slope > 0.0) == (x == INF) else -INF
            return self.log_ratio(x)
        sup_p = p.support()
        xc = min(max(x, sup_p.low), sup_p.high)
        if not math.isfinite(xc):
            return -INF
        lq = q.log_pdf(xc)
        return -INF if lq == -INF else lq - p.log_pdf(xc)

    def bound_M(self, region: Region) -> float:
        """sup of log r over the region (intersected with proposal support).

        Exact for every supported pair: the supremum of the ratio on an
        interval sits either at the ratio mode or at an interval endpoint,
        and for mixture targets it is a maximum of per-component constants.
        """
        q = self.target
        if isinstance(q, UniformMixture):
            best = -INF
            for c in q.components:
                if c.high > region.low and c.low < region.high:
                    val = math.log(c.weight) - math.log(c.length) \
                        - self.proposal.log_pdf(0.5 * (max(c.low, region.low)
                                                       + min(c.high, region.high)))
                    if val > best:
                        best = val
            return best
        lo = self._endpoint_log_ratio(region.low)
        hi = self._endpoint_log_ratio(region.high)
        best = lo if lo >= hi else hi
        try:
            mode = self.ratio_mode()
        except UnboundedRatioError:
            return best
        if region.contains(mode):
            val = self.log_ratio(mode)
            if val > best:
                best = val
        return best

    # -- divergences ---------------------------------------------------------

    def analytic_kl(self) -> float:
        """KL(Q || P) in nats, closed form per family pair."""
        q, p = self.target, self.proposal
        if isinstance(q, Gaussian) and isinstance(p, Gaussian):
            dm = q.mean - p.mean
            return (
                0.5 * math.log(p.variance / q.variance)
                + (q.variance + dm * dm) / (2.0 * p.variance)
                - 0.5
            )
        if isinstance(q, Uniform) and isinstance(p, Uniform):
            return math.log(p.width / q.width)
        if isinstance(q, UniformMixture) and isinstance(p, Uniform):
            return math.fsum(
                c.weight * math.log(c.weight * p.width / c.length)
                for c in q.components
            )
        if isinstance(q, Uniform) and isinstance(p, Gaussian):
            # E_Q[(x - mean_p)^2] for uniform Q has a cubic closed form.
            a, b = q.low - p.mean, q.high - p.mean
            second_moment = (b * b * b - a * a * a) / (3.0 * (b - a))
            return (
                -math.log(q.width)
                + math.log(p.std)
                + _LOG_SQRT_2PI
                + second_moment / (2.0 * p.variance)
            )
        raise DomainError("unsupported pair")  # pragma: no cover

    def analytic_dinf(self) -> float:
        """Renyi divergence of order infinity, sup log r, in nats.

        +inf is a legitimate value (Gaussian pair with target variance
        >= proposal variance and different means).
        """
        q, p = self.target, self.proposal
        if isinstance(q, Gaussian) and isinstance(p, Gaussian):
            if q.variance < p.variance:
                dm = q.mean - p.mean
                return (
                    0.5 * math.log(p.variance / q.variance)
                    + dm * dm / (2.0 * (p.variance - q.variance))
                )
            if q.variance == p.variance and q.mean == p.mean:
                return 0.0
            return INF
        return self.bound_M(FULL_LINE)

    # -- serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        return {"target": self.target.to_dict(), "proposal": self.proposal.to_dict()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @staticmethod
    def from_dict(data: dict) -> "PairSpec":
        return PairSpec(
            distribution_from_dict(data["target"]),
            distribution_from_dict(data["proposal"]),
        )

    @staticmethod
    def from_json(text: str) -> "PairSpec":
        return PairSpec.from_dict(json.loads(text))
