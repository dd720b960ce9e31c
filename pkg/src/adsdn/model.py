"""Per-mode scalar reduction of the slab geometry."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

from .errors import ExceptionalMass, ExceptionalParameter
from .specfun import OrderParam


def check_mass(nu) -> complex:
    """Validate a mass parameter; integers and half-integers are excluded."""
    op = OrderParam(complex(nu))
    if op.is_integer:
        raise ExceptionalMass(f"nu = {nu} is an integer (pole of Gamma(-nu))")
    op.require_admissible()
    return complex(nu)


def check_symbol(a) -> complex:
    a = complex(a)
    if a == 0:
        raise ExceptionalParameter("mode symbol a = 0 (null mode) is excluded")
    if a.imag == 0 and a.real < 0:
        raise ExceptionalParameter(f"mode symbol a = {a} lies on the branch cut; add a retarded i*eps")
    return a


def default_slab(a0) -> float:
    """Slab depth where the decaying mode has dropped by about e^-10.

    Nearly timelike modes decay only through the retarded shift; there the
    depth is capped at 30/|sqrt(a0)| to keep the Frobenius match convergent.
    """
    b = cmath.sqrt(complex(a0))
    return min(10.0 / max(b.real, 1e-12), 30.0 / abs(b))


@dataclass(frozen=True)
class ModeModel:
    """Mode ODE  -u'' + (nu^2-1/4) u/x^2 + c(x)(x u' + (d-1)/2 u) + a(x) u = 0.

    ``a_taylor`` and ``c_taylor`` hold Taylor coefficients used on
    (0, slab_eps).  Beyond ``slab_eps`` the model is frozen: a(x) = a(slab_eps)
    and c(x) = 0, so the decaying solution there is a K-Bessel function.
    """

    nu: complex
    a_taylor: tuple = (1.0,)
    c_taylor: tuple = ()
    d: int = 1
    slab_eps: float | None = None
    even: bool = True

    def __post_init__(self):
        object.__setattr__(self, "a_taylor", tuple(complex(v) for v in self.a_taylor))
        object.__setattr__(self, "c_taylor", tuple(complex(v) for v in self.c_taylor))
        check_mass(self.nu)
        if not self.a_taylor:
            raise ExceptionalParameter("a_taylor needs at least a_0")
        check_symbol(self.a_taylor[0])
        if self.even and len(self.a_taylor) > 1 and self.a_taylor[1] != 0:
            raise ExceptionalParameter("evenness flag set but a_1 != 0")
        if self.d < 1:
            raise ValueError("boundary dimension d must be positive")
        if self.slab_eps is None:
            object.__setattr__(self, "slab_eps", default_slab(self.a_taylor[0]))

    @property
    def a0(self) -> complex:
        return self.a_taylor[0]

    def a_of(self, x: float) -> complex:
        x = min(x, self.slab_eps)
        return sum(c * x**k for k, c in enumerate(self.a_taylor))

    def c_of(self, x: float) -> complex:
        if x > self.slab_eps:
            return 0j
        return sum(c * x**k for k, c in enumerate(self.c_taylor))

    @property
    def a_tail(self) -> complex:
        return self.a_of(self.slab_eps)

    @property
    def is_product(self) -> bool:
        return all(v == 0 for v in self.a_taylor[1:]) and all(v == 0 for v in self.c_taylor)

    def with_coeffs(self, a_taylor=None, c_taylor=None) -> "ModeModel":
        return ModeModel(
            self.nu,
            self.a_taylor if a_taylor is None else tuple(a_taylor),
            self.c_taylor if c_taylor is None else tuple(c_taylor),
            self.d,
            self.slab_eps,
            self.even,
        )

    def to_dict(self) -> dict:
        def enc(z):
            return [z.real, z.imag]

        return {
            "nu": enc(complex(self.nu)),
            "a_taylor": [enc(v) for v in self.a_taylor],
            "c_taylor": [enc(v) for v in self.c_taylor],
            "d": self.d,
            "slab_eps": self.slab_eps,
            "even": self.even,
        }
