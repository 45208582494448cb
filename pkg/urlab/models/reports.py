"""
Report data models

Results of the diagnostics run by the laboratory. Every report is a
validated dataclass that serializes to plain dictionaries.
"""

import math
from dataclasses import dataclass, field

from ..exceptions import ValidationError
from .base import ValidatedModel


@dataclass
class AhlforsReport(ValidatedModel):
    """Empirical Ahlfors-regularity ratios of a boundary sample"""

    ratio_min: float
    ratio_max: float
    c_sigma: float
    slope: float
    trials: int
    r_min: float
    r_max: float
    regularity_failure: bool

    def validate(self) -> None:
        """Validate ratio bounds"""
        if self.trials < 1:
            raise ValidationError("Ahlfors report needs at least one trial")
        if self.ratio_min > self.ratio_max:
            raise ValidationError("ratio_min exceeds ratio_max")


@dataclass
class UniformityReport(ValidatedModel):
    """Corkscrew and Harnack-chain constants measured on a domain"""

    epsilon: float
    chain_length_fit: tuple[float, float]
    samples_tested: int
    n_prime: int = 0
    chain_lengths: list[int] = field(default_factory=list)
    lambdas: list[float] = field(default_factory=list)
    step_condition_ok: bool = True

    def validate(self) -> None:
        """Validate the corkscrew constant range"""
        if not 0.0 < self.epsilon <= 1.0:
            raise ValidationError(f"Corkscrew constant out of range: {self.epsilon}")
        if self.samples_tested < 0:
            raise ValidationError("samples_tested cannot be negative")


@dataclass
class SolveReport(ValidatedModel):
    """Outcome of one sparse solve"""

    residual: float
    weighted_residual: float
    iterations: int
    solver: str
    tolerance: float
    positive: bool | None = None
    m_matrix: bool = True
    unknowns: int = 0

    def validate(self) -> None:
        """Validate residual bookkeeping"""
        if self.iterations < 0:
            raise ValidationError("Iterations cannot be negative")
        if self.tolerance <= 0:
            raise ValidationError("Tolerance must be positive")


@dataclass
class GradientBoundReport(ValidatedModel):
    """Supremum of delta |grad u| / u over tested nodes"""

    sup: float
    argmax: list[float]
    nodes_tested: int

    def validate(self) -> None:
        """Validate the supremum"""
        if self.nodes_tested > 0 and not math.isfinite(self.sup):
            raise ValidationError("Gradient bound supremum is not finite")


@dataclass
class CaccioppoliReport(ValidatedModel):
    """Whitney-cube Caccioppoli ratios for ln(u/D)"""

    constant: float
    cubes_tested: int
    min_side: float
    worst_center: list[float] = field(default_factory=list)
    ratios: list[float] = field(default_factory=list)

    def validate(self) -> None:
        """Validate the constant"""
        if self.constant < 0:
            raise ValidationError("Caccioppoli constant cannot be negative")


@dataclass
class BallValue(ValidatedModel):
    """Normalized Carleson integral over one boundary ball"""

    center: list[float]
    r: float
    value: float | None
    cells_used: int
    reason: str = ""

    @property
    def present(self) -> bool:
        return self.value is not None

    def validate(self) -> None:
        """Validate ball data"""
        if self.r <= 0:
            raise ValidationError("Ball radius must be positive")
        if self.value is not None and self.value < 0:
            raise ValidationError("Carleson values are nonnegative")


@dataclass
class TrendSummary(ValidatedModel):
    """Behavior of a supremum across a refinement ladder"""

    hs: list[float]
    sups: list[float]
    slope: float
    relative_slope: float
    ratios: list[float]
    differences: list[float]
    classification: str

    @property
    def is_divergent(self) -> bool:
        return self.classification in ("diverging", "log_divergent")

    def bounded_within(self, factor: float) -> bool:
        """Whether max/min of the ladder sups stays within factor"""
        positive = [s for s in self.sups if s > 0]
        if not positive:
            return True
        return max(positive) <= factor * min(positive)

    def validate(self) -> None:
        """Validate ladder consistency"""
        if len(self.hs) != len(self.sups):
            raise ValidationError("Ladder and supremum lists differ in length")
        if self.classification not in ("bounded", "diverging", "log_divergent"):
            raise ValidationError(f"Unknown trend class: {self.classification}")


@dataclass
class CarlesonReport(ValidatedModel):
    """Per-ball normalized integrals and their supremum"""

    tag: str
    h: float
    cutoff: float
    d: float
    n: int
    scales: list[float]
    balls: list[BallValue]
    sup: float
    argmax: BallValue | None
    coverage: float
    trend: TrendSummary | None = None

    @property
    def present(self) -> list[BallValue]:
        return [b for b in self.balls if b.present]

    def validate(self) -> None:
        """Validate the supremum against the table"""
        values = [b.value for b in self.balls if b.value is not None]
        if values and abs(max(values) - self.sup) > 1e-12 * max(1.0, abs(self.sup)):
            raise ValidationError("Reported sup differs from the table maximum")
        if not values and self.sup != 0.0:
            raise ValidationError("Empty table must report sup 0")


@dataclass
class DKPReport(ValidatedModel):
    """L-infinity and Carleson behavior of D |grad A|"""

    sup_delta_grad: float
    cutoffs: list[float]
    reports: list[CarlesonReport]
    trend: TrendSummary
    is_dkp: bool

    def validate(self) -> None:
        """Validate ladder bookkeeping"""
        if len(self.cutoffs) != len(self.reports):
            raise ValidationError("One Carleson report per cutoff is required")


@dataclass
class BetaReport(ValidatedModel):
    """Bilateral beta numbers and BWGL packing statistics"""

    epsilon: float
    values: dict[int, float | None]
    seed_values: dict[int, float | None]
    generations: dict[int, int]
    planes: dict[int, dict[str, list]]
    ratios: dict[int, float]
    max_ratio: float

    def rows(self) -> list[tuple[int, int, float | None, bool]]:
        """CSV rows (cube_id, k, bbeta, is_bad)"""
        out = []
        for cube_id in sorted(self.values):
            value = self.values[cube_id]
            out.append(
                (
                    cube_id,
                    self.generations[cube_id],
                    value,
                    value is not None and value > self.epsilon,
                )
            )
        return out

    def validate(self) -> None:
        """Validate beta values"""
        if self.epsilon <= 0:
            raise ValidationError("BWGL threshold must be positive")
        for value in self.values.values():
            if value is not None and value < 0:
                raise ValidationError("Beta numbers are nonnegative")


@dataclass
class EikonalReport(ValidatedModel):
    """Outcome of the constant-gradient implies distance check"""

    is_const_grad: bool
    c: float
    oscillation: float
    max_error: float
    passed: bool
    nodes_tested: int

    def validate(self) -> None:
        """Validate the gradient constant"""
        if self.c < 0:
            raise ValidationError("Gradient constant cannot be negative")


@dataclass
class DistanceHessianReport(ValidatedModel):
    """Finite-difference and closed-form Hessians of a convex-body distance"""

    t: float
    curvatures: list[float]
    finite_difference: list[list[float]]
    closed_form: list[list[float]]
    direct_form: list[list[float]]
    discrepancy: float
    l_delta: float
    l_delta_sign: int

    def validate(self) -> None:
        """Validate the distance parameter"""
        if self.t <= 0:
            raise ValidationError("Distance parameter t must be positive")
