"""Norm statements and the predicate trees they carry."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Tuple, Union

JURISDICTIONS = ("supranational", "national", "regional", "local")
DEONTICS = ("permission", "obligation", "prohibition")
CHARACTERS = ("discriminatory", "distributive", "neutral")
ENFORCEMENTS = ("removal", "sanction")
COMPARATORS = ("==", "!=", "<", "<=", ">", ">=")

# closed atom vocabulary: field -> kind of literal it compares against
FIELD_KINDS = {
    "age": "number",
    "income": "number",
    "wealth": "number",
    "status": "token",
    "gender": "token",
    "residency": "bool",
    "has_bank_account": "bool",
    "address": "address",
}


class NormError(ValueError):
    """Base class for norm document problems."""


class NormSyntaxError(NormError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class UnknownFieldError(NormSyntaxError):
    def __init__(self, name: str, line: int, column: int):
        super().__init__(f"unknown predicate field {name!r}", line, column)
        self.name = name


class NormValidationError(NormError):
    def __init__(self, norm_id: str, message: str):
        super().__init__(f"norm {norm_id!r}: {message}")
        self.norm_id = norm_id


# -- predicates ---------------------------------------------------------------


@dataclass(frozen=True)
class TruePred:
    """Literal true, spelled ``anyone`` or ``always``."""


@dataclass(frozen=True)
class Compare:
    field: str
    op: str
    # int/float for numbers, bool, str for tokens and address ids, None for null
    value: Union[int, float, bool, str, None]


@dataclass(frozen=True)
class Performed:
    action: str


@dataclass(frozen=True)
class Not:
    operand: "Predicate"


@dataclass(frozen=True)
class And:
    operands: Tuple["Predicate", ...]


@dataclass(frozen=True)
class Or:
    operands: Tuple["Predicate", ...]


Predicate = Union[TruePred, Compare, Performed, Not, And, Or]

ALWAYS = TruePred()


# -- aims and consequences ----------------------------------------------------


@dataclass(frozen=True)
class ActionRef:
    action: str


@dataclass(frozen=True)
class Consequence:
    kind: str  # "fine", "transfer" or "none"
    minimum: int = 0
    maximum: int = 0
    amount: int = 0

    def __post_init__(self) -> None:
        if self.kind not in ("fine", "transfer", "none"):
            raise ValueError(f"unknown consequence kind {self.kind!r}")
        if self.kind == "fine" and not 0 <= self.minimum <= self.maximum:
            raise ValueError(f"fine bounds must satisfy 0 <= min <= max, got {self.minimum}, {self.maximum}")
        if self.kind == "transfer" and self.amount < 0:
            raise ValueError(f"transfer amount must be >= 0, got {self.amount}")

    @classmethod
    def fine(cls, minimum: int, maximum: int) -> "Consequence":
        return cls("fine", minimum=minimum, maximum=maximum)

    @classmethod
    def transfer(cls, amount: int) -> "Consequence":
        return cls("transfer", amount=amount)


NO_CONSEQUENCE = Consequence("none")

Aim = Union[ActionRef, Consequence]


@dataclass(frozen=True)
class NormStatement:
    id: str
    deontic: str
    aim: Aim
    attribute: Predicate = ALWAYS
    condition: Predicate = ALWAYS
    or_else: Consequence = NO_CONSEQUENCE
    jurisdiction: str = "local"
    source: str = ""
    character: str = "neutral"
    degree: float = 0.0
    active: bool = True
    enforcement: str = "removal"

    def __post_init__(self) -> None:
        validate_norm(self)

    @property
    def aim_action(self) -> Optional[str]:
        return self.aim.action if isinstance(self.aim, ActionRef) else None


def validate_norm(norm: NormStatement) -> None:
    def fail(msg: str) -> None:
        raise NormValidationError(norm.id, msg)

    if norm.deontic not in DEONTICS:
        fail(f"deontic must be one of {DEONTICS}, got {norm.deontic!r}")
    if norm.jurisdiction not in JURISDICTIONS:
        fail(f"jurisdiction must be one of {JURISDICTIONS}, got {norm.jurisdiction!r}")
    if norm.character not in CHARACTERS:
        fail(f"character must be one of {CHARACTERS}, got {norm.character!r}")
    if norm.enforcement not in ENFORCEMENTS:
        fail(f"enforcement must be one of {ENFORCEMENTS}, got {norm.enforcement!r}")
    if not 0.0 <= norm.degree <= 1.0:
        fail(f"degree must lie in [0, 1], got {norm.degree!r}")
    if norm.deontic == "permission":
        if not isinstance(norm.aim, ActionRef):
            fail("a permission must aim at an action(...)")
        if norm.or_else.kind != "none":
            fail("a permission cannot carry an or_else consequence")
    elif norm.deontic == "obligation":
        if not isinstance(norm.aim, Consequence):
            fail("an obligation must aim at a consequence (fine, transfer or none)")
    else:
        if not isinstance(norm.aim, ActionRef):
            fail("a prohibition must aim at an action(...)")
    if norm.enforcement == "sanction":
        if norm.deontic != "prohibition":
            fail("enforcement: sanction only applies to prohibitions")
        if norm.or_else.kind == "none":
            fail("a sanction-mode prohibition needs an or_else consequence")


def with_active(norm: NormStatement, active: bool) -> NormStatement:
    return replace(norm, active=active)
