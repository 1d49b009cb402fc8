"""Exception types shared across the package."""

from __future__ import annotations


class ActorKernelError(Exception):
    """Base class for all errors raised by this package."""


class AddressForgeryError(ActorKernelError):
    """Attempt to construct an actor address from a raw ordinal."""


class UnknownBehavior(ActorKernelError):
    """Behavior name is not present in the behavior registry."""


class UnknownMessage(ActorKernelError):
    """msg_id does not name an in-transit message."""


class DanglingAddress(ActorKernelError):
    """An address refers to no actor in this configuration."""


class LocalityViolation(ActorKernelError):
    """A delivery tried to use an address outside its provenance set."""

    def __init__(self, address, context: str) -> None:
        super().__init__(f"address {address} used in {context} is outside provenance")
        self.address = address
        self.context = context


class BehaviorError(ActorKernelError):
    """Raised inside a behavior to throw a value at the customer.

    The kernel converts it into a response of kind ``threw`` (or records an
    orphan exception when the message carried no customer).
    """

    def __init__(self, value) -> None:
        super().__init__(f"behavior threw {value!r}")
        self.value = value


class UnknownEvent(ActorKernelError):
    """Event id is not present in the trace."""


class UnknownPredicate(ActorKernelError):
    """State predicate name is not registered."""


class PolicyMismatch(ActorKernelError):
    """Operation precondition on the producing policy is not met."""


class ExplosionGuard(ActorKernelError):
    """Exhaustive exploration exceeded the configured configuration cap."""


class BudgetExceeded(ActorKernelError):
    """A saturation/firing budget was exhausted."""


class UnknownTheory(ActorKernelError):
    """Theory id is not present in the store."""


class PremiseMissing(ActorKernelError):
    """A deduction rule was applied without all of its premises."""

    def __init__(self, rule: str, which: str) -> None:
        super().__init__(f"rule {rule}: missing premise {which}")
        self.rule = rule
        self.which = which


class UnknownScenario(ActorKernelError):
    """Scenario name is not in the registry."""


class ParseError(ActorKernelError):
    """Malformed term or script text."""


class TraceFormatError(ActorKernelError):
    """Malformed trace file."""
