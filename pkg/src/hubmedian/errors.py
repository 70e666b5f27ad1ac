"""Exception hierarchy shared across the package."""


class HubMedianError(Exception):
    """Base class for all package-specific errors."""


class InputError(HubMedianError):
    """Malformed or inconsistent input data (files, headers, values, arguments)."""


class InfeasibleError(HubMedianError):
    """Instance cannot be solved: some deliveries are unreachable from every hub.

    Carries the offending delivery ids in ``delivery_ids``.
    """

    def __init__(self, message: str, delivery_ids: list[str] | None = None):
        super().__init__(message)
        self.delivery_ids = delivery_ids or []


class StaleIndexError(HubMedianError):
    """A prebuilt routing index does not match the graph it is used with."""
