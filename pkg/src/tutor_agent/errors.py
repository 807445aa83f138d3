"""Exception types shared across the pipeline."""


class AgentError(Exception):
    """Base class for pipeline errors."""


class UnknownSessionError(AgentError):
    pass


class InvalidUtteranceError(AgentError):
    pass


class EmptyWindowError(AgentError):
    """No utterances fall inside the requested window; the tick is skipped."""


class MalformedResponseError(AgentError):
    """Backend response did not parse into the expected query count."""


class BackendTimeoutError(AgentError):
    pass


class BatchExhaustedError(AgentError):
    """Every query in the batch was filtered out."""


class EmptyPoolError(AgentError):
    """All searches for a tick returned nothing."""


class UnknownCardError(AgentError):
    pass


class IllegalTransitionError(AgentError):
    pass
