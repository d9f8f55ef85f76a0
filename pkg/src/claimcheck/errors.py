"""Exception types raised across the package."""


class ClaimCheckError(Exception):
    """Base class for all package-specific errors."""


# --- media / claims ---

class NotAnImage(ClaimCheckError):
    """Payload failed image magic-byte sniffing."""


class UnresolvedImage(ClaimCheckError):
    """An <image:k> reference does not resolve in the media registry."""

    def __init__(self, image_id: int):
        super().__init__(f"unresolved image reference <image:{image_id}>")
        self.image_id = image_id


# --- report ---

class AlreadyFinalized(ClaimCheckError):
    """Attempted to extend a report that already carries a justification."""


class BudgetTooSmall(ClaimCheckError):
    """Prompt budget cannot even hold the claim block."""


# --- llm gateway ---

class MissingPlaceholder(ClaimCheckError):
    def __init__(self, name: str):
        super().__init__(f"template placeholder [{name}] has no binding")
        self.name = name


class EndpointUnavailable(ClaimCheckError):
    """Model endpoint unreachable after exhausting retries."""


class ContextOverflow(ClaimCheckError):
    """Prompt content exceeds the model's context window."""


class NoChoiceFound(ClaimCheckError):
    """No decision option could be extracted from the model response."""


# --- actions ---

class UnknownImageRef(ClaimCheckError):
    def __init__(self, image_id: int):
        super().__init__(f"action references unknown image <image:{image_id}>")
        self.image_id = image_id


# --- evidence tools ---

class SearchUnavailable(ClaimCheckError):
    """Search API unreachable after retries."""


class VisionApiUnavailable(ClaimCheckError):
    """Reverse-image-search endpoint unreachable after retries."""


class GeoServiceUnavailable(ClaimCheckError):
    """Geolocation service unreachable after retries."""


class ScrapeFailed(ClaimCheckError):
    def __init__(self, url: str, reason: str = ""):
        msg = f"failed to scrape {url}"
        if reason:
            msg += f": {reason}"
        super().__init__(msg)
        self.url = url


class EmbedderUnavailable(ClaimCheckError):
    """Embedding endpoint unreachable after retries."""


# --- pipeline ---

class PipelineFailed(ClaimCheckError):
    """Non-recoverable failure mid fact-check; carries the partial report."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class UnjudgeableClaim(ClaimCheckError):
    """Verdict extraction failed twice and the taxonomy has no NEI fallback."""


# --- bench ---

class DatasetNotFound(ClaimCheckError):
    pass


class SchemaMismatch(ClaimCheckError):
    pass


class LengthMismatch(ClaimCheckError):
    pass


class UnknownLabel(ClaimCheckError):
    def __init__(self, label: str):
        super().__init__(f"label {label!r} not part of the expected label set")
        self.label = label


# --- replay ---

class MissingInteraction(ClaimCheckError):
    """Strict replay hit a request that was never recorded."""

    def __init__(self, kind: str, fingerprint: str):
        super().__init__(
            f"no recorded interaction for kind={kind} fingerprint={fingerprint}"
        )
        self.kind = kind
        self.fingerprint = fingerprint
