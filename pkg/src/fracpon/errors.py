"""Exception types shared across the modem pipeline.

Argument validation raises plain :class:`ValueError`; the classes here
cover runtime signal conditions that callers may want to catch and
attribute to a pipeline stage.
"""


class StageError(RuntimeError):
    """Base class for errors raised by a receiver stage.

    Attributes
    ----------
    stage : str
        Short identifier of the stage that failed (e.g. ``"frame_sync"``).
    """

    def __init__(self, message: str, stage: str = ""):
        super().__init__(message)
        self.stage = stage


class DetectionError(StageError):
    """Frame/tone detection failed (peak-to-floor ratio below threshold)."""

    def __init__(self, message: str):
        super().__init__(message, stage="frame_detect")


class SyncError(StageError):
    """Frame synchronization metric below threshold."""

    def __init__(self, message: str):
        super().__init__(message, stage="frame_sync")


class ConvergenceError(StageError):
    """An adaptive loop (timing recovery or equalizer) diverged."""

    def __init__(self, message: str, stage: str):
        super().__init__(message, stage=stage)


class InstrumentationError(RuntimeError):
    """Operation counters were requested but not collected."""
