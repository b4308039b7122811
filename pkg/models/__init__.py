from .exact import GaussianRational, Interval
from .schemas import (
    ApproxRecord, DigitsReport, OutputFormat, OutputRecord, RefinementRecord,
    RunConfig, Seed, StepResult, StepStrategy, Verdict
)
from .identity import (
    IdentityTerm, MachinIdentity, VerificationCertificate, VerificationResult
)

__all__ = [
    "GaussianRational",
    "Interval",
    "Seed",
    "StepResult",
    "StepStrategy",
    "Verdict",
    "RefinementRecord",
    "ApproxRecord",
    "DigitsReport",
    "OutputFormat",
    "OutputRecord",
    "RunConfig",
    "IdentityTerm",
    "MachinIdentity",
    "VerificationCertificate",
    "VerificationResult",
]
