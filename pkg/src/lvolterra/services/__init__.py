"""Services for lvolterra."""

from lvolterra.services.ensemble_service import EnsembleService, EnsembleSpec, MemberResult

__all__ = ["EnsembleService", "EnsembleSpec", "MemberResult"]
