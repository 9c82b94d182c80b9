"""Exception hierarchy. Each class maps onto one CLI exit code."""

from typing import Optional


class GravityPipelineError(Exception):
    category = "pipeline"
    exit_code = 1

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message

    def one_line(self) -> str:
        text = " ".join(self.message.split())
        return f"error category={self.category} code={self.exit_code} message={text}"


class UsageError(GravityPipelineError):
    category = "usage"
    exit_code = 2


class InputError(GravityPipelineError):
    category = "input"
    exit_code = 3


class OutputError(GravityPipelineError):
    category = "output"
    exit_code = 3


# --- mesh (4) ---

class MeshError(GravityPipelineError, ValueError):
    category = "mesh"
    exit_code = 4


class ObjParseError(MeshError):
    category = "mesh.parse"


class MeshIndexError(MeshError):
    category = "mesh.index"


class DegenerateFaceError(MeshError):
    category = "mesh.degenerate_face"


class OpenSurfaceError(MeshError):
    category = "mesh.open_surface"


class WindingError(MeshError):
    category = "mesh.winding"


class NonPositiveVolumeError(MeshError):
    category = "mesh.volume"


# --- density (5) ---

class DensityError(GravityPipelineError, ValueError):
    category = "density"
    exit_code = 5


class DensityDomainError(DensityError):
    category = "density.out_of_domain"


# --- numeric domain (6) ---

class NumericDomainError(GravityPipelineError, ValueError):
    category = "domain"
    exit_code = 6


class PoleProximityError(NumericDomainError):
    category = "domain.pole"


class SingularPointError(NumericDomainError):
    category = "domain.singular_point"


class SingularQueryError(NumericDomainError):
    category = "domain.singular_query"


# --- model (7) ---

class ModelError(GravityPipelineError):
    category = "model"
    exit_code = 7


class NonPositiveMassError(ModelError):
    category = "model.mass"


class NonFiniteAccumulationError(ModelError):
    category = "model.non_finite"

    def __init__(self, message: str, tetrahedron: int):
        super().__init__(message)
        self.tetrahedron = tetrahedron


class InsufficientDegreeError(ModelError):
    category = "model.degree"


# --- propagation (8) ---

class PropagationError(GravityPipelineError):
    category = "propagation"
    exit_code = 8

    def __init__(self, message: str, last_state: Optional[object] = None):
        super().__init__(message)
        self.last_state = last_state


# --- verification (9) ---

class VerificationError(GravityPipelineError):
    category = "verification"
    exit_code = 9
