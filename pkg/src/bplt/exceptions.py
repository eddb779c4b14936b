"""Exception hierarchy. Validation failures map to CLI exit code 2, numerical
non-convergence to exit code 3.
"""

__all__ = [
    "BpltError",
    "ValidationError",
    "EnumerationGuardError",
    "TreeSizeError",
    "ConvergenceError",
]


class BpltError(Exception):
    pass


class ValidationError(BpltError, ValueError):
    pass


class EnumerationGuardError(ValidationError):
    def __init__(self, num_vertices: int, guard: int) -> None:
        super().__init__(
            f"exact enumeration needs |V| <= {guard}, got |V| = {num_vertices} "
            "(pass a larger guard to override)"
        )
        self.num_vertices = num_vertices
        self.guard = guard


class TreeSizeError(ValidationError):
    def __init__(self, node_cap: int) -> None:
        super().__init__(f"tree exceeds the node cap of {node_cap} nodes")
        self.node_cap = node_cap


class ConvergenceError(BpltError, RuntimeError):
    def __init__(self, message: str, residual: float, iterations: int) -> None:
        super().__init__(f"{message} (residual {residual:.3e} after {iterations} iterations)")
        self.residual = residual
        self.iterations = iterations
