"""T-count reduction for Clifford+T circuits using spider-nest identities."""
from .circuit import Circuit, Gate, parse_qc, write_qc
from .gadgetize import DecomposedCircuit, run_pipeline
from .hadamard import move_h, split_tripartite
from .nest import OptimizerConfig, nest, optimize, template_list
from .phasepoly import HomogeneousCircuit
from .verify import circuit_equiv_postselected, diag_equiv

__all__ = [
    "Circuit", "Gate", "parse_qc", "write_qc", "DecomposedCircuit", "run_pipeline",
    "move_h", "split_tripartite", "OptimizerConfig", "nest", "optimize", "template_list",
    "HomogeneousCircuit", "circuit_equiv_postselected", "diag_equiv",
]
__version__ = "0.1.0"
