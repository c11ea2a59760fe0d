"""Decision procedures and classification tools for knotted substructural
logics: proof search over (hyper)sequent calculi, well-quasi-order
machinery, equation linearization/classification, and and-branching
counter machines."""

__version__ = "0.1.0"
