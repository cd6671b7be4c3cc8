"""Hair-clip mechanism (HCM) buckling model, design tools and crawler gait simulator."""

from __future__ import annotations

__version__ = "0.1.0"

from hairclip.mechanics import (  # noqa: E402
    PETG,
    REFERENCE_GEOMETRY,
    Convention,
    Material,
    RibbonGeometry,
    analyze_design,
    solve_buckling,
)

__all__ = [
    "PETG",
    "REFERENCE_GEOMETRY",
    "Convention",
    "Material",
    "RibbonGeometry",
    "analyze_design",
    "solve_buckling",
    "__version__",
]
